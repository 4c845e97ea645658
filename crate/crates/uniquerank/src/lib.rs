//! Node ranking for attributed graphs via a two-walk Markov chain, with a
//! dominance-refinement step and a node-removal disruption benchmark.
//!
//! The chain blends two column-stochastic walks over the same node set: a
//! structural walk along graph edges, biased toward destinations whose
//! attributes stand out from their own neighborhoods, and a dense attribute
//! walk over pairwise similarity. Its stationary distribution scores nodes
//! that are both well-connected and hard to substitute. On top of that the
//! crate provides classical baselines (structure-only ranking, degree,
//! closeness, eigenvector), a refinement pass on the importance/uniqueness
//! plane, generators for vertex-transitive test graphs, and an evaluation
//! protocol that removes nodes, redirects their edges to the best similar
//! substitute nearby, and measures the local efficiency loss.

pub mod error;
pub mod evaluation;
pub mod graph;
pub mod kernel;
pub mod ranking;
pub mod refinement;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use evaluation::{
    attribute_histogram_export, distance_to_nearest_similar, find_replacement, local_efficiency,
    naive_baseline_select, refined_top_k_selection, run_grid, scatter_export, simulate_disruption,
    top_k_by_score, write_grid_csv, DisruptionReport, GridMetric, GridRow, GridTable, Method,
    NaiveSelection, ReplacementPolicy,
};
pub use graph::{
    load_graph, write_graph_files, AttributedGraph, LoadedGraph, NodeId, Normalization,
};
pub use kernel::{
    gamma_median_heuristic, rbf_similarity, similarity_matrix, similarity_matrix_with_cap,
    uniqueness_scores, OnTheFlyRbf, PairwiseSimilarity, SimilarityMatrix, DEFAULT_DENSE_NODE_CAP,
    DEFAULT_GAMMA_SAMPLE_PAIRS, DEFAULT_GAMMA_SEED,
};
pub use ranking::{
    attrirank, build_attribute_transition, build_sparse_structural, build_structural_transition,
    centrality, pagerank, power_iterate, power_iterate_traced, power_iterate_uniform_jump,
    uniquerank, CentralityKind, InitMode, RankVector, RankingConfig, SparseStructural,
    TransitionMatrix,
};
pub use refinement::{dominance_count, refine_top_k, ScorePlane};
pub use report::{write_atomic, MetaHeader};
pub use synth::{
    apply_perturbation, ground_truth_check, make_symmetric_graph, seeded_perturbation,
    PerturbationSpec, SymmetricKind,
};
