//! Vertex-transitive test graphs with controlled attribute perturbation, and
//! the ranking ground-truth check built on them.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};
use crate::kernel::{
    gamma_median_heuristic, similarity_matrix, DEFAULT_GAMMA_SAMPLE_PAIRS, DEFAULT_GAMMA_SEED,
};
use crate::ranking::{uniquerank, RankingConfig};

/// Supported vertex-transitive topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetricKind {
    Cycle,
    Complete,
    Hypercube,
}

impl SymmetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetricKind::Cycle => "cycle",
            SymmetricKind::Complete => "complete",
            SymmetricKind::Hypercube => "hypercube",
        }
    }
}

impl std::str::FromStr for SymmetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(SymmetricKind::Cycle),
            "complete" => Ok(SymmetricKind::Complete),
            "hypercube" => Ok(SymmetricKind::Hypercube),
            other => Err(Error::InvalidConfig(format!(
                "unknown graph kind {other:?} (expected cycle, complete, or hypercube)"
            ))),
        }
    }
}

/// Builds the topology with single-dimension zero attributes on every node.
/// `size_param` is the node count for cycles (at least 3) and complete graphs
/// (at least 2), and the dimension for hypercubes (at least 1).
pub fn make_symmetric_graph(kind: SymmetricKind, size_param: usize) -> Result<AttributedGraph> {
    let min = match kind {
        SymmetricKind::Cycle => 3,
        SymmetricKind::Complete => 2,
        SymmetricKind::Hypercube => 1,
    };
    if size_param < min {
        return Err(Error::SymmetricSizeTooSmall {
            kind: kind.as_str(),
            min,
            got: size_param,
        });
    }
    if kind == SymmetricKind::Hypercube && size_param > 30 {
        return Err(Error::InvalidConfig(format!(
            "hypercube dimension {size_param} exceeds the supported maximum of 30"
        )));
    }
    let (n, edges) = match kind {
        SymmetricKind::Cycle => {
            let edges: Vec<_> = (0..size_param).map(|i| (i, (i + 1) % size_param)).collect();
            (size_param, edges)
        }
        SymmetricKind::Complete => {
            let mut edges = Vec::new();
            for i in 0..size_param {
                for j in (i + 1)..size_param {
                    edges.push((i, j));
                }
            }
            (size_param, edges)
        }
        SymmetricKind::Hypercube => {
            let n = 1usize << size_param;
            let mut edges = Vec::new();
            for v in 0..n {
                for bit in 0..size_param {
                    let w = v ^ (1 << bit);
                    if v < w {
                        edges.push((v, w));
                    }
                }
            }
            (n, edges)
        }
    };
    AttributedGraph::new(false, &edges, vec![vec![0.0]; n])
}

/// A set of nodes to shift away from the shared base attribute vector.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub base: Vec<f64>,
    pub perturbed_nodes: Vec<NodeId>,
    pub delta: Vec<f64>,
    pub seed: u64,
}

impl PerturbationSpec {
    /// Rejects empty node sets, zero deltas, and length mismatches: a
    /// perturbation that changes nothing makes any rank check vacuous.
    pub fn new(
        base: Vec<f64>,
        perturbed_nodes: Vec<NodeId>,
        delta: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if base.len() != delta.len() {
            return Err(Error::DimensionMismatch {
                left: base.len(),
                right: delta.len(),
            });
        }
        if perturbed_nodes.is_empty() {
            return Err(Error::InvalidPerturbation(
                "at least one node must be perturbed".into(),
            ));
        }
        if delta.iter().all(|&d| d == 0.0) {
            return Err(Error::InvalidPerturbation("delta must be nonzero".into()));
        }
        if delta.iter().chain(&base).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPerturbation(
                "base and delta must be finite".into(),
            ));
        }
        let mut sorted = perturbed_nodes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != perturbed_nodes.len() {
            return Err(Error::InvalidPerturbation(
                "perturbed node set contains duplicates".into(),
            ));
        }
        Ok(PerturbationSpec {
            base,
            perturbed_nodes,
            delta,
            seed,
        })
    }
}

/// Draws a spec with `count` seeded-random nodes and a seeded delta with each
/// coordinate in [0.5, 1.0), on a zero base of the given dimension.
pub fn seeded_perturbation(
    g: &AttributedGraph,
    dims: usize,
    count: usize,
    seed: u64,
) -> Result<PerturbationSpec> {
    let n = g.node_count();
    if count == 0 || count > n {
        return Err(Error::InvalidPerturbation(format!(
            "cannot perturb {count} of {n} nodes"
        )));
    }
    if dims == 0 {
        return Err(Error::InvalidPerturbation(
            "attribute dimension must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(count);
    let mut remaining: Vec<NodeId> = (0..n).collect();
    for _ in 0..count {
        let idx = rng.random_range(0..remaining.len());
        picked.push(remaining.swap_remove(idx));
    }
    picked.sort_unstable();
    let delta: Vec<f64> = (0..dims).map(|_| rng.random_range(0.5..1.0)).collect();
    PerturbationSpec::new(vec![0.0; dims], picked, delta, seed)
}

/// Replaces every node's attributes with base, then adds delta on the
/// perturbed nodes. Adjacency is untouched.
pub fn apply_perturbation(g: &AttributedGraph, spec: &PerturbationSpec) -> Result<AttributedGraph> {
    let n = g.node_count();
    for &v in &spec.perturbed_nodes {
        if v >= n {
            return Err(Error::NodeOutOfRange { id: v, n });
        }
    }
    let mut rows = vec![spec.base.clone(); n];
    for &v in &spec.perturbed_nodes {
        for (cell, d) in rows[v].iter_mut().zip(&spec.delta) {
            *cell += d;
        }
    }
    let edges: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|u| {
            g.out_neighbors(u)
                .iter()
                .filter(move |&&v| g.is_directed() || u < v)
                .map(move |&v| (u, v))
        })
        .collect();
    AttributedGraph::new(g.is_directed(), &edges, rows)
}

/// True iff, after perturbation, every perturbed node outranks every default
/// node under the two-walk chain with the given config. The bandwidth comes
/// from the median heuristic on the perturbed graph. False when either class
/// is empty (nothing to compare).
pub fn ground_truth_check(
    g: &AttributedGraph,
    spec: &PerturbationSpec,
    config: &RankingConfig,
) -> Result<bool> {
    let perturbed = apply_perturbation(g, spec)?;
    let n = perturbed.node_count();
    if spec.perturbed_nodes.len() >= n {
        return Ok(false);
    }
    let gamma = gamma_median_heuristic(&perturbed, DEFAULT_GAMMA_SAMPLE_PAIRS, DEFAULT_GAMMA_SEED)?;
    let s = similarity_matrix(&perturbed, gamma)?;
    let pi = uniquerank(&perturbed, &s, config)?;
    let mut is_perturbed = vec![false; n];
    for &v in &spec.perturbed_nodes {
        is_perturbed[v] = true;
    }
    let mut min_perturbed = f64::INFINITY;
    let mut max_default = f64::NEG_INFINITY;
    for (v, &score) in pi.scores.iter().enumerate() {
        if is_perturbed[v] {
            min_perturbed = min_perturbed.min(score);
        } else {
            max_default = max_default.max(score);
        }
    }
    Ok(min_perturbed > max_default)
}
