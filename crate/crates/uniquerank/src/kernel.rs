//! Gaussian similarity kernel, bandwidth selection, and per-node uniqueness.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Node count beyond which the dense similarity matrix refuses to allocate.
pub const DEFAULT_DENSE_NODE_CAP: usize = 50_000;
/// Pair sample size for [`gamma_median_heuristic`].
pub const DEFAULT_GAMMA_SAMPLE_PAIRS: usize = 10_000;
/// RNG seed for [`gamma_median_heuristic`].
pub const DEFAULT_GAMMA_SEED: u64 = 0;

/// exp(-gamma * ||x - y||^2), validated. Equal vectors give exactly 1.
pub fn rbf_similarity(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gamma must be finite and positive, got {gamma}"
        )));
    }
    Ok(rbf_unchecked(x, y, gamma))
}

/// Kernel core without validation. Clamped away from zero so downstream
/// transition columns stay strictly positive even when exp underflows.
pub(crate) fn rbf_unchecked(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let mut sq = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        sq += d * d;
    }
    if sq == 0.0 {
        return 1.0;
    }
    (-gamma * sq).exp().max(f64::MIN_POSITIVE)
}

/// Bandwidth from the median of sampled squared attribute distances:
/// gamma = 1 / median(||x_i - x_j||^2) over `sample_pairs` seeded draws of
/// distinct node pairs. Falls back to 1 when the median is not positive
/// (e.g. most sampled pairs share identical attributes).
pub fn gamma_median_heuristic(
    g: &AttributedGraph,
    sample_pairs: usize,
    seed: u64,
) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "gamma heuristic needs at least two nodes".into(),
        ));
    }
    if sample_pairs == 0 {
        return Err(Error::InvalidConfig(
            "gamma heuristic needs at least one sampled pair".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sq_dists = Vec::with_capacity(sample_pairs);
    for _ in 0..sample_pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (xi, xj) = (g.attributes_of(i), g.attributes_of(j));
        let sq: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
        sq_dists.push(sq);
    }
    sq_dists.sort_by(|a, b| a.total_cmp(b));
    let mid = sq_dists.len() / 2;
    let median = if sq_dists.len() % 2 == 1 {
        sq_dists[mid]
    } else {
        0.5 * (sq_dists[mid - 1] + sq_dists[mid])
    };
    if median > 0.0 {
        Ok(1.0 / median)
    } else {
        Ok(1.0)
    }
}

/// Dense symmetric similarity matrix with unit diagonal, stored row-major.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// All-pairs kernel matrix with the default size cap.
pub fn similarity_matrix(g: &AttributedGraph, gamma: f64) -> Result<SimilarityMatrix> {
    similarity_matrix_with_cap(g, gamma, DEFAULT_DENSE_NODE_CAP)
}

/// All-pairs kernel matrix; errors before allocating when `node_count > cap`.
/// Rows are computed in parallel; the result is bitwise symmetric because the
/// squared distance is evaluated identically for (i, j) and (j, i).
pub fn similarity_matrix_with_cap(
    g: &AttributedGraph,
    gamma: f64,
    cap: usize,
) -> Result<SimilarityMatrix> {
    let n = g.node_count();
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gamma must be finite and positive, got {gamma}"
        )));
    }
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let xi = g.attributes_of(i);
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = if i == j {
                    1.0
                } else {
                    rbf_unchecked(xi, g.attributes_of(j), gamma)
                };
            }
        });
    Ok(SimilarityMatrix { n, values })
}

/// Uniqueness u_i = 1 / mean similarity to graph neighbors (edge direction
/// ignored). Isolated nodes get u = 1, the minimum-uniqueness convention.
pub fn uniqueness_scores(g: &AttributedGraph, s: &SimilarityMatrix) -> Result<Vec<f64>> {
    if g.node_count() != s.node_count() {
        return Err(Error::DimensionMismatch {
            left: g.node_count(),
            right: s.node_count(),
        });
    }
    let scores = (0..g.node_count())
        .into_par_iter()
        .map(|i| {
            let nbrs = g.union_neighbors(i);
            if nbrs.is_empty() {
                return 1.0;
            }
            let mean: f64 =
                nbrs.iter().map(|&j| s.get(i, j)).sum::<f64>() / nbrs.len() as f64;
            1.0 / mean
        })
        .collect();
    Ok(scores)
}

/// Anything that can answer pairwise node similarity. Lets the ranking code
/// run either from a precomputed dense matrix or from attributes on the fly.
pub trait PairwiseSimilarity: Sync {
    fn node_count(&self) -> usize;
    fn similarity(&self, i: usize, j: usize) -> f64;
}

impl PairwiseSimilarity for SimilarityMatrix {
    fn node_count(&self) -> usize {
        self.n
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// On-the-fly kernel evaluation against a graph's attributes; no quadratic
/// storage, suitable for large sparse runs.
pub struct OnTheFlyRbf<'g> {
    graph: &'g AttributedGraph,
    gamma: f64,
}

impl<'g> OnTheFlyRbf<'g> {
    pub fn new(graph: &'g AttributedGraph, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma must be finite and positive, got {gamma}"
            )));
        }
        Ok(OnTheFlyRbf { graph, gamma })
    }
}

impl PairwiseSimilarity for OnTheFlyRbf<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            rbf_unchecked(self.graph.attributes_of(i), self.graph.attributes_of(j), self.gamma)
        }
    }
}
