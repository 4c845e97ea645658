//! Transition-matrix construction and power iteration: the two-walk chain,
//! its attribute-only and structure-only specializations, and classical
//! centrality baselines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::kernel::{PairwiseSimilarity, SimilarityMatrix};

/// Starting vector for power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// 1/N everywhere; deterministic default.
    Uniform,
    /// Seeded uniform-random entries, normalized to sum 1.
    SeededRandom(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingConfig {
    /// Weight of the structural walk vs. the attribute walk, in [0, 1].
    pub damping: f64,
    /// Uniqueness trade-off in [0, 1]; 1 ignores uniqueness entirely.
    pub alpha: f64,
    /// L1 convergence threshold.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub init: InitMode,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            damping: 0.85,
            alpha: 0.5,
            tolerance: 1e-10,
            max_iterations: 1000,
            init: InitMode::Uniform,
        }
    }
}

impl RankingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.damping) || !self.damping.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in [0, 1], got {}",
                self.damping
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Dense column-stochastic transition matrix. Entry (j, i) is the probability
/// of stepping from node i to node j, stored row-major, so `apply` computes
/// the next occupancy distribution as plain row dot products.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    values: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates shape, nonnegativity, and column sums (1 within 1e-12).
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(Error::InvalidConfig(format!(
                "transition matrix needs n*n = {} values, got {}",
                n * n,
                values.len()
            )));
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NonFinite {
                    context: format!("transition entry at flat index {idx} is {v}"),
                });
            }
        }
        for i in 0..n {
            let sum: f64 = (0..n).map(|j| values[j * n + i]).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "column {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(TransitionMatrix { n, values })
    }

    /// The matrix with every column uniform: Pr(i -> j) = 1/N for all pairs.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(TransitionMatrix {
            n,
            values: vec![1.0 / n as f64; n * n],
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Probability of stepping from `src` to `dest`.
    pub fn get(&self, dest: usize, src: usize) -> f64 {
        self.values[dest * self.n + src]
    }

    /// One chain step: y = M x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .into_par_iter()
            .map(|j| {
                let row = &self.values[j * n..(j + 1) * n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Power-iteration output.
#[derive(Debug, Clone)]
pub struct RankVector {
    /// Stationary occupancy estimate; nonnegative, sums to 1.
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Attribute-walk matrix: column i is node i's similarity profile normalized
/// to sum 1, so every entry is strictly positive.
pub fn build_attribute_transition(s: &SimilarityMatrix) -> TransitionMatrix {
    let n = s.node_count();
    let col_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| s.row(i).iter().sum::<f64>())
        .collect();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, cell) in row.iter_mut().enumerate() {
            *cell = s.get(j, i) / col_sums[i];
        }
    });
    TransitionMatrix { n, values }
}

/// Per-destination edge weight 1 / (alpha + (1 - alpha) * m_j), where m_j is
/// the minimum similarity between j and its neighbors. Nodes indistinguishable
/// from all neighbors get weight 1; so do isolated nodes.
pub(crate) fn destination_weights(
    g: &AttributedGraph,
    sim: &(impl PairwiseSimilarity + ?Sized),
    alpha: f64,
) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map(|j| {
            let nbrs = g.union_neighbors(j);
            if nbrs.is_empty() {
                return 1.0;
            }
            let min_sim = nbrs
                .iter()
                .map(|&n| sim.similarity(n, j))
                .fold(f64::INFINITY, f64::min);
            1.0 / (alpha + (1.0 - alpha) * min_sim)
        })
        .collect()
}

/// Structural-walk matrix: column i spreads mass over the out-neighbors of i
/// in proportion to their destination weights. Dangling columns are uniform.
pub fn build_structural_transition(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    alpha: f64,
) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let n = g.node_count();
    if n != s.node_count() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: s.node_count(),
        });
    }
    let weights = destination_weights(g, s, alpha);
    let col_sums: Vec<f64> = (0..n)
        .map(|i| g.out_neighbors(i).iter().map(|&j| weights[j]).sum())
        .collect();
    let mut values = vec![0.0; n * n];
    // Column-major fill: columns are independent, but the buffer is row-major,
    // so write sequentially; N here is capped by the dense similarity cap.
    for i in 0..n {
        let outs = g.out_neighbors(i);
        if outs.is_empty() {
            for j in 0..n {
                values[j * n + i] = 1.0 / n as f64;
            }
        } else {
            for &j in outs {
                values[j * n + i] = weights[j] / col_sums[i];
            }
        }
    }
    Ok(TransitionMatrix { n, values })
}

fn initial_vector(n: usize, init: InitMode) -> Vec<f64> {
    match init {
        InitMode::Uniform => vec![1.0 / n as f64; n],
        InitMode::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = v.iter().sum();
            if sum > 0.0 {
                v.iter_mut().for_each(|x| *x /= sum);
            } else {
                v.fill(1.0 / n as f64);
            }
            v
        }
    }
}

fn normalize_l1(v: &mut [f64]) {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Shared power-iteration loop over an arbitrary chain step.
///
/// Each iterate is renormalized to sum 1 before the convergence check, and
/// the observer sees every normalized iterate. The loop also detects a
/// period-2 orbit (possible at damping 1 on bipartite structures): when the
/// iterate returns to its grandparent while still far from its parent, the
/// average of the two phases is the stationary point, and convergence is
/// decided by that vector's own fixed-point residual.
fn run_power(
    n: usize,
    config: &RankingConfig,
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    observe: &mut dyn FnMut(usize, &[f64]),
) -> Result<RankVector> {
    config.validate()?;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut cur = initial_vector(n, config.init);
    let mut prev: Option<Vec<f64>> = None;
    for t in 1..=config.max_iterations {
        let mut next = apply(&cur);
        normalize_l1(&mut next);
        observe(t, &next);
        let step = l1_distance(&next, &cur);
        if step < config.tolerance {
            return Ok(RankVector {
                scores: next,
                iterations_used: t,
                converged: true,
            });
        }
        if let Some(p) = &prev {
            if l1_distance(&next, p) < config.tolerance {
                let mut avg: Vec<f64> = next.iter().zip(&cur).map(|(a, b)| 0.5 * (a + b)).collect();
                normalize_l1(&mut avg);
                let mut image = apply(&avg);
                normalize_l1(&mut image);
                let residual = l1_distance(&image, &avg);
                return Ok(RankVector {
                    scores: avg,
                    iterations_used: t,
                    converged: residual < config.tolerance,
                });
            }
        }
        prev = Some(std::mem::replace(&mut cur, next));
    }
    Ok(RankVector {
        scores: cur,
        iterations_used: config.max_iterations,
        converged: false,
    })
}

/// Iterates pi <- (1 - d) Q pi + d P pi to its stationary distribution.
pub fn power_iterate(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    config: &RankingConfig,
) -> Result<RankVector> {
    power_iterate_traced(p, q, config, |_, _| {})
}

/// [`power_iterate`] with an observer called as (iteration, iterate) after
/// every normalized update.
pub fn power_iterate_traced(
    p: &TransitionMatrix,
    q: &TransitionMatrix,
    config: &RankingConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<RankVector> {
    if p.node_count() != q.node_count() {
        return Err(Error::DimensionMismatch {
            left: p.node_count(),
            right: q.node_count(),
        });
    }
    let n = p.node_count();
    let d = config.damping;
    let apply = move |x: &[f64]| -> Vec<f64> {
        (0..n)
            .into_par_iter()
            .map(|j| {
                let prow = &p.values[j * n..(j + 1) * n];
                let qrow = &q.values[j * n..(j + 1) * n];
                let mut acc = 0.0;
                for i in 0..n {
                    acc += ((1.0 - d) * qrow[i] + d * prow[i]) * x[i];
                }
                acc
            })
            .collect()
    };
    run_power(n, config, &apply, &mut observer)
}

/// Full two-walk ranking: structural walk weighted by destination uniqueness,
/// blended with the dense attribute walk.
pub fn uniquerank(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    config: &RankingConfig,
) -> Result<RankVector> {
    config.validate()?;
    let p = build_structural_transition(g, s, config.alpha)?;
    let q = build_attribute_transition(s);
    power_iterate(&p, &q, config)
}

/// The alpha = 1 specialization: structural weights collapse to uniform, so
/// only attribute similarity and raw structure drive the ranking.
pub fn attrirank(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    config: &RankingConfig,
) -> Result<RankVector> {
    let cfg = RankingConfig {
        alpha: 1.0,
        ..*config
    };
    uniquerank(g, s, &cfg)
}

/// Structure-only ranking: pi <- (1 - d)/N + d P pi with P uniform over
/// out-neighbors and dangling columns spread uniformly.
pub fn pagerank(g: &AttributedGraph, config: &RankingConfig) -> Result<RankVector> {
    config.validate()?;
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = config.damping;
    let out_deg: Vec<f64> = (0..n).map(|i| g.out_neighbors(i).len() as f64).collect();
    let dangling: Vec<usize> = (0..n).filter(|&i| g.out_neighbors(i).is_empty()).collect();
    let apply = move |x: &[f64]| -> Vec<f64> {
        let total: f64 = x.iter().sum();
        let dangling_mass: f64 = dangling.iter().map(|&i| x[i]).sum();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut acc = 0.0;
                for &i in g.in_neighbors(j) {
                    acc += x[i] / out_deg[i];
                }
                (1.0 - d) * total / n as f64 + d * (acc + dangling_mass / n as f64)
            })
            .collect()
    };
    run_power(n, config, &apply, &mut |_, _| {})
}

/// Structural walk in compressed sparse form, gathered per destination so the
/// chain step parallelizes without write contention. Columns of dangling
/// sources are implicit (uniform), tracked by index.
pub struct SparseStructural {
    n: usize,
    dest_ptr: Vec<usize>,
    src_idx: Vec<usize>,
    probs: Vec<f64>,
    dangling: Vec<usize>,
}

impl SparseStructural {
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Weighted-edge step plus the dangling columns' uniform spread; the
    /// caller adds any jump term.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let dangling_mass: f64 = self.dangling.iter().map(|&i| x[i]).sum();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let lo = self.dest_ptr[j];
                let hi = self.dest_ptr[j + 1];
                let mut acc = 0.0;
                for k in lo..hi {
                    acc += self.probs[k] * x[self.src_idx[k]];
                }
                acc + dangling_mass / n as f64
            })
            .collect()
    }
}

/// Builds the structural walk without materializing any dense matrix;
/// similarity is evaluated only along edges.
pub fn build_sparse_structural(
    g: &AttributedGraph,
    sim: &(impl PairwiseSimilarity + ?Sized),
    alpha: f64,
) -> Result<SparseStructural> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n != sim.node_count() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: sim.node_count(),
        });
    }
    let weights = destination_weights(g, sim, alpha);
    let col_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| g.out_neighbors(i).iter().map(|&j| weights[j]).sum())
        .collect();
    let mut dest_ptr = Vec::with_capacity(n + 1);
    dest_ptr.push(0);
    for j in 0..n {
        dest_ptr.push(dest_ptr[j] + g.in_neighbors(j).len());
    }
    let total = dest_ptr[n];
    let mut src_idx = vec![0usize; total];
    let mut probs = vec![0.0; total];
    {
        // Slice the flat buffers per destination so rows fill in parallel.
        let mut src_chunks: Vec<&mut [usize]> = Vec::with_capacity(n);
        let mut prob_chunks: Vec<&mut [f64]> = Vec::with_capacity(n);
        let (mut src_rest, mut prob_rest) = (&mut src_idx[..], &mut probs[..]);
        for j in 0..n {
            let len = dest_ptr[j + 1] - dest_ptr[j];
            let (s_head, s_tail) = src_rest.split_at_mut(len);
            let (p_head, p_tail) = prob_rest.split_at_mut(len);
            src_chunks.push(s_head);
            prob_chunks.push(p_head);
            src_rest = s_tail;
            prob_rest = p_tail;
        }
        src_chunks
            .into_par_iter()
            .zip(prob_chunks)
            .enumerate()
            .for_each(|(j, (srcs, ps))| {
                for (slot, &i) in g.in_neighbors(j).iter().enumerate() {
                    srcs[slot] = i;
                    ps[slot] = weights[j] / col_sums[i];
                }
            });
    }
    let dangling = (0..n).filter(|&i| g.out_neighbors(i).is_empty()).collect();
    Ok(SparseStructural {
        n,
        dest_ptr,
        src_idx,
        probs,
        dangling,
    })
}

/// Large-graph ranking: the attribute walk is replaced by a uniform jump,
/// pi <- (1 - d)/N + d P pi, keeping per-iteration cost linear in edges.
pub fn power_iterate_uniform_jump(
    p: &SparseStructural,
    config: &RankingConfig,
) -> Result<RankVector> {
    let n = p.node_count();
    let d = config.damping;
    let apply = move |x: &[f64]| -> Vec<f64> {
        let total: f64 = x.iter().sum();
        let mut y = p.apply(x);
        let jump = (1.0 - d) * total / n as f64;
        y.iter_mut().for_each(|v| *v = jump + d * *v);
        y
    };
    run_power(n, config, &apply, &mut |_, _| {})
}

const EIGEN_TOLERANCE: f64 = 1e-10;
const EIGEN_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CentralityKind {
    Degree,
    Closeness,
    Eigenvector,
}

impl CentralityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CentralityKind::Degree => "degree",
            CentralityKind::Closeness => "closeness",
            CentralityKind::Eigenvector => "eigenvector",
        }
    }
}

impl std::str::FromStr for CentralityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(CentralityKind::Degree),
            "closeness" => Ok(CentralityKind::Closeness),
            "eigenvector" => Ok(CentralityKind::Eigenvector),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Classical centrality baselines.
///
/// Degree counts neighbors (in plus out when directed). Closeness is the
/// harmonic variant over out-direction distances, scaled by 1/(N-1), which
/// stays finite on disconnected and directed graphs. Eigenvector centrality
/// runs power iteration on the symmetrized adjacency plus the identity (the
/// shift keeps bipartite structures from oscillating), L2-normalized.
pub fn centrality(g: &AttributedGraph, kind: CentralityKind) -> Result<Vec<f64>> {
    let n = g.node_count();
    match kind {
        CentralityKind::Degree => Ok((0..n)
            .map(|i| {
                if g.is_directed() {
                    (g.out_neighbors(i).len() + g.in_neighbors(i).len()) as f64
                } else {
                    g.out_neighbors(i).len() as f64
                }
            })
            .collect()),
        CentralityKind::Closeness => {
            if n == 1 {
                return Ok(vec![0.0]);
            }
            Ok((0..n)
                .into_par_iter()
                .map(|i| {
                    let dist = g.bfs_out(i, None);
                    let sum: f64 = dist
                        .iter()
                        .enumerate()
                        .filter(|&(j, &d)| j != i && d != usize::MAX)
                        .map(|(_, &d)| 1.0 / d as f64)
                        .sum();
                    sum / (n - 1) as f64
                })
                .collect())
        }
        CentralityKind::Eigenvector => {
            let sym: Vec<Vec<usize>> = (0..n).map(|i| g.union_neighbors(i)).collect();
            let mut cur = vec![1.0 / (n as f64).sqrt(); n];
            for _ in 0..EIGEN_MAX_ITERATIONS {
                let mut next: Vec<f64> = (0..n)
                    .into_par_iter()
                    .map(|i| cur[i] + sym[i].iter().map(|&j| cur[j]).sum::<f64>())
                    .collect();
                let norm: f64 = next.iter().map(|v| v * v).sum::<f64>().sqrt();
                next.iter_mut().for_each(|v| *v /= norm);
                let diff = l1_distance(&next, &cur);
                cur = next;
                if diff < EIGEN_TOLERANCE {
                    return Ok(cur);
                }
            }
            Err(Error::EigenvectorNoConvergence {
                max_iterations: EIGEN_MAX_ITERATIONS,
            })
        }
    }
}
