//! Dominance-count refinement: promotes a Markov-chain top set into a
//! high-confidence set on the (importance, uniqueness) plane.

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Per-node (importance, uniqueness) coordinates plus the chain's seed set.
#[derive(Debug, Clone)]
pub struct ScorePlane {
    points: Vec<(f64, f64)>,
    seed_set: Vec<NodeId>,
}

impl ScorePlane {
    /// Validates coordinate vectors (finite, nonnegative, equal length) and
    /// the seed set (in range, distinct).
    pub fn new(importance: Vec<f64>, uniqueness: Vec<f64>, seed_set: Vec<NodeId>) -> Result<Self> {
        if importance.len() != uniqueness.len() {
            return Err(Error::DimensionMismatch {
                left: importance.len(),
                right: uniqueness.len(),
            });
        }
        if importance.is_empty() {
            return Err(Error::EmptyPlane);
        }
        let n = importance.len();
        for (i, (&a, &u)) in importance.iter().zip(&uniqueness).enumerate() {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidPlane(format!(
                    "importance of node {i} is {a}; must be finite and nonnegative"
                )));
            }
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidPlane(format!(
                    "uniqueness of node {i} is {u}; must be finite and nonnegative"
                )));
            }
        }
        let mut seen = vec![false; n];
        for &id in &seed_set {
            if id >= n {
                return Err(Error::NodeOutOfRange { id, n });
            }
            if seen[id] {
                return Err(Error::InvalidPlane(format!("duplicate seed node {id}")));
            }
            seen[id] = true;
        }
        let points = importance.into_iter().zip(uniqueness).collect();
        Ok(ScorePlane { points, seed_set })
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn importance(&self, i: NodeId) -> f64 {
        self.points[i].0
    }

    pub fn uniqueness(&self, i: NodeId) -> f64 {
        self.points[i].1
    }

    pub fn seed_set(&self) -> &[NodeId] {
        &self.seed_set
    }
}

/// Number of seed nodes that node `i` strictly beats on both axes.
pub fn dominance_count(plane: &ScorePlane, i: NodeId) -> usize {
    let (a, u) = plane.points[i];
    plane
        .seed_set
        .iter()
        .filter(|&&j| {
            let (aj, uj) = plane.points[j];
            a > aj && u > uj
        })
        .count()
}

/// Selects the final k nodes: keep nodes at least as strong as the weakest
/// seed on each axis, order them by how many seeds they strictly dominate,
/// and break ties by importance plus uniqueness, then uniqueness, then id.
///
/// The output is closed under strict dominance against the rest of the
/// plane: no excluded node beats a selected node on both axes at once.
pub fn refine_top_k(plane: &ScorePlane, k: usize) -> Result<Vec<NodeId>> {
    if k > plane.seed_set.len() {
        return Err(Error::KExceedsSeedSet {
            k,
            seed_len: plane.seed_set.len(),
        });
    }
    let mut min_a = f64::INFINITY;
    let mut min_u = f64::INFINITY;
    for &j in &plane.seed_set {
        let (a, u) = plane.points[j];
        min_a = min_a.min(a);
        min_u = min_u.min(u);
    }
    let mut survivors: Vec<NodeId> = (0..plane.node_count())
        .filter(|&i| {
            let (a, u) = plane.points[i];
            a >= min_a && u >= min_u
        })
        .collect();
    let counts: Vec<usize> = survivors
        .iter()
        .map(|&i| dominance_count(plane, i))
        .collect();
    let by_node: std::collections::HashMap<NodeId, usize> =
        survivors.iter().copied().zip(counts).collect();
    survivors.sort_by(|&x, &y| {
        let (ax, ux) = plane.points[x];
        let (ay, uy) = plane.points[y];
        by_node[&y]
            .cmp(&by_node[&x])
            .then_with(|| (ay + uy).total_cmp(&(ax + ux)))
            .then_with(|| uy.total_cmp(&ux))
            .then_with(|| x.cmp(&y))
    });
    survivors.truncate(k);
    Ok(survivors)
}
