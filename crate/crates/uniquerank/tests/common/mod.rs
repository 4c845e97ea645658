//! Seeded random-instance generators and brute-force oracles shared by the
//! integration test targets. Not every target uses every helper.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use uniquerank::AttributedGraph;

/// Erdos-Renyi-style attributed graph with 2..=max_n nodes, 1..=3 attribute
/// dimensions, and a random edge density.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, directed: bool) -> AttributedGraph {
    let n = rng.random_range(2..=max_n);
    let dims = rng.random_range(1..=3);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dims).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let density = rng.random_range(0.05..0.4);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!directed && j <= i) {
                continue;
            }
            if rng.random::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    AttributedGraph::new(directed, &edges, rows).unwrap()
}

/// Random permutation of 0..n.
pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// The same graph with node ids permuted: new id of old node v is perm[v].
pub fn permute_graph(g: &AttributedGraph, perm: &[usize]) -> AttributedGraph {
    let n = g.node_count();
    let mut rows = vec![Vec::new(); n];
    for v in 0..n {
        rows[perm[v]] = g.attributes_of(v).to_vec();
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for &v in g.out_neighbors(u) {
            if !g.is_directed() && v < u {
                continue;
            }
            edges.push((perm[u], perm[v]));
        }
    }
    AttributedGraph::new(g.is_directed(), &edges, rows).unwrap()
}

pub const INF: usize = usize::MAX / 4;

/// All-pairs shortest paths over out-edges, optionally confined to a node set.
pub fn floyd_warshall(g: &AttributedGraph, allowed: Option<&[bool]>) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let ok = |v: usize| allowed.map_or(true, |m| m[v]);
    let mut dist = vec![vec![INF; n]; n];
    for u in 0..n {
        if !ok(u) {
            continue;
        }
        dist[u][u] = 0;
        for &v in g.out_neighbors(u) {
            if ok(v) {
                dist[u][v] = 1;
            }
        }
    }
    for k in 0..n {
        if !ok(k) {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][k].saturating_add(dist[k][j]);
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    dist
}

/// Solves (R - I) pi = 0 with the sum-to-one constraint replacing the last
/// equation, where R[j][i] = (1 - d) q_ji + d p_ji.
pub fn solve_stationary(
    p: &uniquerank::TransitionMatrix,
    q: &uniquerank::TransitionMatrix,
    d: f64,
) -> Vec<f64> {
    use nalgebra::{DMatrix, DVector};
    let n = p.node_count();
    let a = DMatrix::from_fn(n, n, |r, c| {
        if r == n - 1 {
            1.0
        } else {
            let entry = (1.0 - d) * q.get(r, c) + d * p.get(r, c);
            entry - if r == c { 1.0 } else { 0.0 }
        }
    });
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let solved = a.lu().solve(&b).expect("stationary system is nonsingular");
    solved.iter().cloned().collect()
}
