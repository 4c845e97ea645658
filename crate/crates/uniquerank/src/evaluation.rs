//! Node-removal disruption protocol: replacement search, local efficiency,
//! distance-to-substitute study, naive baseline, grid runner, and exporters.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};
use crate::kernel::{uniqueness_scores, SimilarityMatrix};
use crate::ranking::{attrirank, centrality, pagerank, uniquerank, CentralityKind, RankingConfig};
use crate::refinement::{refine_top_k, ScorePlane};
use crate::report::{write_atomic, MetaHeader};

/// How a removed node may be substituted and how far the distance study looks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplacementPolicy {
    /// Minimum attribute similarity for a replacement candidate, in (0, 1].
    pub similarity_threshold: f64,
    /// Radius of the replacement search around the removed node.
    pub search_hops: usize,
    /// Saturation distance for the nearest-similar-node study.
    pub distance_cap: usize,
    /// When true, the removed node itself joins the measured pair set (its
    /// pairs contribute 0 after removal). Defaults to survivors only.
    pub include_removed_in_pairs: bool,
}

impl Default for ReplacementPolicy {
    fn default() -> Self {
        ReplacementPolicy {
            similarity_threshold: 0.5,
            search_hops: 2,
            distance_cap: 10,
            include_removed_in_pairs: false,
        }
    }
}

impl ReplacementPolicy {
    pub fn validate(&self) -> Result<()> {
        let t = self.similarity_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "similarity threshold must lie in (0, 1], got {t}"
            )));
        }
        if self.search_hops == 0 {
            return Err(Error::InvalidConfig("search_hops must be at least 1".into()));
        }
        if self.distance_cap == 0 {
            return Err(Error::InvalidConfig("distance_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything measured for one simulated removal.
#[derive(Debug, Clone)]
pub struct DisruptionReport {
    pub node: NodeId,
    pub replacement: Option<NodeId>,
    pub replacement_similarity: Option<f64>,
    pub efficiency_before: f64,
    pub efficiency_after: f64,
    /// 1 - after/before, clamped to [0, 1]; 0 when before is 0.
    pub efficiency_reduction: f64,
    /// The same ratio before clamping; redirection can create shortcuts.
    pub efficiency_reduction_raw: f64,
    pub pair_set_size: usize,
    pub distance_to_nearest_similar: f64,
}

/// Best qualifying substitute within the search radius: highest similarity,
/// then fewest hops, then smallest id. None when nothing reaches threshold.
pub fn find_replacement(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    removed: NodeId,
    policy: &ReplacementPolicy,
) -> Result<Option<(NodeId, f64)>> {
    policy.validate()?;
    let candidates = g.khop_neighborhood(removed, policy.search_hops)?;
    let hops = g.bfs_undirected_capped(removed, policy.search_hops);
    let mut best: Option<(NodeId, f64, usize)> = None;
    for c in candidates {
        let sim = s.get(removed, c);
        if sim < policy.similarity_threshold {
            continue;
        }
        let better = match best {
            None => true,
            Some((bid, bsim, bhops)) => {
                sim > bsim
                    || (sim == bsim && hops[c] < bhops)
                    || (sim == bsim && hops[c] == bhops && c < bid)
            }
        };
        if better {
            best = Some((c, sim, hops[c]));
        }
    }
    Ok(best.map(|(id, sim, _)| (id, sim)))
}

/// Sum of inverse shortest-path distances over ordered pairs of `pair_nodes`,
/// with paths confined to `path_nodes`; unreachable pairs contribute 0.
pub fn local_efficiency(
    g: &AttributedGraph,
    pair_nodes: &[NodeId],
    path_nodes: &[NodeId],
) -> Result<f64> {
    let n = g.node_count();
    let mut mask = vec![false; n];
    for &u in path_nodes {
        if u >= n {
            return Err(Error::NodeOutOfRange { id: u, n });
        }
        mask[u] = true;
    }
    for &u in pair_nodes {
        if u >= n {
            return Err(Error::NodeOutOfRange { id: u, n });
        }
        if !mask[u] {
            return Err(Error::InvalidConfig(format!(
                "pair node {u} is outside the path set"
            )));
        }
    }
    let in_pairs: Vec<bool> = {
        let mut v = vec![false; n];
        for &u in pair_nodes {
            v[u] = true;
        }
        v
    };
    // Per-source subtotals are collected in order and reduced sequentially
    // so the float sum is identical across thread counts.
    let per_source: Vec<f64> = pair_nodes
        .par_iter()
        .map(|&i| {
            let dist = g.bfs_out(i, Some(&mask));
            dist.iter()
                .enumerate()
                .filter(|&(j, &d)| j != i && in_pairs[j] && d != usize::MAX)
                .map(|(_, &d)| 1.0 / d as f64)
                .sum::<f64>()
        })
        .collect();
    Ok(per_source.iter().sum())
}

/// Undirected BFS distance to the nearest other node whose similarity to
/// `node` reaches `threshold`; saturates at `cap` when none is that close.
pub fn distance_to_nearest_similar(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    node: NodeId,
    threshold: f64,
    cap: usize,
) -> Result<f64> {
    if node >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            id: node,
            n: g.node_count(),
        });
    }
    let dist = g.bfs_undirected_capped(node, cap);
    let mut best = usize::MAX;
    for j in 0..g.node_count() {
        if j != node && dist[j] != usize::MAX && s.get(node, j) >= threshold {
            best = best.min(dist[j]);
        }
    }
    Ok(if best == usize::MAX { cap as f64 } else { best as f64 })
}

/// Removes one node (with replacement redirection when a candidate
/// qualifies) and measures the efficiency change over the node's two-hop
/// neighborhood, pinned before the removal.
pub fn simulate_disruption(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    node: NodeId,
    policy: &ReplacementPolicy,
) -> Result<DisruptionReport> {
    policy.validate()?;
    let hood = g.khop_neighborhood(node, 2)?;
    let mut path_before: Vec<NodeId> = hood.clone();
    path_before.push(node);
    path_before.sort_unstable();
    let pairs: Vec<NodeId> = if policy.include_removed_in_pairs {
        path_before.clone()
    } else {
        hood.clone()
    };
    let path_after: Vec<NodeId> = if policy.include_removed_in_pairs {
        path_before.clone()
    } else {
        hood.clone()
    };

    let before = local_efficiency(g, &pairs, &path_before)?;
    let found = find_replacement(g, s, node, policy)?;
    let g_mod = g.remove_and_redirect(node, found.map(|(id, _)| id))?;
    let after = local_efficiency(&g_mod, &pairs, &path_after)?;

    let raw = if before > 0.0 { 1.0 - after / before } else { 0.0 };
    let distance = distance_to_nearest_similar(
        g,
        s,
        node,
        policy.similarity_threshold,
        policy.distance_cap,
    )?;
    Ok(DisruptionReport {
        node,
        replacement: found.map(|(id, _)| id),
        replacement_similarity: found.map(|(_, sim)| sim),
        efficiency_before: before,
        efficiency_after: after,
        efficiency_reduction: raw.clamp(0.0, 1.0),
        efficiency_reduction_raw: raw,
        pair_set_size: pairs.len(),
        distance_to_nearest_similar: distance,
    })
}

/// Output of [`naive_baseline_select`].
#[derive(Debug, Clone)]
pub struct NaiveSelection {
    pub nodes: Vec<NodeId>,
    /// True when fewer than the requested k nodes qualified.
    pub shortfall: bool,
}

/// Brute-force baseline: keep nodes whose nearest similar node (similarity
/// at or above `threshold`) is more than two hops away, order by importance
/// descending, and take up to k.
pub fn naive_baseline_select(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    importance: &[f64],
    threshold: f64,
    k: usize,
) -> Result<NaiveSelection> {
    let n = g.node_count();
    if importance.len() != n {
        return Err(Error::DimensionMismatch {
            left: importance.len(),
            right: n,
        });
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "baseline threshold must lie in (0, 1], got {threshold}"
        )));
    }
    let qualifies: Vec<NodeId> = (0..n)
        .into_par_iter()
        .filter(|&v| {
            let dist = g.bfs_undirected_capped(v, 2);
            !(0..n).any(|j| j != v && dist[j] != usize::MAX && s.get(v, j) >= threshold)
        })
        .collect();
    let mut ordered = qualifies;
    ordered.sort_by(|&x, &y| importance[y].total_cmp(&importance[x]).then(x.cmp(&y)));
    let shortfall = ordered.len() < k;
    ordered.truncate(k);
    Ok(NaiveSelection {
        nodes: ordered,
        shortfall,
    })
}

/// Node-selection method for the evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Uniquerank,
    Attrirank,
    Pagerank,
    Degree,
    Closeness,
    Eigenvector,
    /// Brute-force filter at the given baseline similarity threshold.
    Naive(f64),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Uniquerank => "uniquerank".into(),
            Method::Attrirank => "attrirank".into(),
            Method::Pagerank => "pagerank".into(),
            Method::Degree => "degree".into(),
            Method::Closeness => "closeness".into(),
            Method::Eigenvector => "eigenvector".into(),
            Method::Naive(t) => format!("naive({t})"),
        }
    }

    /// The six standard methods, in the grid's fixed order.
    pub fn standard_set() -> Vec<Method> {
        vec![
            Method::Uniquerank,
            Method::Attrirank,
            Method::Pagerank,
            Method::Degree,
            Method::Closeness,
            Method::Eigenvector,
        ]
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "uniquerank" => return Ok(Method::Uniquerank),
            "attrirank" => return Ok(Method::Attrirank),
            "pagerank" => return Ok(Method::Pagerank),
            "degree" => return Ok(Method::Degree),
            "closeness" => return Ok(Method::Closeness),
            "eigenvector" => return Ok(Method::Eigenvector),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("naive(").and_then(|r| r.strip_suffix(')')) {
            let t: f64 = inner
                .parse()
                .map_err(|_| Error::UnknownMethod(s.to_string()))?;
            return Ok(Method::Naive(t));
        }
        Err(Error::UnknownMethod(s.to_string()))
    }
}

/// Node ids ordered by score descending (ties by id), truncated to k.
pub fn top_k_by_score(scores: &[f64], k: usize) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = (0..scores.len()).collect();
    ids.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]).then(x.cmp(&y)));
    ids.truncate(k);
    ids
}

/// Two-walk top-k with dominance refinement: the chain's top `k_seed` nodes
/// seed the (importance, uniqueness) plane, importance being the alpha = 1
/// chain, and the refined top `k_final` is returned.
pub fn refined_top_k_selection(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    config: &RankingConfig,
    k_seed: usize,
    k_final: usize,
) -> Result<Vec<NodeId>> {
    let pi = uniquerank(g, s, config)?;
    let seeds = top_k_by_score(&pi.scores, k_seed);
    let importance = attrirank(g, s, config)?;
    let uniq = uniqueness_scores(g, s)?;
    let plane = ScorePlane::new(importance.scores, uniq, seeds)?;
    refine_top_k(&plane, k_final)
}

/// One averaged grid cell.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub method: String,
    pub top_k: usize,
    pub threshold: f64,
    /// Number of nodes actually averaged (can fall short for naive cells).
    pub n: usize,
    pub shortfall: bool,
    pub mean_efficiency_reduction: f64,
    pub stderr_efficiency_reduction: f64,
    pub mean_replacement_distance: f64,
    pub stderr_replacement_distance: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GridTable {
    pub rows: Vec<GridRow>,
}

/// Which per-cell statistic a grid CSV reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMetric {
    EfficiencyReduction,
    ReplacementDistance,
}

impl GridMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            GridMetric::EfficiencyReduction => "efficiency_reduction",
            GridMetric::ReplacementDistance => "replacement_distance",
        }
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (values[0], 0.0),
        n => {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (mean, (var / n as f64).sqrt())
        }
    }
}

/// Runs the full (method, k, threshold) grid. Rows come out method-major in
/// the order given, then by k, then by threshold. Every method's selection
/// is computed once per k; each cell averages disruption reports over that
/// selection under the cell's replacement threshold.
pub fn run_grid(
    g: &AttributedGraph,
    s: &SimilarityMatrix,
    methods: &[Method],
    top_k: &[usize],
    thresholds: &[f64],
    policy_base: &ReplacementPolicy,
    config: &RankingConfig,
) -> Result<GridTable> {
    policy_base.validate()?;
    config.validate()?;
    if methods.is_empty() || top_k.is_empty() || thresholds.is_empty() {
        return Err(Error::InvalidConfig(
            "grid needs at least one method, one k, and one threshold".into(),
        ));
    }
    for &t in thresholds {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "replacement threshold must lie in (0, 1], got {t}"
            )));
        }
    }

    // Score vectors shared across cells, computed lazily at most once each.
    let mut attri_scores: Option<Vec<f64>> = None;
    let mut attri = |g: &AttributedGraph, s: &SimilarityMatrix| -> Result<Vec<f64>> {
        if attri_scores.is_none() {
            attri_scores = Some(attrirank(g, s, config)?.scores);
        }
        Ok(attri_scores.clone().unwrap())
    };

    let mut rows = Vec::new();
    for method in methods {
        // Selection per k; shortfall only ever true for the naive filter.
        let mut selections: Vec<(usize, Vec<NodeId>, bool)> = Vec::new();
        for &k in top_k {
            let (nodes, shortfall) = match method {
                Method::Uniquerank => (refined_top_k_selection(g, s, config, k, k)?, false),
                Method::Attrirank => (top_k_by_score(&attri(g, s)?, k), false),
                Method::Pagerank => (top_k_by_score(&pagerank(g, config)?.scores, k), false),
                Method::Degree => (top_k_by_score(&centrality(g, CentralityKind::Degree)?, k), false),
                Method::Closeness => (
                    top_k_by_score(&centrality(g, CentralityKind::Closeness)?, k),
                    false,
                ),
                Method::Eigenvector => (
                    top_k_by_score(&centrality(g, CentralityKind::Eigenvector)?, k),
                    false,
                ),
                Method::Naive(b) => {
                    let sel = naive_baseline_select(g, s, &attri(g, s)?, *b, k)?;
                    (sel.nodes, sel.shortfall)
                }
            };
            selections.push((k, nodes, shortfall));
        }
        for (k, nodes, shortfall) in selections {
            for &t in thresholds {
                let policy = ReplacementPolicy {
                    similarity_threshold: t,
                    ..*policy_base
                };
                let reports: Result<Vec<DisruptionReport>> = nodes
                    .par_iter()
                    .map(|&v| simulate_disruption(g, s, v, &policy))
                    .collect();
                let reports = reports?;
                let reductions: Vec<f64> =
                    reports.iter().map(|r| r.efficiency_reduction).collect();
                let distances: Vec<f64> = reports
                    .iter()
                    .map(|r| r.distance_to_nearest_similar)
                    .collect();
                let (mr, sr) = mean_and_stderr(&reductions);
                let (md, sd) = mean_and_stderr(&distances);
                rows.push(GridRow {
                    method: method.label(),
                    top_k: k,
                    threshold: t,
                    n: nodes.len(),
                    shortfall,
                    mean_efficiency_reduction: mr,
                    stderr_efficiency_reduction: sr,
                    mean_replacement_distance: md,
                    stderr_replacement_distance: sd,
                });
            }
        }
    }
    Ok(GridTable { rows })
}

/// Writes one metric of the grid as CSV beneath the given header lines.
pub fn write_grid_csv(
    table: &GridTable,
    metric: GridMetric,
    header: &MetaHeader,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let mut out = header.render();
    out.push_str("method,top_k,threshold,n,shortfall,mean,stderr\n");
    for row in &table.rows {
        let (mean, stderr) = match metric {
            GridMetric::EfficiencyReduction => (
                row.mean_efficiency_reduction,
                row.stderr_efficiency_reduction,
            ),
            GridMetric::ReplacementDistance => (
                row.mean_replacement_distance,
                row.stderr_replacement_distance,
            ),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.method,
            row.top_k,
            row.threshold,
            row.n,
            u8::from(row.shortfall),
            mean,
            stderr
        ));
    }
    write_atomic(path, &out)
}

/// Emits (label, importance, ln uniqueness, selected) rows for plotting.
pub fn scatter_export(
    g: &AttributedGraph,
    importance: &[f64],
    uniqueness: &[f64],
    selected: &BTreeSet<NodeId>,
    header: &MetaHeader,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let n = g.node_count();
    if importance.len() != n {
        return Err(Error::DimensionMismatch {
            left: importance.len(),
            right: n,
        });
    }
    if uniqueness.len() != n {
        return Err(Error::DimensionMismatch {
            left: uniqueness.len(),
            right: n,
        });
    }
    for &id in selected {
        if id >= n {
            return Err(Error::NodeOutOfRange { id, n });
        }
    }
    for (i, &u) in uniqueness.iter().enumerate() {
        if !(u > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "uniqueness of node {i} is {u}; log scale needs positive values"
            )));
        }
    }
    let mut out = header.render();
    out.push_str("node_label,importance,log_uniqueness,selected\n");
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    for i in 0..n {
        writer
            .write_record(&[
                g.label_of(i),
                importance[i].to_string(),
                uniqueness[i].ln().to_string(),
                u8::from(selected.contains(&i)).to_string(),
            ])
            .map_err(|e| Error::InvalidConfig(format!("csv encoding failed: {e}")))?;
    }
    let body = writer
        .into_inner()
        .map_err(|e| Error::InvalidConfig(format!("csv encoding failed: {e}")))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    write_atomic(path, &out)
}

/// Per-attribute histograms over all nodes and over the selected subset,
/// binned on the all-node min-max range. Constant columns collapse into bin
/// 0; the maximum value lands in the last bin.
pub fn attribute_histogram_export(
    g: &AttributedGraph,
    selected: &BTreeSet<NodeId>,
    bins: usize,
    header: &MetaHeader,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let n = g.node_count();
    if bins == 0 {
        return Err(Error::InvalidConfig("bin count must be at least 1".into()));
    }
    for &id in selected {
        if id >= n {
            return Err(Error::NodeOutOfRange { id, n });
        }
    }
    let dim = g.attr_dim();
    let names: Vec<String> = match g.attribute_names() {
        Some(names) => names.to_vec(),
        None => (0..dim).map(|k| format!("a{k}")).collect(),
    };
    let mut out = header.render();
    out.push_str("attribute,bin,bin_lower,bin_upper,count_all,count_selected\n");
    for col in 0..dim {
        let values: Vec<f64> = (0..n).map(|i| g.attributes_of(i)[col]).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let bin_of = |v: f64| -> usize {
            if span <= 0.0 {
                0
            } else {
                (((v - lo) / span * bins as f64) as usize).min(bins - 1)
            }
        };
        let mut count_all = vec![0usize; bins];
        let mut count_sel = vec![0usize; bins];
        for (i, &v) in values.iter().enumerate() {
            let b = bin_of(v);
            count_all[b] += 1;
            if selected.contains(&i) {
                count_sel[b] += 1;
            }
        }
        let width = if span > 0.0 { span / bins as f64 } else { 0.0 };
        for b in 0..bins {
            let lower = lo + width * b as f64;
            let upper = if b + 1 == bins { hi } else { lo + width * (b + 1) as f64 };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                names[col], b, lower, upper, count_all[b], count_sel[b]
            ));
        }
    }
    write_atomic(path, &out)
}
