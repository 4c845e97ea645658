//! Attributed-graph representation, CSV ingestion, attribute normalization,
//! neighborhoods, shortest paths, and removal-with-redirection surgery.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense zero-based node index, stable for the lifetime of one graph.
pub type NodeId = usize;

/// How attribute columns are rescaled before the similarity kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Map each column to [0, 1]; constant columns map to 0.
    #[default]
    MinMax,
    /// Map each column to mean 0, standard deviation 1; constant columns map to 0.
    ZScore,
    /// Leave attributes untouched.
    None,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::MinMax => "min_max",
            Normalization::ZScore => "z_score",
            Normalization::None => "none",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min_max" | "minmax" | "min-max" => Ok(Normalization::MinMax),
            "z_score" | "zscore" | "z-score" => Ok(Normalization::ZScore),
            "none" => Ok(Normalization::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization mode {other:?} (expected min_max, z_score, or none)"
            ))),
        }
    }
}

/// A graph whose nodes carry real-valued feature vectors.
///
/// Adjacency lists are sorted and duplicate-free, self-loops are never stored,
/// and for undirected graphs the in- and out-lists are identical. The struct is
/// immutable after construction; surgery returns a new graph.
#[derive(Debug, Clone)]
pub struct AttributedGraph {
    directed: bool,
    out_adjacency: Vec<Vec<NodeId>>,
    in_adjacency: Vec<Vec<NodeId>>,
    /// Row-major N x K matrix.
    attributes: Vec<f64>,
    attr_dim: usize,
    node_labels: Option<Vec<String>>,
    attribute_names: Option<Vec<String>>,
}

impl AttributedGraph {
    /// Builds a graph from raw edges and per-node attribute rows.
    ///
    /// `attribute_rows` defines the node count; all rows must have equal length
    /// and finite entries. Self-loops and duplicate edges are dropped.
    pub fn new(
        directed: bool,
        edges: &[(NodeId, NodeId)],
        attribute_rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = attribute_rows.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let attr_dim = attribute_rows[0].len();
        let mut attributes = Vec::with_capacity(n * attr_dim);
        for (i, row) in attribute_rows.iter().enumerate() {
            if row.len() != attr_dim {
                return Err(Error::AttributeLengthMismatch {
                    left: attr_dim,
                    right: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("attribute row for node {i}"),
                });
            }
            attributes.extend_from_slice(row);
        }
        let (out_adjacency, in_adjacency, _, _) = build_adjacency(directed, n, edges)?;
        Ok(AttributedGraph {
            directed,
            out_adjacency,
            in_adjacency,
            attributes,
            attr_dim,
            node_labels: None,
            attribute_names: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::InvalidConfig(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_attribute_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.attr_dim {
            return Err(Error::InvalidConfig(format!(
                "{} attribute names for {} columns",
                names.len(),
                self.attr_dim
            )));
        }
        self.attribute_names = Some(names);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.out_adjacency.len()
    }

    pub fn attr_dim(&self) -> usize {
        self.attr_dim
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edge count; each undirected edge counts once.
    pub fn edge_count(&self) -> usize {
        let total: usize = self.out_adjacency.iter().map(Vec::len).sum();
        if self.directed {
            total
        } else {
            total / 2
        }
    }

    pub fn out_neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.out_adjacency[i]
    }

    pub fn in_neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.in_adjacency[i]
    }

    /// Union of in- and out-neighbors, sorted and deduplicated.
    pub fn union_neighbors(&self, i: NodeId) -> Vec<NodeId> {
        if !self.directed {
            return self.out_adjacency[i].clone();
        }
        let mut merged =
            Vec::with_capacity(self.out_adjacency[i].len() + self.in_adjacency[i].len());
        let (a, b) = (&self.out_adjacency[i], &self.in_adjacency[i]);
        let (mut x, mut y) = (0, 0);
        while x < a.len() || y < b.len() {
            let next = match (a.get(x), b.get(y)) {
                (Some(&u), Some(&v)) if u == v => {
                    x += 1;
                    y += 1;
                    u
                }
                (Some(&u), Some(&v)) if u < v => {
                    x += 1;
                    u
                }
                (Some(_), Some(&v)) => {
                    y += 1;
                    v
                }
                (Some(&u), None) => {
                    x += 1;
                    u
                }
                (None, Some(&v)) => {
                    y += 1;
                    v
                }
                (None, None) => unreachable!(),
            };
            merged.push(next);
        }
        merged
    }

    pub fn attributes_of(&self, i: NodeId) -> &[f64] {
        &self.attributes[i * self.attr_dim..(i + 1) * self.attr_dim]
    }

    pub fn attribute_names(&self) -> Option<&[String]> {
        self.attribute_names.as_deref()
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    /// External label of a node, falling back to its index.
    pub fn label_of(&self, i: NodeId) -> String {
        match &self.node_labels {
            Some(labels) => labels[i].clone(),
            None => i.to_string(),
        }
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                id,
                n: self.node_count(),
            });
        }
        Ok(())
    }

    /// Returns a copy of the graph with rescaled attribute columns.
    pub fn normalize_attributes(&self, mode: Normalization) -> AttributedGraph {
        let mut out = self.clone();
        if mode == Normalization::None || self.attr_dim == 0 {
            return out;
        }
        let n = self.node_count();
        for col in 0..self.attr_dim {
            let column: Vec<f64> = (0..n).map(|i| self.attributes[i * self.attr_dim + col]).collect();
            match mode {
                Normalization::MinMax => {
                    let lo = column.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let span = hi - lo;
                    for i in 0..n {
                        out.attributes[i * self.attr_dim + col] = if span > 0.0 {
                            (column[i] - lo) / span
                        } else {
                            0.0
                        };
                    }
                }
                Normalization::ZScore => {
                    let mean = column.iter().sum::<f64>() / n as f64;
                    let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                    let sd = var.sqrt();
                    for i in 0..n {
                        out.attributes[i * self.attr_dim + col] = if sd > 0.0 {
                            (column[i] - mean) / sd
                        } else {
                            0.0
                        };
                    }
                }
                Normalization::None => unreachable!(),
            }
        }
        out
    }

    /// All nodes other than `v` within `k` hops of `v`, ignoring edge
    /// direction. Returned sorted ascending.
    pub fn khop_neighborhood(&self, v: NodeId, k: usize) -> Result<Vec<NodeId>> {
        self.check_node(v)?;
        let mut depth = vec![usize::MAX; self.node_count()];
        depth[v] = 0;
        let mut queue = VecDeque::from([v]);
        let mut found = Vec::new();
        while let Some(u) = queue.pop_front() {
            if depth[u] == k {
                continue;
            }
            for &w in &self.undirected_step(u) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    found.push(w);
                    queue.push_back(w);
                }
            }
        }
        found.sort_unstable();
        Ok(found)
    }

    fn undirected_step(&self, u: NodeId) -> Vec<NodeId> {
        if self.directed {
            self.union_neighbors(u)
        } else {
            self.out_adjacency[u].clone()
        }
    }

    /// BFS distances from `source` along out-edges. With `restrict_to`, paths
    /// may only pass through nodes in the set (which must contain `source` for
    /// anything to be reachable). Unreachable nodes are absent from the map.
    pub fn shortest_path_lengths(
        &self,
        source: NodeId,
        restrict_to: Option<&[NodeId]>,
    ) -> Result<BTreeMap<NodeId, usize>> {
        self.check_node(source)?;
        let allowed: Option<Vec<bool>> = restrict_to.map(|set| {
            let mut mask = vec![false; self.node_count()];
            for &u in set {
                if u < mask.len() {
                    mask[u] = true;
                }
            }
            mask
        });
        let dist = self.bfs_out(source, allowed.as_deref());
        let mut map = BTreeMap::new();
        for (u, d) in dist.into_iter().enumerate() {
            if d != usize::MAX && u != source {
                map.insert(u, d);
            }
        }
        Ok(map)
    }

    /// Distances along out-edges as a dense vector; `usize::MAX` marks
    /// unreachable. The source is allowed even when outside the mask.
    pub(crate) fn bfs_out(&self, source: NodeId, allowed: Option<&[bool]>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        if let Some(mask) = allowed {
            if !mask[source] {
                return dist;
            }
        }
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.out_adjacency[u] {
                if allowed.is_some_and(|mask| !mask[w]) {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Undirected BFS distances, capped at `max_depth`; `usize::MAX` marks
    /// nodes beyond the cap.
    pub(crate) fn bfs_undirected_capped(&self, source: NodeId, max_depth: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == max_depth {
                continue;
            }
            for &w in &self.undirected_step(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Removes a node, leaving it isolated to keep ids stable. With a
    /// replacement, every edge incident to `removed` is re-attached to the
    /// replacement; self-loops produced by redirection are dropped and
    /// duplicates merged.
    pub fn remove_and_redirect(
        &self,
        removed: NodeId,
        replacement: Option<NodeId>,
    ) -> Result<AttributedGraph> {
        self.check_node(removed)?;
        if let Some(r) = replacement {
            self.check_node(r)?;
            if r == removed {
                return Err(Error::InvalidConfig(
                    "replacement node equals the removed node".into(),
                ));
            }
        }
        let remap = |u: NodeId| -> Option<NodeId> {
            if u == removed {
                replacement
            } else {
                Some(u)
            }
        };
        let mut edges = Vec::with_capacity(self.edge_count());
        for u in 0..self.node_count() {
            for &v in &self.out_adjacency[u] {
                if !self.directed && v < u {
                    continue;
                }
                if let (Some(a), Some(b)) = (remap(u), remap(v)) {
                    if a != b {
                        edges.push((a, b));
                    }
                }
            }
        }
        let (out_adjacency, in_adjacency, _, _) =
            build_adjacency(self.directed, self.node_count(), &edges)?;
        let mut out = self.clone();
        out.out_adjacency = out_adjacency;
        out.in_adjacency = in_adjacency;
        Ok(out)
    }
}

/// Sorted, deduplicated adjacency lists; returns (out, in, self_loops_dropped,
/// duplicates_dropped).
fn build_adjacency(
    directed: bool,
    n: usize,
    edges: &[(NodeId, NodeId)],
) -> Result<(Vec<Vec<NodeId>>, Vec<Vec<NodeId>>, usize, usize)> {
    let mut self_loops = 0usize;
    let mut seen = BTreeSet::new();
    for &(u, v) in edges {
        if u >= n {
            return Err(Error::NodeOutOfRange { id: u, n });
        }
        if v >= n {
            return Err(Error::NodeOutOfRange { id: v, n });
        }
        if u == v {
            self_loops += 1;
            continue;
        }
        let key = if directed || u < v { (u, v) } else { (v, u) };
        seen.insert(key);
    }
    let duplicates = edges.len() - self_loops - seen.len();
    let mut out = vec![Vec::new(); n];
    let mut inn = vec![Vec::new(); n];
    for (u, v) in seen {
        out[u].push(v);
        inn[v].push(u);
        if !directed {
            out[v].push(u);
            inn[u].push(v);
        }
    }
    for list in out.iter_mut().chain(inn.iter_mut()) {
        list.sort_unstable();
    }
    Ok((out, inn, self_loops, duplicates))
}

/// Result of [`load_graph`]: the graph plus what the loader cleaned up.
#[derive(Debug)]
pub struct LoadedGraph {
    pub graph: AttributedGraph,
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

/// Loads a graph from an edge list and an attribute table.
///
/// Both files are UTF-8 with `#` comment lines and a comma or tab delimiter
/// detected per file. The edge file holds `source,target` label pairs. The
/// attribute file holds a header row then one `label,a_1,...,a_K` row per
/// node; its row order defines the dense node ids. Every edge endpoint must
/// have an attribute row.
pub fn load_graph(
    edge_path: impl AsRef<Path>,
    attribute_path: impl AsRef<Path>,
    directed: bool,
) -> Result<LoadedGraph> {
    let attribute_path = attribute_path.as_ref();
    let edge_path = edge_path.as_ref();

    let attr_rows = read_delimited(attribute_path)?;
    if attr_rows.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let header = &attr_rows[0].fields;
    if header.len() < 2 {
        return Err(Error::Parse {
            path: attribute_path.to_path_buf(),
            line: attr_rows[0].line,
            message: "attribute header needs a label column and at least one attribute".into(),
        });
    }
    let attribute_names: Vec<String> = header[1..].to_vec();
    let attr_dim = attribute_names.len();

    let mut labels = Vec::new();
    let mut label_index: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in &attr_rows[1..] {
        if record.fields.len() != attr_dim + 1 {
            return Err(Error::Parse {
                path: attribute_path.to_path_buf(),
                line: record.line,
                message: format!(
                    "expected {} fields, found {}",
                    attr_dim + 1,
                    record.fields.len()
                ),
            });
        }
        let label = record.fields[0].clone();
        if label_index.contains_key(&label) {
            return Err(Error::Parse {
                path: attribute_path.to_path_buf(),
                line: record.line,
                message: format!("duplicate node label {label:?}"),
            });
        }
        let mut row = Vec::with_capacity(attr_dim);
        for cell in &record.fields[1..] {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: attribute_path.to_path_buf(),
                line: record.line,
                message: format!("non-numeric attribute cell {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: attribute_path.to_path_buf(),
                    line: record.line,
                    message: format!("non-finite attribute cell {cell:?}"),
                });
            }
            row.push(value);
        }
        label_index.insert(label.clone(), labels.len());
        labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let edge_rows = read_delimited(edge_path)?;
    let mut edges = Vec::with_capacity(edge_rows.len());
    for record in &edge_rows {
        if record.fields.len() != 2 {
            return Err(Error::Parse {
                path: edge_path.to_path_buf(),
                line: record.line,
                message: format!("expected 2 fields, found {}", record.fields.len()),
            });
        }
        let mut pair = [0usize; 2];
        for (slot, label) in pair.iter_mut().zip(&record.fields) {
            *slot = *label_index
                .get(label)
                .ok_or_else(|| Error::UnknownNode {
                    label: label.clone(),
                })?;
        }
        edges.push((pair[0], pair[1]));
    }

    let n = rows.len();
    let (out_adjacency, in_adjacency, self_loops, duplicates) =
        build_adjacency(directed, n, &edges)?;
    let mut graph = AttributedGraph::new(directed, &[], rows)?;
    graph.out_adjacency = out_adjacency;
    graph.in_adjacency = in_adjacency;
    graph = graph.with_labels(labels)?.with_attribute_names(attribute_names)?;
    Ok(LoadedGraph {
        graph,
        self_loops_dropped: self_loops,
        duplicate_edges_dropped: duplicates,
    })
}

struct Record {
    line: usize,
    fields: Vec<String>,
}

/// Parses a comma- or tab-delimited file, skipping blank and `#` lines. The
/// delimiter is chosen per file: tab when the first data line contains one.
fn read_delimited(path: &Path) -> Result<Vec<Record>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut delimiter = None;
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| if line.contains('\t') { b'\t' } else { b',' });
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .delimiter(delim)
            .from_reader(line.as_bytes());
        for row in reader.records() {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            records.push(Record {
                line: idx + 1,
                fields: row.iter().map(|f| f.trim().to_string()).collect(),
            });
        }
    }
    Ok(records)
}

/// Writes a graph back out in the [`load_graph`] file formats.
pub fn write_graph_files(
    g: &AttributedGraph,
    edge_path: impl AsRef<Path>,
    attribute_path: impl AsRef<Path>,
) -> Result<()> {
    let mut attr_text = String::new();
    let names: Vec<String> = match g.attribute_names() {
        Some(names) => names.to_vec(),
        None => (0..g.attr_dim()).map(|k| format!("a{k}")).collect(),
    };
    let _ = writeln!(attr_text, "node,{}", names.join(","));
    for i in 0..g.node_count() {
        let row: Vec<String> = g.attributes_of(i).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(attr_text, "{},{}", g.label_of(i), row.join(","));
    }

    let mut edge_text = String::new();
    for u in 0..g.node_count() {
        for &v in g.out_neighbors(u) {
            if !g.is_directed() && v < u {
                continue;
            }
            let _ = writeln!(edge_text, "{},{}", g.label_of(u), g.label_of(v));
        }
    }

    std::fs::write(attribute_path.as_ref(), attr_text).map_err(|source| Error::Write {
        path: attribute_path.as_ref().to_path_buf(),
        source,
    })?;
    std::fs::write(edge_path.as_ref(), edge_text).map_err(|source| Error::Write {
        path: edge_path.as_ref().to_path_buf(),
        source,
    })?;
    Ok(())
}
