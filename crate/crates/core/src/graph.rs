//! Immutable undirected graph in CSR layout with sorted neighbor lists.
//!
//! Every undirected edge `{u, w}` gets a stable ordinal in `[0, |E|)`: edges
//! are numbered in lexicographic order of their canonical pair `(u, w)`,
//! `u < w`. Each adjacency slot also records the ordinal of the edge it
//! belongs to, so per-edge records can be looked up from either endpoint.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// An edge in canonical orientation `u < w` together with its ordinal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub u: VertexId,
    pub w: VertexId,
    pub index: usize,
}

impl EdgeRef {
    /// The endpoint opposite `v`. `v` must be one of the endpoints.
    #[inline]
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.u {
            self.w
        } else {
            self.u
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    slot_edges: Vec<u32>,
    edges: Vec<(VertexId, VertexId)>,
    labels: Vec<String>,
}

impl UndirectedGraph {
    /// Builds a graph on `vertex_count` vertices labelled by their ids.
    ///
    /// Self-loops are dropped and parallel or reversed duplicates merged.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let labels = (0..vertex_count).map(|v| v.to_string()).collect();
        Self::from_labelled_edges(labels, edges)
    }

    pub(crate) fn from_labelled_edges<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let n = labels.len();
        if n > u32::MAX as usize {
            return Err(Error::usage(format!(
                "{n} vertices exceed the 32-bit id space"
            )));
        }
        let mut canon = Vec::new();
        for (a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::usage(format!(
                    "edge ({a}, {b}) references a vertex outside [0, {n})"
                )));
            }
            if a != b {
                canon.push((a.min(b), a.max(b)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        if canon.len() > u32::MAX as usize {
            return Err(Error::usage("edge count exceeds the 32-bit edge id space"));
        }
        Ok(Self::from_canonical_sorted(labels, canon))
    }

    /// `edges` must be strictly increasing canonical pairs within range.
    pub(crate) fn from_canonical_sorted(
        labels: Vec<String>,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Self {
        let n = labels.len();
        let mut offsets = vec![0usize; n + 1];
        for &(u, w) in &edges {
            offsets[u as usize + 1] += 1;
            offsets[w as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0 as VertexId; 2 * edges.len()];
        let mut slot_edges = vec![0u32; 2 * edges.len()];
        // Edges arrive sorted by (u, w), so each list fills in increasing order.
        for (idx, &(u, w)) in edges.iter().enumerate() {
            let su = fill[u as usize];
            neighbors[su] = w;
            slot_edges[su] = idx as u32;
            fill[u as usize] += 1;
            let sw = fill[w as usize];
            neighbors[sw] = u;
            slot_edges[sw] = idx as u32;
            fill[w as usize] += 1;
        }
        UndirectedGraph {
            offsets,
            neighbors,
            slot_edges,
            edges,
            labels,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count() as VertexId)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge ordinals aligned with [`neighbors`](Self::neighbors).
    #[inline]
    pub fn incident_edges(&self, v: VertexId) -> &[u32] {
        let v = v as usize;
        &self.slot_edges[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, edge ordinal)` pairs for `v` in neighbor order.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        self.neighbors(v)
            .iter()
            .zip(self.incident_edges(v))
            .map(|(&x, &e)| (x, e as usize))
    }

    /// Canonical `(u, w)` pairs indexed by edge ordinal.
    #[inline]
    pub fn edge_pairs(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, index: usize) -> EdgeRef {
        let (u, w) = self.edges[index];
        EdgeRef { u, w, index }
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = EdgeRef> + '_ {
        self.edges
            .iter()
            .enumerate()
            .map(|(index, &(u, w))| EdgeRef { u, w, index })
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Ordinal of edge `{a, b}`, found by binary search in the shorter list.
    pub fn edge_index(&self, a: VertexId, b: VertexId) -> Option<usize> {
        let (from, to) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(from)
            .binary_search(&to)
            .ok()
            .map(|slot| self.incident_edges(from)[slot] as usize)
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Reverse lookup from source label to dense id.
    pub fn label_index(&self) -> HashMap<&str, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as VertexId))
            .collect()
    }

    /// Copy of this graph with the same vertices but only the edges whose ordinal
    /// satisfies `keep`.
    pub fn edge_filtered(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.edge_count(), "keep mask length");
        let edges = self
            .edges
            .iter()
            .zip(keep)
            .filter_map(|(&e, &k)| k.then_some(e))
            .collect();
        Self::from_canonical_sorted(self.labels.clone(), edges)
    }

    /// `Γ(u) ∩ Γ(w)` by merged scan of the two sorted lists.
    pub fn common_neighbors(&self, u: VertexId, w: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(u)?;
        self.check_vertex(w)?;
        if u == w {
            return Err(Error::usage(format!(
                "common_neighbors needs two distinct vertices, got {u} twice"
            )));
        }
        let mut out = Vec::new();
        intersect_into(self.neighbors(u), self.neighbors(w), &mut out);
        Ok(out)
    }

    /// Subgraph induced by `vertices`. New ids follow ascending parent id.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Result<InducedSubgraph> {
        let mut keep = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&v| v as usize >= self.vertex_count()) {
            return Err(Error::usage(format!(
                "vertex {bad} out of range for graph with {} vertices",
                self.vertex_count()
            )));
        }
        let mut edges = Vec::new();
        let mut scratch = Vec::new();
        for (i, &a) in keep.iter().enumerate() {
            scratch.clear();
            intersect_into(self.neighbors(a), &keep, &mut scratch);
            for &b in scratch.iter().filter(|&&b| b > a) {
                // keep is sorted, so the rank of b is its new id.
                let j = keep.binary_search(&b).expect("b drawn from keep");
                edges.push((i as VertexId, j as VertexId));
            }
        }
        edges.sort_unstable();
        let labels = keep
            .iter()
            .map(|&v| self.labels[v as usize].clone())
            .collect();
        Ok(InducedSubgraph {
            graph: Self::from_canonical_sorted(labels, edges),
            parent_ids: keep,
        })
    }

    /// Writes one `u w` line per edge using dense ids, `u < w`, sorted.
    pub fn write_canonical<W: Write>(&self, mut out: W) -> Result<()> {
        for &(u, w) in &self.edges {
            writeln!(out, "{u} {w}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::usage(format!(
                "vertex {v} out of range for graph with {} vertices",
                self.vertex_count()
            )))
        }
    }
}

#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    pub graph: UndirectedGraph,
    /// `parent_ids[new_id]` is the vertex id in the parent graph.
    pub parent_ids: Vec<VertexId>,
}

/// Parses a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Labels are remapped to
/// dense ids in order of first appearance.
pub fn load_edge_list<R: BufRead>(source: R) -> Result<UndirectedGraph> {
    load_edge_list_with(source, None)
}

/// Like [`load_edge_list`], but pads the vertex set up to `vertex_count` with
/// isolated vertices. Padded vertices are labelled `~<id>`.
pub fn load_edge_list_with<R: BufRead>(
    source: R,
    vertex_count: Option<usize>,
) -> Result<UndirectedGraph> {
    let mut ids: HashMap<String, VertexId> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut raw = Vec::new();
    let mut intern = |label: &str, labels: &mut Vec<String>| -> VertexId {
        if let Some(&id) = ids.get(label) {
            return id;
        }
        let id = labels.len() as VertexId;
        ids.insert(label.to_owned(), id);
        labels.push(label.to_owned());
        id
    };

    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!(
                        "expected two vertex labels, found {} token(s)",
                        trimmed.split_whitespace().count()
                    ),
                })
            }
        };
        let a = intern(a, &mut labels);
        let b = intern(b, &mut labels);
        raw.push((a, b));
    }

    if let Some(n) = vertex_count {
        if n < labels.len() {
            return Err(Error::usage(format!(
                "vertex count override {n} is smaller than the {} labels seen",
                labels.len()
            )));
        }
        for id in labels.len()..n {
            labels.push(format!("~{id}"));
        }
    }
    UndirectedGraph::from_labelled_edges(labels, raw)
}

/// Size of the intersection of two strictly increasing slices.
#[inline]
pub fn intersection_count(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x < y {
            i += 1;
        } else if y < x {
            j += 1;
        } else {
            n += 1;
            i += 1;
            j += 1;
        }
    }
    n
}

/// Appends the intersection of two strictly increasing slices to `out`.
pub fn intersect_into(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (x, y) = (a[i], b[j]);
        if x < y {
            i += 1;
        } else if y < x {
            j += 1;
        } else {
            out.push(x);
            i += 1;
            j += 1;
        }
    }
}
