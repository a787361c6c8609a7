//! Sparse weighted undirected graphs stored in compressed sparse row form.
//!
//! Every undirected edge `{i, j}` with `i != j` is stored twice, once in row
//! `i` and once in row `j`, with bit-identical weights. A self-loop `{i, i}` is
//! stored once in row `i` and contributes its weight to `d_i` once.

mod generate;
mod io;
mod kind;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

pub use generate::{generate_geometric, generate_random_regular, generate_sbm, sbm_block_sizes};
pub use io::{load_edge_list, parse_edge_list, write_coordinates_csv};
pub use kind::GraphKind;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    edge_count: usize,
    unweighted: bool,
    coordinates: Option<Vec<[f64; 2]>>,
    blocks: Option<Vec<usize>>,
    original_ids: Option<Vec<usize>>,
}

/// Result of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub connected: bool,
    pub bipartite: bool,
    /// Common neighbor count when every node has the same number of neighbors.
    pub regular: Option<usize>,
    pub components: usize,
    pub edges: usize,
    pub self_loops: bool,
}

impl Graph {
    /// Builds a graph on `n` nodes from an edge iterator.
    ///
    /// Duplicate edges, in either orientation, are merged by summing their
    /// weights. `(i, i, w)` creates a self-loop.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::Parameter("graph must have at least one node".into()));
        }
        let mut list: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Parameter(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            let (a, b) = if u <= v { (u, v) } else { (v, u) };
            list.push((a, b, w));
        }
        // Stable sort keeps the summation order equal to input order per pair.
        list.sort_by_key(|&(a, b, _)| (a, b));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(list.len());
        for (a, b, w) in list {
            match merged.last_mut() {
                Some(last) if last.0 == a && last.1 == b => last.2 += w,
                _ => merged.push((a, b, w)),
            }
        }
        Ok(Self::from_canonical(n, &merged))
    }

    /// `edges` must be sorted, deduplicated, with `u <= v` and positive weights.
    fn from_canonical(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n];
        for &(u, v, _) in edges {
            counts[u] += 1;
            if u != v {
                counts[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let nnz = *offsets.last().unwrap();
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; nnz];
        let mut weights = vec![0f64; nnz];
        // Edges are sorted by (u, v) with u <= v; filling rows in this order
        // leaves every row sorted by neighbor id.
        for &(u, v, w) in edges {
            if u != v {
                neighbors[cursor[v]] = u;
                weights[cursor[v]] = w;
                cursor[v] += 1;
            }
        }
        for &(u, v, w) in edges {
            neighbors[cursor[u]] = v;
            weights[cursor[u]] = w;
            cursor[u] += 1;
        }
        let degrees = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();
        let unweighted = weights.iter().all(|&w| w == 1.0);
        Graph {
            offsets,
            neighbors,
            weights,
            degrees,
            edge_count: edges.len(),
            unweighted,
            coordinates: None,
            blocks: None,
            original_ids: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Number of undirected edges, self-loops counted once.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Neighbor ids of `i` in increasing order, with matching weights.
    pub fn neighbors(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.neighbors[range.clone()], &self.weights[range])
    }

    pub fn neighbor_count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Iterates over each undirected edge once as `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            let (nbrs, ws) = self.neighbors(u);
            nbrs.iter()
                .zip(ws)
                .filter(move |(&v, _)| v >= u)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Sum of all stored weights, i.e. `sum_i d_i`.
    pub fn total_degree(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// True when every stored weight equals one.
    pub fn is_unweighted(&self) -> bool {
        self.unweighted
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.node_count()).any(|i| self.neighbors(i).0.binary_search(&i).is_ok())
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    pub fn blocks(&self) -> Option<&[usize]> {
        self.blocks.as_deref()
    }

    /// Node ids in the graph this one was extracted from, if any.
    pub fn original_ids(&self) -> Option<&[usize]> {
        self.original_ids.as_deref()
    }

    pub(crate) fn with_coordinates(mut self, coords: Vec<[f64; 2]>) -> Self {
        debug_assert_eq!(coords.len(), self.node_count());
        self.coordinates = Some(coords);
        self
    }

    pub(crate) fn with_blocks(mut self, blocks: Vec<usize>) -> Self {
        debug_assert_eq!(blocks.len(), self.node_count());
        self.blocks = Some(blocks);
        self
    }

    /// First node with zero degree, if any.
    pub fn first_isolated(&self) -> Option<usize> {
        self.degrees.iter().position(|&d| d <= 0.0)
    }

    pub(crate) fn require_no_isolated(&self) -> Result<()> {
        match self.first_isolated() {
            Some(node) => Err(Error::IsolatedNode { node }),
            None => Ok(()),
        }
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        let (_, count) = component_labels(self);
        if count == 1 {
            Ok(())
        } else {
            Err(Error::Disconnected { components: count })
        }
    }

    /// `y = A x`.
    pub fn adjacency_mul(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let (nbrs, ws) = self.neighbors(i);
            *out = nbrs.iter().zip(ws).map(|(&j, &w)| w * x[j]).sum();
        }
    }

    /// Full scan verifying that every stored weight has a bit-identical mirror.
    pub fn is_symmetric(&self) -> bool {
        (0..self.node_count()).all(|i| {
            let (nbrs, ws) = self.neighbors(i);
            nbrs.iter().zip(ws).all(|(&j, &w)| {
                let (back, back_w) = self.neighbors(j);
                match back.binary_search(&i) {
                    Ok(pos) => back_w[pos].to_bits() == w.to_bits(),
                    Err(_) => false,
                }
            })
        })
    }
}

/// Labels each node with a component index; components are numbered in order
/// of their smallest node id.
fn component_labels(g: &Graph) -> (Vec<usize>, usize) {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u).0 {
                if label[v] == usize::MAX {
                    label[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

/// Connectivity, bipartiteness and regularity of `g`.
pub fn validate(g: &Graph) -> StructureReport {
    let n = g.node_count();
    let (_, components) = component_labels(g);

    // Two-coloring over every component; a self-loop is an odd cycle.
    let mut color = vec![u8::MAX; n];
    let mut bipartite = true;
    let mut queue = VecDeque::new();
    'outer: for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u).0 {
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    bipartite = false;
                    break 'outer;
                }
            }
        }
    }

    let first = g.neighbor_count(0);
    let regular = (0..n)
        .all(|i| g.neighbor_count(i) == first)
        .then_some(first);

    StructureReport {
        connected: components == 1,
        bipartite,
        regular,
        components,
        edges: g.edge_count(),
        self_loops: g.has_self_loops(),
    }
}

/// Induced subgraph on the largest connected component, relabeled to
/// `0..size` in increasing original-id order.
///
/// Ties between equally large components go to the one containing the
/// smallest node id. The returned graph records the original ids (composed
/// with any existing mapping) and keeps coordinates and block labels.
pub fn largest_component(g: &Graph) -> Graph {
    let (labels, count) = component_labels(g);
    if count == 1 {
        return g.clone();
    }
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    let best = (0..count)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .unwrap();

    let kept: Vec<usize> = (0..g.node_count()).filter(|&i| labels[i] == best).collect();
    let mut new_id = vec![usize::MAX; g.node_count()];
    for (k, &old) in kept.iter().enumerate() {
        new_id[old] = k;
    }
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .filter(|&(u, _, _)| labels[u] == best)
        .map(|(u, v, w)| (new_id[u], new_id[v], w))
        .collect();
    // Relabeling is monotone, so the edge list stays canonical.
    let mut sub = Graph::from_canonical(kept.len(), &edges);
    sub.coordinates = g
        .coordinates
        .as_ref()
        .map(|c| kept.iter().map(|&i| c[i]).collect());
    sub.blocks = g.blocks.as_ref().map(|b| kept.iter().map(|&i| b[i]).collect());
    sub.original_ids = Some(match &g.original_ids {
        Some(ids) => kept.iter().map(|&i| ids[i]).collect(),
        None => kept,
    });
    sub
}
