//! Immutable graph storage and basic structural queries.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use thiserror::Error;

/// Errors from graph construction and vertex selections.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop ({0}, {0}) is not allowed")]
    SelfLoop(usize),
    #[error("edge endpoint {id} out of range for a graph on {n} vertices")]
    VertexOutOfRange { id: usize, n: usize },
    #[error("vertex selection is empty")]
    EmptySelection,
}

/// Sorted, duplicate-free set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    ids: Vec<usize>,
}

impl NodeSet {
    /// Builds a set from arbitrary ids, sorting and deduplicating.
    pub fn from_unsorted(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        NodeSet { ids }
    }

    /// Wraps a strictly ascending id list.
    ///
    /// # Panics
    /// In debug builds, if `ids` is not strictly ascending.
    pub fn from_sorted(ids: Vec<usize>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]), "ids must be strictly ascending");
        NodeSet { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn max_id(&self) -> Option<usize> {
        self.ids.last().copied()
    }

    /// Membership mask over `0..n`.
    pub fn to_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &id in &self.ids {
            mask[id] = true;
        }
        mask
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        NodeSet { ids: out }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut ids = Vec::with_capacity(self.ids.len() + other.ids.len());
        ids.extend_from_slice(&self.ids);
        ids.extend_from_slice(&other.ids);
        NodeSet::from_unsorted(ids)
    }
}

/// Real-valued signal with one entry per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    values: Vec<f64>,
}

impl SignalVector {
    pub fn new(values: Vec<f64>) -> Self {
        SignalVector { values }
    }

    pub fn zeros(n: usize) -> Self {
        SignalVector { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for SignalVector {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.values[v]
    }
}

/// Bijection between subgraph-local vertex ids and parent-graph ids.
///
/// Local ids are `0..len()` in ascending order of the parent ids they map to.
#[derive(Debug, Clone)]
pub struct VertexMap {
    global: Vec<usize>,
}

impl VertexMap {
    pub fn to_global(&self, local: usize) -> usize {
        self.global[local]
    }

    pub fn to_local(&self, global: usize) -> Option<usize> {
        self.global.binary_search(&global).ok()
    }

    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    /// Maps a set of local ids back to parent ids.
    pub fn set_to_global(&self, local: &NodeSet) -> NodeSet {
        NodeSet::from_sorted(local.iter().map(|l| self.global[l]).collect())
    }
}

/// Simple undirected graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending. The graph is immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected edge pairs.
    ///
    /// Duplicate and reversed pairs collapse to a single edge. Self-loops and
    /// endpoints `>= n` are rejected.
    pub fn from_edge_list(edges: &[(usize, usize)], n: usize) -> Result<Graph, GraphError> {
        let mut pairs = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange { id: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut arcs = Vec::with_capacity(2 * pairs.len());
        for &(a, b) in &pairs {
            arcs.push((a, b));
            arcs.push((b, a));
        }
        arcs.sort_unstable();

        let mut row_ptr = vec![0usize; n + 1];
        for &(a, _) in &arcs {
            row_ptr[a + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = arcs.iter().map(|&(_, b)| b).collect();

        Ok(Graph { n, m: pairs.len(), row_ptr, cols })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.cols[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        assert!(u < self.n, "vertex {u} out of range for n={}", self.n);
        self.row_ptr[u + 1] - self.row_ptr[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Iterates every undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u).iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    /// Combinatorial Laplacian `L = D - A` with exact integer entries.
    pub fn laplacian(&self) -> SparseMatrix {
        let mut row_ptr = Vec::with_capacity(self.n + 1);
        let mut cols = Vec::with_capacity(self.cols.len() + self.n);
        let mut vals = Vec::with_capacity(self.cols.len() + self.n);
        row_ptr.push(0);
        for u in 0..self.n {
            let deg = self.degree(u) as f64;
            let mut placed = false;
            for &v in self.neighbors(u) {
                if !placed && v > u {
                    cols.push(u);
                    vals.push(deg);
                    placed = true;
                }
                cols.push(v);
                vals.push(-1.0);
            }
            if !placed {
                cols.push(u);
                vals.push(deg);
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix { n: self.n, row_ptr, cols, vals }
    }

    /// All vertices within hop distance `d` of `src`, including `src`.
    pub fn bfs_within(&self, src: usize, d: usize) -> NodeSet {
        assert!(src < self.n, "vertex {src} out of range for n={}", self.n);
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        let mut found = vec![src];
        while let Some(u) = queue.pop_front() {
            if dist[u] == d {
                continue;
            }
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    found.push(v);
                    queue.push_back(v);
                }
            }
        }
        NodeSet::from_unsorted(found)
    }

    /// Subgraph induced by `s`, with vertices relabeled to `0..s.len()`.
    pub fn induced_subgraph(&self, s: &NodeSet) -> Result<(Graph, VertexMap), GraphError> {
        if s.is_empty() {
            return Err(GraphError::EmptySelection);
        }
        if let Some(max) = s.max_id() {
            if max >= self.n {
                return Err(GraphError::VertexOutOfRange { id: max, n: self.n });
            }
        }
        let map = VertexMap { global: s.ids().to_vec() };
        let mut row_ptr = Vec::with_capacity(s.len() + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for gu in s.iter() {
            for &gv in self.neighbors(gu) {
                if let Some(lv) = map.to_local(gv) {
                    cols.push(lv);
                }
            }
            row_ptr.push(cols.len());
        }
        let m = cols.len() / 2;
        Ok((Graph { n: s.len(), m, row_ptr, cols }, map))
    }

    /// Connected components, ordered by smallest contained vertex id.
    pub fn connected_components(&self) -> Vec<NodeSet> {
        let mut seen = vec![false; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut comp = vec![start];
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            components.push(NodeSet::from_unsorted(comp));
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }
}

/// Sparse real matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets; duplicate
    /// positions are summed.
    ///
    /// # Panics
    /// If any index is `>= n`.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> SparseMatrix {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        for &(r, c, _) in &sorted {
            assert!(r < n && c < n, "triplet index out of range");
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = merged.iter().map(|&(_, c, _)| c).collect();
        let vals = merged.iter().map(|&(_, _, v)| v).collect();
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *slot = acc;
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let mut direct: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz());
        let mut flipped: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                direct.push((i, j, v));
                flipped.push((j, i, v));
            }
        }
        flipped.sort_by_key(|&(r, c, _)| (r, c));
        direct == flipped
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[(i, j)] += v;
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use proptest::prelude::*;

    #[test]
    fn single_edge_graph() {
        let g = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
    }

    #[test]
    fn reversed_duplicate_collapses() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 0)], 2).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        let err = Graph::from_edge_list(&[(0, 1), (2, 2)], 3).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop(2));
    }

    #[test]
    fn out_of_range_rejected() {
        let err = Graph::from_edge_list(&[(0, 5)], 3).unwrap_err();
        assert_eq!(err, GraphError::VertexOutOfRange { id: 5, n: 3 });
    }

    #[test]
    fn karate_counts() {
        let g = datasets::karate_club();
        assert_eq!(g.node_count(), 34);
        assert_eq!(g.edge_count(), 78);
        assert_eq!(g.degree(0), 16);
        assert_eq!(g.degree(33), 17);
    }

    #[test]
    fn path_degrees() {
        let g = datasets::path_graph(3);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::from_edge_list(&[(0, 1)], 2).unwrap();
        let l = g.laplacian().to_dense();
        assert_eq!(l, nalgebra::dmatrix![1.0, -1.0; -1.0, 1.0]);
    }

    #[test]
    fn laplacian_edgeless_graph_is_zero() {
        let g = Graph::from_edge_list(&[], 2).unwrap();
        let l = g.laplacian().to_dense();
        assert_eq!(l, DMatrix::zeros(2, 2));
    }

    #[test]
    fn laplacian_triangle() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        let l = g.laplacian().to_dense();
        let expected = DMatrix::from_diagonal_element(3, 3, 2.0)
            - (DMatrix::from_element(3, 3, 1.0) - DMatrix::identity(3, 3));
        assert_eq!(l, expected);
    }

    #[test]
    fn bfs_path_one_hop() {
        let g = datasets::path_graph(4);
        assert_eq!(g.bfs_within(0, 1).ids(), &[0, 1]);
        assert_eq!(g.bfs_within(0, 0).ids(), &[0]);
    }

    #[test]
    fn bfs_cycle_two_hops() {
        let g =
            Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], 6).unwrap();
        assert_eq!(g.bfs_within(0, 2).ids(), &[0, 1, 2, 4, 5]);
    }

    #[test]
    fn induced_pair_of_triangle() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        let (sub, map) = g.induced_subgraph(&NodeSet::from_sorted(vec![0, 1])).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(map.to_global(1), 1);
    }

    #[test]
    fn induced_full_set_is_identity() {
        let g = datasets::karate_club();
        let all = NodeSet::from_sorted((0..34).collect());
        let (sub, _) = g.induced_subgraph(&all).unwrap();
        assert_eq!(sub, g);
    }

    #[test]
    fn induced_empty_selection_rejected() {
        let g = datasets::path_graph(2);
        let err = g.induced_subgraph(&NodeSet::from_sorted(vec![])).unwrap_err();
        assert_eq!(err, GraphError::EmptySelection);
    }

    #[test]
    fn induced_karate_community_matches_edge_filter() {
        let g = datasets::karate_club();
        let side = NodeSet::from_sorted(vec![0, 1, 2, 3, 4, 5, 6, 7, 10, 11, 12, 13, 16, 17, 19, 21]);
        let (sub, _) = g.induced_subgraph(&side).unwrap();
        let filtered =
            g.edges().filter(|&(u, v)| side.contains(u) && side.contains(v)).count();
        assert_eq!(sub.edge_count(), filtered);
    }

    #[test]
    fn components_edge_plus_isolated() {
        let g = Graph::from_edge_list(&[(0, 1)], 3).unwrap();
        let comps = g.connected_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].ids(), &[0, 1]);
        assert_eq!(comps[1].ids(), &[2]);
    }

    #[test]
    fn components_connected_graph() {
        let g = datasets::karate_club();
        let comps = g.connected_components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), 34);
    }

    #[test]
    fn components_two_triangles() {
        let g =
            Graph::from_edge_list(&[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], 6).unwrap();
        let comps = g.connected_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 3);
        assert_eq!(comps[1].len(), 3);
    }

    #[test]
    fn sparse_from_triplets_sums_duplicates() {
        let m = SparseMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0)]);
        assert_eq!(m.to_dense(), nalgebra::dmatrix![0.0, 3.0; 3.0, 0.0]);
        assert!(m.is_symmetric());
    }

    #[test]
    fn asymmetric_matrix_detected() {
        let m = SparseMatrix::from_triplets(2, &[(0, 1, 1.0)]);
        assert!(!m.is_symmetric());
    }

    #[test]
    fn node_set_operations() {
        let a = NodeSet::from_unsorted(vec![3, 1, 3, 2]);
        let b = NodeSet::from_sorted(vec![2, 3, 5]);
        assert_eq!(a.ids(), &[1, 2, 3]);
        assert_eq!(a.intersection(&b).ids(), &[2, 3]);
        assert_eq!(a.union(&b).ids(), &[1, 2, 3, 5]);
        assert!(a.contains(2));
        assert!(!a.contains(5));
    }

    prop_compose! {
        fn arb_graph()(n in 2usize..24)(
            n in Just(n),
            edges in proptest::collection::vec((0..n, 0..n), 0..60),
        ) -> Graph {
            let cleaned: Vec<(usize, usize)> =
                edges.into_iter().filter(|&(u, v)| u != v).collect();
            Graph::from_edge_list(&cleaned, n).unwrap()
        }
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edge_count(g in arb_graph()) {
            let total: usize = (0..g.node_count()).map(|u| g.degree(u)).sum();
            prop_assert_eq!(total, 2 * g.edge_count());
        }

        #[test]
        fn laplacian_rows_sum_to_zero(g in arb_graph()) {
            let ones = vec![1.0; g.node_count()];
            let zero = g.laplacian().matvec(&ones);
            prop_assert!(zero.iter().all(|&v| v == 0.0));
        }

        #[test]
        fn bfs_full_depth_is_component(g in arb_graph(), src_raw in 0usize..24) {
            let src = src_raw % g.node_count();
            let ball = g.bfs_within(src, g.node_count());
            let comp = g
                .connected_components()
                .into_iter()
                .find(|c| c.contains(src))
                .unwrap();
            prop_assert_eq!(ball, comp);
        }

        #[test]
        fn induced_on_everything_is_identity(g in arb_graph()) {
            let all = NodeSet::from_sorted((0..g.node_count()).collect());
            let (sub, _) = g.induced_subgraph(&all).unwrap();
            prop_assert_eq!(sub, g);
        }
    }
}
