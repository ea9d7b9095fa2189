//! Weighted undirected road graph.
//!
//! Vertices are dense `u32` indices; edge weights are positive integers so
//! every distance comparison in the crate is exact.

mod dijkstra;
pub mod dimacs;
pub mod synthetic;

pub use dijkstra::{dijkstra, dijkstra_in, DistanceMap};

pub type VertexId = u32;
pub type Weight = u32;
/// Path length. `INF` marks an unreachable vertex.
pub type Dist = u64;

pub const INF: Dist = Dist::MAX;

#[inline]
pub fn add_dist(a: Dist, b: Dist) -> Dist {
    a.saturating_add(b)
}

/// Immutable CSR adjacency. Each undirected edge is stored in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoadGraph {
    first_out: Vec<u32>,
    head: Vec<VertexId>,
    weight: Vec<Weight>,
    coords: Option<Vec<(i64, i64)>>,
}

impl RoadGraph {
    /// Builds a graph from undirected edges. Self-loops are dropped and
    /// parallel edges collapse to the minimum weight. Zero weights are rejected.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Weight)>,
    ) -> crate::Result<Self> {
        let mut arcs: Vec<(VertexId, VertexId, Weight)> = Vec::new();
        for (u, v, w) in edges {
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(crate::Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            if w == 0 {
                return Err(crate::Error::InvalidArgument(format!(
                    "edge ({u}, {v}) has zero weight"
                )));
            }
            if u == v {
                continue;
            }
            arcs.push((u, v, w));
            arcs.push((v, u, w));
        }
        arcs.sort_unstable();
        arcs.dedup_by(|next, kept| next.0 == kept.0 && next.1 == kept.1);

        let mut first_out = vec![0u32; vertex_count + 1];
        for &(u, _, _) in &arcs {
            first_out[u as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            first_out[i + 1] += first_out[i];
        }
        Ok(RoadGraph {
            first_out,
            head: arcs.iter().map(|a| a.1).collect(),
            weight: arcs.iter().map(|a| a.2).collect(),
            coords: None,
        })
    }

    pub fn with_coords(mut self, coords: Vec<(i64, i64)>) -> crate::Result<Self> {
        if coords.len() != self.vertex_count() {
            return Err(crate::Error::InvalidArgument(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.vertex_count()
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.first_out.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.head.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        (self.first_out[v as usize + 1] - self.first_out[v as usize]) as usize
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, Weight)> + '_ {
        let r = self.first_out[v as usize] as usize..self.first_out[v as usize + 1] as usize;
        self.head[r.clone()]
            .iter()
            .copied()
            .zip(self.weight[r].iter().copied())
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<Weight> {
        let r = self.first_out[u as usize] as usize..self.first_out[u as usize + 1] as usize;
        self.head[r.clone()]
            .binary_search(&v)
            .ok()
            .map(|i| self.weight[r.start + i])
    }

    /// Undirected edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Weight)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    pub fn coords(&self) -> Option<&[(i64, i64)]> {
        self.coords.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_keep_minimum_and_self_loops_vanish() {
        let g = RoadGraph::from_edges(3, [(0, 1, 7), (1, 0, 3), (2, 2, 1), (1, 2, 4)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edge_weight(0, 1), Some(3));
        assert_eq!(g.edge_weight(1, 0), Some(3));
        assert_eq!(g.edge_weight(2, 2), None);
    }

    #[test]
    fn zero_weight_is_rejected() {
        assert!(RoadGraph::from_edges(2, [(0, 1, 0)]).is_err());
    }

    #[test]
    fn edges_iterates_each_undirected_edge_once() {
        let g = RoadGraph::from_edges(4, [(0, 1, 1), (1, 2, 2), (3, 2, 5)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1, 1), (1, 2, 2), (2, 3, 5)]);
    }
}
