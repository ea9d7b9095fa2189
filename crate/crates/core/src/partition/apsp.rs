use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{NodeId, PartitionTree};
use crate::graph::{Dist, RoadGraph, VertexId, INF};

/// Dense all-pairs distances inside one leaf, over the leaf's internal edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafMatrix {
    vertices: Vec<VertexId>,
    dist: Vec<Dist>,
}

impl LeafMatrix {
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Dist {
        self.dist[i * self.vertices.len() + j]
    }

    /// Distance between two members of the leaf. Panics if either is not a member.
    pub fn get(&self, u: VertexId, v: VertexId) -> Dist {
        let i = self.index_of(u).expect("vertex not in leaf");
        let j = self.index_of(v).expect("vertex not in leaf");
        self.at(i, j)
    }

    /// Row of distances from `u` to every member, in `vertices()` order.
    pub fn row(&self, u: VertexId) -> &[Dist] {
        let i = self.index_of(u).expect("vertex not in leaf");
        let n = self.vertices.len();
        &self.dist[i * n..(i + 1) * n]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafDistanceTable {
    by_node: Vec<Option<LeafMatrix>>,
}

impl LeafDistanceTable {
    pub fn leaf(&self, id: NodeId) -> &LeafMatrix {
        self.by_node[id as usize]
            .as_ref()
            .expect("node is not a leaf")
    }

    pub fn get(&self, leaf: NodeId, u: VertexId, v: VertexId) -> Dist {
        self.leaf(leaf).get(u, v)
    }
}

/// One Dijkstra per vertex of every leaf, restricted to the leaf's induced
/// subgraph. Leaves are processed in parallel.
pub fn precompute_leaf_apsp(tree: &PartitionTree, graph: &RoadGraph) -> LeafDistanceTable {
    let leaves: Vec<NodeId> = tree.leaves().collect();
    let mats: Vec<(NodeId, LeafMatrix)> = leaves
        .par_iter()
        .map(|&leaf| (leaf, leaf_matrix(tree, graph, leaf)))
        .collect();
    let mut by_node = vec![None; tree.len()];
    for (leaf, m) in mats {
        by_node[leaf as usize] = Some(m);
    }
    LeafDistanceTable { by_node }
}

fn leaf_matrix(tree: &PartitionTree, graph: &RoadGraph, leaf: NodeId) -> LeafMatrix {
    let mut vertices = tree.vertices(leaf).to_vec();
    vertices.sort_unstable();
    let n = vertices.len();
    let local = |v: VertexId| vertices.binary_search(&v).ok();
    let adj: Vec<Vec<(usize, Dist)>> = vertices
        .iter()
        .map(|&v| {
            graph
                .neighbors(v)
                .filter_map(|(u, w)| local(u).map(|j| (j, w as Dist)))
                .collect()
        })
        .collect();

    let mut dist = vec![INF; n * n];
    let mut heap = BinaryHeap::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        heap.push(Reverse((0, s)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > row[v] {
                continue;
            }
            for &(u, w) in &adj[v] {
                let nd = d + w;
                if nd < row[u] {
                    row[u] = nd;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
    }
    LeafMatrix { vertices, dist }
}
