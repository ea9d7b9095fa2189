//! Union of sibling skeleton graphs joined by the external edges between them.

use std::collections::HashMap;

use crate::graph::{Dist, VertexId, INF};
use crate::index::SkeletonGraph;
use crate::{Error, Result};

/// An explicit weighted graph over the vertices of several skeleton graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedGraph {
    vertices: Vec<VertexId>,
    local: HashMap<VertexId, u32>,
    adj: Vec<Vec<(u32, Dist)>>,
}

impl CombinedGraph {
    /// Builds a graph directly from vertices and undirected weighted edges.
    /// Infinite weights are dropped; duplicate edges keep the minimum.
    pub fn from_edges(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, Dist)>,
    ) -> Result<Self> {
        let mut g = CombinedGraph {
            vertices: Vec::new(),
            local: HashMap::new(),
            adj: Vec::new(),
        };
        for v in vertices {
            g.add_vertex(v);
        }
        for (a, b, w) in edges {
            g.add_edge(a, b, w)?;
        }
        g.normalize();
        Ok(g)
    }

    fn add_vertex(&mut self, v: VertexId) -> u32 {
        if let Some(&i) = self.local.get(&v) {
            return i;
        }
        let i = self.vertices.len() as u32;
        self.vertices.push(v);
        self.local.insert(v, i);
        self.adj.push(Vec::new());
        i
    }

    fn add_edge(&mut self, a: VertexId, b: VertexId, w: Dist) -> Result<()> {
        if w == INF || a == b {
            return Ok(());
        }
        let (Some(&i), Some(&j)) = (self.local.get(&a), self.local.get(&b)) else {
            return Err(Error::Corrupt(format!("edge ({a}, {b}) has an endpoint outside the graph")));
        };
        self.adj[i as usize].push((j, w));
        self.adj[j as usize].push((i, w));
        Ok(())
    }

    fn normalize(&mut self) {
        for list in &mut self.adj {
            list.sort_unstable();
            list.dedup_by_key(|e| e.0);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn local_id(&self, v: VertexId) -> Option<u32> {
        self.local.get(&v).copied()
    }

    pub fn vertex(&self, local: u32) -> VertexId {
        self.vertices[local as usize]
    }

    pub(crate) fn adj(&self, local: u32) -> &[(u32, Dist)] {
        &self.adj[local as usize]
    }

    /// Undirected edges as `(u, v, w)` with `u < v` in global ids, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, Dist)> {
        let mut out = Vec::new();
        for (i, list) in self.adj.iter().enumerate() {
            let a = self.vertices[i];
            for &(j, w) in list {
                let b = self.vertices[j as usize];
                if a < b {
                    out.push((a, b, w));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Combines child skeletons with the external edges between them.
///
/// Every external edge must join vertices of two different children.
pub fn combine_skeletons(
    children: &[&SkeletonGraph],
    external_edges: impl IntoIterator<Item = (VertexId, VertexId, Dist)>,
) -> Result<CombinedGraph> {
    let mut g = CombinedGraph {
        vertices: Vec::new(),
        local: HashMap::new(),
        adj: Vec::new(),
    };
    let mut owner: HashMap<VertexId, usize> = HashMap::new();
    for (c, sk) in children.iter().enumerate() {
        for v in sk.vertices() {
            if owner.insert(v, c).is_some() {
                return Err(Error::Corrupt(format!("vertex {v} appears in two child skeletons")));
            }
            g.add_vertex(v);
        }
    }
    for sk in children {
        for (a, b, w) in sk.edges() {
            g.add_edge(a, b, w)?;
        }
    }
    for (a, b, w) in external_edges {
        match (owner.get(&a), owner.get(&b)) {
            (Some(ca), Some(cb)) if ca != cb => g.add_edge(a, b, w)?,
            (Some(_), Some(_)) => {
                return Err(Error::Corrupt(format!("external edge ({a}, {b}) stays inside one child")))
            }
            _ => {
                return Err(Error::Corrupt(format!(
                    "external edge ({a}, {b}) endpoint not found in any child"
                )))
            }
        }
    }
    g.normalize();
    Ok(g)
}
