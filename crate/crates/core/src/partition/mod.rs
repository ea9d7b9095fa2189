//! Static hierarchical partition of the road graph.
//!
//! The graph is split recursively into `m` balanced parts until no part has
//! more than `z` vertices. Nodes are numbered breadth-first from the root, and
//! vertices are permuted so that every node owns a contiguous range of one
//! internal order. Membership tests are therefore O(1).

mod apsp;
mod import;
mod kway;

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use apsp::{precompute_leaf_apsp, LeafDistanceTable, LeafMatrix};
pub use kway::balance_bounds;

use crate::graph::{RoadGraph, VertexId, Weight};
use crate::{Error, Result};

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionParams {
    /// Branching factor.
    pub m: usize,
    /// Leaf-size threshold.
    pub z: usize,
    /// Allowed imbalance of child sizes relative to `n/m`.
    pub epsilon: f64,
    pub seed: u64,
}

impl PartitionParams {
    pub fn new(m: usize, z: usize) -> Self {
        PartitionParams {
            m,
            z,
            epsilon: 1.10,
            seed: 0x0D1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionNode {
    pub id: NodeId,
    /// Depth from the root.
    pub level: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    range: Range<u32>,
    /// Vertices with a neighbour outside this node, ascending.
    pub border: Vec<VertexId>,
    /// For each border vertex (same index), its edges leaving the node.
    pub external: Vec<Vec<(VertexId, Weight)>>,
    /// Longest downward path to a leaf.
    pub height: u32,
}

impl PartitionNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        (self.range.end - self.range.start) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn border_index(&self, v: VertexId) -> Option<usize> {
        self.border.binary_search(&v).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTree {
    nodes: Vec<PartitionNode>,
    order: Vec<VertexId>,
    pos: Vec<u32>,
    leaf_of: Vec<NodeId>,
    /// Smallest depth at which the vertex is a border vertex (`u32::MAX` if never).
    border_depth: Vec<u32>,
    m: usize,
    z: usize,
}

impl PartitionTree {
    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> NodeId {
        Self::ROOT
    }

    pub fn node(&self, id: NodeId) -> &PartitionNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[PartitionNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// The vertices owned by a node.
    pub fn vertices(&self, id: NodeId) -> &[VertexId] {
        let r = &self.nodes[id as usize].range;
        &self.order[r.start as usize..r.end as usize]
    }

    #[inline]
    pub fn contains(&self, id: NodeId, v: VertexId) -> bool {
        self.nodes[id as usize].range.contains(&self.pos[v as usize])
    }

    /// The unique leaf owning `v`.
    #[inline]
    pub fn leaf_of(&self, v: VertexId) -> NodeId {
        self.leaf_of[v as usize]
    }

    /// Whether `v` (which must belong to `id`) is a border vertex of `id`.
    #[inline]
    pub fn is_border(&self, id: NodeId, v: VertexId) -> bool {
        self.nodes[id as usize].level >= self.border_depth[v as usize]
    }

    /// The child of `id` owning `v`, or `None` for leaves and foreign vertices.
    pub fn child_toward(&self, id: NodeId, v: VertexId) -> Option<NodeId> {
        self.nodes[id as usize]
            .children
            .iter()
            .copied()
            .find(|&c| self.contains(c, v))
    }

    /// Nodes from `from` up to and including `to`, which must be an ancestor-or-self.
    pub fn branch(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let mut out = vec![from];
        let mut n = from;
        while n != to {
            n = self.parent(n).expect("`to` is not an ancestor");
            out.push(n);
        }
        out
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id as usize].parent
    }

    /// Ancestors of `id` from its parent up to the root.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&n| self.parent(n))
    }

    /// Nodes in ascending height (children before parents).
    pub fn bottom_up(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = (0..self.nodes.len() as NodeId).collect();
        ids.sort_by_key(|&n| (self.nodes[n as usize].height, n));
        ids
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id)
    }

    /// Number of original edges crossing between the children of each
    /// internal node, summed over the tree.
    pub fn edge_cut(&self, graph: &RoadGraph) -> usize {
        graph
            .edges()
            .filter(|&(u, v, _)| self.leaf_of(u) != self.leaf_of(v))
            .count()
    }

    /// Line-oriented dump: one `node <id> parent <p|-> level <l> vertices ...` line per node.
    pub fn dump(&self) -> String {
        let mut out = String::from("odin-partition v1\n");
        for n in &self.nodes {
            let parent = n.parent.map_or("-".to_string(), |p| p.to_string());
            let _ = write!(out, "node {} parent {} level {} vertices", n.id, parent, n.level);
            let mut vs = self.vertices(n.id).to_vec();
            vs.sort_unstable();
            for v in vs {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    /// Rebuilds a tree from [`PartitionTree::dump`] output.
    pub fn from_dump(graph: &RoadGraph, text: &str, m: usize, z: usize) -> Result<Self> {
        import::from_dump(graph, text, m, z)
    }

    /// Builds a tree from a `vertex path` file, where `path` is a dotted list of
    /// child indices (`2.0.3`). Leaves larger than `z` are split further with
    /// the built-in partitioner.
    pub fn import(graph: &RoadGraph, text: &str, params: &PartitionParams) -> Result<Self> {
        import::from_paths(graph, text, params)
    }
}

/// Recursively partitions `graph` into an m-ary tree.
///
/// A node with more than `z` vertices gets exactly `m` children, unless it has
/// fewer than `m` vertices, in which case it is split into singletons.
pub fn hierarchical_partition(graph: &RoadGraph, params: &PartitionParams) -> Result<PartitionTree> {
    validate(graph, params)?;
    let n = graph.vertex_count();
    let mut builder = Builder::new(graph, params.m, params.z);
    let mut queue = VecDeque::from([builder.add_root(n)]);
    while let Some(id) = queue.pop_front() {
        let size = builder.nodes[id as usize].len();
        if size <= params.z {
            continue;
        }
        let labels = split(graph, builder.slice(id), params, id);
        for child in builder.split(id, &labels) {
            queue.push_back(child);
        }
    }
    Ok(builder.finish())
}

fn validate(graph: &RoadGraph, params: &PartitionParams) -> Result<()> {
    if params.m < 2 {
        return Err(Error::InvalidArgument("m must be at least 2".into()));
    }
    if params.z < 2 {
        return Err(Error::InvalidArgument("z must be at least 2".into()));
    }
    if params.epsilon.is_nan() || params.epsilon < 1.0 {
        return Err(Error::InvalidArgument("epsilon must be >= 1".into()));
    }
    if graph.vertex_count() == 0 {
        return Err(Error::InvalidArgument("graph is empty".into()));
    }
    Ok(())
}

/// Part label for each vertex of `vertices` (same order).
pub(crate) fn split(
    graph: &RoadGraph,
    vertices: &[VertexId],
    params: &PartitionParams,
    node: NodeId,
) -> Vec<u32> {
    let n = vertices.len();
    if n < params.m {
        return (0..n as u32).collect();
    }
    let mut local = std::collections::HashMap::with_capacity(n);
    for (i, &v) in vertices.iter().enumerate() {
        local.insert(v, i as u32);
    }
    let lists: Vec<Vec<u32>> = vertices
        .iter()
        .map(|&v| {
            graph
                .neighbors(v)
                .filter_map(|(u, _)| local.get(&u).copied())
                .collect()
        })
        .collect();
    let g = kway::WGraph::from_adjacency(&lists);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    kway::partition(&g, params.m, params.epsilon, &mut rng)
}

pub(crate) struct Builder<'g> {
    graph: &'g RoadGraph,
    nodes: Vec<PartitionNode>,
    order: Vec<VertexId>,
    m: usize,
    z: usize,
}

impl<'g> Builder<'g> {
    pub(crate) fn new(graph: &'g RoadGraph, m: usize, z: usize) -> Self {
        Builder {
            graph,
            nodes: Vec::new(),
            order: (0..graph.vertex_count() as VertexId).collect(),
            m,
            z,
        }
    }

    pub(crate) fn add_root(&mut self, n: usize) -> NodeId {
        self.nodes.push(PartitionNode {
            id: 0,
            level: 0,
            parent: None,
            children: Vec::new(),
            range: 0..n as u32,
            border: Vec::new(),
            external: Vec::new(),
            height: 0,
        });
        0
    }

    pub(crate) fn slice(&self, id: NodeId) -> &[VertexId] {
        let r = &self.nodes[id as usize].range;
        &self.order[r.start as usize..r.end as usize]
    }

    /// Splits a node by part labels (dense `0..k`). Returns the child ids.
    pub(crate) fn split(&mut self, id: NodeId, labels: &[u32]) -> Vec<NodeId> {
        let r = self.nodes[id as usize].range.clone();
        let parts = labels.iter().max().map_or(0, |&x| x + 1);
        let slice = &mut self.order[r.start as usize..r.end as usize];
        let mut tagged: Vec<(u32, VertexId)> =
            labels.iter().copied().zip(slice.iter().copied()).collect();
        tagged.sort_by_key(|&(p, v)| (p, v));
        for (dst, (_, v)) in slice.iter_mut().zip(&tagged) {
            *dst = *v;
        }
        let level = self.nodes[id as usize].level + 1;
        let mut start = r.start;
        let mut children = Vec::with_capacity(parts as usize);
        for p in 0..parts {
            let count = tagged.iter().filter(|t| t.0 == p).count() as u32;
            if count == 0 {
                continue;
            }
            let cid = self.nodes.len() as NodeId;
            self.nodes.push(PartitionNode {
                id: cid,
                level,
                parent: Some(id),
                children: Vec::new(),
                range: start..start + count,
                border: Vec::new(),
                external: Vec::new(),
                height: 0,
            });
            children.push(cid);
            start += count;
        }
        self.nodes[id as usize].children = children.clone();
        children
    }

    pub(crate) fn finish(self) -> PartitionTree {
        let Builder {
            graph,
            mut nodes,
            order,
            m,
            z,
        } = self;
        let n = order.len();
        let mut pos = vec![0u32; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v as usize] = i as u32;
        }
        let mut leaf_of = vec![0; n];
        for node in nodes.iter().filter(|n| n.is_leaf()) {
            for i in node.range.clone() {
                leaf_of[order[i as usize] as usize] = node.id;
            }
        }
        // Heights, children before parents (ids are breadth-first).
        for id in (0..nodes.len()).rev() {
            if let Some(p) = nodes[id].parent {
                let h = nodes[id].height + 1;
                let parent = &mut nodes[p as usize];
                parent.height = parent.height.max(h);
            }
        }

        let contains = |nodes: &[PartitionNode], id: NodeId, v: VertexId| {
            nodes[id as usize].range.contains(&pos[v as usize])
        };
        // Deepest node containing both endpoints, by walking up from the leaves.
        let mut border_depth = vec![u32::MAX; n];
        for v in 0..n as VertexId {
            for (u, _) in graph.neighbors(v) {
                let mut a = leaf_of[v as usize];
                while !contains(&nodes, a, u) {
                    a = nodes[a as usize].parent.expect("root contains everything");
                }
                let d = nodes[a as usize].level + 1;
                border_depth[v as usize] = border_depth[v as usize].min(d);
            }
        }
        for id in 0..nodes.len() {
            let level = nodes[id].level;
            let mut border = Vec::new();
            let mut external = Vec::new();
            for i in nodes[id].range.clone() {
                let v = order[i as usize];
                if level >= border_depth[v as usize] {
                    border.push(v);
                }
            }
            border.sort_unstable();
            for &v in &border {
                external.push(
                    graph
                        .neighbors(v)
                        .filter(|&(u, _)| !contains(&nodes, id as NodeId, u))
                        .collect(),
                );
            }
            nodes[id].border = border;
            nodes[id].external = external;
        }
        PartitionTree {
            nodes,
            order,
            pos,
            leaf_of,
            border_depth,
            m,
            z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{generate, SyntheticSpec};

    /// Independent checker: walks every node and verifies partition, size,
    /// balance, border and external-edge properties from first principles.
    pub(crate) fn check_tree(graph: &RoadGraph, tree: &PartitionTree, params: &PartitionParams) {
        let n = graph.vertex_count();
        let root: Vec<_> = tree.vertices(tree.root()).to_vec();
        assert_eq!(root.len(), n);
        for node in tree.nodes() {
            let vs: std::collections::BTreeSet<_> = tree.vertices(node.id).iter().copied().collect();
            if node.is_leaf() {
                assert!(vs.len() <= params.z || node.id == tree.root() && n <= params.z);
                for &v in &vs {
                    assert_eq!(tree.leaf_of(v), node.id);
                }
            } else {
                assert!(vs.len() > params.z);
                let mut union = std::collections::BTreeSet::new();
                let mut total = 0;
                for &c in &node.children {
                    let cv = tree.vertices(c);
                    total += cv.len();
                    union.extend(cv.iter().copied());
                    assert_eq!(tree.parent(c), Some(node.id));
                }
                assert_eq!(total, vs.len(), "children overlap");
                assert_eq!(union, vs, "children do not cover parent");
                if vs.len() >= params.m {
                    assert_eq!(node.children.len(), params.m);
                    let (lo, hi) = balance_bounds(vs.len(), params.m, params.epsilon);
                    for &c in &node.children {
                        let s = tree.vertices(c).len();
                        assert!(lo <= s && s <= hi, "child size {s} outside {lo}..={hi}");
                    }
                }
            }
            // Border: brute force.
            let expect: Vec<VertexId> = vs
                .iter()
                .copied()
                .filter(|&v| graph.neighbors(v).any(|(u, _)| !vs.contains(&u)))
                .collect();
            assert_eq!(node.border, expect, "border of node {}", node.id);
            for (i, &b) in node.border.iter().enumerate() {
                let ext: Vec<_> = graph.neighbors(b).filter(|(u, _)| !vs.contains(u)).collect();
                assert_eq!(node.external[i], ext);
                for &(u, _) in &ext {
                    assert!(graph.neighbors(u).any(|(x, _)| x == b));
                }
            }
        }
        // Internal edges of leaves plus edges crossing leaves = all edges.
        let mut internal = 0;
        let mut crossing = 0;
        for (u, v, _) in graph.edges() {
            if tree.leaf_of(u) == tree.leaf_of(v) {
                internal += 1;
            } else {
                crossing += 1;
            }
        }
        assert_eq!(internal + crossing, graph.edge_count());
        assert_eq!(crossing, tree.edge_cut(graph));
    }

    #[test]
    fn single_leaf_when_z_covers_graph() {
        let g = generate(&SyntheticSpec::new(40, 2));
        let tree = hierarchical_partition(&g, &PartitionParams::new(4, 40)).unwrap();
        assert_eq!(tree.len(), 1);
        assert!(tree.node(0).is_leaf());
        assert!(tree.node(0).border.is_empty());
        assert!((0..40).all(|v| tree.leaf_of(v) == 0));
    }

    #[test]
    fn random_500_vertex_tree_walk() {
        let g = generate(&SyntheticSpec::new(500, 11));
        let params = PartitionParams::new(4, 50);
        let tree = hierarchical_partition(&g, &params).unwrap();
        check_tree(&g, &tree, &params);
        assert!(tree.leaves().count() >= 10);
        for v in 0..500 {
            assert!(tree.vertices(tree.leaf_of(v)).contains(&v));
        }
    }

    #[test]
    fn two_level_shape_with_z15() {
        // 4 top parts of ~16 vertices each, all above z = 15 and split again.
        let g = generate(&SyntheticSpec::new(64, 4));
        let params = PartitionParams::new(4, 15);
        let tree = hierarchical_partition(&g, &params).unwrap();
        check_tree(&g, &tree, &params);
        assert_eq!(tree.node(0).children.len(), 4);
        let depth = tree.nodes().iter().map(|n| n.level).max().unwrap();
        assert_eq!(depth, 2);
    }

    #[test]
    fn deterministic_for_seed() {
        let g = generate(&SyntheticSpec::new(300, 8));
        let p = PartitionParams::new(3, 30);
        let a = hierarchical_partition(&g, &p).unwrap();
        let b = hierarchical_partition(&g, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_split_into_singletons() {
        let g = RoadGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        let tree = hierarchical_partition(&g, &PartitionParams::new(5, 2)).unwrap();
        assert_eq!(tree.node(0).children.len(), 3);
        assert!(tree.leaves().all(|l| tree.vertices(l).len() == 1));
    }

    #[test]
    fn rejects_bad_params() {
        let g = RoadGraph::from_edges(3, [(0, 1, 1)]).unwrap();
        assert!(hierarchical_partition(&g, &PartitionParams::new(1, 5)).is_err());
        assert!(hierarchical_partition(&g, &PartitionParams::new(2, 1)).is_err());
    }

    #[test]
    fn dump_round_trips() {
        let g = generate(&SyntheticSpec::new(200, 5));
        let p = PartitionParams::new(4, 30);
        let tree = hierarchical_partition(&g, &p).unwrap();
        let again = PartitionTree::from_dump(&g, &tree.dump(), 4, 30).unwrap();
        assert_eq!(again.dump(), tree.dump());
        check_tree(&g, &again, &p);
    }
}
