use rustc_hash::FxHashMap;

use crate::graph::{Dist, VertexId, INF};
use crate::index::OdinIndex;
use crate::partition::NodeId;

/// Transient edges from the query vertex to every border and live vertex of
/// its hosting active node. Empty when the query vertex is itself a border of
/// that node, since it then already has those edges.
///
/// Only distances to borders are stored, one map per level of the branch from
/// the query's leaf to the host. Those depend on the node shapes alone, so
/// lives may come and go without a rebuild; the weight to a live vertex is
/// derived from its skeleton rows when asked for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOverlay {
    q: VertexId,
    host: NodeId,
    /// Shape versions of the nodes from the query's leaf up to the host.
    stamps: Vec<(NodeId, u64)>,
    /// For each branch node above the leaf, distances inside it from the query
    /// to the borders of its children.
    levels: Vec<FxHashMap<VertexId, Dist>>,
    /// Distances inside the host to its borders, sorted by vertex.
    borders: Vec<(VertexId, Dist)>,
    border: bool,
}

impl QueryOverlay {
    /// Computes the border distances level by level from the leaf table up
    /// the branch. Nothing in the index changes.
    pub fn build(index: &OdinIndex, q: VertexId) -> Self {
        let tree = index.tree();
        let host = index.active_of(q);
        let leaf = tree.leaf_of(q);
        let branch = tree.branch(leaf, host);
        let stamps = branch.iter().map(|&n| (n, index.shape_version(n))).collect();
        let border = tree.is_border(host, q);
        let mut overlay = QueryOverlay {
            q,
            host,
            stamps,
            levels: Vec::new(),
            borders: Vec::new(),
            border,
        };
        if border {
            return overlay;
        }

        let mat = index.leaf_table().leaf(leaf);
        let row = mat.row(q);
        let mut cur: Vec<(VertexId, Dist)> =
            tree.node(leaf).border.iter().map(|&b| (b, row[mat.index_of(b).unwrap()])).collect();
        for &n in &branch[1..] {
            let dist = index.child_network(n, &cur, false, None);
            cur = tree.node(n).border.iter().map(|&b| (b, dist.get(&b).copied().unwrap_or(INF))).collect();
            overlay.levels.push(dist);
        }
        cur.retain(|&(x, d)| x != q && d != INF);
        overlay.borders = cur;
        overlay
    }

    /// Whether the overlay still describes the index.
    pub fn is_current(&self, index: &OdinIndex, q: VertexId) -> bool {
        q == self.q
            && index.active_of(q) == self.host
            && self.stamps.iter().all(|&(n, v)| index.shape_version(n) == v)
    }

    pub fn host(&self) -> NodeId {
        self.host
    }

    /// True when the query vertex is a border of its host and needs no edges.
    pub fn is_border(&self) -> bool {
        self.border
    }

    /// Edges to the host's borders.
    pub fn border_edges(&self) -> &[(VertexId, Dist)] {
        &self.borders
    }

    /// Calls `f` for every overlay edge: borders first, then live vertices.
    pub fn for_each_edge(&self, index: &OdinIndex, mut f: impl FnMut(VertexId, Dist)) {
        if self.border {
            return;
        }
        for &(b, d) in &self.borders {
            f(b, d);
        }
        let sk = index.skeleton(self.host).expect("host not materialized");
        for (l, _) in sk.live_rows() {
            if let Some(d) = self.live_weight(index, l) {
                f(l, d);
            }
        }
    }

    /// All overlay edges, sorted by vertex.
    pub fn edges(&self, index: &OdinIndex) -> Vec<(VertexId, Dist)> {
        let mut out = Vec::new();
        self.for_each_edge(index, |v, d| out.push((v, d)));
        out.sort_unstable();
        out
    }

    /// Weight of the overlay edge to `v`, a border or live vertex of the host.
    pub fn weight_to(&self, index: &OdinIndex, v: VertexId) -> Option<Dist> {
        if self.border {
            return None;
        }
        match self.borders.binary_search_by_key(&v, |e| e.0) {
            Ok(i) => Some(self.borders[i].1),
            Err(_) if index.tree().is_border(self.host, v) => None,
            Err(_) => self.live_weight(index, v),
        }
    }

    /// Distance inside the host from the query to a non-border vertex `v`
    /// that sits in every skeleton from its leaf up to the host. At each level
    /// the best path either stays in the child below or enters the child
    /// holding `v` for the last time through one of its borders.
    fn live_weight(&self, index: &OdinIndex, v: VertexId) -> Option<Dist> {
        let tree = index.tree();
        if v == self.q || !tree.contains(self.host, v) {
            return None;
        }
        let leaf = self.stamps[0].0;
        let mut d = INF;
        if tree.contains(leaf, v) {
            let mat = index.leaf_table().leaf(leaf);
            d = mat.row(self.q)[mat.index_of(v)?];
        }
        for (i, level) in self.levels.iter().enumerate() {
            let (n, below) = (self.stamps[i + 1].0, self.stamps[i].0);
            if !tree.contains(n, v) {
                continue;
            }
            let c = if tree.contains(below, v) { below } else { tree.child_toward(n, v)? };
            let sk = index.skeleton(c)?;
            for (b, &w) in sk.borders().iter().zip(sk.to_borders(v)?) {
                if let Some(&p) = level.get(b) {
                    if w != INF && p != INF {
                        d = d.min(p + w);
                    }
                }
            }
        }
        (d != INF).then_some(d)
    }
}
