use super::OdinIndex;
use crate::graph::{Dist, VertexId, INF};
use crate::partition::NodeId;

/// The union of all active skeletons plus the external edges between active
/// nodes, answered on demand from the owning active node.
#[derive(Clone, Copy)]
pub struct GlobalSkeletonView<'a> {
    index: &'a OdinIndex,
}

impl<'a> GlobalSkeletonView<'a> {
    pub fn new(index: &'a OdinIndex) -> Self {
        GlobalSkeletonView { index }
    }

    pub fn index(&self) -> &'a OdinIndex {
        self.index
    }

    /// Whether `v` is a border of the active node covering it.
    #[inline]
    pub fn is_border(&self, v: VertexId) -> bool {
        self.index.tree().is_border(self.index.active_of(v), v)
    }

    #[inline]
    pub fn is_live(&self, v: VertexId) -> bool {
        self.index.is_live(v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.is_live(v) || self.is_border(v)
    }

    /// Calls `f` for every neighbour of a border vertex. Pure live vertices
    /// have edges only back to borders that reach them at least as cheaply,
    /// so they report nothing and return `false`.
    pub fn for_each_neighbor(&self, v: VertexId, mut f: impl FnMut(VertexId, Dist)) -> bool {
        let node = self.index.active_of(v);
        let Some(i) = self.border_slot(node, v) else {
            return false;
        };
        let sk = self.index.skeleton(node).expect("active node not materialized");
        for (j, &w) in sk.border_row(i).iter().enumerate() {
            if j != i && w != INF {
                f(sk.borders()[j], w);
            }
        }
        for (l, row) in sk.live_rows() {
            if row[i] != INF {
                f(l, row[i]);
            }
        }
        for &(u, w) in &self.index.tree().node(node).external[i] {
            f(u, w as Dist);
        }
        true
    }

    fn border_slot(&self, node: NodeId, v: VertexId) -> Option<usize> {
        if !self.index.tree().is_border(node, v) {
            return None;
        }
        self.index.tree().node(node).border_index(v)
    }

    pub fn vertex_count(&self) -> usize {
        let n = self.index.graph().vertex_count() as VertexId;
        (0..n).filter(|&v| self.contains(v)).count()
    }
}
