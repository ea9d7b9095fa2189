use std::collections::BTreeSet;

use super::OdinIndex;
use crate::graph::VertexId;
use crate::partition::NodeId;

impl OdinIndex {
    /// Structural self-check: coverage, freshness, skeleton shape and the
    /// fold/unfold fixpoint. Weights are not checked here.
    pub fn check_invariants(&self) -> Result<(), String> {
        let tree = self.tree();
        for leaf in tree.leaves() {
            let path: Vec<NodeId> = std::iter::once(leaf).chain(tree.ancestors(leaf)).collect();
            let active: Vec<NodeId> = path.iter().copied().filter(|&n| self.is_active(n)).collect();
            if active.len() != 1 {
                return Err(format!("leaf {leaf} has {} active nodes on its root path", active.len()));
            }
            if self.active_of_leaf[leaf as usize] != active[0] {
                return Err(format!("leaf {leaf} maps to stale active node"));
            }
        }

        for node in tree.nodes() {
            let id = node.id;
            let Some(sk) = self.skeleton(id) else {
                if self.is_active(id) {
                    return Err(format!("active node {id} has no skeleton"));
                }
                continue;
            };
            for &c in &node.children {
                if !self.is_materialized(c) {
                    return Err(format!("node {id} materialized but child {c} is not"));
                }
            }
            if sk.borders() != node.border.as_slice() {
                return Err(format!("node {id} skeleton borders differ from the partition"));
            }
            let pure: BTreeSet<VertexId> = sk.lives().iter().copied().filter(|&l| !sk.is_border(l)).collect();
            let rows: BTreeSet<VertexId> = sk.live_rows().map(|(l, _)| l).collect();
            if pure != rows {
                return Err(format!("node {id} rows do not match its non-border lives"));
            }
            if sk.live_rows().any(|(_, r)| r.len() != sk.borders().len()) {
                return Err(format!("node {id} has a short live row"));
            }
            if sk.lives().iter().any(|&l| !tree.contains(id, l)) {
                return Err(format!("node {id} lists a live vertex it does not own"));
            }
            // Def 5 edge set: border x (border + live) minus self pairs.
            let mut expect = BTreeSet::new();
            for &b in sk.borders() {
                for &x in sk.borders().iter().chain(sk.lives().iter()) {
                    if b != x {
                        expect.insert((b.min(x), b.max(x)));
                    }
                }
            }
            let got: BTreeSet<(VertexId, VertexId)> = sk.edges().iter().map(|e| (e.0, e.1)).collect();
            if got != expect || got.len() != sk.edges().len() {
                return Err(format!("node {id} edge set is not border x (border + live)"));
            }
        }

        // Active nodes and everything below them carry the exact live set.
        let mut covered = 0usize;
        for a in self.active_nodes() {
            let mut stack = vec![a];
            while let Some(n) = stack.pop() {
                let want: BTreeSet<VertexId> = tree.vertices(n).iter().copied().filter(|&v| self.is_live(v)).collect();
                let sk = self.skeleton(n).ok_or(format!("node {n} below active {a} not materialized"))?;
                if *sk.lives() != want {
                    return Err(format!("node {n} (active ancestor {a}) has a stale live set"));
                }
                if n == a {
                    covered += want.len();
                }
                stack.extend(tree.node(n).children.iter().copied());
            }
        }
        let live_total = self.live_vertices().count();
        if covered != live_total {
            return Err(format!("{covered} live vertices covered by active nodes, {live_total} exist"));
        }

        for node in tree.nodes() {
            if self.can_fold(node.id) {
                return Err(format!("node {} should have folded", node.id));
            }
            if self.can_unfold(node.id) {
                return Err(format!("node {} should have unfolded", node.id));
            }
        }

        let mut placed = 0;
        for (v, list) in self.objects.iter().enumerate() {
            for &(id, d) in list {
                let p = self.object_at.get(&id).ok_or(format!("object {id} has no placement"))?;
                if p.vertex as usize != v || p.delta != d {
                    return Err(format!("object {id} placement out of sync"));
                }
                placed += 1;
            }
        }
        if placed != self.object_at.len() {
            return Err("object table has entries missing from vertex lists".into());
        }
        Ok(())
    }
}
