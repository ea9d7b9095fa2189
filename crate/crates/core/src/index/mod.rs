//! The elastic tree. Every leaf has exactly one active ancestor-or-self; the
//! active nodes' skeleton graphs, joined by external edges, form the search
//! space of the kNN queries. Sparse regions fold into coarser nodes and dense
//! ones unfold into finer ones as objects move.

mod check;
mod skeleton;
mod view;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

pub use skeleton::SkeletonGraph;
pub use view::GlobalSkeletonView;

use crate::graph::{Dist, RoadGraph, VertexId, INF};
use crate::mpbs::{combine_skeletons, mpbs_with, MpbsOptions, Schedule};
use crate::partition::{
    hierarchical_partition, precompute_leaf_apsp, LeafDistanceTable, NodeId, PartitionParams, PartitionTree,
};
use crate::{Error, Result};

pub type ObjectId = u32;

/// Where an object is headed: its live vertex and the remaining distance to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub vertex: VertexId,
    pub delta: Dist,
}

/// One object's change between snapshots. `None` means absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectMove {
    pub object: ObjectId,
    pub from: Option<Placement>,
    pub to: Option<Placement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexParams {
    /// Underfill threshold: a sibling group with fewer live vertices folds.
    pub mu: usize,
    /// Run first-time activations and MPBS instances on the rayon pool.
    pub parallel: bool,
}

impl IndexParams {
    pub fn new(mu: usize) -> Self {
        IndexParams { mu, parallel: true }
    }
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams::new(5)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaintenanceReport {
    pub moves: usize,
    /// Moves that only changed an object's offset or swapped objects on a live vertex.
    pub delta_only: usize,
    pub inserts: usize,
    pub removes: usize,
    pub folds: usize,
    pub unfolds: usize,
    /// Folds that had to build a skeleton from scratch with MPBS.
    pub first_activations: usize,
    /// Skeleton updates summed over all inserts and removes.
    pub nodes_touched: usize,
}

impl MaintenanceReport {
    pub fn reshaped(&self) -> bool {
        self.folds + self.unfolds > 0
    }
}

#[derive(Debug, Clone)]
struct NodeState {
    active: bool,
    skeleton: Option<SkeletonGraph>,
    version: u64,
    /// Like `version`, but ignores live insertions and removals.
    shape: u64,
    /// Non-border lives inserted since `log_from`, with the version each made.
    added: Vec<(u64, VertexId)>,
    log_from: u64,
}

#[derive(Debug, Clone)]
pub struct OdinIndex {
    graph: Arc<RoadGraph>,
    tree: PartitionTree,
    leaf_table: LeafDistanceTable,
    params: IndexParams,
    nodes: Vec<NodeState>,
    active_of_leaf: Vec<NodeId>,
    objects: Vec<Vec<(ObjectId, Dist)>>,
    object_at: HashMap<ObjectId, Placement>,
    clock: u64,
}

impl OdinIndex {
    /// Partitions `graph`, precomputes leaf distances and builds the index.
    pub fn from_graph(
        graph: Arc<RoadGraph>,
        partition: &PartitionParams,
        objects: impl IntoIterator<Item = (ObjectId, Placement)>,
        params: IndexParams,
    ) -> Result<Self> {
        let tree = hierarchical_partition(&graph, partition)?;
        let table = precompute_leaf_apsp(&tree, &graph);
        Self::build(graph, tree, table, objects, params)
    }

    /// Activates every leaf, then folds underfilled sibling groups level by
    /// level, stopping at the first level where nothing folds.
    pub fn build(
        graph: Arc<RoadGraph>,
        tree: PartitionTree,
        leaf_table: LeafDistanceTable,
        objects: impl IntoIterator<Item = (ObjectId, Placement)>,
        params: IndexParams,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        if tree.vertices(tree.root()).len() != n {
            return Err(Error::InvalidArgument("partition tree does not match the graph".into()));
        }
        let mut index = OdinIndex {
            graph,
            nodes: vec![
                NodeState {
                    active: false,
                    skeleton: None,
                    version: 0,
                    shape: 0,
                    added: Vec::new(),
                    log_from: 0,
                };
                tree.len()
            ],
            active_of_leaf: vec![0; tree.len()],
            tree,
            leaf_table,
            params,
            objects: vec![Vec::new(); n],
            object_at: HashMap::new(),
            clock: 0,
        };
        for (id, p) in objects {
            if p.vertex as usize >= n {
                return Err(Error::InvalidArgument(format!("object {id} placed on unknown vertex {}", p.vertex)));
            }
            if index.object_at.insert(id, p).is_some() {
                return Err(Error::InvalidArgument(format!("object {id} placed twice")));
            }
            index.objects[p.vertex as usize].push((id, p.delta));
        }
        for list in &mut index.objects {
            list.sort_unstable();
        }

        let leaves: Vec<NodeId> = index.tree.leaves().collect();
        for &leaf in &leaves {
            let sk = index.leaf_skeleton(leaf);
            let version = index.tick();
            let st = &mut index.nodes[leaf as usize];
            st.skeleton = Some(sk);
            st.active = true;
            st.version = version;
            st.shape = version;
            st.log_from = version;
            index.active_of_leaf[leaf as usize] = leaf;
        }

        let max_height = index.tree.node(index.tree.root()).height;
        for h in 1..=max_height {
            let folding: Vec<NodeId> = (0..index.tree.len() as NodeId)
                .filter(|&p| index.tree.node(p).height == h && index.can_fold(p))
                .collect();
            if folding.is_empty() {
                break;
            }
            let built: Vec<Result<SkeletonGraph>> = if index.params.parallel {
                folding.par_iter().map(|&p| index.first_activation(p)).collect()
            } else {
                folding.iter().map(|&p| index.first_activation(p)).collect()
            };
            for (&p, sk) in folding.iter().zip(built) {
                index.nodes[p as usize].skeleton = Some(sk?);
                index.switch_to_parent(p);
            }
        }
        Ok(index)
    }

    pub fn graph(&self) -> &Arc<RoadGraph> {
        &self.graph
    }

    pub fn tree(&self) -> &PartitionTree {
        &self.tree
    }

    pub fn leaf_table(&self) -> &LeafDistanceTable {
        &self.leaf_table
    }

    pub fn params(&self) -> IndexParams {
        self.params
    }

    pub fn is_active(&self, node: NodeId) -> bool {
        self.nodes[node as usize].active
    }

    pub fn is_materialized(&self, node: NodeId) -> bool {
        self.nodes[node as usize].skeleton.is_some()
    }

    pub fn skeleton(&self, node: NodeId) -> Option<&SkeletonGraph> {
        self.nodes[node as usize].skeleton.as_ref()
    }

    /// Changes whenever the node's activation state or skeleton changes.
    pub fn version(&self, node: NodeId) -> u64 {
        self.nodes[node as usize].version
    }

    /// Changes whenever the node's activation state or border weights change;
    /// live insertions and removals leave it alone.
    pub fn shape_version(&self, node: NodeId) -> u64 {
        self.nodes[node as usize].shape
    }

    /// Non-border lives inserted into `node` after version `since`, or `None`
    /// if that part of the log is gone. Some may have been removed again.
    pub fn lives_added_since(&self, node: NodeId, since: u64) -> Option<impl Iterator<Item = VertexId> + '_> {
        let st = &self.nodes[node as usize];
        if since < st.log_from {
            return None;
        }
        let start = st.added.partition_point(|&(t, _)| t <= since);
        Some(st.added[start..].iter().map(|&(_, v)| v))
    }

    /// The active node covering `v`.
    #[inline]
    pub fn active_of(&self, v: VertexId) -> NodeId {
        self.active_of_leaf[self.tree.leaf_of(v) as usize]
    }

    pub fn active_nodes(&self) -> Vec<NodeId> {
        (0..self.tree.len() as NodeId).filter(|&n| self.is_active(n)).collect()
    }

    /// Objects heading to `v`, ascending by id, with their residual distances.
    pub fn objects_at(&self, v: VertexId) -> &[(ObjectId, Dist)] {
        &self.objects[v as usize]
    }

    pub fn is_live(&self, v: VertexId) -> bool {
        !self.objects[v as usize].is_empty()
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.objects.len() as VertexId).filter(|&v| self.is_live(v))
    }

    pub fn object_count(&self) -> usize {
        self.object_at.len()
    }

    pub fn placement(&self, object: ObjectId) -> Option<Placement> {
        self.object_at.get(&object).copied()
    }

    pub fn view(&self) -> GlobalSkeletonView<'_> {
        GlobalSkeletonView::new(self)
    }

    /// Per tree level: (materialized nodes, total nodes).
    pub fn materialized_per_level(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for node in self.tree.nodes() {
            let l = node.level as usize;
            if out.len() <= l {
                out.resize(l + 1, (0, 0));
            }
            out[l].1 += 1;
            if self.is_materialized(node.id) {
                out[l].0 += 1;
            }
        }
        out
    }

    pub fn materialized_count(&self) -> usize {
        self.nodes.iter().filter(|s| s.skeleton.is_some()).count()
    }

    /// Applies object moves, updates live vertices along their branches and
    /// folds or unfolds nodes until neither criterion fires.
    pub fn maintain(&mut self, moves: &[ObjectMove]) -> Result<MaintenanceReport> {
        let mut report = MaintenanceReport {
            moves: moves.len(),
            ..Default::default()
        };
        // Vertex -> was it live before this batch.
        let mut changed: HashMap<VertexId, bool> = HashMap::new();
        let n = self.objects.len();
        for mv in moves {
            let current = self.object_at.get(&mv.object).copied();
            if current != mv.from {
                return Err(Error::InvalidArgument(format!(
                    "object {} is at {:?}, move expects {:?}",
                    mv.object, current, mv.from
                )));
            }
            if mv.from == mv.to {
                continue;
            }
            if let Some(t) = mv.to {
                if t.vertex as usize >= n {
                    return Err(Error::InvalidArgument(format!("object {} moved to unknown vertex {}", mv.object, t.vertex)));
                }
            }
            if let Some(f) = mv.from {
                let was = self.is_live(f.vertex);
                changed.entry(f.vertex).or_insert(was);
                let list = &mut self.objects[f.vertex as usize];
                let i = list.binary_search_by_key(&mv.object, |e| e.0).expect("object list out of sync");
                list.remove(i);
                self.object_at.remove(&mv.object);
            }
            if let Some(t) = mv.to {
                let was = self.is_live(t.vertex);
                changed.entry(t.vertex).or_insert(was);
                let list = &mut self.objects[t.vertex as usize];
                let i = list.binary_search_by_key(&mv.object, |e| e.0).unwrap_err();
                list.insert(i, (mv.object, t.delta));
                self.object_at.insert(mv.object, t);
            }
        }

        let mut removes = Vec::new();
        let mut inserts = Vec::new();
        for (&v, &was) in &changed {
            match (was, self.is_live(v)) {
                (true, false) => removes.push(v),
                (false, true) => inserts.push(v),
                _ => report.delta_only += 1,
            }
        }
        removes.sort_unstable();
        inserts.sort_unstable();
        report.removes = removes.len();
        report.inserts = inserts.len();
        for &v in &removes {
            report.nodes_touched += self.detach_live(v);
        }
        for &v in &inserts {
            report.nodes_touched += self.attach_live(v);
        }

        let fold_from: Vec<NodeId> = removes.iter().filter_map(|&v| self.tree.parent(self.active_of(v))).collect();
        self.fold_sweep(fold_from, &mut report)?;
        let unfold_from: Vec<NodeId> = inserts.iter().map(|&v| self.active_of(v)).collect();
        self.unfold_sweep(unfold_from, &mut report);
        Ok(report)
    }

    /// Adds `objects` to `v` and, if `v` was not live, inserts it into every
    /// skeleton from its leaf up to its active node. Returns the number of
    /// skeletons updated. No folding or unfolding is done.
    pub fn insert_live(&mut self, v: VertexId, objects: &[(ObjectId, Dist)]) -> Result<usize> {
        if v as usize >= self.objects.len() {
            return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
        }
        let was = self.is_live(v);
        for &(id, delta) in objects {
            if self.object_at.contains_key(&id) {
                return Err(Error::InvalidArgument(format!("object {id} already placed")));
            }
            self.object_at.insert(id, Placement { vertex: v, delta });
            let list = &mut self.objects[v as usize];
            let i = list.binary_search_by_key(&id, |e| e.0).unwrap_err();
            list.insert(i, (id, delta));
        }
        if was || !self.is_live(v) {
            return Ok(0);
        }
        Ok(self.attach_live(v))
    }

    /// Drops every object on `v` and removes it from the skeletons on its
    /// branch. Returns the number of skeletons updated (0 if `v` was not live).
    pub fn remove_live(&mut self, v: VertexId) -> usize {
        if v as usize >= self.objects.len() || !self.is_live(v) {
            log::warn!("remove_live on non-live vertex {v}");
            return 0;
        }
        for (id, _) in std::mem::take(&mut self.objects[v as usize]) {
            self.object_at.remove(&id);
        }
        self.detach_live(v)
    }

    /// Folds and unfolds until neither criterion fires anywhere.
    pub fn rebalance(&mut self) -> Result<MaintenanceReport> {
        let mut report = MaintenanceReport::default();
        let all: Vec<NodeId> = (0..self.tree.len() as NodeId).collect();
        self.fold_sweep(all.clone(), &mut report)?;
        let active = self.active_nodes();
        self.unfold_sweep(active, &mut report);
        Ok(report)
    }

    /// Byte-stable text form of the whole index state.
    pub fn dump(&self) -> String {
        let mut out = String::from("odin-index v1\n");
        for node in self.tree.nodes() {
            let st = &self.nodes[node.id as usize];
            let _ = writeln!(
                out,
                "node {} {} {}",
                node.id,
                if st.active { "active" } else { "inactive" },
                if st.skeleton.is_some() { "materialized" } else { "bare" }
            );
            if let Some(sk) = &st.skeleton {
                sk.dump_into(&mut out);
            }
        }
        for (v, list) in self.objects.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let _ = write!(out, "objects {v}");
            for (id, d) in list {
                let _ = write!(out, " {id}:{d}");
            }
            out.push('\n');
        }
        out
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    fn touch(&mut self, node: NodeId) {
        let v = self.tick();
        self.nodes[node as usize].version = v;
    }

    fn reshape(&mut self, node: NodeId) {
        self.touch(node);
        let st = &mut self.nodes[node as usize];
        st.shape = st.version;
        st.added.clear();
        st.log_from = st.version;
    }

    fn log_added(&mut self, node: NodeId, v: VertexId) {
        let st = &mut self.nodes[node as usize];
        let cap = 64 + 2 * st.skeleton.as_ref().map_or(0, SkeletonGraph::live_count);
        if st.added.len() >= cap {
            st.added.clear();
            st.log_from = st.version;
        } else {
            st.added.push((st.version, v));
        }
    }

    fn live_count(&self, node: NodeId) -> usize {
        self.skeleton(node).map_or(0, SkeletonGraph::live_count)
    }

    fn leaf_skeleton(&self, leaf: NodeId) -> SkeletonGraph {
        let borders = self.tree.node(leaf).border.clone();
        let mat = self.leaf_table.leaf(leaf);
        let idx: Vec<usize> = borders.iter().map(|&b| mat.index_of(b).expect("border in leaf")).collect();
        let mut bb = Vec::with_capacity(borders.len() * borders.len());
        for &i in &idx {
            for &j in &idx {
                bb.push(mat.at(i, j));
            }
        }
        let mut sk = SkeletonGraph::new(borders, bb);
        for &v in self.tree.vertices(leaf) {
            if self.is_live(v) {
                let row = (!sk.is_border(v)).then(|| self.branch_row(leaf, v));
                sk.insert_live(v, row);
            }
        }
        sk
    }

    /// Distances from `v` to the borders of `node`, within `node`. Internal
    /// nodes use the skeleton of the child holding `v`, which must already
    /// contain `v`.
    fn branch_row(&self, node: NodeId, v: VertexId) -> Vec<Dist> {
        let borders = &self.tree.node(node).border;
        if self.tree.node(node).is_leaf() {
            let mat = self.leaf_table.leaf(node);
            let row = mat.row(v);
            return borders.iter().map(|&b| row[mat.index_of(b).unwrap()]).collect();
        }
        let child = self.tree.child_toward(node, v).expect("vertex outside node");
        let sk = self.skeleton(child).expect("child not materialized");
        let seeds: Vec<(VertexId, Dist)> = sk
            .borders()
            .iter()
            .copied()
            .zip(sk.to_borders(v).expect("vertex missing from child skeleton").iter().copied())
            .collect();
        let dist = self.child_network(node, &seeds, false, Some(borders));
        borders.iter().map(|b| dist.get(b).copied().unwrap_or(INF)).collect()
    }

    /// Dijkstra over the union of `node`'s children's skeletons and the
    /// external edges between them, from weighted seeds. Live vertices are
    /// reached (when `with_lives`) but never relaxed through.
    pub(crate) fn child_network(
        &self,
        node: NodeId,
        seeds: &[(VertexId, Dist)],
        with_lives: bool,
        targets: Option<&[VertexId]>,
    ) -> FxHashMap<VertexId, Dist> {
        // Distance and a settled flag per reached vertex.
        let mut dist: FxHashMap<VertexId, (Dist, bool)> = FxHashMap::default();
        let mut heap = BinaryHeap::new();
        for &(v, d) in seeds {
            if d == INF {
                continue;
            }
            let e = dist.entry(v).or_insert((INF, false));
            if d < e.0 {
                e.0 = d;
                heap.push(Reverse((d, v)));
            }
        }
        let mut remaining = targets.map(|t| t.iter().copied().collect::<FxHashSet<_>>());
        while let Some(Reverse((d, x))) = heap.pop() {
            let e = dist.get_mut(&x).unwrap();
            if d > e.0 || e.1 {
                continue;
            }
            e.1 = true;
            if let Some(r) = &mut remaining {
                r.remove(&x);
                if r.is_empty() {
                    break;
                }
            }
            let child = self.tree.child_toward(node, x).expect("vertex outside node");
            let sk = self.skeleton(child).expect("child not materialized");
            let Some(i) = sk.border_index(x) else { continue };
            let mut relax = |u: VertexId, w: Dist, heap: &mut BinaryHeap<_>| {
                if w == INF {
                    return;
                }
                let nd = d + w;
                let e = dist.entry(u).or_insert((INF, false));
                if nd < e.0 {
                    e.0 = nd;
                    heap.push(Reverse((nd, u)));
                }
            };
            for (j, &w) in sk.border_row(i).iter().enumerate() {
                if j != i {
                    relax(sk.borders()[j], w, &mut heap);
                }
            }
            if with_lives {
                for (l, row) in sk.live_rows() {
                    relax(l, row[i], &mut heap);
                }
            }
            for &(u, w) in &self.tree.node(child).external[i] {
                if self.tree.contains(node, u) {
                    relax(u, w as Dist, &mut heap);
                }
            }
        }
        dist.into_iter().map(|(v, (d, _))| (v, d)).collect()
    }

    /// Builds a skeleton for `node` from its children with MPBS.
    fn first_activation(&self, node: NodeId) -> Result<SkeletonGraph> {
        let tn = self.tree.node(node);
        let children: Vec<&SkeletonGraph> = tn
            .children
            .iter()
            .map(|&c| self.skeleton(c).expect("child not materialized"))
            .collect();
        let mut external = Vec::new();
        for &c in &tn.children {
            let cn = self.tree.node(c);
            for (i, &b) in cn.border.iter().enumerate() {
                for &(u, w) in &cn.external[i] {
                    if b < u && self.tree.contains(node, u) {
                        external.push((b, u, w as Dist));
                    }
                }
            }
        }
        let combined = combine_skeletons(&children, external)?;
        let borders = tn.border.clone();
        let lives: Vec<VertexId> = children.iter().flat_map(|s| s.lives().iter().copied()).collect();
        let pure: Vec<VertexId> = lives.iter().copied().filter(|&l| tn.border_index(l).is_none()).collect();
        let nb = borders.len();
        if nb == 0 {
            let mut sk = SkeletonGraph::new(borders, Vec::new());
            for l in lives {
                sk.insert_live(l, Some(Vec::new()));
            }
            return Ok(sk);
        }
        let schedule = if self.params.parallel {
            Schedule::Parallel
        } else {
            Schedule::Sequential
        };
        let (mat, _) = mpbs_with(
            &combined,
            &borders,
            &pure,
            MpbsOptions {
                schedule,
                record_events: false,
            },
        );
        let mut bb = Vec::with_capacity(nb * nb);
        for r in 0..nb {
            for c in 0..nb {
                bb.push(mat.at(r, c));
            }
        }
        let mut sk = SkeletonGraph::new(borders, bb);
        for (k, &l) in pure.iter().enumerate() {
            sk.insert_live(l, Some(mat.column(nb + k)));
        }
        for l in lives {
            if sk.is_border(l) {
                sk.insert_live(l, None);
            }
        }
        Ok(sk)
    }

    /// Brings a previously materialized skeleton's live set in line with its
    /// children. Border weights are static and kept.
    fn reconcile(&mut self, node: NodeId) {
        let want: BTreeSet<VertexId> = self
            .tree
            .node(node)
            .children
            .iter()
            .flat_map(|&c| self.skeleton(c).expect("child not materialized").lives().iter().copied())
            .collect();
        let have = self.skeleton(node).unwrap().lives().clone();
        let mut sk = self.nodes[node as usize].skeleton.take().unwrap();
        for v in have.difference(&want) {
            sk.remove_live(*v);
        }
        for &v in want.difference(&have) {
            let row = (!sk.is_border(v)).then(|| self.branch_row(node, v));
            sk.insert_live(v, row);
        }
        self.nodes[node as usize].skeleton = Some(sk);
    }

    fn can_fold(&self, p: NodeId) -> bool {
        let tn = self.tree.node(p);
        p != self.tree.root()
            && !tn.is_leaf()
            && !self.is_active(p)
            && tn.children.iter().all(|&c| self.is_active(c))
            && tn.children.iter().map(|&c| self.live_count(c)).sum::<usize>() < self.params.mu
    }

    fn can_unfold(&self, node: NodeId) -> bool {
        self.is_active(node)
            && !self.tree.node(node).is_leaf()
            && self.live_count(node) > self.tree.m() * self.params.mu
    }

    /// Deactivates `p`'s children and activates `p`, whose skeleton must be current.
    fn switch_to_parent(&mut self, p: NodeId) {
        let children = self.tree.node(p).children.clone();
        for c in children {
            self.nodes[c as usize].active = false;
            self.reshape(c);
        }
        self.nodes[p as usize].active = true;
        self.reshape(p);
        self.assign_leaves(p, p);
    }

    fn assign_leaves(&mut self, under: NodeId, to: NodeId) {
        let mut stack = vec![under];
        while let Some(n) = stack.pop() {
            let tn = self.tree.node(n);
            if tn.is_leaf() {
                self.active_of_leaf[n as usize] = to;
            } else {
                stack.extend(tn.children.iter().copied());
            }
        }
    }

    fn fold(&mut self, p: NodeId, report: &mut MaintenanceReport) -> Result<()> {
        if self.is_materialized(p) {
            self.reconcile(p);
        } else {
            let sk = self.first_activation(p)?;
            self.nodes[p as usize].skeleton = Some(sk);
            report.first_activations += 1;
        }
        self.switch_to_parent(p);
        report.folds += 1;
        Ok(())
    }

    fn unfold(&mut self, node: NodeId, report: &mut MaintenanceReport) {
        self.nodes[node as usize].active = false;
        self.reshape(node);
        let children = self.tree.node(node).children.clone();
        for c in children {
            debug_assert!(self.is_materialized(c));
            self.nodes[c as usize].active = true;
            self.reshape(c);
            self.assign_leaves(c, c);
        }
        report.unfolds += 1;
    }

    fn fold_sweep(&mut self, from: Vec<NodeId>, report: &mut MaintenanceReport) -> Result<()> {
        let mut queue: BTreeSet<(u32, NodeId)> = from.into_iter().map(|p| (self.tree.node(p).height, p)).collect();
        while let Some((_, p)) = queue.pop_first() {
            if self.can_fold(p) {
                self.fold(p, report)?;
                if let Some(pp) = self.tree.parent(p) {
                    queue.insert((self.tree.node(pp).height, pp));
                }
            }
        }
        Ok(())
    }

    fn unfold_sweep(&mut self, from: Vec<NodeId>, report: &mut MaintenanceReport) {
        let mut queue: BTreeSet<(u32, NodeId)> = from.into_iter().map(|n| (self.tree.node(n).level, n)).collect();
        while let Some((_, n)) = queue.pop_first() {
            if self.can_unfold(n) {
                self.unfold(n, report);
                for &c in &self.tree.node(n).children {
                    queue.insert((self.tree.node(c).level, c));
                }
            }
        }
    }

    /// Inserts `v` from its leaf up to its active node.
    fn attach_live(&mut self, v: VertexId) -> usize {
        let branch = self.tree.branch(self.tree.leaf_of(v), self.active_of(v));
        for &n in &branch {
            let border = self.tree.is_border(n, v);
            let row = (!border).then(|| self.branch_row(n, v));
            self.nodes[n as usize].skeleton.as_mut().expect("branch node not materialized").insert_live(v, row);
            self.touch(n);
            if !border {
                self.log_added(n, v);
            }
        }
        branch.len()
    }

    fn detach_live(&mut self, v: VertexId) -> usize {
        let branch = self.tree.branch(self.tree.leaf_of(v), self.active_of(v));
        for &n in &branch {
            self.nodes[n as usize].skeleton.as_mut().expect("branch node not materialized").remove_live(v);
            self.touch(n);
        }
        branch.len()
    }
}
