//! Continuous kNN over the active skeletons.
//!
//! A query's first round runs Dijkstra from the query vertex over the global
//! skeleton view. Border vertices relax their skeleton and external edges;
//! live vertices only score their objects. Later rounds keep every vertex
//! whose cached distance is still meaningful, relax new live vertices from the
//! processed borders of their node, and resume the expansion. The frontier
//! left by the previous round is kept: its entries are lengths of real paths,
//! so they never undercut a true distance. Only borders whose node folded,
//! unfolded or was re-activated since they were last expanded are expanded
//! again.

mod heap;
mod overlay;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rustc_hash::{FxHashMap, FxHashSet};

pub use heap::KnnHeap;
pub use overlay::QueryOverlay;

use crate::graph::{Dist, VertexId, INF};
use crate::index::{GlobalSkeletonView, ObjectId, OdinIndex};
use crate::partition::NodeId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Query {
    pub vertex: VertexId,
    pub k: usize,
}

/// When the expansion may stop once the heap holds k objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    /// Stop once the k-th distance is below the next queue distance. Exact
    /// under the (distance, id) tie order.
    #[default]
    Strict,
    /// Stop once the k-th distance is at most the next queue distance. May
    /// miss an equally distant object with a smaller id.
    Inclusive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KnnCounters {
    /// Border vertices (including live borders) settled this round.
    pub borders: usize,
    /// Pure live vertices settled this round, including ones scored directly.
    pub lives: usize,
    /// The query vertex, when it is neither live nor a border.
    pub other: usize,
    /// Pushes and pops on the queue and the result heap.
    pub heap_ops: usize,
    /// Processed vertices re-expanded from a previous round.
    pub resumed: usize,
    /// Relaxations out of a pure live vertex. Always zero.
    pub live_relaxations: usize,
    /// Pops that came out below an earlier pop.
    pub order_violations: usize,
    pub overlay_rebuilt: bool,
}

impl KnnCounters {
    pub fn settled(&self) -> usize {
        self.borders + self.lives + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnResult {
    /// Ascending by (distance, object id).
    pub items: Vec<(ObjectId, Dist)>,
    /// Fewer than k objects were reachable.
    pub partial: bool,
    pub counters: KnnCounters,
}

/// Everything a query carries from one round to the next.
#[derive(Debug, Clone)]
pub struct QueryState {
    query: Query,
    termination: Termination,
    /// Distance to the query; final once the flag is set, otherwise the best
    /// queued distance of a frontier vertex.
    marks: FxHashMap<VertexId, (Dist, bool)>,
    processed: Vec<VertexId>,
    /// Frontier carried between rounds.
    queue: BinaryHeap<Reverse<(Dist, VertexId)>>,
    /// Active node and its shape version when a border was last expanded.
    stamps: FxHashMap<VertexId, (NodeId, u64)>,
    overlay: Option<QueryOverlay>,
    candidates: Vec<NodeId>,
    /// Version of each candidate node when its lives were last accounted for.
    scanned: FxHashMap<NodeId, u64>,
    round: u64,
}

impl QueryState {
    pub fn new(index: &OdinIndex, query: Query) -> Result<Self> {
        let n = index.graph().vertex_count();
        if query.vertex as usize >= n {
            return Err(Error::InvalidArgument(format!("query vertex {} out of range", query.vertex)));
        }
        Ok(QueryState {
            query,
            termination: Termination::Strict,
            marks: FxHashMap::default(),
            processed: Vec::new(),
            queue: BinaryHeap::new(),
            stamps: FxHashMap::default(),
            overlay: None,
            candidates: Vec::new(),
            scanned: FxHashMap::default(),
            round: 0,
        })
    }

    pub fn with_termination(mut self, t: Termination) -> Self {
        self.termination = t;
        self
    }

    pub fn query(&self) -> Query {
        self.query
    }

    /// Rounds answered so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Processed vertices with their cached distances, in processing order.
    pub fn processed(&self) -> impl Iterator<Item = (VertexId, Dist)> + '_ {
        self.processed.iter().map(|&v| (v, self.marks[&v].0))
    }

    /// Active nodes holding processed vertices after the last round.
    pub fn candidate_nodes(&self) -> &[NodeId] {
        &self.candidates
    }

    pub fn overlay(&self) -> Option<&QueryOverlay> {
        self.overlay.as_ref()
    }

    /// Incremental round if there is a previous one, initial otherwise.
    pub fn step(&mut self, index: &OdinIndex) -> KnnResult {
        if self.round == 0 {
            self.init(index)
        } else {
            self.inc(index)
        }
    }

    /// Answers from scratch, discarding cached state.
    pub fn init(&mut self, index: &OdinIndex) -> KnnResult {
        self.marks.clear();
        self.processed.clear();
        self.queue.clear();
        self.stamps.clear();
        let mut counters = KnnCounters::default();
        self.refresh_overlay(index, &mut counters);
        let mut search = Search::new(self, index, counters);
        search.offer(self.query.vertex, 0);
        let (heap, counters) = search.run(self);
        self.finish(index, heap, counters)
    }

    /// Answers the current snapshot reusing the previous round's distances.
    pub fn inc(&mut self, index: &OdinIndex) -> KnnResult {
        let q = self.query.vertex;
        let view = index.view();
        let mut counters = KnnCounters::default();
        self.refresh_overlay(index, &mut counters);

        // Keep processed vertices that are still in the skeleton view.
        let (marks, stamps) = (&mut self.marks, &mut self.stamps);
        self.processed.retain(|&v| {
            let keep = v == q || view.is_live(v) || view.is_border(v);
            if !keep {
                marks.remove(&v);
                stamps.remove(&v);
            }
            keep
        });
        let candidates: BTreeSet<NodeId> = self.processed.iter().map(|&v| index.active_of(v)).collect();

        // Lives come and go without touching border adjacency, so each live of a
        // candidate node is relaxed from the processed borders here. Behind fully
        // processed borders that distance is final.
        let overlay = self.overlay.as_ref().unwrap();
        let mut pending = Vec::new();
        let mut fresh = Vec::new();
        for &a in &candidates {
            let sk = index.skeleton(a).expect("active node not materialized");
            fresh.clear();
            match self.scanned.get(&a) {
                Some(&t) if t == index.version(a) => continue,
                Some(&t) => match index.lives_added_since(a, t) {
                    Some(added) => fresh.extend(added.filter_map(|l| sk.live_row(l).map(|r| (l, r)))),
                    None => fresh.extend(sk.live_rows()),
                },
                None => fresh.extend(sk.live_rows()),
            }
            fresh.retain(|&(l, _)| !self.is_fixed(l));
            if fresh.is_empty() {
                continue;
            }
            let closed = sk.borders().iter().all(|&b| self.is_fixed(b));
            for &(l, row) in &fresh {
                if self.is_fixed(l) {
                    continue;
                }
                let mut d = sk
                    .borders()
                    .iter()
                    .zip(row)
                    .filter(|&(_, &w)| w != INF)
                    .filter_map(|(b, &w)| self.marks.get(b).filter(|m| m.1).map(|m| m.0 + w))
                    .min()
                    .unwrap_or(INF);
                if a == overlay.host() {
                    if let Some(w) = overlay.weight_to(index, l) {
                        d = d.min(w);
                    }
                }
                if d == INF {
                    continue;
                }
                if closed {
                    self.marks.insert(l, (d, true));
                    self.processed.push(l);
                    counters.lives += 1;
                } else {
                    let t = self.marks.entry(l).or_insert((INF, false));
                    if d < t.0 {
                        t.0 = d;
                        pending.push((d, l));
                    }
                }
            }
        }

        // Borders whose node changed shape since their last expansion are the
        // unaccomplished ones; everything else already fed the kept frontier.
        let mut seeds = Vec::new();
        for &v in &self.processed {
            let changed = if v == q && !overlay.is_border() {
                counters.overlay_rebuilt
            } else if view.is_border(v) {
                let a = index.active_of(v);
                self.stamps.get(&v) != Some(&(a, index.shape_version(a)))
            } else {
                false
            };
            if changed {
                seeds.push(v);
            }
        }

        let mut search = Search::new(self, index, counters);
        for &v in &self.processed {
            if view.is_live(v) {
                search.score(v, self.marks[&v].0);
            }
        }
        for v in seeds {
            search.reexpand.insert(v);
            search.queue.push(Reverse((self.marks[&v].0, v)));
            search.counters.heap_ops += 1;
        }
        for (d, l) in pending {
            search.queue.push(Reverse((d, l)));
            search.counters.heap_ops += 1;
        }
        let (heap, counters) = search.run(self);
        self.finish(index, heap, counters)
    }

    fn is_fixed(&self, v: VertexId) -> bool {
        self.marks.get(&v).is_some_and(|m| m.1)
    }

    fn refresh_overlay(&mut self, index: &OdinIndex, counters: &mut KnnCounters) {
        let q = self.query.vertex;
        if !self.overlay.as_ref().is_some_and(|o| o.is_current(index, q)) {
            self.overlay = Some(QueryOverlay::build(index, q));
            counters.overlay_rebuilt = true;
        }
    }

    fn finish(&mut self, index: &OdinIndex, heap: KnnHeap, counters: KnnCounters) -> KnnResult {
        let mut nodes: Vec<NodeId> = self.processed.iter().map(|&v| index.active_of(v)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        self.scanned.clear();
        self.scanned.extend(nodes.iter().map(|&a| (a, index.version(a))));
        self.candidates = nodes;
        self.round += 1;
        let items = heap.into_sorted();
        KnnResult {
            partial: items.len() < self.query.k,
            items,
            counters,
        }
    }
}

/// One-shot initial answer.
pub fn knn_init(index: &OdinIndex, query: Query) -> Result<KnnResult> {
    Ok(QueryState::new(index, query)?.init(index))
}

/// Distances from `q` to every vertex of the skeleton view (plus `q`), by an
/// unbounded expansion over the view and the query overlay. Other vertices
/// stay `INF`. Also returns the number of relaxations out of pure live vertices.
pub fn view_distances(index: &OdinIndex, q: VertexId) -> Result<(Vec<Dist>, usize)> {
    let mut state = QueryState::new(index, Query { vertex: q, k: usize::MAX })?;
    let r = state.init(index);
    let mut dist = vec![INF; index.graph().vertex_count()];
    for (v, (d, fixed)) in state.marks {
        if fixed {
            dist[v as usize] = d;
        }
    }
    Ok((dist, r.counters.live_relaxations))
}

struct Search<'a> {
    index: &'a OdinIndex,
    view: GlobalSkeletonView<'a>,
    q: VertexId,
    heap: KnnHeap,
    queue: BinaryHeap<Reverse<(Dist, VertexId)>>,
    /// Processed vertices queued for another expansion.
    reexpand: FxHashSet<VertexId>,
    counters: KnnCounters,
    termination: Termination,
    last: Dist,
}

impl<'a> Search<'a> {
    fn new(state: &mut QueryState, index: &'a OdinIndex, counters: KnnCounters) -> Self {
        Search {
            index,
            view: index.view(),
            q: state.query.vertex,
            heap: KnnHeap::new(state.query.k),
            queue: std::mem::take(&mut state.queue),
            reexpand: FxHashSet::default(),
            counters,
            termination: state.termination,
            last: 0,
        }
    }

    /// Queues the query vertex itself.
    fn offer(&mut self, v: VertexId, d: Dist) {
        self.queue.push(Reverse((d, v)));
        self.counters.heap_ops += 1;
    }

    fn score(&mut self, v: VertexId, d: Dist) {
        for &(id, delta) in self.index.objects_at(v) {
            self.counters.heap_ops += usize::from(self.heap.offer(id, d + delta));
        }
    }

    fn done(&self, head: Dist) -> bool {
        let Some(top) = self.heap.top_distance() else {
            return self.heap.capacity() == 0;
        };
        if !self.heap.is_full() {
            return false;
        }
        match self.termination {
            Termination::Strict => top < head,
            Termination::Inclusive => top <= head,
        }
    }

    fn run(mut self, state: &mut QueryState) -> (KnnHeap, KnnCounters) {
        while let Some(&Reverse((d, v))) = self.queue.peek() {
            let mark = state.marks.get(&v).copied();
            let processed = mark.is_some_and(|m| m.1);
            // Drop entries that cannot be settled before testing termination.
            let drop = if processed {
                mark != Some((d, true)) || !self.reexpand.contains(&v)
            } else if !(v == self.q || self.view.contains(v)) {
                // Left the view; it must be queued afresh if it comes back.
                state.marks.remove(&v);
                true
            } else {
                mark.is_some_and(|(t, _)| d > t)
            };
            if drop {
                self.queue.pop();
                continue;
            }
            if self.done(d) {
                break;
            }
            self.queue.pop();
            self.counters.heap_ops += 1;
            if processed {
                // A vertex from an earlier round whose edges changed.
                self.reexpand.remove(&v);
                self.counters.resumed += 1;
            } else {
                state.marks.insert(v, (d, true));
                state.processed.push(v);
                if self.view.is_border(v) {
                    self.counters.borders += 1;
                } else if self.view.is_live(v) {
                    self.counters.lives += 1;
                } else {
                    self.counters.other += 1;
                }
                self.score(v, d);
            }
            if d < self.last {
                self.counters.order_violations += 1;
            }
            self.last = d;
            self.expand(state, v, d);
        }
        debug_assert!(
            self.queue.is_empty() || self.done(self.queue.peek().unwrap().0 .0) || self.heap.capacity() == 0,
            "early exit without the termination condition"
        );
        state.queue = self.queue;
        (self.heap, self.counters)
    }

    fn expand(&mut self, state: &mut QueryState, v: VertexId, d: Dist) {
        let q = self.q;
        let mut relax = |u: VertexId, w: Dist, queue: &mut BinaryHeap<Reverse<(Dist, VertexId)>>, ops: &mut usize| {
            let nd = d + w;
            let t = state.marks.entry(u).or_insert((INF, false));
            if !t.1 && nd < t.0 {
                t.0 = nd;
                queue.push(Reverse((nd, u)));
                *ops += 1;
            }
        };
        let overlay = state.overlay.as_ref().unwrap();
        if v == q && !overlay.is_border() {
            state.stamps.remove(&v);
            let (queue, ops) = (&mut self.queue, &mut self.counters.heap_ops);
            overlay.for_each_edge(self.index, |u, w| relax(u, w, queue, ops));
            return;
        }
        let queue = &mut self.queue;
        let ops = &mut self.counters.heap_ops;
        let view = self.view;
        let pure_live = !view.is_border(v);
        if !pure_live {
            let a = self.index.active_of(v);
            state.stamps.insert(v, (a, self.index.shape_version(a)));
        }
        let mut through_live = 0;
        view.for_each_neighbor(v, |u, w| {
            through_live += usize::from(pure_live);
            relax(u, w, queue, ops);
        });
        self.counters.live_relaxations += through_live;
    }
}
