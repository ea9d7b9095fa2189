//! Multi-source bidirectional search.
//!
//! One Dijkstra instance runs from every border and live vertex. Each vertex
//! keeps a registry of the instances that have settled it, so the second
//! instance to settle a vertex sees the first and records the joined path
//! length. A pair of instances `(i, j)` is final once
//! `D(i, j) <= BD(i) + BD(j)`, where `BD` is the smallest settled distance
//! among an instance's settled vertices that still have an unsettled neighbour.
//! Live sources only need distances to borders, so live-live pairs are never
//! tracked.

mod combined;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};

use parking_lot::Mutex;
use rayon::prelude::*;

pub use combined::{combine_skeletons, CombinedGraph};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Dist, VertexId, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Instances run concurrently on the rayon pool.
    #[default]
    Parallel,
    /// Instances advance round-robin, one settled vertex at a time.
    Sequential,
    /// One step of a randomly chosen instance at a time, from the given seed.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MpbsOptions {
    pub schedule: Schedule,
    /// Record every pair-settle event in [`MpbsStats::events`].
    pub record_events: bool,
}

/// Rows are border vertices; columns are borders followed by the live
/// vertices that are not borders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    rows: Vec<VertexId>,
    cols: Vec<VertexId>,
    data: Vec<Dist>,
}

impl DistanceMatrix {
    pub fn rows(&self) -> &[VertexId] {
        &self.rows
    }

    pub fn cols(&self) -> &[VertexId] {
        &self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Dist {
        self.data[r * self.cols.len() + c]
    }

    pub fn get(&self, row: VertexId, col: VertexId) -> Option<Dist> {
        let r = self.rows.iter().position(|&v| v == row)?;
        let c = self.cols.iter().position(|&v| v == col)?;
        Some(self.at(r, c))
    }

    /// The column of distances from every row vertex to `col`.
    pub fn column(&self, c: usize) -> Vec<Dist> {
        (0..self.rows.len()).map(|r| self.at(r, c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SettleEvent {
    pub source: VertexId,
    pub target: VertexId,
    /// Best joined distance at the moment the pair was declared final.
    pub dist: Dist,
    pub source_bound: Dist,
    pub target_bound: Dist,
}

#[derive(Debug, Clone, Default)]
pub struct MpbsStats {
    pub instances: usize,
    /// Vertices settled, summed over all instances.
    pub settled: usize,
    pub events: Vec<SettleEvent>,
}

pub fn mpbs(g: &CombinedGraph, borders: &[VertexId], lives: &[VertexId]) -> DistanceMatrix {
    mpbs_with(g, borders, lives, MpbsOptions::default()).0
}

pub fn mpbs_with(
    g: &CombinedGraph,
    borders: &[VertexId],
    lives: &[VertexId],
    opts: MpbsOptions,
) -> (DistanceMatrix, MpbsStats) {
    let mut rows: Vec<VertexId> = Vec::with_capacity(borders.len());
    let mut seen = HashSet::new();
    for &b in borders {
        if seen.insert(b) {
            rows.push(b);
        }
    }
    let mut cols = rows.clone();
    for &l in lives {
        if seen.insert(l) {
            cols.push(l);
        }
    }
    let shared = Shared::new(g, &cols, rows.len(), opts.record_events);
    let mut instances: Vec<Instance> = (0..cols.len()).map(|i| Instance::new(&shared, i)).collect();
    for inst in &mut instances {
        inst.start(&shared);
    }
    match opts.schedule {
        Schedule::Parallel => {
            instances.par_iter_mut().for_each(|inst| while inst.step(&shared) {});
        }
        Schedule::Sequential => {
            let mut live: Vec<usize> = (0..instances.len()).collect();
            while !live.is_empty() {
                live.retain(|&i| instances[i].step(&shared));
            }
        }
        Schedule::Shuffled(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut live: Vec<usize> = (0..instances.len()).collect();
            while !live.is_empty() {
                let j = rng.gen_range(0..live.len());
                if !instances[live[j]].step(&shared) {
                    live.swap_remove(j);
                }
            }
        }
    }

    let s = cols.len();
    let mut data = vec![INF; rows.len() * s];
    for r in 0..rows.len() {
        for c in 0..s {
            data[r * s + c] = shared.pair[r * s + c].load(Ordering::SeqCst);
        }
    }
    let stats = MpbsStats {
        instances: s,
        settled: shared.settled.load(Ordering::SeqCst),
        events: shared.events.into_inner(),
    };
    (DistanceMatrix { rows, cols, data }, stats)
}

struct Shared<'g> {
    g: &'g CombinedGraph,
    /// Local vertex of each instance's source.
    sources: Vec<u32>,
    /// Instances `0..borders` are border sources.
    borders: usize,
    /// Symmetric `s × s` best-known joined distances.
    pair: Vec<AtomicU64>,
    done: Vec<AtomicBool>,
    bound: Vec<AtomicU64>,
    registry: Vec<Mutex<Vec<(u32, Dist)>>>,
    settled: AtomicUsize,
    record: bool,
    events: Mutex<Vec<SettleEvent>>,
}

impl<'g> Shared<'g> {
    fn new(g: &'g CombinedGraph, cols: &[VertexId], borders: usize, record: bool) -> Self {
        let s = cols.len();
        Shared {
            g,
            sources: cols
                .iter()
                .map(|&v| g.local_id(v).expect("source vertex not in combined graph"))
                .collect(),
            borders,
            pair: (0..s * s).map(|_| AtomicU64::new(INF)).collect(),
            done: (0..s * s).map(|_| AtomicBool::new(false)).collect(),
            bound: (0..s).map(|_| AtomicU64::new(0)).collect(),
            registry: (0..g.vertex_count()).map(|_| Mutex::new(Vec::new())).collect(),
            settled: AtomicUsize::new(0),
            record,
            events: Mutex::new(Vec::new()),
        }
    }

    fn s(&self) -> usize {
        self.sources.len()
    }

    /// Whether the pair needs a distance (at least one side is a border).
    fn wanted(&self, i: usize, j: usize) -> bool {
        i != j && (i < self.borders || j < self.borders)
    }
}

struct Instance {
    id: usize,
    dist: Vec<Dist>,
    processed: Vec<bool>,
    /// Unprocessed-neighbour count of each processed vertex.
    open: Vec<u32>,
    queue: BinaryHeap<Reverse<(Dist, u32)>>,
    bound_heap: BinaryHeap<Reverse<(Dist, u32)>>,
    bound: Dist,
    /// Destinations not yet final, with a flag for "met at least once".
    unsettled: Vec<usize>,
}

impl Instance {
    fn new(shared: &Shared, id: usize) -> Self {
        let n = shared.g.vertex_count();
        Instance {
            id,
            dist: vec![INF; n],
            processed: vec![false; n],
            open: vec![0; n],
            queue: BinaryHeap::new(),
            bound_heap: BinaryHeap::new(),
            bound: 0,
            unsettled: (0..shared.s()).filter(|&j| shared.wanted(id, j)).collect(),
        }
    }

    /// Settles the source and registers it. Every instance is started before
    /// any instance steps, so each source registry is complete.
    fn start(&mut self, shared: &Shared) {
        let src = shared.sources[self.id];
        self.dist[src as usize] = 0;
        self.settle_vertex(shared, src, 0);
        let s = shared.s();
        shared.pair[self.id * s + self.id].store(0, Ordering::SeqCst);
    }

    /// Processes one vertex. Returns false when the instance has terminated.
    fn step(&mut self, shared: &Shared) -> bool {
        if self.unsettled.is_empty() {
            return false;
        }
        loop {
            match self.queue.pop() {
                Some(Reverse((d, v))) => {
                    if self.processed[v as usize] || d > self.dist[v as usize] {
                        continue;
                    }
                    self.settle_vertex(shared, v, d);
                    break;
                }
                None => {
                    // Exhausted: every remaining destination is unreachable or already known.
                    self.bound = INF;
                    shared.bound[self.id].store(INF, Ordering::SeqCst);
                    self.check(shared);
                    debug_assert!(self.unsettled.is_empty());
                    self.unsettled.clear();
                    return false;
                }
            }
        }
        self.check(shared);
        !self.unsettled.is_empty()
    }

    fn settle_vertex(&mut self, shared: &Shared, v: u32, d: Dist) {
        let g = shared.g;
        let s = shared.s();
        self.processed[v as usize] = true;
        shared.settled.fetch_add(1, Ordering::Relaxed);

        // Register and collect earlier visitors under one lock.
        let met: Vec<(u32, Dist)> = {
            let mut reg = shared.registry[v as usize].lock();
            let seen = reg.clone();
            reg.push((self.id as u32, d));
            seen
        };
        for (j, dj) in met {
            let j = j as usize;
            if !shared.wanted(self.id, j) {
                continue;
            }
            let len = d + dj;
            shared.pair[self.id * s + j].fetch_min(len, Ordering::SeqCst);
            shared.pair[j * s + self.id].fetch_min(len, Ordering::SeqCst);
        }

        // Bound-vertex bookkeeping, published after the pair updates above.
        let mut open = 0;
        for &(u, _) in g.adj(v) {
            if self.processed[u as usize] {
                self.open[u as usize] -= 1;
            } else {
                open += 1;
            }
        }
        self.open[v as usize] = open;
        if open > 0 {
            self.bound_heap.push(Reverse((d, v)));
        }
        while let Some(&Reverse((_, b))) = self.bound_heap.peek() {
            if self.open[b as usize] == 0 {
                self.bound_heap.pop();
            } else {
                break;
            }
        }
        self.bound = self.bound_heap.peek().map_or(INF, |Reverse((bd, _))| *bd);
        shared.bound[self.id].store(self.bound, Ordering::SeqCst);

        for &(u, w) in g.adj(v) {
            if self.processed[u as usize] {
                continue;
            }
            let nd = d + w;
            if nd < self.dist[u as usize] {
                self.dist[u as usize] = nd;
                self.queue.push(Reverse((nd, u)));
            }
        }
    }

    /// Declares final every destination whose pair satisfies the bound test.
    fn check(&mut self, shared: &Shared) {
        let s = shared.s();
        let i = self.id;
        let mut k = 0;
        while k < self.unsettled.len() {
            let j = self.unsettled[k];
            let idx = i.min(j) * s + i.max(j);
            if shared.done[idx].load(Ordering::SeqCst) {
                self.unsettled.swap_remove(k);
                continue;
            }
            let bj = shared.bound[j].load(Ordering::SeqCst);
            let dm = shared.pair[i * s + j].load(Ordering::SeqCst);
            if dm <= self.bound.saturating_add(bj) {
                if !shared.done[idx].swap(true, Ordering::SeqCst) && shared.record {
                    shared.events.lock().push(SettleEvent {
                        source: shared.g.vertex(shared.sources[i]),
                        target: shared.g.vertex(shared.sources[j]),
                        dist: dm,
                        source_bound: self.bound,
                        target_bound: bj,
                    });
                }
                self.unsettled.swap_remove(k);
                continue;
            }
            k += 1;
        }
    }
}
