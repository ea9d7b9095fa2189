//! Random combined graphs and a plain per-source Dijkstra to check MPBS against.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use odin_core::{Dist, VertexId, INF};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId, Dist)>,
    pub borders: Vec<VertexId>,
    pub lives: Vec<VertexId>,
}

/// Sparse random graph over scattered ids, sometimes disconnected, with
/// duplicate edges and overlapping border and live lists.
pub fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.gen_range(2..=300);
    let mut vertices: Vec<VertexId> = (0..n as VertexId).map(|i| i * 7 + 3).collect();
    vertices.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        if rng.gen_bool(0.95) {
            let j = rng.gen_range(0..i);
            edges.push((vertices[i], vertices[j], rng.gen_range(1..50)));
        }
    }
    for _ in 0..rng.gen_range(0..n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((vertices[a], vertices[b], rng.gen_range(1..50)));
        }
    }
    let nb = rng.gen_range(1..=n.min(30));
    let nl = rng.gen_range(0..=n.min(40));
    let borders: Vec<VertexId> = vertices.choose_multiple(rng, nb).copied().collect();
    let lives: Vec<VertexId> = vertices.choose_multiple(rng, nl).copied().collect();
    Case {
        vertices,
        edges,
        borders,
        lives,
    }
}

/// Textbook Dijkstra over an edge list, one source at a time.
pub fn reference(case: &Case, source: VertexId) -> HashMap<VertexId, Dist> {
    let mut adj: HashMap<VertexId, Vec<(VertexId, Dist)>> = HashMap::new();
    for &(a, b, w) in &case.edges {
        adj.entry(a).or_default().push((b, w));
        adj.entry(b).or_default().push((a, w));
    }
    let mut dist = HashMap::from([(source, 0)]);
    let mut heap = BinaryHeap::from([Reverse((0, source))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[&v] < d {
            continue;
        }
        for &(u, w) in adj.get(&v).into_iter().flatten() {
            if d + w < *dist.get(&u).unwrap_or(&INF) {
                dist.insert(u, d + w);
                heap.push(Reverse((d + w, u)));
            }
        }
    }
    dist
}
