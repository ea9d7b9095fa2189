#![allow(dead_code)]

pub mod combined;

use std::sync::Arc;

use odin_core::graph::synthetic::{generate, SyntheticSpec};
use odin_core::graph::{dijkstra_in, RoadGraph};
use odin_core::index::{ObjectId, ObjectMove, OdinIndex, Placement};
use odin_core::{Dist, INF};
use rand::Rng;

pub fn fixture(n: usize, seed: u64) -> Arc<RoadGraph> {
    Arc::new(generate(&SyntheticSpec::new(n, seed)))
}

pub fn random_objects(g: &RoadGraph, count: usize, rng: &mut impl Rng) -> Vec<(ObjectId, Placement)> {
    (0..count as ObjectId)
        .map(|id| {
            let vertex = rng.gen_range(0..g.vertex_count() as u32);
            (id, Placement { vertex, delta: rng.gen_range(0..60) })
        })
        .collect()
}

/// Moves a random `fraction` of the objects to fresh random placements.
pub fn random_moves(index: &OdinIndex, count: usize, fraction: f64, rng: &mut impl Rng) -> Vec<ObjectMove> {
    let n = index.graph().vertex_count() as u32;
    let mut out = Vec::new();
    for id in 0..count as ObjectId {
        if rng.gen_bool(fraction) {
            let from = index.placement(id);
            let to = Some(Placement { vertex: rng.gen_range(0..n), delta: rng.gen_range(0..60) });
            out.push(ObjectMove { object: id, from, to });
        }
    }
    out
}

/// Checks every materialized skeleton weight against Dijkstra restricted to
/// the node's induced subgraph. Returns the number of edges compared.
pub fn check_skeleton_weights(index: &OdinIndex) -> usize {
    let g = index.graph();
    let tree = index.tree();
    let mut checked = 0;
    for node in tree.nodes() {
        let Some(sk) = index.skeleton(node.id) else { continue };
        for (i, &b) in sk.borders().iter().enumerate() {
            let d = dijkstra_in(g, b, |x| tree.contains(node.id, x), None, None);
            for (j, &c) in sk.borders().iter().enumerate() {
                assert_eq!(sk.border_dist(i, j), d.get(c), "node {} border pair ({b}, {c})", node.id);
                checked += 1;
            }
            for (l, row) in sk.live_rows() {
                assert_eq!(row[i], d.get(l), "node {} border {b} live {l}", node.id);
                checked += 1;
            }
        }
    }
    checked
}

pub fn finite(d: Dist) -> bool {
    d != INF
}
