mod common;

use common::*;
use odin_core::index::{IndexParams, OdinIndex};
use odin_core::graph::dijkstra_in;
use odin_core::knn::{knn_init, view_distances, Query, QueryOverlay, QueryState};
use odin_core::oracle::{brute_sd, ine_knn};
use odin_core::partition::PartitionParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(clippy::too_many_arguments)]
fn run_rounds(n: usize, objects: usize, k: usize, m: usize, z: usize, mu: usize, movers: f64, seed: u64) {
    let g = fixture(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objs = random_objects(&g, objects, &mut rng);
    let mut index = OdinIndex::from_graph(g.clone(), &PartitionParams::new(m, z), objs, IndexParams::new(mu)).unwrap();
    let mut states: Vec<QueryState> = (0..8)
        .map(|_| QueryState::new(&index, Query { vertex: rng.gen_range(0..g.vertex_count() as u32), k }).unwrap())
        .collect();
    for round in 0..10 {
        if round > 0 {
            let moves = random_moves(&index, objects, movers, &mut rng);
            index.maintain(&moves).unwrap();
        }
        for st in &mut states {
            let q = st.query();
            let inc = st.step(&index);
            let fresh = knn_init(&index, q).unwrap();
            let oracle = ine_knn(&g, &index, q.vertex, k);
            assert_eq!(fresh.items, oracle.items, "init, round {round}, q {}", q.vertex);
            assert_eq!(inc.items, oracle.items, "inc, round {round}, q {}", q.vertex);
            assert_eq!(inc.partial, oracle.partial);
            assert_eq!(inc.counters.live_relaxations, 0);
            assert_eq!(fresh.counters.order_violations, 0);
            assert_eq!(inc.counters.order_violations, 0);
        }
    }
}

#[test]
fn matches_oracle_small() {
    run_rounds(200, 40, 10, 4, 20, 3, 0.25, 1);
}

#[test]
fn matches_oracle_all_movers() {
    run_rounds(300, 60, 5, 3, 16, 4, 1.0, 2);
}

#[test]
fn matches_oracle_sparse_and_large_k() {
    run_rounds(500, 20, 50, 2, 20, 6, 0.25, 3);
}

#[test]
fn static_rounds_settle_nothing_new() {
    let g = fixture(400, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let objs = random_objects(&g, 80, &mut rng);
    let index = OdinIndex::from_graph(g.clone(), &PartitionParams::new(4, 30), objs, IndexParams::new(5)).unwrap();
    for _ in 0..20 {
        let q = Query { vertex: rng.gen_range(0..400), k: 10 };
        let mut st = QueryState::new(&index, q).unwrap();
        let a = st.step(&index);
        let b = st.step(&index);
        assert_eq!(a.items, b.items);
        assert_eq!(b.counters.settled(), 0);
        assert!(!b.counters.overlay_rebuilt);
    }
}

#[test]
fn view_distances_equal_graph_distances() {
    for seed in 0..5 {
        let g = fixture(300, 20 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objs = random_objects(&g, 40, &mut rng);
        let index =
            OdinIndex::from_graph(g.clone(), &PartitionParams::new(3, 20), objs, IndexParams::new(3)).unwrap();
        let view = index.view();
        for _ in 0..10 {
            let q = rng.gen_range(0..300);
            let (dist, through_live) = view_distances(&index, q).unwrap();
            assert_eq!(through_live, 0);
            for t in 0..300u32 {
                if view.contains(t) || t == q {
                    assert_eq!(dist[t as usize], brute_sd(&g, q, t), "q {q} t {t}");
                }
            }
        }
    }
}

/// Every overlay edge weighs the distance inside the host, including edges to
/// lives that arrived after the overlay was built.
#[test]
fn overlay_weights_are_distances_inside_the_host() {
    for seed in 0..4 {
        let g = fixture(400, 40 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objects = 30;
        let objs = random_objects(&g, objects, &mut rng);
        let mut index =
            OdinIndex::from_graph(g.clone(), &PartitionParams::new(3, 20), objs, IndexParams::new(3)).unwrap();
        let qs: Vec<u32> = (0..30).map(|_| rng.gen_range(0..400)).collect();
        let mut overlays: Vec<QueryOverlay> = qs.iter().map(|&q| QueryOverlay::build(&index, q)).collect();
        let mut checked = 0;
        for _ in 0..6 {
            index.maintain(&random_moves(&index, objects, 0.3, &mut rng)).unwrap();
            for (o, &q) in overlays.iter_mut().zip(&qs) {
                if !o.is_current(&index, q) {
                    *o = QueryOverlay::build(&index, q);
                }
                let host = o.host();
                assert_eq!(host, index.active_of(q));
                let sk = index.skeleton(host).unwrap();
                if o.is_border() {
                    assert!(sk.is_border(q));
                    assert!(o.edges(&index).is_empty());
                    continue;
                }
                let truth = dijkstra_in(&g, q, |x| index.tree().contains(host, x), None, None);
                let mut expect: Vec<(u32, u64)> = sk
                    .vertices()
                    .filter(|&v| v != q)
                    .map(|v| (v, truth.get(v)))
                    .filter(|e| finite(e.1))
                    .collect();
                expect.sort_unstable();
                assert_eq!(o.edges(&index), expect, "q {q} host {host}");
                checked += expect.len();
            }
        }
        assert!(checked > 0);
    }
}
