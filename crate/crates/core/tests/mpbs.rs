mod common;

use common::combined::{random_case, reference, Case};
use odin_core::index::SkeletonGraph;
use odin_core::mpbs::{combine_skeletons, mpbs_with, CombinedGraph, DistanceMatrix, MpbsOptions, Schedule};
use odin_core::{Dist, VertexId, INF};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run(case: &Case, schedule: Schedule) -> (DistanceMatrix, odin_core::mpbs::MpbsStats) {
    let g = CombinedGraph::from_edges(case.vertices.iter().copied(), case.edges.iter().copied()).unwrap();
    mpbs_with(&g, &case.borders, &case.lives, MpbsOptions { schedule, record_events: true })
}

#[test]
fn random_graphs_match_per_source_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let case = random_case(&mut rng);
        let (m, stats) = run(&case, Schedule::Parallel);
        let mut naive = 0;
        for &col in m.cols() {
            naive += reference(&case, col).len();
        }
        for (r, &row) in m.rows().iter().enumerate() {
            let truth = reference(&case, row);
            for (c, &col) in m.cols().iter().enumerate() {
                assert_eq!(m.at(r, c), *truth.get(&col).unwrap_or(&INF), "pair ({row}, {col})");
            }
        }
        assert!(stats.settled <= naive, "settled {} > naive {naive}", stats.settled);
    }
}

#[test]
fn every_settle_event_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let case = random_case(&mut rng);
        let (_, stats) = run(&case, Schedule::Sequential);
        for e in &stats.events {
            assert!(e.dist <= e.source_bound.saturating_add(e.target_bound), "{e:?}");
            assert_eq!(e.dist, *reference(&case, e.source).get(&e.target).unwrap_or(&INF), "{e:?}");
        }
    }
}

#[test]
fn schedules_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let case = random_case(&mut rng);
        let (seq, _) = run(&case, Schedule::Sequential);
        let (par, _) = run(&case, Schedule::Parallel);
        assert_eq!(seq, par);
        for seed in 0..3 {
            assert_eq!(run(&case, Schedule::Shuffled(seed)).0, seq);
        }
    }
}

fn pair_skeleton(a: VertexId, b: VertexId, w: Dist) -> SkeletonGraph {
    SkeletonGraph::new(vec![a, b], vec![0, w, w, 0])
}

#[test]
fn one_child_combines_to_itself() {
    let sk = pair_skeleton(1, 4, 9);
    let g = combine_skeletons(&[&sk], []).unwrap();
    assert_eq!(g.vertex_count(), 2);
    assert_eq!(g.edges(), vec![(1, 4, 9)]);
}

#[test]
fn two_children_join_through_one_external_edge() {
    let a = pair_skeleton(1, 2, 5);
    let b = pair_skeleton(3, 4, 6);
    let g = combine_skeletons(&[&a, &b], [(2, 3, 1)]).unwrap();
    assert_eq!(g.vertex_count(), 4);
    assert_eq!(g.edges(), vec![(1, 2, 5), (2, 3, 1), (3, 4, 6)]);
    assert!(combine_skeletons(&[&a, &b], [(1, 2, 1)]).is_err());
    assert!(combine_skeletons(&[&a, &b], [(1, 9, 1)]).is_err());
}
