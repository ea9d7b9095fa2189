//! Ground truth. Incremental network expansion runs plain Dijkstra over the
//! raw graph; nothing here touches the index or the kNN engine.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::{dijkstra, Dist, RoadGraph, VertexId, INF};
use crate::index::{ObjectId, OdinIndex};

/// Anything that can list the objects heading to a vertex.
pub trait ObjectSource {
    fn objects_at(&self, v: VertexId) -> &[(ObjectId, Dist)];
}

impl ObjectSource for [Vec<(ObjectId, Dist)>] {
    fn objects_at(&self, v: VertexId) -> &[(ObjectId, Dist)] {
        &self[v as usize]
    }
}

impl ObjectSource for Vec<Vec<(ObjectId, Dist)>> {
    fn objects_at(&self, v: VertexId) -> &[(ObjectId, Dist)] {
        &self[v as usize]
    }
}

impl ObjectSource for OdinIndex {
    fn objects_at(&self, v: VertexId) -> &[(ObjectId, Dist)] {
        OdinIndex::objects_at(self, v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Ascending by (distance, object id).
    pub items: Vec<(ObjectId, Dist)>,
    pub settled: usize,
    /// Fewer than k objects were reachable.
    pub partial: bool,
}

/// Exact k nearest objects to `q`, where an object's distance is the
/// distance to its live vertex plus its residual offset.
pub fn ine_knn<S: ObjectSource + ?Sized>(graph: &RoadGraph, objects: &S, q: VertexId, k: usize) -> OracleResult {
    let n = graph.vertex_count();
    let mut dist = vec![INF; n];
    let mut done = vec![false; n];
    let mut queue = BinaryHeap::new();
    // Max-heap on (distance, id) keeps the current k best.
    let mut best: BinaryHeap<(Dist, ObjectId)> = BinaryHeap::new();
    let mut settled = 0;
    dist[q as usize] = 0;
    queue.push(Reverse((0, q)));
    while let Some(Reverse((d, v))) = queue.pop() {
        if done[v as usize] {
            continue;
        }
        if k == 0 || (best.len() == k && best.peek().unwrap().0 < d) {
            break;
        }
        done[v as usize] = true;
        settled += 1;
        for &(id, delta) in objects.objects_at(v) {
            let key = (d + delta, id);
            if best.len() < k {
                best.push(key);
            } else if key < *best.peek().unwrap() {
                best.pop();
                best.push(key);
            }
        }
        for (u, w) in graph.neighbors(v) {
            let nd = d + w as Dist;
            if nd < dist[u as usize] {
                dist[u as usize] = nd;
                queue.push(Reverse((nd, u)));
            }
        }
    }
    let mut items: Vec<(ObjectId, Dist)> = best.into_iter().map(|(d, id)| (id, d)).collect();
    items.sort_unstable_by_key(|&(id, d)| (d, id));
    OracleResult {
        partial: items.len() < k,
        items,
        settled,
    }
}

/// Scores every object from one full Dijkstra and sorts. Used to validate
/// [`ine_knn`].
pub fn exhaustive_knn<S: ObjectSource + ?Sized>(graph: &RoadGraph, objects: &S, q: VertexId, k: usize) -> Vec<(ObjectId, Dist)> {
    let d = dijkstra(graph, q, None, None);
    let mut all = Vec::new();
    for v in 0..graph.vertex_count() as VertexId {
        let dv = d.get(v);
        if dv == INF {
            continue;
        }
        for &(id, delta) in objects.objects_at(v) {
            all.push((id, dv + delta));
        }
    }
    all.sort_unstable_by_key(|&(id, d)| (d, id));
    all.truncate(k);
    all
}

/// Exact shortest distance in the whole graph.
pub fn brute_sd(graph: &RoadGraph, a: VertexId, b: VertexId) -> Dist {
    dijkstra(graph, a, Some(&[b]), None).get(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::{generate, SyntheticSpec};
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_object_on_query_vertex() {
        let g = RoadGraph::from_edges(2, [(0, 1, 4)]).unwrap();
        let objs = vec![vec![(7, 0)], vec![]];
        let r = ine_knn(&g, &objs, 0, 1);
        assert_eq!(r.items, vec![(7, 0)]);
        assert!(!r.partial);
    }

    #[test]
    fn ties_rank_lower_id_first() {
        let g = RoadGraph::from_edges(3, [(0, 1, 2), (0, 2, 2)]).unwrap();
        let objs = vec![vec![], vec![(9, 1)], vec![(4, 1)]];
        assert_eq!(ine_knn(&g, &objs, 0, 1).items, vec![(4, 3)]);
        assert_eq!(ine_knn(&g, &objs, 0, 2).items, vec![(4, 3), (9, 3)]);
    }

    #[test]
    fn partial_when_too_few_reachable() {
        let g = RoadGraph::from_edges(3, [(0, 1, 2)]).unwrap();
        let objs = vec![vec![], vec![(1, 0)], vec![(2, 0)]];
        let r = ine_knn(&g, &objs, 0, 2);
        assert_eq!(r.items, vec![(1, 2)]);
        assert!(r.partial);
    }

    #[test]
    fn brute_sd_basics() {
        let g = RoadGraph::from_edges(4, [(0, 1, 2), (1, 2, 3)]).unwrap();
        assert_eq!(brute_sd(&g, 2, 2), 0);
        assert_eq!(brute_sd(&g, 0, 2), 5);
        assert_eq!(brute_sd(&g, 0, 3), INF);
    }

    #[test]
    fn ine_matches_exhaustive_sort() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20 {
            let n = rng.gen_range(20..200);
            let g = generate(&SyntheticSpec::new(n, seed));
            let mut objs = vec![Vec::new(); g.vertex_count()];
            // Few distinct offsets so ties are common.
            for id in 0..rng.gen_range(1..80) {
                let v = rng.gen_range(0..g.vertex_count());
                objs[v].push((id, rng.gen_range(0..3) * 10));
            }
            for list in &mut objs {
                list.sort_unstable();
            }
            for _ in 0..10 {
                let q = rng.gen_range(0..g.vertex_count() as u32);
                let k = rng.gen_range(1..20);
                assert_eq!(ine_knn(&g, &objs, q, k).items, exhaustive_knn(&g, &objs, q, k));
            }
        }
    }
}
