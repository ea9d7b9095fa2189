use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Dist, RoadGraph, VertexId, INF};

/// Settled distances from one source. Vertices that were never settled
/// (unreachable, beyond the radius, or skipped by early termination) read as
/// [`INF`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    dist: Vec<Dist>,
    settled: usize,
}

impl DistanceMap {
    #[inline]
    pub fn get(&self, v: VertexId) -> Dist {
        self.dist[v as usize]
    }

    pub fn settled_count(&self) -> usize {
        self.settled
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Dist)> + '_ {
        self.dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != INF)
            .map(|(v, &d)| (v as VertexId, d))
    }

    pub fn as_slice(&self) -> &[Dist] {
        &self.dist
    }
}

/// Single-source Dijkstra over the whole graph.
///
/// With `targets`, the search stops as soon as every reachable target is
/// settled. With `radius`, no vertex farther than `radius` is settled.
pub fn dijkstra(
    graph: &RoadGraph,
    source: VertexId,
    targets: Option<&[VertexId]>,
    radius: Option<Dist>,
) -> DistanceMap {
    dijkstra_in(graph, source, |_| true, targets, radius)
}

/// Dijkstra restricted to the subgraph induced by `inside`. The source must
/// satisfy the predicate.
pub fn dijkstra_in(
    graph: &RoadGraph,
    source: VertexId,
    inside: impl Fn(VertexId) -> bool,
    targets: Option<&[VertexId]>,
    radius: Option<Dist>,
) -> DistanceMap {
    let n = graph.vertex_count();
    let mut dist = vec![INF; n];
    let mut tentative = vec![INF; n];
    let mut is_target = targets.map(|t| {
        let mut mark = vec![false; n];
        for &v in t {
            mark[v as usize] = true;
        }
        mark
    });
    let mut targets_left = match (&is_target, targets) {
        (Some(mark), Some(_)) => mark.iter().filter(|&&b| b).count(),
        _ => usize::MAX,
    };
    let limit = radius.unwrap_or(INF);
    let mut settled = 0;

    let mut queue = BinaryHeap::new();
    tentative[source as usize] = 0;
    queue.push(Reverse((0, source)));

    while let Some(Reverse((d, v))) = queue.pop() {
        if dist[v as usize] != INF || d > tentative[v as usize] {
            continue;
        }
        if d > limit {
            break;
        }
        dist[v as usize] = d;
        settled += 1;
        if let Some(mark) = is_target.as_mut() {
            if std::mem::take(&mut mark[v as usize]) {
                targets_left -= 1;
                if targets_left == 0 {
                    break;
                }
            }
        }
        for (u, w) in graph.neighbors(v) {
            if dist[u as usize] != INF || !inside(u) {
                continue;
            }
            let nd = d + w as Dist;
            if nd < tentative[u as usize] {
                tentative[u as usize] = nd;
                queue.push(Reverse((nd, u)));
            }
        }
    }
    DistanceMap { dist, settled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bellman_ford(g: &RoadGraph, s: VertexId) -> Vec<Dist> {
        let mut d = vec![INF; g.vertex_count()];
        d[s as usize] = 0;
        loop {
            let mut changed = false;
            for (u, v, w) in g.edges() {
                for (a, b) in [(u, v), (v, u)] {
                    if d[a as usize] != INF && d[a as usize] + (w as Dist) < d[b as usize] {
                        d[b as usize] = d[a as usize] + w as Dist;
                        changed = true;
                    }
                }
            }
            if !changed {
                return d;
            }
        }
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> RoadGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<_> = (0..m)
            .map(|_| {
                (
                    rng.gen_range(0..n as u32),
                    rng.gen_range(0..n as u32),
                    rng.gen_range(1..=100),
                )
            })
            .collect();
        RoadGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn path_graph() {
        let g = RoadGraph::from_edges(3, [(0, 1, 1), (1, 2, 2)]).unwrap();
        let d = dijkstra(&g, 0, None, None);
        assert_eq!(d.as_slice(), &[0, 1, 3]);
    }

    #[test]
    fn unreachable_is_inf() {
        let g = RoadGraph::from_edges(4, [(0, 1, 1), (2, 3, 1)]).unwrap();
        let d = dijkstra(&g, 0, Some(&[3]), None);
        assert_eq!(d.get(3), INF);
        assert_eq!(d.get(1), 1);
    }

    #[test]
    fn targets_stop_early() {
        let g = RoadGraph::from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let d = dijkstra(&g, 0, Some(&[1]), None);
        assert_eq!(d.get(1), 1);
        assert_eq!(d.get(3), INF);
        assert_eq!(d.settled_count(), 2);
    }

    #[test]
    fn matches_bellman_ford_on_random_graph() {
        let g = random_graph(200, 500, 7);
        for s in [0, 17, 199] {
            let d = dijkstra(&g, s, None, None);
            assert_eq!(d.as_slice(), bellman_ford(&g, s).as_slice());
        }
    }

    proptest! {
        #[test]
        fn triangle_symmetry_and_truncation(seed in 0u64..500, r in 0u64..300) {
            let g = random_graph(40, 90, seed);
            let all: Vec<Vec<Dist>> = (0..40).map(|s| dijkstra(&g, s, None, None).as_slice().to_vec()).collect();
            for a in 0..40 {
                for b in 0..40 {
                    prop_assert_eq!(all[a][b], all[b][a]);
                    for c in (0..40).step_by(7) {
                        let via = add_dist_test(all[a][b], all[b][c]);
                        prop_assert!(all[a][c] <= via);
                    }
                }
            }
            let cut = dijkstra(&g, 0, None, Some(r));
            for v in 0..40u32 {
                if all[0][v as usize] <= r {
                    prop_assert_eq!(cut.get(v), all[0][v as usize]);
                } else {
                    prop_assert_eq!(cut.get(v), INF);
                }
            }
        }
    }

    fn add_dist_test(a: Dist, b: Dist) -> Dist {
        a.saturating_add(b)
    }
}
