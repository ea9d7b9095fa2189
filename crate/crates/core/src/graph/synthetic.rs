//! Random road-like graphs: a jittered grid with a random subset of grid
//! edges kept, some diagonals added, and connectivity repaired afterwards.
//! Weights are integers in `1..=100`, roughly proportional to Euclidean length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RoadGraph, VertexId, Weight};

/// Grid cell size in coordinate units.
const CELL: i64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub vertices: usize,
    /// Target average degree. Values above 4 add diagonals.
    pub degree: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(vertices: usize, seed: u64) -> Self {
        SyntheticSpec {
            vertices,
            degree: 3.0,
            seed,
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> RoadGraph {
    let n = spec.vertices.max(1);
    let side = (n as f64).sqrt().ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let coords: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let (x, y) = ((i % side) as i64, (i / side) as i64);
            (
                x * CELL + rng.gen_range(-CELL / 4..=CELL / 4),
                y * CELL + rng.gen_range(-CELL / 4..=CELL / 4),
            )
        })
        .collect();

    let keep = (spec.degree / 4.0).clamp(0.05, 1.0);
    let diag = ((spec.degree - 4.0) / 4.0).clamp(0.0, 1.0);

    let weight_of = |a: usize, b: usize, rng: &mut ChaCha8Rng| -> Weight {
        let dx = (coords[a].0 - coords[b].0) as f64;
        let dy = (coords[a].1 - coords[b].1) as f64;
        let len = (dx * dx + dy * dy).sqrt() / CELL as f64;
        ((len * 40.0 * rng.gen_range(0.8..1.25)).round() as i64).clamp(1, 100) as Weight
    };

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..n {
        let x = i % side;
        let mut candidates = Vec::with_capacity(4);
        if x + 1 < side && i + 1 < n {
            candidates.push((i + 1, keep));
        }
        if i + side < n {
            candidates.push((i + side, keep));
        }
        if x + 1 < side && i + side + 1 < n {
            candidates.push((i + side + 1, diag));
        }
        if x > 0 && i + side - 1 < n {
            candidates.push((i + side - 1, diag));
        }
        for (j, p) in candidates {
            let w = weight_of(i, j, &mut rng);
            if rng.gen_bool(p) {
                kept.push((i as VertexId, j as VertexId, w));
            } else if p == keep {
                dropped.push((i as VertexId, j as VertexId, w));
            }
        }
    }

    // Reconnect components with dropped grid edges.
    let mut uf = UnionFind::new(n);
    for &(u, v, _) in &kept {
        uf.union(u as usize, v as usize);
    }
    for e in dropped {
        if uf.union(e.0 as usize, e.1 as usize) {
            kept.push(e);
        }
    }

    RoadGraph::from_edges(n, kept)
        .and_then(|g| g.with_coords(coords))
        .expect("generator produces valid edges")
}

/// Parses `synthetic:<n>[:<degree>[:<seed>]]`.
pub fn parse_spec(text: &str) -> Option<SyntheticSpec> {
    let rest = text.strip_prefix("synthetic:")?;
    let mut parts = rest.split(':');
    let vertices = parts.next()?.parse().ok()?;
    let degree = match parts.next() {
        Some(d) => d.parse().ok()?,
        None => 3.0,
    };
    let seed = match parts.next() {
        Some(s) => s.parse().ok()?,
        None => 1,
    };
    if parts.next().is_some() || vertices == 0 {
        return None;
    }
    Some(SyntheticSpec {
        vertices,
        degree,
        seed,
    })
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graph_is_connected_and_deterministic() {
        let spec = SyntheticSpec::new(500, 3);
        let g = generate(&spec);
        assert_eq!(g.vertex_count(), 500);
        assert_eq!(g, generate(&spec));
        let d = super::super::dijkstra(&g, 0, None, None);
        assert!(d.iter().count() == 500);
        assert!(g.edges().all(|(_, _, w)| (1..=100).contains(&w)));
    }

    #[test]
    fn parses_specs() {
        assert_eq!(parse_spec("synthetic:500"), Some(SyntheticSpec::new(500, 1)));
        let s = parse_spec("synthetic:100:4.5:9").unwrap();
        assert_eq!((s.vertices, s.degree, s.seed), (100, 4.5, 9));
        assert!(parse_spec("synthetic:").is_none());
        assert!(parse_spec("grid:5").is_none());
    }
}
