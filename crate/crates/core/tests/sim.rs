mod common;

use common::fixture;
use odin_core::graph::synthetic::{generate, SyntheticSpec};
use odin_core::index::{IndexParams, OdinIndex};
use odin_core::partition::PartitionParams;
use odin_core::sim::{derive_live, Distribution, Population, WorkloadSpec};

/// P(X < lo or X > hi) for X ~ Binomial(n, p).
fn binomial_outside(n: u64, p: f64, lo: f64, hi: f64) -> f64 {
    let mut pmf = (n as f64 * (1.0 - p).ln()).exp();
    let mut inside = 0.0;
    for x in 0..=n {
        if x as f64 > hi {
            break;
        }
        if x as f64 >= lo {
            inside += pmf;
        }
        pmf *= (n - x) as f64 / (x + 1) as f64 * p / (1.0 - p);
    }
    (1.0 - inside).max(0.0)
}

#[test]
fn uniform_counts_follow_edge_weights() {
    let g = generate(&SyntheticSpec::new(6700, 5));
    let edges: Vec<_> = g.edges().collect();
    assert!((9_000..11_000).contains(&edges.len()), "{} edges", edges.len());
    let total_w: f64 = edges.iter().map(|e| e.2 as f64).sum();
    let spec = WorkloadSpec { objects: 30_000, movers: 0.0, ..Default::default() };
    let p = Population::generate(&g, &spec).unwrap();
    let mut counts = std::collections::HashMap::new();
    for o in p.objects() {
        *counts.entry((o.u, o.v)).or_insert(0usize) += 1;
    }
    let n = spec.objects as f64;
    let (mut chi2, mut outside, mut expected_outside) = (0.0, 0usize, 0.0);
    for &(u, v, w) in &edges {
        let p = w as f64 / total_w;
        let expect = n * p;
        let got = *counts.get(&(u, v)).unwrap_or(&0) as f64;
        let band = 4.0 * (n * p * (1.0 - p)).sqrt() + 1.0;
        outside += usize::from((got - expect).abs() > band);
        expected_outside += binomial_outside(spec.objects as u64, p, expect - band, expect + band);
        chi2 += (got - expect).powi(2) / expect;
    }
    // With a few objects per edge the 4-sigma band is not a 4-sigma event, so
    // compare the number of edges outside it with the exact expectation.
    assert!(
        outside as f64 <= expected_outside + 4.0 * expected_outside.sqrt() + 1.0,
        "{outside} edges outside 4 sigma, {expected_outside:.2} expected"
    );
    // Degrees of freedom = edges - 1; allow a wide margin.
    let dof = edges.len() as f64 - 1.0;
    assert!(chi2 < dof + 6.0 * (2.0 * dof).sqrt(), "chi2 {chi2:.0} dof {dof}");
}

#[test]
fn replayed_deltas_match_fresh_derivation() {
    for dist in [Distribution::Uniform, Distribution::Gaussian, Distribution::Zipfian] {
        let g = fixture(400, 12);
        let spec = WorkloadSpec { distribution: dist, objects: 300, movers: 0.25, ..Default::default() };
        let mut pop = Population::generate(&g, &spec).unwrap();
        let mut index =
            OdinIndex::from_graph(g.clone(), &PartitionParams::new(4, 30), pop.placements(), IndexParams::new(5)).unwrap();
        for _ in 0..10 {
            let moves = pop.step(&g);
            index.maintain(&moves).unwrap();
        }
        assert_eq!(pop.epoch(), 10);
        let live = derive_live(&pop.snapshot(), &g);
        for v in 0..g.vertex_count() as u32 {
            assert_eq!(index.objects_at(v), live.by_vertex[v as usize].as_slice());
        }
        index.check_invariants().unwrap();
    }
}

#[test]
fn sticky_movers_stay_the_same() {
    let g = fixture(200, 2);
    let spec = WorkloadSpec { objects: 100, movers: 0.2, sticky_movers: true, ..Default::default() };
    let mut pop = Population::generate(&g, &spec).unwrap();
    let first: std::collections::BTreeSet<u32> = pop.step(&g).iter().map(|m| m.object).collect();
    for _ in 0..5 {
        let ids: std::collections::BTreeSet<u32> = pop.step(&g).iter().map(|m| m.object).collect();
        assert!(ids.is_subset(&(0..100).collect()));
        // Movers that actually changed placement are a subset of the sticky set.
        assert!(ids.len() <= 20);
    }
    assert!(first.len() <= 20);
}
