use std::collections::BTreeMap;
use std::ffi::{CStr, CString};
use std::ptr;

use odin_core::graph::synthetic::{generate, SyntheticSpec};
use odin_core::oracle::ine_knn;
use odin_core::{Dist, RoadGraph};
use odin_ffi::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn last_error() -> String {
    let p = odin_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn graph_handle(g: &RoadGraph) -> *mut OdinGraph {
    let (mut a, mut b, mut w) = (vec![], vec![], vec![]);
    for (u, v, x) in g.edges() {
        a.push(u);
        b.push(v);
        w.push(x);
    }
    let mut out = ptr::null_mut();
    let s = unsafe { odin_graph_from_edges(g.vertex_count() as u32, a.as_ptr(), b.as_ptr(), w.as_ptr(), a.len(), &mut out) };
    assert_eq!(s, OdinStatus::Ok);
    out
}

fn table(n: usize, at: &BTreeMap<u32, (u32, u64)>) -> Vec<Vec<(u32, Dist)>> {
    let mut t = vec![Vec::new(); n];
    for (&id, &(v, d)) in at {
        t[v as usize].push((id, d));
    }
    t
}

#[test]
fn rounds_match_network_expansion() {
    let g = generate(&SyntheticSpec::new(600, 5));
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gh = graph_handle(&g);
    assert_eq!(unsafe { odin_graph_vertex_count(gh) } as usize, n);
    assert_eq!(unsafe { odin_graph_edge_count(gh) }, g.edge_count());

    let mut at: BTreeMap<u32, (u32, u64)> = BTreeMap::new();
    let objs: Vec<OdinPlacement> = (0..120)
        .map(|id| {
            let p = OdinPlacement { object: id, vertex: rng.gen_range(0..n as u32), delta: rng.gen_range(0..40) };
            at.insert(id, (p.vertex, p.delta));
            p
        })
        .collect();
    let mut ix = ptr::null_mut();
    assert_eq!(unsafe { odin_index_build(gh, 4, 30, 4, objs.as_ptr(), objs.len(), &mut ix) }, OdinStatus::Ok);
    assert_eq!(unsafe { odin_index_object_count(ix) }, 120);

    let k = 8;
    let mut queries: Vec<(u32, *mut OdinQuery)> = (0..10)
        .map(|_| {
            let v = rng.gen_range(0..n as u32);
            let mut q = ptr::null_mut();
            assert_eq!(unsafe { odin_query_new(ix, v, k, &mut q) }, OdinStatus::Ok);
            (v, q)
        })
        .collect();

    let mut reshaped = 0;
    for round in 0..8 {
        if round > 0 {
            let mut moves = Vec::new();
            for id in 0..140u32 {
                if rng.gen_bool(0.3) {
                    let present = rng.gen_bool(0.85);
                    let mv = OdinMove { object: id, present, vertex: rng.gen_range(0..n as u32), delta: rng.gen_range(0..40) };
                    if present {
                        at.insert(id, (mv.vertex, mv.delta));
                    } else {
                        at.remove(&id);
                    }
                    moves.push(mv);
                }
            }
            let mut report = OdinReport::default();
            assert_eq!(unsafe { odin_index_apply(ix, moves.as_ptr(), moves.len(), &mut report) }, OdinStatus::Ok);
            reshaped += report.folds + report.unfolds;
            assert_eq!(unsafe { odin_index_object_count(ix) }, at.len());
        }
        let objects = table(n, &at);
        for (v, q) in &mut queries {
            let mut buf = vec![OdinNeighbor::default(); k as usize];
            let mut len = 0;
            assert_eq!(unsafe { odin_query_step(*q, ix, buf.as_mut_ptr(), buf.len(), &mut len) }, OdinStatus::Ok);
            let got: Vec<(u32, Dist)> = buf[..len].iter().map(|x| (x.object, x.distance)).collect();
            assert_eq!(got, ine_knn(&g, &objects, *v, k as usize).items, "round {round} q {v}");
        }
    }
    assert!(reshaped > 0, "fixture never folded or unfolded");
    unsafe {
        for (_, q) in queries {
            odin_query_free(q);
        }
        odin_index_free(ix);
        odin_graph_free(gh);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut gh = ptr::null_mut();
        assert_eq!(odin_graph_synthetic(300, 1, ptr::null_mut()), OdinStatus::NullPointer);
        assert!(last_error().contains("out"));
        assert_eq!(odin_graph_synthetic(1, 1, &mut gh), OdinStatus::InvalidArgument);
        assert_eq!(odin_graph_synthetic(300, 1, &mut gh), OdinStatus::Ok);

        let bad = [OdinPlacement { object: 0, vertex: 300, delta: 0 }];
        let mut ix = ptr::null_mut();
        assert_eq!(odin_index_build(gh, 4, 20, 3, bad.as_ptr(), 1, &mut ix), OdinStatus::OutOfRange);
        assert_eq!(odin_index_build(gh, 1, 20, 3, ptr::null(), 0, &mut ix), OdinStatus::InvalidArgument);
        assert_eq!(odin_index_build(ptr::null(), 4, 20, 3, ptr::null(), 0, &mut ix), OdinStatus::NullPointer);
        assert_eq!(odin_index_build(gh, 4, 20, 3, ptr::null(), 3, &mut ix), OdinStatus::NullPointer);

        let objs: Vec<OdinPlacement> = (0..20).map(|i| OdinPlacement { object: i, vertex: i * 7, delta: 1 }).collect();
        assert_eq!(odin_index_build(gh, 4, 20, 3, objs.as_ptr(), objs.len(), &mut ix), OdinStatus::Ok);
        let mut other = ptr::null_mut();
        assert_eq!(odin_index_build(gh, 3, 25, 3, objs.as_ptr(), objs.len(), &mut other), OdinStatus::Ok);

        let mut q = ptr::null_mut();
        assert_eq!(odin_query_new(ix, 0, 0, &mut q), OdinStatus::InvalidArgument);
        assert_eq!(odin_query_new(ix, 300, 3, &mut q), OdinStatus::OutOfRange);
        assert!(last_error().contains("300"));
        assert_eq!(odin_query_new(ix, 5, 3, &mut q), OdinStatus::Ok);

        let mut buf = [OdinNeighbor::default(); 3];
        let mut len = 0;
        assert_eq!(odin_query_step(q, other, buf.as_mut_ptr(), 3, &mut len), OdinStatus::InvalidArgument);
        assert_eq!(odin_query_step(q, ix, buf.as_mut_ptr(), 2, &mut len), OdinStatus::OutOfRange);
        assert_eq!(len, 3);
        assert_eq!(odin_query_step(q, ix, buf.as_mut_ptr(), 3, ptr::null_mut()), OdinStatus::NullPointer);
        assert_eq!(odin_query_step(q, ix, buf.as_mut_ptr(), 3, &mut len), OdinStatus::Ok);
        assert!(buf.windows(2).all(|w| (w[0].distance, w[0].object) <= (w[1].distance, w[1].object)));

        let mv = [OdinMove { object: 3, present: true, vertex: 999, delta: 0 }];
        assert_eq!(odin_index_apply(ix, mv.as_ptr(), 1, ptr::null_mut()), OdinStatus::OutOfRange);
        let mv = [OdinMove { object: 3, present: false, vertex: 0, delta: 0 }];
        assert_eq!(odin_index_apply(ix, mv.as_ptr(), 1, ptr::null_mut()), OdinStatus::Ok);
        assert_eq!(odin_index_object_count(ix), 19);

        odin_query_free(q);
        odin_index_free(ix);
        odin_index_free(other);
        odin_graph_free(gh);
        odin_graph_free(ptr::null_mut());
        assert_eq!(odin_graph_vertex_count(ptr::null()), 0);
    }
}

#[test]
fn dimacs_errors_map_to_parse_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.gr");
    std::fs::write(&good, "p sp 3 2\na 1 2 4\na 2 3 5\n").unwrap();
    let bad = dir.path().join("bad.gr");
    std::fs::write(&bad, "p sp 3 1\na 1 9 4\n").unwrap();
    let missing = dir.path().join("missing.gr");
    let c = |p: &std::path::Path| CString::new(p.to_str().unwrap()).unwrap();
    unsafe {
        let mut gh = ptr::null_mut();
        assert_eq!(odin_graph_load_dimacs(c(&good).as_ptr(), &mut gh), OdinStatus::Ok);
        assert_eq!(odin_graph_vertex_count(gh), 3);
        odin_graph_free(gh);
        assert_eq!(odin_graph_load_dimacs(c(&bad).as_ptr(), &mut gh), OdinStatus::Parse);
        assert!(last_error().contains("line 2"), "{}", last_error());
        assert_eq!(odin_graph_load_dimacs(c(&missing).as_ptr(), &mut gh), OdinStatus::Io);
        assert_eq!(odin_graph_load_dimacs(ptr::null(), &mut gh), OdinStatus::NullPointer);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/odin.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from odin.h");
    }
    for t in ["typedef struct OdinGraph OdinGraph;", "ODIN_STATUS_PANIC = 7"] {
        assert!(header.contains(t), "{t}");
    }
}

/// The header compiles as C and C++ when a compiler is around.
#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/odin.h");
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        match std::process::Command::new(cc).args(["-fsyntax-only", "-x", lang, header]).output() {
            Ok(o) => assert!(o.status.success(), "{cc}: {}", String::from_utf8_lossy(&o.stderr)),
            Err(_) => eprintln!("{cc} not found, skipped"),
        }
    }
}
