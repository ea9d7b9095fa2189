//! C ABI over `odin-core`.
//!
//! Every fallible call returns an [`OdinStatus`]; on failure a message is kept
//! per thread and can be read with [`odin_last_error`]. Handles are opaque and
//! must be released with the matching `_free` function. Panics never cross the
//! boundary: they come back as `ODIN_STATUS_PANIC`.
//!
//! A graph may be shared by any number of indexes. A query belongs to the
//! index it was created on and must only be stepped against that index.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use odin_core::graph::dimacs::load_dimacs;
use odin_core::graph::synthetic::{generate, SyntheticSpec};
use odin_core::index::{IndexParams, ObjectMove, Placement};
use odin_core::knn::{Query, QueryState};
use odin_core::partition::PartitionParams;
use odin_core::{Error, RoadGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    /// A vertex id past the graph, or an output buffer that is too small.
    OutOfRange = 5,
    Corrupt = 6,
    Panic = 7,
}

/// A road graph. Immutable once built.
pub struct OdinGraph {
    graph: Arc<RoadGraph>,
}

/// The elastic index over one graph and one object population.
pub struct OdinIndex {
    index: odin_core::OdinIndex,
    id: u64,
}

/// A continuous kNN query registered on one index.
pub struct OdinQuery {
    state: QueryState,
    index_id: u64,
}

/// An object sitting `delta` past `vertex`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OdinPlacement {
    pub object: u32,
    pub vertex: u32,
    pub delta: u64,
}

/// Where an object is after a round. `present == false` retires it.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OdinMove {
    pub object: u32,
    pub present: bool,
    pub vertex: u32,
    pub delta: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OdinReport {
    pub folds: usize,
    pub unfolds: usize,
    pub first_activations: usize,
    pub nodes_touched: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdinNeighbor {
    pub object: u32,
    pub distance: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

static NEXT_INDEX: AtomicU64 = AtomicU64::new(1);

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(OdinStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => OdinStatus::Parse,
            Error::InvalidArgument(_) => OdinStatus::InvalidArgument,
            Error::Corrupt(_) => OdinStatus::Corrupt,
            Error::Io(_) => OdinStatus::Io,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(OdinStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Fail {
    Fail(OdinStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OdinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OdinStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            OdinStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn odin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph from `edge_count` undirected edges `(from[i], to[i], weight[i])`.
///
/// # Safety
/// The three arrays must hold `edge_count` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_from_edges(
    vertex_count: u32,
    from: *const u32,
    to: *const u32,
    weight: *const u32,
    edge_count: usize,
    out: *mut *mut OdinGraph,
) -> OdinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (a, b, w) = (
            slice(from, edge_count, "from")?,
            slice(to, edge_count, "to")?,
            slice(weight, edge_count, "weight")?,
        );
        let edges = (0..edge_count).map(|i| (a[i], b[i], w[i]));
        let graph = RoadGraph::from_edges(vertex_count as usize, edges)?;
        put(out, OdinGraph { graph: Arc::new(graph) });
        Ok(())
    })
}

/// Loads a DIMACS `.gr` file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_load_dimacs(path: *const c_char, out: *mut *mut OdinGraph) -> OdinStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let file = File::open(path).map_err(|e| Fail(OdinStatus::Io, format!("{path}: {e}")))?;
        let graph = load_dimacs(BufReader::new(file))?;
        put(out, OdinGraph { graph: Arc::new(graph) });
        Ok(())
    })
}

/// A connected synthetic road-like graph.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_synthetic(vertex_count: u32, seed: u64, out: *mut *mut OdinGraph) -> OdinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if vertex_count < 2 {
            return Err(invalid("a synthetic graph needs at least 2 vertices"));
        }
        let graph = generate(&SyntheticSpec::new(vertex_count as usize, seed));
        put(out, OdinGraph { graph: Arc::new(graph) });
        Ok(())
    })
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_vertex_count(graph: *const OdinGraph) -> u32 {
    graph.as_ref().map_or(0, |g| g.graph.vertex_count() as u32)
}

/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_edge_count(graph: *const OdinGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn odin_graph_free(graph: *mut OdinGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Partitions `graph` with fanout `m` and leaf size `z`, places the objects
/// and builds the index with underfill threshold `mu`.
///
/// # Safety
/// `graph` must be a live handle, `objects` must hold `object_count`
/// elements, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn odin_index_build(
    graph: *const OdinGraph,
    m: u32,
    z: u32,
    mu: u32,
    objects: *const OdinPlacement,
    object_count: usize,
    out: *mut *mut OdinIndex,
) -> OdinStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if m < 2 || z < 2 {
            return Err(invalid("m and z must be at least 2"));
        }
        let n = g.graph.vertex_count() as u32;
        let objs = slice(objects, object_count, "objects")?;
        if let Some(o) = objs.iter().find(|o| o.vertex >= n) {
            return Err(Fail(OdinStatus::OutOfRange, format!("object {} on vertex {} out of range", o.object, o.vertex)));
        }
        let placements = objs.iter().map(|o| (o.object, Placement { vertex: o.vertex, delta: o.delta }));
        let index = odin_core::OdinIndex::from_graph(
            g.graph.clone(),
            &PartitionParams::new(m as usize, z as usize),
            placements,
            IndexParams::new(mu as usize),
        )?;
        put(out, OdinIndex { index, id: NEXT_INDEX.fetch_add(1, Ordering::Relaxed) });
        Ok(())
    })
}

/// Applies one round of object movement, then folds and unfolds as needed.
/// Objects not mentioned stay put; unknown objects with `present` are added.
///
/// # Safety
/// `index` must be a live handle, `moves` must hold `move_count` elements and
/// `report` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn odin_index_apply(
    index: *mut OdinIndex,
    moves: *const OdinMove,
    move_count: usize,
    report: *mut OdinReport,
) -> OdinStatus {
    guard(|| {
        let ix = index.as_mut().ok_or_else(|| null("index"))?;
        let n = ix.index.graph().vertex_count() as u32;
        let moves = slice(moves, move_count, "moves")?;
        let mut batch = Vec::with_capacity(moves.len());
        for mv in moves {
            if mv.present && mv.vertex >= n {
                return Err(Fail(OdinStatus::OutOfRange, format!("object {} moved to vertex {} out of range", mv.object, mv.vertex)));
            }
            batch.push(ObjectMove {
                object: mv.object,
                from: ix.index.placement(mv.object),
                to: mv.present.then_some(Placement { vertex: mv.vertex, delta: mv.delta }),
            });
        }
        let r = ix.index.maintain(&batch)?;
        if let Some(out) = report.as_mut() {
            *out = OdinReport {
                folds: r.folds,
                unfolds: r.unfolds,
                first_activations: r.first_activations,
                nodes_touched: r.nodes_touched,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `index` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn odin_index_object_count(index: *const OdinIndex) -> usize {
    index.as_ref().map_or(0, |ix| ix.index.object_count())
}

/// # Safety
/// `index` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn odin_index_free(index: *mut OdinIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Registers a k-nearest-neighbor query at `vertex`.
///
/// # Safety
/// `index` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn odin_query_new(
    index: *const OdinIndex,
    vertex: u32,
    k: u32,
    out: *mut *mut OdinQuery,
) -> OdinStatus {
    guard(|| {
        let ix = index.as_ref().ok_or_else(|| null("index"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if k == 0 {
            return Err(invalid("k must be positive"));
        }
        if vertex as usize >= ix.index.graph().vertex_count() {
            return Err(Fail(OdinStatus::OutOfRange, format!("query vertex {vertex} out of range")));
        }
        let state = QueryState::new(&ix.index, Query { vertex, k: k as usize })?;
        put(out, OdinQuery { state, index_id: ix.id });
        Ok(())
    })
}

/// Answers the query on the index's current snapshot, reusing the previous
/// round when there is one. Neighbors are written nearest first. `len`
/// receives the answer size; if it exceeds `capacity` nothing is written and
/// `ODIN_STATUS_OUT_OF_RANGE` is returned, but the round still counts.
///
/// # Safety
/// `query` and `index` must be live handles, `out` must hold `capacity`
/// elements (or be null with `capacity == 0`) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn odin_query_step(
    query: *mut OdinQuery,
    index: *const OdinIndex,
    out: *mut OdinNeighbor,
    capacity: usize,
    len: *mut usize,
) -> OdinStatus {
    guard(|| {
        let q = query.as_mut().ok_or_else(|| null("query"))?;
        let ix = index.as_ref().ok_or_else(|| null("index"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        if q.index_id != ix.id {
            return Err(invalid("query was registered on a different index"));
        }
        let result = q.state.step(&ix.index);
        *len = result.items.len();
        if result.items.len() > capacity {
            return Err(Fail(
                OdinStatus::OutOfRange,
                format!("{} neighbors do not fit in {capacity}", result.items.len()),
            ));
        }
        if out.is_null() && !result.items.is_empty() {
            return Err(null("out"));
        }
        for (i, &(object, distance)) in result.items.iter().enumerate() {
            *out.add(i) = OdinNeighbor { object, distance };
        }
        Ok(())
    })
}

/// # Safety
/// `query` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn odin_query_free(query: *mut OdinQuery) {
    if !query.is_null() {
        drop(Box::from_raw(query));
    }
}
