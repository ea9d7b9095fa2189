//! Experiment driver: builds the index over a graph and a moving-object
//! workload, answers a fixed query set round after round, and writes one CSV
//! row per query per round.
//!
//! The main CSV holds only deterministic columns. Wall-clock times go to a
//! sibling `.timing.csv` so two runs with the same seed can be diffed byte
//! for byte.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{GraphSource, RunConfig, KEYS};

use crate::graph::dimacs::{load_coords, load_dimacs};
use crate::graph::synthetic::generate;
use crate::index::{IndexParams, MaintenanceReport, OdinIndex};
use crate::knn::{KnnResult, Query, QueryState};
use crate::oracle::ine_knn;
use crate::partition::PartitionParams;
use crate::sim::Population;
use crate::{Error, RoadGraph, VertexId};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] Error),
    /// The index answer differed from the oracle.
    #[error("verification failed: {0}")]
    Verify(String),
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Core(Error::Io(e))
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;

/// One query answered in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub round: usize,
    pub query: usize,
    pub vertex: VertexId,
    pub k: usize,
    pub result: KnnResult,
    pub elapsed_us: f64,
    /// `None` when verification is off.
    pub verified: Option<bool>,
}

/// Per-round maintenance outcome.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub report: MaintenanceReport,
    pub maintain_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub vertices: usize,
    pub edges: usize,
    pub objects: usize,
    pub queries: usize,
    pub rounds: usize,
    pub build_ms: f64,
    /// Mean first-round query time, averaged over repeats.
    pub mean_init_us: f64,
    /// Mean later-round query time; `None` with a single round.
    pub mean_inc_us: Option<f64>,
    /// Mean over every answered query.
    pub mean_query_us: f64,
    pub mean_maintain_ms: f64,
    pub mean_settled_init: f64,
    pub mean_settled_inc: Option<f64>,
    pub folds: usize,
    pub unfolds: usize,
    pub first_activations: usize,
    pub verified: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub queries: Vec<QueryRecord>,
    pub rounds: Vec<RoundRecord>,
    pub summary: Summary,
}

pub fn load_graph(source: &GraphSource) -> crate::Result<RoadGraph> {
    match source {
        GraphSource::Synthetic(spec) => Ok(generate(spec)),
        GraphSource::File { path, coords } => {
            let g = load_dimacs(BufReader::new(fs::File::open(path)?))?;
            match coords {
                Some(c) => {
                    let xy = load_coords(BufReader::new(fs::File::open(c)?), g.vertex_count())?;
                    g.with_coords(xy)
                }
                None => Ok(g),
            }
        }
    }
}

/// Query vertices drawn from the run seed, independent of the workload.
pub fn query_vertices(graph: &RoadGraph, count: usize, seed: u64) -> Vec<VertexId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let n = graph.vertex_count() as VertexId;
    (0..count).map(|_| rng.gen_range(0..n)).collect()
}

/// Runs the configured experiment `repeats` times. Records come from the
/// first repeat; timing means cover all of them.
pub fn run(config: &RunConfig) -> BenchResult<RunOutput> {
    config.validate()?;
    let graph = Arc::new(load_graph(&config.graph)?);
    run_on(config, graph)
}

pub fn run_on(config: &RunConfig, graph: Arc<RoadGraph>) -> BenchResult<RunOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(if config.serial { 1 } else { 0 })
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        let mut first: Option<(Vec<QueryRecord>, Vec<RoundRecord>, f64)> = None;
        let mut init_us = Vec::new();
        let mut inc_us = Vec::new();
        let mut build_ms = 0.0;
        for _ in 0..config.repeats {
            let (queries, rounds, b) = run_once(config, graph.clone())?;
            build_ms += b;
            for r in &queries {
                if r.round == 0 {
                    init_us.push(r.elapsed_us);
                } else {
                    inc_us.push(r.elapsed_us);
                }
            }
            if first.is_none() {
                first = Some((queries, rounds, b));
            }
        }
        let (queries, rounds, _) = first.unwrap();
        let summary = summarize(config, &graph, &queries, &rounds, build_ms / config.repeats as f64, &init_us, &inc_us);
        Ok(RunOutput {
            config: config.clone(),
            queries,
            rounds,
            summary,
        })
    })
}

fn run_once(config: &RunConfig, graph: Arc<RoadGraph>) -> BenchResult<(Vec<QueryRecord>, Vec<RoundRecord>, f64)> {
    let mut workload = config.workload.clone();
    workload.seed = config.seed;
    let mut population = Population::generate(&graph, &workload)?;
    let params = IndexParams {
        mu: config.mu,
        parallel: !config.serial,
    };
    let t = Instant::now();
    let mut index = OdinIndex::from_graph(
        graph.clone(),
        &PartitionParams::new(config.m, config.z),
        population.placements(),
        params,
    )?;
    let build_ms = t.elapsed().as_secs_f64() * 1e3;

    let vertices = query_vertices(&graph, config.queries, config.seed);
    let mut states = vertices
        .iter()
        .map(|&v| QueryState::new(&index, Query { vertex: v, k: config.k }))
        .collect::<crate::Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(config.queries * config.rounds);
    let mut rounds = Vec::with_capacity(config.rounds);
    for round in 0..config.rounds {
        let mut rec = RoundRecord {
            round,
            ..Default::default()
        };
        if round > 0 {
            let moves = population.step(&graph);
            let t = Instant::now();
            rec.report = index.maintain(&moves)?;
            rec.maintain_ms = t.elapsed().as_secs_f64() * 1e3;
        }
        rounds.push(rec);

        let answer = |s: &mut QueryState| {
            let t = Instant::now();
            let r = s.step(&index);
            (r, t.elapsed().as_secs_f64() * 1e6)
        };
        let answers: Vec<(KnnResult, f64)> = if config.serial {
            states.iter_mut().map(answer).collect()
        } else {
            states.par_iter_mut().map(answer).collect()
        };

        for (i, (result, elapsed_us)) in answers.into_iter().enumerate() {
            let vertex = vertices[i];
            let verified = if config.verify {
                let want = ine_knn(&graph, &index, vertex, config.k);
                if want.items != result.items {
                    return Err(BenchError::Verify(format!(
                        "round {round} query {i} (vertex {vertex}, k {}): index {:?}, oracle {:?}",
                        config.k, result.items, want.items
                    )));
                }
                Some(true)
            } else {
                None
            };
            records.push(QueryRecord {
                round,
                query: i,
                vertex,
                k: config.k,
                result,
                elapsed_us,
                verified,
            });
        }
    }
    Ok((records, rounds, build_ms))
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in xs {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

fn summarize(
    config: &RunConfig,
    graph: &RoadGraph,
    queries: &[QueryRecord],
    rounds: &[RoundRecord],
    build_ms: f64,
    init_us: &[f64],
    inc_us: &[f64],
) -> Summary {
    let settled = |init: bool| {
        mean(
            queries
                .iter()
                .filter(|r| (r.round == 0) == init)
                .map(|r| r.result.counters.settled() as f64),
        )
    };
    Summary {
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        objects: config.workload.objects,
        queries: config.queries,
        rounds: config.rounds,
        build_ms,
        mean_init_us: mean(init_us.iter().copied()).unwrap_or(0.0),
        mean_inc_us: mean(inc_us.iter().copied()),
        mean_query_us: mean(init_us.iter().chain(inc_us).copied()).unwrap_or(0.0),
        mean_maintain_ms: mean(rounds.iter().skip(1).map(|r| r.maintain_ms)).unwrap_or(0.0),
        mean_settled_init: settled(true).unwrap_or(0.0),
        mean_settled_inc: settled(false),
        folds: rounds.iter().map(|r| r.report.folds).sum(),
        unfolds: rounds.iter().map(|r| r.report.unfolds).sum(),
        first_activations: rounds.iter().map(|r| r.report.first_activations).sum(),
        verified: queries.iter().filter(|r| r.verified == Some(true)).count(),
        mismatches: queries.iter().filter(|r| r.verified == Some(false)).count(),
    }
}

/// Deterministic per-query CSV. Incremental-only columns are omitted when
/// the run has a single round.
pub fn query_csv(out: &RunOutput) -> String {
    let inc = out.config.rounds > 1;
    let mut s = String::from("round,query,vertex,k,mode,result,partial,borders,lives,other,heap_ops");
    if inc {
        s.push_str(",resumed,overlay_rebuilt,folds,unfolds");
    }
    s.push_str(",verify\n");
    for r in &out.queries {
        let c = &r.result.counters;
        let items: Vec<String> = r.result.items.iter().map(|(id, d)| format!("{id}:{d}")).collect();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.round,
            r.query,
            r.vertex,
            r.k,
            if r.round == 0 { "init" } else { "inc" },
            items.join(";"),
            u8::from(r.result.partial),
            c.borders,
            c.lives,
            c.other,
            c.heap_ops
        );
        if inc {
            let rep = &out.rounds[r.round].report;
            let _ = write!(
                s,
                ",{},{},{},{}",
                c.resumed,
                u8::from(c.overlay_rebuilt),
                rep.folds,
                rep.unfolds
            );
        }
        let v = match r.verified {
            None => "off",
            Some(true) => "pass",
            Some(false) => "fail",
        };
        let _ = writeln!(s, ",{v}");
    }
    s
}

/// Wall-clock companion to [`query_csv`].
pub fn timing_csv(out: &RunOutput) -> String {
    let mut s = String::from("round,query,elapsed_us,maintain_ms\n");
    for r in &out.queries {
        let _ = writeln!(
            s,
            "{},{},{:.3},{:.3}",
            r.round, r.query, r.elapsed_us, out.rounds[r.round].maintain_ms
        );
    }
    s
}

pub fn summary_text(s: &Summary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "graph: {} vertices, {} edges", s.vertices, s.edges);
    let _ = writeln!(t, "objects: {}, queries: {}, rounds: {}", s.objects, s.queries, s.rounds);
    let _ = writeln!(t, "build: {:.1} ms", s.build_ms);
    let _ = writeln!(t, "init: {:.1} us/query, {:.1} settled", s.mean_init_us, s.mean_settled_init);
    if let (Some(us), Some(settled)) = (s.mean_inc_us, s.mean_settled_inc) {
        let _ = writeln!(t, "inc: {us:.1} us/query, {settled:.1} settled");
        let _ = writeln!(t, "maintain: {:.2} ms/round", s.mean_maintain_ms);
    }
    let _ = writeln!(
        t,
        "folds: {}, unfolds: {}, first activations: {}",
        s.folds, s.unfolds, s.first_activations
    );
    if s.verified + s.mismatches > 0 {
        let _ = writeln!(t, "verified: {}, mismatches: {}", s.verified, s.mismatches);
    }
    t
}

/// Path of the timing file that goes with a main CSV.
pub fn timing_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.timing.csv"))
}

/// Writes the main and timing CSVs next to each other.
pub fn write_outputs(out: &RunOutput, path: &Path) -> BenchResult<()> {
    fs::write(path, query_csv(out))?;
    fs::write(timing_path(path), timing_csv(out))?;
    Ok(())
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    K,
    M,
    Z,
    Mu,
    Objects,
    Movers,
    /// Vertices per object, so `10` means one object per ten vertices.
    Density,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Ok(match s {
            "k" => Axis::K,
            "m" => Axis::M,
            "z" => Axis::Z,
            "mu" => Axis::Mu,
            "objects" => Axis::Objects,
            "movers" => Axis::Movers,
            "density" => Axis::Density,
            _ => return Err(Error::InvalidArgument(format!("unknown sweep axis `{s}`"))),
        })
    }
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::K => "k",
            Axis::M => "m",
            Axis::Z => "z",
            Axis::Mu => "mu",
            Axis::Objects => "objects",
            Axis::Movers => "movers",
            Axis::Density => "density",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &RunConfig, graph: &RoadGraph, value: &str) -> crate::Result<RunConfig> {
        let mut c = base.clone();
        match self {
            Axis::Density => {
                let per: f64 = value
                    .trim_start_matches("1:")
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad density `{value}`")))?;
                if per <= 0.0 {
                    return Err(Error::InvalidArgument(format!("bad density `{value}`")));
                }
                c.workload.objects = (graph.vertex_count() as f64 / per).round() as usize;
            }
            _ => c.set(self.name(), value)?,
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs one experiment per value. With an output path, each point writes
/// `<stem>.<axis>=<value>.csv` and the sweep writes a combined summary to
/// the path itself.
pub fn sweep(base: &RunConfig, axis: Axis, values: &[String]) -> BenchResult<Vec<(String, RunOutput)>> {
    base.validate()?;
    let graph = Arc::new(load_graph(&base.graph)?);
    let mut points = Vec::new();
    for v in values {
        let config = axis.apply(base, &graph, v)?;
        let out = run_on(&config, graph.clone())?;
        if let Some(path) = &base.out {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let p = path.with_file_name(format!("{stem}.{}={}.csv", axis.name(), v.replace(':', "-")));
            write_outputs(&out, &p)?;
        }
        points.push((v.clone(), out));
    }
    if let Some(path) = &base.out {
        fs::write(path, sweep_csv(axis, &points))?;
    }
    Ok(points)
}

pub fn sweep_csv(axis: Axis, points: &[(String, RunOutput)]) -> String {
    let mut s = format!(
        "{},objects,build_ms,init_us,inc_us,maintain_ms,settled_init,settled_inc,folds,unfolds,first_activations\n",
        axis.name()
    );
    for (v, out) in points {
        let m = &out.summary;
        let opt = |x: Option<f64>| x.map(|x| format!("{x:.3}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{v},{},{:.3},{:.3},{},{:.3},{:.3},{},{},{},{}",
            m.objects,
            m.build_ms,
            m.mean_init_us,
            opt(m.mean_inc_us),
            m.mean_maintain_ms,
            m.mean_settled_init,
            opt(m.mean_settled_inc),
            m.folds,
            m.unfolds,
            m.first_activations
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::synthetic::SyntheticSpec;

    fn small() -> RunConfig {
        let mut c = RunConfig {
            graph: GraphSource::Synthetic(SyntheticSpec::new(300, 2)),
            z: 40,
            queries: 8,
            rounds: 3,
            repeats: 1,
            verify: true,
            ..Default::default()
        };
        c.workload.objects = 60;
        c
    }

    #[test]
    fn verified_run_has_expected_shape() {
        let out = run(&small()).unwrap();
        assert_eq!(out.queries.len(), 24);
        assert_eq!(out.summary.verified, 24);
        let csv = query_csv(&out);
        assert_eq!(csv.lines().count(), 25);
        assert!(csv.starts_with("round,query,vertex,k,mode,result,partial,borders,lives,other,heap_ops,resumed"));
    }

    #[test]
    fn single_round_drops_incremental_columns() {
        let mut c = small();
        c.rounds = 1;
        let out = run(&c).unwrap();
        assert!(out.summary.mean_inc_us.is_none());
        assert!(!query_csv(&out).lines().next().unwrap().contains("resumed"));
    }

    #[test]
    fn density_axis_sets_object_count() {
        let g = generate(&SyntheticSpec::new(300, 2));
        let c = Axis::Density.apply(&small(), &g, "1:10").unwrap();
        assert_eq!(c.workload.objects, 30);
        assert!(Axis::Density.apply(&small(), &g, "0").is_err());
    }
}
