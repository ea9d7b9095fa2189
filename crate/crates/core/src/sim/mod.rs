//! Synthetic moving objects. Objects travel along edges at a fixed speed,
//! report their position once per snapshot, and are associated with the
//! endpoint they are heading to.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use crate::index::{ObjectId, ObjectMove, Placement};

use crate::graph::{Dist, RoadGraph, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distribution {
    #[default]
    Uniform,
    Gaussian,
    Zipfian,
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "ud" => Ok(Distribution::Uniform),
            "gaussian" | "gd" => Ok(Distribution::Gaussian),
            "zipfian" | "zipf" | "zd" => Ok(Distribution::Zipfian),
            _ => Err(Error::InvalidArgument(format!("unknown distribution `{s}`"))),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Gaussian => "gaussian",
            Distribution::Zipfian => "zipfian",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub distribution: Distribution,
    pub objects: usize,
    /// Fraction of objects that move each epoch.
    pub movers: f64,
    /// Seconds between snapshots.
    pub dt: u64,
    /// Inclusive speed range, length units per second.
    pub speed: (u64, u64),
    pub seed: u64,
    /// Pick the movers once instead of every epoch.
    pub sticky_movers: bool,
    /// Gaussian spread as a fraction of the coordinate bounding box diagonal.
    pub sigma: f64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            distribution: Distribution::Uniform,
            objects: 30_000,
            movers: 0.25,
            dt: 10,
            speed: (5, 20),
            seed: 1,
            sticky_movers: false,
            sigma: 0.15,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.movers) {
            return Err(Error::InvalidArgument(format!("mover fraction {} outside [0, 1]", self.movers)));
        }
        if self.speed.0 > self.speed.1 {
            return Err(Error::InvalidArgument("speed range is empty".into()));
        }
        if self.sigma <= 0.0 {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        Ok(())
    }

    /// Parses flat `key = value` text; unknown keys are errors, missing keys
    /// keep their defaults.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut spec = WorkloadSpec::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            spec.set(k.trim(), v.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::InvalidArgument(format!("bad value `{v}` for {key}")))
        }
        match key {
            "distribution" => self.distribution = value.parse()?,
            "objects" => self.objects = num(key, value)?,
            "movers" => self.movers = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "speed_min" => self.speed.0 = num(key, value)?,
            "speed_max" => self.speed.1 = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "sticky_movers" => self.sticky_movers = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            _ => return Err(Error::InvalidArgument(format!("unknown workload key `{key}`"))),
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "distribution = {}\nobjects = {}\nmovers = {}\ndt = {}\nspeed_min = {}\nspeed_max = {}\nseed = {}\nsticky_movers = {}\nsigma = {}\n",
            self.distribution, self.objects, self.movers, self.dt, self.speed.0, self.speed.1, self.seed, self.sticky_movers, self.sigma
        )
    }
}

/// Position of one object: on edge `(u, v)` with `u < v`, `offset` from `u`,
/// heading to `heading` (either endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MovingObject {
    pub id: ObjectId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Dist,
    pub offset: Dist,
    pub heading: VertexId,
    pub speed: u64,
}

impl MovingObject {
    /// Live vertex and remaining distance to it.
    pub fn placement(&self) -> Placement {
        let delta = if self.heading == self.v { self.weight - self.offset } else { self.offset };
        Placement {
            vertex: self.heading,
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub epoch: u64,
    /// Seconds since epoch 0.
    pub timestamp: u64,
    pub objects: Vec<MovingObject>,
}

impl Snapshot {
    /// One `epoch obj_id u v offset heading` line per object.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for o in &self.objects {
            let _ = writeln!(out, "{} {} {} {} {} {}", self.epoch, o.id, o.u, o.v, o.offset, o.heading);
        }
        out
    }

    /// Reads [`Snapshot::dump`] output. Speeds are not part of the format and come back as 0.
    pub fn parse(graph: &RoadGraph, text: &str, dt: u64) -> Result<Self> {
        let mut epoch = None;
        let mut objects = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::parse(i + 1, format!("bad number `{t}`"))))
                .collect::<Result<_>>()?;
            if f.len() != 6 {
                return Err(Error::parse(i + 1, "expected 6 fields"));
            }
            if *epoch.get_or_insert(f[0]) != f[0] {
                return Err(Error::parse(i + 1, "mixed epochs"));
            }
            let (u, v) = (f[2] as VertexId, f[3] as VertexId);
            if f[2] as usize >= graph.vertex_count() || f[3] as usize >= graph.vertex_count() {
                return Err(Error::parse(i + 1, "vertex out of range"));
            }
            let w = graph.edge_weight(u, v).ok_or_else(|| Error::parse(i + 1, "no such edge"))? as Dist;
            if u >= v || f[4] > w || (f[5] != f[2] && f[5] != f[3]) {
                return Err(Error::parse(i + 1, "invalid position"));
            }
            objects.push(MovingObject {
                id: f[1] as ObjectId,
                u,
                v,
                weight: w,
                offset: f[4],
                heading: f[5] as VertexId,
                speed: 0,
            });
        }
        let epoch = epoch.unwrap_or(0);
        Ok(Snapshot {
            epoch,
            timestamp: epoch * dt,
            objects,
        })
    }
}

/// Objects per live vertex, each list ascending by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveAssignment {
    pub by_vertex: Vec<Vec<(ObjectId, Dist)>>,
}

impl LiveAssignment {
    pub fn object_count(&self) -> usize {
        self.by_vertex.iter().map(Vec::len).sum()
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.by_vertex
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(v, _)| v as VertexId)
    }
}

pub fn derive_live(snapshot: &Snapshot, graph: &RoadGraph) -> LiveAssignment {
    let mut by_vertex = vec![Vec::new(); graph.vertex_count()];
    for o in &snapshot.objects {
        let p = o.placement();
        by_vertex[p.vertex as usize].push((o.id, p.delta));
    }
    for l in &mut by_vertex {
        l.sort_unstable();
    }
    LiveAssignment { by_vertex }
}

#[derive(Debug, Clone)]
pub struct Population {
    spec: WorkloadSpec,
    objects: Vec<MovingObject>,
    epoch: u64,
    rng: ChaCha8Rng,
    sticky: Vec<usize>,
}

type EdgePicker = dyn Fn(&mut ChaCha8Rng) -> (VertexId, VertexId, Dist);

impl Population {
    /// Places `spec.objects` objects and returns the population at epoch 0.
    pub fn generate(graph: &RoadGraph, spec: &WorkloadSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let edges: Vec<(VertexId, VertexId, Dist)> = graph.edges().map(|(u, v, w)| (u, v, w as Dist)).collect();
        if edges.is_empty() && spec.objects > 0 {
            return Err(Error::InvalidArgument("cannot place objects on a graph without edges".into()));
        }
        let mut objects = Vec::with_capacity(spec.objects);
        if spec.objects > 0 {
            let pick_edge: Box<EdgePicker> = match spec.distribution {
                Distribution::Uniform => {
                    let d = WeightedIndex::new(edges.iter().map(|e| e.2)).expect("positive weights");
                    Box::new(move |r| edges[d.sample(r)])
                }
                Distribution::Zipfian => {
                    let mut ranked = edges.clone();
                    ranked.shuffle(&mut rng);
                    let d = WeightedIndex::new((1..=ranked.len()).map(|r| 1.0 / r as f64)).unwrap();
                    Box::new(move |r| ranked[d.sample(r)])
                }
                Distribution::Gaussian => {
                    let coords = embedding(graph);
                    let (lo, hi) = bounds(&coords);
                    let diag = (((hi.0 - lo.0) as f64).powi(2) + ((hi.1 - lo.1) as f64).powi(2)).sqrt().max(1.0);
                    let sigma = spec.sigma * diag;
                    let c = coords[rng.gen_range(0..coords.len())];
                    let weights: Vec<f64> = coords
                        .iter()
                        .enumerate()
                        .map(|(v, p)| {
                            if graph.degree(v as VertexId) == 0 {
                                return 0.0;
                            }
                            let dx = (p.0 - c.0) as f64;
                            let dy = (p.1 - c.1) as f64;
                            // Floor keeps far vertices possible without dominating.
                            (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp().max(1e-12)
                        })
                        .collect();
                    let d = WeightedIndex::new(weights).expect("some vertex has an edge");
                    let adj: Vec<Vec<(VertexId, Dist)>> = (0..graph.vertex_count() as VertexId)
                        .map(|v| graph.neighbors(v).map(|(u, w)| (u, w as Dist)).collect())
                        .collect();
                    Box::new(move |r| {
                        let v = d.sample(r) as VertexId;
                        let (u, w) = adj[v as usize][r.gen_range(0..adj[v as usize].len())];
                        (v.min(u), v.max(u), w)
                    })
                }
            };
            for id in 0..spec.objects as ObjectId {
                let (u, v, w) = pick_edge(&mut rng);
                let offset = rng.gen_range(0..=w);
                let heading = if rng.gen_bool(0.5) { u } else { v };
                let speed = rng.gen_range(spec.speed.0..=spec.speed.1);
                objects.push(MovingObject {
                    id,
                    u,
                    v,
                    weight: w,
                    offset,
                    heading,
                    speed,
                });
            }
        }
        let sticky = if spec.sticky_movers {
            let count = mover_count(spec);
            let mut s = sample(&mut rng, objects.len(), count).into_vec();
            s.sort_unstable();
            s
        } else {
            Vec::new()
        };
        Ok(Population {
            spec: spec.clone(),
            objects,
            epoch: 0,
            rng,
            sticky,
        })
    }

    pub fn spec(&self) -> &WorkloadSpec {
        &self.spec
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn objects(&self) -> &[MovingObject] {
        &self.objects
    }

    pub fn placements(&self) -> Vec<(ObjectId, Placement)> {
        self.objects.iter().map(|o| (o.id, o.placement())).collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            epoch: self.epoch,
            timestamp: self.epoch * self.spec.dt,
            objects: self.objects.clone(),
        }
    }

    /// Advances one epoch. Returns the moves of objects whose live vertex or
    /// residual distance changed.
    pub fn step(&mut self, graph: &RoadGraph) -> Vec<ObjectMove> {
        self.epoch += 1;
        let movers = if self.spec.sticky_movers {
            self.sticky.clone()
        } else {
            let mut s = sample(&mut self.rng, self.objects.len(), mover_count(&self.spec)).into_vec();
            s.sort_unstable();
            s
        };
        let mut moves = Vec::new();
        for i in movers {
            let before = self.objects[i].placement();
            let budget = self.objects[i].speed * self.spec.dt;
            advance(graph, &mut self.objects[i], budget, &mut self.rng);
            let after = self.objects[i].placement();
            if before != after {
                moves.push(ObjectMove {
                    object: self.objects[i].id,
                    from: Some(before),
                    to: Some(after),
                });
            }
        }
        moves
    }
}

fn mover_count(spec: &WorkloadSpec) -> usize {
    ((spec.objects as f64) * spec.movers).round() as usize
}

/// Moves `o` by `budget` along its heading, turning at each vertex onto a
/// random other edge (back only at dead ends).
fn advance(graph: &RoadGraph, o: &mut MovingObject, mut budget: u64, rng: &mut ChaCha8Rng) {
    loop {
        let remaining = o.placement().delta;
        if budget <= remaining {
            if o.heading == o.v {
                o.offset += budget;
            } else {
                o.offset -= budget;
            }
            return;
        }
        budget -= remaining;
        let at = o.heading;
        let came_from = if at == o.u { o.v } else { o.u };
        let options: Vec<(VertexId, u32)> = graph.neighbors(at).filter(|&(x, _)| x != came_from).collect();
        let (next, w) = if options.is_empty() {
            (came_from, graph.edge_weight(at, came_from).unwrap())
        } else {
            options[rng.gen_range(0..options.len())]
        };
        o.u = at.min(next);
        o.v = at.max(next);
        o.weight = w as Dist;
        o.offset = if at == o.u { 0 } else { o.weight };
        o.heading = next;
    }
}

/// Vertex coordinates, or a square grid layout when the graph has none.
fn embedding(graph: &RoadGraph) -> Vec<(i64, i64)> {
    if let Some(c) = graph.coords() {
        return c.to_vec();
    }
    let n = graph.vertex_count();
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    (0..n).map(|i| ((i % side) as i64, (i / side) as i64)).collect()
}

fn bounds(c: &[(i64, i64)]) -> ((i64, i64), (i64, i64)) {
    let lo = (c.iter().map(|p| p.0).min().unwrap_or(0), c.iter().map(|p| p.1).min().unwrap_or(0));
    let hi = (c.iter().map(|p| p.0).max().unwrap_or(0), c.iter().map(|p| p.1).max().unwrap_or(0));
    (lo, hi)
}
