use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::graph::synthetic::{parse_spec, SyntheticSpec};
use crate::sim::WorkloadSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Synthetic(SyntheticSpec),
    /// DIMACS `.gr` file with an optional coordinate companion.
    File { path: PathBuf, coords: Option<PathBuf> },
}

impl FromStr for GraphSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.starts_with("synthetic") {
            parse_spec(s)
                .map(GraphSource::Synthetic)
                .ok_or_else(|| Error::InvalidArgument(format!("bad synthetic graph `{s}`")))
        } else {
            Ok(GraphSource::File {
                path: PathBuf::from(s),
                coords: None,
            })
        }
    }
}

impl std::fmt::Display for GraphSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphSource::Synthetic(s) => write!(f, "synthetic:{}:{}:{}", s.vertices, s.degree, s.seed),
            GraphSource::File { path, .. } => write!(f, "{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub workload: WorkloadSpec,
    pub m: usize,
    pub z: usize,
    pub mu: usize,
    pub k: usize,
    pub queries: usize,
    pub rounds: usize,
    pub verify: bool,
    pub serial: bool,
    pub out: Option<PathBuf>,
    /// Timed repetitions of the query rounds; the CSV comes from the first.
    pub repeats: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: GraphSource::Synthetic(SyntheticSpec::new(10_000, 1)),
            workload: WorkloadSpec::default(),
            m: 4,
            z: 300,
            mu: 5,
            k: 10,
            queries: 100,
            rounds: 10,
            verify: false,
            serial: false,
            out: None,
            repeats: 3,
            seed: 1,
        }
    }
}

pub const KEYS: &[&str] = &[
    "graph",
    "coords",
    "objects",
    "movers",
    "distribution",
    "dt",
    "speed_min",
    "speed_max",
    "sticky_movers",
    "sigma",
    "k",
    "m",
    "z",
    "mu",
    "queries",
    "rounds",
    "verify",
    "serial",
    "out",
    "repeats",
    "seed",
];

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.m < 2 {
            return bad("m must be at least 2");
        }
        if self.z < 2 {
            return bad("z must be at least 2");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if self.repeats == 0 {
            return bad("repeats must be positive");
        }
        self.workload.validate()
    }

    /// Sets one option by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::InvalidArgument(format!("bad value `{v}` for {key}")))
        }
        match key {
            "graph" => {
                let coords = match &self.graph {
                    GraphSource::File { coords, .. } => coords.clone(),
                    _ => None,
                };
                self.graph = value.parse()?;
                if let GraphSource::File { coords: c, .. } = &mut self.graph {
                    *c = coords;
                }
            }
            "coords" => match &mut self.graph {
                GraphSource::File { coords, .. } => *coords = Some(PathBuf::from(value)),
                GraphSource::Synthetic(_) => {
                    return Err(Error::InvalidArgument("coords given for a synthetic graph".into()))
                }
            },
            "objects" | "movers" | "distribution" | "dt" | "speed_min" | "speed_max" | "sticky_movers" | "sigma" => {
                self.workload.set(key, value)?
            }
            "k" => self.k = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "z" => self.z = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "queries" => self.queries = num(key, value)?,
            "rounds" => self.rounds = num(key, value)?,
            "verify" => self.verify = num(key, value)?,
            "serial" => self.serial = num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "repeats" => self.repeats = num(key, value)?,
            "seed" => {
                self.seed = num(key, value)?;
                self.workload.seed = self.seed;
            }
            _ => return Err(Error::InvalidArgument(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of the current values.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, "expected `key = value`"))?;
            self.set(k.trim(), v.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// The effective configuration in config-file form.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "graph = {}", self.graph);
        if let GraphSource::File { coords: Some(c), .. } = &self.graph {
            let _ = writeln!(s, "coords = {}", c.display());
        }
        let w = &self.workload;
        let _ = writeln!(s, "objects = {}", w.objects);
        let _ = writeln!(s, "movers = {}", w.movers);
        let _ = writeln!(s, "distribution = {}", w.distribution);
        let _ = writeln!(s, "dt = {}", w.dt);
        let _ = writeln!(s, "speed_min = {}", w.speed.0);
        let _ = writeln!(s, "speed_max = {}", w.speed.1);
        let _ = writeln!(s, "sticky_movers = {}", w.sticky_movers);
        let _ = writeln!(s, "sigma = {}", w.sigma);
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "z = {}", self.z);
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "queries = {}", self.queries);
        let _ = writeln!(s, "rounds = {}", self.rounds);
        let _ = writeln!(s, "verify = {}", self.verify);
        let _ = writeln!(s, "serial = {}", self.serial);
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        let _ = writeln!(s, "repeats = {}", self.repeats);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_echo_table_values() {
        let e = RunConfig::default().echo();
        for line in ["k = 10", "m = 4", "z = 300", "mu = 5", "movers = 0.25", "objects = 30000"] {
            assert!(e.lines().any(|l| l == line), "missing `{line}`");
        }
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.apply_kv("graph = synthetic:500:3:7\nk = 5\nverify = true\ndistribution = zipfian\n").unwrap();
        let mut d = RunConfig::default();
        d.apply_kv(&c.echo()).unwrap();
        assert_eq!(c, d);
        assert!(c.apply_kv("bogus = 1").is_err());
    }
}
