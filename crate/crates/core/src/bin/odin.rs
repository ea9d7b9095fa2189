use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use odin_core::bench::{self, Axis, BenchError, RunConfig};
use odin_core::graph::dimacs::{write_coords, write_dimacs};
use odin_core::Error;

/// Continuous kNN over moving objects on a road network.
#[derive(Parser)]
#[command(name = "odin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the index, run the query rounds and write the CSVs.
    Run(Common),
    /// Repeat `run` over a list of values for one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// k, m, z, mu, objects, movers or density.
        #[arg(long)]
        axis: String,
        /// Comma-separated values. Density values are vertices per object, e.g. 1:10.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Write a graph (and its coordinates) in DIMACS format.
    Gen {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        coords_out: Option<PathBuf>,
    },
    /// Print the effective configuration.
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `synthetic:<n>[:<degree>[:<seed>]]` or a DIMACS .gr path.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    coords: Option<PathBuf>,
    #[arg(long)]
    objects: Option<usize>,
    /// Fraction of objects that move each epoch.
    #[arg(long)]
    movers: Option<f64>,
    /// uniform, gaussian or zipfian.
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long)]
    dt: Option<u64>,
    #[arg(long)]
    sticky_movers: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    mu: Option<usize>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Check every answer against plain network expansion.
    #[arg(long)]
    verify: bool,
    /// Single thread everywhere.
    #[arg(long)]
    serial: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_kv(&fs::read_to_string(p)?)?;
        }
        let mut set = |k: &str, v: Option<String>| match v {
            Some(v) => c.set(k, &v),
            None => Ok(()),
        };
        set("graph", self.graph.clone())?;
        set("coords", self.coords.as_ref().map(|p| p.display().to_string()))?;
        set("objects", self.objects.map(|x| x.to_string()))?;
        set("movers", self.movers.map(|x| x.to_string()))?;
        set("distribution", self.distribution.clone())?;
        set("dt", self.dt.map(|x| x.to_string()))?;
        set("k", self.k.map(|x| x.to_string()))?;
        set("m", self.m.map(|x| x.to_string()))?;
        set("z", self.z.map(|x| x.to_string()))?;
        set("mu", self.mu.map(|x| x.to_string()))?;
        set("queries", self.queries.map(|x| x.to_string()))?;
        set("rounds", self.rounds.map(|x| x.to_string()))?;
        set("repeats", self.repeats.map(|x| x.to_string()))?;
        set("seed", self.seed.map(|x| x.to_string()))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("sticky_movers", self.sticky_movers.then(|| "true".into()))?;
        set("verify", self.verify.then(|| "true".into()))?;
        set("serial", self.serial.then(|| "true".into()))?;
        c.validate()?;
        Ok(c)
    }
}

fn exit_for(e: &BenchError) -> ExitCode {
    match e {
        BenchError::Verify(_) => ExitCode::from(1),
        BenchError::Core(Error::Corrupt(_)) => ExitCode::from(1),
        BenchError::Core(_) => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(common) => common.resolve().map_err(BenchError::from).and_then(|c| {
            let out = bench::run(&c)?;
            match &c.out {
                Some(p) => bench::write_outputs(&out, p)?,
                None => print!("{}", bench::query_csv(&out)),
            }
            eprint!("{}", bench::summary_text(&out.summary));
            Ok(())
        }),
        Command::Sweep { common, axis, values } => common.resolve().map_err(BenchError::from).and_then(|c| {
            let axis: Axis = axis.parse()?;
            let points = bench::sweep(&c, axis, &values)?;
            if c.out.is_none() {
                print!("{}", bench::sweep_csv(axis, &points));
            }
            Ok(())
        }),
        Command::Gen { graph, out, coords_out } => (|| {
            let g = bench::load_graph(&graph.parse()?)?;
            fs::write(&out, write_dimacs(&g))?;
            if let Some(p) = coords_out {
                let xy = g
                    .coords()
                    .ok_or_else(|| Error::InvalidArgument("graph has no coordinates".into()))?;
                fs::write(p, write_coords(xy))?;
            }
            Ok::<_, BenchError>(())
        })(),
        Command::Config(common) => common.resolve().map_err(BenchError::from).map(|c| print!("{}", c.echo())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odin: {e}");
            exit_for(&e)
        }
    }
}
