use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sleeping_cli::{
    cmd_run, cmd_sweep, render_run, render_sweep, Algorithm, ExperimentSpec, Format, GraphSource,
    SpecError, SweepSpec,
};
use sleeping_core::graph::GraphKind;
use sleeping_core::sim::Mode;

#[derive(Parser)]
#[command(
    name = "sleepsim",
    version,
    about = "Run sleeping-model protocols and report awake, clock and message metrics"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run trials of one algorithm on one graph source.
    Run(RunArgs),
    /// Run the same experiment over increasing sizes of a generated graph.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Local,
    Congest,
}

#[derive(Args)]
struct Common {
    /// dlt, dlt-fast, dlt-congest, olocal:mis, olocal:coloring, ccongest:<name> or universal:<name>
    #[arg(long)]
    algo: String,
    /// Defaults to the algorithm's own model.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Bits per message in congest mode [default: 4·⌈log₂ n̂⌉ + 32].
    #[arg(long)]
    bit_budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// Edge-list graph file.
    #[arg(long, conflicts_with_all = ["gen", "n", "p"], required_unless_present = "gen")]
    graph: Option<PathBuf>,
    /// ring, path, complete, random-gnp or random-tree
    #[arg(long, requires = "n")]
    gen: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability for random-gnp.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    gen: String,
    /// Strictly increasing sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

fn spec(source: GraphSource, c: &Common) -> Result<ExperimentSpec, SpecError> {
    let mode = c.mode.map(|m| match m {
        ModeArg::Local => Mode::Local,
        ModeArg::Congest => Mode::Congest,
    });
    ExperimentSpec::new(
        source,
        c.algo.parse::<Algorithm>()?,
        mode,
        c.bit_budget,
        c.trials,
    )
}

fn kind(name: &str) -> Result<GraphKind, SpecError> {
    Ok(name.parse::<GraphKind>()?)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), SpecError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| SpecError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every trial passed its checks.
fn execute(cli: Cli) -> Result<bool, SpecError> {
    match cli.cmd {
        Command::Run(a) => {
            let source = match (a.graph, a.gen) {
                (Some(path), _) => GraphSource::File(path),
                (None, Some(g)) => GraphSource::Generated {
                    kind: kind(&g)?,
                    n: a.n.unwrap_or(0),
                    p: a.p,
                    seed: a.seed,
                },
                (None, None) => unreachable!("clap requires --graph or --gen"),
            };
            let spec = spec(source, &a.common)?;
            let rows = cmd_run(&spec)?;
            emit(&render_run(&rows, a.common.format)?, &a.common.out)?;
            Ok(rows.iter().all(|r| r.valid))
        }
        Command::Sweep(a) => {
            let first = a.ns.first().copied().unwrap_or(0);
            let source = GraphSource::Generated {
                kind: kind(&a.gen)?,
                n: first,
                p: a.p,
                seed: a.seed,
            };
            let sweep = SweepSpec::new(spec(source, &a.common)?, a.ns)?;
            let rep = cmd_sweep(&sweep)?;
            emit(&render_sweep(&rep, a.common.format)?, &a.common.out)?;
            Ok(rep.trials.iter().all(|r| r.valid))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
