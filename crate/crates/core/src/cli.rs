//! Command-line front end: `run`, `sweep` and `baseline`.
//!
//! Every [`ExperimentConfig`] key is also a long flag (`--n-r 5`,
//! `--flood-threshold 0.4`, ...). Values are resolved in the order
//! defaults, `--config` file, `PROSA_SIM_SEED` (seed only), flags.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgMatches, Args, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::{random_graph_apl, random_graph_cc, MetricsReport};
use crate::routing::write_traces_csv;
use crate::workload::{run_experiment, sweep, sweep_config};

pub const SEED_ENV: &str = "PROSA_SIM_SEED";

#[derive(Debug, Parser)]
#[command(name = "prosa-sim", version, about = "Semantic P2P overlay simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and export metrics, trace, edge list and manifest.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one experiment per network size and write a summary table.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated network sizes.
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        sizes: Vec<usize>,
    },
    /// Print the random-graph APL and CC for the given size.
    Baseline {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Key-value config file; unset keys keep their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// One optional `--<key> VALUE` flag per config key.
#[derive(Debug, Clone, Default)]
pub struct Overrides(pub Vec<(String, String)>);

impl FromArgMatches for Overrides {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let pairs = ExperimentConfig::KEYS
            .iter()
            .filter_map(|&k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
            .collect();
        Ok(Overrides(pairs))
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for Overrides {
    fn augment_args(cmd: clap::Command) -> clap::Command {
        ExperimentConfig::KEYS.iter().fold(cmd, |cmd, &key| {
            let mut arg = Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .help_heading("Config overrides");
            if key == "seed" {
                arg = arg.env(SEED_ENV);
            }
            cmd.arg(arg)
        })
    }

    fn augment_args_for_update(cmd: clap::Command) -> clap::Command {
        Self::augment_args(cmd)
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        for (key, value) in &self.overrides.0 {
            cfg.set(key, value).map_err(Error::InvalidConfig)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written next to the outputs of `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<Artifact>,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one experiment and returns the manifest it wrote.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let started = now_ms();
    ensure_dir(out)?;
    let outcome = run_experiment(cfg)?;

    let metrics = out.join("metrics.csv");
    let trace = out.join("trace.csv");
    let edges = out.join("edges.txt");
    write_with(&metrics, |w| outcome.report.write_csv(w))?;
    write_with(&trace, |w| write_traces_csv(&outcome.traces, w))?;
    write_with(&edges, |w| {
        outcome
            .network
            .write_edge_list(w)
            .map_err(|e| Error::io(&edges, e))
    })?;

    let outputs = [metrics, trace, edges]
        .into_iter()
        .map(|path| {
            Ok(Artifact {
                sha256: sha256_file(&path)?,
                path,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        config: cfg.clone(),
        seed: cfg.seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        outputs,
    };
    let path = out.join("manifest.json");
    write_with(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)
            .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        writeln!(w).map_err(|e| Error::io(&path, e))
    })?;
    Ok(manifest)
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub size: usize,
    pub apl: f64,
    pub random_apl: Option<f64>,
    pub cc: f64,
    pub random_cc: f64,
}

/// Runs the sweep and writes `metrics-<size>.csv` plus `summary.csv`.
pub fn cmd_sweep(cfg: &ExperimentConfig, sizes: &[usize], out: &Path) -> Result<Vec<SummaryRow>> {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    for &n in &sizes {
        sweep_config(cfg, n).validate()?;
    }
    ensure_dir(out)?;
    let reports = sweep(cfg, &sizes)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for (&size, report) in sizes.iter().zip(&reports) {
        write_with(&out.join(format!("metrics-{size}.csv")), |w| {
            report.write_csv(w)
        })?;
        rows.push(summary_row(size, report));
    }
    write_with(&out.join("summary.csv"), |w| {
        let mut csv = csv::Writer::from_writer(w);
        for row in &rows {
            csv.serialize(row)?;
        }
        csv.flush()
            .map_err(|e| Error::io(out.join("summary.csv"), e))
    })?;
    Ok(rows)
}

fn summary_row(size: usize, r: &MetricsReport) -> SummaryRow {
    SummaryRow {
        size,
        apl: r.apl,
        random_apl: r.random_apl,
        cc: r.cc,
        random_cc: r.random_cc,
    }
}

/// Reads a `summary.csv` written by [`cmd_sweep`].
pub fn read_summary_csv<R: std::io::Read>(input: R) -> Result<Vec<SummaryRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// Prints the two baseline lines. Fails when either value is undefined,
/// after printing whatever could be computed.
pub fn cmd_baseline<W: Write>(nodes: usize, edges: usize, out: &mut W) -> Result<()> {
    let cc = random_graph_cc(nodes, edges)?;
    let apl = random_graph_apl(nodes, edges);
    let io = |e| Error::io("<stdout>", e);
    match &apl {
        Ok(v) => writeln!(out, "apl {v}").map_err(io)?,
        Err(_) => writeln!(out, "apl undefined").map_err(io)?,
    }
    writeln!(out, "cc {cc}").map_err(io)?;
    apl.map(|_| ())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common } => {
            let cfg = common.resolve()?;
            let manifest = cmd_run(&cfg, &common.out)?;
            for a in &manifest.outputs {
                println!("wrote {}", a.path.display());
            }
            println!("wrote {}", common.out.join("manifest.json").display());
        }
        Command::Sweep { common, sizes } => {
            let cfg = common.resolve()?;
            for row in cmd_sweep(&cfg, &sizes, &common.out)? {
                let rnd = row
                    .random_apl
                    .map_or("undefined".to_string(), |v| format!("{v:.3}"));
                println!(
                    "size {:>5}  apl {:.3}  random-apl {rnd}  cc {:.4}  random-cc {:.4}",
                    row.size, row.apl, row.cc, row.random_cc
                );
            }
        }
        Command::Baseline { nodes, edges } => {
            cmd_baseline(nodes, edges, &mut std::io::stdout().lock())?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn main() -> ExitCode {
    main_with(std::env::args_os())
}
