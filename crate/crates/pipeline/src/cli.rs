use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{BasisChoice, OmegaChoice, PartialConfig, SolverChoice, SweepFile, Task};
use crate::error::{exit, PipelineError, Result};
use crate::manifest::Manifest;
use crate::sweep;

#[derive(Debug, Parser)]
#[command(
    name = "polariton",
    version,
    about = "Two-polariton spectra, butterflies and sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-excitation spectrum -> energies.csv
    SingleSpectrum(RunArgs),
    /// Two-excitation spectrum -> energies.csv
    TwoSpectrum(RunArgs),
    /// Cluster assignment of lower-panel states -> analysis.csv
    Analyze(RunArgs),
    /// Butterfly from exact two-polariton states -> butterfly.csv
    ButterflyExact(RunArgs),
    /// Self-AAH butterfly, one column with --j or all j -> butterfly_aah.csv
    ButterflyAah(RunArgs),
    /// Hofstadter butterfly of the Harper chain -> hofstadter.csv
    ButterflyHarper(RunArgs),
    /// Exact cluster j against the self-AAH levels -> compare.csv
    CompareFig3a(RunArgs),
    /// Entanglement entropy of every state -> entanglement.csv
    EntanglementMap(RunArgs),
    /// Run the items of a sweep file and merge their outputs
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config; flags override its keys
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub alpha_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k_y: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverChoice>,
    /// Iterative target as RE,IM
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub shift: Option<Vec<f64>>,
    /// Iterative: states per parity sector
    #[arg(long)]
    pub count: Option<usize>,
    /// Keep states with LO <= Re <= HI
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub basis: Option<BasisChoice>,
    #[arg(long, value_enum)]
    pub omega: Option<OmegaChoice>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Default: $POLARITON_WORKERS, then the CPU count
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub budget_mib: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sweep file with shared keys and [[item]] tables
    pub file: PathBuf,
    /// Output directory for the merged files [default: runs/sweep]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

fn pair(v: &Option<Vec<f64>>) -> Option<[f64; 2]> {
    v.as_ref().map(|v| [v[0], v[1]])
}

impl RunArgs {
    fn flags(&self, task: Task) -> PartialConfig {
        PartialConfig {
            task: Some(task),
            n: self.n,
            phi: self.phi,
            j: self.j,
            alpha_step: self.alpha_step,
            k_y: self.k_y,
            solver: self.solver,
            shift: pair(&self.shift),
            count: self.count,
            window: pair(&self.window),
            basis: self.basis,
            omega: self.omega,
            out: self.out.clone(),
            workers: self.workers,
            budget_mib: self.budget_mib,
        }
    }

    pub fn config(&self, task: Task) -> Result<PartialConfig> {
        let file = match &self.config {
            Some(p) => PartialConfig::from_file(p)?,
            None => PartialConfig::default(),
        };
        if file.task.is_some_and(|t| t != task) {
            return Err(PipelineError::Config(format!(
                "config file names a different task than `{}`",
                task.name()
            )));
        }
        Ok(self.flags(task).over(&file))
    }
}

fn run_sweep(args: &SweepArgs) -> Result<Manifest> {
    let file = SweepFile::from_file(&args.file)?;
    let items = file
        .items
        .iter()
        .map(|i| i.over(&file.defaults).resolve())
        .collect::<Result<Vec<_>>>()?;
    // Resolve the pool size with the same precedence as a single run.
    let pool = PartialConfig {
        task: Some(Task::TwoSpectrum),
        workers: args.workers.or(file.defaults.workers),
        ..PartialConfig::default()
    }
    .resolve()?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs/sweep"));
    sweep::sweep(&items, &out, pool.workers)
}

/// Runs a parsed command; returns the manifest or the error that decides the exit code.
pub fn dispatch(cli: &Cli) -> Result<Manifest> {
    let (task, args) = match &cli.command {
        Command::Sweep(a) => return run_sweep(a),
        Command::SingleSpectrum(a) => (Task::SingleSpectrum, a),
        Command::TwoSpectrum(a) => (Task::TwoSpectrum, a),
        Command::Analyze(a) => (Task::Analyze, a),
        Command::ButterflyExact(a) => (Task::ButterflyExact, a),
        Command::ButterflyAah(a) => (Task::ButterflyAah, a),
        Command::ButterflyHarper(a) => (Task::ButterflyHarper, a),
        Command::CompareFig3a(a) => (Task::CompareFig3a, a),
        Command::EntanglementMap(a) => (Task::EntanglementMap, a),
    };
    sweep::run(&args.config(task)?.resolve()?)
}

/// Entry point shared by the binary: parse, run, report, and map to an exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            };
        }
    };
    match dispatch(&cli) {
        Ok(m) => {
            for f in &m.files {
                match f.rows {
                    Some(r) => println!("{} ({r} rows) {}", f.path, f.sha256),
                    None => println!("{} {}", f.path, f.sha256),
                }
            }
            println!("done in {:.2} s", m.wall_seconds);
            exit::OK
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            e.exit_code()
        }
    }
}
