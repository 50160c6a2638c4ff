//! Run configuration: TOML file, command-line flags and defaults.
//!
//! Precedence is flag, then file, then default. The worker count falls back to
//! the `POLARITON_WORKERS` environment variable and then to the CPU count.
//!
//! Keys in a config file (all optional):
//!
//! ```toml
//! n = 125
//! phi = 0.02
//! j = 11                 # compare-fig3a, butterfly-aah (single column)
//! alpha_step = 0.00125   # butterfly-harper, default 1/(4N)
//! k_y = 0.0
//! solver = "dense"       # or "iterative"
//! shift = [-0.64, 0.0]   # iterative target, per-excitation energy
//! count = 40             # iterative: states per parity sector
//! window = [-1.0, 0.0]   # keep states with Re in [lo, hi]
//! basis = "atomic"       # or "transformed"
//! omega = "exact"        # or "analytic"
//! out = "runs/fig2"
//! workers = 4
//! budget_mib = 4096
//! ```

use std::path::{Path, PathBuf};

use polariton_core::aah::OmegaMode;
use polariton_core::analysis::AnalysisBasis;
use polariton_core::params::DEFAULT_BUDGET_BYTES;
use polariton_core::two_polariton::{SolveOptions, SolverMode};
use polariton_core::{MemoryBudget, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

pub const WORKERS_ENV: &str = "POLARITON_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    SingleSpectrum,
    TwoSpectrum,
    Analyze,
    ButterflyExact,
    ButterflyAah,
    ButterflyHarper,
    CompareFig3a,
    EntanglementMap,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::SingleSpectrum => "single-spectrum",
            Task::TwoSpectrum => "two-spectrum",
            Task::Analyze => "analyze",
            Task::ButterflyExact => "butterfly-exact",
            Task::ButterflyAah => "butterfly-aah",
            Task::ButterflyHarper => "butterfly-harper",
            Task::CompareFig3a => "compare-fig3a",
            Task::EntanglementMap => "entanglement-map",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    #[default]
    Atomic,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaChoice {
    #[default]
    Exact,
    Analytic,
}

/// Every key optional; one of these comes from the file and one from the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub task: Option<Task>,
    pub n: Option<usize>,
    pub phi: Option<f64>,
    pub j: Option<usize>,
    pub alpha_step: Option<f64>,
    pub k_y: Option<f64>,
    pub solver: Option<SolverChoice>,
    pub shift: Option<[f64; 2]>,
    pub count: Option<usize>,
    pub window: Option<[f64; 2]>,
    pub basis: Option<BasisChoice>,
    pub omega: Option<OmegaChoice>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub budget_mib: Option<u64>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        PartialConfig { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)* }
    };
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::ConfigFile {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(&self, base: &PartialConfig) -> PartialConfig {
        overlay!(
            self, base, task, n, phi, j, alpha_step, k_y, solver, shift, count, window, basis,
            omega, out, workers, budget_mib
        )
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let task = self
            .task
            .ok_or_else(|| PipelineError::Config("no task given".into()))?;
        let n = self.n.unwrap_or(125);
        let phi = self.phi.unwrap_or(0.02);
        ModelParams::new(n, phi)?;
        let workers = match self.workers {
            Some(w) => w,
            None => env_workers()?.unwrap_or_else(default_workers),
        };
        if workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if let Some(s) = self.alpha_step {
            if !(s > 0.0 && s <= 1.0) {
                return Err(PipelineError::Config(format!(
                    "alpha_step {s} is outside (0, 1]"
                )));
            }
        }
        if task == Task::CompareFig3a && self.j.is_none() {
            return Err(PipelineError::Config("compare-fig3a needs j".into()));
        }
        if let Some(j) = self.j {
            if j < 1 || j + 1 >= n + usize::from(task != Task::CompareFig3a) {
                return Err(PipelineError::Config(format!("j = {j} is outside 1..{n}")));
            }
        }
        let solver = self.solver.unwrap_or_default();
        if solver == SolverChoice::Iterative && (self.shift.is_none() || self.count.is_none()) {
            return Err(PipelineError::Config(
                "the iterative solver needs shift and count".into(),
            ));
        }
        if let Some([lo, hi]) = self.window {
            if !(lo <= hi) {
                return Err(PipelineError::Config(format!(
                    "window [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(RunConfig {
            task,
            n,
            phi,
            j: self.j,
            alpha_step: self.alpha_step.unwrap_or(1.0 / (4 * n) as f64),
            k_y: self.k_y.unwrap_or(0.0),
            solver,
            shift: self.shift,
            count: self.count,
            window: self.window,
            basis: self.basis.unwrap_or_default(),
            omega: self.omega.unwrap_or_default(),
            out: self
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("runs").join(task.name())),
            workers,
            budget_mib: self.budget_mib.unwrap_or(DEFAULT_BUDGET_BYTES >> 20),
        })
    }
}

fn env_workers() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| PipelineError::Config(format!("{WORKERS_ENV}={v} is not a count"))),
        Err(_) => Ok(None),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub task: Task,
    pub n: usize,
    pub phi: f64,
    pub j: Option<usize>,
    pub alpha_step: f64,
    pub k_y: f64,
    pub solver: SolverChoice,
    pub shift: Option<[f64; 2]>,
    pub count: Option<usize>,
    pub window: Option<[f64; 2]>,
    pub basis: BasisChoice,
    pub omega: OmegaChoice,
    pub out: PathBuf,
    pub workers: usize,
    pub budget_mib: u64,
}

/// Sort key for merging sweep items; floats compare through their bit patterns,
/// which order like the values for the non-negative parameters used here.
pub type TaskKey = (Task, usize, u64, Option<usize>, u64, u64);

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.n, self.phi)?)
    }

    pub fn key(&self) -> TaskKey {
        (
            self.task,
            self.n,
            self.phi.to_bits(),
            self.j,
            self.alpha_step.to_bits(),
            self.k_y.abs().to_bits(),
        )
    }

    pub fn label(&self) -> String {
        let mut s = format!("{} n={} phi={}", self.task.name(), self.n, self.phi);
        if let Some(j) = self.j {
            s += &format!(" j={j}");
        }
        s
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mode = match (self.solver, self.shift, self.count) {
            (SolverChoice::Iterative, Some([re, im]), Some(count)) => SolverMode::Iterative {
                shift: num_complex::Complex64::new(re, im),
                count,
            },
            _ => SolverMode::Dense,
        };
        SolveOptions {
            mode,
            window: self.window.map(|[lo, hi]| (lo, hi)),
            budget: MemoryBudget::from_mib(self.budget_mib),
            ..SolveOptions::default()
        }
    }

    pub fn basis(&self) -> AnalysisBasis {
        match self.basis {
            BasisChoice::Atomic => AnalysisBasis::Atomic,
            BasisChoice::Transformed => AnalysisBasis::Transformed,
        }
    }

    pub fn omega_mode(&self) -> OmegaMode {
        match self.omega {
            OmegaChoice::Exact => OmegaMode::Exact,
            OmegaChoice::Analytic => OmegaMode::Analytic,
        }
    }
}

/// A sweep file: shared defaults at the top level and one `[[item]]` per run.
///
/// An item may carry `j_range = [lo, hi]`, which expands into one item per `j`
/// in the inclusive range.
///
/// ```toml
/// n = 200
/// workers = 8
///
/// [[item]]
/// task = "butterfly-aah"
/// j_range = [1, 199]
///
/// [[item]]
/// task = "two-spectrum"
/// n = 40
/// ```
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepFile {
    pub defaults: PartialConfig,
    pub items: Vec<PartialConfig>,
}

impl SweepFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let bad = |e: String| PipelineError::Config(e);
        let mut top: toml::Table = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let raw_items = match top.remove("item") {
            None => Vec::new(),
            Some(toml::Value::Array(a)) => a,
            Some(_) => return Err(bad("`item` must be an array of tables".into())),
        };
        let defaults: PartialConfig = toml::Value::Table(top)
            .try_into()
            .map_err(|e: toml::de::Error| bad(e.to_string()))?;
        let mut items = Vec::new();
        for (k, raw) in raw_items.into_iter().enumerate() {
            let toml::Value::Table(mut t) = raw else {
                return Err(bad(format!("item {k} is not a table")));
            };
            let range = t.remove("j_range");
            let item: PartialConfig = toml::Value::Table(t)
                .try_into()
                .map_err(|e: toml::de::Error| bad(format!("item {k}: {e}")))?;
            match range {
                None => items.push(item),
                Some(r) => {
                    let [lo, hi]: [usize; 2] = r
                        .try_into()
                        .map_err(|e: toml::de::Error| bad(format!("item {k}: j_range: {e}")))?;
                    if item.j.is_some() || lo > hi {
                        return Err(bad(format!("item {k}: bad j_range [{lo}, {hi}]")));
                    }
                    items.extend((lo..=hi).map(|j| PartialConfig {
                        j: Some(j),
                        ..item.clone()
                    }));
                }
            }
        }
        Ok(Self { defaults, items })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::ConfigFile {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }
}
