//! One function per task. Each takes a resolved config and returns tables plus
//! a small JSON summary; nothing here touches the filesystem.

use std::collections::{BTreeMap, HashSet};

use polariton_core::aah::{
    cluster_bandwidth, compare_levels, hofstadter_butterfly, self_aah_spectrum,
    semianalytic_butterfly, semianalytic_column, SelfAahParams,
};
use polariton_core::analysis::{
    assemble_butterfly, cluster_views, entanglement_row, Analyzer, ButterflyOptions,
    ClusterAssignment, Confidence,
};
use polariton_core::two_polariton::{eigensolve_two, TwoPolaritonSpectrum};
use polariton_core::{build_single_hamiltonian, eigensolve_single, Error as CoreError};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::error::Result;
use crate::output::{cell, Table};

pub const ENERGIES: &[&str] = &["state_id", "re_energy", "im_energy"];
pub const ANALYSIS: &[&str] = &[
    "state_id",
    "j",
    "k_max",
    "parity",
    "entropy",
    "ipr_loc",
    "is_edge",
    "confidence",
];
pub const BUTTERFLY: &[&str] = &["flux", "energy_aligned", "localization", "is_edge"];
pub const BUTTERFLY_AAH: &[&str] = &["flux", "j", "energy", "energy_aligned", "dos_log10"];
pub const HOFSTADTER: &[&str] = &["alpha", "energy", "ipr"];
pub const COMPARE: &[&str] = &["rank", "energy_exact", "energy_aah", "rel_dev"];
pub const ENTANGLEMENT: &[&str] = &["state_id", "re_energy", "im_energy", "entropy", "ipr"];

/// Levels over which the headline deviation of `compare-fig3a` is taken.
pub const COMPARE_TOP: usize = 30;

#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Value>,
}

pub fn execute(cfg: &RunConfig) -> Result<TaskOutput> {
    match cfg.task {
        Task::SingleSpectrum => single_spectrum(cfg),
        Task::TwoSpectrum => two_spectrum(cfg),
        Task::Analyze => analyze(cfg),
        Task::ButterflyExact => butterfly_exact(cfg),
        Task::ButterflyAah => butterfly_aah(cfg),
        Task::ButterflyHarper => butterfly_harper(cfg),
        Task::CompareFig3a => compare_fig3a(cfg),
        Task::EntanglementMap => entanglement_map(cfg),
    }
}

fn single_spectrum(cfg: &RunConfig) -> Result<TaskOutput> {
    let modes = eigensolve_single(&build_single_hamiltonian(&cfg.params()?))?;
    let mut t = Table::new("energies.csv", ENERGIES);
    for (i, m) in modes.iter().enumerate() {
        let e = m.energy;
        if cfg
            .window
            .map_or(true, |[lo, hi]| lo <= e.re() && e.re() <= hi)
        {
            t.push(vec![cell(i), cell(e.re()), cell(e.im())]);
        }
    }
    let mut out = TaskOutput::default();
    out.summary.insert("states".into(), json!(t.rows.len()));
    out.tables.push(t);
    Ok(out)
}

fn solve_two(cfg: &RunConfig) -> Result<TwoPolaritonSpectrum> {
    Ok(eigensolve_two(&cfg.params()?, &cfg.solve_options())?)
}

fn energies_table(s: &TwoPolaritonSpectrum) -> Table {
    let mut t = Table::new("energies.csv", ENERGIES);
    for i in 0..s.len() {
        let e = s.energy(i);
        t.push(vec![cell(i), cell(e.re()), cell(e.im())]);
    }
    t
}

fn two_spectrum(cfg: &RunConfig) -> Result<TaskOutput> {
    let s = solve_two(cfg)?;
    let mut out = TaskOutput::default();
    out.summary.insert("states".into(), json!(s.len()));
    out.tables.push(energies_table(&s));
    Ok(out)
}

/// Cluster assignment of every lower-panel state, in spectrum order.
fn lower_panel(cfg: &RunConfig, s: &TwoPolaritonSpectrum) -> Result<Vec<ClusterAssignment>> {
    let analyzer = Analyzer::new(&cfg.params()?, cfg.basis());
    let rows: std::result::Result<Vec<_>, CoreError> = (0..s.len())
        .into_par_iter()
        .filter(|&i| s.energy(i).re() < 0.0)
        .map(|i| analyzer.assign(i, &s.state(i)))
        .collect();
    Ok(rows?)
}

fn analyze(cfg: &RunConfig) -> Result<TaskOutput> {
    let s = solve_two(cfg)?;
    let assignments = lower_panel(cfg, &s)?;
    let edges: HashSet<usize> = cluster_views(&assignments, cfg.n, &ButterflyOptions::default())
        .iter()
        .flat_map(|v| {
            v.members
                .iter()
                .zip(&v.is_edge)
                .filter(|(_, &e)| e)
                .map(|(&i, _)| assignments[i].state_id)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut t = Table::new("analysis.csv", ANALYSIS);
    for a in &assignments {
        t.push(vec![
            cell(a.state_id),
            cell(a.j),
            cell(a.k_max),
            cell(a.parity.as_str()),
            cell(a.entropy),
            cell(a.ipr_loc),
            cell(edges.contains(&a.state_id)),
            cell(a.confidence.as_str()),
        ]);
    }
    let low = assignments
        .iter()
        .filter(|a| a.confidence == Confidence::Low)
        .count();
    let mut out = TaskOutput::default();
    out.summary.insert("states".into(), json!(s.len()));
    out.summary
        .insert("lower_panel".into(), json!(assignments.len()));
    out.summary.insert("low_confidence".into(), json!(low));
    out.summary.insert("edge_states".into(), json!(edges.len()));
    out.tables.push(t);
    Ok(out)
}

fn butterfly_exact(cfg: &RunConfig) -> Result<TaskOutput> {
    let s = solve_two(cfg)?;
    let assignments = lower_panel(cfg, &s)?;
    let b = assemble_butterfly(&assignments, cfg.n, &ButterflyOptions::default());
    let mut t = Table::new("butterfly.csv", BUTTERFLY);
    for p in &b.points {
        t.push(vec![
            cell(p.flux),
            cell(p.energy_aligned),
            cell(p.localization),
            cell(p.is_edge),
        ]);
    }
    let mut out = TaskOutput::default();
    out.summary.insert("points".into(), json!(b.points.len()));
    out.summary
        .insert("skipped_clusters".into(), json!(b.skipped));
    out.tables.push(t);
    Ok(out)
}

fn butterfly_aah(cfg: &RunConfig) -> Result<TaskOutput> {
    let model = cfg.params()?;
    let points = match cfg.j {
        Some(j) => {
            let p = SelfAahParams::new(model, j)?.with_omega_mode(cfg.omega_mode());
            semianalytic_column(&self_aah_spectrum(&p)?, cfg.n)
        }
        None => semianalytic_butterfly(&model, cfg.omega_mode())?,
    };
    let mut t = Table::new("butterfly_aah.csv", BUTTERFLY_AAH);
    for p in &points {
        t.push(vec![
            cell(p.flux),
            cell(p.j),
            cell(p.energy),
            cell(p.energy_aligned),
            cell(p.dos_color()),
        ]);
    }
    let mut out = TaskOutput::default();
    out.summary.insert("points".into(), json!(points.len()));
    out.tables.push(t);
    Ok(out)
}

fn butterfly_harper(cfg: &RunConfig) -> Result<TaskOutput> {
    let points = hofstadter_butterfly(cfg.n, cfg.alpha_step, cfg.k_y)?;
    let mut t = Table::new("hofstadter.csv", HOFSTADTER);
    for p in &points {
        t.push(vec![cell(p.alpha), cell(p.energy), cell(p.ipr)]);
    }
    let mut out = TaskOutput::default();
    out.summary.insert("points".into(), json!(points.len()));
    out.tables.push(t);
    Ok(out)
}

fn compare_fig3a(cfg: &RunConfig) -> Result<TaskOutput> {
    let j = cfg.j.expect("resolved config carries j");
    let model = cfg.params()?;
    let s = solve_two(cfg)?;
    let mut exact: Vec<f64> = lower_panel(cfg, &s)?
        .iter()
        .filter(|a| a.j == j && a.confidence != Confidence::Low)
        .map(|a| a.energy.re())
        .collect();
    exact.sort_by(|a, b| b.total_cmp(a));
    let p = SelfAahParams::new(model, j)?.with_omega_mode(cfg.omega_mode());
    let aah = self_aah_spectrum(&p)?.descending();
    let modes = eigensolve_single(&build_single_hamiltonian(&model))?;
    let mode_re = |idx: usize| {
        modes
            .iter()
            .find(|m| m.index_j == idx)
            .map(|m| m.energy.re())
            .ok_or(CoreError::MissingMode(idx))
    };
    let top = *exact.first().ok_or_else(|| {
        CoreError::InvalidParams(format!("no exact states assigned to cluster j = {j}"))
    })?;
    let bandwidth = cluster_bandwidth(top, mode_re(j)?, mode_re(j + 1)?);
    let count = exact.len().min(aah.len());
    let rows = compare_levels(&exact, &aah, count, bandwidth)?;
    let mut t = Table::new("compare.csv", COMPARE);
    for r in &rows {
        t.push(vec![
            cell(r.rank),
            cell(r.energy_exact),
            cell(r.energy_aah),
            cell(r.rel_dev),
        ]);
    }
    let worst = |k: usize| rows.iter().take(k).map(|r| r.rel_dev).fold(0.0, f64::max);
    let mut out = TaskOutput::default();
    out.summary.insert("j".into(), json!(j));
    out.summary.insert("bandwidth".into(), json!(bandwidth));
    out.summary.insert("levels_compared".into(), json!(count));
    out.summary
        .insert("max_rel_dev".into(), json!(worst(count)));
    out.summary.insert(
        format!("max_rel_dev_top{COMPARE_TOP}"),
        json!(worst(COMPARE_TOP.min(count))),
    );
    out.tables.push(t);
    Ok(out)
}

fn entanglement_map(cfg: &RunConfig) -> Result<TaskOutput> {
    let s = solve_two(cfg)?;
    let rows: std::result::Result<Vec<_>, CoreError> = (0..s.len())
        .into_par_iter()
        .map(|i| entanglement_row(i, &s.state(i)))
        .collect();
    let mut t = Table::new("entanglement.csv", ENTANGLEMENT);
    for r in rows? {
        t.push(vec![
            cell(r.state_id),
            cell(r.energy.re()),
            cell(r.energy.im()),
            cell(r.entropy),
            cell(r.ipr),
        ]);
    }
    let mut out = TaskOutput::default();
    out.summary.insert("states".into(), json!(s.len()));
    out.tables.push(t);
    Ok(out)
}
