//! Batch execution. Items run on a private rayon pool; results come back as
//! values and are merged on the calling thread in task-key order, so the merged
//! files do not depend on the worker count or on completion order.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};
use crate::manifest::{Failure, ItemRecord, Manifest};
use crate::output::Table;
use crate::plot::write_plot_script;
use crate::tasks::execute;

/// Outcome of a batch: the manifest (already written) and the error of every
/// failed item, by position in `items`.
pub struct BatchResult {
    pub manifest: Manifest,
    pub errors: Vec<(usize, PipelineError)>,
}

pub fn run_batch(items: &[RunConfig], out: &Path, workers: usize) -> Result<BatchResult> {
    polariton_core::use_sequential_linalg();
    let clock = Instant::now();
    let mut manifest = Manifest::new(workers);
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<_>> = pool.install(|| items.par_iter().map(execute).collect());

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].key(), i));
    let mut merged: BTreeMap<&'static str, Table> = BTreeMap::new();
    let mut errors = Vec::new();
    let mut results: Vec<Option<Result<_>>> = results.into_iter().map(Some).collect();
    for i in order {
        let cfg = &items[i];
        manifest
            .config
            .push(serde_json::to_value(cfg).expect("config serializes"));
        match results[i].take().expect("each result is taken once") {
            Ok(output) => {
                for t in output.tables {
                    match merged.get_mut(t.file) {
                        Some(m) => m.extend(t)?,
                        None => {
                            merged.insert(t.file, t);
                        }
                    }
                }
                manifest.items.push(ItemRecord {
                    label: cfg.label(),
                    ok: true,
                    summary: output.summary,
                });
            }
            Err(e) => {
                manifest.failures.push(Failure::new(i, cfg.label(), &e));
                manifest.items.push(ItemRecord {
                    label: cfg.label(),
                    ok: false,
                    summary: BTreeMap::new(),
                });
                errors.push((i, e));
            }
        }
    }
    for t in merged.values() {
        manifest.files.push(t.write(out)?);
    }
    if !manifest.files.is_empty() {
        manifest.files.push(write_plot_script(out)?);
    }
    manifest.finish(clock.elapsed().as_secs_f64());
    manifest.write(out)?;
    errors.sort_by_key(|(i, _)| *i);
    Ok(BatchResult { manifest, errors })
}

/// A single run. Its manifest is written even when the task fails.
pub fn run(cfg: &RunConfig) -> Result<Manifest> {
    let mut batch = run_batch(std::slice::from_ref(cfg), &cfg.out, cfg.workers)?;
    match batch.errors.pop() {
        Some((_, e)) => Err(e),
        None => Ok(batch.manifest),
    }
}

/// A sweep; fails with [`PipelineError::Partial`] if any item failed.
pub fn sweep(items: &[RunConfig], out: &Path, workers: usize) -> Result<Manifest> {
    let batch = run_batch(items, out, workers)?;
    if batch.errors.is_empty() {
        Ok(batch.manifest)
    } else {
        Err(PipelineError::Partial {
            failed: batch.errors.len(),
            total: items.len(),
        })
    }
}
