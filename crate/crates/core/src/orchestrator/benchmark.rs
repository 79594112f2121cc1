//! Sweeps of n samples per task with a shared, evolving knowledge store.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde_json::json;

use super::backend::ModelBackend;
use super::fsm::{run_sample, RunStatus, TaskRun};
use super::{OrchestratorError, RunConfig};
use crate::bench::{BenchmarkReport, BestDesign, TaskPack, TaskRow};
use crate::knowledge::{KnowledgeEntry, KnowledgeStore};
use crate::metrics::TierBoundaries;

#[derive(Clone, Debug)]
pub struct BenchmarkRun {
    pub report: BenchmarkReport,
    /// Sample runs, grouped by task in input order.
    pub runs: Vec<Vec<TaskRun>>,
}

/// Keep one candidate per function, the one with the best score.
fn dedup(patterns: Vec<KnowledgeEntry>) -> Vec<KnowledgeEntry> {
    let mut out: Vec<KnowledgeEntry> = Vec::new();
    for p in patterns {
        match out.iter_mut().find(|o| o.same_key(&p)) {
            Some(o) if p.sei() > o.sei() => *o = p,
            Some(_) => {}
            None => out.push(p),
        }
    }
    out
}

/// All samples of one task against a snapshot taken at task start; the
/// summarizer's entries are written once the samples are done.
fn run_one(
    task: &TaskPack,
    cfg: &RunConfig,
    backend: &dyn ModelBackend,
    store: &KnowledgeStore,
) -> Result<(TaskRow, Vec<TaskRun>), OrchestratorError> {
    let snap = store.snapshot();
    let mut runs = Vec::with_capacity(cfg.samples as usize);
    let mut patterns = Vec::new();
    for s in 0..cfg.samples {
        let out = run_sample(task, cfg, backend, &snap, s);
        patterns.extend(out.patterns);
        runs.push(out.run);
    }
    for p in dedup(patterns) {
        store.store(p)?;
    }

    let correct = runs.iter().filter(|r| r.status == RunStatus::Verified).count() as u32;
    let errors = runs.iter().filter(|r| r.status == RunStatus::Error).count() as u32;
    let best = runs
        .iter()
        .filter(|r| r.status == RunStatus::Verified)
        .filter_map(|r| r.eval.as_ref())
        .filter_map(|e| e.sei.map(|sei| BestDesign { gates: e.gates, delay: e.delay, sei }))
        .fold(None, |acc: Option<BestDesign>, d| match acc {
            Some(a) if a.sei >= d.sei => Some(a),
            _ => Some(d),
        });
    let mut row = TaskRow::new(task, cfg.samples, correct, errors, &cfg.pass_k, best)
        .map_err(|e| OrchestratorError::Config(e.to_string()))?;
    row.error = runs.iter().find_map(|r| r.error.clone());
    Ok((row, runs))
}

/// Run `cfg.samples` independent samples of every task and aggregate.
/// Per-task failures land in the report instead of stopping the sweep.
pub fn run_benchmark(
    tasks: &[TaskPack],
    cfg: &RunConfig,
    backend: &dyn ModelBackend,
    store: &KnowledgeStore,
) -> Result<BenchmarkRun, OrchestratorError> {
    cfg.validate()?;
    if tasks.is_empty() {
        return Err(OrchestratorError::NoTasks);
    }
    let start = Instant::now();
    let results: Vec<Mutex<Option<Result<(TaskRow, Vec<TaskRun>), OrchestratorError>>>> =
        tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(task) = tasks.get(i) else { break };
        log::info!("task {} ({}/{})", task.id, i + 1, tasks.len());
        let r = run_one(task, cfg, backend, store);
        *results[i].lock().unwrap_or_else(|p| p.into_inner()) = Some(r);
    };
    let workers = cfg.workers.min(tasks.len());
    if workers <= 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }

    let mut rows = Vec::with_capacity(tasks.len());
    let mut runs = Vec::with_capacity(tasks.len());
    for (task, slot) in tasks.iter().zip(results) {
        match slot.into_inner().unwrap_or_else(|p| p.into_inner()).expect("every task ran") {
            Ok((row, r)) => {
                rows.push(row);
                runs.push(r);
            }
            Err(e) => {
                log::error!("task {}: {e}", task.id);
                let mut row = TaskRow::new(task, cfg.samples, 0, cfg.samples, &cfg.pass_k, None)
                    .map_err(|e| OrchestratorError::Config(e.to_string()))?;
                row.error = Some(e.to_string());
                rows.push(row);
                runs.push(Vec::new());
            }
        }
    }

    let config = json!({
        "run": cfg,
        "backend_label": backend.label(),
        "profile": cfg.profile().map(|p| p.to_string()),
        "tasks": tasks.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(),
    });
    let mut report = BenchmarkReport::from_rows(rows, config, cfg.weights, TierBoundaries::default())?;
    if cfg.record_timing {
        report.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(BenchmarkRun { report, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{seed_task, seed_tasks, RowStatus};
    use crate::orchestrator::ScriptedBackend;

    fn cfg(samples: u32) -> RunConfig {
        RunConfig {
            samples,
            pass_k: vec![1],
            ..RunConfig::default()
        }
    }

    #[test]
    fn rows_and_aggregates() {
        let tasks = vec![seed_task("mux2").unwrap(), seed_task("xnor2").unwrap()];
        let backend = ScriptedBackend::reference(&tasks[..1]);
        let store = KnowledgeStore::in_memory();
        let run = run_benchmark(&tasks, &cfg(4), &backend, &store).unwrap();
        let r = &run.report;
        assert_eq!(r.rows[0].status, RowStatus::Solved);
        assert_eq!(r.rows[1].status, RowStatus::Unsolved);
        assert_eq!(r.rows[0].pass_at_k[&1], 1.0);
        assert_eq!(r.rows[1].pass_at_k[&1], 0.0);
        assert_eq!(r.overall.pass_at_k[&1], 0.5);
        r.check_consistency().unwrap();
        assert_eq!(run.runs[0].len(), 4);
    }

    #[test]
    fn store_grows_after_each_task_and_parallel_matches_serial() {
        let tasks = seed_tasks();
        let backend = ScriptedBackend::reference(&tasks);
        let serial_store = KnowledgeStore::in_memory();
        let serial = run_benchmark(&tasks, &cfg(2), &backend, &serial_store).unwrap();
        assert!(serial.report.rows.iter().all(|r| r.status == RowStatus::Solved));
        assert!(serial_store.primary_count() > tasks.len());

        let par_store = KnowledgeStore::in_memory();
        let par_cfg = RunConfig { workers: 4, ..cfg(2) };
        let par = run_benchmark(&tasks, &par_cfg, &backend, &par_store).unwrap();
        assert_eq!(par.report.rows, serial.report.rows);
    }

    #[test]
    fn empty_task_list_is_rejected() {
        let b = ScriptedBackend::sequence(vec!["x".into()]);
        assert!(matches!(
            run_benchmark(&[], &cfg(1), &b, &KnowledgeStore::in_memory()),
            Err(OrchestratorError::NoTasks)
        ));
    }
}
