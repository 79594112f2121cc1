//! A benchmark sweep over the shipped seed tasks with the offline
//! reference backend, printed as tables and checked for self-consistency.

use gatesmith::bench::{emit_report, seed_tasks, BenchmarkReport, ReportFormat};
use gatesmith::knowledge::KnowledgeStore;
use gatesmith::orchestrator::{run_benchmark, RunConfig, ScriptedBackend};

fn main() {
    let tasks = seed_tasks();
    let cfg = RunConfig {
        samples: 5,
        pass_k: vec![1, 5],
        ..RunConfig::default()
    };
    let store = KnowledgeStore::in_memory();
    let backend = ScriptedBackend::reference(&tasks);
    let run = run_benchmark(&tasks, &cfg, &backend, &store).unwrap();
    print!("{}", emit_report(&run.report, ReportFormat::Table));

    let json = emit_report(&run.report, ReportFormat::Json);
    let back = BenchmarkReport::from_json(&json).unwrap();
    back.check_consistency().unwrap();
    println!("\nresults JSON: {} bytes, round-trips and re-aggregates exactly", json.len());
    println!("store grew to {} entries ({} primary)", store.len(), store.primary_count());
}
