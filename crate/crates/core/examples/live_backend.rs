//! Solve one task with a live chat-completion endpoint.
//!
//! Needs GATESMITH_API_KEY and optionally GATESMITH_ENDPOINT / GATESMITH_MODEL;
//! without a key it prints what it would do and exits.

use gatesmith::bench::seed_task;
use gatesmith::knowledge::KnowledgeStore;
use gatesmith::orchestrator::{run_task, BackendKind, HttpBackend, ModelBackend, RunConfig, API_KEY_ENV};

fn main() {
    env_logger::init();
    let mut cfg = RunConfig::default();
    cfg.backend.kind = BackendKind::Http;
    if let Ok(e) = std::env::var("GATESMITH_ENDPOINT") {
        cfg.backend.endpoint = e;
    }
    if let Ok(m) = std::env::var("GATESMITH_MODEL") {
        cfg.backend.model = m;
    }
    let task_id = std::env::args().nth(1).unwrap_or_else(|| "mux2".into());
    let task = seed_task(&task_id).expect("unknown seed task");
    if std::env::var(API_KEY_ENV).is_err() {
        println!("{API_KEY_ENV} is not set; would send {task_id} to {} ({})", cfg.backend.endpoint, cfg.backend.model);
        return;
    }
    let backend = HttpBackend::from_config(&cfg.backend).expect("backend config");
    let store = KnowledgeStore::in_memory();
    store.seed_baseline().unwrap();
    match run_task(&task, &cfg, &backend, &store) {
        Ok(run) => {
            println!("{} via {}: {:?} after {} revision(s)", task.id, backend.label(), run.status, run.revisions_used);
            if let Some(n) = run.final_netlist {
                println!("{n}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
}
