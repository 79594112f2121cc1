//! Retrieval ablation on a constructed fixture: the scripted coder can only
//! copy a retrieved design, so it succeeds exactly when design retrieval is
//! on.

use gatesmith::bench::seed_task;
use gatesmith::knowledge::KnowledgeStore;
use gatesmith::orchestrator::{run_sample, Ablation, ChatMessage, RunConfig, ScriptedBackend, RETRIEVED_MARKER};

fn copycat() -> ScriptedBackend {
    ScriptedBackend::new("copycat", |msgs: &[ChatMessage]| {
        let prompt = &msgs[1].content;
        prompt
            .split(RETRIEVED_MARKER)
            .skip(1)
            .filter_map(|s| Some(&s[s.find("```verilog")?..s.find("endmodule")? + "endmodule".len()]))
            .find(|block| block.contains("module full_adder("))
            .map(|block| format!("{block}\n```"))
            .unwrap_or_else(|| "I am not sure how to build this.".into())
    })
}

fn main() {
    let task = seed_task("full_adder").unwrap();
    let store = KnowledgeStore::in_memory();
    store.seed_baseline().unwrap();
    let snap = store.snapshot();
    for profile in [Ablation::V0, Ablation::V1, Ablation::V2] {
        let cfg = RunConfig::default().with_profile(profile);
        let run = run_sample(&task, &cfg, &copycat(), &snap, 0).run;
        println!(
            "{profile}: design_rag={} review_rag={} -> {:?} after {} revision(s)",
            cfg.design_rag, cfg.review_rag, run.status, run.revisions_used
        );
    }
}
