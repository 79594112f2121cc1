//! Per-sample agent workflow as an explicit state machine.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::backend::ModelBackend;
use super::prompt::{build_prompt, compose_feedback, AgentRole, Attempt, Finding, PromptContext, ReviewNotes};
use super::{OrchestratorError, RunConfig, SamplingParams};
use crate::bench::{evaluate, CircuitClass, EvalError, EvalResult, TaskPack};
use crate::boolopt::suggest_optimizations;
use crate::knowledge::{
    extract_patterns, EntryKind, ExtractContext, InterfaceShape, KnowledgeEntry, KnowledgeStore, QueryMode,
    RetrievalQuery, StoreSnapshot,
};
use crate::metrics::{dual_reward, DualReward, Verdict};
use crate::netlist::{Netlist, StructuralReport};
use crate::parser::{extract_netlist_block, parse, SourceText};
use crate::sim::{simulate, SimOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadKind {
    Spec,
    NetlistCandidate,
    StaticReview,
    SimResult,
    EfficiencyReview,
    FixRequest,
    Accept,
    Abort,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Attachments {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub netlist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<DualReward>,
    /// Ids of retrieved knowledge entries.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub retrieved: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentMessage {
    pub sender: AgentRole,
    pub recipient: AgentRole,
    pub turn: u32,
    pub kind: PayloadKind,
    pub body: String,
    #[serde(default)]
    pub attachments: Attachments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Verified,
    Failed,
    /// The backend failed or a final check broke.
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRun {
    pub task_id: String,
    pub sample: u32,
    pub status: RunStatus,
    pub revisions_used: u32,
    pub final_netlist: Option<String>,
    pub eval: Option<EvalResult>,
    pub reward: Option<DualReward>,
    pub transcript: Vec<AgentMessage>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall: Duration,
}

#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub run: TaskRun,
    /// Entries the summarizer extracted; not yet stored.
    pub patterns: Vec<KnowledgeEntry>,
}

/// Message log where every hop passes through the mediator.
struct Transcript {
    messages: Vec<AgentMessage>,
}

impl Transcript {
    fn push(&mut self, sender: AgentRole, recipient: AgentRole, kind: PayloadKind, body: &str, att: &Attachments) {
        let turn = self.messages.len() as u32;
        self.messages.push(AgentMessage {
            sender,
            recipient,
            turn,
            kind,
            body: body.to_owned(),
            attachments: att.clone(),
        });
    }

    fn send(&mut self, from: AgentRole, to: AgentRole, kind: PayloadKind, body: &str, att: Attachments) {
        if from == AgentRole::Mediator || to == AgentRole::Mediator {
            self.push(from, to, kind, body, &att);
        } else {
            self.push(from, AgentRole::Mediator, kind, body, &att);
            self.push(AgentRole::Mediator, to, kind, body, &att);
        }
    }
}

/// Templated user-proxy output.
fn formalize(task: &TaskPack) -> String {
    let names = |ports: Vec<String>| ports.join(", ");
    let inputs = names(task.interface.inputs().map(|p| p.header()).collect());
    let outputs = names(task.interface.outputs().map(|p| p.header()).collect());
    format!(
        "Goal: {}\nInputs: {inputs}\nOutputs: {outputs}\nBehavior:\n{}",
        task.title,
        task.spec.trim()
    )
}

fn classify(task: &TaskPack) -> CircuitClass {
    if task.interface.clock().is_some() {
        CircuitClass::Sequential
    } else {
        CircuitClass::Combinational
    }
}

/// Circuit patterns for the coder: tag matches first, then same-interface
/// designs, without repeats.
fn retrieve_designs(task: &TaskPack, snap: &StoreSnapshot, limit: usize) -> Vec<KnowledgeEntry> {
    let by_tags = RetrievalQuery::new(
        QueryMode::ByTags {
            tags: task.tags.clone(),
        },
        limit,
    );
    let by_iface = RetrievalQuery::new(
        QueryMode::ByInterface {
            interface: InterfaceShape::of_interface(&task.interface),
        },
        limit,
    );
    let mut out: Vec<KnowledgeEntry> = Vec::new();
    for e in snap.retrieve(&by_tags).into_iter().chain(snap.retrieve(&by_iface)) {
        if e.kind == EntryKind::CircuitPattern && !out.iter().any(|o| o.id == e.id) {
            out.push(e);
        }
    }
    // Whole designs before harvested fragments; stable within each group.
    out.sort_by_key(|e| e.tags.iter().any(|t| t == "subcircuit"));
    out.truncate(limit);
    out
}

/// Reviewer gate: extraction, parsing and interface conformance.
fn static_review(task: &TaskPack, reply: &str) -> Result<(String, Netlist), (Option<String>, Finding)> {
    let Some(block) = extract_netlist_block(reply) else {
        return Err((
            None,
            Finding::Static {
                class: "syntax".into(),
                errors: vec!["no `module ... endmodule` block found in the reply".into()],
            },
        ));
    };
    match parse(&SourceText::new(block.clone(), "candidate")) {
        Err(errs) => {
            let class = errs.first().map_or("syntax", |e| e.class.as_str()).to_owned();
            let errors = errs.iter().map(|e| e.to_string()).collect();
            Err((Some(block), Finding::Static { class, errors }))
        }
        Ok(n) => match task.interface.check(&n) {
            Err(e) => Err((
                Some(block),
                Finding::Static {
                    class: "interface-mismatch".into(),
                    errors: vec![e.to_string()],
                },
            )),
            Ok(()) => Ok((block, n)),
        },
    }
}

fn functional_finding(task: &TaskPack, eval: &EvalResult) -> Finding {
    let failing_inputs = eval
        .first_failure
        .as_ref()
        .and_then(|f| task.testbench.vectors.get(f.vector))
        .map(|v| {
            v.inputs
                .iter()
                .map(|(bit, val)| format!("{bit}={}", *val as u8))
                .collect()
        })
        .unwrap_or_default();
    Finding::Functional {
        correctness: eval.correctness,
        passed: eval.passed,
        failed: eval.failed,
        first_failure: eval.first_failure.clone(),
        failing_inputs,
    }
}

fn reward_of(task: &TaskPack, eval: &EvalResult, cfg: &RunConfig) -> DualReward {
    let outcome = SimOutcome {
        passed: eval.passed,
        failed: eval.failed,
        first_failure: eval.first_failure.clone(),
        correctness: eval.correctness,
    };
    let report = StructuralReport {
        gate_count: eval.gates,
        delay: eval.delay,
        register_count: eval.registers,
    };
    dual_reward(&outcome, &report, task.reference_sei(), &cfg.weights)
}

/// Independent end-to-end check of a design the loop accepted.
fn recheck(task: &TaskPack, text: &str) -> Result<(), String> {
    let n = parse(&SourceText::new(text, "final")).map_err(|e| format!("final design no longer parses: {}", e[0]))?;
    task.interface.check(&n).map_err(|e| e.to_string())?;
    let out = simulate(&n, &task.testbench).map_err(|e| e.to_string())?;
    if out.all_passed() {
        Ok(())
    } else {
        Err(format!("final design fails {} vectors on re-simulation", out.failed))
    }
}

struct Verified {
    text: String,
    netlist: Netlist,
    eval: EvalResult,
    reward: DualReward,
}

impl Verified {
    fn sei(&self) -> f64 {
        self.eval.sei.unwrap_or(0.0)
    }
}

/// One independent sample of the workflow against a fixed store snapshot.
pub fn run_sample(
    task: &TaskPack,
    cfg: &RunConfig,
    backend: &dyn ModelBackend,
    snap: &StoreSnapshot,
    sample: u32,
) -> SampleOutcome {
    use AgentRole::*;
    let start = Instant::now();
    let params = SamplingParams {
        seed: cfg.sampling.seed.wrapping_add(u64::from(sample)),
        ..cfg.sampling.clone()
    };
    let mut t = Transcript { messages: Vec::new() };
    let mut run = TaskRun {
        task_id: task.id.clone(),
        sample,
        status: RunStatus::Failed,
        revisions_used: 0,
        final_netlist: None,
        eval: None,
        reward: None,
        transcript: Vec::new(),
        error: None,
        wall: Duration::ZERO,
    };
    let finish = |mut run: TaskRun, t: Transcript, patterns| {
        run.transcript = t.messages;
        run.wall = start.elapsed();
        SampleOutcome { run, patterns }
    };
    macro_rules! abort {
        ($msg:expr) => {{
            let msg: String = $msg;
            t.send(Mediator, UserProxy, PayloadKind::Abort, &msg, Attachments::default());
            run.status = RunStatus::Error;
            run.error = Some(msg);
            return finish(run, t, Vec::new());
        }};
    }

    let spec = if cfg.model_user_proxy {
        let ctx = PromptContext {
            task,
            spec: &task.spec,
            class: task.class,
            retrieved: &[],
            attempts: &[],
            review: None,
        };
        match backend.complete(&build_prompt(UserProxy, &ctx, cfg), &params) {
            Ok(s) => s,
            Err(e) => abort!(format!("user proxy: {e}")),
        }
    } else {
        formalize(task)
    };
    t.send(UserProxy, Mediator, PayloadKind::Spec, &spec, Attachments::default());

    let class = classify(task);
    let retrieved = if cfg.design_rag {
        retrieve_designs(task, snap, cfg.retrieval_limit)
    } else {
        Vec::new()
    };
    t.send(
        Mediator,
        Coder,
        PayloadKind::Spec,
        &spec,
        Attachments {
            retrieved: retrieved.iter().map(|e| e.id.clone()).collect(),
            ..Attachments::default()
        },
    );

    let mut attempts: Vec<Attempt> = Vec::new();
    let mut best: Option<Verified> = None;
    let mut optimizing = false;
    let mut last_text: Option<String> = None;
    let mut last_eval: Option<(EvalResult, DualReward)> = None;

    loop {
        let ctx = PromptContext {
            task,
            spec: &spec,
            class,
            retrieved: &retrieved,
            attempts: &attempts,
            review: None,
        };
        let reply = match backend.complete(&build_prompt(Coder, &ctx, cfg), &params) {
            Ok(r) => r,
            Err(e) => abort!(format!("coder: {e}")),
        };
        t.send(Coder, Reviewer, PayloadKind::NetlistCandidate, &reply, Attachments::default());

        let finding = match static_review(task, &reply) {
            Err((block, finding)) => {
                if block.is_some() {
                    last_text = block;
                }
                t.send(Reviewer, Mediator, PayloadKind::StaticReview, &compose_feedback(&notes(&finding, &[])), Attachments::default());
                finding
            }
            Ok((text, netlist)) => {
                t.send(Reviewer, Mediator, PayloadKind::StaticReview, "clean", Attachments::default());
                t.send(
                    Mediator,
                    Executor,
                    PayloadKind::NetlistCandidate,
                    "",
                    Attachments {
                        netlist: Some(text.clone()),
                        ..Attachments::default()
                    },
                );
                last_text = Some(text.clone());
                match evaluate(task, &netlist, &cfg.weights) {
                    Err(e) => {
                        let class = match e {
                            EvalError::Interface(_) => "interface-mismatch",
                            _ => "simulation",
                        };
                        t.send(Executor, Mediator, PayloadKind::SimResult, &e.to_string(), Attachments::default());
                        Finding::Static {
                            class: class.into(),
                            errors: vec![e.to_string()],
                        }
                    }
                    Ok(eval) => {
                        let reward = reward_of(task, &eval, cfg);
                        t.send(
                            Executor,
                            Mediator,
                            PayloadKind::SimResult,
                            &format!("{} passed, {} failed; verdict {}", eval.passed, eval.failed, reward.verdict),
                            Attachments {
                                eval: Some(eval.clone()),
                                reward: Some(reward),
                                ..Attachments::default()
                            },
                        );
                        last_eval = Some((eval.clone(), reward));
                        if reward.verdict == Verdict::FunctionalFeedback {
                            functional_finding(task, &eval)
                        } else {
                            let cand = Verified {
                                text,
                                netlist,
                                eval,
                                reward,
                            };
                            if best.as_ref().map_or(true, |b| cand.sei() > b.sei()) {
                                best = Some(cand);
                            }
                            let b = best.as_ref().expect("just set");
                            if reward.verdict == Verdict::Accept || optimizing || run.revisions_used >= cfg.max_revisions {
                                break;
                            }
                            let hints = suggest_optimizations(&b.netlist).into_iter().map(|h| h.message).collect();
                            Finding::Efficiency {
                                gates: b.eval.gates,
                                delay: b.eval.delay,
                                sei: b.sei(),
                                reference: task.reference.as_ref().map(|r| (r.gates, r.delay, r.sei)),
                                hints,
                            }
                        }
                    }
                }
            }
        };

        // A failed optimization round falls back to the best verified design.
        if optimizing && best.is_some() {
            break;
        }
        if run.revisions_used >= cfg.max_revisions {
            break;
        }

        let similar = match (cfg.review_rag, finding.error_class()) {
            (true, Some(class)) => snap
                .retrieve(&RetrievalQuery::new(
                    QueryMode::ByError {
                        error_class: class.to_owned(),
                        symptom: finding.symptom(),
                    },
                    cfg.retrieval_limit,
                ))
                .into_iter()
                .filter(|e| e.kind == EntryKind::ErrorFix)
                .collect(),
            _ => Vec::new(),
        };
        let review = notes(&finding, &similar);
        if let Finding::Efficiency { .. } = finding {
            t.send(Reviewer, Mediator, PayloadKind::EfficiencyReview, &compose_feedback(&review), Attachments::default());
            optimizing = true;
        }
        let feedback = if cfg.model_reviewer {
            let done = [attempts.as_slice(), &[Attempt { reply: reply.clone(), feedback: String::new() }]].concat();
            let ctx = PromptContext {
                task,
                spec: &spec,
                class,
                retrieved: &[],
                attempts: &done,
                review: Some(&review),
            };
            match backend.complete(&build_prompt(Reviewer, &ctx, cfg), &params) {
                Ok(s) => s,
                Err(e) => abort!(format!("reviewer: {e}")),
            }
        } else {
            compose_feedback(&review)
        };
        t.send(
            Mediator,
            Coder,
            PayloadKind::FixRequest,
            &feedback,
            Attachments {
                retrieved: similar.iter().map(|e| e.id.clone()).collect(),
                ..Attachments::default()
            },
        );
        attempts.push(Attempt { reply, feedback });
        run.revisions_used += 1;
    }

    let Some(best) = best else {
        t.send(Mediator, UserProxy, PayloadKind::Abort, "revision budget exhausted", Attachments::default());
        run.final_netlist = last_text;
        if let Some((eval, reward)) = last_eval {
            run.eval = Some(eval);
            run.reward = Some(reward);
        }
        return finish(run, t, Vec::new());
    };

    run.final_netlist = Some(best.text.clone());
    run.eval = Some(best.eval.clone());
    run.reward = Some(best.reward);
    if let Err(e) = recheck(task, &best.text) {
        abort!(e);
    }
    run.status = RunStatus::Verified;
    t.send(
        Mediator,
        Summarizer,
        PayloadKind::Accept,
        "",
        Attachments {
            netlist: Some(best.text.clone()),
            eval: Some(best.eval.clone()),
            reward: Some(best.reward),
            ..Attachments::default()
        },
    );
    let ctx = ExtractContext {
        task_id: task.id.clone(),
        run_id: format!("{}#{sample}", task.id),
        tags: task.tags.clone(),
    };
    let patterns = extract_patterns(&best.netlist, &ctx, snap);
    t.send(
        Summarizer,
        Mediator,
        PayloadKind::Accept,
        &format!("{} pattern(s) extracted", patterns.len()),
        Attachments::default(),
    );
    t.send(Mediator, UserProxy, PayloadKind::Accept, "verified", Attachments::default());
    finish(run, t, patterns)
}

fn notes(finding: &Finding, similar: &[KnowledgeEntry]) -> ReviewNotes {
    ReviewNotes {
        finding: finding.clone(),
        similar_fixes: similar.to_vec(),
    }
}

/// Run one sample and store what it produced.
pub fn run_task(
    task: &TaskPack,
    cfg: &RunConfig,
    backend: &dyn ModelBackend,
    store: &KnowledgeStore,
) -> Result<TaskRun, OrchestratorError> {
    cfg.validate()?;
    let out = run_sample(task, cfg, backend, &store.snapshot(), 0);
    for p in out.patterns {
        store.store(p)?;
    }
    Ok(out.run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::seed_task;
    use crate::orchestrator::ScriptedBackend;

    const FULL_ADDER: &str = "```verilog
module full_adder(input a, input b, input cin, output sum, output cout);
  wire p, g, t;
  xor x1(p, a, b);
  xor x2(sum, p, cin);
  and a1(g, a, b);
  and a2(t, p, cin);
  or o1(cout, g, t);
endmodule
```";

    fn check_routing(run: &TaskRun) {
        for (i, m) in run.transcript.iter().enumerate() {
            assert_eq!(m.turn as usize, i);
            assert!(m.sender == AgentRole::Mediator || m.recipient == AgentRole::Mediator);
        }
        // Executor only ever receives candidates after a clean static review.
        for (i, m) in run.transcript.iter().enumerate() {
            if m.recipient == AgentRole::Executor {
                let prev = &run.transcript[i - 1];
                assert_eq!((prev.kind, prev.body.as_str()), (PayloadKind::StaticReview, "clean"));
            }
        }
    }

    #[test]
    fn correct_first_try() {
        let task = seed_task("full_adder").unwrap();
        let store = KnowledgeStore::in_memory();
        let b = ScriptedBackend::sequence(vec![FULL_ADDER.into()]);
        let run = run_task(&task, &RunConfig::default(), &b, &store).unwrap();
        assert_eq!(run.status, RunStatus::Verified);
        assert_eq!(run.revisions_used, 0);
        let eval = run.eval.as_ref().unwrap();
        assert_eq!((eval.gates, eval.correctness), (5, 1.0));
        assert!(!store.is_empty());
        check_routing(&run);
    }

    #[test]
    fn behavioral_then_correct() {
        let task = seed_task("full_adder").unwrap();
        let behavioral = "```verilog
module full_adder(input a, input b, input cin, output sum, output cout);
  assign sum = a ^ b ^ cin;
  assign cout = (a & b) | (cin & (a ^ b));
endmodule
```";
        let b = ScriptedBackend::sequence(vec![behavioral.into(), FULL_ADDER.into()]);
        let out = run_sample(&task, &RunConfig::default(), &b, &KnowledgeStore::in_memory().snapshot(), 0);
        assert_eq!(out.run.status, RunStatus::Verified);
        assert_eq!(out.run.revisions_used, 1);
        let fix = out.run.transcript.iter().find(|m| m.kind == PayloadKind::FixRequest).unwrap();
        assert!(fix.body.contains("behavioral-construct"), "{}", fix.body);
        check_routing(&out.run);
    }

    #[test]
    fn garbage_exhausts_budget() {
        let task = seed_task("full_adder").unwrap();
        let b = ScriptedBackend::sequence(vec!["no idea".into()]);
        let out = run_sample(&task, &RunConfig::default(), &b, &KnowledgeStore::in_memory().snapshot(), 0);
        assert_eq!(out.run.status, RunStatus::Failed);
        assert_eq!(out.run.revisions_used, 2);
        let candidates = out
            .run
            .transcript
            .iter()
            .filter(|m| m.kind == PayloadKind::NetlistCandidate && m.sender == AgentRole::Coder)
            .count();
        assert_eq!(candidates, 3);
        assert!(out.patterns.is_empty());
    }

    #[test]
    fn functional_failure_feedback_names_the_vector() {
        let task = seed_task("full_adder").unwrap();
        let wrong = FULL_ADDER.replace("or o1(cout, g, t);", "and o1(cout, g, t);");
        let b = ScriptedBackend::sequence(vec![wrong, FULL_ADDER.into()]);
        let out = run_sample(&task, &RunConfig::default(), &b, &KnowledgeStore::in_memory().snapshot(), 0);
        assert_eq!(out.run.status, RunStatus::Verified);
        let fix = out.run.transcript.iter().find(|m| m.kind == PayloadKind::FixRequest).unwrap();
        assert!(fix.body.contains("First failure: vector"), "{}", fix.body);
        assert!(fix.body.contains("cout"));
    }

    #[test]
    fn optimization_round_keeps_the_better_design() {
        let task = seed_task("xnor2").unwrap();
        let bloated = "```verilog
module xnor2(input a, input b, output y);
  wire n1, n2, d;
  not i1(n1, a);
  not i2(n2, n1);
  xor x1(d, n2, b);
  not i3(y, d);
endmodule
```";
        let b = ScriptedBackend::reference(std::slice::from_ref(&task));
        let reference = b.complete(&[crate::orchestrator::ChatMessage::user(task.module_header())], &SamplingParams::default()).unwrap();
        let script = ScriptedBackend::sequence(vec![bloated.into(), reference]);
        let out = run_sample(&task, &RunConfig::default(), &script, &KnowledgeStore::in_memory().snapshot(), 0);
        assert_eq!(out.run.status, RunStatus::Verified);
        assert_eq!(out.run.revisions_used, 1);
        assert_eq!(out.run.eval.as_ref().unwrap().gates, 2);
        assert!(out.run.transcript.iter().any(|m| m.kind == PayloadKind::EfficiencyReview));

        // A broken optimization attempt falls back to the verified design.
        let script = ScriptedBackend::sequence(vec![bloated.into(), "nonsense".into()]);
        let out = run_sample(&task, &RunConfig::default(), &script, &KnowledgeStore::in_memory().snapshot(), 0);
        assert_eq!(out.run.status, RunStatus::Verified);
        assert_eq!(out.run.eval.as_ref().unwrap().gates, 4);
    }

    #[test]
    fn transcripts_are_deterministic() {
        let task = seed_task("mux2").unwrap();
        let b = ScriptedBackend::reference(std::slice::from_ref(&task));
        let snap = KnowledgeStore::in_memory().snapshot();
        let a = run_sample(&task, &RunConfig::default(), &b, &snap, 3).run;
        let c = run_sample(&task, &RunConfig::default(), &b, &snap, 3).run;
        assert_eq!(a.transcript, c.transcript);
        assert_eq!(a.status, RunStatus::Verified);
    }
}
