//! Deterministic prompt assembly for each agent role.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::backend::ChatMessage;
use super::RunConfig;
use crate::bench::{CircuitClass, TaskPack};
use crate::knowledge::KnowledgeEntry;
use crate::parser::banned_constructs;
use crate::sim::Failure;

/// Heading that introduces each retrieved example in a coder prompt.
pub const RETRIEVED_MARKER: &str = "### Retrieved pattern";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentRole {
    UserProxy,
    Mediator,
    Coder,
    Reviewer,
    Executor,
    Summarizer,
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentRole::UserProxy => "user-proxy",
            AgentRole::Mediator => "mediator",
            AgentRole::Coder => "coder",
            AgentRole::Reviewer => "reviewer",
            AgentRole::Executor => "executor",
            AgentRole::Summarizer => "summarizer",
        })
    }
}

/// One earlier coder reply and the feedback it received.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub reply: String,
    pub feedback: String,
}

/// What the reviewer found about a candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Finding {
    /// Rejected before simulation.
    Static { class: String, errors: Vec<String> },
    /// Simulated with failing vectors.
    Functional {
        correctness: f64,
        passed: usize,
        failed: usize,
        first_failure: Option<Failure>,
        /// Input assignment of the failing vector, `name=value` pairs.
        failing_inputs: Vec<String>,
    },
    /// Correct but costlier than the reference.
    Efficiency {
        gates: usize,
        delay: usize,
        sei: f64,
        reference: Option<(usize, usize, f64)>,
        hints: Vec<String>,
    },
}

impl Finding {
    /// Class used to look up similar error fixes.
    pub fn error_class(&self) -> Option<&str> {
        match self {
            Finding::Static { class, .. } => Some(class),
            Finding::Functional { .. } => Some("functional-mismatch"),
            Finding::Efficiency { .. } => None,
        }
    }

    /// Short symptom text used for similarity ranking.
    pub fn symptom(&self) -> String {
        match self {
            Finding::Static { errors, .. } => errors.first().cloned().unwrap_or_default(),
            Finding::Functional { first_failure, .. } => first_failure
                .as_ref()
                .map(|f| format!("simulation output {} differs from expected on a test vector", f.bit))
                .unwrap_or_else(|| "simulation output differs from expected".into()),
            Finding::Efficiency { .. } => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewNotes {
    pub finding: Finding,
    /// Error-fix records retrieved for this finding, best first.
    pub similar_fixes: Vec<KnowledgeEntry>,
}

/// Deterministic reviewer feedback for the coder.
pub fn compose_feedback(notes: &ReviewNotes) -> String {
    let mut s = String::new();
    match &notes.finding {
        Finding::Static { class, errors } => {
            let _ = writeln!(s, "The netlist was rejected before simulation ({class}):");
            for e in errors.iter().take(8) {
                let _ = writeln!(s, "- {e}");
            }
            if errors.len() > 8 {
                let _ = writeln!(s, "- ... and {} more", errors.len() - 8);
            }
            s.push_str("Fix every error and resubmit the complete module.\n");
        }
        Finding::Functional {
            correctness,
            passed,
            failed,
            first_failure,
            failing_inputs,
        } => {
            let _ = writeln!(
                s,
                "The netlist simulated with correctness {correctness:.3} ({passed} of {} vectors passed).",
                passed + failed
            );
            if let Some(f) = first_failure {
                let _ = writeln!(
                    s,
                    "First failure: vector {}: output {} expected {} but got {}.",
                    f.vector, f.bit, f.expected as u8, f.actual as u8
                );
                if !failing_inputs.is_empty() {
                    let _ = writeln!(s, "Inputs of that vector: {}.", failing_inputs.join(" "));
                }
            }
            s.push_str("Trace that vector through your gates, correct the logic and resubmit the complete module.\n");
        }
        Finding::Efficiency {
            gates,
            delay,
            sei,
            reference,
            hints,
        } => {
            let _ = writeln!(s, "The design is correct with G={gates}, D={delay} (SEI {sei:.4}).");
            if let Some((g, d, r)) = reference {
                let _ = writeln!(s, "The best known design uses G={g}, D={d} (SEI {r:.4}).");
            }
            if !hints.is_empty() {
                s.push_str("Suggestions:\n");
                for h in hints {
                    let _ = writeln!(s, "- {h}");
                }
            }
            s.push_str("Reduce gate count and depth without changing behavior, and resubmit the complete module.\n");
        }
    }
    if !notes.similar_fixes.is_empty() {
        s.push_str("Similar error patterns seen before:\n");
        for e in &notes.similar_fixes {
            if let Some(fix) = &e.error_fix {
                let _ = writeln!(s, "- [{}] {}: {}", fix.error_class, fix.symptom, fix.fix);
            }
        }
    }
    s
}

/// Inputs to prompt assembly.
#[derive(Clone, Copy, Debug)]
pub struct PromptContext<'a> {
    pub task: &'a TaskPack,
    /// Specification as formalized by the user proxy.
    pub spec: &'a str,
    pub class: CircuitClass,
    /// Retrieved patterns in rank order.
    pub retrieved: &'a [KnowledgeEntry],
    pub attempts: &'a [Attempt],
    /// Reviewer input: the current findings.
    pub review: Option<&'a ReviewNotes>,
}

fn grammar_summary() -> String {
    let mut s = String::from(
        "Netlist language (structural only):\n\
         - One module: `module <name>(<ports>); ... endmodule`. Ports are `input` or `output`, optionally `[msb:lsb]`.\n\
         - Internal nets are declared with `wire`.\n\
         - Gates: `and`, `or`, `xor`, `nand` take (out, a, b); `not` takes (out, a); `dff` takes (q, d, clk).\n\
         - Pins connect nets, single bits such as `a[2]`, or the constants `1'b0` and `1'b1`.\n\
         - `assign y = x;` is allowed only as a plain alias of a net, bit or constant.\n\
         - Every net has exactly one driver and there are no combinational loops.\n\
         Cost: every gate counts 1 toward G (dff included) and D is the longest chain of combinational gates. Lower G + D is better.\n\
         Banned constructs:\n",
    );
    for b in banned_constructs() {
        let _ = writeln!(s, "- {b}");
    }
    s
}

fn charter(role: AgentRole) -> &'static str {
    match role {
        AgentRole::UserProxy => {
            "You restate hardware task specifications as precise, numbered requirements. Keep every port name and bit order unchanged."
        }
        AgentRole::Coder => {
            "You are a gate-level hardware designer. You write structural netlists using only the allowed primitives and you minimize gate count and depth."
        }
        AgentRole::Reviewer => {
            "You review gate-level netlists. Turn the findings below into short, concrete instructions for the designer. Do not write the netlist yourself."
        }
        AgentRole::Mediator => "You route messages between agents and track the revision budget.",
        AgentRole::Executor => "You simulate netlists against testbenches.",
        AgentRole::Summarizer => "You record verified designs in the knowledge base.",
    }
}

fn retrieved_block(rank: usize, e: &KnowledgeEntry) -> String {
    let eff = e
        .efficiency
        .map(|f| format!("G={}, D={}, SEI {:.4}", f.gates, f.delay, f.sei))
        .unwrap_or_default();
    format!(
        "{RETRIEVED_MARKER} {rank} [{}] ({eff})\n```verilog\n{}\n```\n",
        e.tags.join(", "),
        e.netlist.as_deref().unwrap_or("").trim()
    )
}

fn coder_request(ctx: &PromptContext<'_>, examples: usize) -> String {
    let t = ctx.task;
    let mut s = String::new();
    let _ = writeln!(s, "Task: {} ({})", t.title, t.id);
    let _ = writeln!(s, "Circuit class: {}", ctx.class);
    if ctx.class == CircuitClass::Sequential {
        let clk = t.interface.clock().map_or("clk", |p| p.name.as_str());
        let _ = writeln!(
            s,
            "State must live in dff instances clocked by `{clk}`. Registers start at 0 and outputs are sampled before each rising edge."
        );
    }
    let _ = writeln!(s, "\nSpecification:\n{}\n", ctx.spec.trim());
    let _ = writeln!(s, "Use exactly this module header:\n{}\n", t.module_header());
    if examples > 0 {
        s.push_str("Verified designs from the knowledge base that may help:\n\n");
        for (i, e) in ctx.retrieved.iter().take(examples).enumerate() {
            s.push_str(&retrieved_block(i + 1, e));
            s.push('\n');
        }
    }
    s.push_str("Reply with exactly one ```verilog fenced block containing the complete module.");
    s
}

fn total_len(msgs: &[ChatMessage]) -> usize {
    msgs.iter().map(|m| m.content.len()).sum()
}

/// Role-tagged messages for one model call. Only the user proxy, coder and
/// reviewer talk to a model; other roles get their charter alone.
pub fn build_prompt(role: AgentRole, ctx: &PromptContext<'_>, cfg: &RunConfig) -> Vec<ChatMessage> {
    let system = match role {
        AgentRole::Coder | AgentRole::Reviewer => format!("{}\n\n{}", charter(role), grammar_summary()),
        _ => charter(role).to_owned(),
    };
    match role {
        AgentRole::UserProxy => {
            let t = ctx.task;
            vec![
                ChatMessage::system(system),
                ChatMessage::user(format!(
                    "Task: {}\nModule header: {}\n\n{}",
                    t.title,
                    t.module_header(),
                    t.spec
                )),
            ]
        }
        AgentRole::Coder => {
            let mut keep = ctx.retrieved.len();
            loop {
                let mut msgs = vec![ChatMessage::system(system.clone()), ChatMessage::user(coder_request(ctx, keep))];
                for a in ctx.attempts {
                    msgs.push(ChatMessage::assistant(a.reply.clone()));
                    msgs.push(ChatMessage::user(a.feedback.clone()));
                }
                if keep == 0 || total_len(&msgs) <= cfg.max_prompt_chars {
                    return msgs;
                }
                keep -= 1;
            }
        }
        AgentRole::Reviewer => {
            let mut user = String::new();
            let _ = writeln!(user, "Task: {} ({})\n", ctx.task.title, ctx.task.id);
            if let Some(last) = ctx.attempts.last() {
                let _ = writeln!(user, "Candidate:\n{}\n", last.reply.trim());
            }
            if let Some(notes) = ctx.review {
                let _ = writeln!(user, "Findings:\n{}", compose_feedback(notes));
            }
            vec![ChatMessage::system(system), ChatMessage::user(user)]
        }
        AgentRole::Mediator | AgentRole::Executor | AgentRole::Summarizer => vec![ChatMessage::system(system)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::seed_task;
    use crate::knowledge::{KnowledgeStore, QueryMode, RetrievalQuery};
    use crate::sim::PortBit;

    fn ctx<'a>(task: &'a TaskPack, retrieved: &'a [KnowledgeEntry], attempts: &'a [Attempt]) -> PromptContext<'a> {
        PromptContext {
            task,
            spec: &task.spec,
            class: task.class,
            retrieved,
            attempts,
            review: None,
        }
    }

    #[test]
    fn coder_prompt_has_grammar_and_ports() {
        let t = seed_task("full_adder").unwrap();
        let msgs = build_prompt(AgentRole::Coder, &ctx(&t, &[], &[]), &RunConfig::default());
        let all: String = msgs.iter().map(|m| m.content.clone()).collect();
        assert!(all.contains("`not` takes (out, a)"));
        assert!(all.contains("always / initial blocks"));
        assert!(all.contains("module full_adder(input a, input b, input cin, output sum, output cout);"));
        assert!(!all.contains(RETRIEVED_MARKER));
    }

    #[test]
    fn retrieved_adders_keep_rank_order() {
        let store = KnowledgeStore::in_memory();
        store.seed_baseline().unwrap();
        let hits = store.retrieve(&RetrievalQuery::new(QueryMode::ByTags { tags: vec!["adder".into()] }, 5));
        assert_eq!(hits.len(), 2);
        let t = seed_task("ripple_adder4").unwrap();
        let msgs = build_prompt(AgentRole::Coder, &ctx(&t, &hits, &[]), &RunConfig::default());
        let text = &msgs[1].content;
        let first = text.find("module half_adder").unwrap();
        let second = text.find("module full_adder").unwrap();
        assert!(first < second, "higher SEI first");
        assert!(text.contains(&format!("{RETRIEVED_MARKER} 1")));
    }

    #[test]
    fn budget_drops_lowest_ranked_examples_first() {
        let store = KnowledgeStore::in_memory();
        store.seed_baseline().unwrap();
        let hits = store.retrieve(&RetrievalQuery::new(QueryMode::ByTags { tags: vec!["adder".into()] }, 5));
        let t = seed_task("ripple_adder4").unwrap();
        let full = build_prompt(AgentRole::Coder, &ctx(&t, &hits, &[]), &RunConfig::default());
        let cfg = RunConfig {
            max_prompt_chars: total_len(&full) - 1,
            ..RunConfig::default()
        };
        let cut = build_prompt(AgentRole::Coder, &ctx(&t, &hits, &[]), &cfg);
        assert!(cut[1].content.contains("module half_adder"));
        assert!(!cut[1].content.contains("module full_adder"));
        let tiny = RunConfig {
            max_prompt_chars: 10,
            ..RunConfig::default()
        };
        let none = build_prompt(AgentRole::Coder, &ctx(&t, &hits, &[]), &tiny);
        assert!(!none[1].content.contains(RETRIEVED_MARKER));
    }

    #[test]
    fn attempts_become_turns_and_reviewer_sees_failure() {
        let t = seed_task("xnor2").unwrap();
        let attempts = vec![Attempt {
            reply: "first".into(),
            feedback: "fix it".into(),
        }];
        let msgs = build_prompt(AgentRole::Coder, &ctx(&t, &[], &attempts), &RunConfig::default());
        assert_eq!(msgs.len(), 4);
        assert_eq!(msgs[2], ChatMessage::assistant("first"));

        let notes = ReviewNotes {
            finding: Finding::Functional {
                correctness: 0.75,
                passed: 3,
                failed: 1,
                first_failure: Some(Failure {
                    vector: 2,
                    bit: PortBit::scalar("y"),
                    expected: false,
                    actual: true,
                }),
                failing_inputs: vec!["a=1".into(), "b=0".into()],
            },
            similar_fixes: vec![],
        };
        let mut c = ctx(&t, &[], &attempts);
        c.review = Some(&notes);
        let msgs = build_prompt(AgentRole::Reviewer, &c, &RunConfig::default());
        let user = &msgs[1].content;
        assert!(user.contains("vector 2: output y expected 0 but got 1"));
        assert!(user.contains("a=1 b=0"));
    }
}
