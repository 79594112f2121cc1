use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SamplingParams;
use crate::bench::TaskPack;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

/// A language model behind a chat-completion contract. Implementations must
/// be usable from several task workers at once.
pub trait ModelBackend: Send + Sync {
    fn complete(&self, messages: &[ChatMessage], params: &SamplingParams) -> Result<String, BackendError>;

    /// Identity recorded in reports.
    fn label(&self) -> String;
}

type ReplyFn = dyn Fn(&[ChatMessage]) -> String + Send + Sync;

/// Deterministic backend driven by a function of the prompt.
pub struct ScriptedBackend {
    label: String,
    reply: Box<ReplyFn>,
}

impl fmt::Debug for ScriptedBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScriptedBackend").field("label", &self.label).finish()
    }
}

/// Prior assistant turns in a prompt: 0 on the first attempt.
fn attempt_index(messages: &[ChatMessage]) -> usize {
    messages.iter().filter(|m| m.role == ChatRole::Assistant).count()
}

impl ScriptedBackend {
    pub fn new(label: impl Into<String>, reply: impl Fn(&[ChatMessage]) -> String + Send + Sync + 'static) -> Self {
        ScriptedBackend {
            label: label.into(),
            reply: Box::new(reply),
        }
    }

    /// Reply `i` answers the attempt with `i` earlier assistant turns in
    /// its prompt; the last reply repeats. Being stateless, independent
    /// samples see the same sequence.
    pub fn sequence(replies: Vec<String>) -> Self {
        assert!(!replies.is_empty(), "a script needs at least one reply");
        ScriptedBackend::new("scripted", move |msgs| {
            replies[attempt_index(msgs).min(replies.len() - 1)].clone()
        })
    }

    /// Per-task scripts. The first rule whose marker occurs in the prompt
    /// supplies the sequence; otherwise `fallback` is returned.
    pub fn rules(rules: Vec<(String, Vec<String>)>, fallback: impl Into<String>) -> Self {
        let fallback = fallback.into();
        ScriptedBackend::new("scripted", move |msgs| {
            let text: String = msgs.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n");
            for (marker, replies) in &rules {
                if !replies.is_empty() && text.contains(marker.as_str()) {
                    return replies[attempt_index(msgs).min(replies.len() - 1)].clone();
                }
            }
            fallback.clone()
        })
    }

    /// Answer every task with its shipped reference design.
    pub fn reference(tasks: &[TaskPack]) -> Self {
        let rules = tasks
            .iter()
            .filter_map(|t| {
                let text = t.reference.as_ref()?.netlist.as_ref()?;
                Some((t.module_header(), vec![format!("```verilog\n{}\n```", text.trim())]))
            })
            .collect();
        let mut b = ScriptedBackend::rules(rules, "I do not know this task.");
        b.label = "reference".into();
        b
    }
}

impl ModelBackend for ScriptedBackend {
    fn complete(&self, messages: &[ChatMessage], _params: &SamplingParams) -> Result<String, BackendError> {
        Ok((self.reply)(messages))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::seed_task;

    #[test]
    fn sequence_follows_assistant_turns() {
        let b = ScriptedBackend::sequence(vec!["one".into(), "two".into()]);
        let p = SamplingParams::default();
        let mut msgs = vec![ChatMessage::user("go")];
        assert_eq!(b.complete(&msgs, &p).unwrap(), "one");
        msgs.push(ChatMessage::assistant("one"));
        msgs.push(ChatMessage::user("again"));
        assert_eq!(b.complete(&msgs, &p).unwrap(), "two");
        msgs.push(ChatMessage::assistant("two"));
        assert_eq!(b.complete(&msgs, &p).unwrap(), "two");
    }

    #[test]
    fn reference_backend_matches_on_module_header() {
        let t = seed_task("mux2").unwrap();
        let b = ScriptedBackend::reference(std::slice::from_ref(&t));
        let p = SamplingParams::default();
        let reply = b.complete(&[ChatMessage::user(t.module_header())], &p).unwrap();
        assert!(reply.contains("xor g1(diff, a, b);"));
        assert_eq!(b.complete(&[ChatMessage::user("other")], &p).unwrap(), "I do not know this task.");
        assert_eq!(b.label(), "reference");
    }
}
