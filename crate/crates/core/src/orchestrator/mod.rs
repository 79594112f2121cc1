//! The agent workflow: prompt assembly, model backends, the per-sample
//! state machine and benchmark sweeps.

mod backend;
mod benchmark;
mod fsm;
mod http;
mod prompt;

pub use backend::{BackendError, ChatMessage, ChatRole, ModelBackend, ScriptedBackend};
pub use benchmark::{run_benchmark, BenchmarkRun};
pub use fsm::{
    run_sample, run_task, AgentMessage, Attachments, PayloadKind, RunStatus, SampleOutcome, TaskRun,
};
pub use http::{redact, HttpBackend, API_KEY_ENV};
pub use prompt::{
    build_prompt, compose_feedback, AgentRole, Attempt, Finding, PromptContext, ReviewNotes, RETRIEVED_MARKER,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::ReportError;
use crate::knowledge::KnowledgeError;
use crate::metrics::MetricWeights;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("a benchmark needs at least one task")]
    NoTasks,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Store(#[from] KnowledgeError),
}

/// Retrieval ablation profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ablation {
    /// No retrieval.
    V0,
    /// Error-fix retrieval for the reviewer only.
    V1,
    /// Pattern retrieval for the coder and error-fix retrieval.
    V2,
}

impl Ablation {
    pub fn flags(self) -> (bool, bool) {
        match self {
            Ablation::V0 => (false, false),
            Ablation::V1 => (false, true),
            Ablation::V2 => (true, true),
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ablation::V0 => "V0",
            Ablation::V1 => "V1",
            Ablation::V2 => "V2",
        })
    }
}

impl FromStr for Ablation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "V0" => Ok(Ablation::V0),
            "V1" => Ok(Ablation::V1),
            "V2" => Ok(Ablation::V2),
            _ => Err(format!("unknown profile `{s}` (expected V0, V1 or V2)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
    /// Base seed; sample `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.7,
            max_tokens: 2048,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// OpenAI-compatible chat-completion endpoint.
    Http,
    /// Offline: answers each task with its pack's reference design.
    Reference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
    pub retries: u32,
    /// Base delay of the exponential retry backoff.
    pub backoff_ms: u64,
    /// Cap on concurrent requests across all workers.
    pub max_in_flight: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Reference,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o-mini".into(),
            timeout_secs: 120,
            retries: 3,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

/// Everything a run or sweep needs. Mirrors the TOML config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub max_revisions: u32,
    /// Samples per task (n).
    pub samples: u32,
    /// k values reported for Pass@k.
    pub pass_k: Vec<u32>,
    pub design_rag: bool,
    pub review_rag: bool,
    /// Entries retrieved per query.
    pub retrieval_limit: usize,
    /// Prompt budget in characters; retrieved examples are dropped
    /// lowest-rank first to fit.
    pub max_prompt_chars: usize,
    /// Ask the model to restate the spec instead of templating it.
    pub model_user_proxy: bool,
    /// Ask the model to phrase reviewer feedback.
    pub model_reviewer: bool,
    /// Tasks run concurrently. Above 1, store writes interleave
    /// nondeterministically.
    pub workers: usize,
    /// Record wall time in reports (makes them differ run to run).
    pub record_timing: bool,
    pub sampling: SamplingParams,
    pub backend: BackendConfig,
    pub weights: MetricWeights,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_revisions: 2,
            samples: 20,
            pass_k: vec![1, 5, 10],
            design_rag: true,
            review_rag: true,
            retrieval_limit: 3,
            max_prompt_chars: 16_000,
            model_user_proxy: false,
            model_reviewer: false,
            workers: 1,
            record_timing: false,
            sampling: SamplingParams::default(),
            backend: BackendConfig::default(),
            weights: MetricWeights::default(),
        }
    }
}

impl RunConfig {
    pub fn with_profile(mut self, profile: Ablation) -> Self {
        (self.design_rag, self.review_rag) = profile.flags();
        self
    }

    /// The ablation profile these flags match, if any.
    pub fn profile(&self) -> Option<Ablation> {
        [Ablation::V0, Ablation::V1, Ablation::V2]
            .into_iter()
            .find(|p| p.flags() == (self.design_rag, self.review_rag))
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: &str| Err(OrchestratorError::Config(m.to_owned()));
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.pass_k.iter().any(|&k| k == 0) {
            return bad("pass_k values must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.retrieval_limit == 0 {
            return bad("retrieval_limit must be at least 1");
        }
        if self.backend.max_in_flight == 0 {
            return bad("backend.max_in_flight must be at least 1");
        }
        self.weights
            .validate()
            .map_err(|e| OrchestratorError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, OrchestratorError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
