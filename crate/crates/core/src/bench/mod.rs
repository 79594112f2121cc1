//! Task packs, the embedded seed set, evaluation and reports.

mod report;
mod seed;

pub use report::{
    emit_report, BenchmarkReport, BestDesign, DifficultySummary, Overall, ReportError, ReportFormat, RowStatus,
    TaskRow, REPORT_SCHEMA_VERSION,
};
pub use seed::{seed_task, seed_tasks, SEED_TASK_IDS};

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{sei_of, sei_task, MetricWeights, TierBoundaries};
use crate::netlist::{structural_report, Direction, Netlist};
use crate::parser::{parse, SourceText, MAX_WIDTH};
use crate::sim::{simulate, Failure, Interface, Testbench};

pub const TASK_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitClass {
    Combinational,
    Sequential,
}

impl fmt::Display for CircuitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CircuitClass::Combinational => "combinational",
            CircuitClass::Sequential => "sequential",
        })
    }
}

/// Best known human design for a task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub gates: usize,
    pub delay: usize,
    pub sei: f64,
    /// Netlist text, when the pack ships one.
    pub netlist: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskPack {
    pub id: String,
    pub title: String,
    pub difficulty: Difficulty,
    pub class: CircuitClass,
    pub tags: Vec<String>,
    pub spec: String,
    pub interface: Interface,
    pub testbench: Testbench,
    pub reference: Option<Reference>,
    pub tiers: TierBoundaries,
}

impl TaskPack {
    pub fn reference_sei(&self) -> Option<f64> {
        self.reference.as_ref().map(|r| r.sei)
    }

    /// The module header a solution must use.
    pub fn module_header(&self) -> String {
        self.interface.module_header(&self.id)
    }
}

#[derive(Debug, Error)]
pub enum TaskPackError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {message}")]
    Toml { file: String, message: String },
    #[error("{file}: field `{field}`: {message}")]
    Schema {
        file: String,
        field: String,
        message: String,
    },
    #[error("task {task}: reference mismatch: {message}")]
    ReferenceMismatch { task: String, message: String },
}

fn schema(file: &str, field: impl Into<String>, message: impl Into<String>) -> TaskPackError {
    TaskPackError::Schema {
        file: file.to_owned(),
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    schema_version: u32,
    id: String,
    title: String,
    difficulty: Difficulty,
    class: CircuitClass,
    #[serde(default)]
    tags: Vec<String>,
    #[serde(default)]
    tiers: Option<TierBoundaries>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceFile {
    gates: usize,
    delay: usize,
    #[serde(default)]
    sei: Option<f64>,
}

/// Raw file contents of a pack.
#[derive(Clone, Debug, Default)]
pub struct PackSources {
    pub task: String,
    pub spec: String,
    pub interface: String,
    pub testbench: String,
    pub reference: Option<String>,
    pub reference_netlist: Option<String>,
}

fn toml_file<T: serde::de::DeserializeOwned>(file: &str, text: &str) -> Result<T, TaskPackError> {
    toml::from_str(text).map_err(|e| TaskPackError::Toml {
        file: file.to_owned(),
        message: e.to_string().trim_end().to_owned(),
    })
}

fn check_interface(iface: &Interface, class: CircuitClass) -> Result<(), TaskPackError> {
    const F: &str = "interface.toml";
    if iface.ports.is_empty() {
        return Err(schema(F, "port", "at least one port is required"));
    }
    let mut names = BTreeSet::new();
    for (i, p) in iface.ports.iter().enumerate() {
        let field = format!("port[{i}]");
        let ident = p.name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && p.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ident {
            return Err(schema(F, field, format!("`{}` is not an identifier", p.name)));
        }
        if !names.insert(p.name.as_str()) {
            return Err(schema(F, field, format!("duplicate port `{}`", p.name)));
        }
        if p.width == 0 || p.width > MAX_WIDTH {
            return Err(schema(F, field, format!("width must be 1..={MAX_WIDTH}")));
        }
        if p.clock && (p.direction != Direction::Input || p.width != 1) {
            return Err(schema(F, field, "the clock must be a 1-bit input"));
        }
    }
    if iface.outputs().next().is_none() {
        return Err(schema(F, "port", "at least one output is required"));
    }
    let clocks = iface.ports.iter().filter(|p| p.clock).count();
    match class {
        CircuitClass::Combinational if clocks > 0 => {
            Err(schema(F, "clock", "a combinational task cannot declare a clock"))
        }
        CircuitClass::Sequential if clocks != 1 => {
            Err(schema(F, "clock", "a sequential task needs exactly one clock"))
        }
        _ => Ok(()),
    }
}

impl TaskPack {
    /// Build and check a pack from file contents.
    pub fn from_sources(src: &PackSources) -> Result<TaskPack, TaskPackError> {
        let task: TaskFile = toml_file("task.toml", &src.task)?;
        if task.schema_version != TASK_SCHEMA_VERSION {
            return Err(schema(
                "task.toml",
                "schema_version",
                format!("unsupported version {} (expected {TASK_SCHEMA_VERSION})", task.schema_version),
            ));
        }
        let id_ok = !task.id.is_empty()
            && !task.id.starts_with(|c: char| c.is_ascii_digit())
            && task.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !id_ok {
            return Err(schema("task.toml", "id", "ids are identifiers (letters, digits, _)"));
        }
        if crate::parser::is_reserved(&task.id) {
            return Err(schema("task.toml", "id", "the id is a reserved word"));
        }

        let interface: Interface = toml_file("interface.toml", &src.interface)?;
        check_interface(&interface, task.class)?;

        let testbench = Testbench::from_toml_with(&src.testbench, &interface).map_err(|e| match e {
            crate::sim::TestbenchError::Vector { vector, message } => {
                schema("testbench.toml", format!("vector[{vector}]"), message)
            }
            crate::sim::TestbenchError::Schema(v) => {
                schema("testbench.toml", "schema_version", format!("unsupported version {v}"))
            }
            other => TaskPackError::Toml {
                file: "testbench.toml".into(),
                message: other.to_string(),
            },
        })?;
        if testbench.vectors.is_empty() {
            return Err(schema("testbench.toml", "vector", "at least one vector is required"));
        }
        match task.class {
            CircuitClass::Combinational if testbench.cycles != 0 => {
                return Err(schema("testbench.toml", "cycles", "combinational testbenches have 0 cycles"))
            }
            CircuitClass::Sequential if testbench.cycles == 0 => {
                return Err(schema("testbench.toml", "cycles", "sequential testbenches need cycles > 0"))
            }
            _ => {}
        }

        let reference = match &src.reference {
            None => None,
            Some(text) => {
                let r: ReferenceFile = toml_file("reference.toml", text)?;
                let sei = sei_task(r.gates as f64, r.delay as f64, &MetricWeights::default())
                    .map_err(|e| schema("reference.toml", "gates", e.to_string()))?;
                if let Some(given) = r.sei {
                    if (given - sei).abs() > 1e-4 {
                        return Err(schema(
                            "reference.toml",
                            "sei",
                            format!("{given} disagrees with 1/(G+D) = {sei:.4}"),
                        ));
                    }
                }
                Some(Reference {
                    gates: r.gates,
                    delay: r.delay,
                    sei,
                    netlist: src.reference_netlist.clone(),
                })
            }
        };

        let mut tags: Vec<String> = task.tags.iter().map(|t| t.to_ascii_lowercase()).collect();
        tags.sort();
        tags.dedup();
        Ok(TaskPack {
            id: task.id,
            title: task.title,
            difficulty: task.difficulty,
            class: task.class,
            tags,
            spec: src.spec.trim().to_owned(),
            interface,
            testbench,
            reference,
            tiers: task.tiers.unwrap_or_default(),
        })
    }
}

/// Load a pack directory: `task.toml`, `spec.md`, `interface.toml`,
/// `testbench.toml`, and optionally `reference.toml` and `reference.v`.
pub fn load_task_pack(dir: impl AsRef<Path>) -> Result<TaskPack, TaskPackError> {
    let dir = dir.as_ref();
    let read = |name: &str| -> Result<String, TaskPackError> {
        let path = dir.join(name);
        std::fs::read_to_string(&path).map_err(|source| TaskPackError::Io { path, source })
    };
    let optional = |name: &str| -> Result<Option<String>, TaskPackError> {
        let path = dir.join(name);
        if path.exists() {
            read(name).map(Some)
        } else {
            Ok(None)
        }
    };
    TaskPack::from_sources(&PackSources {
        task: read("task.toml")?,
        spec: read("spec.md")?,
        interface: read("interface.toml")?,
        testbench: read("testbench.toml")?,
        reference: optional("reference.toml")?,
        reference_netlist: optional("reference.v")?,
    })
}

/// Load every pack directory directly under `root`, sorted by id.
pub fn load_task_dir(root: impl AsRef<Path>) -> Result<Vec<TaskPack>, TaskPackError> {
    let root = root.as_ref();
    let listing = std::fs::read_dir(root).map_err(|source| TaskPackError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut packs = Vec::new();
    for item in listing.flatten() {
        if item.path().join("task.toml").is_file() {
            packs.push(load_task_pack(item.path())?);
        }
    }
    packs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(packs)
}

/// Outcome of checking one design against a task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub correctness: f64,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<Failure>,
    pub gates: usize,
    pub delay: usize,
    pub registers: usize,
    /// Defined only when every vector passed.
    pub sei: Option<f64>,
}

impl EvalResult {
    pub fn verified(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("interface: {0}")]
    Interface(#[from] crate::sim::InterfaceError),
    #[error("simulation: {0}")]
    Sim(#[from] crate::sim::SimError),
    #[error("structure: {0}")]
    Structure(#[from] crate::netlist::NetlistError),
}

/// Interface check, simulation and structural scoring of a parsed design.
pub fn evaluate(task: &TaskPack, netlist: &Netlist, w: &MetricWeights) -> Result<EvalResult, EvalError> {
    task.interface.check(netlist)?;
    let outcome = simulate(netlist, &task.testbench)?;
    let report = structural_report(netlist)?;
    let sei = if outcome.all_passed() {
        sei_of(&report, w).ok()
    } else {
        None
    };
    Ok(EvalResult {
        correctness: outcome.correctness,
        passed: outcome.passed,
        failed: outcome.failed,
        first_failure: outcome.first_failure,
        gates: report.gate_count,
        delay: report.delay,
        registers: report.register_count,
        sei,
    })
}

/// Check a pack's reference design against its own testbench and metadata.
pub fn verify_reference(task: &TaskPack, netlist_text: &str) -> Result<EvalResult, TaskPackError> {
    let mismatch = |message: String| TaskPackError::ReferenceMismatch {
        task: task.id.clone(),
        message,
    };
    let netlist = parse(&SourceText::new(netlist_text, format!("{}/reference.v", task.id))).map_err(|errs| {
        mismatch(format!(
            "reference does not parse: {}",
            errs.first().map(|e| e.to_string()).unwrap_or_default()
        ))
    })?;
    let eval = evaluate(task, &netlist, &MetricWeights::default()).map_err(|e| mismatch(e.to_string()))?;
    if !eval.verified() {
        let why = eval
            .first_failure
            .as_ref()
            .map(|f| f.to_string())
            .unwrap_or_else(|| "no vectors checked".into());
        return Err(mismatch(format!("reference fails its testbench: {why}")));
    }
    if let Some(r) = &task.reference {
        if (r.gates, r.delay) != (eval.gates, eval.delay) {
            return Err(mismatch(format!(
                "declared G={} D={} but the design measures G={} D={}",
                r.gates, r.delay, eval.gates, eval.delay
            )));
        }
    }
    Ok(eval)
}
