//! Verified circuit patterns and error-fix records, indexed for retrieval.
//!
//! Patterns are admitted only after their netlist text re-parses and
//! re-simulates to the stored signature. For each signature and interface
//! shape one entry is primary; a better-scoring arrival archives the old
//! one, so primary quality never drops.

mod extract;
mod persist;
mod seed;

pub use extract::{extract_patterns, ExtractContext, MAX_BOUNDARY_INPUTS, MAX_SUBPATTERN_GATES};
pub use persist::{INDEX_FILE, PATTERN_DIR};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{sei_of, MetricWeights};
use crate::netlist::{structural_report, Netlist};
use crate::parser::{parse_str, render};
use crate::sim::{functional_signature, FunctionalSignature, Interface};

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("entry {id}: verification failed: {reason}")]
    VerificationFailed { id: String, reason: String },
    #[error("store already holds {0} entries; seeding needs an empty store")]
    NotEmpty(usize),
    #[error("store I/O at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("index line {line}: {message}")]
    Index { line: usize, message: String },
    #[error("no entry with id {0}")]
    UnknownId(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    CircuitPattern,
    ErrorFix,
}

/// Input and output bit counts, clock excluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InterfaceShape {
    pub inputs: u32,
    pub outputs: u32,
}

impl InterfaceShape {
    pub fn of(netlist: &Netlist) -> InterfaceShape {
        let iface = Interface::of(netlist);
        InterfaceShape {
            inputs: iface.input_bit_count() as u32,
            outputs: iface.output_bit_count() as u32,
        }
    }

    pub fn of_interface(iface: &Interface) -> InterfaceShape {
        InterfaceShape {
            inputs: iface.input_bit_count() as u32,
            outputs: iface.output_bit_count() as u32,
        }
    }
}

/// Signature fields kept in the index; the columns are recomputed on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureKey {
    pub hash: String,
    pub inputs: u32,
    pub outputs: u32,
    pub approximate: bool,
}

impl From<&FunctionalSignature> for SignatureKey {
    fn from(s: &FunctionalSignature) -> Self {
        SignatureKey {
            hash: s.hash.clone(),
            inputs: s.inputs,
            outputs: s.outputs,
            approximate: s.approximate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRecord {
    pub gates: usize,
    pub delay: usize,
    pub registers: usize,
    pub sei: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub task_id: String,
    pub run_id: String,
    /// Logical admission time: the store's write counter when admitted.
    pub admitted: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorFix {
    /// Machine class such as `behavioral-construct` or `combinational-loop`.
    pub error_class: String,
    pub symptom: String,
    pub fix: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub id: String,
    pub kind: EntryKind,
    /// Canonical netlist text (patterns only).
    pub netlist: Option<String>,
    pub signature: Option<SignatureKey>,
    pub interface: InterfaceShape,
    pub tags: Vec<String>,
    pub efficiency: Option<EfficiencyRecord>,
    pub provenance: Provenance,
    pub error_fix: Option<ErrorFix>,
    #[serde(default)]
    pub archived: bool,
}

fn normalize_tags(tags: &[&str]) -> Vec<String> {
    let set: BTreeSet<String> = tags
        .iter()
        .map(|t| t.trim().to_ascii_lowercase())
        .filter(|t| !t.is_empty())
        .collect();
    set.into_iter().collect()
}

impl KnowledgeEntry {
    /// Candidate pattern entry. The id is assigned on admission.
    pub fn pattern(netlist: &Netlist, tags: &[&str], provenance: Provenance) -> Result<Self, KnowledgeError> {
        let fail = |reason: String| KnowledgeError::VerificationFailed {
            id: "(new)".into(),
            reason,
        };
        let sig = functional_signature(netlist).map_err(|e| fail(e.to_string()))?;
        let report = structural_report(netlist).map_err(|e| fail(e.to_string()))?;
        let sei = sei_of(&report, &MetricWeights::default()).map_err(|e| fail(e.to_string()))?;
        Ok(KnowledgeEntry {
            id: String::new(),
            kind: EntryKind::CircuitPattern,
            netlist: Some(render(netlist)),
            signature: Some(SignatureKey::from(&sig)),
            interface: InterfaceShape::of(netlist),
            tags: normalize_tags(tags),
            efficiency: Some(EfficiencyRecord {
                gates: report.gate_count,
                delay: report.delay,
                registers: report.register_count,
                sei,
            }),
            provenance,
            error_fix: None,
            archived: false,
        })
    }

    pub fn error_fix(error_class: &str, symptom: &str, fix: &str, tags: &[&str], provenance: Provenance) -> Self {
        KnowledgeEntry {
            id: String::new(),
            kind: EntryKind::ErrorFix,
            netlist: None,
            signature: None,
            interface: InterfaceShape { inputs: 0, outputs: 0 },
            tags: normalize_tags(tags),
            efficiency: None,
            provenance,
            error_fix: Some(ErrorFix {
                error_class: error_class.to_owned(),
                symptom: symptom.to_owned(),
                fix: fix.to_owned(),
            }),
            archived: false,
        }
    }

    pub fn sei(&self) -> f64 {
        self.efficiency.map_or(0.0, |e| e.sei)
    }

    /// Re-parse, re-simulate and re-score a pattern against its record.
    pub fn verify(&self) -> Result<Netlist, KnowledgeError> {
        let fail = |reason: String| KnowledgeError::VerificationFailed {
            id: self.id.clone(),
            reason,
        };
        if self.kind == EntryKind::ErrorFix {
            return match &self.error_fix {
                Some(_) => Err(fail("error-fix entries carry no netlist".into())),
                None => Err(fail("error-fix entry without a fix record".into())),
            };
        }
        let text = self.netlist.as_deref().ok_or_else(|| fail("missing netlist text".into()))?;
        let netlist = parse_str(text).map_err(|e| {
            fail(format!(
                "netlist does not parse: {}",
                e.first().map(|e| e.to_string()).unwrap_or_default()
            ))
        })?;
        let sig = functional_signature(&netlist).map_err(|e| fail(e.to_string()))?;
        let key = self.signature.as_ref().ok_or_else(|| fail("missing signature".into()))?;
        if SignatureKey::from(&sig) != *key {
            return Err(fail("netlist does not match the stored signature".into()));
        }
        if InterfaceShape::of(&netlist) != self.interface {
            return Err(fail("netlist does not match the stored interface shape".into()));
        }
        let report = structural_report(&netlist).map_err(|e| fail(e.to_string()))?;
        let eff = self.efficiency.ok_or_else(|| fail("missing efficiency record".into()))?;
        let sei = sei_of(&report, &MetricWeights::default()).map_err(|e| fail(e.to_string()))?;
        if (report.gate_count, report.delay, report.register_count) != (eff.gates, eff.delay, eff.registers)
            || (sei - eff.sei).abs() > 1e-12
        {
            return Err(fail(format!(
                "efficiency record G={} D={} differs from measured G={} D={}",
                eff.gates, eff.delay, report.gate_count, report.delay
            )));
        }
        Ok(netlist)
    }

    pub(crate) fn same_key(&self, other: &KnowledgeEntry) -> bool {
        self.kind == EntryKind::CircuitPattern
            && other.kind == EntryKind::CircuitPattern
            && self.signature == other.signature
            && self.interface == other.interface
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum QueryMode {
    ByFunction {
        signature: String,
        interface: InterfaceShape,
        #[serde(default)]
        tags: Vec<String>,
    },
    ByInterface {
        interface: InterfaceShape,
    },
    ByTags {
        tags: Vec<String>,
    },
    ByError {
        error_class: String,
        symptom: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalQuery {
    pub mode: QueryMode,
    pub limit: usize,
}

impl RetrievalQuery {
    pub fn new(mode: QueryMode, limit: usize) -> Self {
        RetrievalQuery {
            mode,
            limit: limit.max(1),
        }
    }
}

/// Lowercase alphanumeric word set.
fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

/// Jaccard similarity of two token sets.
pub fn token_similarity(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokens(a), tokens(b));
    let union = ta.union(&tb).count();
    if union == 0 {
        return 0.0;
    }
    ta.intersection(&tb).count() as f64 / union as f64
}

fn tag_overlap(entry: &KnowledgeEntry, tags: &[String]) -> usize {
    let want: BTreeSet<String> = tags.iter().map(|t| t.to_ascii_lowercase()).collect();
    entry.tags.iter().filter(|t| want.contains(*t)).count()
}

/// An immutable view of the store at one moment.
#[derive(Clone, Debug, Default)]
pub struct StoreSnapshot {
    entries: Arc<Vec<KnowledgeEntry>>,
}

impl StoreSnapshot {
    pub fn entries(&self) -> &[KnowledgeEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&KnowledgeEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Ranked entries for a query; archived entries are never returned.
    pub fn retrieve(&self, q: &RetrievalQuery) -> Vec<KnowledgeEntry> {
        use std::cmp::Ordering;
        let live = self.entries.iter().filter(|e| !e.archived);
        let by_sei = |a: &KnowledgeEntry, b: &KnowledgeEntry| {
            b.sei().partial_cmp(&a.sei()).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id))
        };
        let mut ranked: Vec<&KnowledgeEntry> = match &q.mode {
            QueryMode::ByFunction {
                signature,
                interface,
                tags,
            } => {
                let patterns: Vec<&KnowledgeEntry> = live
                    .filter(|e| e.kind == EntryKind::CircuitPattern && e.interface == *interface)
                    .collect();
                let exact = |e: &KnowledgeEntry| e.signature.as_ref().is_some_and(|s| &s.hash == signature);
                let mut hits: Vec<&KnowledgeEntry> = patterns.iter().copied().filter(|e| exact(e)).collect();
                hits.sort_by(|a, b| by_sei(a, b));
                let mut near: Vec<&KnowledgeEntry> = patterns.into_iter().filter(|e| !exact(e)).collect();
                near.sort_by(|a, b| {
                    tag_overlap(b, tags)
                        .cmp(&tag_overlap(a, tags))
                        .then_with(|| by_sei(a, b))
                });
                hits.extend(near);
                hits
            }
            QueryMode::ByInterface { interface } => {
                let mut v: Vec<&KnowledgeEntry> = live
                    .filter(|e| e.kind == EntryKind::CircuitPattern && e.interface == *interface)
                    .collect();
                v.sort_by(|a, b| by_sei(a, b));
                v
            }
            QueryMode::ByTags { tags } => {
                let mut v: Vec<&KnowledgeEntry> = live
                    .filter(|e| e.kind == EntryKind::CircuitPattern && tag_overlap(e, tags) > 0)
                    .collect();
                v.sort_by(|a, b| {
                    tag_overlap(b, tags)
                        .cmp(&tag_overlap(a, tags))
                        .then_with(|| by_sei(a, b))
                });
                v
            }
            QueryMode::ByError {
                error_class,
                symptom,
            } => {
                let mut v: Vec<(f64, &KnowledgeEntry)> = live
                    .filter_map(|e| {
                        let fix = e.error_fix.as_ref()?;
                        (fix.error_class == *error_class).then(|| (token_similarity(&fix.symptom, symptom), e))
                    })
                    .collect();
                v.sort_by(|(sa, a), (sb, b)| sb.partial_cmp(sa).unwrap_or(Ordering::Equal).then_with(|| a.id.cmp(&b.id)));
                v.into_iter().map(|(_, e)| e).collect()
            }
        };
        ranked.truncate(q.limit.max(1));
        ranked.into_iter().cloned().collect()
    }
}

/// How an admission went.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum StoreOutcome {
    /// New primary entry; `replaced` was archived in its favour.
    Admitted { id: String, replaced: Option<String> },
    /// An equal-or-better primary exists; the arrival was kept archived.
    Archived { id: String, primary: String },
    /// Identical error-fix record already present.
    Duplicate { id: String },
}

impl StoreOutcome {
    pub fn id(&self) -> &str {
        match self {
            StoreOutcome::Admitted { id, .. }
            | StoreOutcome::Archived { id, .. }
            | StoreOutcome::Duplicate { id } => id,
        }
    }
}

#[derive(Debug, Default)]
struct State {
    entries: Vec<KnowledgeEntry>,
    next_id: u64,
    clock: u64,
    snapshot: Option<StoreSnapshot>,
}

/// The knowledge base. Readers take snapshots; writers serialize.
#[derive(Debug)]
pub struct KnowledgeStore {
    state: RwLock<State>,
    dir: Option<PathBuf>,
}

impl KnowledgeStore {
    pub fn in_memory() -> Self {
        KnowledgeStore {
            state: RwLock::new(State {
                next_id: 1,
                ..State::default()
            }),
            dir: None,
        }
    }

    /// Open (or create) a store directory and verify every pattern.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, KnowledgeError> {
        let store = KnowledgeStore::open_unverified(dir)?;
        if let Some(err) = store.verify_all().into_iter().next() {
            return Err(err);
        }
        Ok(store)
    }

    /// Open without re-verifying patterns; use [`KnowledgeStore::verify_all`].
    pub fn open_unverified(dir: impl AsRef<Path>) -> Result<Self, KnowledgeError> {
        let dir = dir.as_ref().to_path_buf();
        let entries = persist::load(&dir)?;
        let next_id = entries
            .iter()
            .filter_map(|e| e.id.strip_prefix('e')?.parse::<u64>().ok())
            .max()
            .map_or(1, |m| m + 1);
        let clock = entries.iter().map(|e| e.provenance.admitted).max().unwrap_or(0);
        Ok(KnowledgeStore {
            state: RwLock::new(State {
                entries,
                next_id,
                clock,
                snapshot: None,
            }),
            dir: Some(dir),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|p| p.into_inner())
    }

    pub fn snapshot(&self) -> StoreSnapshot {
        if let Some(s) = &self.read().snapshot {
            return s.clone();
        }
        let mut st = self.write();
        let snap = StoreSnapshot {
            entries: Arc::new(st.entries.clone()),
        };
        st.snapshot = Some(snap.clone());
        snap
    }

    pub fn len(&self) -> usize {
        self.read().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries that are not archived.
    pub fn primary_count(&self) -> usize {
        self.read().entries.iter().filter(|e| !e.archived).count()
    }

    pub fn retrieve(&self, q: &RetrievalQuery) -> Vec<KnowledgeEntry> {
        self.snapshot().retrieve(q)
    }

    /// Admit an entry. Patterns are verified first.
    pub fn store(&self, mut entry: KnowledgeEntry) -> Result<StoreOutcome, KnowledgeError> {
        let mut st = self.write();
        let id = format!("e{:06}", st.next_id);
        entry.id = id.clone();
        entry.archived = false;
        if entry.kind == EntryKind::CircuitPattern {
            entry.verify()?;
        } else if let Some(fix) = &entry.error_fix {
            if let Some(dup) = st.entries.iter().find(|e| e.error_fix.as_ref() == Some(fix)) {
                return Ok(StoreOutcome::Duplicate { id: dup.id.clone() });
            }
        } else {
            return Err(KnowledgeError::VerificationFailed {
                id,
                reason: "error-fix entry without a fix record".into(),
            });
        }
        st.clock += 1;
        entry.provenance.admitted = st.clock;
        st.next_id += 1;

        let rival = st
            .entries
            .iter()
            .position(|e| !e.archived && e.same_key(&entry));
        let mut touched = Vec::new();
        let outcome = match rival {
            Some(i) if st.entries[i].sei() >= entry.sei() => {
                entry.archived = true;
                StoreOutcome::Archived {
                    id: id.clone(),
                    primary: st.entries[i].id.clone(),
                }
            }
            Some(i) => {
                st.entries[i].archived = true;
                touched.push(st.entries[i].clone());
                StoreOutcome::Admitted {
                    id: id.clone(),
                    replaced: Some(st.entries[i].id.clone()),
                }
            }
            None => StoreOutcome::Admitted {
                id: id.clone(),
                replaced: None,
            },
        };
        touched.push(entry.clone());
        if let Some(dir) = &self.dir {
            persist::append(dir, &touched)?;
        }
        st.entries.push(entry);
        st.snapshot = None;
        log::debug!("knowledge store: {outcome:?}");
        Ok(outcome)
    }

    /// Re-verify every live and archived pattern.
    pub fn verify_all(&self) -> Vec<KnowledgeError> {
        self.read()
            .entries
            .iter()
            .filter(|e| e.kind == EntryKind::CircuitPattern)
            .filter_map(|e| e.verify().err())
            .collect()
    }

    /// Rewrite the index with one record per entry and drop orphaned
    /// pattern files. Returns the number of index lines removed.
    pub fn compact(&self) -> Result<usize, KnowledgeError> {
        let st = self.write();
        match &self.dir {
            Some(dir) => persist::compact(dir, &st.entries),
            None => Ok(0),
        }
    }

    /// Populate an empty store with the primitives, small canonical blocks
    /// and generic error-fix records.
    pub fn seed_baseline(&self) -> Result<usize, KnowledgeError> {
        let n = self.len();
        if n != 0 {
            return Err(KnowledgeError::NotEmpty(n));
        }
        let mut count = 0;
        for entry in seed::baseline_entries()? {
            self.store(entry)?;
            count += 1;
        }
        Ok(count)
    }
}
