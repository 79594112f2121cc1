//! On-disk layout: an append-only `index.jsonl` plus one netlist file per
//! pattern under `patterns/`. A later index line for the same id replaces
//! the earlier one, which is how archival is recorded.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{KnowledgeEntry, KnowledgeError};

pub const INDEX_FILE: &str = "index.jsonl";
pub const PATTERN_DIR: &str = "patterns";

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    #[serde(flatten)]
    entry: KnowledgeEntry,
    pattern_file: Option<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> KnowledgeError + '_ {
    move |source| KnowledgeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn pattern_rel(id: &str) -> String {
    format!("{PATTERN_DIR}/{id}.v")
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), KnowledgeError> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn record_line(entry: &KnowledgeEntry) -> String {
    let mut stripped = entry.clone();
    let pattern_file = stripped.netlist.take().map(|_| pattern_rel(&entry.id));
    let rec = IndexRecord {
        entry: stripped,
        pattern_file,
    };
    serde_json::to_string(&rec).expect("index records always serialize")
}

/// Write pattern files, then append one index line per entry.
pub(super) fn append(dir: &Path, entries: &[KnowledgeEntry]) -> Result<(), KnowledgeError> {
    let patterns = dir.join(PATTERN_DIR);
    fs::create_dir_all(&patterns).map_err(io_err(&patterns))?;
    let mut lines = String::new();
    for e in entries {
        if let Some(text) = &e.netlist {
            let path = dir.join(pattern_rel(&e.id));
            if !path.exists() {
                write_atomic(&path, text)?;
            }
        }
        lines.push_str(&record_line(e));
        lines.push('\n');
    }
    let index = dir.join(INDEX_FILE);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&index)
        .map_err(io_err(&index))?;
    f.write_all(lines.as_bytes()).map_err(io_err(&index))?;
    f.sync_data().map_err(io_err(&index))
}

pub(super) fn load(dir: &Path) -> Result<Vec<KnowledgeEntry>, KnowledgeError> {
    fs::create_dir_all(dir.join(PATTERN_DIR)).map_err(io_err(dir))?;
    let index = dir.join(INDEX_FILE);
    if !index.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&index).map_err(io_err(&index))?;
    let lines: Vec<&str> = text.lines().collect();
    let mut order: Vec<String> = Vec::new();
    let mut latest: HashMap<String, KnowledgeEntry> = HashMap::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: IndexRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            // A torn final line is what an interrupted append leaves behind.
            Err(e) if i + 1 == lines.len() && !text.ends_with('\n') => {
                log::warn!("ignoring incomplete last index line: {e}");
                continue;
            }
            Err(e) => {
                return Err(KnowledgeError::Index {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        };
        let mut entry = rec.entry;
        if let Some(rel) = rec.pattern_file {
            let path = dir.join(&rel);
            entry.netlist = fs::read_to_string(&path).ok();
            if entry.netlist.is_none() {
                log::warn!("pattern file {} is missing", path.display());
            }
        }
        if !latest.contains_key(&entry.id) {
            order.push(entry.id.clone());
        }
        latest.insert(entry.id.clone(), entry);
    }
    Ok(order
        .into_iter()
        .map(|id| latest.remove(&id).expect("every ordered id was inserted"))
        .collect())
}

/// Rewrite the index with one line per entry; drop unreferenced pattern
/// files. Returns how many index lines went away.
pub(super) fn compact(dir: &Path, entries: &[KnowledgeEntry]) -> Result<usize, KnowledgeError> {
    let index = dir.join(INDEX_FILE);
    let before = match fs::read_to_string(&index) {
        Ok(t) => t.lines().filter(|l| !l.trim().is_empty()).count(),
        Err(_) => 0,
    };
    let mut out = String::new();
    for e in entries {
        out.push_str(&record_line(e));
        out.push('\n');
    }
    write_atomic(&index, &out)?;

    let keep: BTreeSet<String> = entries
        .iter()
        .filter(|e| e.netlist.is_some())
        .map(|e| format!("{}.v", e.id))
        .collect();
    let patterns = dir.join(PATTERN_DIR);
    if let Ok(listing) = fs::read_dir(&patterns) {
        for item in listing.flatten() {
            let name = item.file_name().to_string_lossy().into_owned();
            if !keep.contains(&name) {
                fs::remove_file(item.path()).map_err(io_err(&item.path()))?;
            }
        }
    }
    Ok(before.saturating_sub(entries.len()))
}
