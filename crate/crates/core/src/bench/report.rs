//! Benchmark results: per-task rows, aggregates, JSON and table output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CircuitClass, Difficulty};
use crate::metrics::{
    classify_tier, pass_at_k, sei_benchmark, sei_category_mean, MetricWeights, MetricsError, SampleStats,
    TierBoundaries, TierVerdict,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    /// At least one sample verified.
    Solved,
    /// No sample verified.
    Unsolved,
    /// Every sample ended in an error (transport, configuration).
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestDesign {
    pub gates: usize,
    pub delay: usize,
    pub sei: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task_id: String,
    pub title: String,
    pub difficulty: Difficulty,
    pub class: CircuitClass,
    /// Samples drawn (n).
    pub samples: u32,
    /// Verified samples (c).
    pub correct: u32,
    /// Samples that ended in an error rather than a verdict.
    pub errors: u32,
    pub pass_at_k: BTreeMap<u32, f64>,
    /// Highest-SEI verified sample.
    pub best: Option<BestDesign>,
    pub reference_sei: Option<f64>,
    pub status: RowStatus,
    /// First error message, if any sample errored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TaskRow {
    /// Row for `samples` runs of which `correct` verified.
    pub fn new(
        task: &super::TaskPack,
        samples: u32,
        correct: u32,
        errors: u32,
        ks: &[u32],
        best: Option<BestDesign>,
    ) -> Result<TaskRow, MetricsError> {
        let mut pk = BTreeMap::new();
        for &k in ks {
            if k >= 1 && k <= samples {
                pk.insert(k, pass_at_k(SampleStats { n: samples, c: correct, k })?);
            }
        }
        let status = if correct > 0 {
            RowStatus::Solved
        } else if errors == samples && samples > 0 {
            RowStatus::Error
        } else {
            RowStatus::Unsolved
        };
        Ok(TaskRow {
            task_id: task.id.clone(),
            title: task.title.clone(),
            difficulty: task.difficulty,
            class: task.class,
            samples,
            correct,
            errors,
            pass_at_k: pk,
            best,
            reference_sei: task.reference_sei(),
            status,
            error: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultySummary {
    pub difficulty: Difficulty,
    pub tasks: usize,
    /// Arithmetic mean over the tier's tasks.
    pub pass_at_k: BTreeMap<u32, f64>,
    /// Arithmetic mean of best SEI, unsolved tasks counting 0.
    pub sei: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub tasks: usize,
    pub pass_at_k: BTreeMap<u32, f64>,
    /// Geometric mean of floored per-task best SEI.
    pub sei: f64,
    pub tier: TierVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    /// Echo of the run configuration.
    pub config: serde_json::Value,
    pub weights: MetricWeights,
    pub rows: Vec<TaskRow>,
    pub by_difficulty: Vec<DifficultySummary>,
    pub overall: Overall,
    /// Wall-clock seconds; absent unless timing was requested, so that
    /// repeated runs produce identical files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("report aggregates do not match its rows: {0}")]
    Inconsistent(String),
}

fn mean_map(rows: &[&TaskRow]) -> BTreeMap<u32, f64> {
    let mut ks: Vec<u32> = rows.iter().flat_map(|r| r.pass_at_k.keys().copied()).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .filter_map(|k| {
            let vals: Vec<f64> = rows.iter().filter_map(|r| r.pass_at_k.get(&k).copied()).collect();
            (vals.len() == rows.len()).then(|| (k, vals.iter().sum::<f64>() / vals.len() as f64))
        })
        .collect()
}

impl BenchmarkReport {
    /// Aggregate rows into a report.
    pub fn from_rows(
        rows: Vec<TaskRow>,
        config: serde_json::Value,
        weights: MetricWeights,
        tiers: TierBoundaries,
    ) -> Result<BenchmarkReport, ReportError> {
        let (by_difficulty, overall) = aggregate(&rows, &weights, &tiers)?;
        Ok(BenchmarkReport {
            schema_version: REPORT_SCHEMA_VERSION,
            config,
            weights,
            rows,
            by_difficulty,
            overall,
            wall_seconds: None,
        })
    }

    /// Recompute every aggregate from the rows and compare exactly.
    pub fn check_consistency(&self) -> Result<(), ReportError> {
        let (by_difficulty, overall) = aggregate(&self.rows, &self.weights, &self.overall.tier.boundaries)?;
        if by_difficulty != self.by_difficulty {
            return Err(ReportError::Inconsistent("per-difficulty aggregates".into()));
        }
        if overall != self.overall {
            return Err(ReportError::Inconsistent("overall aggregates".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<BenchmarkReport, ReportError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn aggregate(
    rows: &[TaskRow],
    w: &MetricWeights,
    tiers: &TierBoundaries,
) -> Result<(Vec<DifficultySummary>, Overall), ReportError> {
    let mut by_difficulty = Vec::new();
    for d in Difficulty::ALL {
        let group: Vec<&TaskRow> = rows.iter().filter(|r| r.difficulty == d).collect();
        if group.is_empty() {
            continue;
        }
        let seis: Vec<Option<f64>> = group.iter().map(|r| r.best.map(|b| b.sei)).collect();
        by_difficulty.push(DifficultySummary {
            difficulty: d,
            tasks: group.len(),
            pass_at_k: mean_map(&group),
            sei: sei_category_mean(&seis).unwrap_or(0.0),
        });
    }
    let all: Vec<&TaskRow> = rows.iter().collect();
    let seis: Vec<Option<f64>> = rows.iter().map(|r| r.best.map(|b| b.sei)).collect();
    let sei = sei_benchmark(&seis, w)?;
    let overall = Overall {
        tasks: rows.len(),
        pass_at_k: mean_map(&all),
        sei,
        tier: classify_tier(sei, tiers),
    };
    Ok((by_difficulty, overall))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Lossless JSON.
    Json,
    /// Human-readable tables.
    Table,
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.digits$}"))
}

/// Render a report.
pub fn emit_report(report: &BenchmarkReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Table => table(report),
    }
}

fn table(r: &BenchmarkReport) -> String {
    let mut out = String::new();
    let col = |d: Difficulty| r.by_difficulty.iter().find(|s| s.difficulty == d);
    let _ = writeln!(out, "{:<10}{:>10}{:>10}{:>10}{:>10}", "", "Easy", "Medium", "Hard", "Overall");
    let k1 = |m: &BTreeMap<u32, f64>| m.get(&1).copied();
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>10}{:>10}{:>10}",
        "Pass@1",
        fmt_opt(col(Difficulty::Easy).and_then(|s| k1(&s.pass_at_k)), 3),
        fmt_opt(col(Difficulty::Medium).and_then(|s| k1(&s.pass_at_k)), 3),
        fmt_opt(col(Difficulty::Hard).and_then(|s| k1(&s.pass_at_k)), 3),
        fmt_opt(k1(&r.overall.pass_at_k), 3),
    );
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>10}{:>10}{:>10}",
        "SEI",
        fmt_opt(col(Difficulty::Easy).map(|s| s.sei), 4),
        fmt_opt(col(Difficulty::Medium).map(|s| s.sei), 4),
        fmt_opt(col(Difficulty::Hard).map(|s| s.sei), 4),
        format!("{:.4}", r.overall.sei),
    );
    let t = &r.overall.tier;
    let flag = match t.flag {
        Some(crate::metrics::TierFlag::Gap) => " (between tier ranges)",
        Some(crate::metrics::TierFlag::AboveRange) => " (above the top tier range)",
        None => "",
    };
    let _ = writeln!(
        out,
        "Tier: {}{flag}; top range {:.4}-{:.4}",
        t.tier, t.boundaries.top.0, t.boundaries.top.1
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<20}{:<8}{:>8}{:>8}{:>6}{:>6}{:>9}{:>9}  {}",
        "task", "tier", "c/n", "pass@1", "G", "D", "SEI", "ref", "status"
    );
    for row in &r.rows {
        let (g, d, s) = match row.best {
            Some(b) => (b.gates.to_string(), b.delay.to_string(), format!("{:.4}", b.sei)),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let status = match row.status {
            RowStatus::Solved => "solved",
            RowStatus::Unsolved => "unsolved",
            RowStatus::Error => "error",
        };
        let _ = writeln!(
            out,
            "{:<20}{:<8}{:>8}{:>8}{:>6}{:>6}{:>9}{:>9}  {}",
            row.task_id,
            row.difficulty.to_string(),
            format!("{}/{}", row.correct, row.samples),
            fmt_opt(row.pass_at_k.get(&1).copied(), 3),
            g,
            d,
            s,
            fmt_opt(row.reference_sei, 4),
            status
        );
    }
    out
}
