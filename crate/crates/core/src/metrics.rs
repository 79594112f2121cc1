//! Efficiency scoring, benchmark aggregation, Pass@k and human tiers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::StructuralReport;
use crate::sim::SimOutcome;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("circuit has no gates and no delay, so it has no efficiency score")]
    Degenerate,
    #[error("cannot aggregate an empty list of task scores")]
    Empty,
    #[error("weights must be positive and finite (alpha={alpha}, beta={beta}, epsilon={epsilon})")]
    Weights { alpha: f64, beta: f64, epsilon: f64 },
    #[error("need 0 <= c <= n and 1 <= k <= n, got n={n} c={c} k={k}")]
    Stats { n: u32, c: u32, k: u32 },
}

/// Weights of the efficiency index. One pair serves both the design
/// objective and the score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricWeights {
    pub alpha: f64,
    pub beta: f64,
    /// Floor applied to failed or tiny scores before taking logs.
    pub epsilon: f64,
    /// Weight of one register in the gate count.
    #[serde(default = "default_register_weight")]
    pub register_weight: f64,
}

fn default_register_weight() -> f64 {
    1.0
}

impl Default for MetricWeights {
    fn default() -> Self {
        MetricWeights {
            alpha: 1.0,
            beta: 1.0,
            epsilon: 1e-5,
            register_weight: 1.0,
        }
    }
}

impl MetricWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.alpha) && ok(self.beta) && ok(self.epsilon) && self.register_weight.is_finite() && self.register_weight >= 0.0 {
            Ok(())
        } else {
            Err(MetricsError::Weights {
                alpha: self.alpha,
                beta: self.beta,
                epsilon: self.epsilon,
            })
        }
    }
}

/// `1 / (alpha*G + beta*D)`.
pub fn sei_task(gates: f64, delay: f64, w: &MetricWeights) -> Result<f64, MetricsError> {
    w.validate()?;
    let cost = w.alpha * gates + w.beta * delay;
    if gates < 0.0 || delay < 0.0 || cost <= 0.0 || !cost.is_finite() {
        return Err(MetricsError::Degenerate);
    }
    Ok(1.0 / cost)
}

/// Score of a structural report, applying the register weight.
pub fn sei_of(report: &StructuralReport, w: &MetricWeights) -> Result<f64, MetricsError> {
    let combinational = (report.gate_count - report.register_count) as f64;
    let g = combinational + w.register_weight * report.register_count as f64;
    sei_task(g, report.delay as f64, w)
}

/// Geometric mean over tasks. `None` marks a failed task, which counts as 0
/// and is floored to epsilon like any other score.
pub fn sei_benchmark(task_seis: &[Option<f64>], w: &MetricWeights) -> Result<f64, MetricsError> {
    w.validate()?;
    if task_seis.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut floored: Vec<f64> = task_seis
        .iter()
        .map(|s| s.unwrap_or(0.0).max(w.epsilon))
        .collect();
    // Fixed summation order makes the result exactly permutation invariant.
    floored.sort_by(f64::total_cmp);
    // exp(ln x) can drift by an ulp; equal inputs return their value exactly.
    if floored.iter().all(|x| *x == floored[0]) {
        return Ok(floored[0]);
    }
    let sum: f64 = floored.iter().map(|x| x.ln()).sum();
    Ok((sum / floored.len() as f64).exp())
}

/// Arithmetic mean of per-task scores, failed tasks counting 0. Used for
/// per-difficulty columns.
pub fn sei_category_mean(task_seis: &[Option<f64>]) -> Option<f64> {
    if task_seis.is_empty() {
        return None;
    }
    Some(task_seis.iter().map(|s| s.unwrap_or(0.0)).sum::<f64>() / task_seis.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: u32,
    pub c: u32,
    pub k: u32,
}

/// Unbiased Pass@k: `1 - C(n-c, k) / C(n, k)`, as a running product so that
/// no binomial is ever formed.
pub fn pass_at_k(s: SampleStats) -> Result<f64, MetricsError> {
    let SampleStats { n, c, k } = s;
    if c > n || k == 0 || k > n {
        return Err(MetricsError::Stats { n, c, k });
    }
    if n - c < k {
        return Ok(1.0);
    }
    // C(n-c,k)/C(n,k) = prod_{i=n-c+1}^{n} (1 - k/i)
    let miss: f64 = (n - c + 1..=n).map(|i| 1.0 - k as f64 / i as f64).product();
    Ok((1.0 - miss).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Below,
    Low,
    Mid,
    Top,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Top => "top",
            Tier::Mid => "mid",
            Tier::Low => "low",
            Tier::Below => "below",
        })
    }
}

/// Closed SEI ranges of the three human tiers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierBoundaries {
    pub top: (f64, f64),
    pub mid: (f64, f64),
    pub low: (f64, f64),
}

impl Default for TierBoundaries {
    fn default() -> Self {
        TierBoundaries {
            top: (0.0951, 0.1252),
            mid: (0.0905, 0.0924),
            low: (0.0851, 0.0905),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TierFlag {
    /// Between two tier ranges; assigned to the lower one.
    Gap,
    /// Better than the best human range.
    AboveRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierVerdict {
    pub tier: Tier,
    pub sei: f64,
    pub boundaries: TierBoundaries,
    pub flag: Option<TierFlag>,
}

/// Place a benchmark score among the human tiers. A value on a shared
/// boundary goes to the higher tier.
pub fn classify_tier(sei: f64, b: &TierBoundaries) -> TierVerdict {
    let in_gap = |lo: f64, hi: f64| sei > hi && sei < lo;
    let (tier, flag) = if sei >= b.top.0 {
        (Tier::Top, (sei > b.top.1).then_some(TierFlag::AboveRange))
    } else if sei >= b.mid.0 {
        (Tier::Mid, in_gap(b.top.0, b.mid.1).then_some(TierFlag::Gap))
    } else if sei >= b.low.0 {
        (Tier::Low, in_gap(b.mid.0, b.low.1).then_some(TierFlag::Gap))
    } else {
        (Tier::Below, None)
    };
    TierVerdict {
        tier,
        sei,
        boundaries: *b,
        flag,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FunctionalFeedback,
    EfficiencyFeedback,
    Accept,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::FunctionalFeedback => "functional-feedback",
            Verdict::EfficiencyFeedback => "efficiency-feedback",
            Verdict::Accept => "accept",
        })
    }
}

/// Correctness paired with efficiency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualReward {
    pub correctness: f64,
    /// Only defined for fully correct designs. Relative to the reference
    /// score when one exists, otherwise the raw score.
    pub efficiency: Option<f64>,
    pub sei: Option<f64>,
    pub verdict: Verdict,
}

/// Tolerance below 1.0 at which a design still matches its reference.
const MATCH_TOLERANCE: f64 = 1e-9;

pub fn dual_reward(
    outcome: &SimOutcome,
    report: &StructuralReport,
    reference_sei: Option<f64>,
    w: &MetricWeights,
) -> DualReward {
    let correctness = outcome.correctness;
    if !outcome.all_passed() {
        return DualReward {
            correctness,
            efficiency: None,
            sei: None,
            verdict: Verdict::FunctionalFeedback,
        };
    }
    let sei = sei_of(report, w).ok();
    let (efficiency, verdict) = match (sei, reference_sei) {
        (Some(s), Some(r)) if r > 0.0 => {
            let ratio = s / r;
            let v = if ratio >= 1.0 - MATCH_TOLERANCE {
                Verdict::Accept
            } else {
                Verdict::EfficiencyFeedback
            };
            (Some(ratio), v)
        }
        (Some(s), _) => (Some(s), Verdict::Accept),
        // A correct design with no gates and no delay is pure wiring.
        (None, _) => (None, Verdict::Accept),
    };
    DualReward {
        correctness,
        efficiency,
        sei,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> MetricWeights {
        MetricWeights::default()
    }

    fn report(g: usize, d: usize) -> StructuralReport {
        StructuralReport {
            gate_count: g,
            delay: d,
            register_count: 0,
        }
    }

    fn outcome(passed: usize, failed: usize) -> SimOutcome {
        SimOutcome {
            passed,
            failed,
            first_failure: None,
            correctness: passed as f64 / (passed + failed) as f64,
        }
    }

    #[test]
    fn sei_examples() {
        assert!((sei_task(96.0, 12.0, &w()).unwrap() - 0.00926).abs() < 5e-6);
        assert_eq!(sei_task(8.0, 2.0, &w()).unwrap(), 0.1);
        assert!((sei_task(13.0, 8.0, &w()).unwrap() - 0.04762).abs() < 5e-6);
        assert_eq!(sei_task(0.0, 0.0, &w()), Err(MetricsError::Degenerate));
    }

    #[test]
    fn benchmark_examples() {
        assert!((sei_benchmark(&[Some(0.1); 3], &w()).unwrap() - 0.1).abs() < 1e-15);
        let mixed = sei_benchmark(&[Some(0.1), None], &w()).unwrap();
        assert!((mixed - 1e-3).abs() / 1e-3 < 1e-12);
        assert_eq!(sei_benchmark(&[None, None], &w()).unwrap(), 1e-5);
        assert_eq!(sei_benchmark(&[], &w()), Err(MetricsError::Empty));
    }

    #[test]
    fn pass_at_k_examples() {
        let p = |n, c, k| pass_at_k(SampleStats { n, c, k }).unwrap();
        assert_eq!(p(20, 20, 1), 1.0);
        assert_eq!(p(20, 0, 5), 0.0);
        assert!((p(20, 10, 1) - 0.5).abs() < 1e-15);
        assert!(pass_at_k(SampleStats { n: 5, c: 6, k: 1 }).is_err());
        assert!(pass_at_k(SampleStats { n: 5, c: 1, k: 0 }).is_err());
    }

    #[test]
    fn tiers() {
        let b = TierBoundaries::default();
        assert_eq!(classify_tier(0.115, &b).tier, Tier::Top);
        assert_eq!(classify_tier(0.088, &b).tier, Tier::Low);
        assert_eq!(classify_tier(0.0, &b).tier, Tier::Below);
        assert_eq!(classify_tier(0.0951, &b).tier, Tier::Top);
        assert_eq!(classify_tier(0.0905, &b).tier, Tier::Mid);
        let gap = classify_tier(0.094, &b);
        assert_eq!((gap.tier, gap.flag), (Tier::Mid, Some(TierFlag::Gap)));
        let hi = classify_tier(0.2, &b);
        assert_eq!((hi.tier, hi.flag), (Tier::Top, Some(TierFlag::AboveRange)));
        assert_eq!(classify_tier(0.092, &b).flag, None);
    }

    #[test]
    fn dual_reward_examples() {
        let r = dual_reward(&outcome(3, 1), &report(2, 1), Some(0.1), &w());
        assert_eq!((r.efficiency, r.verdict), (None, Verdict::FunctionalFeedback));
        let r = dual_reward(&outcome(4, 0), &report(8, 2), Some(0.1), &w());
        assert_eq!(r.verdict, Verdict::Accept);
        assert!((r.efficiency.unwrap() - 1.0).abs() < 1e-12);
        let r = dual_reward(&outcome(4, 0), &report(96, 12), Some(0.1), &w());
        assert_eq!(r.verdict, Verdict::EfficiencyFeedback);
        assert!((r.efficiency.unwrap() - 0.0926).abs() < 1e-4);
        let r = dual_reward(&outcome(4, 0), &report(96, 12), None, &w());
        assert_eq!(r.verdict, Verdict::Accept);
    }

    #[test]
    fn register_weight_applies() {
        let rep = StructuralReport {
            gate_count: 5,
            delay: 1,
            register_count: 2,
        };
        let half = MetricWeights {
            register_weight: 0.5,
            ..w()
        };
        assert_eq!(sei_of(&rep, &w()).unwrap(), 1.0 / 6.0);
        assert_eq!(sei_of(&rep, &half).unwrap(), 1.0 / 5.0);
    }
}
