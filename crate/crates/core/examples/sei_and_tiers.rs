//! Efficiency scoring: per-design SEI, the benchmark geometric mean, Pass@k
//! and placement among the human tiers.

use gatesmith::metrics::{classify_tier, pass_at_k, sei_benchmark, sei_task, MetricWeights, SampleStats, TierBoundaries};

fn main() {
    let w = MetricWeights::default();
    for (g, d) in [(96.0, 12.0), (13.0, 8.0), (8.0, 2.0), (101.0, 16.0), (34.0, 8.0)] {
        println!("G={g:>3} D={d:>2}  SEI {:.4}", sei_task(g, d, &w).unwrap());
    }

    let per_task = [Some(0.125), Some(0.25), None, Some(0.0667)];
    let overall = sei_benchmark(&per_task, &w).unwrap();
    println!("\nbenchmark SEI over {per_task:?} = {overall:.5} (failed task floored at {})", w.epsilon);

    for c in [0, 1, 5, 10, 20] {
        let row: Vec<String> = [1, 5, 10]
            .iter()
            .map(|&k| format!("pass@{k}={:.3}", pass_at_k(SampleStats { n: 20, c, k }).unwrap()))
            .collect();
        println!("n=20 c={c:>2}  {}", row.join("  "));
    }

    let b = TierBoundaries::default();
    for sei in [0.115, 0.0951, 0.094, 0.088, 0.05, 0.2] {
        let v = classify_tier(sei, &b);
        println!("SEI {sei:<6} -> {} {}", v.tier, v.flag.map_or(String::new(), |f| format!("({f:?})")));
    }
}
