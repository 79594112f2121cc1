//! Cycle-accurate simulation of a registered design: the shipped "101"
//! sequence detector task and its reference netlist.

use gatesmith::bench::{evaluate, seed_task};
use gatesmith::metrics::MetricWeights;
use gatesmith::parser::parse_str;

fn main() {
    let task = seed_task("seq_detector_101").expect("shipped task");
    println!("{}\n", task.spec.trim());
    let reference = task.reference.as_ref().and_then(|r| r.netlist.as_deref()).expect("reference netlist");
    println!("{reference}");
    let n = parse_str(reference).unwrap();
    let r = evaluate(&task, &n, &MetricWeights::default()).unwrap();
    println!(
        "{} cycles, {}/{} checks pass, G={} D={} registers={} SEI {:.4}",
        task.testbench.cycles,
        r.passed,
        r.passed + r.failed,
        r.gates,
        r.delay,
        r.registers,
        r.sei.unwrap_or(0.0)
    );
}
