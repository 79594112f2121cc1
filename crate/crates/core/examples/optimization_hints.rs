//! Local rewrite hints a reviewer can hand back to the designer, applied
//! one at a time.

use gatesmith::boolopt::{apply_hint, suggest_optimizations};
use gatesmith::netlist::structural_report;
use gatesmith::parser::{parse_str, render};
use gatesmith::sim::truth_table;

const WASTEFUL: &str = "
module sel(input a, input b, input s, output y);
  wire ns, nns, t0, t1, t1b, u;
  not  i1(ns, s);
  not  i2(nns, ns);
  and  g1(t0, a, ns);
  and  g2(t1, b, nns);
  and  g3(t1b, b, nns);
  and  g4(u, t0, 1'b1);
  or   o1(y, u, t1);
endmodule";

fn main() {
    let mut n = parse_str(WASTEFUL).unwrap();
    let function = truth_table(&n).unwrap().hash;
    loop {
        let r = structural_report(&n).unwrap();
        let hints = suggest_optimizations(&n);
        println!("G={} D={}, {} hint(s)", r.gate_count, r.delay, hints.len());
        let Some(h) = hints.first() else { break };
        println!("  applying {h}");
        n = apply_hint(&n, h).unwrap();
        assert_eq!(truth_table(&n).unwrap().hash, function);
    }
    println!("\n{}", render(&n));
}
