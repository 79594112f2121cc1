//! Parse a structural netlist, report G and D, and show how the syntax lock
//! rejects behavioral code.

use gatesmith::netlist::{structural_report, warnings};
use gatesmith::parser::{parse_str, render};

const RIPPLE2: &str = "
module add2(input [1:0] a, input [1:0] b, output [1:0] s, output co);
  wire p0, c0, p1, g1, t1;
  xor x0(s[0], a[0], b[0]);
  and a0(c0, a[0], b[0]);
  xor x1(p1, a[1], b[1]);
  xor x2(s[1], p1, c0);
  and a1(g1, a[1], b[1]);
  and a2(t1, p1, c0);
  or  o1(co, g1, t1);
endmodule";

fn main() {
    let n = parse_str(RIPPLE2).expect("valid netlist");
    let r = structural_report(&n).unwrap();
    println!("{}: G={} D={} registers={}", n.name(), r.gate_count, r.delay, r.register_count);
    for w in warnings(&n) {
        println!("warning: {w:?}");
    }
    println!("\ncanonical form:\n{}", render(&n));

    let behavioral = "module add2(input a, input b, output s); assign s = a ^ b; endmodule";
    match parse_str(behavioral) {
        Ok(_) => unreachable!("behavioral code is not accepted"),
        Err(errs) => {
            for e in errs {
                println!("rejected: {e}");
            }
        }
    }
}
