//! Exact minimum-gate networks for small functions, over different gate
//! libraries.

use gatesmith::boolopt::{min_gate_network, BoolFunction};
use gatesmith::netlist::GateKind;
use gatesmith::parser::render;

fn main() {
    let xor = BoolFunction::from_table(2, 0b0110).unwrap();
    let libraries: [(&str, &[GateKind]); 3] = [
        ("all gates", &GateKind::COMBINATIONAL),
        ("and/or/not", &[GateKind::And, GateKind::Or, GateKind::Not]),
        ("nand only", &[GateKind::Nand]),
    ];
    for (label, lib) in libraries {
        match min_gate_network(&xor, lib, 6).unwrap() {
            Some((n, r)) => println!("xor over {label}: G={} D={}\n{}", r.gate_count, r.delay, render(&n)),
            None => println!("xor over {label}: nothing within 6 gates"),
        }
    }

    let half_adder = BoolFunction::from_fn(2, 2, |r| vec![(r ^ r >> 1) & 1 == 1, r == 3]).unwrap();
    let (n, r) = min_gate_network(&half_adder, &GateKind::COMBINATIONAL, 4).unwrap().unwrap();
    println!("half adder: G={} D={}\n{}", r.gate_count, r.delay, render(&n));
}
