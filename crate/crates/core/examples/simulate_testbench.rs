//! Run a TOML testbench against a design and inspect the first failure.

use gatesmith::parser::parse_str;
use gatesmith::sim::{simulate, truth_table, Interface, Testbench};

const TESTBENCH: &str = r#"
schema_version = 1

[[vector]]
inputs = { a = 0, b = 0 }
expect = { y = 1 }

[[vector]]
inputs = { a = 0, b = 1 }
expect = { y = 0 }

[[vector]]
inputs = { a = 1, b = 0 }
expect = { y = 0 }

[[vector]]
inputs = { a = 1, b = 1 }
expect = { y = 1 }
"#;

fn main() {
    let good = parse_str("module xnor2(input a, input b, output y); wire d; xor g1(d, a, b); not g2(y, d); endmodule").unwrap();
    let bad = parse_str("module xnor2(input a, input b, output y); wire d; or g1(d, a, b); not g2(y, d); endmodule").unwrap();
    let tb = Testbench::from_toml_with(TESTBENCH, &Interface::of(&good)).expect("testbench parses");

    for (label, n) in [("xor+not", &good), ("or+not", &bad)] {
        let out = simulate(n, &tb).unwrap();
        print!("{label}: {}/{} vectors pass", out.passed, out.passed + out.failed);
        match &out.first_failure {
            Some(f) => println!(", first failure {f}"),
            None => println!(),
        }
    }

    let t = truth_table(&good).unwrap();
    println!("truth table hash {}", &t.hash[..16]);
    for row in 0..4 {
        println!("  a={} b={} -> y={}", row & 1, row >> 1 & 1, t.value(row, 0) as u8);
    }
}
