mod common;

use proptest::prelude::*;

use gatesmith::netlist::{same_structure, structural_report, validate, GateKind};
use gatesmith::parser::{parse_str, render};
use gatesmith::sim::truth_table;

const TOKENS: &[&str] = &[
    "module", "endmodule", "input", "output", "wire", "assign", "and", "or", "not", "xor", "nand", "dff", "nor",
    "always", "if", "case", "reg", "m", "a", "b", "y", "w", "clk", "(", ")", ";", ",", "=", "[", "]", ":", "0", "1",
    "3", "1'b0", "1'b1", "&", "|", "^", "~", "?", "+", "@", "#", "//", "/*", "*/", "\n", "`", "\"", "$display",
];

fn soup() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(TOKENS), 0..60).prop_map(|t| t.join(" "))
}

/// Token soup wrapped in a module frame, so more of it reaches the parser
/// proper instead of failing on the header.
fn framed() -> impl Strategy<Value = String> {
    soup().prop_map(|body| format!("module m(input a, input b, output y);\n{body}\nendmodule"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_round_trips(r in common::recipe(6, 24, 3)) {
        let n = common::build(&r);
        let text = render(&n);
        let back = parse_str(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert!(same_structure(&n, &back), "{}", text);
        prop_assert_eq!(structural_report(&n).unwrap(), structural_report(&back).unwrap());
        prop_assert_eq!(render(&back), text);
        if !n.has_registers() && n.input_bits().len() <= 12 {
            prop_assert_eq!(truth_table(&n).unwrap().hash, truth_table(&back).unwrap().hash);
        }
    }

    #[test]
    fn arbitrary_text_never_panics_and_accepts_only_locked_valid_netlists(src in prop_oneof![soup(), framed()]) {
        match parse_str(&src) {
            Ok(n) => {
                prop_assert!(validate(&n).is_empty());
                prop_assert!(n.gates().iter().all(|g| GateKind::COMBINATIONAL.contains(&g.kind) || g.kind == GateKind::Dff));
            }
            Err(errs) => {
                prop_assert!(!errs.is_empty());
                let lines = src.lines().count().max(1) as u32 + 1;
                for e in &errs {
                    prop_assert!(e.line >= 1 && e.line <= lines, "line {} of {}", e.line, lines);
                }
            }
        }
    }
}
