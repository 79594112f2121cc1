//! Baseline contents for an empty store.

use super::{KnowledgeEntry, KnowledgeError, Provenance};
use crate::parser::parse_str;

const PATTERNS: &[(&str, &[&str])] = &[
    (
        "module and2(input a, input b, output y); and g1(y, a, b); endmodule",
        &["primitive", "and"],
    ),
    (
        "module or2(input a, input b, output y); or g1(y, a, b); endmodule",
        &["primitive", "or"],
    ),
    (
        "module inv(input a, output y); not g1(y, a); endmodule",
        &["primitive", "not", "inverter"],
    ),
    (
        "module xor2(input a, input b, output y); xor g1(y, a, b); endmodule",
        &["primitive", "xor", "parity"],
    ),
    (
        "module nand2(input a, input b, output y); nand g1(y, a, b); endmodule",
        &["primitive", "nand"],
    ),
    (
        "module dff1(input clk, input d, output q); dff r1(q, d, clk); endmodule",
        &["primitive", "dff", "register", "sequential"],
    ),
    (
        "module half_adder(input a, input b, output sum, output carry);
           xor g1(sum, a, b);
           and g2(carry, a, b);
         endmodule",
        &["adder", "half-adder", "arithmetic"],
    ),
    (
        "module full_adder(input a, input b, input cin, output sum, output cout);
           wire p, g, t;
           xor g1(p, a, b);
           xor g2(sum, p, cin);
           and g3(g, a, b);
           and g4(t, p, cin);
           or g5(cout, g, t);
         endmodule",
        &["adder", "full-adder", "arithmetic", "carry"],
    ),
    (
        "module mux2(input a, input b, input s, output y);
           wire d, m;
           xor g1(d, a, b);
           and g2(m, s, d);
           xor g3(y, a, m);
         endmodule",
        &["mux", "mux2", "select"],
    ),
];

const FIXES: &[(&str, &str, &str)] = &[
    (
        "behavioral-construct",
        "always block or procedural statement or operator expression is not allowed",
        "Rewrite the logic as gate instances. Replace `assign y = a & b;` with `and g1(y, a, b);` and model state with `dff` instances.",
    ),
    (
        "unknown-primitive",
        "nor xnor buf or submodule instance is not a known primitive",
        "Compose it from the allowed gates: nor is `or` then `not`, xnor is `xor` then `not`, buf is a plain `assign`.",
    ),
    (
        "arity",
        "gate instance has the wrong number of pins",
        "Two-input gates take (out, a, b), `not` takes (out, a) and `dff` takes (q, d, clk). Chain gates for wider fan-in.",
    ),
    (
        "combinational-loop",
        "gate output feeds back into its own input cycle without a register",
        "Break the cycle. Either the feedback is a mistake and a wire is misnamed, or the state must pass through a `dff`.",
    ),
    (
        "multi-driver",
        "net driven by more than one gate or assign",
        "Give each gate its own output wire and combine them with an explicit gate.",
    ),
    (
        "dangling-net",
        "net or output is read but never driven",
        "Drive every declared wire and output bit, or tie unused outputs to a constant with `assign y = 1'b0;`.",
    ),
    (
        "width",
        "bit index out of range or width mismatch in assign or part-select",
        "Connect single bits only (`a[3]`) and declare buses with the width the interface requires.",
    ),
    (
        "functional-mismatch",
        "simulation output differs from expected on a test vector",
        "Evaluate the failing vector gate by gate. Check swapped pins, a missing inversion and carry or select lines wired to the wrong stage.",
    ),
    (
        "interface-mismatch",
        "module ports differ from the required header",
        "Copy the module header exactly: same port names, order, directions and widths.",
    ),
];

pub(super) fn baseline_entries() -> Result<Vec<KnowledgeEntry>, KnowledgeError> {
    let prov = || Provenance {
        task_id: "baseline".into(),
        run_id: "seed".into(),
        admitted: 0,
    };
    let mut out = Vec::new();
    for (text, tags) in PATTERNS {
        let netlist = parse_str(text).map_err(|e| KnowledgeError::VerificationFailed {
            id: "(seed)".into(),
            reason: format!("{e:?}"),
        })?;
        out.push(KnowledgeEntry::pattern(&netlist, tags, prov())?);
    }
    for (class, symptom, fix) in FIXES {
        out.push(KnowledgeEntry::error_fix(class, symptom, fix, &["generic"], prov()));
    }
    Ok(out)
}
