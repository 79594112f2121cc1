use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BoolError;
use crate::netlist::{GateId, GateKind, NetId, NetKind, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HintKind {
    /// `not(not(x))` reads back `x`.
    DoubleNegation,
    /// A gate whose output is fixed or equal to one input because of a
    /// constant or repeated input.
    ConstantPropagation,
    /// Two gates of one kind reading the same inputs.
    DuplicateGate,
    /// An AND read only by a NOT.
    FuseNand,
}

impl fmt::Display for HintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HintKind::DoubleNegation => "double-negation",
            HintKind::ConstantPropagation => "constant-propagation",
            HintKind::DuplicateGate => "duplicate-gate",
            HintKind::FuseNand => "fuse-nand",
        })
    }
}

/// A local rewrite that lowers gate count, suitable for a reviewer prompt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizationHint {
    pub kind: HintKind,
    /// Gates involved, in the order the rewrite uses them.
    pub gates: Vec<GateId>,
    pub message: String,
}

impl fmt::Display for OptimizationHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.kind, self.message)
    }
}

/// What a gate reduces to when one of its inputs is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Simplified {
    Constant(bool),
    Wire(NetId),
}

fn constant_of(netlist: &Netlist, net: NetId) -> Option<bool> {
    match netlist.net(net).kind {
        NetKind::Constant0 => Some(false),
        NetKind::Constant1 => Some(true),
        _ => None,
    }
}

fn simplify(netlist: &Netlist, g: GateId) -> Option<Simplified> {
    let gate = netlist.gate(g);
    let a = gate.inputs[0];
    if gate.kind == GateKind::Not {
        return constant_of(netlist, a).map(|v| Simplified::Constant(!v));
    }
    if gate.kind == GateKind::Dff {
        return None;
    }
    let b = gate.inputs[1];
    if a == b {
        return match gate.kind {
            GateKind::And | GateKind::Or => Some(Simplified::Wire(a)),
            GateKind::Xor => Some(Simplified::Constant(false)),
            // nand(x, x) is a plain inverter; no saving.
            _ => None,
        };
    }
    let (known, other) = match (constant_of(netlist, a), constant_of(netlist, b)) {
        (Some(v), _) => (v, b),
        (None, Some(v)) => (v, a),
        (None, None) => return None,
    };
    match (gate.kind, known) {
        (GateKind::And, false) => Some(Simplified::Constant(false)),
        (GateKind::And, true) => Some(Simplified::Wire(other)),
        (GateKind::Or, true) => Some(Simplified::Constant(true)),
        (GateKind::Or, false) => Some(Simplified::Wire(other)),
        (GateKind::Xor, false) => Some(Simplified::Wire(other)),
        (GateKind::Nand, false) => Some(Simplified::Constant(true)),
        // xor(x, 1) and nand(x, 1) are inverters; no saving.
        _ => None,
    }
}

/// Structural rewrites that would shrink a valid netlist. Hints are
/// reported in gate order and never overlap in kind and location.
pub fn suggest_optimizations(netlist: &Netlist) -> Vec<OptimizationHint> {
    let readers = netlist.readers();
    let drivers = netlist.driver_gates();
    let is_out = netlist.is_output_net();
    let label = |n: NetId| netlist.net_label(n);
    let name = |g: GateId| netlist.gate(g).name.clone();
    let mut hints = Vec::new();
    let mut seen: HashMap<(GateKind, NetId, NetId), GateId> = HashMap::new();

    for g in netlist.gate_ids() {
        let gate = netlist.gate(g);
        if gate.kind == GateKind::Not {
            if let Some(d) = drivers[gate.inputs[0].index()] {
                let inner = netlist.gate(d);
                if inner.kind == GateKind::Not {
                    hints.push(OptimizationHint {
                        kind: HintKind::DoubleNegation,
                        gates: vec![d, g],
                        message: format!(
                            "double negation: `{}` inverts `{}` which already inverts `{}`; wire `{}` directly",
                            name(g),
                            name(d),
                            label(inner.inputs[0]),
                            label(inner.inputs[0])
                        ),
                    });
                }
            }
        }
        if let Some(s) = simplify(netlist, g) {
            let what = match s {
                Simplified::Constant(v) => format!("always {}", v as u8),
                Simplified::Wire(n) => format!("equal to `{}`", label(n)),
            };
            hints.push(OptimizationHint {
                kind: HintKind::ConstantPropagation,
                gates: vec![g],
                message: format!("constant propagation: `{}` is {what}; remove it", name(g)),
            });
        }
        if gate.kind != GateKind::Dff {
            let key = match gate.inputs[..] {
                [a] => (gate.kind, a, a),
                [a, b] => (gate.kind, a.min(b), a.max(b)),
                _ => continue,
            };
            match seen.get(&key) {
                Some(&first) => hints.push(OptimizationHint {
                    kind: HintKind::DuplicateGate,
                    gates: vec![first, g],
                    message: format!(
                        "duplicate gate: `{}` computes the same {} as `{}`; share its output",
                        name(g),
                        gate.kind,
                        name(first)
                    ),
                }),
                None => {
                    seen.insert(key, g);
                }
            }
        }
        if gate.kind == GateKind::And && !is_out[gate.output.index()] {
            if let [r] = readers[gate.output.index()][..] {
                if netlist.gate(r).kind == GateKind::Not {
                    hints.push(OptimizationHint {
                        kind: HintKind::FuseNand,
                        gates: vec![g, r],
                        message: format!(
                            "fuse into NAND: `{}` only feeds inverter `{}`; replace both with one nand",
                            name(g),
                            name(r)
                        ),
                    });
                }
            }
        }
    }
    hints
}

/// Remove the listed gates that no longer drive anything, repeating for
/// drivers of removed gates among the candidates.
fn sweep(netlist: &mut Netlist, mut candidates: Vec<GateId>) {
    let mut doomed = Vec::new();
    loop {
        let readers = netlist.readers();
        let is_out = netlist.is_output_net();
        let before = doomed.len();
        for &g in &candidates {
            if doomed.contains(&g) {
                continue;
            }
            let out = netlist.gate(g).output;
            let live_readers = readers[out.index()].iter().filter(|r| !doomed.contains(*r)).count();
            if live_readers == 0 && !is_out[out.index()] {
                doomed.push(g);
            }
        }
        if doomed.len() == before {
            break;
        }
        candidates.retain(|g| !doomed.contains(g));
    }
    doomed.sort();
    netlist.remove_gates(&doomed);
}

/// Apply one hint computed on this netlist. Gates made dead by the rewrite
/// are removed; nothing else is touched.
pub fn apply_hint(netlist: &Netlist, hint: &OptimizationHint) -> Result<Netlist, BoolError> {
    let stale = || BoolError::StaleHint(hint.to_string());
    let mut out = netlist.clone();
    if hint.gates.iter().any(|g| g.index() >= netlist.gates().len()) {
        return Err(stale());
    }
    match hint.kind {
        HintKind::DoubleNegation => {
            let [inner, outer] = hint.gates[..] else { return Err(stale()) };
            let (i, o) = (netlist.gate(inner), netlist.gate(outer));
            if i.kind != GateKind::Not || o.kind != GateKind::Not || o.inputs[0] != i.output {
                return Err(stale());
            }
            out.redirect_reads(o.output, i.inputs[0]);
            sweep(&mut out, vec![outer, inner]);
        }
        HintKind::ConstantPropagation => {
            let [g] = hint.gates[..] else { return Err(stale()) };
            let target = match simplify(netlist, g).ok_or_else(stale)? {
                Simplified::Constant(v) => out.constant_net(v),
                Simplified::Wire(n) => n,
            };
            out.redirect_reads(netlist.gate(g).output, target);
            sweep(&mut out, vec![g]);
        }
        HintKind::DuplicateGate => {
            let [keep, drop] = hint.gates[..] else { return Err(stale()) };
            let (k, d) = (netlist.gate(keep), netlist.gate(drop));
            let mut ki = k.inputs.clone();
            let mut di = d.inputs.clone();
            ki.sort();
            di.sort();
            if k.kind != d.kind || ki != di || k.kind == GateKind::Dff {
                return Err(stale());
            }
            out.redirect_reads(d.output, k.output);
            sweep(&mut out, vec![drop]);
        }
        HintKind::FuseNand => {
            let [and, not] = hint.gates[..] else { return Err(stale()) };
            let (a, n) = (netlist.gate(and), netlist.gate(not));
            if a.kind != GateKind::And || n.kind != GateKind::Not || n.inputs[0] != a.output {
                return Err(stale());
            }
            let gates = out.gates_mut();
            gates[not.index()].kind = GateKind::Nand;
            gates[not.index()].inputs = a.inputs.clone();
            sweep(&mut out, vec![and]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::validate;
    use crate::parser::parse_str;
    use crate::sim::truth_table;

    fn check_all_sound(src: &str) -> Vec<OptimizationHint> {
        let n = parse_str(src).unwrap();
        let hints = suggest_optimizations(&n);
        let sig = truth_table(&n).unwrap().hash;
        for h in &hints {
            let m = apply_hint(&n, h).unwrap();
            assert!(validate(&m).is_empty(), "{h}");
            assert_eq!(truth_table(&m).unwrap().hash, sig, "{h}");
            assert!(m.gates().len() < n.gates().len(), "{h}");
        }
        hints
    }

    #[test]
    fn double_negation() {
        let h = check_all_sound("module m(input a, output y); wire t; not g1(t, a); not g2(y, t); endmodule");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].kind, HintKind::DoubleNegation);
        assert!(h[0].message.contains("wire `a` directly"), "{}", h[0].message);
    }

    #[test]
    fn duplicate_and() {
        let h = check_all_sound(
            "module m(input a, input b, output y, output z); and g1(y, a, b); and g2(z, b, a); endmodule",
        );
        assert_eq!(h.iter().map(|h| h.kind).collect::<Vec<_>>(), vec![HintKind::DuplicateGate]);
    }

    #[test]
    fn and_then_not_fuses() {
        let h = check_all_sound("module m(input a, input b, output y); wire t; and g1(t, a, b); not g2(y, t); endmodule");
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].kind, HintKind::FuseNand);
        let m = apply_hint(&parse_str("module m(input a, input b, output y); wire t; and g1(t, a, b); not g2(y, t); endmodule").unwrap(), &h[0]).unwrap();
        assert_eq!(m.gates().len(), 1);
        assert_eq!(m.gates()[0].kind, GateKind::Nand);
    }

    #[test]
    fn constants() {
        let h = check_all_sound(
            "module m(input a, input b, output y, output z, output w);
               and g1(y, a, 1'b1);
               or g2(z, b, 1'b1);
               xor g3(w, a, a);
             endmodule",
        );
        assert_eq!(h.len(), 3);
        assert!(h.iter().all(|h| h.kind == HintKind::ConstantPropagation));
    }

    #[test]
    fn clean_netlist_has_no_hints() {
        assert!(suggest_optimizations(&crate::netlist::fixtures::full_adder()).is_empty());
    }

    #[test]
    fn stale_hints_are_refused() {
        let n = parse_str("module m(input a, output y); wire t; not g1(t, a); not g2(y, t); endmodule").unwrap();
        let h = suggest_optimizations(&n).remove(0);
        let other = crate::netlist::fixtures::half_adder();
        assert!(matches!(apply_hint(&other, &h), Err(BoolError::StaleHint(_))));
    }
}
