use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Direction, GateId, NetId, NetKind, Netlist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationClass {
    DanglingNet,
    MultiDriver,
    Arity,
    CombinationalLoop,
}

impl ViolationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationClass::DanglingNet => "dangling-net",
            ViolationClass::MultiDriver => "multi-driver",
            ViolationClass::Arity => "arity",
            ViolationClass::CombinationalLoop => "combinational-loop",
        }
    }
}

impl fmt::Display for ViolationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructuralViolation {
    /// A net is read but nothing drives it.
    DanglingNet { net: NetId },
    MultiDriver { net: NetId, drivers: usize },
    Arity {
        gate: GateId,
        expected: usize,
        found: usize,
    },
    /// Gates forming a combinational cycle, in edge order.
    CombinationalLoop { cycle: Vec<GateId> },
}

impl StructuralViolation {
    pub fn class(&self) -> ViolationClass {
        match self {
            StructuralViolation::DanglingNet { .. } => ViolationClass::DanglingNet,
            StructuralViolation::MultiDriver { .. } => ViolationClass::MultiDriver,
            StructuralViolation::Arity { .. } => ViolationClass::Arity,
            StructuralViolation::CombinationalLoop { .. } => ViolationClass::CombinationalLoop,
        }
    }

    /// Message with net and gate names resolved against `netlist`.
    pub fn describe(&self, netlist: &Netlist) -> String {
        let gate_name = |g: &GateId| {
            netlist
                .gates()
                .get(g.index())
                .map(|g| g.name.clone())
                .unwrap_or_else(|| format!("#{}", g.0))
        };
        match self {
            StructuralViolation::DanglingNet { net } => {
                format!("net `{}` is read but never driven", netlist.net_label(*net))
            }
            StructuralViolation::MultiDriver { net, drivers } => format!(
                "net `{}` has {drivers} drivers",
                netlist.net_label(*net)
            ),
            StructuralViolation::Arity {
                gate,
                expected,
                found,
            } => format!(
                "gate `{}` takes {expected} input(s), found {found}",
                gate_name(gate)
            ),
            StructuralViolation::CombinationalLoop { cycle } => {
                let names: Vec<String> = cycle.iter().map(gate_name).collect();
                format!("combinational loop through {}", names.join(" -> "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructuralWarning {
    /// Gate output read by nothing. Still counted in the gate total.
    FloatingOutput { gate: GateId },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("netlist is structurally invalid ({} violation(s))", .0.len())]
    Invalid(Vec<StructuralViolation>),
    #[error("combinational loop through {}", .names.join(" -> "))]
    CombinationalLoop { cycle: Vec<GateId>, names: Vec<String> },
}

/// Gate count, critical-path delay and register count of a valid netlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub gate_count: usize,
    pub delay: usize,
    pub register_count: usize,
}

fn net_in_range(netlist: &Netlist, id: NetId) -> bool {
    id.index() < netlist.nets().len()
}

/// Gates driving each net (all of them, for multi-driver detection).
fn all_drivers(netlist: &Netlist) -> Vec<Vec<GateId>> {
    let mut drivers = vec![Vec::new(); netlist.nets().len()];
    for (i, g) in netlist.gates().iter().enumerate() {
        if let Some(d) = drivers.get_mut(g.output.index()) {
            d.push(GateId(i as u32));
        }
    }
    drivers
}

/// Combinational dependency edges: `succ[a]` lists gates reading `a`'s
/// output, where neither end is a register.
fn combinational_successors(netlist: &Netlist) -> Vec<Vec<GateId>> {
    let drivers = all_drivers(netlist);
    let gates = netlist.gates();
    let mut succ = vec![Vec::new(); gates.len()];
    for (b, gate) in gates.iter().enumerate() {
        if gate.kind.is_register() {
            continue;
        }
        for input in &gate.inputs {
            let Some(ds) = drivers.get(input.index()) else {
                continue;
            };
            for a in ds {
                if !gates[a.index()].kind.is_register() && !succ[a.index()].contains(&GateId(b as u32)) {
                    succ[a.index()].push(GateId(b as u32));
                }
            }
        }
    }
    succ
}

/// Kahn's algorithm over `active` nodes, smallest index first. Returns the
/// schedule and the nodes left over (those on or downstream of a cycle).
fn kahn(succ: &[Vec<GateId>], active: &[bool]) -> (Vec<GateId>, Vec<bool>) {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for a in 0..n {
        if !active[a] {
            continue;
        }
        for b in &succ[a] {
            if active[b.index()] {
                indeg[b.index()] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<u32>> = (0..n)
        .filter(|&i| active[i] && indeg[i] == 0)
        .map(|i| Reverse(i as u32))
        .collect();
    let mut order = Vec::new();
    let mut left = active.to_vec();
    while let Some(Reverse(a)) = heap.pop() {
        left[a as usize] = false;
        order.push(GateId(a));
        for b in &succ[a as usize] {
            let b = b.index();
            if active[b] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    heap.push(Reverse(b as u32));
                }
            }
        }
    }
    (order, left)
}

/// One concrete cycle among `left` nodes, rotated to start at its smallest
/// gate and listed in edge direction.
fn cycle_witness(succ: &[Vec<GateId>], left: &[bool]) -> Option<Vec<GateId>> {
    let n = succ.len();
    // Reverse adjacency restricted to leftover nodes. After Kahn peeling,
    // every leftover node has a leftover predecessor, so walking backwards
    // must revisit a node.
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..n {
        if left[a] {
            for b in &succ[a] {
                if left[b.index()] {
                    pred[b.index()].push(a);
                }
            }
        }
    }
    let start = (0..n).find(|&i| left[i] && !pred[i].is_empty())?;
    let mut seen_at: HashMap<usize, usize> = HashMap::new();
    let mut walk = Vec::new();
    let mut cur = start;
    loop {
        if let Some(&pos) = seen_at.get(&cur) {
            let mut cycle: Vec<usize> = walk[pos..].to_vec();
            cycle.reverse();
            let min_pos = cycle
                .iter()
                .enumerate()
                .min_by_key(|(_, &g)| g)
                .map(|(i, _)| i)
                .unwrap_or(0);
            cycle.rotate_left(min_pos);
            return Some(cycle.into_iter().map(|g| GateId(g as u32)).collect());
        }
        seen_at.insert(cur, walk.len());
        walk.push(cur);
        cur = *pred[cur].iter().min()?;
    }
}

fn find_loops(netlist: &Netlist) -> Vec<Vec<GateId>> {
    let succ = combinational_successors(netlist);
    let mut active: Vec<bool> = netlist
        .gates()
        .iter()
        .map(|g| !g.kind.is_register())
        .collect();
    let mut loops = Vec::new();
    loop {
        let (_, left) = kahn(&succ, &active);
        if !left.iter().any(|&l| l) {
            break;
        }
        // Peel nodes that only sit downstream of cycles.
        let Some(cycle) = cycle_witness(&succ, &left) else {
            break;
        };
        active = left;
        for g in &cycle {
            active[g.index()] = false;
        }
        loops.push(cycle);
    }
    loops
}

/// Structural violations; empty iff the netlist satisfies every IR invariant.
pub fn validate(netlist: &Netlist) -> Vec<StructuralViolation> {
    let mut out = Vec::new();
    let nets = netlist.nets();

    for (i, g) in netlist.gates().iter().enumerate() {
        if g.inputs.len() != g.kind.arity() {
            out.push(StructuralViolation::Arity {
                gate: GateId(i as u32),
                expected: g.kind.arity(),
                found: g.inputs.len(),
            });
        }
    }

    let drivers = all_drivers(netlist);
    for (i, net) in nets.iter().enumerate() {
        let count = drivers[i].len() + usize::from(net.kind.is_source());
        if count > 1 {
            out.push(StructuralViolation::MultiDriver {
                net: NetId(i as u32),
                drivers: count,
            });
        }
    }
    // Gates driving nets that do not exist.
    for g in netlist.gates() {
        if !net_in_range(netlist, g.output) {
            out.push(StructuralViolation::DanglingNet { net: g.output });
        }
    }

    let mut read = vec![false; nets.len()];
    let mut missing = Vec::new();
    let reads = netlist
        .gates()
        .iter()
        .flat_map(|g| g.inputs.iter())
        .chain(
            netlist
                .ports()
                .iter()
                .filter(|p| p.direction == Direction::Output)
                .flat_map(|p| p.bits.iter()),
        );
    for &id in reads {
        match read.get_mut(id.index()) {
            Some(r) => *r = true,
            None => {
                if !missing.contains(&id) {
                    missing.push(id);
                }
            }
        }
    }
    for (i, net) in nets.iter().enumerate() {
        if read[i] && !net.kind.is_source() && drivers[i].is_empty() {
            out.push(StructuralViolation::DanglingNet {
                net: NetId(i as u32),
            });
        }
    }
    out.extend(
        missing
            .into_iter()
            .map(|net| StructuralViolation::DanglingNet { net }),
    );

    out.extend(
        find_loops(netlist)
            .into_iter()
            .map(|cycle| StructuralViolation::CombinationalLoop { cycle }),
    );
    out
}

/// Non-fatal findings: gate outputs nobody reads.
pub fn warnings(netlist: &Netlist) -> Vec<StructuralWarning> {
    let readers = netlist.readers();
    let is_out = netlist.is_output_net();
    netlist
        .gates()
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            let i = g.output.index();
            i < readers.len() && readers[i].is_empty() && !is_out[i]
        })
        .map(|(i, _)| StructuralWarning::FloatingOutput {
            gate: GateId(i as u32),
        })
        .collect()
}

fn loop_error(netlist: &Netlist, cycle: Vec<GateId>) -> NetlistError {
    let names = cycle
        .iter()
        .map(|g| netlist.gate(*g).name.clone())
        .collect();
    NetlistError::CombinationalLoop { cycle, names }
}

/// Combinational gates in dependency order (smallest index first among
/// ready gates). Registers are excluded.
pub fn levelize(netlist: &Netlist) -> Result<Vec<GateId>, NetlistError> {
    let succ = combinational_successors(netlist);
    let active: Vec<bool> = netlist
        .gates()
        .iter()
        .map(|g| !g.kind.is_register())
        .collect();
    let (order, left) = kahn(&succ, &active);
    if left.iter().any(|&l| l) {
        let cycle = cycle_witness(&succ, &left).unwrap_or_default();
        return Err(loop_error(netlist, cycle));
    }
    Ok(order)
}

fn ensure_valid(netlist: &Netlist) -> Result<(), NetlistError> {
    let v = validate(netlist);
    if v.is_empty() {
        Ok(())
    } else {
        Err(NetlistError::Invalid(v))
    }
}

/// |V|: every gate instance, registers included, each with weight 1.
pub fn gate_count(netlist: &Netlist) -> Result<usize, NetlistError> {
    ensure_valid(netlist)?;
    Ok(netlist.gates().len())
}

/// Longest source-to-sink path measured in gates. Sources are primary
/// inputs, constants and register outputs; sinks are primary outputs and
/// register inputs. Every combinational gate has unit delay.
pub fn critical_path_delay(netlist: &Netlist) -> Result<usize, NetlistError> {
    if let Some(cycle) = find_loops(netlist).into_iter().next() {
        return Err(loop_error(netlist, cycle));
    }
    ensure_valid(netlist)?;
    Ok(delay_unchecked(netlist, &levelize(netlist)?))
}

fn delay_unchecked(netlist: &Netlist, order: &[GateId]) -> usize {
    let mut level = vec![0usize; netlist.nets().len()];
    for g in order {
        let gate = netlist.gate(*g);
        let depth = gate
            .inputs
            .iter()
            .map(|i| level[i.index()])
            .max()
            .unwrap_or(0);
        level[gate.output.index()] = depth + 1;
    }
    let output_sinks = netlist.output_bits();
    let register_sinks = netlist
        .gates()
        .iter()
        .filter(|g| g.kind.is_register())
        .flat_map(|g| g.inputs.iter().copied());
    output_sinks
        .into_iter()
        .chain(register_sinks)
        .map(|n| level[n.index()])
        .max()
        .unwrap_or(0)
}

pub fn structural_report(netlist: &Netlist) -> Result<StructuralReport, NetlistError> {
    ensure_valid(netlist)?;
    let order = levelize(netlist)?;
    Ok(StructuralReport {
        gate_count: netlist.gates().len(),
        delay: delay_unchecked(netlist, &order),
        register_count: netlist.register_count(),
    })
}

/// True when `a` and `b` have identical ports and gate sequence up to a
/// consistent renaming of nets.
pub fn same_structure(a: &Netlist, b: &Netlist) -> bool {
    if a.ports().len() != b.ports().len() || a.gates().len() != b.gates().len() {
        return false;
    }
    let mut fwd: HashMap<NetId, NetId> = HashMap::new();
    let mut back: HashMap<NetId, NetId> = HashMap::new();
    let mut bind = |x: NetId, y: NetId| -> bool {
        let kx = a.nets().get(x.index()).map(|n| n.kind);
        let ky = b.nets().get(y.index()).map(|n| n.kind);
        if kx != ky {
            return false;
        }
        match (fwd.get(&x), back.get(&y)) {
            (None, None) => {
                fwd.insert(x, y);
                back.insert(y, x);
                true
            }
            (Some(&fy), Some(&bx)) => fy == y && bx == x,
            _ => false,
        }
    };
    for (pa, pb) in a.ports().iter().zip(b.ports()) {
        if pa.name != pb.name
            || pa.direction != pb.direction
            || pa.lsb != pb.lsb
            || pa.bits.len() != pb.bits.len()
        {
            return false;
        }
        for (x, y) in pa.bits.iter().zip(&pb.bits) {
            if !bind(*x, *y) {
                return false;
            }
        }
    }
    for (ga, gb) in a.gates().iter().zip(b.gates()) {
        if ga.kind != gb.kind || ga.inputs.len() != gb.inputs.len() {
            return false;
        }
        if !bind(ga.output, gb.output) {
            return false;
        }
        for (x, y) in ga.inputs.iter().zip(&gb.inputs) {
            if !bind(*x, *y) {
                return false;
            }
        }
    }
    // Constant nets with matching kinds were bound above; any extra
    // source net in one but not the other shows up as a port mismatch.
    a.nets()
        .iter()
        .filter(|n| matches!(n.kind, NetKind::PrimaryInput))
        .count()
        == b
            .nets()
            .iter()
            .filter(|n| matches!(n.kind, NetKind::PrimaryInput))
            .count()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{GateKind, NetlistBuilder};
    use super::*;

    #[test]
    fn minimal_not_gate_is_valid() {
        let n = not_chain(1);
        assert!(validate(&n).is_empty());
        assert_eq!(gate_count(&n).unwrap(), 1);
        assert_eq!(critical_path_delay(&n).unwrap(), 1);
    }

    #[test]
    fn two_gates_on_one_net_is_multi_driver() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let y = b.add_net(Some("y"), NetKind::Internal);
        b.gate(GateKind::Not, "g1", y, &[a]);
        b.gate(GateKind::Not, "g2", y, &[a]);
        b.output("y", y);
        let v = validate(&b.build());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].class(), ViolationClass::MultiDriver);
    }

    #[test]
    fn gate_driving_input_is_multi_driver() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let c = b.input("c");
        b.gate(GateKind::Not, "g1", a, &[c]);
        b.output("y", a);
        let v = validate(&b.build());
        assert_eq!(
            v,
            vec![StructuralViolation::MultiDriver {
                net: a,
                drivers: 2
            }]
        );
    }

    #[test]
    fn xor_feeding_itself_is_a_loop() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let y = b.add_net(Some("y"), NetKind::Internal);
        b.gate(GateKind::Xor, "g1", y, &[a, y]);
        b.output("y", y);
        let n = b.build();
        let v = validate(&n);
        assert_eq!(
            v,
            vec![StructuralViolation::CombinationalLoop {
                cycle: vec![GateId(0)]
            }]
        );
        assert!(matches!(
            critical_path_delay(&n),
            Err(NetlistError::CombinationalLoop { .. })
        ));
        assert!(levelize(&n).is_err());
    }

    #[test]
    fn loop_through_register_is_fine() {
        // q' = !q : a toggle flop.
        let mut b = NetlistBuilder::new("t");
        let clk = b.input("clk");
        let q = b.add_net(Some("q"), NetKind::Internal);
        let nq = b.add(GateKind::Not, &[q]);
        b.gate(GateKind::Dff, "r", q, &[nq, clk]);
        b.output("q", q);
        let n = b.build();
        assert!(validate(&n).is_empty());
        let r = structural_report(&n).unwrap();
        assert_eq!(r.gate_count, 2);
        assert_eq!(r.register_count, 1);
        assert_eq!(r.delay, 1);
    }

    #[test]
    fn two_gate_cycle_witness_is_ordered() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let x = b.add_net(Some("x"), NetKind::Internal);
        let y = b.add_net(Some("y"), NetKind::Internal);
        b.gate(GateKind::And, "g1", x, &[a, y]);
        b.gate(GateKind::Not, "g2", y, &[x]);
        b.output("o", y);
        let n = b.build();
        let v = validate(&n);
        assert_eq!(
            v,
            vec![StructuralViolation::CombinationalLoop {
                cycle: vec![GateId(0), GateId(1)]
            }]
        );
        assert_eq!(
            v[0].describe(&n),
            "combinational loop through g1 -> g2"
        );
    }

    #[test]
    fn dangling_and_arity() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let ghost = b.add_net(Some("ghost"), NetKind::Internal);
        let y = b.add(GateKind::Nand, &[a]);
        let z = b.add(GateKind::And, &[a, ghost]);
        b.output("y", y);
        b.output("z", z);
        let classes: Vec<_> = validate(&b.build()).iter().map(|v| v.class()).collect();
        assert_eq!(
            classes,
            vec![ViolationClass::Arity, ViolationClass::DanglingNet]
        );
    }

    #[test]
    fn gate_counts_and_delays() {
        assert_eq!(gate_count(&half_adder()).unwrap(), 2);
        assert_eq!(critical_path_delay(&half_adder()).unwrap(), 1);
        assert_eq!(critical_path_delay(&not_chain(3)).unwrap(), 3);
        let fa = structural_report(&full_adder()).unwrap();
        assert_eq!((fa.gate_count, fa.delay), (5, 3));
    }

    #[test]
    fn passthrough_has_no_gates_and_no_delay() {
        let mut b = NetlistBuilder::new("wire");
        let a = b.input("a");
        b.output("y", a);
        let n = b.build();
        assert_eq!(gate_count(&n).unwrap(), 0);
        assert_eq!(critical_path_delay(&n).unwrap(), 0);
    }

    #[test]
    fn floating_gate_counts_but_adds_no_delay() {
        let mut b = NetlistBuilder::new("f");
        let a = b.input("a");
        let _unused = b.add(GateKind::Not, &[a]);
        b.output("y", a);
        let n = b.build();
        assert!(validate(&n).is_empty());
        assert_eq!(
            warnings(&n),
            vec![StructuralWarning::FloatingOutput { gate: GateId(0) }]
        );
        assert_eq!(gate_count(&n).unwrap(), 1);
        assert_eq!(critical_path_delay(&n).unwrap(), 0);
    }

    #[test]
    fn levelize_chain() {
        let n = not_chain(2);
        assert_eq!(levelize(&n).unwrap(), vec![GateId(0), GateId(1)]);
    }

    #[test]
    fn levelize_orders_out_of_order_gates() {
        let mut b = NetlistBuilder::new("m");
        let a = b.input("a");
        let x = b.add_net(None, NetKind::Internal);
        let y = b.add_net(None, NetKind::Internal);
        b.gate(GateKind::Not, "late", y, &[x]);
        b.gate(GateKind::Not, "early", x, &[a]);
        b.output("y", y);
        let n = b.build();
        assert_eq!(levelize(&n).unwrap(), vec![GateId(1), GateId(0)]);
        assert_eq!(critical_path_delay(&n).unwrap(), 2);
    }

    #[test]
    fn validate_is_idempotent() {
        let n = full_adder();
        assert_eq!(validate(&n), validate(&n));
    }

    #[test]
    fn same_structure_ignores_internal_names() {
        let a = full_adder();
        let b = a.with_anonymous_internals();
        assert!(same_structure(&a, &b));
        assert!(!same_structure(&a, &half_adder()));
    }
}
