//! Random netlist generation and naive reference evaluation shared by the
//! property suites.
#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;

use gatesmith::netlist::{GateId, GateKind, NetId, NetKind, Netlist, NetlistBuilder};

/// Recipe for a random netlist. Operand indices are reduced modulo the
/// nets available at that point, so every recipe builds a valid circuit.
#[derive(Clone, Debug)]
pub struct Recipe {
    pub inputs: usize,
    pub registers: Vec<u16>,
    pub gates: Vec<(u8, u16, u16)>,
    pub outputs: Vec<u16>,
    pub constants: bool,
}

pub fn recipe(max_inputs: usize, max_gates: usize, max_registers: usize) -> impl Strategy<Value = Recipe> {
    (
        1..=max_inputs,
        prop::collection::vec(any::<u16>(), 0..=max_registers),
        prop::collection::vec((0..5u8, any::<u16>(), any::<u16>()), 1..=max_gates),
        prop::collection::vec(any::<u16>(), 1..=3),
        any::<bool>(),
    )
        .prop_map(|(inputs, registers, gates, outputs, constants)| Recipe {
            inputs,
            registers,
            gates,
            outputs,
            constants,
        })
}

pub fn build(r: &Recipe) -> Netlist {
    let mut b = NetlistBuilder::new("rand");
    let mut pool: Vec<NetId> = (0..r.inputs).map(|i| b.input(&format!("x{i}"))).collect();
    let clk = (!r.registers.is_empty()).then(|| b.input("clk"));
    let regs: Vec<NetId> = (0..r.registers.len())
        .map(|i| b.add_net(Some(&format!("q{i}")), NetKind::Internal))
        .collect();
    pool.extend(&regs);
    if r.constants {
        pool.push(b.constant(false));
        pool.push(b.constant(true));
    }
    let mut outs = Vec::new();
    for &(k, x, y) in &r.gates {
        let kind = GateKind::COMBINATIONAL[k as usize % GateKind::COMBINATIONAL.len()];
        let a = pool[x as usize % pool.len()];
        let c = pool[y as usize % pool.len()];
        let ins: &[NetId] = if kind.arity() == 1 { &[a] } else { &[a, c] };
        let out = b.add(kind, ins);
        pool.push(out);
        outs.push(out);
    }
    for (i, (&q, &d)) in regs.iter().zip(&r.registers).enumerate() {
        let d = outs[d as usize % outs.len()];
        b.gate(GateKind::Dff, format!("r{i}"), q, &[d, clk.expect("clock")]);
    }
    for (i, &o) in r.outputs.iter().enumerate() {
        b.output(&format!("y{i}"), outs[o as usize % outs.len()]);
    }
    b.build()
}

/// Value of `net` by walking back through drivers. Register outputs and
/// primary inputs come from `sources`.
pub fn eval_net(n: &Netlist, drivers: &[Option<GateId>], sources: &HashMap<NetId, bool>, net: NetId) -> bool {
    match n.net(net).kind {
        NetKind::Constant0 => return false,
        NetKind::Constant1 => return true,
        _ => {}
    }
    if let Some(&v) = sources.get(&net) {
        return v;
    }
    let g = n.gate(drivers[net.index()].expect("driven net"));
    let a = eval_net(n, drivers, sources, g.inputs[0]);
    let b = g.inputs.get(1).is_some_and(|&x| eval_net(n, drivers, sources, x));
    g.kind.eval(a, b)
}

/// Longest combinational gate chain ending at `net`.
pub fn depth(n: &Netlist, drivers: &[Option<GateId>], net: NetId) -> usize {
    match drivers[net.index()] {
        Some(g) if !n.gate(g).kind.is_register() => {
            1 + n.gate(g).inputs.iter().map(|&i| depth(n, drivers, i)).max().unwrap_or(0)
        }
        _ => 0,
    }
}

/// Combinational outputs for one input row (bit i of `row` drives input i).
pub fn oracle_row(n: &Netlist, row: u32) -> Vec<bool> {
    let drivers = n.driver_gates();
    let sources: HashMap<NetId, bool> = n
        .input_bits()
        .into_iter()
        .enumerate()
        .map(|(i, net)| (net, row >> i & 1 == 1))
        .collect();
    n.output_bits().into_iter().map(|o| eval_net(n, &drivers, &sources, o)).collect()
}
