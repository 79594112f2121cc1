//! Two-state simulation of locked netlists.
//!
//! Combinational logic is evaluated in levelized order, 64 input vectors at
//! a time (one per bit lane of a `u64`). Sequential runs use the standard
//! synchronous model: apply inputs, settle, check outputs, then clock every
//! register at once from its settled data input. Registers reset to 0.

mod signature;
mod testbench;

pub use signature::{functional_signature, truth_table, FunctionalSignature, SAMPLE_SEED, SAMPLE_VECTORS, SIGNATURE_MAX_INPUTS};
pub use testbench::{Interface, InterfaceError, PortBit, PortDecl, TestVector, Testbench, TestbenchError};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{levelize, Direction, GateId, GateKind, NetId, NetKind, Netlist, NetlistError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub vector: usize,
    pub bit: PortBit,
    pub expected: bool,
    pub actual: bool,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vector {}: {} expected {} got {}",
            self.vector, self.bit, self.expected as u8, self.actual as u8
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<Failure>,
    /// `passed / (passed + failed)`; 0 when there were no vectors.
    pub correctness: f64,
}

impl SimOutcome {
    fn from_counts(passed: usize, failed: usize, first_failure: Option<Failure>) -> Self {
        let total = passed + failed;
        SimOutcome {
            passed,
            failed,
            first_failure,
            correctness: if total == 0 {
                0.0
            } else {
                passed as f64 / total as f64
            },
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.passed > 0
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("port `{0}` is not declared by the netlist")]
    UnknownPort(String),
    #[error("`{0}` does not name a single bit of a declared port")]
    BitOutOfRange(String),
    #[error("`{0}` is an output and cannot be driven by a vector")]
    DrivesOutput(String),
    #[error("`{0}` is an input and cannot be checked by a vector")]
    ChecksInput(String),
    #[error("`{0}` is the clock and is driven by the simulator")]
    DrivesClock(String),
    #[error("netlist contains registers; use sequential simulation")]
    HasRegisters,
    #[error("netlist has no registers, so there is no clock")]
    NoClock,
    #[error("registers are clocked by {0} different nets; exactly one clock is supported")]
    MultipleClocks(usize),
    #[error("vector {vector} refers to cycle {cycle} but the run has {cycles} cycles")]
    CycleOutOfRange { vector: usize, cycle: u32, cycles: u32 },
    #[error("{inputs} input bits exceed the exhaustive limit of {limit}")]
    TooManyInputs { inputs: usize, limit: usize },
    #[error("netlist is sequential; a truth table needs a combinational netlist")]
    Sequential,
    #[error(transparent)]
    Structure(#[from] NetlistError),
}

/// A netlist prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Compiled<'a> {
    netlist: &'a Netlist,
    schedule: Vec<GateId>,
    registers: Vec<GateId>,
}

impl<'a> Compiled<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self, SimError> {
        let schedule = levelize(netlist)?;
        let registers = netlist
            .gate_ids()
            .filter(|g| netlist.gate(*g).kind.is_register())
            .collect();
        Ok(Compiled {
            netlist,
            schedule,
            registers,
        })
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.netlist
    }

    pub fn registers(&self) -> &[GateId] {
        &self.registers
    }

    /// Fresh state vector with constants set and everything else 0.
    pub fn blank_state(&self) -> Vec<u64> {
        self.netlist
            .nets()
            .iter()
            .map(|n| if n.kind == NetKind::Constant1 { !0 } else { 0 })
            .collect()
    }

    /// Settle combinational logic. Inputs and register outputs must already
    /// be set in `state`.
    pub fn settle(&self, state: &mut [u64]) {
        for &g in &self.schedule {
            let gate = self.netlist.gate(g);
            let a = state[gate.inputs[0].index()];
            let b = gate.inputs.get(1).map_or(0, |n| state[n.index()]);
            state[gate.output.index()] = gate.kind.eval_word(a, b);
        }
    }

    /// Load every register output from its data input (the clock edge).
    pub fn clock(&self, state: &mut [u64]) {
        let next: Vec<u64> = self
            .registers
            .iter()
            .map(|&g| state[self.netlist.gate(g).inputs[0].index()])
            .collect();
        for (&g, v) in self.registers.iter().zip(next) {
            state[self.netlist.gate(g).output.index()] = v;
        }
    }
}

/// The single net clocking every register.
pub fn clock_net(netlist: &Netlist) -> Result<NetId, SimError> {
    let mut clocks: Vec<NetId> = netlist
        .gates()
        .iter()
        .filter(|g| g.kind == GateKind::Dff)
        .map(|g| g.inputs[1])
        .collect();
    clocks.sort();
    clocks.dedup();
    match clocks.len() {
        0 => Err(SimError::NoClock),
        1 => Ok(clocks[0]),
        n => Err(SimError::MultipleClocks(n)),
    }
}

fn resolve_bit(netlist: &Netlist, bit: &PortBit, want: Direction) -> Result<NetId, SimError> {
    let port = netlist
        .port(&bit.port)
        .ok_or_else(|| SimError::UnknownPort(bit.port.clone()))?;
    let net = match bit.index {
        None if port.width() == 1 => Some(port.bits[0]),
        None => None,
        Some(i) if port.vector => port.bit(i),
        Some(_) => None,
    }
    .ok_or_else(|| SimError::BitOutOfRange(bit.to_string()))?;
    match (port.direction, want) {
        (Direction::Output, Direction::Input) => Err(SimError::DrivesOutput(bit.to_string())),
        (Direction::Input, Direction::Output) => Err(SimError::ChecksInput(bit.to_string())),
        _ => Ok(net),
    }
}

type Resolved = (Vec<(NetId, bool)>, Vec<(PortBit, NetId, Option<bool>)>);

fn resolve_vector(netlist: &Netlist, v: &TestVector, clock: Option<NetId>) -> Result<Resolved, SimError> {
    let mut inputs = Vec::with_capacity(v.inputs.len());
    for (bit, &val) in &v.inputs {
        let net = resolve_bit(netlist, bit, Direction::Input)?;
        if Some(net) == clock {
            return Err(SimError::DrivesClock(bit.to_string()));
        }
        inputs.push((net, val));
    }
    let mut checks = Vec::with_capacity(v.expected.len());
    for (bit, &val) in &v.expected {
        let net = resolve_bit(netlist, bit, Direction::Output)?;
        checks.push((bit.clone(), net, val));
    }
    Ok((inputs, checks))
}

/// Compare settled lane `lane` against a vector's expectations.
fn check(
    state: &[u64],
    lane: u32,
    index: usize,
    checks: &[(PortBit, NetId, Option<bool>)],
    first: &mut Option<Failure>,
) -> bool {
    let mut ok = true;
    for (bit, net, want) in checks {
        let Some(want) = *want else { continue };
        let got = (state[net.index()] >> lane) & 1 == 1;
        if got != want {
            ok = false;
            if first.is_none() {
                *first = Some(Failure {
                    vector: index,
                    bit: bit.clone(),
                    expected: want,
                    actual: got,
                });
            }
        }
    }
    ok
}

/// Evaluate a register-free netlist on each vector. Inputs a vector leaves
/// unassigned read as 0.
pub fn simulate_combinational(netlist: &Netlist, vectors: &[TestVector]) -> Result<SimOutcome, SimError> {
    if netlist.has_registers() {
        return Err(SimError::HasRegisters);
    }
    let compiled = Compiled::new(netlist)?;
    let resolved: Vec<Resolved> = vectors
        .iter()
        .map(|v| resolve_vector(netlist, v, None))
        .collect::<Result<_, _>>()?;

    let (mut passed, mut failed, mut first) = (0, 0, None);
    for (chunk_no, chunk) in resolved.chunks(64).enumerate() {
        let mut state = compiled.blank_state();
        for (lane, (inputs, _)) in chunk.iter().enumerate() {
            for &(net, val) in inputs {
                if val {
                    state[net.index()] |= 1 << lane;
                }
            }
        }
        compiled.settle(&mut state);
        for (lane, (_, checks)) in chunk.iter().enumerate() {
            if check(&state, lane as u32, chunk_no * 64 + lane, checks, &mut first) {
                passed += 1;
            } else {
                failed += 1;
            }
        }
    }
    Ok(SimOutcome::from_counts(passed, failed, first))
}

/// Cycle-accurate run over `cycles` clock periods. Vectors are grouped by
/// their cycle index; input values persist until reassigned.
pub fn simulate_sequential(netlist: &Netlist, vectors: &[TestVector], cycles: u32) -> Result<SimOutcome, SimError> {
    let clock = clock_net(netlist)?;
    let compiled = Compiled::new(netlist)?;
    let mut by_cycle: Vec<Vec<(usize, Resolved)>> = vec![Vec::new(); cycles as usize];
    for (i, v) in vectors.iter().enumerate() {
        if v.cycle >= cycles {
            return Err(SimError::CycleOutOfRange {
                vector: i,
                cycle: v.cycle,
                cycles,
            });
        }
        by_cycle[v.cycle as usize].push((i, resolve_vector(netlist, v, Some(clock))?));
    }

    let (mut passed, mut failed, mut first) = (0, 0, None);
    let mut state = compiled.blank_state();
    for group in &by_cycle {
        for (_, (inputs, _)) in group {
            for &(net, val) in inputs {
                state[net.index()] = if val { !0 } else { 0 };
            }
        }
        state[clock.index()] = 0;
        compiled.settle(&mut state);
        for (index, (_, checks)) in group {
            if check(&state, 0, *index, checks, &mut first) {
                passed += 1;
            } else {
                failed += 1;
            }
        }
        compiled.clock(&mut state);
    }
    Ok(SimOutcome::from_counts(passed, failed, first))
}

/// Dispatch on whether the netlist has registers.
pub fn simulate(netlist: &Netlist, testbench: &Testbench) -> Result<SimOutcome, SimError> {
    if netlist.has_registers() {
        simulate_sequential(netlist, &testbench.vectors, testbench.cycles.max(1))
    } else {
        simulate_combinational(netlist, &testbench.vectors)
    }
}

/// Output bits (flattened, declaration order) for one full input assignment
/// of a combinational netlist. Input bits are flattened the same way.
pub fn eval_combinational(netlist: &Netlist, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
    let compiled = Compiled::new(netlist)?;
    let mut state = compiled.blank_state();
    for (net, &v) in netlist.input_bits().iter().zip(inputs) {
        state[net.index()] = if v { !0 } else { 0 };
    }
    compiled.settle(&mut state);
    Ok(netlist
        .output_bits()
        .iter()
        .map(|n| state[n.index()] & 1 == 1)
        .collect())
}
