//! Gate-level netlist IR.
//!
//! A [`Netlist`] is a flat module of scalar nets connected by instances of the
//! six locked primitives. Multi-bit ports are bit-blasted: a port owns one
//! [`NetId`] per bit, least significant bit first. The IR can represent
//! invalid circuits (dangling nets, multiple drivers, loops) so that
//! [`validate`] can report them as data.

mod analysis;

pub use analysis::{
    critical_path_delay, gate_count, levelize, same_structure, structural_report, validate,
    warnings, NetlistError, StructuralReport, StructuralViolation, StructuralWarning,
    ViolationClass,
};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a net in [`Netlist::nets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetId(pub u32);

/// Index of a gate in [`Netlist::gates`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GateId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The locked primitive set. Nothing else is representable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Nand,
    /// Rising-edge register; inputs are `(data, clock)`.
    Dff,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Dff,
    ];

    pub const COMBINATIONAL: [GateKind; 5] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
    ];

    /// Number of input pins.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Not => "not",
            GateKind::Xor => "xor",
            GateKind::Nand => "nand",
            GateKind::Dff => "dff",
        }
    }

    /// Case-insensitive keyword lookup.
    pub fn from_keyword(word: &str) -> Option<GateKind> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.keyword().eq_ignore_ascii_case(word))
    }

    pub fn is_register(self) -> bool {
        self == GateKind::Dff
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            GateKind::And | GateKind::Or | GateKind::Xor | GateKind::Nand
        )
    }

    /// Combinational semantics. `b` is ignored for `Not`; registers pass
    /// their data input through (the caller handles clocking).
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
            GateKind::Xor => a ^ b,
            GateKind::Nand => !(a & b),
            GateKind::Dff => a,
        }
    }

    /// Bit-parallel version of [`GateKind::eval`].
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
            GateKind::Xor => a ^ b,
            GateKind::Nand => !(a & b),
            GateKind::Dff => a,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.keyword().to_ascii_uppercase())
    }
}

/// How a net gets its value when no gate drives it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetKind {
    /// Driven by a primary input port bit.
    PrimaryInput,
    /// Driven by a gate output (or by nothing, which is a violation).
    Internal,
    Constant0,
    Constant1,
}

impl NetKind {
    pub fn is_source(self) -> bool {
        self != NetKind::Internal
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: Option<String>,
    pub kind: NetKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Input => "input",
            Direction::Output => "output",
        })
    }
}

/// A module port. `bits[i]` carries declared index `lsb + i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    /// Declared with a `[msb:lsb]` range (even if one bit wide).
    pub vector: bool,
    pub lsb: u32,
    pub bits: Vec<NetId>,
}

impl Port {
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn msb(&self) -> u32 {
        self.lsb + self.bits.len() as u32 - 1
    }

    /// Net carrying declared bit index `index`.
    pub fn bit(&self, index: u32) -> Option<NetId> {
        index
            .checked_sub(self.lsb)
            .and_then(|i| self.bits.get(i as usize).copied())
    }

    /// Textual name of bit slot `i` (0-based from the LSB).
    pub fn bit_name(&self, i: usize) -> String {
        if self.vector {
            format!("{}[{}]", self.name, self.lsb as usize + i)
        } else {
            self.name.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub name: String,
    pub output: NetId,
    pub inputs: Vec<NetId>,
}

/// A flat gate-level module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    name: String,
    ports: Vec<Port>,
    nets: Vec<Net>,
    gates: Vec<Gate>,
}

impl Netlist {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.index()]
    }

    pub fn gate(&self, id: GateId) -> &Gate {
        &self.gates[id.index()]
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn gate_ids(&self) -> impl Iterator<Item = GateId> {
        (0..self.gates.len() as u32).map(GateId)
    }

    pub fn input_ports(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Input)
    }

    pub fn output_ports(&self) -> impl Iterator<Item = &Port> {
        self.ports
            .iter()
            .filter(|p| p.direction == Direction::Output)
    }

    /// All input bits in declaration order, LSB first within a port.
    pub fn input_bits(&self) -> Vec<NetId> {
        self.input_ports()
            .flat_map(|p| p.bits.iter().copied())
            .collect()
    }

    pub fn output_bits(&self) -> Vec<NetId> {
        self.output_ports()
            .flat_map(|p| p.bits.iter().copied())
            .collect()
    }

    pub fn register_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.is_register()).count()
    }

    pub fn has_registers(&self) -> bool {
        self.gates.iter().any(|g| g.kind.is_register())
    }

    /// Human-readable name for a net, falling back to `$<id>`.
    pub fn net_label(&self, id: NetId) -> String {
        match self.nets.get(id.index()) {
            Some(Net {
                name: Some(name), ..
            }) => name.clone(),
            Some(Net {
                kind: NetKind::Constant0,
                ..
            }) => "1'b0".into(),
            Some(Net {
                kind: NetKind::Constant1,
                ..
            }) => "1'b1".into(),
            _ => format!("${}", id.0),
        }
    }

    /// Gates reading each net, indexed by net.
    pub fn readers(&self) -> Vec<Vec<GateId>> {
        let mut readers = vec![Vec::new(); self.nets.len()];
        for (i, g) in self.gates.iter().enumerate() {
            for &input in &g.inputs {
                if let Some(r) = readers.get_mut(input.index()) {
                    if !r.contains(&GateId(i as u32)) {
                        r.push(GateId(i as u32));
                    }
                }
            }
        }
        readers
    }

    /// Gate driving each net (first one if there are several).
    pub fn driver_gates(&self) -> Vec<Option<GateId>> {
        let mut drivers = vec![None; self.nets.len()];
        for (i, g) in self.gates.iter().enumerate() {
            if let Some(d) = drivers.get_mut(g.output.index()) {
                if d.is_none() {
                    *d = Some(GateId(i as u32));
                }
            }
        }
        drivers
    }

    /// Nets that feed a primary output port.
    pub fn is_output_net(&self) -> Vec<bool> {
        let mut out = vec![false; self.nets.len()];
        for id in self.output_bits() {
            if let Some(o) = out.get_mut(id.index()) {
                *o = true;
            }
        }
        out
    }

    /// Replace every read of `from` (gate inputs and output port bits) with `to`.
    pub(crate) fn redirect_reads(&mut self, from: NetId, to: NetId) {
        for g in &mut self.gates {
            for input in &mut g.inputs {
                if *input == from {
                    *input = to;
                }
            }
        }
        for p in &mut self.ports {
            if p.direction == Direction::Output {
                for b in &mut p.bits {
                    if *b == from {
                        *b = to;
                    }
                }
            }
        }
    }

    pub(crate) fn gates_mut(&mut self) -> &mut Vec<Gate> {
        &mut self.gates
    }

    /// Constant net of the given value, creating it if needed.
    pub(crate) fn constant_net(&mut self, value: bool) -> NetId {
        let kind = if value {
            NetKind::Constant1
        } else {
            NetKind::Constant0
        };
        if let Some(i) = self.nets.iter().position(|n| n.kind == kind) {
            return NetId(i as u32);
        }
        self.nets.push(Net { name: None, kind });
        NetId(self.nets.len() as u32 - 1)
    }

    /// Drop gates by index, keeping the relative order of the rest.
    pub(crate) fn remove_gates(&mut self, doomed: &[GateId]) {
        let mut i = 0u32;
        self.gates.retain(|_| {
            let keep = !doomed.contains(&GateId(i));
            i += 1;
            keep
        });
    }

    /// Copy with every net name cleared except port-bit names, so that two
    /// netlists differing only in internal naming compare equal.
    pub fn with_anonymous_internals(&self) -> Netlist {
        let mut out = self.clone();
        for n in &mut out.nets {
            if n.kind == NetKind::Internal {
                n.name = None;
            }
        }
        for (i, g) in out.gates.iter_mut().enumerate() {
            g.name = format!("g{}", i + 1);
        }
        out
    }
}

/// Incremental constructor. Performs no validation; call [`validate`] on the
/// result.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    name: String,
    ports: Vec<Port>,
    nets: Vec<Net>,
    gates: Vec<Gate>,
    constants: [Option<NetId>; 2],
    names: HashMap<String, NetId>,
}

impl NetlistBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetlistBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_net(&mut self, name: Option<&str>, kind: NetKind) -> NetId {
        let id = NetId(self.nets.len() as u32);
        self.nets.push(Net {
            name: name.map(str::to_owned),
            kind,
        });
        if let Some(n) = name {
            self.names.insert(n.to_owned(), id);
        }
        id
    }

    /// Net previously created under `name`.
    pub fn net_named(&self, name: &str) -> Option<NetId> {
        self.names.get(name).copied()
    }

    /// Scalar input port.
    pub fn input(&mut self, name: &str) -> NetId {
        self.input_bus(name, 1, false)[0]
    }

    /// Input port of `width` bits, indices `[width-1:0]`.
    pub fn input_bus(&mut self, name: &str, width: usize, vector: bool) -> Vec<NetId> {
        let bits: Vec<NetId> = (0..width)
            .map(|i| {
                let bit_name = if vector {
                    format!("{name}[{i}]")
                } else {
                    name.to_owned()
                };
                self.add_net(Some(&bit_name), NetKind::PrimaryInput)
            })
            .collect();
        self.ports.push(Port {
            name: name.to_owned(),
            direction: Direction::Input,
            vector,
            lsb: 0,
            bits: bits.clone(),
        });
        bits
    }

    /// Scalar output port reading `net`.
    pub fn output(&mut self, name: &str, net: NetId) {
        self.output_bus(name, vec![net], false);
    }

    pub fn output_bus(&mut self, name: &str, bits: Vec<NetId>, vector: bool) {
        self.ports.push(Port {
            name: name.to_owned(),
            direction: Direction::Output,
            vector,
            lsb: 0,
            bits,
        });
    }

    pub fn push_port(&mut self, port: Port) {
        self.ports.push(port);
    }

    pub fn constant(&mut self, value: bool) -> NetId {
        let slot = value as usize;
        if let Some(id) = self.constants[slot] {
            return id;
        }
        let kind = if value {
            NetKind::Constant1
        } else {
            NetKind::Constant0
        };
        let id = self.add_net(None, kind);
        self.constants[slot] = Some(id);
        id
    }

    /// Add a gate driving an existing net.
    pub fn gate(
        &mut self,
        kind: GateKind,
        name: impl Into<String>,
        output: NetId,
        inputs: &[NetId],
    ) -> GateId {
        self.gates.push(Gate {
            kind,
            name: name.into(),
            output,
            inputs: inputs.to_vec(),
        });
        GateId(self.gates.len() as u32 - 1)
    }

    /// Add a gate driving a fresh anonymous internal net and return that net.
    pub fn add(&mut self, kind: GateKind, inputs: &[NetId]) -> NetId {
        let out = self.add_net(None, NetKind::Internal);
        let name = format!("g{}", self.gates.len() + 1);
        self.gate(kind, name, out, inputs);
        out
    }

    pub fn build(self) -> Netlist {
        Netlist {
            name: self.name,
            ports: self.ports,
            nets: self.nets,
            gates: self.gates,
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn half_adder() -> Netlist {
        let mut b = NetlistBuilder::new("half_adder");
        let a = b.input("a");
        let bb = b.input("b");
        let s = b.add(GateKind::Xor, &[a, bb]);
        let c = b.add(GateKind::And, &[a, bb]);
        b.output("sum", s);
        b.output("carry", c);
        b.build()
    }

    pub fn not_chain(len: usize) -> Netlist {
        let mut b = NetlistBuilder::new("chain");
        let mut cur = b.input("a");
        for _ in 0..len {
            cur = b.add(GateKind::Not, &[cur]);
        }
        b.output("y", cur);
        b.build()
    }

    pub fn full_adder() -> Netlist {
        let mut b = NetlistBuilder::new("full_adder");
        let a = b.input("a");
        let bb = b.input("b");
        let cin = b.input("cin");
        let p = b.add(GateKind::Xor, &[a, bb]);
        let s = b.add(GateKind::Xor, &[p, cin]);
        let g = b.add(GateKind::And, &[a, bb]);
        let t = b.add(GateKind::And, &[p, cin]);
        let co = b.add(GateKind::Or, &[g, t]);
        b.output("sum", s);
        b.output("cout", co);
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyword_lookup_is_case_insensitive() {
        assert_eq!(GateKind::from_keyword("NAND"), Some(GateKind::Nand));
        assert_eq!(GateKind::from_keyword("Dff"), Some(GateKind::Dff));
        assert_eq!(GateKind::from_keyword("nor"), None);
        assert_eq!(GateKind::from_keyword("xnor"), None);
    }

    #[test]
    fn arities() {
        for k in GateKind::ALL {
            let expected = if k == GateKind::Not { 1 } else { 2 };
            assert_eq!(k.arity(), expected, "{k}");
        }
    }

    #[test]
    fn port_bit_lookup_respects_lsb() {
        let p = Port {
            name: "d".into(),
            direction: Direction::Input,
            vector: true,
            lsb: 2,
            bits: vec![NetId(0), NetId(1)],
        };
        assert_eq!(p.bit(2), Some(NetId(0)));
        assert_eq!(p.bit(3), Some(NetId(1)));
        assert_eq!(p.bit(1), None);
        assert_eq!(p.bit(4), None);
        assert_eq!(p.msb(), 3);
        assert_eq!(p.bit_name(1), "d[3]");
    }
}
