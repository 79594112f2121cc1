use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{Direction, Netlist};

pub const TESTBENCH_SCHEMA_VERSION: u32 = 1;

/// One bit of a port. `index` is the declared bit index; `None` names a
/// scalar port.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortBit {
    pub port: String,
    pub index: Option<u32>,
}

impl PortBit {
    pub fn new(port: impl Into<String>, index: u32) -> Self {
        PortBit {
            port: port.into(),
            index: Some(index),
        }
    }

    pub fn scalar(port: impl Into<String>) -> Self {
        PortBit {
            port: port.into(),
            index: None,
        }
    }

    /// Parse `name` or `name[i]`.
    pub fn parse(key: &str) -> Option<PortBit> {
        match key.split_once('[') {
            None => valid_name(key).then(|| PortBit::scalar(key)),
            Some((name, rest)) => {
                let idx = rest.strip_suffix(']')?.parse().ok()?;
                valid_name(name).then(|| PortBit::new(name, idx))
            }
        }
    }
}

fn valid_name(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_' || x == '$')
}

impl fmt::Display for PortBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.port, i),
            None => f.write_str(&self.port),
        }
    }
}

/// One row of a testbench. `expected` maps to `None` for don't-care bits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVector {
    pub cycle: u32,
    pub inputs: BTreeMap<PortBit, bool>,
    pub expected: BTreeMap<PortBit, Option<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortDecl {
    pub name: String,
    pub direction: Direction,
    #[serde(default = "one")]
    pub width: u32,
    #[serde(default)]
    pub lsb: u32,
    /// Declared with `[msb:lsb]` even if one bit wide. Defaults to `width > 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<bool>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clock: bool,
}

fn one() -> u32 {
    1
}

impl PortDecl {
    pub fn new(name: impl Into<String>, direction: Direction, width: u32) -> Self {
        PortDecl {
            name: name.into(),
            direction,
            width,
            lsb: 0,
            vector: None,
            clock: false,
        }
    }

    pub fn clock(name: impl Into<String>) -> Self {
        PortDecl {
            clock: true,
            ..PortDecl::new(name, Direction::Input, 1)
        }
    }

    pub fn is_vector(&self) -> bool {
        self.vector.unwrap_or(self.width > 1)
    }

    /// Port bits LSB first.
    pub fn bits(&self) -> Vec<PortBit> {
        if self.is_vector() {
            (self.lsb..self.lsb + self.width)
                .map(|i| PortBit::new(&self.name, i))
                .collect()
        } else {
            vec![PortBit::scalar(&self.name)]
        }
    }

    /// Header fragment such as `input [3:0] a`.
    pub fn header(&self) -> String {
        if self.is_vector() {
            format!(
                "{} [{}:{}] {}",
                self.direction,
                self.lsb + self.width - 1,
                self.lsb,
                self.name
            )
        } else {
            format!("{} {}", self.direction, self.name)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterfaceError {
    #[error("missing port `{0}`")]
    MissingPort(String),
    #[error("unexpected port `{0}`")]
    ExtraPort(String),
    #[error("port `{port}` should be {expected}")]
    Mismatch { port: String, expected: String },
}

/// A task's port interface.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    #[serde(rename = "port", default)]
    pub ports: Vec<PortDecl>,
}

impl Interface {
    pub fn new(ports: Vec<PortDecl>) -> Self {
        Interface { ports }
    }

    pub fn port(&self, name: &str) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports.iter().filter(|p| p.direction == Direction::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &PortDecl> {
        self.ports.iter().filter(|p| p.direction == Direction::Output)
    }

    pub fn clock(&self) -> Option<&PortDecl> {
        self.ports.iter().find(|p| p.clock)
    }

    pub fn input_bit_count(&self) -> usize {
        self.inputs().filter(|p| !p.clock).map(|p| p.width as usize).sum()
    }

    pub fn output_bit_count(&self) -> usize {
        self.outputs().map(|p| p.width as usize).sum()
    }

    /// `module name(input a, ...);` header line.
    pub fn module_header(&self, module: &str) -> String {
        let ports: Vec<String> = self.ports.iter().map(PortDecl::header).collect();
        format!("module {module}({});", ports.join(", "))
    }

    /// Interface actually implemented by a netlist.
    pub fn of(netlist: &Netlist) -> Interface {
        let clock = crate::sim::clock_net(netlist).ok();
        Interface {
            ports: netlist
                .ports()
                .iter()
                .map(|p| PortDecl {
                    name: p.name.clone(),
                    direction: p.direction,
                    width: p.width() as u32,
                    lsb: p.lsb,
                    vector: Some(p.vector),
                    clock: p.direction == Direction::Input
                        && p.width() == 1
                        && clock == Some(p.bits[0]),
                })
                .collect(),
        }
    }

    /// Check that a candidate implements exactly this interface. Port order
    /// is free; names, directions and widths must match.
    pub fn check(&self, netlist: &Netlist) -> Result<(), InterfaceError> {
        for want in &self.ports {
            let got = netlist
                .port(&want.name)
                .ok_or_else(|| InterfaceError::MissingPort(want.name.clone()))?;
            if got.direction != want.direction
                || got.width() != want.width as usize
                || (want.is_vector() && got.lsb != want.lsb)
            {
                return Err(InterfaceError::Mismatch {
                    port: want.name.clone(),
                    expected: want.header(),
                });
            }
        }
        for p in netlist.ports() {
            if self.port(&p.name).is_none() {
                return Err(InterfaceError::ExtraPort(p.name.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TestbenchError {
    #[error("testbench is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported testbench schema version {0}")]
    Schema(u32),
    #[error("ports declared in the testbench differ from the interface")]
    PortsDiffer,
    #[error("vector {vector}: {message}")]
    Vector { vector: usize, message: String },
}

/// Vectors plus the interface they were written against.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Testbench {
    pub interface: Interface,
    /// Clock periods to run; 0 for combinational testbenches.
    pub cycles: u32,
    pub vectors: Vec<TestVector>,
}

#[derive(Serialize, Deserialize)]
struct RawTestbench {
    schema_version: u32,
    #[serde(default)]
    cycles: u32,
    #[serde(rename = "port", default)]
    ports: Vec<PortDecl>,
    #[serde(rename = "vector", default)]
    vectors: Vec<RawVector>,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    #[serde(default)]
    cycle: u32,
    #[serde(default)]
    inputs: BTreeMap<String, RawValue>,
    #[serde(default)]
    expect: BTreeMap<String, RawValue>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(i64),
    Text(String),
}

impl Testbench {
    pub fn is_sequential(&self) -> bool {
        self.cycles > 0
    }

    pub fn from_toml(text: &str) -> Result<Testbench, TestbenchError> {
        Testbench::parse(text, None)
    }

    /// Parse a testbench whose ports live elsewhere. Ports declared in the
    /// file itself must match `interface` exactly.
    pub fn from_toml_with(text: &str, interface: &Interface) -> Result<Testbench, TestbenchError> {
        Testbench::parse(text, Some(interface))
    }

    fn parse(text: &str, given: Option<&Interface>) -> Result<Testbench, TestbenchError> {
        let raw: RawTestbench = toml::from_str(text)?;
        if raw.schema_version != TESTBENCH_SCHEMA_VERSION {
            return Err(TestbenchError::Schema(raw.schema_version));
        }
        let interface = match given {
            None => Interface::new(raw.ports),
            Some(i) if raw.ports.is_empty() || raw.ports == i.ports => i.clone(),
            Some(_) => return Err(TestbenchError::PortsDiffer),
        };
        let mut vectors = Vec::with_capacity(raw.vectors.len());
        for (i, rv) in raw.vectors.into_iter().enumerate() {
            let err = |message: String| TestbenchError::Vector { vector: i, message };
            if raw.cycles == 0 && rv.cycle != 0 {
                return Err(err("combinational testbenches only use cycle 0".into()));
            }
            if raw.cycles > 0 && rv.cycle >= raw.cycles {
                return Err(err(format!("cycle {} is outside 0..{}", rv.cycle, raw.cycles)));
            }
            let mut v = TestVector {
                cycle: rv.cycle,
                ..Default::default()
            };
            for (key, val) in &rv.inputs {
                for (bit, b) in expand(&interface, key, val, Direction::Input).map_err(err)? {
                    let b = b.ok_or_else(|| err(format!("input `{key}` cannot be don't-care")))?;
                    v.inputs.insert(bit, b);
                }
            }
            for (key, val) in &rv.expect {
                for (bit, b) in expand(&interface, key, val, Direction::Output).map_err(err)? {
                    v.expected.insert(bit, b);
                }
            }
            vectors.push(v);
        }
        Ok(Testbench {
            interface,
            cycles: raw.cycles,
            vectors,
        })
    }

    /// Canonical TOML. Whole ports are written as integers when fully
    /// specified, `"x"` when fully don't-care, and as MSB-first patterns
    /// otherwise.
    pub fn to_toml(&self) -> String {
        let raw = RawTestbench {
            schema_version: TESTBENCH_SCHEMA_VERSION,
            cycles: self.cycles,
            ports: self.interface.ports.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| RawVector {
                    cycle: v.cycle,
                    inputs: collapse(&self.interface, &v.inputs.iter().map(|(k, b)| (k.clone(), Some(*b))).collect()),
                    expect: collapse(&self.interface, &v.expected),
                })
                .collect(),
        };
        toml::to_string(&raw).expect("testbench serializes")
    }
}

fn expand(
    iface: &Interface,
    key: &str,
    val: &RawValue,
    dir: Direction,
) -> Result<Vec<(PortBit, Option<bool>)>, String> {
    let bit = PortBit::parse(key).ok_or_else(|| format!("bad port key `{key}`"))?;
    let decl = iface
        .port(&bit.port)
        .ok_or_else(|| format!("port `{}` is not in the interface", bit.port))?;
    if decl.direction != dir {
        return Err(format!("`{key}` is an {}", decl.direction));
    }
    if decl.clock {
        return Err(format!("`{key}` is the clock and is driven by the simulator"));
    }
    let bits: Vec<PortBit> = match bit.index {
        Some(i) => {
            if !decl.is_vector() || i < decl.lsb || i >= decl.lsb + decl.width {
                return Err(format!("`{key}` is not a bit of `{}`", decl.name));
            }
            vec![bit]
        }
        None => decl.bits(),
    };
    let w = bits.len();
    let values: Vec<Option<bool>> = match val {
        RawValue::Int(n) => {
            if *n < 0 || (w < 64 && (*n as u64) >> w != 0) {
                return Err(format!("value {n} does not fit `{key}` ({w} bits)"));
            }
            (0..w)
                .map(|i| Some(i < 64 && (*n as u64 >> i) & 1 == 1))
                .collect()
        }
        RawValue::Text(s) if s.eq_ignore_ascii_case("x") => vec![None; w],
        RawValue::Text(s) => {
            let s: String = s.chars().filter(|c| *c != '_').collect();
            if s.len() != w {
                return Err(format!("pattern `{s}` must have {w} characters"));
            }
            s.chars()
                .rev()
                .map(|c| match c {
                    '0' => Ok(Some(false)),
                    '1' => Ok(Some(true)),
                    'x' | 'X' => Ok(None),
                    _ => Err(format!("bad pattern character `{c}`")),
                })
                .collect::<Result<_, _>>()?
        }
    };
    Ok(bits.into_iter().zip(values).collect())
}

fn collapse(iface: &Interface, map: &BTreeMap<PortBit, Option<bool>>) -> BTreeMap<String, RawValue> {
    let mut out = BTreeMap::new();
    let mut done = std::collections::BTreeSet::new();
    for decl in &iface.ports {
        let bits = decl.bits();
        let vals: Option<Vec<Option<bool>>> = bits.iter().map(|b| map.get(b).copied()).collect();
        let Some(vals) = vals else { continue };
        let value = if vals.iter().all(Option::is_none) {
            RawValue::Text("x".into())
        } else if vals.iter().all(Option::is_some) && vals.len() < 63 {
            RawValue::Int(
                vals.iter()
                    .enumerate()
                    .map(|(i, v)| (v.unwrap() as i64) << i)
                    .sum(),
            )
        } else {
            RawValue::Text(
                vals.iter()
                    .rev()
                    .map(|v| match v {
                        Some(true) => '1',
                        Some(false) => '0',
                        None => 'x',
                    })
                    .collect(),
            )
        };
        out.insert(decl.name.clone(), value);
        done.extend(bits);
    }
    for (bit, v) in map {
        if done.contains(bit) {
            continue;
        }
        let value = match v {
            Some(b) => RawValue::Int(*b as i64),
            None => RawValue::Text("x".into()),
        };
        out.insert(bit.to_string(), value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TB: &str = r#"
schema_version = 1

[[port]]
name = "a"
direction = "input"
width = 2

[[port]]
name = "y"
direction = "output"
width = 2

[[vector]]
inputs = { a = 2 }
expect = { y = "1x" }

[[vector]]
inputs = { "a[0]" = 1, "a[1]" = 0 }
expect = { "y[0]" = 1 }
"#;

    #[test]
    fn parses_whole_ports_bits_and_dont_cares() {
        let tb = Testbench::from_toml(TB).unwrap();
        assert_eq!(tb.vectors.len(), 2);
        let v = &tb.vectors[0];
        assert_eq!(v.inputs[&PortBit::new("a", 0)], false);
        assert_eq!(v.inputs[&PortBit::new("a", 1)], true);
        assert_eq!(v.expected[&PortBit::new("y", 0)], None);
        assert_eq!(v.expected[&PortBit::new("y", 1)], Some(true));
        assert_eq!(tb.vectors[1].expected.len(), 1);
    }

    #[test]
    fn canonical_toml_round_trips() {
        let tb = Testbench::from_toml(TB).unwrap();
        let text = tb.to_toml();
        assert_eq!(Testbench::from_toml(&text).unwrap(), tb);
    }

    #[test]
    fn rejects_bad_references() {
        let bad = TB.replace("inputs = { a = 2 }", "inputs = { b = 2 }");
        assert!(matches!(Testbench::from_toml(&bad), Err(TestbenchError::Vector { vector: 0, .. })));
        let bad = TB.replace("inputs = { a = 2 }", "inputs = { a = 4 }");
        assert!(Testbench::from_toml(&bad).is_err());
        let bad = TB.replace("inputs = { a = 2 }", "inputs = { y = 2 }");
        assert!(Testbench::from_toml(&bad).is_err());
        let bad = TB.replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(Testbench::from_toml(&bad), Err(TestbenchError::Schema(9))));
    }

    #[test]
    fn port_bit_keys() {
        assert_eq!(PortBit::parse("s[3]"), Some(PortBit::new("s", 3)));
        assert_eq!(PortBit::parse("cin"), Some(PortBit::scalar("cin")));
        assert_eq!(PortBit::parse("s[x]"), None);
        assert_eq!(PortBit::new("s", 3).to_string(), "s[3]");
    }
}
