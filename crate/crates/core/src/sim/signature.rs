use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{clock_net, Compiled, SimError};
use crate::netlist::{NetId, Netlist};

/// Widest input count that still gets an exhaustive table.
pub const SIGNATURE_MAX_INPUTS: usize = 12;
/// Rows in a sampled signature.
pub const SAMPLE_VECTORS: usize = 1024;
pub const SAMPLE_SEED: u64 = 0x6174_6573_6d69_7468;

/// Behavior of a circuit independent of its structure.
///
/// `columns[k]` holds output bit `k` for every row, 64 rows per word. Row `r`
/// drives input bit `j` with bit `j` of `r`; input and output bits are
/// flattened in port declaration order, LSB first. For sequential circuits
/// the registers are cut: register outputs become extra inputs and register
/// data pins extra outputs, both in gate order, and the clock is dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalSignature {
    pub inputs: u32,
    pub outputs: u32,
    /// Rows were drawn from a fixed-seed sample instead of enumerated.
    pub approximate: bool,
    pub columns: Vec<Vec<u64>>,
    /// Hex SHA-256 over the canonical encoding.
    pub hash: String,
}

impl FunctionalSignature {
    pub fn rows(&self) -> usize {
        if self.approximate {
            SAMPLE_VECTORS
        } else {
            1 << self.inputs
        }
    }

    pub fn value(&self, row: usize, output: usize) -> bool {
        (self.columns[output][row / 64] >> (row % 64)) & 1 == 1
    }

    /// All outputs of one row, flattened order.
    pub fn row(&self, row: usize) -> Vec<bool> {
        (0..self.outputs as usize).map(|k| self.value(row, k)).collect()
    }

    fn seal(inputs: u32, approximate: bool, columns: Vec<Vec<u64>>) -> Self {
        let mut h = Sha256::new();
        h.update(format!("sig1;n={inputs};m={};approx={approximate};", columns.len()));
        for col in &columns {
            for w in col {
                h.update(w.to_le_bytes());
            }
        }
        let hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        FunctionalSignature {
            inputs,
            outputs: columns.len() as u32,
            approximate,
            columns,
            hash,
        }
    }
}

/// Exhaustive signature of a combinational netlist with at most
/// [`SIGNATURE_MAX_INPUTS`] input bits.
pub fn truth_table(netlist: &Netlist) -> Result<FunctionalSignature, SimError> {
    if netlist.has_registers() {
        return Err(SimError::Sequential);
    }
    let n = netlist.input_bits().len();
    if n > SIGNATURE_MAX_INPUTS {
        return Err(SimError::TooManyInputs {
            inputs: n,
            limit: SIGNATURE_MAX_INPUTS,
        });
    }
    functional_signature(netlist)
}

/// Signature of any valid netlist: exhaustive when small enough, otherwise
/// sampled and flagged approximate.
pub fn functional_signature(netlist: &Netlist) -> Result<FunctionalSignature, SimError> {
    let compiled = Compiled::new(netlist)?;
    let clock = if netlist.has_registers() {
        Some(clock_net(netlist)?)
    } else {
        None
    };
    let mut ins: Vec<NetId> = netlist
        .input_bits()
        .into_iter()
        .filter(|n| Some(*n) != clock)
        .collect();
    let mut outs = netlist.output_bits();
    for &g in compiled.registers() {
        let gate = netlist.gate(g);
        ins.push(gate.output);
        outs.push(gate.inputs[0]);
    }
    let n = ins.len();

    let (words, approximate) = if n <= SIGNATURE_MAX_INPUTS {
        ((1usize << n).div_ceil(64), false)
    } else {
        (SAMPLE_VECTORS / 64, true)
    };
    let mask = if !approximate && n < 6 {
        (1u64 << (1 << n)) - 1
    } else {
        !0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    let mut columns = vec![Vec::with_capacity(words); outs.len()];
    for w in 0..words {
        let mut state = compiled.blank_state();
        for (j, net) in ins.iter().enumerate() {
            state[net.index()] = if approximate {
                rng.gen::<u64>()
            } else {
                exhaustive_word(j, w)
            };
        }
        compiled.settle(&mut state);
        for (k, net) in outs.iter().enumerate() {
            columns[k].push(state[net.index()] & mask);
        }
    }
    Ok(FunctionalSignature::seal(n as u32, approximate, columns))
}

/// Input bit `j` across rows `64w .. 64w+63`.
fn exhaustive_word(j: usize, w: usize) -> u64 {
    const LANES: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if j < 6 {
        LANES[j]
    } else if (w >> (j - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}
