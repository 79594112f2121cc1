//! Boolean optimization oracles: exact two-level minimization, exhaustive
//! minimum gate-network search, and structural rewrite hints.

mod hints;
mod qm;
mod search;

pub use hints::{apply_hint, suggest_optimizations, HintKind, OptimizationHint};
pub use qm::{quine_mccluskey, Cube, MinimalCover, QM_MAX_INPUTS};
pub use search::{min_gate_network, SEARCH_MAX_GATES, SEARCH_MAX_INPUTS};

use thiserror::Error;

use crate::netlist::Netlist;
use crate::sim::{truth_table, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoolError {
    #[error("{inputs} inputs exceed the limit of {limit}")]
    TooManyInputs { inputs: u32, limit: u32 },
    #[error("{gates} gates exceed the search limit of {limit}")]
    TooManyGates { gates: usize, limit: usize },
    #[error("expected a single-output function, got {0} outputs")]
    NotSingleOutput(usize),
    #[error("gate set must contain at least one combinational gate")]
    EmptyGateSet,
    #[error("minterm {minterm} is out of range for {inputs} inputs")]
    Minterm { minterm: u32, inputs: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("hint no longer applies: {0}")]
    StaleHint(String),
}

/// A multi-output Boolean function with optional don't-cares.
///
/// Row `r` assigns input `j` the value of bit `j` of `r`. Each output is a
/// bitset of `2^inputs` rows, 64 rows per word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolFunction {
    inputs: u32,
    on: Vec<Vec<u64>>,
    dont_care: Vec<Vec<u64>>,
}

fn words(inputs: u32) -> usize {
    (1usize << inputs).div_ceil(64)
}

impl BoolFunction {
    /// Build from a row function returning one bool per output.
    pub fn from_fn(inputs: u32, outputs: usize, f: impl Fn(u32) -> Vec<bool>) -> Result<Self, BoolError> {
        if inputs > QM_MAX_INPUTS {
            return Err(BoolError::TooManyInputs {
                inputs,
                limit: QM_MAX_INPUTS,
            });
        }
        let mut on = vec![vec![0u64; words(inputs)]; outputs];
        for r in 0..1u32 << inputs {
            for (k, v) in f(r).into_iter().enumerate().take(outputs) {
                if v {
                    on[k][r as usize / 64] |= 1 << (r % 64);
                }
            }
        }
        Ok(BoolFunction {
            inputs,
            dont_care: vec![vec![0; words(inputs)]; outputs],
            on,
        })
    }

    /// Single output given by its on-set and don't-care minterms.
    pub fn from_minterms(inputs: u32, on: &[u32], dont_care: &[u32]) -> Result<Self, BoolError> {
        let mut f = BoolFunction::from_fn(inputs, 1, |_| vec![false])?;
        for (&m, dc) in on.iter().map(|m| (m, false)).chain(dont_care.iter().map(|m| (m, true))) {
            if m >= 1 << inputs {
                return Err(BoolError::Minterm { minterm: m, inputs });
            }
            let set = if dc { &mut f.dont_care[0] } else { &mut f.on[0] };
            set[m as usize / 64] |= 1 << (m % 64);
        }
        Ok(f)
    }

    /// Single output from a truth table packed into the low `2^inputs` bits.
    pub fn from_table(inputs: u32, table: u64) -> Result<Self, BoolError> {
        if inputs > 6 {
            return Err(BoolError::TooManyInputs { inputs, limit: 6 });
        }
        BoolFunction::from_fn(inputs, 1, |r| vec![(table >> r) & 1 == 1])
    }

    /// The function computed by a combinational netlist.
    pub fn of_netlist(netlist: &Netlist) -> Result<Self, BoolError> {
        let sig = truth_table(netlist)?;
        Ok(BoolFunction {
            inputs: sig.inputs,
            dont_care: vec![vec![0; words(sig.inputs)]; sig.columns.len()],
            on: sig.columns,
        })
    }

    pub fn inputs(&self) -> u32 {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.on.len()
    }

    pub fn rows(&self) -> u32 {
        1 << self.inputs
    }

    pub fn value(&self, output: usize, row: u32) -> bool {
        (self.on[output][row as usize / 64] >> (row % 64)) & 1 == 1
    }

    pub fn is_dont_care(&self, output: usize, row: u32) -> bool {
        (self.dont_care[output][row as usize / 64] >> (row % 64)) & 1 == 1
    }

    /// Mark a row of one output as unspecified.
    pub fn set_dont_care(&mut self, output: usize, row: u32) {
        self.dont_care[output][row as usize / 64] |= 1 << (row % 64);
        self.on[output][row as usize / 64] &= !(1 << (row % 64));
    }

    /// Whether `value` is acceptable for `output` at `row`.
    pub fn matches(&self, output: usize, row: u32, value: bool) -> bool {
        self.is_dont_care(output, row) || self.value(output, row) == value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::fixtures;

    #[test]
    fn from_netlist_matches_semantics() {
        let f = BoolFunction::of_netlist(&fixtures::half_adder()).unwrap();
        assert_eq!((f.inputs(), f.outputs()), (2, 2));
        for r in 0..4 {
            assert_eq!(f.value(0, r), (r & 1) ^ (r >> 1) == 1);
            assert_eq!(f.value(1, r), r == 3);
        }
    }

    #[test]
    fn minterm_range_checked() {
        assert!(matches!(
            BoolFunction::from_minterms(2, &[4], &[]),
            Err(BoolError::Minterm { .. })
        ));
        assert!(BoolFunction::from_fn(13, 1, |_| vec![true]).is_err());
    }
}
