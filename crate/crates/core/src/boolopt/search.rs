use super::{BoolError, BoolFunction};
use crate::netlist::{structural_report, GateKind, NetId, NetlistBuilder, Netlist, StructuralReport};

pub const SEARCH_MAX_INPUTS: u32 = 4;
pub const SEARCH_MAX_GATES: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Step {
    kind: usize,
    a: usize,
    b: usize,
}

struct Search<'a> {
    kinds: &'a [GateKind],
    /// (on-set, care mask) per output.
    targets: Vec<(u16, u16)>,
    limit: usize,
    /// Truth tables: 0 and 1 constants, then inputs, then gate outputs.
    sigs: Vec<u16>,
    depth: Vec<u32>,
    reads: Vec<u32>,
    steps: Vec<Step>,
    best: Option<(u32, Vec<Step>)>,
    base: usize,
}

impl Search<'_> {
    fn output_match(&self, (on, care): (u16, u16)) -> Option<usize> {
        (0..self.sigs.len())
            .filter(|&s| (self.sigs[s] ^ on) & care == 0)
            .min_by_key(|&s| (self.depth[s], s))
    }

    fn unsatisfied(&self) -> usize {
        self.targets
            .iter()
            .filter(|t| self.output_match(**t).is_none())
            .count()
    }

    fn dfs(&mut self) {
        let remaining = self.limit - self.steps.len();
        if self.unsatisfied() > remaining {
            return;
        }
        let unused = (self.base..self.sigs.len()).filter(|&s| self.reads[s] == 0).count();
        if unused > remaining + self.targets.len() {
            return;
        }
        if remaining == 0 {
            let delay = self
                .targets
                .iter()
                .map(|t| self.depth[self.output_match(*t).expect("all satisfied")])
                .max()
                .unwrap_or(0);
            if self.best.as_ref().is_none_or(|(d, _)| delay < *d) {
                self.best = Some((delay, self.steps.clone()));
            }
            return;
        }
        let len = self.sigs.len();
        let prev = self.steps.last().copied();
        for kind in 0..self.kinds.len() {
            let k = self.kinds[kind];
            for a in 0..len {
                let b_range = if k.arity() == 1 { a..a + 1 } else { a..len };
                for b in b_range {
                    let step = Step { kind, a, b };
                    // Independent neighbours appear in one canonical order.
                    if let Some(p) = prev {
                        let reads_prev = a == len - 1 || (k.arity() == 2 && b == len - 1);
                        if !reads_prev && (a, b, kind) <= (p.a, p.b, p.kind) {
                            continue;
                        }
                    }
                    let t = k.eval_word(self.sigs[a] as u64, self.sigs[b] as u64) as u16 & self.sigs[1];
                    if self.sigs.contains(&t) {
                        continue;
                    }
                    let d = 1 + self.depth[a].max(self.depth[b]);
                    self.sigs.push(t);
                    self.depth.push(d);
                    self.reads.push(0);
                    self.reads[a] += 1;
                    if k.arity() == 2 {
                        self.reads[b] += 1;
                    }
                    self.steps.push(step);
                    self.dfs();
                    self.steps.pop();
                    self.reads[a] -= 1;
                    if k.arity() == 2 {
                        self.reads[b] -= 1;
                    }
                    self.reads.pop();
                    self.depth.pop();
                    self.sigs.pop();
                }
            }
        }
    }
}

/// Smallest network over `gate_set` realizing `f` (don't-cares respected),
/// with at most `max_gates` gates. Among networks of the minimum size the
/// one with the least delay is returned.
///
/// Gate inputs may be primary inputs, earlier gate outputs or the constants
/// 0 and 1. Inputs are named `x0, x1, ...`; a single output is `y`, several
/// are `y0, y1, ...`.
pub fn min_gate_network(
    f: &BoolFunction,
    gate_set: &[GateKind],
    max_gates: usize,
) -> Result<Option<(Netlist, StructuralReport)>, BoolError> {
    if f.inputs() > SEARCH_MAX_INPUTS {
        return Err(BoolError::TooManyInputs {
            inputs: f.inputs(),
            limit: SEARCH_MAX_INPUTS,
        });
    }
    if max_gates > SEARCH_MAX_GATES {
        return Err(BoolError::TooManyGates {
            gates: max_gates,
            limit: SEARCH_MAX_GATES,
        });
    }
    let mut kinds: Vec<GateKind> = gate_set.iter().copied().filter(|k| !k.is_register()).collect();
    kinds.sort();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(BoolError::EmptyGateSet);
    }
    let n = f.inputs();
    let rows = f.rows();
    let mask: u16 = if rows == 16 { 0xFFFF } else { (1u16 << rows) - 1 };
    let mut sigs = vec![0u16, mask];
    for j in 0..n {
        sigs.push((0..rows).filter(|r| r >> j & 1 == 1).fold(0, |t, r| t | 1 << r));
    }
    let targets = (0..f.outputs())
        .map(|k| {
            (0..rows).fold((0u16, 0u16), |(on, care), r| {
                let on = if f.value(k, r) { on | 1 << r } else { on };
                let care = if f.is_dont_care(k, r) { care } else { care | 1 << r };
                (on, care)
            })
        })
        .collect();
    let base = sigs.len();
    let mut search = Search {
        kinds: &kinds,
        targets,
        limit: 0,
        depth: vec![0; base],
        reads: vec![0; base],
        sigs,
        steps: Vec::new(),
        best: None,
        base,
    };
    for limit in 0..=max_gates {
        search.limit = limit;
        search.dfs();
        if search.best.is_some() {
            break;
        }
    }
    let Some((_, steps)) = search.best.take() else {
        return Ok(None);
    };

    // Replay the winning program into a netlist.
    let mut b = NetlistBuilder::new("min_network");
    let mut nets: Vec<NetId> = vec![b.constant(false), b.constant(true)];
    for j in 0..n {
        nets.push(b.input(&format!("x{j}")));
    }
    search.sigs.truncate(base);
    search.depth.truncate(base);
    for s in &steps {
        let k = kinds[s.kind];
        let ins: Vec<NetId> = if k.arity() == 1 {
            vec![nets[s.a]]
        } else {
            vec![nets[s.a], nets[s.b]]
        };
        nets.push(b.add(k, &ins));
        let t = k.eval_word(search.sigs[s.a] as u64, search.sigs[s.b] as u64) as u16 & mask;
        let d = 1 + search.depth[s.a].max(search.depth[s.b]);
        search.sigs.push(t);
        search.depth.push(d);
    }
    let outs = search.targets.len();
    for k in 0..outs {
        let s = search.output_match(search.targets[k]).expect("solution covers every output");
        let name = if outs == 1 { "y".to_owned() } else { format!("y{k}") };
        b.output(&name, nets[s]);
    }
    let netlist = b.build();
    let report = structural_report(&netlist).expect("search builds acyclic networks");
    Ok(Some((netlist, report)))
}
