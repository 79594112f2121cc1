use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BoolError, BoolFunction};

pub const QM_MAX_INPUTS: u32 = 12;

/// A product term. Variable `i` is fixed to bit `i` of `value` when bit `i`
/// of `care` is set, and free otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    pub value: u16,
    pub care: u16,
}

impl Cube {
    pub fn minterm(m: u32, inputs: u32) -> Cube {
        Cube {
            value: m as u16,
            care: ((1u32 << inputs) - 1) as u16,
        }
    }

    pub fn contains(&self, row: u32) -> bool {
        (row as u16 ^ self.value) & self.care == 0
    }

    pub fn literals(&self) -> u32 {
        self.care.count_ones()
    }

    /// Per-variable symbols, variable 0 first: `0`, `1` or `-`.
    pub fn symbols(&self, inputs: u32) -> String {
        (0..inputs)
            .map(|i| match (self.care >> i & 1, self.value >> i & 1) {
                (0, _) => '-',
                (_, 0) => '0',
                _ => '1',
            })
            .collect()
    }

    /// Order used for tie-breaking: compare symbol strings with `-` < `0` < `1`.
    fn lex_cmp(&self, other: &Cube, inputs: u32) -> Ordering {
        self.symbols(inputs).cmp(&other.symbols(inputs))
    }
}

/// A minimum sum-of-products cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalCover {
    pub inputs: u32,
    pub cubes: Vec<Cube>,
}

impl MinimalCover {
    pub fn terms(&self) -> usize {
        self.cubes.len()
    }

    pub fn literals(&self) -> u32 {
        self.cubes.iter().map(Cube::literals).sum()
    }

    pub fn eval(&self, row: u32) -> bool {
        self.cubes.iter().any(|c| c.contains(row))
    }
}

impl fmt::Display for MinimalCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cubes.is_empty() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self.cubes.iter().map(|c| c.symbols(self.inputs)).collect();
        f.write_str(&terms.join(" + "))
    }
}

/// All prime implicants of on ∪ dc, found by repeated merging of cubes that
/// differ in one fixed variable.
fn prime_implicants(f: &BoolFunction) -> Vec<Cube> {
    let n = f.inputs();
    let mut current: HashSet<Cube> = (0..f.rows())
        .filter(|&r| f.value(0, r) || f.is_dont_care(0, r))
        .map(|r| Cube::minterm(r, n))
        .collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut merged_away: HashSet<Cube> = HashSet::new();
        let mut next: HashSet<Cube> = HashSet::new();
        for c in &current {
            for b in 0..n {
                let bit = 1u16 << b;
                if c.care & bit == 0 || c.value & bit != 0 {
                    continue;
                }
                let partner = Cube {
                    value: c.value | bit,
                    care: c.care,
                };
                if current.contains(&partner) {
                    merged_away.insert(*c);
                    merged_away.insert(partner);
                    next.insert(Cube {
                        value: c.value & !bit,
                        care: c.care & !bit,
                    });
                }
            }
        }
        primes.extend(current.iter().filter(|c| !merged_away.contains(c)).copied());
        current = next;
    }
    primes.sort_by(|a, b| a.lex_cmp(b, n));
    primes
}

struct CoverSearch<'a> {
    inputs: u32,
    primes: &'a [Cube],
    /// For each on-set row still to cover, the primes containing it.
    covering: Vec<Vec<usize>>,
    best: Option<Vec<usize>>,
}

impl CoverSearch<'_> {
    fn better(&self, cand: &[usize]) -> bool {
        match &self.best {
            None => true,
            Some(b) if cand.len() != b.len() => cand.len() < b.len(),
            Some(b) => {
                let key = |s: &[usize]| -> Vec<String> {
                    let mut v: Vec<String> = s.iter().map(|&i| self.primes[i].symbols(self.inputs)).collect();
                    v.sort();
                    v
                };
                key(cand) < key(b)
            }
        }
    }

    /// Greedy count of pairwise prime-disjoint uncovered rows: each needs
    /// its own term.
    fn lower_bound(&self, uncovered: &[usize]) -> usize {
        let mut taken: BTreeSet<usize> = BTreeSet::new();
        let mut count = 0;
        for &row in uncovered {
            if self.covering[row].iter().all(|p| !taken.contains(p)) {
                count += 1;
                taken.extend(self.covering[row].iter().copied());
            }
        }
        count
    }

    fn search(&mut self, chosen: &mut Vec<usize>, uncovered: Vec<usize>) {
        if uncovered.is_empty() {
            if self.better(chosen) {
                self.best = Some(chosen.clone());
            }
            return;
        }
        if let Some(b) = &self.best {
            // Equal-size covers stay in play for the lexicographic tie-break.
            if chosen.len() + self.lower_bound(&uncovered) > b.len() {
                return;
            }
        }
        // Branch on the row with the fewest covering primes.
        let &row = uncovered
            .iter()
            .min_by_key(|&&r| (self.covering[r].len(), r))
            .expect("non-empty");
        for p in self.covering[row].clone() {
            let rest: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&r| !self.covering[r].contains(&p))
                .collect();
            chosen.push(p);
            self.search(chosen, rest);
            chosen.pop();
        }
    }
}

/// Exact minimum sum-of-products for a single-output function.
///
/// Essential primes are taken first; the rest of the cover comes from a
/// branch-and-bound set cover. Among covers with the fewest terms the
/// lexicographically smallest (sorted symbol strings) wins.
pub fn quine_mccluskey(f: &BoolFunction) -> Result<MinimalCover, BoolError> {
    if f.inputs() > QM_MAX_INPUTS {
        return Err(BoolError::TooManyInputs {
            inputs: f.inputs(),
            limit: QM_MAX_INPUTS,
        });
    }
    if f.outputs() != 1 {
        return Err(BoolError::NotSingleOutput(f.outputs()));
    }
    let n = f.inputs();
    let primes = prime_implicants(f);
    let on_rows: Vec<u32> = (0..f.rows()).filter(|&r| f.value(0, r)).collect();
    let covering: Vec<Vec<usize>> = on_rows
        .iter()
        .map(|&r| (0..primes.len()).filter(|&p| primes[p].contains(r)).collect())
        .collect();

    let mut essential: Vec<usize> = covering
        .iter()
        .filter(|c| c.len() == 1)
        .map(|c| c[0])
        .collect();
    essential.sort_unstable();
    essential.dedup();
    let uncovered: Vec<usize> = (0..on_rows.len())
        .filter(|&r| !covering[r].iter().any(|p| essential.contains(p)))
        .collect();

    let mut search = CoverSearch {
        inputs: n,
        primes: &primes,
        covering,
        best: None,
    };
    let mut chosen = essential.clone();
    search.search(&mut chosen, uncovered);
    let mut cubes: Vec<Cube> = search
        .best
        .expect("primes always cover the on-set")
        .into_iter()
        .map(|i| primes[i])
        .collect();
    cubes.sort_by(|a, b| a.lex_cmp(b, n));
    Ok(MinimalCover { inputs: n, cubes })
}
