//! Harvest reusable pieces from a verified design: the whole design plus
//! small connected combinational sub-circuits.

use std::collections::{BTreeSet, HashMap};

use super::{EntryKind, KnowledgeEntry, Provenance, StoreSnapshot};
use crate::netlist::{GateId, NetId, NetKind, Netlist, NetlistBuilder};

pub const MAX_SUBPATTERN_GATES: usize = 8;
pub const MAX_BOUNDARY_INPUTS: usize = 6;
/// Upper bound on enumerated sub-circuits per design.
const ENUMERATION_CAP: usize = 4000;

#[derive(Clone, Debug, Default)]
pub struct ExtractContext {
    pub task_id: String,
    pub run_id: String,
    pub tags: Vec<String>,
}

impl ExtractContext {
    fn provenance(&self) -> Provenance {
        Provenance {
            task_id: self.task_id.clone(),
            run_id: self.run_id.clone(),
            admitted: 0,
        }
    }
}

/// Candidate entries from a design that already passed its testbench.
///
/// Candidates whose signature and shape are already stored at an equal or
/// better SEI are dropped, as are duplicates within the design (the best
/// one is kept). The caller stores the survivors.
pub fn extract_patterns(verified: &Netlist, ctx: &ExtractContext, known: &StoreSnapshot) -> Vec<KnowledgeEntry> {
    let tag_refs: Vec<&str> = ctx.tags.iter().map(String::as_str).collect();
    let mut best: Vec<KnowledgeEntry> = Vec::new();
    let mut offer = |cand: KnowledgeEntry| {
        let dominated = |e: &KnowledgeEntry| {
            e.kind == EntryKind::CircuitPattern
                && !e.archived
                && e.signature == cand.signature
                && e.interface == cand.interface
                && e.sei() >= cand.sei()
        };
        if known.entries().iter().any(dominated) || best.iter().any(dominated) {
            return;
        }
        best.retain(|e| !(e.signature == cand.signature && e.interface == cand.interface));
        best.push(cand);
    };

    match KnowledgeEntry::pattern(verified, &tag_refs, ctx.provenance()) {
        Ok(whole) => offer(whole),
        Err(e) => log::warn!("whole design not extractable: {e}"),
    }

    let mut sub_tags = tag_refs.clone();
    sub_tags.push("subcircuit");
    let total = verified.gates().iter().filter(|g| !g.kind.is_register()).count();
    for (k, subset) in connected_subsets(verified).into_iter().enumerate() {
        if subset.len() == total && !verified.has_registers() {
            continue;
        }
        let Some(sub) = carve(verified, &subset, &format!("{}_sub{}", sanitize(&ctx.task_id), k)) else {
            continue;
        };
        if let Ok(entry) = KnowledgeEntry::pattern(&sub, &sub_tags, ctx.provenance()) {
            offer(entry);
        }
    }
    best
}

fn sanitize(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        format!("p_{s}")
    } else {
        s
    }
}

/// Connected sets of 2..=MAX_SUBPATTERN_GATES combinational gates. Two
/// gates are adjacent when one reads the other or both read a common
/// non-constant net. Enumeration visits each set once (ESU order).
fn connected_subsets(n: &Netlist) -> Vec<Vec<usize>> {
    let gates = n.gates();
    let comb: Vec<usize> = (0..gates.len()).filter(|&g| !gates[g].kind.is_register()).collect();
    let mut by_net: HashMap<NetId, Vec<usize>> = HashMap::new();
    for &g in &comb {
        by_net.entry(gates[g].output).or_default().push(g);
        for &i in &gates[g].inputs {
            if !matches!(n.net(i).kind, NetKind::Constant0 | NetKind::Constant1) {
                by_net.entry(i).or_default().push(g);
            }
        }
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); gates.len()];
    for members in by_net.values() {
        for &a in members {
            for &b in members {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }

    let mut out = Vec::new();
    for &v in &comb {
        let ext: Vec<usize> = adj[v].iter().copied().filter(|&u| u > v).collect();
        esu(&adj, &mut vec![v], ext, v, &mut out);
        if out.len() >= ENUMERATION_CAP {
            break;
        }
    }
    out.truncate(ENUMERATION_CAP);
    out
}

fn esu(adj: &[BTreeSet<usize>], sub: &mut Vec<usize>, mut ext: Vec<usize>, root: usize, out: &mut Vec<Vec<usize>>) {
    if sub.len() >= 2 {
        let mut s = sub.clone();
        s.sort_unstable();
        out.push(s);
    }
    if sub.len() == MAX_SUBPATTERN_GATES || out.len() >= ENUMERATION_CAP {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in &adj[w] {
            let exclusive = u > root
                && !sub.contains(&u)
                && u != w
                && !next.contains(&u)
                && sub.iter().all(|&s| !adj[s].contains(&u));
            if exclusive {
                next.push(u);
            }
        }
        sub.push(w);
        esu(adj, sub, next, root, out);
        sub.pop();
        if out.len() >= ENUMERATION_CAP {
            return;
        }
    }
}

/// Standalone netlist for a gate subset: boundary nets become inputs
/// `i0..`, nets observed outside the subset become outputs `o0..`.
fn carve(n: &Netlist, subset: &[usize], name: &str) -> Option<Netlist> {
    let gates = n.gates();
    let inside_out: BTreeSet<NetId> = subset.iter().map(|&g| gates[g].output).collect();
    let mut boundary: Vec<NetId> = Vec::new();
    for &g in subset {
        for &i in &gates[g].inputs {
            let is_const = matches!(n.net(i).kind, NetKind::Constant0 | NetKind::Constant1);
            if !is_const && !inside_out.contains(&i) && !boundary.contains(&i) {
                boundary.push(i);
            }
        }
    }
    if boundary.is_empty() || boundary.len() > MAX_BOUNDARY_INPUTS {
        return None;
    }
    boundary.sort();

    let readers = n.readers();
    let is_port = n.is_output_net();
    let in_subset: BTreeSet<usize> = subset.iter().copied().collect();
    let observed: Vec<NetId> = subset
        .iter()
        .map(|&g| gates[g].output)
        .filter(|&o| {
            let rs = &readers[o.index()];
            is_port[o.index()] || rs.is_empty() || rs.iter().any(|r: &GateId| !in_subset.contains(&r.index()))
        })
        .collect();
    if observed.is_empty() {
        return None;
    }

    let mut b = NetlistBuilder::new(name);
    let mut map: HashMap<NetId, NetId> = HashMap::new();
    for (k, &net) in boundary.iter().enumerate() {
        map.insert(net, b.input(&format!("i{k}")));
    }
    for &g in subset {
        let out = b.add_net(None, NetKind::Internal);
        map.insert(gates[g].output, out);
    }
    for (k, &g) in subset.iter().enumerate() {
        let gate = &gates[g];
        let ins: Vec<NetId> = gate
            .inputs
            .iter()
            .map(|&i| match n.net(i).kind {
                NetKind::Constant0 => b.constant(false),
                NetKind::Constant1 => b.constant(true),
                _ => map[&i],
            })
            .collect();
        b.gate(gate.kind, format!("g{}", k + 1), map[&gate.output], &ins);
    }
    for (k, o) in observed.iter().enumerate() {
        b.output(&format!("o{k}"), map[o]);
    }
    Some(b.build())
}
