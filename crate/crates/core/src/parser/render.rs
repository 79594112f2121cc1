use std::collections::HashSet;
use std::fmt::Write;

use super::{is_behavioral_keyword, is_reserved};
use crate::netlist::{Direction, NetKind, Netlist};

fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !is_reserved(s)
        && !is_behavioral_keyword(s)
        && s != "endmodule"
}

/// Canonical locked-language text for a netlist.
///
/// Ports come first in declaration order, then internal wires in order of
/// first use, then gates in their stored order. Parsing the output yields a
/// structurally identical netlist, and rendering that reproduces the text.
pub fn render(netlist: &Netlist) -> String {
    let nets = netlist.nets();
    let mut refs: Vec<Option<String>> = vec![None; nets.len()];
    let mut used: HashSet<String> = netlist.ports().iter().map(|p| p.name.clone()).collect();

    for (i, net) in nets.iter().enumerate() {
        match net.kind {
            NetKind::Constant0 => refs[i] = Some("1'b0".into()),
            NetKind::Constant1 => refs[i] = Some("1'b1".into()),
            _ => {}
        }
    }
    for p in netlist.input_ports() {
        for (i, &b) in p.bits.iter().enumerate() {
            if refs[b.index()].is_none() {
                refs[b.index()] = Some(p.bit_name(i));
            }
        }
    }
    // Output bits name the internal net they carry; repeats need an assign.
    let mut assigns = Vec::new();
    for p in netlist.output_ports() {
        for (i, &b) in p.bits.iter().enumerate() {
            let name = p.bit_name(i);
            match &refs[b.index()] {
                None if nets[b.index()].kind == NetKind::Internal => {
                    refs[b.index()] = Some(name)
                }
                _ => assigns.push((name, b)),
            }
        }
    }
    // Wires are named and declared in order of first use by the gate list,
    // so the text does not depend on how net ids were allocated.
    let mut order: Vec<usize> = Vec::with_capacity(nets.len());
    let mut seen = vec![false; nets.len()];
    let gate_nets = netlist
        .gates()
        .iter()
        .flat_map(|g| std::iter::once(g.output).chain(g.inputs.iter().copied()))
        .map(|n| n.index());
    for i in gate_nets.chain(0..nets.len()) {
        if !seen[i] {
            seen[i] = true;
            order.push(i);
        }
    }
    let mut wires = Vec::new();
    let mut counter = 0usize;
    for i in order {
        let net = &nets[i];
        if refs[i].is_some() {
            continue;
        }
        let keep = net
            .name
            .as_deref()
            .filter(|n| is_plain_ident(n) && !used.contains(*n));
        let name = match keep {
            Some(n) => n.to_owned(),
            None => loop {
                counter += 1;
                let cand = format!("n{counter}");
                if !used.contains(&cand) && !nets.iter().any(|x| x.name.as_deref() == Some(&cand)) {
                    break cand;
                }
            },
        };
        used.insert(name.clone());
        refs[i] = Some(name.clone());
        // Only nets that something touches need declaring.
        wires.push(name);
    }
    let touched: HashSet<usize> = netlist
        .gates()
        .iter()
        .flat_map(|g| g.inputs.iter().chain(std::iter::once(&g.output)))
        .map(|n| n.index())
        .collect();
    let wires: Vec<String> = wires
        .into_iter()
        .filter(|w| {
            refs.iter()
                .position(|r| r.as_deref() == Some(w.as_str()))
                .is_some_and(|i| touched.contains(&i))
        })
        .collect();

    let module_name = if is_plain_ident(netlist.name()) {
        netlist.name()
    } else {
        "top"
    };
    let mut out = String::new();
    let _ = write!(out, "module {module_name}(");
    let ports = netlist.ports();
    if !ports.is_empty() {
        out.push('\n');
    }
    for (k, p) in ports.iter().enumerate() {
        let dir = match p.direction {
            Direction::Input => "input",
            Direction::Output => "output",
        };
        let range = if p.vector {
            format!(" [{}:{}]", p.msb(), p.lsb)
        } else {
            String::new()
        };
        let sep = if k + 1 < ports.len() { "," } else { "" };
        let _ = writeln!(out, "  {dir}{range} {}{sep}", p.name);
    }
    out.push_str(");\n");
    for w in &wires {
        let _ = writeln!(out, "  wire {w};");
    }
    let mut inst_used = HashSet::new();
    let mut inst_counter = 0usize;
    for g in netlist.gates() {
        let name = if is_plain_ident(&g.name) && !inst_used.contains(&g.name) {
            g.name.clone()
        } else {
            loop {
                inst_counter += 1;
                let cand = format!("g{inst_counter}");
                if !inst_used.contains(&cand)
                    && !netlist.gates().iter().any(|x| x.name == cand)
                {
                    break cand;
                }
            }
        };
        inst_used.insert(name.clone());
        let pins: Vec<&str> = std::iter::once(&g.output)
            .chain(&g.inputs)
            .map(|n| refs[n.index()].as_deref().unwrap_or("1'b0"))
            .collect();
        let _ = writeln!(out, "  {} {name}({});", g.kind.keyword(), pins.join(", "));
    }
    for (lhs, net) in assigns {
        let rhs = refs[net.index()].as_deref().unwrap_or("1'b0");
        let _ = writeln!(out, "  assign {lhs} = {rhs};");
    }
    out.push_str("endmodule\n");
    out
}
