//! The full agent loop with a scripted model: a behavioral first reply is
//! rejected, the fix request goes back, and the second reply verifies.

use gatesmith::bench::seed_task;
use gatesmith::knowledge::KnowledgeStore;
use gatesmith::orchestrator::{run_task, RunConfig, ScriptedBackend};

fn main() {
    let task = seed_task("full_adder").unwrap();
    let first = "Sure:\n```verilog\nmodule full_adder(input a, input b, input cin, output sum, output cout);\n  assign {cout, sum} = a + b + cin;\nendmodule\n```";
    let second = "```verilog
module full_adder(input a, input b, input cin, output sum, output cout);
  wire p, g, t;
  xor x1(p, a, b);
  xor x2(sum, p, cin);
  and a1(g, a, b);
  and a2(t, p, cin);
  or o1(cout, g, t);
endmodule
```";
    let backend = ScriptedBackend::sequence(vec![first.into(), second.into()]);
    let store = KnowledgeStore::in_memory();
    store.seed_baseline().unwrap();
    let before = store.len();

    let run = run_task(&task, &RunConfig::default(), &backend, &store).unwrap();
    for m in &run.transcript {
        let body = m.body.lines().next().unwrap_or("");
        println!("#{:<2} {:>10} -> {:<10} {:?}: {body}", m.turn, m.sender, m.recipient, m.kind);
    }
    let e = run.eval.as_ref().unwrap();
    println!(
        "\n{:?} after {} revision(s): G={} D={} SEI {:.4}; store {} -> {} entries",
        run.status,
        run.revisions_used,
        e.gates,
        e.delay,
        e.sei.unwrap_or(0.0),
        before,
        store.len()
    );
}
