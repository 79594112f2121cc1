//! A persistent knowledge store: seeding, retrieval by function, interface,
//! tags and error class, and harvesting patterns from a verified design.

use gatesmith::knowledge::{
    extract_patterns, ExtractContext, InterfaceShape, KnowledgeStore, QueryMode, RetrievalQuery, StoreOutcome,
};
use gatesmith::parser::parse_str;
use gatesmith::sim::truth_table;

fn main() {
    let dir = std::env::temp_dir().join(format!("gatesmith-store-{}", std::process::id()));
    let store = KnowledgeStore::open(&dir).unwrap();
    println!("seeded {} entries into {}", store.seed_baseline().unwrap(), dir.display());

    let adder = parse_str(
        "module add(input a, input b, input c, output s, output co);
           wire p, g, t;
           xor x1(p, a, b); xor x2(s, p, c);
           and a1(g, a, b); and a2(t, p, c); or o1(co, g, t);
         endmodule",
    )
    .unwrap();
    let ctx = ExtractContext {
        task_id: "demo".into(),
        run_id: "demo#0".into(),
        tags: vec!["adder".into()],
    };
    for entry in extract_patterns(&adder, &ctx, &store.snapshot()) {
        let tags = entry.tags.join(",");
        match store.store(entry).unwrap() {
            StoreOutcome::Admitted { id, .. } => println!("admitted {id} [{tags}]"),
            other => println!("{other:?}"),
        }
    }

    let by_fn = RetrievalQuery::new(
        QueryMode::ByFunction {
            signature: truth_table(&adder).unwrap().hash,
            interface: InterfaceShape::of(&adder),
            tags: vec![],
        },
        3,
    );
    let by_tags = RetrievalQuery::new(QueryMode::ByTags { tags: vec!["adder".into()] }, 3);
    let by_error = RetrievalQuery::new(
        QueryMode::ByError {
            error_class: "multi-driver".into(),
            symptom: "net driven by two gates".into(),
        },
        1,
    );
    for (label, q) in [("function", by_fn), ("tags", by_tags), ("error", by_error)] {
        for e in store.retrieve(&q) {
            let what = e.error_fix.as_ref().map_or_else(
                || e.efficiency.map_or(String::new(), |f| format!("G={} D={} SEI {:.3}", f.gates, f.delay, f.sei)),
                |f| f.fix.clone(),
            );
            println!("by {label}: {} [{}] {what}", e.id, e.tags.join(","));
        }
    }

    let reopened = KnowledgeStore::open(&dir).unwrap();
    println!("reopened with {} entries, all verified", reopened.len());
    let _ = std::fs::remove_dir_all(&dir);
}
