//! The shipped seed tasks, embedded at build time.

use super::{PackSources, TaskPack};

macro_rules! pack {
    ($id:literal) => {
        (
            $id,
            PackSources {
                task: include_str!(concat!("../../tasks/", $id, "/task.toml")).to_owned(),
                spec: include_str!(concat!("../../tasks/", $id, "/spec.md")).to_owned(),
                interface: include_str!(concat!("../../tasks/", $id, "/interface.toml")).to_owned(),
                testbench: include_str!(concat!("../../tasks/", $id, "/testbench.toml")).to_owned(),
                reference: Some(include_str!(concat!("../../tasks/", $id, "/reference.toml")).to_owned()),
                reference_netlist: Some(include_str!(concat!("../../tasks/", $id, "/reference.v")).to_owned()),
            },
        )
    };
}

pub const SEED_TASK_IDS: [&str; 10] = [
    "xnor2",
    "and3",
    "inhibit_select",
    "mux2",
    "full_adder",
    "decoder_2to4",
    "mux4",
    "ripple_adder4",
    "seq_detector_101",
    "counter3",
];

fn all_sources() -> Vec<(&'static str, PackSources)> {
    vec![
        pack!("xnor2"),
        pack!("and3"),
        pack!("inhibit_select"),
        pack!("mux2"),
        pack!("full_adder"),
        pack!("decoder_2to4"),
        pack!("mux4"),
        pack!("ripple_adder4"),
        pack!("seq_detector_101"),
        pack!("counter3"),
    ]
}

pub(super) fn sources(id: &str) -> Option<PackSources> {
    all_sources().into_iter().find(|(i, _)| *i == id).map(|(_, s)| s)
}

/// All seed tasks, easy to hard.
pub fn seed_tasks() -> Vec<TaskPack> {
    all_sources()
        .iter()
        .map(|(id, src)| TaskPack::from_sources(src).unwrap_or_else(|e| panic!("seed task {id} is invalid: {e}")))
        .collect()
}

pub fn seed_task(id: &str) -> Option<TaskPack> {
    sources(id).map(|src| TaskPack::from_sources(&src).expect("seed tasks are valid"))
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn every_reference_verifies() {
        for t in seed_tasks() {
            let text = t.reference.as_ref().and_then(|r| r.netlist.clone()).unwrap();
            let eval = verify_reference(&t, &text).unwrap_or_else(|e| panic!("{e}"));
            assert_eq!(eval.correctness, 1.0, "{}", t.id);
        }
    }

    #[test]
    fn seed_set_covers_tiers_and_classes() {
        let tasks = seed_tasks();
        assert_eq!(tasks.len(), SEED_TASK_IDS.len());
        for d in Difficulty::ALL {
            assert!(tasks.iter().filter(|t| t.difficulty == d).count() >= 3, "{d}");
        }
        assert!(tasks.iter().any(|t| t.class == CircuitClass::Sequential));
        for t in tasks.iter().filter(|t| t.difficulty == Difficulty::Easy) {
            let g = t.reference.as_ref().unwrap().gates;
            assert!((2..=4).contains(&g), "{} has {g} gates", t.id);
        }
        let ids: Vec<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, SEED_TASK_IDS);
    }
}
