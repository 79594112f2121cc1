mod common;

use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;

use gatesmith::netlist::{critical_path_delay, gate_count};
use gatesmith::sim::{eval_combinational, simulate_sequential, truth_table, PortBit, TestVector};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn levelized_matches_recursive_evaluation(r in common::recipe(8, 30, 0)) {
        let n = common::build(&r);
        let inputs = n.input_bits().len();
        let table = truth_table(&n).unwrap();
        for row in 0..1u32 << inputs {
            let bits: Vec<bool> = (0..inputs).map(|i| row >> i & 1 == 1).collect();
            let sim = eval_combinational(&n, &bits).unwrap();
            let oracle = common::oracle_row(&n, row);
            prop_assert_eq!(&sim, &oracle, "row {}", row);
            for (o, &v) in oracle.iter().enumerate() {
                prop_assert_eq!(table.value(row as usize, o), v);
            }
        }
    }

    #[test]
    fn delay_is_the_longest_gate_chain(r in common::recipe(6, 30, 3)) {
        let n = common::build(&r);
        let drivers = n.driver_gates();
        let mut sinks = n.output_bits();
        sinks.extend(n.gates().iter().filter(|g| g.kind.is_register()).map(|g| g.inputs[0]));
        let want = sinks.iter().map(|&s| common::depth(&n, &drivers, s)).max().unwrap_or(0);
        prop_assert_eq!(critical_path_delay(&n).unwrap(), want);
        prop_assert!(want <= gate_count(&n).unwrap());
    }

    /// Step the design by hand and check `simulate_sequential` agrees with
    /// every output on every cycle.
    #[test]
    fn sequential_matches_stepwise_reference(
        r in common::recipe(3, 16, 3).prop_filter("needs registers", |r| !r.registers.is_empty()),
        stim in prop::collection::vec(any::<u8>(), 1..24),
    ) {
        let n = common::build(&r);
        let drivers = n.driver_gates();
        let data: Vec<_> = n.input_ports().filter(|p| p.name != "clk").map(|p| (p.name.clone(), p.bits[0])).collect();
        let regs: Vec<_> = n.gates().iter().filter(|g| g.kind.is_register()).map(|g| (g.output, g.inputs[0])).collect();
        let mut state: HashMap<_, bool> = regs.iter().map(|&(q, _)| (q, false)).collect();
        let mut vectors = Vec::new();
        for (cycle, &s) in stim.iter().enumerate() {
            let mut sources = state.clone();
            let mut inputs = BTreeMap::new();
            for (i, (name, net)) in data.iter().enumerate() {
                let v = s >> i & 1 == 1;
                sources.insert(*net, v);
                inputs.insert(PortBit::scalar(name.clone()), v);
            }
            let expected = n
                .output_ports()
                .map(|p| (PortBit::scalar(p.name.clone()), Some(common::eval_net(&n, &drivers, &sources, p.bits[0]))))
                .collect();
            vectors.push(TestVector { cycle: cycle as u32, inputs, expected });
            state = regs.iter().map(|&(q, d)| (q, common::eval_net(&n, &drivers, &sources, d))).collect();
        }
        let out = simulate_sequential(&n, &vectors, stim.len() as u32).unwrap();
        prop_assert!(out.all_passed(), "{:?}", out.first_failure);
    }
}
