use proptest::prelude::*;

use bspsched::budget::Budget;
use bspsched::cost::{evaluate_cost, scaled_cost};
use bspsched::dag::ComputationalDag;
use bspsched::hyperdag::{parse_hyperdag, write_hyperdag};
use bspsched::init::{bspg, source_schedule};
use bspsched::local_search::{hc_improve, hccs_improve};
use bspsched::machine::MachineParams;
use bspsched::multilevel::coarsen;
use bspsched::schedule::{parse_schedule, validate_schedule, write_schedule};

/// DAGs with edges from lower to higher ids.
fn dag_strategy(max_n: usize) -> impl Strategy<Value = ComputationalDag> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
        let m = pairs.len();
        (
            prop::collection::vec(0u64..8, n),
            prop::collection::vec(0u64..5, n),
            prop::collection::vec(prop::bool::weighted(0.3), m),
        )
            .prop_map(move |(w, c, pick)| {
                let edges: Vec<_> = pairs.iter().zip(&pick).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
                ComputationalDag::new(w, c, &edges).unwrap()
            })
    })
}

fn machine_strategy() -> impl Strategy<Value = MachineParams> {
    (prop::sample::select(vec![1usize, 2, 4, 8]), 0u64..4, 0u64..6, prop::option::of(2u64..5)).prop_map(
        |(p, g, l, delta)| match delta {
            Some(d) => MachineParams::numa_tree(p, g, l, d).unwrap(),
            None => MachineParams::uniform(p, g, l).unwrap(),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyperdag_text_round_trips(dag in dag_strategy(30)) {
        let text = write_hyperdag(&dag);
        let back = parse_hyperdag(&text).unwrap();
        prop_assert_eq!(write_hyperdag(&back), text);
        prop_assert_eq!(back.work_weights(), dag.work_weights());
    }

    #[test]
    fn greedy_schedules_are_valid_and_files_reload(dag in dag_strategy(30), m in machine_strategy()) {
        for s in [bspg(&dag, &m), source_schedule(&dag, &m)] {
            prop_assert!(validate_schedule(&dag, &m, &s).is_empty());
            let (p, back) = parse_schedule(&write_schedule(&s, m.num_processors())).unwrap();
            prop_assert_eq!(p, m.num_processors());
            prop_assert_eq!(scaled_cost(&dag, &m, &back), scaled_cost(&dag, &m, &s));
        }
    }

    #[test]
    fn breakdown_sums_to_total(dag in dag_strategy(30), m in machine_strategy()) {
        let s = bspg(&dag, &m);
        let b = evaluate_cost(&dag, &m, &s).unwrap();
        let sum: u64 = b.supersteps.iter().map(|x| x.total.scaled()).sum();
        prop_assert_eq!(sum, b.total.scaled());
        prop_assert_eq!(sum, scaled_cost(&dag, &m, &s));
    }

    #[test]
    fn local_search_never_worsens(dag in dag_strategy(25), m in machine_strategy()) {
        let start = bspg(&dag, &m).relazied(&dag).unwrap();
        let hc = hc_improve(&dag, &m, &start, Budget::Ops(100_000)).unwrap();
        let cs = hccs_improve(&dag, &m, &hc, Budget::Ops(100_000)).unwrap();
        prop_assert!(validate_schedule(&dag, &m, &cs).is_empty());
        prop_assert!(scaled_cost(&dag, &m, &hc) <= scaled_cost(&dag, &m, &start));
        prop_assert!(scaled_cost(&dag, &m, &cs) <= scaled_cost(&dag, &m, &hc));
        prop_assert_eq!(scaled_cost(&dag, &m, &cs.compact()), scaled_cost(&dag, &m, &cs));
    }

    #[test]
    fn coarsening_keeps_weights(dag in dag_strategy(40), ratio in 0.1f64..0.9) {
        prop_assume!(((dag.num_nodes() as f64) * ratio).ceil() >= 2.0);
        let seq = coarsen(&dag, ratio).unwrap();
        let (coarse, _) = seq.dag_at(seq.len()).unwrap();
        prop_assert_eq!(coarse.total_work(), dag.total_work());
        prop_assert_eq!(coarse.total_comm(), dag.total_comm());
        prop_assert_eq!(coarse.num_nodes() + seq.len(), dag.num_nodes());
    }
}
