mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_assignment, random_partition, random_program, random_real_program};
use splitqp::decomposition::{apportion, reconstruct_cost};
use splitqp::exact::solve_exact;
use splitqp::instances::{cut_value, maxcut_to_qubo, WeightedGraph};
use splitqp::partition::{build_graph, partition_greedy, partition_spectral};
use splitqp::subsolvers::{exhaustive_minimum, greedy_descent, SolverBudget};
use splitqp::sweep::{sweep_double_flip, sweep_single_flip};
use splitqp::{Partition, QuadraticProgram, SolveReport, SplitConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposed_costs_sum_to_global(seed in any::<u64>(), n in 1usize..40, k_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_real_program(&mut rng, n, 0.3);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let p = random_partition(&mut rng, n, k);
        let x = random_assignment(&mut rng, n);
        let h = qp.evaluate(&x).unwrap();
        let r = reconstruct_cost(&qp, &p, &x).unwrap();
        prop_assert!((r - h).abs() <= 1e-9 * (1.0 + h.abs()));
    }

    #[test]
    fn quotas_conserve_capacity(sizes in prop::collection::vec(0usize..30, 1..12), frac in 0.0f64..=1.0) {
        let total_size: usize = sizes.iter().sum();
        let v = (total_size as f64 * frac) as usize;
        let q = apportion(v, &sizes).unwrap();
        prop_assert_eq!(q.iter().sum::<usize>(), v);
        for (quota, size) in q.iter().zip(&sizes) {
            prop_assert!(quota <= size);
        }
        prop_assert!(apportion(total_size + 1, &sizes).is_err());
    }

    #[test]
    fn sweeps_never_increase_cost(seed in any::<u64>(), n in 2usize..30, k in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.3, false);
        let p = random_partition(&mut rng, n, k.min(n));
        let x = random_assignment(&mut rng, n);
        let before = qp.evaluate(&x).unwrap();
        let single = sweep_single_flip(&qp, &x).unwrap();
        prop_assert!(qp.evaluate(&single).unwrap() <= before);
        let double = sweep_double_flip(&qp, &x, &p).unwrap();
        prop_assert!(qp.evaluate(&double).unwrap() <= before);
        prop_assert_eq!(double.count_ones(), x.count_ones());
    }

    #[test]
    fn partitioners_cover_every_node(seed in any::<u64>(), n in 1usize..40, k_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.2, false);
        let g = build_graph(&qp);
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        for p in [partition_spectral(&g, k, seed).unwrap(), partition_greedy(&g, k, seed).unwrap()] {
            prop_assert_eq!(p.k(), k);
            prop_assert_eq!(p.sizes().iter().sum::<usize>(), n);
            prop_assert!(p.sizes().iter().all(|&s| s > 0));
            let json = serde_json::to_string(&p).unwrap();
            prop_assert_eq!(serde_json::from_str::<Partition>(&json).unwrap(), p);
        }
    }

    #[test]
    fn greedy_respects_quota(seed in any::<u64>(), n in 1usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.4, true);
        let s = greedy_descent(&qp, seed).unwrap();
        prop_assert!(qp.is_feasible(&s.x).unwrap());
    }

    #[test]
    fn maxcut_cost_is_negated_cut(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.3, false);
        let g = WeightedGraph::new(n, qp.terms().to_vec()).unwrap();
        let x = random_assignment(&mut rng, n);
        prop_assert_eq!(maxcut_to_qubo(&g).evaluate(&x).unwrap(), -cut_value(&g, &x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_reference_matches_enumeration(seed in any::<u64>(), n in 1usize..=18, quota in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.25, quota);
        let e = solve_exact(&qp, &SolverBudget::unlimited()).unwrap();
        prop_assert!(e.optimal);
        prop_assert_eq!(e.cost, exhaustive_minimum(&qp, 26).unwrap().cost);
    }

    #[test]
    fn report_and_program_json_round_trip(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_program(&mut rng, n, 0.3, seed % 2 == 0);
        prop_assert_eq!(&QuadraticProgram::from_json(&qp.to_json().unwrap()).unwrap(), &qp);
        let cfg = SplitConfig {
            budget: SolverBudget::nodes(10_000),
            worker_count: 1,
            seed,
            ..SplitConfig::new(2)
        };
        let report = splitqp::split_solve(&qp, &cfg).unwrap();
        prop_assert_eq!(SolveReport::from_json(&report.to_json().unwrap()).unwrap(), report);
        let cfg_back = SplitConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(cfg_back, cfg);
    }
}
