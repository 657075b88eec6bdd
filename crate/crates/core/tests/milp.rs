use mvnn_core::bundle::Bundle;
use mvnn_core::market::{social_welfare, Allocation};
use mvnn_core::milp::{check_assignment, encode_wdp, export_lp, ia_bounds, parse_lp, wdp_assignment, EncodeOptions};
use mvnn_core::mvnn::MvnnParams;
use mvnn_core::prefgen::{random_domain, DomainSpec};
use mvnn_core::solver::{solve_milp, SolveConfig, Status};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Vec<MvnnParams>, usize, Vec<Option<usize>>)> {
    (1usize..=3, 1usize..=6, prop::collection::vec(1usize..=6, 1..=2), 0usize..3, any::<u64>()).prop_flat_map(
        |(n, m, hidden, t, seed)| {
            let spec = DomainSpec::new(n, m, &hidden, [0.5, 1.0, 2.0][t], seed);
            let nets = random_domain(&spec).unwrap();
            let owners = prop::collection::vec(prop::option::of(0..n), m);
            (Just(nets), Just(m), owners)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_bounds_are_attained_at_the_corners((nets, m, _) in instance()) {
        for p in &nets {
            let bounds = ia_bounds(p).unwrap();
            let full = p.trace(&Bundle::full(m)).unwrap();
            let empty = p.trace(&Bundle::empty(m)).unwrap();
            for (k, layer) in bounds.layers.iter().enumerate() {
                prop_assert_eq!(&layer.upper_pre, &full.pre[k]);
                prop_assert_eq!(&layer.lower_pre, &empty.pre[k]);
            }
        }
    }

    #[test]
    fn forward_pass_is_a_feasible_point((nets, m, owners) in instance()) {
        let alloc = Allocation::from_owners(nets.len(), &owners);
        let welfare = social_welfare(&alloc, &nets).unwrap();
        for opts in [EncodeOptions::default(), EncodeOptions::unpruned()] {
            let model = encode_wdp(&nets, m, opts).unwrap();
            let x = wdp_assignment(&model, &alloc).unwrap();
            prop_assert!(check_assignment(&model, &x, 1e-9).is_ok());
            prop_assert!((model.objective_value(&x) - welfare).abs() <= 1e-9);
        }
    }

    #[test]
    fn lp_text_round_trips((nets, m, _) in instance()) {
        let text = export_lp(&encode_wdp(&nets, m, EncodeOptions::default()).unwrap());
        let reparsed = parse_lp(&text).unwrap();
        prop_assert_eq!(export_lp(&reparsed), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn milp_optimum_dominates_every_allocation((nets, m, owners) in instance()) {
        let model = encode_wdp(&nets, m, EncodeOptions::default()).unwrap();
        let sol = solve_milp(&model, &SolveConfig::exact()).unwrap();
        prop_assert_eq!(sol.status, Status::Optimal);
        let alloc = Allocation::from_owners(nets.len(), &owners);
        prop_assert!(sol.objective >= social_welfare(&alloc, &nets).unwrap() - 1e-6);
        let chosen = sol.allocation.unwrap();
        prop_assert!((social_welfare(&chosen, &nets).unwrap() - sol.objective).abs() <= 1e-6);
    }
}
