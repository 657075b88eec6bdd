use mvnn_core::bundle::Bundle;
use mvnn_core::fixtures::{three_item_network, zero_network};
use mvnn_core::market::{is_feasible, social_welfare, ValueOracle};
use mvnn_core::milp::{encode_relu_wdp, encode_wdp, EncodeOptions, Pruning};
use mvnn_core::mvnn::{Layer, MvnnParams};
use mvnn_core::prefgen::{random_domain, DomainSpec};
use mvnn_core::solver::{
    brute_force, monotone_bnb, monotone_bnb_excluding, runtime_compare, solve_lp, solve_milp,
    BenchInstance, Branching, LpProblem, LpStatus, SolveConfig, Status,
};
use mvnn_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bundle(s: &str) -> Bundle {
    s.parse().unwrap()
}

fn random_instance(seed: u64) -> (Vec<MvnnParams>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=6);
    let depth = rng.gen_range(1..=2);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=8)).collect();
    let cutoff = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let spec = DomainSpec::new(n, m, &hidden, cutoff, seed);
    (random_domain(&spec).unwrap(), m)
}

#[test]
fn lp_relaxation_dominates_integer_optimum() {
    let model = encode_wdp(&[three_item_network()], 3, EncodeOptions::default()).unwrap();
    let lp = solve_lp(&LpProblem::relaxation(&model)).unwrap();
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!(lp.objective >= 4.0 - 1e-9, "{}", lp.objective);
}

#[test]
fn golden_single_bidder() {
    let nets = [three_item_network()];
    let model = encode_wdp(&nets, 3, EncodeOptions::default()).unwrap();
    let sol = solve_milp(&model, &SolveConfig::exact()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.objective - 4.0).abs() < 1e-9);
    assert_eq!(sol.allocation.as_ref().unwrap().bundle(0), &bundle("111"));

    let mb = monotone_bnb(&nets, 3, &SolveConfig::exact()).unwrap();
    assert_eq!(mb.objective, 4.0);
    assert_eq!(mb.allocation.unwrap().bundle(0), &bundle("111"));

    let (v, a) = brute_force(&nets, 3).unwrap();
    assert_eq!(v, 4.0);
    assert_eq!(a.bundle(0), &bundle("111"));
}

#[test]
fn golden_two_bidders() {
    let nets = [three_item_network(), three_item_network()];
    let (v, a) = brute_force(&nets, 3).unwrap();
    assert_eq!(v, 4.0);
    // Owner vectors are enumerated with item 0 most significant and "unassigned" first,
    // so (1, 1, 1) precedes the other optima (1, 2, 1), (2, 1, 2) and (2, 2, 2).
    assert_eq!(a.bundle(0), &bundle("111"));
    assert_eq!(a.bundle(1), &bundle("000"));
    let model = encode_wdp(&nets, 3, EncodeOptions::default()).unwrap();
    let sol = solve_milp(&model, &SolveConfig::exact()).unwrap();
    assert!((sol.objective - 4.0).abs() < 1e-9);
    let mb = monotone_bnb(&nets, 3, &SolveConfig::exact()).unwrap();
    assert_eq!(mb.objective, 4.0);
}

#[test]
fn zero_networks() {
    let nets = [zero_network(3, 2)];
    let (v, a) = brute_force(&nets, 3).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(a.bundle(0), &bundle("000"));
    let mb = monotone_bnb(&nets, 3, &SolveConfig::exact()).unwrap();
    assert_eq!(mb.objective, 0.0);
    assert_eq!(mb.nodes, 1);
    assert_eq!(mb.status, Status::Optimal);
}

#[test]
fn brute_force_size_limit() {
    let nets: Vec<MvnnParams> = (0..3).map(|_| zero_network(12, 1)).collect();
    assert!(matches!(brute_force(&nets, 12), Err(Error::Size(_))));
}

#[test]
fn oracle_triangle() {
    let exact = SolveConfig::exact();
    for seed in 0..30 {
        let (nets, m) = random_instance(seed);
        let (bf, bf_alloc) = brute_force(&nets, m).unwrap();
        let mb = monotone_bnb(&nets, m, &exact).unwrap();
        assert_eq!(mb.status, Status::Optimal);
        assert_eq!(mb.objective, bf, "seed {seed}");
        let mb_alloc = mb.allocation.unwrap();
        assert!(is_feasible(mb_alloc.bundles()).unwrap());
        assert_eq!(social_welfare(&mb_alloc, &nets).unwrap(), social_welfare(&bf_alloc, &nets).unwrap());

        for pruning in [Pruning::Off, Pruning::Basic, Pruning::Full] {
            let model = encode_wdp(&nets, m, EncodeOptions { pruning }).unwrap();
            for warm_start in [false, true] {
                let cfg = SolveConfig {
                    warm_start,
                    ..exact.clone()
                };
                let sol = solve_milp(&model, &cfg).unwrap();
                assert_eq!(sol.status, Status::Optimal, "seed {seed}");
                assert!((sol.objective - bf).abs() <= 1e-6, "seed {seed}: {} vs {bf}", sol.objective);
                assert!(sol.relative_gap() <= 1e-9);
                let alloc = sol.allocation.unwrap();
                assert!(is_feasible(alloc.bundles()).unwrap());
                assert!((social_welfare(&alloc, &nets).unwrap() - bf).abs() <= 1e-6);
            }
        }
    }
}

#[test]
fn relu_encoding_matches() {
    let exact = SolveConfig::exact();
    for seed in 100..115 {
        let spec = DomainSpec::new(1 + seed as usize % 2, 2 + seed as usize % 3, &[3], 1.0, seed);
        let nets = random_domain(&spec).unwrap();
        let m = spec.items;
        let (bf, _) = brute_force(&nets, m).unwrap();
        let model = encode_relu_wdp(&nets, m).unwrap();
        let sol = solve_milp(&model, &exact).unwrap();
        assert!((sol.objective - bf).abs() <= 1e-6, "seed {seed}: {} vs {bf}", sol.objective);
    }
}

#[test]
fn first_fractional_branching() {
    let cfg = SolveConfig {
        branching: Branching::FirstFractional,
        warm_start: false,
        ..SolveConfig::exact()
    };
    for seed in 200..210 {
        let (nets, m) = random_instance(seed);
        let (bf, _) = brute_force(&nets, m).unwrap();
        let model = encode_wdp(&nets, m, EncodeOptions::default()).unwrap();
        let sol = solve_milp(&model, &cfg).unwrap();
        assert!((sol.objective - bf).abs() <= 1e-6);
    }
}

#[test]
fn solutions_are_deterministic() {
    let (nets, m) = random_instance(7);
    let model = encode_wdp(&nets, m, EncodeOptions::default()).unwrap();
    let cfg = SolveConfig::exact();
    let a = solve_milp(&model, &cfg).unwrap();
    let b = solve_milp(&model, &cfg).unwrap();
    assert_eq!(a.allocation, b.allocation);
    assert_eq!(a.values, b.values);
    assert_eq!(a.nodes, b.nodes);
    let c = monotone_bnb(&nets, m, &cfg).unwrap();
    let d = monotone_bnb(&nets, m, &cfg).unwrap();
    assert_eq!(c.allocation, d.allocation);
    assert_eq!(c.nodes, d.nodes);
}

#[test]
fn gap_and_bound_invariants() {
    let spec = DomainSpec::new(3, 10, &[8, 8], 1.0, 5);
    let nets = random_domain(&spec).unwrap();
    let loose = SolveConfig {
        gap: 0.05,
        ..SolveConfig::default()
    };
    let exact = monotone_bnb(&nets, 10, &SolveConfig::exact()).unwrap();
    let sol = monotone_bnb(&nets, 10, &loose).unwrap();
    assert!(sol.objective <= exact.objective);
    assert!(sol.bound >= exact.objective - 1e-12);
    assert!(sol.relative_gap() <= 0.05 + 1e-12);
    let model = encode_wdp(&nets, 10, EncodeOptions::default()).unwrap();
    let milp = solve_milp(&model, &loose).unwrap();
    assert!(milp.objective <= milp.bound + 1e-9);
    assert!(milp.bound >= exact.objective - 1e-6);
    assert!(milp.relative_gap() <= 0.05 + 1e-9);
}

#[test]
fn node_limit_reports_timeout_with_incumbent() {
    let spec = DomainSpec::new(3, 10, &[8, 8], 1.0, 6);
    let nets = random_domain(&spec).unwrap();
    let cfg = SolveConfig {
        node_limit: Some(5),
        warm_start: false,
        ..SolveConfig::exact()
    };
    let sol = monotone_bnb(&nets, 10, &cfg).unwrap();
    assert_eq!(sol.status, Status::Timeout);
    assert!(sol.allocation.is_some());
    assert!(sol.bound >= sol.objective);
}

#[test]
fn forbidden_bundles_are_avoided() {
    let nets = [three_item_network()];
    let forbidden = vec![vec![bundle("111")]];
    let sol = monotone_bnb_excluding(&nets, 3, &SolveConfig::exact(), &forbidden).unwrap();
    assert_eq!(sol.objective, 3.0);
    assert_eq!(sol.allocation.unwrap().bundle(0), &bundle("101"));

    let mut model = encode_wdp(&nets, 3, EncodeOptions::default()).unwrap();
    model.exclude_bundle(0, &bundle("111"));
    let sol = solve_milp(&model, &SolveConfig::exact()).unwrap();
    assert!((sol.objective - 3.0).abs() < 1e-6);
    assert_eq!(sol.allocation.unwrap().bundle(0), &bundle("101"));

    let all: Vec<Bundle> = mvnn_core::bundle::all_bundles(3).collect();
    let sol = monotone_bnb_excluding(&nets, 3, &SolveConfig::exact(), &[all]).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
}

#[test]
fn non_monotone_network_is_rejected() {
    let l1 = Layer::new(1, 2, vec![1.0, -1.0], vec![0.0]).unwrap();
    let ro = Layer::new(1, 1, vec![1.0], vec![0.0]).unwrap();
    let p = MvnnParams::new(1.0, vec![l1, ro]).unwrap();
    assert!(!p.is_monotone());
    assert!(matches!(
        monotone_bnb(&[p], 2, &SolveConfig::exact()),
        Err(Error::Bidder { .. })
    ));
}

#[test]
fn infeasible_milp() {
    use mvnn_core::milp::{LinExpr, MilpModel, Relation};
    let mut model = MilpModel::new();
    let x = model.add_binary("x");
    model.objective.push((x, 1.0));
    model.add_row("c", LinExpr::var(x), Relation::Ge, 2.0);
    let sol = solve_milp(&model, &SolveConfig::exact()).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
    assert!(sol.allocation.is_none());
}

#[test]
fn runtime_harness_small() {
    let instances: Vec<BenchInstance> = (0..2)
        .map(|s| {
            let spec = DomainSpec::new(2, 4, &[3], 1.0, s);
            BenchInstance {
                architecture: "4-3-1".into(),
                items: 4,
                networks: random_domain(&spec).unwrap(),
            }
        })
        .collect();
    let cfg = SolveConfig {
        warm_start: false,
        ..SolveConfig::exact()
    };
    let report = runtime_compare(&instances, &cfg).unwrap();
    assert_eq!(report.records.len(), 4);
    assert_eq!(report.rows.len(), 2);
    for pair in report.records.chunks(2) {
        assert!((pair[0].objective - pair[1].objective).abs() < 1e-6);
        assert!(pair[0].seconds < 1.0 && pair[1].seconds < 1.0);
    }
    assert!(report.ratio("4-3-1").is_some());
}

#[test]
fn golden_values_via_oracle_trait() {
    let p = three_item_network();
    assert_eq!(p.value(&bundle("111")), 4.0);
}
