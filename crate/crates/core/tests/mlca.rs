#![allow(clippy::needless_range_loop)]

use mvnn_core::bundle::all_bundles;
use mvnn_core::fixtures::three_item_network;
use mvnn_core::market::VALUE_TOL;
use mvnn_core::mlca::{
    next_queries, random_search, run_mlca, vcg_payments, wdp_over_reports, MlcaConfig, WdpSolver,
};
use mvnn_core::mvnn::{TrainConfig, Variant};
use mvnn_core::prefgen::{random_domain, DomainSpec};
use mvnn_core::{Bundle, MvnnParams, ReportSet, ValueOracle};

fn b(s: &str) -> Bundle {
    s.parse().unwrap()
}

fn quick_config(q_init: usize, q_max: usize, seed: u64) -> MlcaConfig {
    MlcaConfig {
        q_init,
        q_max,
        seed,
        hidden: vec![6],
        train: TrainConfig {
            epochs: 60,
            ..MlcaConfig::default().train
        },
        ..MlcaConfig::default()
    }
}

fn small_domain(bidders: usize, items: usize, seed: u64) -> Vec<MvnnParams> {
    random_domain(&DomainSpec::new(bidders, items, &[6, 4], 1.0, seed)).unwrap()
}

#[test]
fn reported_wdp_examples() {
    let r = ReportSet::from_pairs(vec![vec![(b("10"), 5.0)], vec![(b("10"), 3.0), (b("01"), 2.0)]]).unwrap();
    let a = wdp_over_reports(&r);
    assert_eq!(a.bundles(), &[b("10"), b("01")]);

    let conflict = ReportSet::from_pairs(vec![
        vec![(b("100"), 2.0)],
        vec![(b("110"), 6.0)],
        vec![(b("101"), 4.0)],
    ])
    .unwrap();
    let a = wdp_over_reports(&conflict);
    assert_eq!(a.bundle(1), &b("110"));
    assert!(a.bundle(0).is_empty() && a.bundle(2).is_empty());
    assert_eq!(vcg_payments(&conflict), vec![0.0, 4.0, 0.0]);
}

#[test]
fn next_queries_returns_the_only_novel_bundle() {
    let net = three_item_network();
    let missing = b("011");
    let mut r = ReportSet::new(1);
    for x in all_bundles(3).filter(|x| *x != missing) {
        r.insert(0, x.clone(), net.value(&x)).unwrap();
    }
    let cfg = quick_config(1, 1, 0);
    assert_eq!(next_queries(&[0], &r, &cfg, 3).unwrap(), vec![missing]);
}

#[test]
fn next_queries_are_novel_for_golden_reports() {
    let net = three_item_network();
    let mut r = ReportSet::new(2);
    for (i, list) in [["000", "100", "110"], ["000", "001", "011"]].iter().enumerate() {
        for s in list {
            r.insert(i, b(s), net.value(&b(s))).unwrap();
        }
    }
    for solver in [WdpSolver::MonotoneBnb, WdpSolver::Milp] {
        let cfg = MlcaConfig {
            solver,
            ..quick_config(1, 1, 3)
        };
        let q = next_queries(&[0, 1], &r, &cfg, 3).unwrap();
        assert_eq!(q.len(), 2);
        for (i, x) in q.iter().enumerate() {
            assert!(!r.bidder(i).contains(x), "bidder {i} asked {x} again");
        }
    }
}

#[test]
fn already_reported_optimum_triggers_resolve() {
    // A single bidder with a monotone network always prefers the full bundle, which is
    // already reported, so the answer must come from the re-solve or the fallback.
    let net = three_item_network();
    let mut r = ReportSet::new(1);
    for s in ["000", "111", "100"] {
        r.insert(0, b(s), net.value(&b(s))).unwrap();
    }
    for solver in [WdpSolver::MonotoneBnb, WdpSolver::Milp] {
        let cfg = MlcaConfig {
            solver,
            ..quick_config(1, 1, 0)
        };
        let q = next_queries(&[0], &r, &cfg, 3).unwrap();
        assert!(!r.bidder(0).contains(&q[0]));
    }
}

#[test]
fn next_queries_rejects_missing_reports() {
    let r = ReportSet::new(2);
    let cfg = quick_config(1, 1, 0);
    assert!(next_queries(&[0], &r, &cfg, 3).is_err());
    assert!(next_queries(&[5], &r, &cfg, 3).is_err());
}

#[test]
fn zero_rounds_equals_random_search() {
    let oracles = small_domain(3, 6, 11);
    let ml = run_mlca(&oracles, &quick_config(12, 12, 5)).unwrap();
    let rs = random_search(&oracles, 12, 5).unwrap();
    assert!(ml.rounds.is_empty());
    assert_eq!(
        serde_json::to_string(&ml).unwrap(),
        serde_json::to_string(&rs).unwrap()
    );
}

#[test]
fn full_information_is_efficient() {
    let oracles = small_domain(3, 8, 2);
    let ml = run_mlca(&oracles, &quick_config(255, 255, 1)).unwrap();
    assert!(ml.efficiency_loss.abs() <= 1e-12);
    let rs = random_search(&oracles, 255, 9).unwrap();
    assert!(rs.efficiency_loss.abs() <= 1e-12);
    assert!((rs.welfare - rs.optimal).abs() <= 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let oracles = small_domain(2, 6, 4);
    let cfg = quick_config(6, 14, 8);
    let a = serde_json::to_string(&run_mlca(&oracles, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_mlca(&oracles, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let a = serde_json::to_string(&random_search(&oracles, 20, 3).unwrap()).unwrap();
    let b = serde_json::to_string(&random_search(&oracles, 20, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}

fn check_invariants(result: &mvnn_core::mlca::AuctionResult, cfg: &MlcaConfig, oracles: &[MvnnParams]) {
    let n = oracles.len();
    for i in 0..n {
        let asked = result.reports.bidder(i).len() - 1;
        assert!(asked <= cfg.q_max, "bidder {i} asked {asked} > {}", cfg.q_max);
        for (x, v) in result.reports.bidder(i).iter() {
            assert_eq!(v, oracles[i].value(x));
        }
    }
    for round in &result.rounds {
        for (i, qs) in round.queries.iter().enumerate() {
            assert_eq!(qs.len(), cfg.q_round, "round {} bidder {i}", round.round);
            assert!(round.marginals[i].iter().all(|&j| j != i));
        }
    }
    let total: f64 = result.payments.iter().sum();
    assert!(total >= 0.0);
    for (i, &p) in result.payments.iter().enumerate() {
        assert!(p >= 0.0, "negative payment {p}");
        let v = result.reports.bidder(i).get(result.allocation.bundle(i)).unwrap_or(0.0);
        assert!(p <= v + VALUE_TOL, "bidder {i} pays {p} for value {v}");
    }
    for w in result.path.windows(2) {
        assert!(w[1].efficiency_loss <= w[0].efficiency_loss + 1e-12);
        assert_eq!(w[1].queries, w[0].queries + cfg.q_round);
    }
    assert_eq!(result.path.last().unwrap().efficiency_loss, result.efficiency_loss);
    assert!(result.efficiency_loss >= 0.0 && result.efficiency_loss <= 1.0);
}

#[test]
fn auction_invariants_over_random_instances() {
    for seed in 0..6u64 {
        let n = 1 + (seed % 3) as usize;
        let m = 4 + (seed % 3) as usize;
        let oracles = small_domain(n, m, 100 + seed);
        let cfg = MlcaConfig {
            q_round: 2 + (seed % 3) as usize,
            ..quick_config(4, 13, seed)
        };
        let result = run_mlca(&oracles, &cfg).unwrap();
        assert_eq!(result.rounds.len(), cfg.rounds());
        check_invariants(&result, &cfg, &oracles);
    }
}

#[test]
fn milp_solver_and_strict_retrain_respect_invariants() {
    let oracles = small_domain(2, 5, 21);
    for (solver, strict) in [(WdpSolver::Milp, false), (WdpSolver::MonotoneBnb, true)] {
        let cfg = MlcaConfig {
            solver,
            strict_retrain: strict,
            ..quick_config(4, 12, 2)
        };
        let result = run_mlca(&oracles, &cfg).unwrap();
        check_invariants(&result, &cfg, &oracles);
    }
}

#[test]
fn unconstrained_networks_use_the_relu_encoding() {
    let oracles = small_domain(2, 4, 7);
    let mut cfg = quick_config(4, 8, 1);
    cfg.hidden = vec![3];
    cfg.train.variant = Variant::Unconstrained;
    cfg.train.min_correlation = 0.0;
    let result = run_mlca(&oracles, &cfg).unwrap();
    check_invariants(&result, &cfg, &oracles);
}

#[test]
fn early_stop_saves_queries() {
    let oracles = small_domain(2, 3, 5);
    let cfg = MlcaConfig {
        early_stop: true,
        ..quick_config(3, 15, 0)
    };
    let result = run_mlca(&oracles, &cfg).unwrap();
    assert_eq!(result.efficiency_loss, 0.0);
    assert!(result.queries() < cfg.q_max, "used {} queries", result.queries());
}

#[test]
fn exhausted_bidders_are_skipped() {
    let oracles = small_domain(2, 2, 1);
    let cfg = quick_config(3, 11, 0);
    let result = run_mlca(&oracles, &cfg).unwrap();
    assert_eq!(result.queries(), 3);
    assert!(result.stats.exhausted > 0);
    assert_eq!(result.efficiency_loss, 0.0);
}

#[test]
fn bad_configs_fail_before_work() {
    let oracles = small_domain(2, 3, 0);
    for cfg in [
        MlcaConfig { q_init: 0, ..MlcaConfig::default() },
        MlcaConfig { q_max: 10, q_init: 20, ..MlcaConfig::default() },
        MlcaConfig { q_round: 0, ..MlcaConfig::default() },
        MlcaConfig { hidden: vec![], ..MlcaConfig::default() },
    ] {
        assert!(matches!(run_mlca(&oracles, &cfg), Err(mvnn_core::Error::Config(_))));
    }
    let empty: Vec<MvnnParams> = Vec::new();
    assert!(run_mlca(&empty, &MlcaConfig::default()).is_err());
}

#[test]
fn mlca_beats_random_search_on_small_domains() {
    let mut ml = Vec::new();
    let mut rs = Vec::new();
    for seed in 0..4u64 {
        let oracles = random_domain(&DomainSpec::new(3, 8, &[8, 8], 1.0, seed)).unwrap();
        let cfg = quick_config(10, 26, seed);
        ml.push(run_mlca(&oracles, &cfg).unwrap().efficiency_loss);
        rs.push(random_search(&oracles, 26, seed).unwrap().efficiency_loss);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&ml) < mean(&rs), "mlca {ml:?} rs {rs:?}");
}
