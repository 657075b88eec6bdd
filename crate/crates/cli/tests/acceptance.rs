#![allow(clippy::needless_range_loop)]

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use std::time::{Duration, Instant};

use mvnn_auction::commands::{bench, mlca, train};
use mvnn_auction::RunConfig;
use mvnn_core::bundle::all_bundles;
use mvnn_core::construct::{exact_mvnn, interpolate, ValueTable};
use mvnn_core::fixtures::{three_item_network, three_item_table, THREE_ITEM_VALUES};
use mvnn_core::market::VALUE_TOL;
use mvnn_core::milp::{check_assignment, encode_wdp, ia_bounds, wdp_assignment, EncodeOptions};
use mvnn_core::mvnn::{gradient_check, initialize, LossKind, TrainConfig, Variant};
use mvnn_core::prefgen::{random_domain, random_mvnn_oracle, DomainSpec};
use mvnn_core::solver::{brute_force, monotone_bnb, solve_milp, SolveConfig, Status};
use mvnn_core::{rng, stats, Allocation, Bundle, MvnnParams, ValueOracle};
use rand::seq::SliceRandom;
use rand::Rng;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn random_bundle<R: Rng>(m: usize, rng: &mut R) -> Bundle {
    let bits: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
    Bundle::from_bits(&bits)
}

fn random_network<R: Rng>(rng: &mut R, max_items: usize) -> MvnnParams {
    let m = rng.gen_range(1..=max_items);
    let depth = rng.gen_range(1..=3);
    let mut arch = vec![m];
    arch.extend((0..depth).map(|_| rng.gen_range(1..=10)));
    arch.push(1);
    let cfg = TrainConfig {
        cutoff: [0.5, 1.0, 2.0][rng.gen_range(0..3)],
        ..TrainConfig::default()
    };
    let mut p = initialize(&arch, &cfg, rng).expect("valid architecture");
    let scale = rng.gen_range(0.5..4.0);
    for l in &mut p.layers {
        for w in &mut l.weights {
            *w *= scale;
        }
        for b in &mut l.bias {
            *b *= scale * 5.0;
        }
    }
    p
}

fn solver_instance(seed: u64) -> (Vec<MvnnParams>, usize) {
    let mut r = rng::stream(seed, &[0xacce]);
    let n = r.gen_range(1..=3);
    let m = r.gen_range(1..=6);
    let depth = r.gen_range(1..=2);
    let hidden: Vec<usize> = (0..depth).map(|_| r.gen_range(1..=8)).collect();
    let cutoff = [0.5, 1.0, 2.0][r.gen_range(0..3)];
    let spec = DomainSpec::new(n, m, &hidden, cutoff, seed);
    (random_domain(&spec).expect("valid spec"), m)
}

fn golden() -> Verdict {
    let shipped = three_item_network();
    let built = exact_mvnn(&three_item_table()).expect("golden table is monotone");
    let mut worst: f64 = 0.0;
    for (k, &v) in THREE_ITEM_VALUES.iter().enumerate() {
        let b = Bundle::from_index(3, k as u64);
        worst = worst.max((shipped.value(&b) - v).abs()).max((built.value(&b) - v).abs());
    }
    verdict(worst <= 1e-12, format!("max error {worst:.1e} over 8 bundles, 2 networks"))
}

fn universality() -> Verdict {
    let mut r = rng::stream(1, &[0xacce]);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let m = 2 + k % 3;
        let table = ValueTable::random_monotone(m, &mut r);
        let net = match exact_mvnn(&table) {
            Ok(n) => n,
            Err(e) => return verdict(false, format!("table {k}: {e}")),
        };
        for (idx, &v) in table.values().iter().enumerate() {
            worst = worst.max((net.value(&Bundle::from_index(m, idx as u64)) - v).abs());
        }
    }
    verdict(worst <= 1e-12, format!("50 tables, max error {worst:.1e}"))
}

fn interpolation() -> Verdict {
    let mut r = rng::stream(2, &[0xacce]);
    let mut worst: f64 = 0.0;
    for k in 0..30u64 {
        let m = r.gen_range(1..=10);
        let spec = DomainSpec::new(1, m, &[6, 4], 1.0, 500 + k);
        let oracle = random_mvnn_oracle(&spec, 0).expect("valid spec");
        let q = r.gen_range(1..=20usize.min(1 << m));
        let mut pool: Vec<u64> = (0..(1u64 << m)).collect();
        pool.shuffle(&mut r);
        let data: Vec<(Bundle, f64)> = pool[..q]
            .iter()
            .map(|&i| {
                let b = Bundle::from_index(m, i);
                let v = oracle.value(&b);
                (b, v)
            })
            .collect();
        let net = match interpolate(&data) {
            Ok(n) => n,
            Err(e) => return verdict(false, format!("dataset {k}: {e}")),
        };
        if let Err(e) = net.check_projected() {
            return verdict(false, format!("dataset {k}: {e}"));
        }
        if net.value(&Bundle::empty(m)) != 0.0 {
            return verdict(false, format!("dataset {k}: non-zero empty value"));
        }
        for _ in 0..50 {
            let b = random_bundle(m, &mut r);
            for j in 0..m {
                let mut bigger = b.clone();
                bigger.insert(j);
                if net.value(&b) > net.value(&bigger) + 1e-12 {
                    return verdict(false, format!("dataset {k}: not monotone at {b}"));
                }
            }
        }
        for (b, v) in &data {
            worst = worst.max((net.value(b) - v).abs());
        }
    }
    verdict(worst <= 1e-12, format!("30 datasets, max training error {worst:.1e}"))
}

fn monotonicity() -> Verdict {
    let mut r = rng::stream(3, &[0xacce]);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let p = random_network(&mut r, 12).project(Variant::ReluProjected);
        let m = p.items();
        let a = random_bundle(m, &mut r);
        let mut b = a.clone();
        for j in 0..m {
            if r.gen::<bool>() {
                b.insert(j);
            }
        }
        if p.value(&Bundle::empty(m)) != 0.0 || p.value(&a) > p.value(&b) + 1e-12 {
            violations += 1;
        }
    }
    let mut exhaustive = 0usize;
    for _ in 0..40 {
        let p = random_network(&mut r, 8).project(Variant::ReluProjected);
        let m = p.items();
        let values: Vec<f64> = all_bundles(m).map(|b| p.value(&b)).collect();
        if values[0] != 0.0 {
            violations += 1;
        }
        for idx in 0..values.len() {
            for j in 0..m {
                if idx & (1 << j) == 0 {
                    let mut sup = Bundle::from_index(m, idx as u64);
                    sup.insert(j);
                    let up = p.value(&sup);
                    exhaustive += 1;
                    if values[idx] > up + 1e-12 {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations over 10000 random pairs and {exhaustive} exhaustive cover pairs"),
    )
}

fn milp_correctness() -> (Verdict, Verdict) {
    let exact = SolveConfig::exact();
    let mut worst: f64 = 0.0;
    let mut prune_gap: f64 = 0.0;
    let mut failure = None;
    for seed in 0..30u64 {
        let (nets, m) = solver_instance(seed);
        let (bf, _) = brute_force(&nets, m).expect("small instance");
        let mb = monotone_bnb(&nets, m, &exact).expect("monotone networks");
        let pruned = encode_wdp(&nets, m, EncodeOptions::default()).expect("encodable");
        let unpruned = encode_wdp(&nets, m, EncodeOptions::unpruned()).expect("encodable");
        let a = solve_milp(&pruned, &exact).expect("solvable");
        let b = solve_milp(&unpruned, &exact).expect("solvable");
        if [a.status, b.status, mb.status].iter().any(|s| *s != Status::Optimal) {
            failure = Some(format!("instance {seed} not solved to optimality"));
        }
        worst = worst.max((a.objective - bf).abs()).max((mb.objective - bf).abs());
        prune_gap = prune_gap.max((a.objective - b.objective).abs());
    }
    let mut r = rng::stream(5, &[0xacce]);
    let mut infeasible = 0;
    for k in 0..100u64 {
        let (nets, m) = solver_instance(1000 + k);
        let opts = if k % 2 == 0 { EncodeOptions::default() } else { EncodeOptions::unpruned() };
        let model = encode_wdp(&nets, m, opts).expect("encodable");
        let owners: Vec<Option<usize>> = (0..m)
            .map(|_| {
                let o = r.gen_range(0..=nets.len());
                (o < nets.len()).then_some(o)
            })
            .collect();
        let alloc = Allocation::from_owners(nets.len(), &owners);
        let ok = wdp_assignment(&model, &alloc)
            .and_then(|x| check_assignment(&model, &x, 1e-9))
            .is_ok();
        if !ok {
            infeasible += 1;
        }
    }
    let five = match failure {
        Some(f) => verdict(false, f),
        None => verdict(
            worst <= 1e-6 && infeasible == 0,
            format!("30 instances, max |milp - bnb - brute| {worst:.1e}; {infeasible}/100 forward-pass assignments infeasible"),
        ),
    };
    let seven = verdict(prune_gap <= 1e-6, format!("max |pruned - unpruned| {prune_gap:.1e}"));
    (five, seven)
}

fn ia_tightness() -> Verdict {
    let mut r = rng::stream(6, &[0xacce]);
    let mut mismatches = 0usize;
    let mut neurons = 0usize;
    for _ in 0..100 {
        let p = random_network(&mut r, 10).project(Variant::ReluProjected);
        let m = p.items();
        let bounds = ia_bounds(&p).expect("projected network");
        let hi = p.trace(&Bundle::full(m)).expect("valid input");
        let lo = p.trace(&Bundle::empty(m)).expect("valid input");
        for (k, layer) in bounds.layers.iter().enumerate() {
            for n in 0..layer.upper_pre.len() {
                neurons += 1;
                if layer.upper_pre[n] != hi.pre[k][n] || layer.lower_pre[n] != lo.pre[k][n] {
                    mismatches += 1;
                }
            }
        }
    }
    verdict(mismatches == 0, format!("{mismatches} mismatches over {neurons} neurons"))
}

fn gradients() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut r = rng::stream(seed, &[0xacce, 8]);
        let variant = [Variant::ReluProjected, Variant::Abs, Variant::Relu, Variant::Unconstrained][seed as usize % 4];
        let cfg = TrainConfig {
            variant,
            loss: if seed % 2 == 0 { LossKind::Squared } else { LossKind::Absolute },
            l2: 1e-3,
            ..TrainConfig::default()
        };
        let m = r.gen_range(2..=5);
        let arch = [m, r.gen_range(2..=6), r.gen_range(2..=6), 1];
        let mut p = initialize(&arch, &cfg, &mut r).expect("valid architecture");
        for l in &mut p.layers {
            for w in &mut l.weights {
                *w *= 3.0;
            }
        }
        let batch: Vec<_> = all_bundles(m).map(|x| (x, r.gen_range(0.0..1.0))).collect();
        let c = gradient_check(&p, &batch, &cfg, 1e-5, 1e-4);
        worst = worst.max(c.max_relative_error);
        checked += c.checked;
    }
    verdict(worst <= 1e-4 && checked > 0, format!("{checked} coordinates, max relative error {worst:.1e}"))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn mlca_end_to_end() -> Verdict {
    let mut cfg = RunConfig::default();
    cfg.mlca.auction.q_init = 20;
    cfg.mlca.auction.q_max = 50;
    cfg.mlca.instances = 10;
    let outcome = match mlca::run(&cfg, workers()) {
        Ok(o) => o,
        Err(e) => return verdict(false, e.to_string()),
    };
    let (ml, rs) = outcome.losses();
    let p = stats::paired_t_less(&ml, &rs);
    let mut problems = Vec::new();
    for inst in &outcome.instances {
        for r in [&inst.mlca, &inst.random_search] {
            let total: f64 = r.payments.iter().sum();
            if total < 0.0 {
                problems.push(format!("seed {}: deficit", inst.seed));
            }
            for (i, &pay) in r.payments.iter().enumerate() {
                let v = r.reports.bidder(i).get(r.allocation.bundle(i)).unwrap_or(0.0);
                if pay < 0.0 || pay > v + VALUE_TOL {
                    problems.push(format!("seed {}: bidder {i} pays {pay} for value {v}", inst.seed));
                }
            }
        }
        if inst.mlca.path.windows(2).any(|w| w[1].efficiency_loss > w[0].efficiency_loss + 1e-12) {
            problems.push(format!("seed {}: efficiency-loss path increases", inst.seed));
        }
    }
    let (a, b) = (stats::mean(&ml), stats::mean(&rs));
    verdict(
        a < b && p < 0.05 && problems.is_empty(),
        format!(
            "mean loss MLCA {:.4} vs RS {:.4}, one-sided p {p:.2e}{}",
            a,
            b,
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn runtime_comparison() -> Verdict {
    let cfg = RunConfig::default();
    let report = match bench::run(&cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, e.to_string()),
    };
    let limit = cfg.bench.solve.timeout_s;
    let timeouts: usize = report.rows.iter().map(|r| r.timeouts).sum();
    let slowest = report.records.iter().map(|r| r.seconds).fold(0.0, f64::max);
    let ratios: Vec<String> = bench::ratios(&report)
        .iter()
        .map(|r| format!("{} {:.3}", r.architecture, r.mvnn_over_relu.unwrap_or(f64::NAN)))
        .collect();
    let archs = report.architectures().len();
    let per_arch = report.records.len() / (2 * archs.max(1));
    verdict(
        archs == 3 && per_arch == 5 && timeouts == 0 && slowest <= limit,
        format!(
            "{archs} architectures x {per_arch} instances, slowest solve {slowest:.2}s, {timeouts} timeouts; MVNN/ReLU time ratio: {} (observational)",
            ratios.join(", ")
        ),
    )
}

fn prediction_direction() -> Verdict {
    let mut cfg = RunConfig::default();
    cfg.train.domain = Some(DomainSpec::default());
    cfg.train.train_size = 50;
    cfg.train.seeds = (0..5).collect();
    cfg.train.compare_unconstrained = true;
    let outcome = match train::run(&cfg) {
        Ok(o) => o,
        Err(e) => return verdict(false, e.to_string()),
    };
    let (a, b) = (outcome.mean_r2("mvnn").unwrap_or(f64::NAN), outcome.mean_r2("unconstrained").unwrap_or(f64::NAN));
    verdict(a >= b, format!("mean held-out R2 MVNN {a:.4} vs unconstrained {b:.4}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, limit: Option<Duration>, run: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let ok = v.ok && in_time;
        if !ok {
            failed += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0}s", l.as_secs_f64()));
        println!(
            "criterion {id:>2} {:<4} {name}: {} [{:.2}s{budget}]",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    };
    let secs = Duration::from_secs;
    report(1, "golden example", Some(secs(1)), &mut golden);
    report(2, "universality", Some(secs(10)), &mut universality);
    report(3, "interpolation", Some(secs(10)), &mut interpolation);
    report(4, "monotonicity and normalization", Some(secs(60)), &mut monotonicity);
    let mut seven = None;
    report(5, "MILP correctness", Some(secs(300)), &mut || {
        let (five, s) = milp_correctness();
        seven = Some(s);
        five
    });
    report(6, "interval bounds tightness", Some(secs(10)), &mut ia_tightness);
    report(7, "pruning soundness", None, &mut || seven.take().expect("computed with criterion 5"));
    report(8, "gradient check", Some(secs(30)), &mut gradients);
    report(9, "MLCA end-to-end", Some(secs(1800)), &mut mlca_end_to_end);
    report(10, "runtime comparison", None, &mut runtime_comparison);
    report(11, "prediction direction", None, &mut prediction_direction);
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
