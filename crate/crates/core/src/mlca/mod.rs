//! The machine-learning powered combinatorial auction (MLCA).
//!
//! An auction starts with a batch of random value queries per bidder and then runs
//! rounds in which a monotone network is trained per bidder, the network-based
//! winner-determination problem is solved for the main economy and for randomly drawn
//! marginal economies, and the resulting bundles become the next queries. The final
//! allocation and VCG payments are computed from the reports alone.
//!
//! [`random_search`] is the baseline that spends the whole budget on random queries.

mod query;
mod wdp;

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use query::{next_queries, QueryStats};
pub use wdp::{vcg_payments, wdp_over_reports};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::{efficiency_loss, relative_revenue, social_welfare, Allocation, ReportSet, ValueOracle};
use crate::mvnn::{MvnnParams, TrainConfig};
use crate::rng;
use crate::solver::{monotone_bnb, SolveConfig, Status};

/// Which solver answers the network-based winner-determination problems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WdpSolver {
    /// Exact enumeration with monotone bounds; falls back to the MILP for plain ReLU nets.
    #[default]
    MonotoneBnb,
    /// The MILP encoding solved by branch-and-bound.
    Milp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlcaConfig {
    /// Random queries per bidder before the first round. The empty bundle is reported
    /// on top of these and does not count against the budget.
    pub q_init: usize,
    pub q_max: usize,
    pub q_round: usize,
    pub seed: u64,
    /// Stop as soon as the reported-welfare allocation is efficient under the true values.
    pub early_stop: bool,
    /// Hidden layer widths of each bidder's network.
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub solve: SolveConfig,
    pub solver: WdpSolver,
    /// Retrain the networks for every economy instead of once per round.
    pub strict_retrain: bool,
}

impl Default for MlcaConfig {
    fn default() -> Self {
        MlcaConfig {
            q_init: 40,
            q_max: 100,
            q_round: 4,
            seed: 0,
            early_stop: false,
            hidden: vec![10, 10],
            train: TrainConfig {
                learning_rate: 5e-3,
                epochs: 300,
                batch_size: 4,
                min_correlation: 0.5,
                retries: 5,
                ..TrainConfig::default()
            },
            solve: SolveConfig::default(),
            solver: WdpSolver::default(),
            strict_retrain: false,
        }
    }
}

impl MlcaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_init == 0 || self.q_round == 0 {
            return Err(Error::Config("q_init and q_round must be at least 1".into()));
        }
        if self.q_max < self.q_init {
            return Err(Error::Config(format!(
                "q_max ({}) must be at least q_init ({})",
                self.q_max, self.q_init
            )));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config(format!(
                "hidden widths must be non-empty and positive, got {:?}",
                self.hidden
            )));
        }
        self.train.validate()?;
        self.solve.validate()
    }

    /// Number of learning rounds the budget allows.
    pub fn rounds(&self) -> usize {
        (self.q_max - self.q_init) / self.q_round
    }
}

/// The state after one elicitation step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    /// 0 for the random initial queries, then the learning round.
    pub round: usize,
    /// Largest number of queries answered by any bidder (the empty bundle excluded).
    pub queries: usize,
    pub efficiency_loss: f64,
    /// VCG revenue from the current reports, relative to the optimal welfare.
    pub revenue: f64,
}

/// Bundles asked in one learning round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    /// Per bidder: the left-out bidder of every marginal economy used.
    pub marginals: Vec<Vec<usize>>,
    /// Per bidder: the bundles queried, in order.
    pub queries: Vec<Vec<Bundle>>,
    pub stats: QueryStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionResult {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
    pub reports: ReportSet,
    pub rounds: Vec<RoundLog>,
    pub path: Vec<PathPoint>,
    /// True social welfare of the final allocation.
    pub welfare: f64,
    /// Welfare of the efficient allocation.
    pub optimal: f64,
    pub efficiency_loss: f64,
    /// Sum of payments relative to the optimal welfare.
    pub revenue: f64,
    pub stats: QueryStats,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl AuctionResult {
    /// Largest number of answered queries over the bidders, empty bundle excluded.
    pub fn queries(&self) -> usize {
        max_queries(&self.reports)
    }
}

fn max_queries(reports: &ReportSet) -> usize {
    let empty_reported = |i: usize| {
        let r = reports.bidder(i);
        r.bundles().next().is_some_and(Bundle::is_empty) as usize
    };
    (0..reports.bidders())
        .map(|i| reports.bidder(i).len() - empty_reported(i))
        .max()
        .unwrap_or(0)
}

fn check_oracles<O: ValueOracle>(oracles: &[O]) -> Result<usize> {
    let Some(first) = oracles.first() else {
        return Err(Error::Config("an auction needs at least one bidder".into()));
    };
    let items = first.items();
    if items == 0 || items > 63 {
        return Err(Error::Size(format!("auctions support 1 to 63 items, got {items}")));
    }
    for o in oracles {
        if o.items() != items {
            return Err(Error::Dimension {
                expected: items,
                found: o.items(),
            });
        }
    }
    Ok(items)
}

fn true_optimum<O: ValueOracle>(oracles: &[O], items: usize) -> Result<f64> {
    let cfg = SolveConfig {
        timeout_s: 3600.0,
        ..SolveConfig::exact()
    };
    let sol = monotone_bnb(oracles, items, &cfg)?;
    if sol.status != Status::Optimal {
        return Err(Error::Size("efficient allocation not proven within the time limit".into()));
    }
    Ok(sol.objective)
}

/// `count` distinct non-empty bundles drawn uniformly, or all of them if fewer exist.
/// Draws are sequential, so a shorter request yields a prefix of a longer one.
fn random_distinct<R: Rng>(items: usize, count: usize, rng: &mut R) -> Vec<Bundle> {
    let available = (1u64 << items) - 1;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count && (out.len() as u64) < available {
        let idx = rng.gen_range(1..=available);
        if seen.insert(idx) {
            out.push(Bundle::from_index(items, idx));
        }
    }
    out
}

fn initial_reports<O: ValueOracle>(oracles: &[O], items: usize, count: usize, seed: u64) -> Result<ReportSet> {
    let mut reports = ReportSet::new(oracles.len());
    for (i, o) in oracles.iter().enumerate() {
        reports.insert(i, Bundle::empty(items), 0.0)?;
        let mut r = rng::stream(seed, &[rng::label::QUERIES, 0, i as u64]);
        for b in random_distinct(items, count, &mut r) {
            let v = o.value(&b);
            reports.insert(i, b, v).map_err(|e| e.for_bidder(i))?;
        }
    }
    Ok(reports)
}

struct Evaluation {
    allocation: Allocation,
    payments: Vec<f64>,
    welfare: f64,
    loss: f64,
    revenue: f64,
}

fn evaluate<O: ValueOracle>(oracles: &[O], reports: &ReportSet, optimal: f64) -> Result<Evaluation> {
    let allocation = wdp_over_reports(reports);
    let payments = vcg_payments(reports);
    let welfare = social_welfare(&allocation, oracles)?;
    Ok(Evaluation {
        loss: efficiency_loss(welfare, optimal)?,
        revenue: relative_revenue(&payments, optimal)?,
        allocation,
        payments,
        welfare,
    })
}

fn finish(
    eval: Evaluation,
    reports: ReportSet,
    rounds: Vec<RoundLog>,
    path: Vec<PathPoint>,
    optimal: f64,
    start: Instant,
) -> AuctionResult {
    let mut stats = QueryStats::default();
    for r in &rounds {
        stats.add(&r.stats);
    }
    AuctionResult {
        allocation: eval.allocation,
        payments: eval.payments,
        reports,
        rounds,
        path,
        welfare: eval.welfare,
        optimal,
        efficiency_loss: eval.loss,
        revenue: eval.revenue,
        stats,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Left-out bidders for the marginal economies of bidder `i`: successive shuffled
/// passes over the other bidders, so repeats happen only when `count` exceeds `n - 1`.
fn marginal_draws<R: Rng>(n: usize, i: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let mut out = Vec::with_capacity(count);
    if others.is_empty() {
        return out;
    }
    while out.len() < count {
        let mut pass = others.clone();
        pass.shuffle(rng);
        out.extend(pass.into_iter().take(count - out.len()));
    }
    out
}

/// Runs the auction against truthful bidders answering with `oracles`.
pub fn run_mlca<O: ValueOracle>(oracles: &[O], cfg: &MlcaConfig) -> Result<AuctionResult> {
    cfg.validate()?;
    let start = Instant::now();
    let items = check_oracles(oracles)?;
    let n = oracles.len();
    let optimal = true_optimum(oracles, items)?;

    let mut reports = initial_reports(oracles, items, cfg.q_init, cfg.seed)?;
    let mut eval = evaluate(oracles, &reports, optimal)?;
    let mut path = vec![PathPoint {
        round: 0,
        queries: max_queries(&reports),
        efficiency_loss: eval.loss,
        revenue: eval.revenue,
    }];
    let mut rounds = Vec::new();
    let everyone: Vec<usize> = (0..n).collect();

    for round in 1..=cfg.rounds() {
        if cfg.early_stop && eval.loss <= 1e-9 {
            break;
        }
        let round_tag = round as u64;
        let mut fallback_rng = rng::stream(cfg.seed, &[rng::label::SOLVER, round_tag]);
        let mut nets: Vec<Option<MvnnParams>> = vec![None; n];
        if !cfg.strict_retrain {
            for (i, p) in query::train_networks(&everyone, &reports, items, cfg, &[round_tag])? {
                nets[i] = Some(p);
            }
        }
        let mut pending: Vec<Vec<Bundle>> = vec![Vec::new(); n];
        let mut marginals = vec![Vec::new(); n];
        let mut stats = QueryStats::default();
        let mut call = 0u64;
        let mut ask = |economy: &[usize], targets: &[usize], pending: &mut Vec<Vec<Bundle>>, stats: &mut QueryStats| -> Result<()> {
            call += 1;
            let local_nets = if cfg.strict_retrain {
                let mut fresh = vec![None; n];
                for (i, p) in query::train_networks(economy, &reports, items, cfg, &[round_tag, call])? {
                    fresh[i] = Some(p);
                }
                fresh
            } else {
                nets.clone()
            };
            let (qs, s) =
                query::propose(economy, targets, &local_nets, &reports, pending, items, cfg, &mut fallback_rng)?;
            stats.add(&s);
            for (&i, q) in targets.iter().zip(qs) {
                if let Some(q) = q {
                    pending[i].push(q);
                }
            }
            Ok(())
        };

        let mut draw_rng = rng::stream(cfg.seed, &[rng::label::QUERIES, 1, round_tag]);
        for i in 0..n {
            let left_out = marginal_draws(n, i, cfg.q_round - 1, &mut draw_rng);
            if left_out.is_empty() {
                for _ in 1..cfg.q_round {
                    ask(&everyone, &[i], &mut pending, &mut stats)?;
                }
            }
            for &j in &left_out {
                let economy: Vec<usize> = (0..n).filter(|&k| k != j).collect();
                ask(&economy, &[i], &mut pending, &mut stats)?;
            }
            marginals[i] = left_out;
        }
        ask(&everyone, &everyone, &mut pending, &mut stats)?;

        for (i, qs) in pending.iter().enumerate() {
            for q in qs {
                let v = oracles[i].value(q);
                reports.insert(i, q.clone(), v).map_err(|e| e.for_bidder(i))?;
            }
        }
        rounds.push(RoundLog {
            round,
            marginals,
            queries: pending,
            stats,
        });
        eval = evaluate(oracles, &reports, optimal)?;
        path.push(PathPoint {
            round,
            queries: max_queries(&reports),
            efficiency_loss: eval.loss,
            revenue: eval.revenue,
        });
    }
    Ok(finish(eval, reports, rounds, path, optimal, start))
}

/// The baseline: `q_max` uniformly random distinct queries per bidder, no learning.
pub fn random_search<O: ValueOracle>(oracles: &[O], q_max: usize, seed: u64) -> Result<AuctionResult> {
    let start = Instant::now();
    let items = check_oracles(oracles)?;
    let optimal = true_optimum(oracles, items)?;
    let reports = initial_reports(oracles, items, q_max, seed)?;
    let eval = evaluate(oracles, &reports, optimal)?;
    let path = vec![PathPoint {
        round: 0,
        queries: max_queries(&reports),
        efficiency_loss: eval.loss,
        revenue: eval.revenue,
    }];
    Ok(finish(eval, reports, Vec::new(), path, optimal, start))
}
