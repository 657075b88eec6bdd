use std::collections::HashSet;

use rand::Rng;

use super::{MlcaConfig, WdpSolver};
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::{Allocation, ReportSet};
use crate::milp::{encode_relu_wdp, encode_wdp, EncodeOptions, MilpModel};
use crate::mvnn::{train, Activation, MvnnParams};
use crate::rng;
use crate::solver::{monotone_bnb_excluding, solve_milp, Solution};

/// Counters describing how queries were produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QueryStats {
    /// Optimization-step answers that were already reported and triggered a re-solve.
    pub resolves: usize,
    /// Re-solve answers that still collided with a bundle queried earlier in the round.
    pub cross_economy: usize,
    /// Queries replaced by a uniformly random unreported bundle.
    pub fallbacks: usize,
    /// Queries skipped because the bidder had already reported every bundle.
    pub exhausted: usize,
}

impl QueryStats {
    pub(crate) fn add(&mut self, o: &QueryStats) {
        self.resolves += o.resolves;
        self.cross_economy += o.cross_economy;
        self.fallbacks += o.fallbacks;
        self.exhausted += o.exhausted;
    }
}

/// Trains one network per listed bidder on its current reports.
pub(crate) fn train_networks(
    bidders: &[usize],
    reports: &ReportSet,
    items: usize,
    cfg: &MlcaConfig,
    seed_path: &[u64],
) -> Result<Vec<(usize, MvnnParams)>> {
    let mut arch = vec![items];
    arch.extend_from_slice(&cfg.hidden);
    arch.push(1);
    bidders
        .iter()
        .map(|&i| {
            let data: Vec<(Bundle, f64)> =
                reports.bidder(i).iter().map(|(b, v)| (b.clone(), v)).collect();
            let mut path = vec![rng::label::INIT];
            path.extend_from_slice(seed_path);
            path.push(i as u64);
            let seed = rng::derive(cfg.seed, &path);
            train(&data, &arch, &cfg.train, seed)
                .map(|p| (i, p))
                .map_err(|e| e.for_bidder(i))
        })
        .collect()
}

fn solve_economy(
    nets: &[&MvnnParams],
    items: usize,
    forbidden: &[Vec<Bundle>],
    cfg: &MlcaConfig,
) -> Result<Solution> {
    let monotone = nets.iter().all(|p| p.is_projected() && p.activation == Activation::BoundedRelu);
    if cfg.solver == WdpSolver::MonotoneBnb && monotone {
        return monotone_bnb_excluding(nets, items, &cfg.solve, forbidden);
    }
    let owned: Vec<MvnnParams> = nets.iter().map(|p| (*p).clone()).collect();
    let mut model: MilpModel = if monotone {
        encode_wdp(&owned, items, EncodeOptions::default())?
    } else {
        encode_relu_wdp(&owned, items)?
    };
    for (i, list) in forbidden.iter().enumerate() {
        for b in list {
            model.exclude_bundle(i, b);
        }
    }
    solve_milp(&model, &cfg.solve)
}

fn random_unreported<R: Rng>(items: usize, known: &HashSet<Bundle>, rng: &mut R) -> Option<Bundle> {
    let total = if items >= 63 { u64::MAX } else { 1u64 << items };
    if items < 63 && known.len() as u64 >= total {
        return None;
    }
    if items <= 20 {
        let free: Vec<u64> = (0..total)
            .filter(|&s| !known.contains(&Bundle::from_index(items, s)))
            .collect();
        return free.get(rng.gen_range(0..free.len())).map(|&s| Bundle::from_index(items, s));
    }
    loop {
        let mut b = Bundle::empty(items);
        for j in 0..items {
            b.set(j, rng.gen::<bool>());
        }
        if !known.contains(&b) {
            return Some(b);
        }
    }
}

/// The optimization and novelty steps of the query module for economy `economy`.
///
/// Returns a new bundle for every bidder in `targets` (a subset of `economy`): the WDP
/// answer if it is new, otherwise the answer of a re-solve that forbids every bundle the
/// bidder already reported or was asked earlier in the round (`pending`), and as a last
/// resort a random unreported bundle. `None` means the bidder has nothing left to report.
#[allow(clippy::too_many_arguments)]
pub(crate) fn propose<R: Rng>(
    economy: &[usize],
    targets: &[usize],
    nets: &[Option<MvnnParams>],
    reports: &ReportSet,
    pending: &[Vec<Bundle>],
    items: usize,
    cfg: &MlcaConfig,
    rng: &mut R,
) -> Result<(Vec<Option<Bundle>>, QueryStats)> {
    let local: Vec<&MvnnParams> = economy
        .iter()
        .map(|&i| nets[i].as_ref().expect("network trained for every economy member"))
        .collect();
    let sol = solve_economy(&local, items, &[], cfg)?;
    let mut stats = QueryStats::default();
    let mut out = Vec::with_capacity(targets.len());
    for &i in targets {
        let pos = economy.iter().position(|&k| k == i).expect("target inside economy");
        let known: HashSet<Bundle> = reports
            .bidder(i)
            .bundles()
            .cloned()
            .chain(pending[i].iter().cloned())
            .collect();
        let first = sol.allocation.as_ref().map(|a: &Allocation| a.bundle(pos).clone());
        if let Some(q) = first.filter(|q| !known.contains(q)) {
            out.push(Some(q));
            continue;
        }
        stats.resolves += 1;
        let mut forbidden = vec![Vec::new(); economy.len()];
        forbidden[pos] = known.iter().cloned().collect::<Vec<_>>();
        forbidden[pos].sort();
        let again = solve_economy(&local, items, &forbidden, cfg)?;
        let second = again.allocation.as_ref().map(|a| a.bundle(pos).clone());
        match second.filter(|q| !known.contains(q)) {
            Some(q) => out.push(Some(q)),
            None => {
                if pending[i].iter().any(|b| !reports.bidder(i).contains(b)) {
                    stats.cross_economy += 1;
                }
                match random_unreported(items, &known, rng) {
                    Some(q) => {
                        stats.fallbacks += 1;
                        out.push(Some(q));
                    }
                    None => {
                        stats.exhausted += 1;
                        out.push(None);
                    }
                }
            }
        }
    }
    Ok((out, stats))
}

/// Algorithm-level query module: trains a network per bidder of `economy` on its
/// reports, solves the network-based WDP and returns one new bundle per bidder.
pub fn next_queries(
    economy: &[usize],
    reports: &ReportSet,
    cfg: &MlcaConfig,
    items: usize,
) -> Result<Vec<Bundle>> {
    if economy.is_empty() {
        return Ok(Vec::new());
    }
    for &i in economy {
        if i >= reports.bidders() {
            return Err(Error::Config(format!("bidder {i} has no reports")));
        }
        if reports.bidder(i).is_empty() {
            return Err(Error::Data(format!("bidder {i} needs at least one report")));
        }
    }
    let trained = train_networks(economy, reports, items, cfg, &[u64::MAX])?;
    let mut nets: Vec<Option<MvnnParams>> = vec![None; reports.bidders()];
    for (i, p) in trained {
        nets[i] = Some(p);
    }
    let pending = vec![Vec::new(); reports.bidders()];
    let mut r = rng::stream(cfg.seed, &[rng::label::SOLVER, u64::MAX]);
    let (qs, _) = propose(economy, economy, &nets, reports, &pending, items, cfg, &mut r)?;
    qs.into_iter()
        .zip(economy)
        .map(|(q, &i)| {
            q.ok_or_else(|| Error::Data(format!("bidder {i} has already reported every bundle")))
        })
        .collect()
}
