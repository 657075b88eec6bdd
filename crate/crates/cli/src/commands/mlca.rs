use mvnn_core::mlca::{random_search, run_mlca, AuctionResult, MlcaConfig};
use mvnn_core::prefgen::{random_domain, DomainSpec};
use mvnn_core::stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::io::OutDir;

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub mlca: AuctionResult,
    pub random_search: AuctionResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub seed: u64,
    pub method: String,
    pub round: usize,
    pub queries: usize,
    pub efficiency_loss: f64,
    pub revenue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub seed: u64,
    pub method: String,
    pub queries: usize,
    pub efficiency_loss: f64,
    pub revenue: f64,
    pub welfare: f64,
    pub optimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    pub instances: usize,
    pub efficiency_loss_mean: f64,
    pub efficiency_loss_ci95: f64,
    pub revenue_mean: f64,
    pub revenue_ci95: f64,
    pub queries_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// One-sided paired t-test p-value for "MLCA loss < random-search loss".
    pub p_value: f64,
    pub mean_difference: f64,
}

#[derive(Clone, Debug)]
pub struct MlcaOutcome {
    pub instances: Vec<Instance>,
    pub aggregate: Vec<AggregateRow>,
    pub comparison: Comparison,
}

impl MlcaOutcome {
    pub fn losses(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.instances.iter().map(|i| i.mlca.efficiency_loss).collect(),
            self.instances.iter().map(|i| i.random_search.efficiency_loss).collect(),
        )
    }
}

pub fn seeds(cfg: &RunConfig) -> Vec<u64> {
    if cfg.mlca.seeds.is_empty() {
        (0..cfg.mlca.instances as u64).map(|k| cfg.seed + k).collect()
    } else {
        cfg.mlca.seeds.clone()
    }
}

fn instance(domain: &DomainSpec, auction: &MlcaConfig, seed: u64) -> CliResult<Instance> {
    let spec = DomainSpec { seed, ..domain.clone() };
    let oracles = random_domain(&spec).context(|| format!("seed {seed}: generating the domain"))?;
    let cfg = MlcaConfig { seed, ..auction.clone() };
    let mlca = run_mlca(&oracles, &cfg).context(|| format!("seed {seed}: running MLCA"))?;
    let random_search =
        random_search(&oracles, cfg.q_max, seed).context(|| format!("seed {seed}: running random search"))?;
    Ok(Instance {
        seed,
        mlca,
        random_search,
    })
}

fn aggregate(method: &str, results: &[&AuctionResult]) -> AggregateRow {
    let loss: Vec<f64> = results.iter().map(|r| r.efficiency_loss).collect();
    let revenue: Vec<f64> = results.iter().map(|r| r.revenue).collect();
    let queries: Vec<f64> = results.iter().map(|r| r.queries() as f64).collect();
    let (efficiency_loss_mean, efficiency_loss_ci95) = stats::mean_ci95(&loss);
    let (revenue_mean, revenue_ci95) = stats::mean_ci95(&revenue);
    AggregateRow {
        method: method.to_string(),
        instances: results.len(),
        efficiency_loss_mean,
        efficiency_loss_ci95,
        revenue_mean,
        revenue_ci95,
        queries_mean: stats::mean(&queries),
    }
}

/// Runs MLCA and random search on every seed, in parallel across seeds.
pub fn run(cfg: &RunConfig, workers: usize) -> CliResult<MlcaOutcome> {
    let s = &cfg.mlca;
    s.domain.validate().context(|| "mlca.domain".into())?;
    s.auction.validate().context(|| "mlca.auction".into())?;
    let seeds = seeds(cfg);
    if seeds.is_empty() {
        return Err(CliError::Usage("mlca needs at least one instance".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let instances: Vec<Instance> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| instance(&s.domain, &s.auction, seed))
            .collect::<CliResult<Vec<_>>>()
    })?;
    let ml: Vec<&AuctionResult> = instances.iter().map(|i| &i.mlca).collect();
    let rs: Vec<&AuctionResult> = instances.iter().map(|i| &i.random_search).collect();
    let aggregate = vec![aggregate("mlca", &ml), aggregate("random-search", &rs)];
    let a: Vec<f64> = ml.iter().map(|r| r.efficiency_loss).collect();
    let b: Vec<f64> = rs.iter().map(|r| r.efficiency_loss).collect();
    let comparison = Comparison {
        p_value: stats::paired_t_less(&a, &b),
        mean_difference: stats::mean(&a) - stats::mean(&b),
    };
    Ok(MlcaOutcome {
        instances,
        aggregate,
        comparison,
    })
}

fn rows(inst: &Instance) -> impl Iterator<Item = (&'static str, &AuctionResult)> {
    [("mlca", &inst.mlca), ("random-search", &inst.random_search)].into_iter()
}

pub fn write(outcome: &MlcaOutcome, out: &OutDir) -> CliResult<()> {
    let mut path = Vec::new();
    let mut per_instance = Vec::new();
    for inst in &outcome.instances {
        for (method, r) in rows(inst) {
            out.write_json(&format!("results/seed{}_{method}.json", inst.seed), r)?;
            path.extend(r.path.iter().map(|p| PathRow {
                seed: inst.seed,
                method: method.to_string(),
                round: p.round,
                queries: p.queries,
                efficiency_loss: p.efficiency_loss,
                revenue: p.revenue,
            }));
            per_instance.push(InstanceRow {
                seed: inst.seed,
                method: method.to_string(),
                queries: r.queries(),
                efficiency_loss: r.efficiency_loss,
                revenue: r.revenue,
                welfare: r.welfare,
                optimal: r.optimal,
            });
        }
    }
    out.write_csv("path.csv", &path)?;
    out.write_csv("instances.csv", &per_instance)?;
    out.write_csv("aggregate.csv", &outcome.aggregate)?;
    out.write_json("comparison.json", &outcome.comparison)?;
    Ok(())
}

/// Per-seed wall times, kept out of the deterministic outputs.
pub fn runtimes(outcome: &MlcaOutcome) -> serde_json::Value {
    outcome
        .instances
        .iter()
        .map(|i| {
            serde_json::json!({
                "seed": i.seed,
                "mlca_s": i.mlca.wall_time_s,
                "random_search_s": i.random_search.wall_time_s,
            })
        })
        .collect()
}
