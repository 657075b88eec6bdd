use std::collections::HashSet;

use mvnn_core::construct::interpolate;
use mvnn_core::mvnn::{train, TrainConfig, Variant};
use mvnn_core::prefgen::{random_mvnn_oracle, DomainSpec};
use mvnn_core::{rng, stats, Bundle, MvnnParams, ValueOracle};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{FitMethod, Format, RunConfig, TrainSection};
use crate::error::{CliError, CliResult, Context};
use crate::io::{read_dataset, OutDir};

type Dataset = Vec<(Bundle, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub seed: u64,
    pub model: String,
    pub train_size: usize,
    pub test_size: usize,
    pub r2: f64,
    pub kendall_tau: f64,
    pub mae: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub runs: usize,
    pub r2_mean: f64,
    pub r2_ci95: f64,
    pub kendall_tau_mean: f64,
    pub mae_mean: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub metrics: Vec<FitMetrics>,
    pub summary: Vec<ModelSummary>,
    pub models: Vec<(u64, String, MvnnParams)>,
}

impl TrainOutcome {
    pub fn mean_r2(&self, model: &str) -> Option<f64> {
        self.summary.iter().find(|s| s.model == model).map(|s| s.r2_mean)
    }
}

/// Held-out fit quality of `model` on `test`.
pub fn fit_metrics(model: &dyn ValueOracle, test: &[(Bundle, f64)]) -> (f64, f64, f64) {
    let truth: Vec<f64> = test.iter().map(|(_, v)| *v).collect();
    let pred: Vec<f64> = test.iter().map(|(b, _)| model.value(b)).collect();
    (
        stats::r_squared(&truth, &pred),
        stats::kendall_tau(&pred, &truth),
        stats::mae(&truth, &pred),
    )
}

/// Distinct uniformly drawn bundles, split into a training and a disjoint test set.
pub fn sample_domain_sets(spec: &DomainSpec, train_size: usize, test_size: usize, seed: u64) -> CliResult<(Dataset, Dataset)> {
    let oracle = random_mvnn_oracle(spec, 0).context(|| "building the value network".into())?;
    let m = spec.items;
    let available = if m >= 63 { u64::MAX } else { 1u64 << m };
    if ((train_size + test_size) as u64) > available {
        return Err(CliError::Usage(format!(
            "cannot draw {} distinct bundles over {m} items",
            train_size + test_size
        )));
    }
    let mut r = rng::stream(seed, &[rng::label::DATA]);
    let mut seen = HashSet::new();
    let mut all = Vec::with_capacity(train_size + test_size);
    while all.len() < train_size + test_size {
        let idx = if m >= 63 { r.gen::<u64>() } else { r.gen_range(0..available) };
        if seen.insert(idx) {
            let b = Bundle::from_index(m, idx);
            let v = oracle.value(&b);
            all.push((b, v));
        }
    }
    let test = all.split_off(train_size);
    Ok((all, test))
}

fn split_holdout(mut data: Dataset, holdout: f64, seed: u64) -> CliResult<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&holdout) {
        return Err(CliError::Usage(format!("holdout must lie in [0, 1), got {holdout}")));
    }
    if holdout == 0.0 {
        return Ok((data.clone(), data));
    }
    data.shuffle(&mut rng::stream(seed, &[rng::label::DATA]));
    let k = ((data.len() as f64) * holdout).round().max(1.0) as usize;
    if k >= data.len() {
        return Err(CliError::Usage("holdout leaves no training data".into()));
    }
    let test = data.split_off(data.len() - k);
    Ok((data, test))
}

fn fit(
    section: &TrainSection,
    data: &[(Bundle, f64)],
    variant: Option<Variant>,
    seed: u64,
) -> CliResult<MvnnParams> {
    let items = data[0].0.len();
    if section.method == FitMethod::Interpolate && variant.is_none() {
        return interpolate(data).context(|| "interpolating the dataset".into());
    }
    let cfg = TrainConfig {
        variant: variant.unwrap_or(section.config.variant),
        ..section.config.clone()
    };
    let mut arch = vec![items];
    arch.extend_from_slice(&section.hidden);
    arch.push(1);
    train(data, &arch, &cfg, rng::derive(seed, &[rng::label::TRAIN])).context(|| format!("training variant {:?}", cfg.variant))
}

fn summarize(metrics: &[FitMetrics]) -> Vec<ModelSummary> {
    let mut names: Vec<&str> = Vec::new();
    for m in metrics {
        if !names.contains(&m.model.as_str()) {
            names.push(&m.model);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let rows: Vec<&FitMetrics> = metrics.iter().filter(|m| m.model == name).collect();
            let r2: Vec<f64> = rows.iter().map(|m| m.r2).collect();
            let (r2_mean, r2_ci95) = stats::mean_ci95(&r2);
            ModelSummary {
                model: name.to_string(),
                runs: rows.len(),
                r2_mean,
                r2_ci95,
                kendall_tau_mean: stats::mean(&rows.iter().map(|m| m.kendall_tau).collect::<Vec<_>>()),
                mae_mean: stats::mean(&rows.iter().map(|m| m.mae).collect::<Vec<_>>()),
            }
        })
        .collect()
}

/// Fits the configured models and scores them on held-out bundles.
pub fn run(cfg: &RunConfig) -> CliResult<TrainOutcome> {
    let s = &cfg.train;
    s.config.validate().context(|| "train.config".into())?;
    let jobs: Vec<(u64, Dataset, Dataset)> = match (&s.data, &s.domain) {
        (Some(path), _) => {
            let data = read_dataset(path)?;
            let (train_set, test_set) = match &s.test_data {
                Some(t) => (data, read_dataset(t)?),
                None => split_holdout(data, s.holdout, cfg.seed)?,
            };
            vec![(cfg.seed, train_set, test_set)]
        }
        (None, Some(spec)) => {
            let seeds = if s.seeds.is_empty() { vec![cfg.seed] } else { s.seeds.clone() };
            seeds
                .into_iter()
                .map(|seed| {
                    let spec = DomainSpec { seed, ..spec.clone() };
                    spec.validate().context(|| "train.domain".into())?;
                    let (a, b) = sample_domain_sets(&spec, s.train_size, s.test_size, seed)?;
                    Ok((seed, a, b))
                })
                .collect::<CliResult<_>>()?
        }
        (None, None) => return Err(CliError::Usage("train needs `train.data` or `train.domain`".into())),
    };

    let primary = match s.method {
        FitMethod::Interpolate => "interpolate",
        FitMethod::Train => "mvnn",
    };
    let mut metrics = Vec::new();
    let mut models = Vec::new();
    for (seed, train_set, test_set) in &jobs {
        if let Some((b, _)) = test_set.iter().find(|(b, _)| b.len() != train_set[0].0.len()) {
            return Err(CliError::File {
                path: s.test_data.clone().unwrap_or_default(),
                message: format!("held-out bundle {b} has a different item count"),
            });
        }
        let mut variants = vec![(primary, None)];
        if s.compare_unconstrained {
            variants.push(("unconstrained", Some(Variant::Unconstrained)));
        }
        for (name, variant) in variants {
            let model = fit(s, train_set, variant, *seed)?;
            let (r2, kendall_tau, mae) = fit_metrics(&model, test_set);
            metrics.push(FitMetrics {
                seed: *seed,
                model: name.to_string(),
                train_size: train_set.len(),
                test_size: test_set.len(),
                r2,
                kendall_tau,
                mae,
            });
            models.push((*seed, name.to_string(), model));
        }
    }
    let summary = summarize(&metrics);
    Ok(TrainOutcome {
        metrics,
        summary,
        models,
    })
}

pub fn write(outcome: &TrainOutcome, format: Format, out: &OutDir) -> CliResult<()> {
    if let Some((_, _, first)) = outcome.models.first() {
        out.write_json("model.json", first)?;
    }
    for (seed, name, model) in &outcome.models {
        out.write_json(&format!("models/{name}_seed{seed}.json"), model)?;
    }
    out.write_csv("metrics.csv", &outcome.metrics)?;
    out.write_csv("summary.csv", &outcome.summary)?;
    if format == Format::Json {
        out.write_json("metrics.json", &outcome.metrics)?;
    }
    Ok(())
}
