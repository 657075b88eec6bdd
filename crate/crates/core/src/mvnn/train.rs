use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grad::{effective, gradient, Gradient};
use super::{Activation, Layer, MvnnParams, Variant};
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::rng;
use crate::stats;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    #[default]
    Absolute,
    Squared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub loss: LossKind,
    pub variant: Variant,
    pub cutoff: f64,
    /// Largest training target after scaling.
    pub target_scale: f64,
    pub retries: usize,
    /// Coefficient of the sign-violation penalty; 0 means hard constraints.
    pub soft_monotonicity: f64,
    /// Training-set Pearson correlation below which an attempt counts as diverged.
    pub min_correlation: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: Optimizer::Adam,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 1,
            l2: 1e-8,
            loss: LossKind::Absolute,
            variant: Variant::ReluProjected,
            cutoff: 1.0,
            target_scale: 1.0,
            retries: 20,
            soft_monotonicity: 0.0,
            min_correlation: 0.9,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("learning_rate", self.learning_rate),
            ("l2", self.l2),
            ("soft_monotonicity", self.soft_monotonicity),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be at least 1".into()));
        }
        if !(self.cutoff > 0.0) || !(self.target_scale > 0.0) {
            return Err(Error::Config("cutoff and target_scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub params: MvnnParams,
    /// Number of attempts used, including the accepted one.
    pub attempts: usize,
    /// Training-set Pearson correlation of the accepted fit (1 for constant targets).
    pub correlation: f64,
    /// Final mean training loss in scaled units.
    pub loss: f64,
}

/// Random initial parameters for the given layer widths `[m, d_1, ..., 1]`.
pub fn initialize<R: Rng>(arch: &[usize], cfg: &TrainConfig, rng: &mut R) -> Result<MvnnParams> {
    check_arch(arch)?;
    let unconstrained = cfg.variant == Variant::Unconstrained;
    let n = arch.len() - 1;
    let layers = arch
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (fan_in, rows) = (w[0], w[1]);
            let hi = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..rows * fan_in)
                .map(|_| {
                    if unconstrained {
                        rng.gen_range(-hi..=hi)
                    } else {
                        rng.gen_range(0.0..=hi)
                    }
                })
                .collect();
            let bias = if k + 1 == n {
                vec![0.0; rows]
            } else {
                (0..rows)
                    .map(|_| {
                        if unconstrained {
                            rng.gen_range(-0.05..=0.05)
                        } else {
                            rng.gen_range(-0.05..=0.0)
                        }
                    })
                    .collect()
            };
            Layer::new(rows, fan_in, weights, bias)
        })
        .collect::<Result<Vec<_>>>()?;
    let activation = if unconstrained {
        Activation::Relu
    } else {
        Activation::BoundedRelu
    };
    Ok(MvnnParams::new(cfg.cutoff, layers)?.with_activation(activation))
}

fn check_arch(arch: &[usize]) -> Result<()> {
    if arch.len() < 2 || arch.last() != Some(&1) || arch.contains(&0) {
        return Err(Error::Config(format!(
            "architecture must be [m, d_1, ..., 1] with positive widths, got {arch:?}"
        )));
    }
    Ok(())
}

/// Trains a network and returns the final (projected, rescaled) parameters.
pub fn train(
    data: &[(Bundle, f64)],
    arch: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<MvnnParams> {
    train_with_report(data, arch, cfg, seed).map(|r| r.params)
}

/// Like [`train`], also reporting the number of attempts and the accepted fit quality.
pub fn train_with_report(
    data: &[(Bundle, f64)],
    arch: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainReport> {
    cfg.validate()?;
    check_arch(arch)?;
    if data.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    for (b, v) in data {
        b.check_len(arch[0])?;
        if !(*v >= 0.0) || !v.is_finite() {
            return Err(Error::Data(format!("target for {b} must be finite and >= 0, got {v}")));
        }
    }

    let max = data.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let factor = if max > 0.0 { max / cfg.target_scale } else { 1.0 };
    let scaled: Vec<(Bundle, f64)> = data.iter().map(|(b, v)| (b.clone(), v / factor)).collect();
    let targets: Vec<f64> = scaled.iter().map(|(_, v)| *v).collect();
    let constant = targets.iter().all(|&v| v == targets[0]);

    let mut best: Option<(f64, MvnnParams, f64)> = None;
    for attempt in 0..=cfg.retries {
        let mut r = rng::stream(seed, &[rng::label::TRAIN, attempt as u64]);
        let (fit, loss) = fit_once(&scaled, arch, cfg, &mut r)?;
        let preds: Vec<f64> = scaled.iter().map(|(b, _)| fit.eval(b)).collect();
        let corr = if constant {
            1.0
        } else {
            stats::pearson(&preds, &targets).unwrap_or(0.0)
        };
        let out = rescale(fit, factor);
        if corr >= cfg.min_correlation || constant {
            return Ok(TrainReport {
                params: out,
                attempts: attempt + 1,
                correlation: corr,
                loss,
            });
        }
        if best.as_ref().is_none_or(|(c, _, _)| corr > *c) {
            best = Some((corr, out, loss));
        }
    }
    let (correlation, params, _) = best.expect("at least one attempt");
    Err(Error::Training {
        attempts: cfg.retries + 1,
        correlation,
        best: Box::new(params),
    })
}

fn rescale(mut p: MvnnParams, factor: f64) -> MvnnParams {
    let readout = p.layers.last_mut().expect("readout");
    for w in &mut readout.weights {
        *w *= factor;
    }
    p
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

fn fit_once<R: Rng>(
    data: &[(Bundle, f64)],
    arch: &[usize],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<(MvnnParams, f64)> {
    let mut raw = initialize(arch, cfg, rng)?;
    let hard_projection = cfg.variant == Variant::ReluProjected && cfg.soft_monotonicity == 0.0;
    let n_params = raw.parameter_count();
    let mut adam = Adam {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        step: 0,
    };
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size);
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate
            * 0.5
            * (1.0 + (std::f64::consts::PI * epoch as f64 / cfg.epochs as f64).cos());
        order.shuffle(rng);
        for chunk in order.chunks(cfg.batch_size) {
            if hard_projection {
                raw = raw.project(Variant::ReluProjected);
            }
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let g = gradient(&raw, &batch, cfg);
            apply(&mut raw, &g, lr, cfg.optimizer, &mut adam);
        }
    }
    let fitted = if cfg.variant == Variant::Unconstrained {
        raw.clone()
    } else {
        effective(&raw, cfg).project(if cfg.variant == Variant::Abs {
            Variant::Abs
        } else {
            Variant::ReluProjected
        })
    };
    let loss = super::loss(&fitted, data, &TrainConfig {
        l2: 0.0,
        soft_monotonicity: 0.0,
        variant: Variant::Unconstrained,
        ..cfg.clone()
    });
    Ok((fitted, loss))
}

fn apply(p: &mut MvnnParams, g: &Gradient, lr: f64, opt: Optimizer, adam: &mut Adam) {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    adam.step += 1;
    let (c1, c2) = (1.0 - B1.powi(adam.step), 1.0 - B2.powi(adam.step));
    let n = p.layers.len();
    let mut idx = 0;
    for (k, layer) in p.layers.iter_mut().enumerate() {
        let params = layer.weights.iter_mut().zip(&g.weights[k]).chain(
            layer
                .bias
                .iter_mut()
                .zip(&g.bias[k])
                .filter(|_| k + 1 < n),
        );
        for (theta, &grad) in params {
            match opt {
                Optimizer::Sgd => *theta -= lr * grad,
                Optimizer::Adam => {
                    let m = &mut adam.m[idx];
                    let v = &mut adam.v[idx];
                    *m = B1 * *m + (1.0 - B1) * grad;
                    *v = B2 * *v + (1.0 - B2) * grad * grad;
                    *theta -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
                }
            }
            idx += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::all_bundles;
    use crate::fixtures;
    use crate::market::ValueOracle;

    fn table_data() -> Vec<(Bundle, f64)> {
        let table = fixtures::three_item_table();
        all_bundles(3).map(|b| {
            let v = table.value(&b);
            (b, v)
        }).collect()
    }

    #[test]
    fn fits_three_item_table() {
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 2000,
            min_correlation: 0.999,
            ..TrainConfig::default()
        };
        let data = table_data();
        let p = train(&data, &[3, 2, 1], &cfg, 11).unwrap();
        assert!(p.is_projected());
        let truth: Vec<f64> = data.iter().map(|d| d.1).collect();
        let pred: Vec<f64> = data.iter().map(|d| p.value(&d.0)).collect();
        let r2 = stats::r_squared(&truth, &pred);
        assert!(r2 >= 0.99, "R^2 = {r2}");
    }

    #[test]
    fn empty_bundle_only_predicts_zero() {
        let data = vec![(Bundle::empty(4), 0.0)];
        let r = train_with_report(&data, &[4, 3, 1], &TrainConfig::default(), 0).unwrap();
        assert_eq!(r.attempts, 1);
        assert_eq!(r.params.forward(&Bundle::empty(4)).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = table_data();
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let a = train_with_report(&data, &[3, 4, 1], &cfg, 5);
        let b = train_with_report(&data, &[3, 4, 1], &cfg, 5);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(Error::Training { best: a, .. }), Err(Error::Training { best: b, .. })) => {
                assert_eq!(a, b)
            }
            other => panic!("runs diverged: {other:?}"),
        }
    }

    #[test]
    fn failure_carries_best_attempt() {
        let data = table_data();
        let cfg = TrainConfig {
            epochs: 1,
            learning_rate: 0.0,
            retries: 2,
            min_correlation: 1.1,
            ..TrainConfig::default()
        };
        match train(&data, &[3, 2, 1], &cfg, 0) {
            Err(Error::Training { attempts, best, .. }) => {
                assert_eq!(attempts, 3);
                assert!(best.is_projected());
            }
            other => panic!("expected training failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = TrainConfig::default();
        assert!(train(&[], &[3, 1], &cfg, 0).is_err());
        let data = vec![("101".parse().unwrap(), -1.0)];
        assert!(train(&data, &[3, 1], &cfg, 0).is_err());
        let data = vec![("101".parse().unwrap(), 1.0)];
        assert!(train(&data, &[3, 2], &cfg, 0).is_err());
        assert!(train(&data, &[4, 1], &cfg, 0).is_err());
        let bad = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(train(&data, &[3, 1], &bad, 0).is_err());
    }

    #[test]
    fn unconstrained_variant_uses_relu_and_may_be_unprojected() {
        let cfg = TrainConfig {
            variant: Variant::Unconstrained,
            epochs: 5,
            min_correlation: -1.0,
            ..TrainConfig::default()
        };
        let p = train(&table_data(), &[3, 6, 1], &cfg, 3).unwrap();
        assert_eq!(p.activation, Activation::Relu);
    }

    #[test]
    fn soft_and_abs_variants_return_projected_networks() {
        for cfg in [
            TrainConfig { variant: Variant::Abs, min_correlation: -1.0, epochs: 20, ..TrainConfig::default() },
            TrainConfig { variant: Variant::Relu, min_correlation: -1.0, epochs: 20, ..TrainConfig::default() },
            TrainConfig { soft_monotonicity: 0.1, min_correlation: -1.0, epochs: 20, ..TrainConfig::default() },
        ] {
            let p = train(&table_data(), &[3, 4, 1], &cfg, 9).unwrap();
            assert!(p.is_projected(), "{cfg:?}");
        }
    }
}
