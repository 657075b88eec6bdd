use super::{Activation, MvnnParams, TrainConfig, Variant};
use crate::bundle::Bundle;
use crate::mvnn::train::LossKind;

/// Gradient with the same shape as the network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradient {
    fn zeros_like(p: &MvnnParams) -> Self {
        Gradient {
            weights: p.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: p.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }
}

/// Parameters actually used in the forward pass for raw trainable parameters.
pub(crate) fn effective(raw: &MvnnParams, cfg: &TrainConfig) -> MvnnParams {
    if cfg.soft_monotonicity > 0.0 || cfg.variant == Variant::Unconstrained {
        raw.clone()
    } else {
        raw.project(cfg.variant)
    }
}

/// Derivative of the reparametrization, evaluated at the raw value.
fn transform_slope(cfg: &TrainConfig, raw: f64, is_bias: bool) -> f64 {
    if cfg.soft_monotonicity > 0.0 {
        return 1.0;
    }
    match (cfg.variant, is_bias) {
        (Variant::ReluProjected | Variant::Unconstrained, _) => 1.0,
        (Variant::Abs, false) => sign(raw),
        (Variant::Abs, true) => -sign(raw),
        (Variant::Relu, false) => (raw > 0.0) as u8 as f64,
        (Variant::Relu, true) => (raw < 0.0) as u8 as f64,
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn residual_loss(kind: LossKind, r: f64) -> f64 {
    match kind {
        LossKind::Absolute => r.abs(),
        LossKind::Squared => r * r,
    }
}

fn residual_slope(kind: LossKind, r: f64) -> f64 {
    match kind {
        LossKind::Absolute => sign(r),
        LossKind::Squared => 2.0 * r,
    }
}

/// Mean batch loss plus the L2 and soft-monotonicity penalties on the raw parameters.
pub fn loss(raw: &MvnnParams, batch: &[(Bundle, f64)], cfg: &TrainConfig) -> f64 {
    let eff = effective(raw, cfg);
    let data: f64 = batch
        .iter()
        .map(|(x, y)| residual_loss(cfg.loss, eff.eval(x) - y))
        .sum::<f64>()
        / batch.len() as f64;
    data + penalty(raw, cfg)
}

fn penalty(raw: &MvnnParams, cfg: &TrainConfig) -> f64 {
    let n = raw.layers.len();
    let mut total = 0.0;
    for (k, l) in raw.layers.iter().enumerate() {
        let hidden = k + 1 < n;
        total += cfg.l2 * l.weights.iter().map(|w| w * w).sum::<f64>();
        if hidden {
            total += cfg.l2 * l.bias.iter().map(|b| b * b).sum::<f64>();
        }
        if cfg.soft_monotonicity > 0.0 {
            total += cfg.soft_monotonicity * l.weights.iter().map(|w| (-w).max(0.0)).sum::<f64>();
            if hidden {
                total += cfg.soft_monotonicity * l.bias.iter().map(|b| b.max(0.0)).sum::<f64>();
            }
        }
    }
    total
}

/// Backpropagated gradient of [`loss`] with respect to the raw parameters.
///
/// Activation and loss kinks use the subgradient 0. The readout bias is fixed and
/// always receives a zero gradient.
pub fn gradient(raw: &MvnnParams, batch: &[(Bundle, f64)], cfg: &TrainConfig) -> Gradient {
    assert!(!batch.is_empty(), "gradient needs a non-empty batch");
    let eff = effective(raw, cfg);
    let mut g = Gradient::zeros_like(raw);
    let n_layers = eff.layers.len();
    let t = eff.cutoff;
    let scale = 1.0 / batch.len() as f64;

    for (x, y) in batch {
        let trace = eff.trace(x).expect("batch bundle has the network's width");
        let mut delta = vec![residual_slope(cfg.loss, trace.output - y) * scale];
        for k in (0..n_layers).rev() {
            let layer = &eff.layers[k];
            if k + 1 < n_layers {
                let pre = &trace.pre[k];
                for (d, &z) in delta.iter_mut().zip(pre) {
                    let active = match eff.activation {
                        Activation::BoundedRelu => z > 0.0 && z < t,
                        Activation::Relu => z > 0.0,
                    };
                    if !active {
                        *d = 0.0;
                    }
                }
                for (gb, d) in g.bias[k].iter_mut().zip(&delta) {
                    *gb += d;
                }
            }
            let gw = &mut g.weights[k];
            if k == 0 {
                let items: Vec<usize> = x.items().collect();
                for (r, d) in delta.iter().enumerate() {
                    if *d != 0.0 {
                        for &j in &items {
                            gw[r * layer.cols + j] += d;
                        }
                    }
                }
            } else {
                let input = &trace.post[k - 1];
                for (r, d) in delta.iter().enumerate() {
                    if *d != 0.0 {
                        for (c, h) in input.iter().enumerate() {
                            gw[r * layer.cols + c] += d * h;
                        }
                    }
                }
                let mut next = vec![0.0; layer.cols];
                for (r, d) in delta.iter().enumerate() {
                    if *d != 0.0 {
                        for (c, nx) in next.iter_mut().enumerate() {
                            *nx += layer.weight(r, c) * d;
                        }
                    }
                }
                delta = next;
            }
        }
    }

    for (k, l) in raw.layers.iter().enumerate() {
        let hidden = k + 1 < n_layers;
        for (gw, &w) in g.weights[k].iter_mut().zip(&l.weights) {
            *gw *= transform_slope(cfg, w, false);
            *gw += 2.0 * cfg.l2 * w;
            if cfg.soft_monotonicity > 0.0 && w < 0.0 {
                *gw -= cfg.soft_monotonicity;
            }
        }
        for (gb, &b) in g.bias[k].iter_mut().zip(&l.bias) {
            if !hidden {
                *gb = 0.0;
                continue;
            }
            *gb *= transform_slope(cfg, b, true);
            *gb += 2.0 * cfg.l2 * b;
            if cfg.soft_monotonicity > 0.0 && b > 0.0 {
                *gb += cfg.soft_monotonicity;
            }
        }
    }
    g
}

/// Outcome of comparing [`gradient`] against central finite differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
    pub skipped: usize,
}

/// Compares the analytic gradient with central differences of step `h`.
///
/// A coordinate is skipped when the perturbation moves any pre-activation or residual
/// across a kink (or within `margin` of one), or when the raw parameter sits within
/// `margin` of the reparametrization kink at zero. Relative errors use the denominator
/// `max(|analytic|, |numeric|, 1e-6)`.
pub fn gradient_check(
    raw: &MvnnParams,
    batch: &[(Bundle, f64)],
    cfg: &TrainConfig,
    h: f64,
    margin: f64,
) -> GradCheck {
    let analytic = gradient(raw, batch, cfg).flatten();
    let base = pattern(raw, batch, cfg, margin);
    let n_layers = raw.layers.len();
    let mut out = GradCheck {
        max_relative_error: 0.0,
        checked: 0,
        skipped: 0,
    };
    let mut idx = 0;
    for k in 0..n_layers {
        let nw = raw.layers[k].weights.len();
        let nb = raw.layers[k].bias.len();
        for c in 0..nw + nb {
            let is_bias = c >= nw;
            let flat = idx;
            idx += 1;
            if is_bias && k + 1 == n_layers {
                continue;
            }
            let value = |p: &MvnnParams| {
                let l = &p.layers[k];
                if is_bias { l.bias[c - nw] } else { l.weights[c] }
            };
            let shifted = |delta: f64| {
                let mut p = raw.clone();
                let l = &mut p.layers[k];
                if is_bias { l.bias[c - nw] += delta } else { l.weights[c] += delta }
                p
            };
            let transformed = cfg.soft_monotonicity == 0.0
                && matches!(cfg.variant, Variant::Abs | Variant::Relu);
            let (plus, minus) = (shifted(h), shifted(-h));
            let near_zero = transformed && value(raw).abs() < margin.max(h);
            let crosses_zero = cfg.soft_monotonicity > 0.0 && value(raw).abs() < margin.max(h);
            if near_zero
                || crosses_zero
                || pattern(&plus, batch, cfg, 0.0) != base
                || pattern(&minus, batch, cfg, 0.0) != base
                || base.contains(&Region::Kink)
            {
                out.skipped += 1;
                continue;
            }
            let numeric = (loss(&plus, batch, cfg) - loss(&minus, batch, cfg)) / (2.0 * h);
            let a = analytic[flat];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            out.max_relative_error = out.max_relative_error.max(rel);
            out.checked += 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Low,
    Active,
    High,
    Kink,
}

fn pattern(raw: &MvnnParams, batch: &[(Bundle, f64)], cfg: &TrainConfig, margin: f64) -> Vec<Region> {
    let eff = effective(raw, cfg);
    let t = match eff.activation {
        Activation::BoundedRelu => eff.cutoff,
        Activation::Relu => f64::INFINITY,
    };
    let classify = |z: f64, lo: f64, hi: f64| {
        if (z - lo).abs() <= margin || (z - hi).abs() <= margin {
            Region::Kink
        } else if z < lo {
            Region::Low
        } else if z > hi {
            Region::High
        } else {
            Region::Active
        }
    };
    let mut out = Vec::new();
    for (x, y) in batch {
        let tr = eff.trace(x).expect("batch width");
        out.extend(tr.pre.iter().flatten().map(|&z| classify(z, 0.0, t)));
        if cfg.loss == LossKind::Absolute {
            out.push(classify(tr.output - y, 0.0, f64::INFINITY));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvnn::Layer;

    #[test]
    fn readout_gradient_with_zero_targets() {
        let l1 = Layer::new(2, 2, vec![0.4, 0.3, 0.2, 0.5], vec![-0.1, 0.0]).unwrap();
        let ro = Layer::new(1, 2, vec![0.0, 0.0], vec![0.0]).unwrap();
        let p = MvnnParams::new(1.0, vec![l1, ro]).unwrap();
        let batch: Vec<(Bundle, f64)> = ["10", "11", "01"]
            .iter()
            .map(|s| (s.parse().unwrap(), 0.0))
            .collect();
        let cfg = TrainConfig {
            loss: LossKind::Squared,
            l2: 0.0,
            ..TrainConfig::default()
        };
        let g = gradient(&p, &batch, &cfg);
        // prediction 0 == target: squared-loss slope 0, everything vanishes
        assert!(g.flatten().iter().all(|&v| v == 0.0));

        let shifted: Vec<(Bundle, f64)> = batch.iter().map(|(x, _)| (x.clone(), -1.0)).collect();
        let g = gradient(&p, &shifted, &cfg);
        // d/dw_c mean (0 - (-1))^2 = mean(2 * h_c)
        let mut mean_h = [0.0; 2];
        for (x, _) in &shifted {
            let tr = p.trace(x).unwrap();
            for c in 0..2 {
                mean_h[c] += tr.post[0][c] / 3.0;
            }
        }
        for c in 0..2 {
            assert!((g.weights[1][c] - 2.0 * mean_h[c]).abs() < 1e-15);
        }
        assert_eq!(g.bias[1], vec![0.0]);
    }

    #[test]
    fn soft_penalty_gradient_on_negative_weight() {
        let l1 = Layer::new(1, 1, vec![-0.3], vec![-0.5]).unwrap();
        let ro = Layer::new(1, 1, vec![1.0], vec![0.0]).unwrap();
        let p = MvnnParams::new(1.0, vec![l1, ro]).unwrap();
        let cfg = TrainConfig {
            soft_monotonicity: 0.7,
            l2: 0.0,
            ..TrainConfig::default()
        };
        // dead neuron, predictions equal targets: only the penalty contributes
        let g = gradient(&p, &[("1".parse().unwrap(), 0.0)], &cfg);
        assert_eq!(g.weights[0][0], -0.7);
        assert_eq!(g.bias[0][0], 0.0);
    }

    #[test]
    fn matches_finite_differences() {
        use crate::bundle::all_bundles;
        use crate::mvnn::train::initialize;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let variant = [Variant::ReluProjected, Variant::Abs, Variant::Relu, Variant::Unconstrained]
                [seed as usize % 4];
            let cfg = TrainConfig {
                variant,
                loss: if seed % 2 == 0 { LossKind::Squared } else { LossKind::Absolute },
                l2: 1e-3,
                soft_monotonicity: if seed % 5 == 0 { 0.3 } else { 0.0 },
                ..TrainConfig::default()
            };
            let mut p = initialize(&[4, 5, 3, 1], &cfg, &mut rng).unwrap();
            for l in &mut p.layers {
                for w in &mut l.weights {
                    *w *= 3.0;
                }
            }
            let batch: Vec<_> = all_bundles(4).map(|x| (x, rng.gen_range(0.0..1.0))).collect();
            let check = gradient_check(&p, &batch, &cfg, 1e-5, 1e-4);
            assert!(check.checked > 0);
            assert!(check.max_relative_error <= 1e-4, "seed {seed}: {check:?}");
        }
    }
}
