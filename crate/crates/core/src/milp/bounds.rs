use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mvnn::{Layer, MvnnParams};

use super::BIG_M_MARGIN;

/// Interval bounds of one hidden layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerBounds {
    pub lower_pre: Vec<f64>,
    pub upper_pre: Vec<f64>,
    /// Upper bound of the post-activation; the lower bound is 0.
    pub upper: Vec<f64>,
}

/// Interval bounds for every hidden layer of a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronBounds {
    pub cutoff: f64,
    pub layers: Vec<LayerBounds>,
}

/// The four big-M constants of every hidden neuron, one vector per constant and layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    pub l1: Vec<Vec<f64>>,
    pub l2: Vec<Vec<f64>>,
    pub l3: Vec<Vec<f64>>,
    pub l4: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruneCase {
    /// The neuron is never active; its output is the constant 0.
    FixZero,
    /// The neuron never touches either kink; `z = o`.
    LinearPassthrough,
    /// The pre-activation is never negative, so `η = o` and the lower-kink rows vanish.
    DropEtaRows,
    /// The cutoff is never reached, so `z = η` and the upper-kink rows vanish.
    DropZRows,
    Full,
}

fn propagate(layer: &Layer, prev: Option<&[f64]>, ones: bool) -> Vec<f64> {
    match prev {
        None => {
            // Sum in the same order as the forward pass over a full or empty bundle.
            (0..layer.rows)
                .map(|r| {
                    let mut acc = 0.0;
                    if ones {
                        for &w in layer.row(r) {
                            acc += w;
                        }
                    }
                    acc + layer.bias[r]
                })
                .collect()
        }
        Some(h) => layer.affine(h),
    }
}

/// Forward interval propagation from the box `[0, 1]^m`.
///
/// For sign-constrained networks the upper bounds are attained at the full bundle and the
/// lower bounds at the empty bundle, so they are exact.
pub fn ia_bounds(p: &MvnnParams) -> Result<NeuronBounds> {
    p.check_projected()?;
    let t = p.cutoff;
    let mut layers: Vec<LayerBounds> = Vec::with_capacity(p.hidden().len());
    let mut up: Option<Vec<f64>> = None;
    let mut lo: Option<Vec<f64>> = None;
    for layer in p.hidden() {
        let upper_pre = propagate(layer, up.as_deref(), true);
        let lower_pre = propagate(layer, lo.as_deref(), false);
        let upper: Vec<f64> = upper_pre.iter().map(|&u| u.max(0.0).min(t)).collect();
        let lower_post: Vec<f64> = lower_pre.iter().map(|&l| l.max(0.0).min(t)).collect();
        up = Some(upper.clone());
        lo = Some(lower_post);
        layers.push(LayerBounds {
            lower_pre,
            upper_pre,
            upper,
        });
    }
    Ok(NeuronBounds { cutoff: t, layers })
}

/// Big-M constants `L1 = max(0, −b)`, `L2 = max(0, U_pre)`, `L3 = max(0, L2 − t)`, `L4 = t`,
/// each inflated by [`BIG_M_MARGIN`].
pub fn big_m(p: &MvnnParams, bounds: &NeuronBounds) -> BigM {
    let t = bounds.cutoff;
    let scale = 1.0 + BIG_M_MARGIN;
    let mut out = BigM {
        l1: Vec::new(),
        l2: Vec::new(),
        l3: Vec::new(),
        l4: Vec::new(),
    };
    for (layer, lb) in p.hidden().iter().zip(&bounds.layers) {
        let l2: Vec<f64> = lb.upper_pre.iter().map(|&u| u.max(0.0)).collect();
        out.l1.push(layer.bias.iter().map(|&b| (-b).max(0.0) * scale).collect());
        out.l3.push(l2.iter().map(|&v| (v - t).max(0.0) * scale).collect());
        out.l2.push(l2.iter().map(|&v| v * scale).collect());
        out.l4.push(vec![t * scale; layer.rows]);
    }
    out
}

/// Which rows a neuron needs given its interval bounds.
pub fn prune(lower_pre: f64, upper_pre: f64, cutoff: f64) -> PruneCase {
    if upper_pre <= 0.0 {
        PruneCase::FixZero
    } else if lower_pre >= 0.0 && upper_pre <= cutoff {
        PruneCase::LinearPassthrough
    } else if lower_pre >= 0.0 {
        PruneCase::DropEtaRows
    } else if upper_pre <= cutoff {
        PruneCase::DropZRows
    } else {
        PruneCase::Full
    }
}
