//! Monotone-value neural networks: parameters, bounded-ReLU forward pass and
//! sign-constraint projections.
//!
//! A network maps a bundle `x` to `W_K φ(... φ(W_1 x + b_1) ...)` where `φ` is the
//! bounded ReLU `min(t, max(0, z))`. With non-negative weights, non-positive hidden
//! biases and a bias-free readout, the resulting value function is monotone and
//! assigns zero to the empty bundle.

mod grad;
mod train;

pub use grad::{gradient, gradient_check, loss, GradCheck, Gradient};
pub use train::{initialize, train, train_with_report, LossKind, Optimizer, TrainConfig, TrainReport};

use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::ValueOracle;

/// Bounded ReLU with cutoff `t`.
pub fn brelu(z: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("cutoff must be positive, got {t}")));
    }
    Ok(clamp(z, t))
}

#[inline]
fn clamp(z: f64, t: f64) -> f64 {
    z.max(0.0).min(t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    #[default]
    BoundedRelu,
    /// Plain rectifier; used only for the unconstrained comparison networks.
    Relu,
}

impl Activation {
    fn is_default(&self) -> bool {
        *self == Activation::BoundedRelu
    }
}

/// How the sign constraints are enforced during training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Project onto the feasible set before each forward pass; no gradient through the projection.
    #[default]
    ReluProjected,
    /// Parametrize weights as `|w|` and biases as `-|b|`.
    Abs,
    /// Parametrize weights as `max(0, w)` and biases as `-max(0, -b)`.
    Relu,
    /// No sign constraints, plain ReLU activations. Baseline only.
    Unconstrained,
}

impl Variant {
    fn weight(self, w: f64) -> f64 {
        match self {
            Variant::ReluProjected | Variant::Relu => w.max(0.0),
            Variant::Abs => w.abs(),
            Variant::Unconstrained => w,
        }
    }

    fn bias(self, b: f64) -> f64 {
        match self {
            Variant::ReluProjected | Variant::Relu => b.min(0.0),
            Variant::Abs => -b.abs(),
            Variant::Unconstrained => b,
        }
    }
}

/// One affine layer, weights stored row-major (`rows` outputs by `cols` inputs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: weights.len(),
            });
        }
        if bias.len() != rows {
            return Err(Error::Dimension {
                expected: rows,
                found: bias.len(),
            });
        }
        Ok(Layer {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension {
                expected: cols,
                found: bad.len(),
            });
        }
        Layer::new(rows.len(), cols, rows.concat(), bias)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    /// `W h + b` for a dense input.
    pub fn affine(&self, input: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let mut acc = 0.0;
                for (w, h) in self.row(r).iter().zip(input) {
                    acc += w * h;
                }
                acc + self.bias[r]
            })
            .collect()
    }

    /// `W x + b` for a binary input; sums the columns of the items present.
    pub fn affine_bundle(&self, x: &Bundle) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let mut acc = 0.0;
                for j in x.items() {
                    acc += row[j];
                }
                acc + self.bias[r]
            })
            .collect()
    }
}

/// Pre- and post-activation values of every hidden layer for one input.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
    pub output: f64,
}

/// Parameters of a (monotone-value) network. The last layer is the linear readout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvnnParams {
    pub cutoff: f64,
    pub layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Activation::is_default")]
    pub activation: Activation,
}

impl MvnnParams {
    pub fn new(cutoff: f64, layers: Vec<Layer>) -> Result<Self> {
        let p = MvnnParams {
            cutoff,
            layers,
            activation: Activation::BoundedRelu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    /// Checks shapes, the cutoff and the bias-free single-output readout.
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::Parameter(format!(
                "cutoff must be positive and finite, got {}",
                self.cutoff
            )));
        }
        let Some(readout) = self.layers.last() else {
            return Err(Error::Parameter("network has no layers".into()));
        };
        for l in &self.layers {
            if l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
                return Err(Error::Parameter(format!(
                    "layer storage does not match its {}x{} shape",
                    l.rows, l.cols
                )));
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::Parameter("non-finite parameter".into()));
            }
        }
        for pair in self.layers.windows(2) {
            if pair[1].cols != pair[0].rows {
                return Err(Error::Dimension {
                    expected: pair[0].rows,
                    found: pair[1].cols,
                });
            }
        }
        if readout.rows != 1 {
            return Err(Error::Dimension {
                expected: 1,
                found: readout.rows,
            });
        }
        if readout.bias.iter().any(|&b| b != 0.0) {
            return Err(Error::Parameter("readout bias must be zero".into()));
        }
        Ok(())
    }

    pub fn items(&self) -> usize {
        self.layers[0].cols
    }

    /// Layer widths `[m, d_1, ..., d_{K-1}, 1]`.
    pub fn architecture(&self) -> Vec<usize> {
        std::iter::once(self.items())
            .chain(self.layers.iter().map(|l| l.rows))
            .collect()
    }

    pub fn hidden(&self) -> &[Layer] {
        &self.layers[..self.layers.len() - 1]
    }

    pub fn readout(&self) -> &Layer {
        self.layers.last().expect("validated network has a readout")
    }

    #[inline]
    fn act(&self, z: f64) -> f64 {
        match self.activation {
            Activation::BoundedRelu => clamp(z, self.cutoff),
            Activation::Relu => z.max(0.0),
        }
    }

    pub fn forward(&self, x: &Bundle) -> Result<f64> {
        x.check_len(self.items())?;
        Ok(self.eval(x))
    }

    fn eval(&self, x: &Bundle) -> f64 {
        let (first, rest) = self.layers.split_first().expect("non-empty");
        if rest.is_empty() {
            let row = first.row(0);
            return x.items().map(|j| row[j]).sum::<f64>();
        }
        let mut h: Vec<f64> = first.affine_bundle(x).into_iter().map(|z| self.act(z)).collect();
        for (k, layer) in rest.iter().enumerate() {
            if k + 1 == rest.len() {
                return readout_dot(layer, &h);
            }
            h = layer.affine(&h).into_iter().map(|z| self.act(z)).collect();
        }
        unreachable!()
    }

    /// Forward pass recording every hidden pre- and post-activation.
    pub fn trace(&self, x: &Bundle) -> Result<Trace> {
        x.check_len(self.items())?;
        let mut pre = Vec::with_capacity(self.layers.len() - 1);
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() - 1);
        for (k, layer) in self.hidden().iter().enumerate() {
            let z = if k == 0 {
                layer.affine_bundle(x)
            } else {
                layer.affine(&post[k - 1])
            };
            post.push(z.iter().map(|&v| self.act(v)).collect());
            pre.push(z);
        }
        let output = match post.last() {
            Some(h) => readout_dot(self.readout(), h),
            None => self.eval(x),
        };
        Ok(Trace { pre, post, output })
    }

    /// True if all weights are non-negative and all hidden biases non-positive.
    pub fn is_projected(&self) -> bool {
        self.check_projected().is_ok()
    }

    pub fn check_projected(&self) -> Result<()> {
        for (k, l) in self.layers.iter().enumerate() {
            if let Some(i) = l.weights.iter().position(|&w| w < 0.0) {
                return Err(Error::Unprojected(format!(
                    "layer {} weight ({}, {}) = {} is negative",
                    k + 1,
                    i / l.cols,
                    i % l.cols,
                    l.weights[i]
                )));
            }
            if let Some(i) = l.bias.iter().position(|&b| b > 0.0) {
                return Err(Error::Unprojected(format!(
                    "layer {} bias {} = {} is positive",
                    k + 1,
                    i,
                    l.bias[i]
                )));
            }
        }
        Ok(())
    }

    /// Maps parameters onto the sign-constrained set using the variant's transform.
    pub fn project(&self, variant: Variant) -> MvnnParams {
        let n = self.layers.len();
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(k, l)| Layer {
                rows: l.rows,
                cols: l.cols,
                weights: l.weights.iter().map(|&w| variant.weight(w)).collect(),
                bias: if k + 1 == n {
                    vec![0.0; l.rows]
                } else {
                    l.bias.iter().map(|&b| variant.bias(b)).collect()
                },
            })
            .collect();
        MvnnParams {
            cutoff: self.cutoff,
            layers,
            activation: self.activation,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }
}

fn readout_dot(layer: &Layer, h: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (w, v) in layer.row(0).iter().zip(h) {
        acc += w * v;
    }
    acc
}

impl ValueOracle for MvnnParams {
    fn items(&self) -> usize {
        MvnnParams::items(self)
    }

    fn value(&self, bundle: &Bundle) -> f64 {
        debug_assert_eq!(bundle.len(), MvnnParams::items(self));
        self.eval(bundle)
    }

    fn is_monotone(&self) -> bool {
        self.is_projected()
    }
}
