//! Synthetic monotone preference domains built from randomly initialized MVNNs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::{Allocation, ValueOracle};
use crate::mvnn::{Layer, MvnnParams};
use crate::rng;
use crate::solver::{monotone_bnb, SolveConfig, Status};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub bidders: usize,
    pub items: usize,
    /// Layer widths including the input width `items` and the scalar readout.
    pub architecture: Vec<usize>,
    pub cutoff: f64,
    /// Weights are drawn from `U[0, weight_scale / fan_in]`.
    pub weight_scale: f64,
    /// Hidden biases are drawn from `U[bias_range.0, bias_range.1]`.
    pub bias_range: (f64, f64),
    /// Multiplier applied to the readout layer.
    pub value_scale: f64,
    pub seed: u64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            bidders: 3,
            items: 10,
            architecture: vec![10, 8, 8, 1],
            cutoff: 1.0,
            weight_scale: 4.0,
            bias_range: (-0.4, 0.0),
            value_scale: 1.0,
            seed: 0,
        }
    }
}

impl DomainSpec {
    /// A spec with the default sampling ranges and the given shape.
    pub fn new(bidders: usize, items: usize, hidden: &[usize], cutoff: f64, seed: u64) -> Self {
        let mut architecture = vec![items];
        architecture.extend_from_slice(hidden);
        architecture.push(1);
        DomainSpec {
            bidders,
            items,
            architecture,
            cutoff,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bidders == 0 || self.items == 0 {
            return Err(Error::Config("a domain needs at least one bidder and one item".into()));
        }
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::Config(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        let a = &self.architecture;
        if a.len() < 2 || a[0] != self.items || *a.last().unwrap() != 1 || a.contains(&0) {
            return Err(Error::Config(format!(
                "architecture {a:?} must start with {} inputs, end with 1 output and have no empty layer",
                self.items
            )));
        }
        let (lo, hi) = self.bias_range;
        if !(lo <= hi && hi <= 0.0) {
            return Err(Error::Config(format!("bias range [{lo}, {hi}] must lie in (-inf, 0]")));
        }
        if !(self.weight_scale >= 0.0) || !(self.value_scale > 0.0) {
            return Err(Error::Config("weight and value scales must be non-negative and positive".into()));
        }
        Ok(())
    }
}

/// The value network of bidder `bidder`, deterministic in `(spec.seed, bidder)`.
pub fn random_mvnn_oracle(spec: &DomainSpec, bidder: usize) -> Result<MvnnParams> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, &[rng::label::DOMAIN, bidder as u64]);
    let arch = &spec.architecture;
    let depth = arch.len() - 1;
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let (cols, rows) = (arch[k], arch[k + 1]);
        let hi = spec.weight_scale / cols as f64;
        let mut weights: Vec<f64> = (0..rows * cols).map(|_| rng.gen::<f64>() * hi).collect();
        let bias = if k + 1 == depth {
            for w in &mut weights {
                *w *= spec.value_scale;
            }
            vec![0.0; rows]
        } else {
            let (lo, hi) = spec.bias_range;
            (0..rows).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect()
        };
        layers.push(Layer::new(rows, cols, weights, bias)?);
    }
    MvnnParams::new(spec.cutoff, layers)
}

/// One network per bidder.
pub fn random_domain(spec: &DomainSpec) -> Result<Vec<MvnnParams>> {
    (0..spec.bidders).map(|i| random_mvnn_oracle(spec, i)).collect()
}

/// The welfare-maximizing allocation under the true values.
pub fn optimal_allocation<O: ValueOracle>(spec: &DomainSpec, oracles: &[O]) -> Result<(f64, Allocation)> {
    if oracles.len() != spec.bidders {
        return Err(Error::Dimension {
            expected: spec.bidders,
            found: oracles.len(),
        });
    }
    let cfg = SolveConfig {
        timeout_s: 3600.0,
        ..SolveConfig::exact()
    };
    let sol = monotone_bnb(oracles, spec.items, &cfg)?;
    match (sol.status, sol.allocation) {
        (Status::Optimal, Some(a)) => Ok((sol.objective, a)),
        _ => Err(Error::Size(format!(
            "optimal allocation for {} bidders and {} items not proven within the time limit",
            spec.bidders, spec.items
        ))),
    }
}

/// Fraction of sampled disjoint non-empty pairs `(A, B)` with `v(A ∪ B) < v(A) + v(B)`.
pub fn subadditivity_rate<O: ValueOracle, R: Rng>(oracle: &O, pairs: usize, rng: &mut R) -> f64 {
    let m = oracle.items();
    if m < 2 || pairs == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut drawn = 0usize;
    while drawn < pairs {
        let mut a = Bundle::empty(m);
        let mut b = Bundle::empty(m);
        for j in 0..m {
            match rng.gen_range(0..3) {
                0 => a.insert(j),
                1 => b.insert(j),
                _ => {}
            }
        }
        if a.is_empty() || b.is_empty() {
            continue;
        }
        drawn += 1;
        if oracle.value(&a.union(&b)) < oracle.value(&a) + oracle.value(&b) - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / pairs as f64
}
