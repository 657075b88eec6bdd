//! Exact constructive networks for complete value tables and finite datasets.
//!
//! Both constructions sort the bundles by value (ties by integer index, which puts
//! every superset after its subsets), emit one first-layer neuron per bundle that
//! fires whenever the input is not contained in it, and accumulate step heights
//! through a lower-triangular second layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{all_bundles, Bundle};
use crate::error::{Error, Result};
use crate::market::ValueOracle;
use crate::mvnn::{Layer, MvnnParams};

/// Largest item count accepted by [`exact_mvnn`].
pub const MAX_EXACT_ITEMS: usize = 12;
/// Largest item count a [`ValueTable`] can hold.
pub const MAX_TABLE_ITEMS: usize = 24;

/// A complete, normalized, monotone value function over `{0,1}^m`, indexed by bundle integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct ValueTable {
    items: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    items: usize,
    values: Vec<f64>,
}

impl TryFrom<TableRepr> for ValueTable {
    type Error = Error;
    fn try_from(r: TableRepr) -> Result<Self> {
        ValueTable::new(r.items, r.values)
    }
}

impl From<ValueTable> for TableRepr {
    fn from(t: ValueTable) -> Self {
        TableRepr {
            items: t.items,
            values: t.values,
        }
    }
}

impl ValueTable {
    /// Validates completeness, normalization and monotonicity.
    pub fn new(items: usize, values: Vec<f64>) -> Result<Self> {
        if items > MAX_TABLE_ITEMS {
            return Err(Error::Size(format!(
                "value tables support at most {MAX_TABLE_ITEMS} items, got {items}"
            )));
        }
        if values.len() != 1usize << items {
            return Err(Error::Dimension {
                expected: 1 << items,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain {
                property: "non-negativity",
                witness: format!("v({}) = {}", Bundle::from_index(items, i as u64), values[i]),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::Domain {
                property: "normalization",
                witness: format!("v({}) = {}", Bundle::empty(items), values[0]),
            });
        }
        for idx in 0..values.len() {
            for j in 0..items {
                let bit = 1 << j;
                if idx & bit != 0 && values[idx ^ bit] > values[idx] {
                    return Err(Error::Domain {
                        property: "monotonicity",
                        witness: format!(
                            "v({}) = {} > v({}) = {}",
                            Bundle::from_index(items, (idx ^ bit) as u64),
                            values[idx ^ bit],
                            Bundle::from_index(items, idx as u64),
                            values[idx]
                        ),
                    });
                }
            }
        }
        Ok(ValueTable { items, values })
    }

    /// Tabulates an oracle on every bundle.
    pub fn from_oracle<O: ValueOracle + ?Sized>(oracle: &O) -> Result<Self> {
        let m = oracle.items();
        if m > MAX_TABLE_ITEMS {
            return Err(Error::Size(format!("cannot tabulate {m} items")));
        }
        ValueTable::new(m, all_bundles(m).map(|b| oracle.value(&b)).collect())
    }

    /// A random monotone normalized table: i.i.d. raw values closed under
    /// `v(B) = max(raw(B), max_j v(B \ {j}))`.
    pub fn random_monotone<R: Rng>(items: usize, rng: &mut R) -> Self {
        assert!(items <= MAX_TABLE_ITEMS);
        let mut values = vec![0.0; 1 << items];
        // ascending index visits every subset before its supersets
        for idx in 1..values.len() {
            let mut v: f64 = rng.gen_range(0.0..1.0) * (idx as u32).count_ones() as f64;
            for j in 0..items {
                if idx & (1 << j) != 0 {
                    v = v.max(values[idx ^ (1 << j)]);
                }
            }
            values[idx] = v;
        }
        ValueTable { items, values }
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }
}

impl ValueOracle for ValueTable {
    fn items(&self) -> usize {
        self.items
    }

    fn value(&self, bundle: &Bundle) -> f64 {
        self.values[bundle.index() as usize]
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Builds the network for points already sorted by `(value, bundle)`, starting with the empty bundle.
fn step_network(items: usize, sorted: &[(Bundle, f64)]) -> MvnnParams {
    debug_assert!(sorted[0].0.is_empty() && sorted[0].1 == 0.0);
    let width = (sorted.len() - 1).max(1);
    let mut l1 = Layer::zeros(width, items);
    let mut l2 = Layer::zeros(width, width);
    let mut readout = Layer::zeros(1, width);
    if sorted.len() > 1 {
        for (l, (x, _)) in sorted[..width].iter().enumerate() {
            for j in 0..items {
                if !x.contains(j) {
                    l1.weights[l * items + j] = 1.0;
                }
            }
            for c in 0..=l {
                l2.weights[l * width + c] = 1.0;
            }
            l2.bias[l] = -(l as f64);
            readout.weights[l] = sorted[l + 1].1 - sorted[l].1;
        }
    }
    MvnnParams::new(1.0, vec![l1, l2, readout]).expect("construction yields a valid network")
}

fn sort_points(points: &mut [(Bundle, f64)]) {
    points.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
}

/// Network of widths `[m, 2^m - 1, 2^m - 1, 1]` that reproduces `table` on every bundle.
pub fn exact_mvnn(table: &ValueTable) -> Result<MvnnParams> {
    let m = table.items();
    if m > MAX_EXACT_ITEMS {
        return Err(Error::Size(format!(
            "exact construction supports at most {MAX_EXACT_ITEMS} items, got {m}"
        )));
    }
    let mut points: Vec<(Bundle, f64)> = all_bundles(m)
        .zip(table.values().iter().copied())
        .collect();
    sort_points(&mut points);
    Ok(step_network(m, &points))
}

/// Network of widths `[m, q, q, 1]` that fits every data point exactly, where `q` is the
/// number of non-empty data bundles (at least 1).
pub fn interpolate(data: &[(Bundle, f64)]) -> Result<MvnnParams> {
    let Some(first) = data.first() else {
        return Err(Error::Data("interpolation needs at least one data point".into()));
    };
    let m = first.0.len();
    let mut points: Vec<(Bundle, f64)> = Vec::with_capacity(data.len() + 1);
    let mut seen = std::collections::HashSet::new();
    for (b, v) in data {
        b.check_len(m)?;
        if !seen.insert(b) {
            return Err(Error::Data(format!("bundle {b} appears twice")));
        }
        if !(*v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                property: "non-negativity",
                witness: format!("v({b}) = {v}"),
            });
        }
        if b.is_empty() && *v != 0.0 {
            return Err(Error::Domain {
                property: "normalization",
                witness: format!("v({b}) = {v}"),
            });
        }
        points.push((b.clone(), *v));
    }
    for (a, va) in &points {
        for (b, vb) in &points {
            if a != b && a.is_subset(b) && va > vb {
                return Err(Error::Domain {
                    property: "monotonicity",
                    witness: format!("v({a}) = {va} > v({b}) = {vb}"),
                });
            }
        }
    }
    if !seen.contains(&Bundle::empty(m)) {
        points.push((Bundle::empty(m), 0.0));
    }
    sort_points(&mut points);
    Ok(step_network(m, &points))
}
