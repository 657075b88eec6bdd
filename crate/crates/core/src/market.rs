//! Allocations, reports, value oracles and welfare metrics.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{Error, Result};

/// Absolute tolerance used for value comparisons.
pub const VALUE_TOL: f64 = 1e-9;

/// A bidder's value function over bundles.
pub trait ValueOracle: Send + Sync {
    fn items(&self) -> usize;

    fn value(&self, bundle: &Bundle) -> f64;

    /// Whether the implementation guarantees monotone, normalized values.
    fn is_monotone(&self) -> bool {
        false
    }
}

impl<T: ValueOracle + ?Sized> ValueOracle for &T {
    fn items(&self) -> usize {
        (**self).items()
    }
    fn value(&self, bundle: &Bundle) -> f64 {
        (**self).value(bundle)
    }
    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
}

impl<T: ValueOracle + ?Sized> ValueOracle for Box<T> {
    fn items(&self) -> usize {
        (**self).items()
    }
    fn value(&self, bundle: &Bundle) -> f64 {
        (**self).value(bundle)
    }
    fn is_monotone(&self) -> bool {
        (**self).is_monotone()
    }
}

/// Checks that every item is held by at most one bundle.
pub fn is_feasible(bundles: &[Bundle]) -> Result<bool> {
    let Some(first) = bundles.first() else {
        return Ok(true);
    };
    let m = first.len();
    let mut taken = Bundle::empty(m);
    for b in bundles {
        b.check_len(m)?;
        if b.intersects(&taken) {
            return Ok(false);
        }
        taken = taken.union(b);
    }
    Ok(true)
}

/// One bundle per bidder, item-disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Bundle>", into = "Vec<Bundle>")]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn new(bundles: Vec<Bundle>) -> Result<Self> {
        if !is_feasible(&bundles)? {
            let m = bundles[0].len();
            let item = (0..m)
                .find(|&j| bundles.iter().filter(|b| b.contains(j)).count() > 1)
                .unwrap_or(0);
            return Err(Error::Infeasible { item });
        }
        Ok(Allocation { bundles })
    }

    pub fn empty(bidders: usize, items: usize) -> Self {
        Allocation {
            bundles: vec![Bundle::empty(items); bidders],
        }
    }

    /// Builds an allocation from an owner per item (`None` = unassigned).
    pub fn from_owners(bidders: usize, owners: &[Option<usize>]) -> Self {
        let mut bundles = vec![Bundle::empty(owners.len()); bidders];
        for (j, owner) in owners.iter().enumerate() {
            if let Some(i) = owner {
                bundles[*i].insert(j);
            }
        }
        Allocation { bundles }
    }

    pub fn bidders(&self) -> usize {
        self.bundles.len()
    }

    pub fn items(&self) -> usize {
        self.bundles.first().map_or(0, Bundle::len)
    }

    pub fn bundle(&self, bidder: usize) -> &Bundle {
        &self.bundles[bidder]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }
}

impl TryFrom<Vec<Bundle>> for Allocation {
    type Error = Error;
    fn try_from(bundles: Vec<Bundle>) -> Result<Self> {
        Allocation::new(bundles)
    }
}

impl From<Allocation> for Vec<Bundle> {
    fn from(a: Allocation) -> Self {
        a.bundles
    }
}

/// Reported bundle-value pairs of one bidder, in elicitation order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BidderReports {
    entries: IndexMap<Bundle, f64>,
}

impl BidderReports {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a report; rejects duplicates (exact bit pattern) and negative values.
    pub fn insert(&mut self, bundle: Bundle, value: f64) -> Result<()> {
        if !(value >= 0.0) {
            return Err(Error::Data(format!(
                "reported value for {bundle} must be non-negative, got {value}"
            )));
        }
        if self.entries.contains_key(&bundle) {
            return Err(Error::Data(format!("bundle {bundle} reported twice")));
        }
        self.entries.insert(bundle, value);
        Ok(())
    }

    pub fn get(&self, bundle: &Bundle) -> Option<f64> {
        self.entries.get(bundle).copied()
    }

    pub fn contains(&self, bundle: &Bundle) -> bool {
        self.entries.contains_key(bundle)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bundle, f64)> {
        self.entries.iter().map(|(b, v)| (b, *v))
    }

    pub fn bundles(&self) -> impl Iterator<Item = &Bundle> {
        self.entries.keys()
    }
}

/// Reports of all bidders.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReportSet {
    bidders: Vec<BidderReports>,
}

impl ReportSet {
    pub fn new(bidders: usize) -> Self {
        ReportSet {
            bidders: vec![BidderReports::new(); bidders],
        }
    }

    pub fn from_pairs(pairs: Vec<Vec<(Bundle, f64)>>) -> Result<Self> {
        let mut set = ReportSet::new(pairs.len());
        for (i, list) in pairs.into_iter().enumerate() {
            for (b, v) in list {
                set.insert(i, b, v)?;
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, bidder: usize, bundle: Bundle, value: f64) -> Result<()> {
        self.bidders[bidder].insert(bundle, value)
    }

    pub fn bidders(&self) -> usize {
        self.bidders.len()
    }

    pub fn bidder(&self, i: usize) -> &BidderReports {
        &self.bidders[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BidderReports> {
        self.bidders.iter()
    }
}

/// True social welfare: the sum of every bidder's value for its bundle.
pub fn social_welfare<O: ValueOracle>(allocation: &Allocation, oracles: &[O]) -> Result<f64> {
    if oracles.len() != allocation.bidders() {
        return Err(Error::Dimension {
            expected: allocation.bidders(),
            found: oracles.len(),
        });
    }
    if !is_feasible(allocation.bundles())? {
        return Err(Error::Infeasible { item: 0 });
    }
    Ok(allocation
        .bundles()
        .iter()
        .zip(oracles)
        .map(|(b, o)| o.value(b))
        .sum())
}

/// Reported social welfare: only bidders whose bundle was reported contribute.
pub fn reported_social_welfare(allocation: &Allocation, reports: &ReportSet) -> f64 {
    allocation
        .bundles()
        .iter()
        .zip(reports.iter())
        .filter_map(|(b, r)| r.get(b))
        .sum()
}

pub fn efficiency_loss(achieved: f64, optimal: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::Degenerate(optimal));
    }
    Ok((1.0 - achieved / optimal).clamp(0.0, 1.0))
}

pub fn relative_revenue(payments: &[f64], optimal: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::Degenerate(optimal));
    }
    Ok(payments.iter().sum::<f64>() / optimal)
}

/// A value oracle backed by a closure.
pub struct FnOracle<F> {
    items: usize,
    monotone: bool,
    f: F,
}

impl<F: Fn(&Bundle) -> f64 + Send + Sync> FnOracle<F> {
    pub fn new(items: usize, monotone: bool, f: F) -> Self {
        FnOracle { items, monotone, f }
    }
}

impl<F: Fn(&Bundle) -> f64 + Send + Sync> ValueOracle for FnOracle<F> {
    fn items(&self) -> usize {
        self.items
    }
    fn value(&self, bundle: &Bundle) -> f64 {
        (self.f)(bundle)
    }
    fn is_monotone(&self) -> bool {
        self.monotone
    }
}
