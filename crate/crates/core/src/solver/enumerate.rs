use std::collections::HashSet;
use std::time::Instant;

use super::{SolveConfig, Solution, Status};
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::market::{Allocation, ValueOracle, VALUE_TOL};

/// Largest number of allocations `(n + 1)^m` that [`brute_force`] will enumerate.
pub const MAX_BRUTE_FORCE: u64 = 10_000_000;

const TABULATE_ITEMS: usize = 16;
const SPOT_CHECK_BUNDLES: u64 = 256;

fn check_items<O: ValueOracle>(oracles: &[O], items: usize) -> Result<()> {
    for (i, o) in oracles.iter().enumerate() {
        if o.items() != items {
            return Err(Error::Dimension {
                expected: items,
                found: o.items(),
            }
            .for_bidder(i));
        }
    }
    Ok(())
}

fn tabulate<O: ValueOracle>(oracle: &O, items: usize) -> Vec<f64> {
    (0..1u64 << items).map(|s| oracle.value(&Bundle::from_index(items, s))).collect()
}

/// Exhaustive maximum of `Σ_i v_i(a_i)` over all feasible allocations.
///
/// Allocations are visited in lexicographic order of the owner vector (item 0 most
/// significant, "unassigned" first); the first strict maximum wins.
pub fn brute_force<O: ValueOracle>(oracles: &[O], items: usize) -> Result<(f64, Allocation)> {
    check_items(oracles, items)?;
    let n = oracles.len();
    let count = (n as u64 + 1).checked_pow(items as u32).filter(|&c| c <= MAX_BRUTE_FORCE);
    if count.is_none() || items > 63 {
        return Err(Error::Size(format!(
            "{n} bidders and {items} items give more than {MAX_BRUTE_FORCE} allocations"
        )));
    }
    let tables: Vec<Vec<f64>> = oracles.iter().map(|o| tabulate(o, items)).collect();
    let welfare = |masks: &[u64]| -> f64 {
        let mut w = 0.0;
        for (t, &s) in tables.iter().zip(masks) {
            w += t[s as usize];
        }
        w
    };
    let mut digits = vec![0usize; items];
    let mut masks = vec![0u64; n];
    let mut best = welfare(&masks);
    let mut best_digits = digits.clone();
    'outer: loop {
        let mut j = items;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            let bit = 1u64 << j;
            let d = digits[j];
            if d > 0 {
                masks[d - 1] &= !bit;
            }
            if d < n {
                digits[j] = d + 1;
                masks[d] |= bit;
                break;
            }
            digits[j] = 0;
        }
        let w = welfare(&masks);
        if w > best {
            best = w;
            best_digits.copy_from_slice(&digits);
        }
    }
    let owners: Vec<Option<usize>> = best_digits.iter().map(|&d| d.checked_sub(1)).collect();
    Ok((best, Allocation::from_owners(n, &owners)))
}

fn spot_check<O: ValueOracle>(oracle: &O, items: usize, table: Option<&[f64]>) -> Result<()> {
    if oracle.is_monotone() {
        return Ok(());
    }
    let total = 1u64 << items;
    let step = (total / SPOT_CHECK_BUNDLES).max(1);
    let value = |s: u64| match table {
        Some(t) => t[s as usize],
        None => oracle.value(&Bundle::from_index(items, s)),
    };
    let mut s = total - 1;
    loop {
        let v = value(s);
        for j in 0..items {
            if s >> j & 1 == 1 {
                let w = value(s & !(1 << j));
                if w > v + VALUE_TOL {
                    return Err(Error::Domain {
                        property: "monotonicity",
                        witness: format!(
                            "v({}) = {w} > v({}) = {v}",
                            Bundle::from_index(items, s & !(1 << j)),
                            Bundle::from_index(items, s)
                        ),
                    });
                }
            }
        }
        if s < step {
            break;
        }
        s -= step;
    }
    Ok(())
}

struct Search<'a, O> {
    oracles: &'a [O],
    items: usize,
    tables: Option<Vec<Vec<f64>>>,
    forbidden: Vec<HashSet<u64>>,
    gap: f64,
    best: f64,
    best_owners: Option<Vec<Option<usize>>>,
    owners: Vec<Option<usize>>,
    pruned_bound: f64,
    nodes: u64,
    node_limit: u64,
    start: Instant,
    timeout_s: f64,
    stopped: bool,
}

impl<O: ValueOracle> Search<'_, O> {
    fn value(&self, i: usize, mask: u64) -> f64 {
        match &self.tables {
            Some(t) => t[i][mask as usize],
            None => self.oracles[i].value(&Bundle::from_index(self.items, mask)),
        }
    }

    fn allowed(&self, committed: &[u64]) -> bool {
        self.forbidden.iter().zip(committed).all(|(f, s)| !f.contains(s))
    }

    fn margin(&self) -> f64 {
        if self.best.is_finite() {
            self.gap * self.best.abs().max(1.0)
        } else {
            0.0
        }
    }

    fn dfs(&mut self, depth: usize, committed: &mut Vec<u64>, a: &[f64]) {
        self.nodes += 1;
        if self.nodes >= self.node_limit
            || (self.nodes.is_multiple_of(1024) && self.start.elapsed().as_secs_f64() > self.timeout_s)
        {
            self.stopped = true;
            return;
        }
        let n = self.oracles.len();
        if depth == self.items {
            let mut w = 0.0;
            for &v in a {
                w += v;
            }
            if w > self.best && self.allowed(committed) {
                self.best = w;
                self.best_owners = Some(self.owners.clone());
            }
            return;
        }
        let rest: u64 = if depth + 1 >= 64 { 0 } else { (!0u64 << (depth + 1)) & low_mask(self.items) };
        let b: Vec<f64> = (0..n).map(|i| self.value(i, committed[i] | rest)).collect();
        let mut children: Vec<(Option<usize>, f64)> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += if k == i { a[k] } else { b[k] };
            }
            children.push((Some(i), s));
        }
        let mut s = 0.0;
        for &v in &b {
            s += v;
        }
        children.push((None, s));
        children.sort_by(|x, y| y.1.total_cmp(&x.1));

        let bit = 1u64 << depth;
        let mut child_a = b.clone();
        for (owner, bound) in children {
            if bound <= self.best {
                break;
            }
            if bound <= self.best + self.margin() {
                self.pruned_bound = self.pruned_bound.max(bound);
                break;
            }
            child_a.copy_from_slice(&b);
            if let Some(i) = owner {
                child_a[i] = a[i];
                committed[i] |= bit;
            }
            self.owners[depth] = owner;
            self.dfs(depth + 1, committed, &child_a);
            if let Some(i) = owner {
                committed[i] &= !bit;
            }
            self.owners[depth] = None;
            if self.stopped {
                self.pruned_bound = self.pruned_bound.max(bound);
                return;
            }
        }
    }
}

fn low_mask(items: usize) -> u64 {
    if items >= 64 {
        !0
    } else {
        (1u64 << items) - 1
    }
}

/// Depth-first branch-and-bound over item-by-item assignments. Each node is bounded by
/// giving every undecided item to every bidder at once, which is an upper bound when all
/// value functions are monotone.
pub fn monotone_bnb<O: ValueOracle>(oracles: &[O], items: usize, cfg: &SolveConfig) -> Result<Solution> {
    monotone_bnb_excluding(oracles, items, cfg, &[])
}

/// [`monotone_bnb`] over allocations in which no bidder `i` receives a bundle listed in
/// `forbidden[i]`. An empty `forbidden` slice forbids nothing.
pub fn monotone_bnb_excluding<O: ValueOracle>(
    oracles: &[O],
    items: usize,
    cfg: &SolveConfig,
    forbidden: &[Vec<Bundle>],
) -> Result<Solution> {
    cfg.validate()?;
    check_items(oracles, items)?;
    if items > 63 {
        return Err(Error::Size(format!("{items} items exceed the 63-item search limit")));
    }
    let n = oracles.len();
    if !forbidden.is_empty() && forbidden.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: forbidden.len(),
        });
    }
    let start = Instant::now();
    let tables = (items <= TABULATE_ITEMS)
        .then(|| oracles.iter().map(|o| tabulate(o, items)).collect::<Vec<_>>());
    for (i, o) in oracles.iter().enumerate() {
        spot_check(o, items, tables.as_ref().map(|t| t[i].as_slice())).map_err(|e| e.for_bidder(i))?;
    }
    let forbidden: Vec<HashSet<u64>> = if forbidden.is_empty() {
        vec![HashSet::new(); n]
    } else {
        forbidden.iter().map(|f| f.iter().map(Bundle::index).collect()).collect()
    };
    let mut search = Search {
        oracles,
        items,
        tables,
        forbidden,
        gap: cfg.gap,
        best: f64::NEG_INFINITY,
        best_owners: None,
        owners: vec![None; items],
        pruned_bound: f64::NEG_INFINITY,
        nodes: 0,
        node_limit: cfg.node_limit.unwrap_or(u64::MAX),
        start,
        timeout_s: cfg.timeout_s,
        stopped: false,
    };
    let mut committed = vec![0u64; n];
    if search.allowed(&committed) {
        let mut w = 0.0;
        for i in 0..n {
            w += search.value(i, 0);
        }
        search.best = w;
        search.best_owners = Some(vec![None; items]);
    }
    let full = low_mask(items);
    let a: Vec<f64> = (0..n).map(|i| search.value(i, full)).collect();
    let mut root = 0.0;
    for &v in &a {
        root += v;
    }
    if root > search.best + search.margin() {
        search.dfs(0, &mut committed, &a);
    } else {
        search.nodes = 1;
        if root > search.best {
            search.pruned_bound = root;
        }
    }

    let wall_time_s = start.elapsed().as_secs_f64();
    let nodes = search.nodes;
    Ok(match search.best_owners {
        None => Solution {
            allocation: None,
            objective: f64::NEG_INFINITY,
            bound: if search.stopped { search.pruned_bound } else { f64::NEG_INFINITY },
            status: if search.stopped { Status::Timeout } else { Status::Infeasible },
            nodes,
            values: Vec::new(),
            wall_time_s,
        },
        Some(owners) => {
            let best = search.best;
            let bound = search.pruned_bound.max(best);
            let status = if search.stopped {
                Status::Timeout
            } else if bound > best {
                Status::GapReached
            } else {
                Status::Optimal
            };
            Solution {
                allocation: Some(Allocation::from_owners(n, &owners)),
                objective: best,
                bound,
                status,
                nodes,
                values: Vec::new(),
                wall_time_s,
            }
        }
    })
}
