use crate::bundle::Bundle;
use crate::market::{Allocation, ReportSet, VALUE_TOL};

struct Options {
    /// Per bidder: reported bundles as item masks with values, best first.
    bids: Vec<Vec<(Vec<u64>, f64)>>,
    /// Upper bound on the value the bidders from index `k` onwards can still add.
    tail: Vec<f64>,
}

fn words(b: &Bundle) -> Vec<u64> {
    let m = b.len();
    let mut w = vec![0u64; m.div_ceil(64).max(1)];
    for j in b.items() {
        w[j / 64] |= 1 << (j % 64);
    }
    w
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

fn options(reports: &ReportSet, active: &[bool]) -> Options {
    let mut bids = Vec::with_capacity(reports.bidders());
    for (i, r) in reports.iter().enumerate() {
        let mut list: Vec<(Vec<u64>, f64)> = if active[i] {
            r.iter()
                .filter(|(b, v)| !b.is_empty() && *v > 0.0)
                .map(|(b, v)| (words(b), v))
                .collect()
        } else {
            Vec::new()
        };
        list.sort_by(|a, b| b.1.total_cmp(&a.1));
        bids.push(list);
    }
    let mut tail = vec![0.0; bids.len() + 1];
    for k in (0..bids.len()).rev() {
        tail[k] = tail[k + 1] + bids[k].first().map_or(0.0, |b| b.1);
    }
    Options { bids, tail }
}

struct Dfs<'a> {
    opts: &'a Options,
    chosen: Vec<Option<usize>>,
    best: f64,
    best_chosen: Vec<Option<usize>>,
}

impl Dfs<'_> {
    fn run(&mut self, k: usize, taken: &mut Vec<u64>, value: f64) {
        if k == self.opts.bids.len() {
            if value > self.best + VALUE_TOL {
                self.best = value;
                self.best_chosen.clone_from(&self.chosen);
            }
            return;
        }
        if value + self.opts.tail[k] <= self.best + VALUE_TOL {
            return;
        }
        for (idx, (mask, v)) in self.opts.bids[k].iter().enumerate() {
            if value + v + self.opts.tail[k + 1] <= self.best + VALUE_TOL {
                break;
            }
            if !disjoint(mask, taken) {
                continue;
            }
            for (t, w) in taken.iter_mut().zip(mask) {
                *t |= w;
            }
            self.chosen[k] = Some(idx);
            self.run(k + 1, taken, value + v);
            self.chosen[k] = None;
            for (t, w) in taken.iter_mut().zip(mask) {
                *t &= !w;
            }
        }
        self.run(k + 1, taken, value);
    }
}

/// Exact reported-welfare maximum over bidders with `active[i]`; inactive bidders and
/// bidders left unserved receive the empty bundle.
pub(crate) fn best_over(reports: &ReportSet, items: usize, active: &[bool]) -> (f64, Allocation) {
    let opts = options(reports, active);
    let n = reports.bidders();
    let mut dfs = Dfs {
        opts: &opts,
        chosen: vec![None; n],
        best: 0.0,
        best_chosen: vec![None; n],
    };
    let mut taken = vec![0u64; items.div_ceil(64).max(1)];
    dfs.run(0, &mut taken, 0.0);
    let mut bundles = vec![Bundle::empty(items); n];
    for (i, c) in dfs.best_chosen.iter().enumerate() {
        if let Some(idx) = c {
            let mask = &opts.bids[i][*idx].0;
            for j in 0..items {
                if mask[j / 64] >> (j % 64) & 1 == 1 {
                    bundles[i].insert(j);
                }
            }
        }
    }
    let welfare = (0..n)
        .map(|i| reports.bidder(i).get(&bundles[i]).unwrap_or(0.0))
        .sum();
    (welfare, Allocation::new(bundles).expect("search keeps bundles disjoint"))
}

fn items_of(reports: &ReportSet) -> usize {
    reports
        .iter()
        .find_map(|r| r.bundles().next().map(Bundle::len))
        .unwrap_or(0)
}

/// The allocation maximizing reported social welfare, where every bidder receives a
/// bundle it reported or nothing.
pub fn wdp_over_reports(reports: &ReportSet) -> Allocation {
    let items = items_of(reports);
    best_over(reports, items, &vec![true; reports.bidders()]).1
}

/// VCG payments from reports: the reported welfare the others would get without bidder
/// `i`, minus what they get in the chosen allocation.
pub fn vcg_payments(reports: &ReportSet) -> Vec<f64> {
    let items = items_of(reports);
    let n = reports.bidders();
    let (_, main) = best_over(reports, items, &vec![true; n]);
    let values: Vec<f64> = (0..n)
        .map(|i| reports.bidder(i).get(main.bundle(i)).unwrap_or(0.0))
        .collect();
    (0..n)
        .map(|i| {
            let mut active = vec![true; n];
            active[i] = false;
            let (without, _) = best_over(reports, items, &active);
            let others: f64 = (0..n).filter(|&j| j != i).map(|j| values[j]).sum();
            let p = without - others;
            if p < 0.0 && p > -1e-9 {
                0.0
            } else {
                p
            }
        })
        .collect()
}
