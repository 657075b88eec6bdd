use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::enumerate::monotone_bnb;
use super::simplex::{DualSimplex, LpProblem, LpStatus};
use super::{relative_gap, Branching, SolveConfig, Solution, Status};
use crate::error::Result;
use crate::market::Allocation;
use crate::milp::{check_assignment, wdp_assignment, MilpModel, VarKind, WdpLayout};
use crate::mvnn::Activation;

struct Node {
    bound: f64,
    depth: usize,
    seq: u64,
    fixes: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    objective: f64,
    values: Vec<f64>,
    allocation: Option<Allocation>,
}

fn allocation_from(layout: &WdpLayout, x: &[f64]) -> Allocation {
    let mut owners = vec![None; layout.items];
    for (i, vars) in layout.alloc.iter().enumerate() {
        for (j, v) in vars.iter().enumerate() {
            if x[v.0] > 0.5 && owners[j].is_none() {
                owners[j] = Some(i);
            }
        }
    }
    Allocation::from_owners(layout.alloc.len(), &owners)
}

fn warm_incumbent(model: &MilpModel, cfg: &SolveConfig) -> Result<Option<Incumbent>> {
    let Some(layout) = &model.layout else {
        return Ok(None);
    };
    if layout.networks.is_empty()
        || !layout
            .networks
            .iter()
            .all(|p| p.is_projected() && p.activation == Activation::BoundedRelu)
    {
        return Ok(None);
    }
    let quick = SolveConfig {
        gap: cfg.gap,
        timeout_s: (cfg.timeout_s * 0.1).max(1e-3),
        warm_start: false,
        ..cfg.clone()
    };
    let sol = monotone_bnb(&layout.networks, layout.items, &quick)?;
    let Some(allocation) = sol.allocation else {
        return Ok(None);
    };
    match wdp_assignment(model, &allocation) {
        Ok(x) if check_assignment(model, &x, cfg.feasibility_tol).is_ok() => Ok(Some(Incumbent {
            objective: model.objective_value(&x),
            values: x,
            allocation: Some(allocation),
        })),
        Ok(_) => Ok(None),
        Err(_) => Ok(Some(Incumbent {
            objective: sol.objective,
            values: Vec::new(),
            allocation: Some(allocation),
        })),
    }
}

/// Best-first branch-and-bound on the binaries of `model`, re-solving each node's LP
/// relaxation from the previous node's basis.
pub fn solve_milp(model: &MilpModel, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    let start = Instant::now();
    let problem = LpProblem::relaxation(model);
    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let mut lp = DualSimplex::new(&problem);

    let mut incumbent = if cfg.warm_start { warm_incumbent(model, cfg)? } else { None };
    let prune_tol = |inc: f64| 1e-9 * inc.abs().max(1.0);

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: f64::INFINITY,
        depth: 0,
        seq,
        fixes: Vec::new(),
    });
    let mut nodes = 0u64;
    let mut status = Status::Optimal;
    let mut open_bound = f64::NEG_INFINITY;
    let mut lower = problem.lower.clone();
    let mut upper = problem.upper.clone();

    while let Some(node) = heap.peek() {
        let top = node.bound;
        if let Some(inc) = &incumbent {
            if top <= inc.objective + prune_tol(inc.objective) {
                break;
            }
            if top.is_finite() && cfg.gap > 0.0 && relative_gap(top, inc.objective) <= cfg.gap {
                status = Status::GapReached;
                open_bound = top;
                break;
            }
        }
        let out_of_time = start.elapsed().as_secs_f64() > cfg.timeout_s;
        let out_of_nodes = cfg.node_limit.is_some_and(|l| nodes >= l);
        if out_of_time || out_of_nodes {
            status = Status::Timeout;
            open_bound = top;
            break;
        }
        let node = heap.pop().expect("peeked");
        nodes += 1;

        lower.copy_from_slice(&problem.lower);
        upper.copy_from_slice(&problem.upper);
        for &(j, v) in &node.fixes {
            lower[j] = v;
            upper[j] = v;
        }
        lp.set_bounds(&lower, &upper);
        match lp.solve()? {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(crate::error::Error::Parameter(
                    "LP relaxation is unbounded; every variable must be box-bounded".into(),
                ))
            }
        }
        let value = lp.objective().min(node.bound);
        if let Some(inc) = &incumbent {
            if value <= inc.objective + prune_tol(inc.objective) {
                continue;
            }
        }
        let x = lp.x();
        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let f = x[j] - x[j].floor();
            let frac = f.min(1.0 - f);
            if frac <= cfg.integrality_tol {
                continue;
            }
            match cfg.branching {
                Branching::FirstFractional => {
                    branch = Some((j, frac));
                    break;
                }
                Branching::MostFractional => {
                    if branch.is_none_or(|(_, best)| frac > best) {
                        branch = Some((j, frac));
                    }
                }
            }
        }
        match branch {
            None => {
                let mut values = x.to_vec();
                for &j in &binaries {
                    values[j] = values[j].round();
                }
                let objective = model.objective_value(&values);
                if incumbent.as_ref().is_none_or(|inc| objective > inc.objective) {
                    let allocation = model.layout.as_ref().map(|l| allocation_from(l, &values));
                    incumbent = Some(Incumbent {
                        objective,
                        values,
                        allocation,
                    });
                }
            }
            Some((j, _)) => {
                for v in [1.0, 0.0] {
                    seq += 1;
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, v));
                    heap.push(Node {
                        bound: value,
                        depth: node.depth + 1,
                        seq,
                        fixes,
                    });
                }
            }
        }
    }

    let wall_time_s = start.elapsed().as_secs_f64();
    Ok(match incumbent {
        None => Solution {
            allocation: None,
            objective: f64::NEG_INFINITY,
            bound: if status == Status::Optimal { f64::NEG_INFINITY } else { open_bound },
            status: if status == Status::Optimal { Status::Infeasible } else { status },
            nodes,
            values: Vec::new(),
            wall_time_s,
        },
        Some(inc) => {
            let bound = if status == Status::Optimal {
                inc.objective
            } else {
                open_bound.max(inc.objective)
            };
            Solution {
                allocation: inc.allocation,
                objective: inc.objective,
                bound,
                status,
                nodes,
                values: inc.values,
                wall_time_s,
            }
        }
    })
}
