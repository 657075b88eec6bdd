//! Exact solvers for the winner-determination problem.
//!
//! * [`solve_lp`] / [`DualSimplex`]: dense bounded dual simplex for LP relaxations.
//! * [`solve_milp`]: best-first branch-and-bound over the binaries of a [`MilpModel`].
//! * [`monotone_bnb`]: depth-first search over allocations, bounded by monotonicity.
//! * [`brute_force`]: exhaustive enumeration, used as an oracle.
//! * [`runtime_compare`]: timing harness comparing the MVNN and plain-ReLU encodings.
//!
//! [`MilpModel`]: crate::milp::MilpModel

mod bench;
mod bnb;
mod enumerate;
mod simplex;

pub use bench::{runtime_compare, BenchInstance, BenchRecord, BenchReport, BenchRow, Encoding};
pub use bnb::solve_milp;
pub use enumerate::{brute_force, monotone_bnb, monotone_bnb_excluding, MAX_BRUTE_FORCE};
pub use simplex::{solve_lp, DualSimplex, LpProblem, LpRow, LpSolution, LpStatus, ARTIFICIAL_BOUND};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::Allocation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Branching {
    #[default]
    MostFractional,
    FirstFractional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Relative optimality gap at which the search stops.
    pub gap: f64,
    /// Wall-clock limit in seconds.
    pub timeout_s: f64,
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    pub branching: Branching,
    /// Seed branch-and-bound with the allocation found by [`monotone_bnb`].
    pub warm_start: bool,
    /// Optional cap on explored nodes; reaching it reports [`Status::Timeout`].
    pub node_limit: Option<u64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            gap: 1e-2,
            timeout_s: 300.0,
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            branching: Branching::MostFractional,
            warm_start: true,
            node_limit: None,
        }
    }
}

impl SolveConfig {
    /// The default configuration with a zero gap.
    pub fn exact() -> Self {
        SolveConfig {
            gap: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap >= 0.0) || !self.gap.is_finite() {
            return Err(Error::Config(format!("gap must be a finite value ≥ 0, got {}", self.gap)));
        }
        if !(self.timeout_s > 0.0) {
            return Err(Error::Config(format!("timeout must be positive, got {}", self.timeout_s)));
        }
        if !(self.feasibility_tol > 0.0) || !(self.integrality_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.integrality_tol >= 0.5 {
            return Err(Error::Config("integrality tolerance must be below 0.5".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    GapReached,
    Timeout,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// `None` when the model is infeasible or carries no allocation layout.
    pub allocation: Option<Allocation>,
    /// Incumbent objective; `-inf` (serialized as `null`) without an incumbent.
    pub objective: f64,
    /// Best proven upper bound.
    pub bound: f64,
    pub status: Status,
    pub nodes: u64,
    /// Primal values of the model variables (empty for allocation-space solvers).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl Solution {
    /// `(bound − objective) / max(1, |objective|)`.
    pub fn relative_gap(&self) -> f64 {
        if !self.objective.is_finite() {
            return f64::INFINITY;
        }
        ((self.bound - self.objective) / self.objective.abs().max(1.0)).max(0.0)
    }
}

pub(crate) fn relative_gap(bound: f64, incumbent: f64) -> f64 {
    (bound - incumbent) / incumbent.abs().max(1.0)
}
