//! Monotone-value neural networks (MVNNs) and the machinery to run machine-learning
//! powered combinatorial auctions with them.
//!
//! The crate is organised bottom-up:
//!
//! * [`bundle`] and [`market`]: bundles, allocations, reports, welfare metrics.
//! * [`mvnn`]: the network class, gradients and constrained training.
//! * [`construct`]: exact constructive networks for tables and datasets.
//! * [`milp`]: the mixed-integer encoding of the winner-determination problem.
//! * [`solver`]: simplex, branch-and-bound and enumeration solvers.
//! * [`mlca`]: the iterative auction with VCG payments.
//! * [`prefgen`]: random monotone preference domains.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod construct;
pub mod error;
pub mod fixtures;
pub mod market;
pub mod milp;
pub mod mlca;
pub mod mvnn;
pub mod prefgen;
pub mod rng;
pub mod solver;
pub mod stats;

pub use bundle::Bundle;
pub use error::{Error, Result};
pub use market::{Allocation, ReportSet, ValueOracle};
pub use mvnn::MvnnParams;
