//! Mixed-integer linear models of the winner-determination problem over MVNN bidders.

mod bounds;
mod encode;
mod lp;

pub use bounds::{big_m, ia_bounds, prune, BigM, LayerBounds, NeuronBounds, PruneCase};
pub use encode::{
    check_assignment, encode_layer, encode_relu_wdp, encode_wdp, wdp_assignment, EncodeOptions,
    NeuronVars, Pruning,
};
pub use lp::{export_lp, parse_lp};

use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::mvnn::MvnnParams;

/// Multiplicative safety margin applied to big-M constants and IA box bounds.
pub const BIG_M_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    /// Whether `lhs (rel) rhs` holds up to `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * x[v.0]).sum()
    }
}

/// A linear expression `Σ c·x + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn add(&mut self, v: VarId, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push((v, c));
        }
        self
    }

    /// `self + factor * other`.
    pub fn plus(mut self, other: &LinExpr, factor: f64) -> Self {
        for &(v, c) in &other.terms {
            self.add(v, factor * c);
        }
        self.constant += factor * other.constant;
        self
    }
}

/// Where the pieces of a winner-determination model live.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WdpLayout {
    pub items: usize,
    /// `alloc[i][j]` is the binary for "item `j` goes to bidder `i`".
    pub alloc: Vec<Vec<VarId>>,
    /// Per bidder, per hidden layer, per neuron.
    pub neurons: Vec<Vec<Vec<NeuronVars>>>,
    /// The encoded networks, used by heuristics and assignment checks.
    pub networks: Vec<MvnnParams>,
}

/// Variables, rows and a maximization objective over box-bounded mixed-binary variables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Coefficients of the maximized objective.
    pub objective: Vec<(VarId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<WdpLayout>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.variables.len());
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        self.variables.push(Variable {
            name: name.into(),
            kind,
            lower,
            upper,
        });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Adds `expr (rel) rhs`, moving the expression's constant to the right-hand side.
    pub fn add_row(&mut self, name: impl Into<String>, expr: LinExpr, relation: Relation, rhs: f64) {
        let mut terms: Vec<(VarId, f64)> = Vec::with_capacity(expr.terms.len());
        for (v, c) in expr.terms {
            match terms.iter_mut().find(|(w, _)| *w == v) {
                Some(t) => t.1 += c,
                None => terms.push((v, c)),
            }
        }
        terms.retain(|t| t.1 != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs: rhs - expr.constant,
        });
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|(v, c)| c * x[v.0]).sum()
    }

    /// Largest violation of bounds, rows and integrality at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xv) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xv).max(xv - v.upper);
            if v.kind == VarKind::Binary {
                worst = worst.max((xv - xv.round()).abs());
            }
        }
        for c in &self.constraints {
            let a = c.activity(x);
            let viol = match c.relation {
                Relation::Le => a - c.rhs,
                Relation::Ge => c.rhs - a,
                Relation::Eq => (a - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Forbids bidder `bidder` from receiving exactly `bundle`:
    /// `Σ_{j∉B} a_ij − Σ_{j∈B} a_ij ≥ 1 − |B|`.
    pub fn exclude_bundle(&mut self, bidder: usize, bundle: &Bundle) {
        let layout = self.layout.as_ref().expect("exclusion cuts need a WDP layout");
        let mut expr = LinExpr::default();
        for (j, &v) in layout.alloc[bidder].iter().enumerate() {
            expr.add(v, if bundle.contains(j) { -1.0 } else { 1.0 });
        }
        let name = format!("exclude_{bidder}_{bundle}");
        self.add_row(name, expr, Relation::Ge, 1.0 - bundle.count() as f64);
    }
}
