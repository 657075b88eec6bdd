//! Dense bounded-variable dual simplex.
//!
//! Every row `A_r x (rel) b_r` gets a slack `s_r = b_r − A_r x` whose bounds encode the
//! relation. Starting from the slack basis with each structural variable at the bound
//! favoured by its cost is dual feasible, so no phase one is needed, and the same basis
//! stays dual feasible under any change of structural bounds. Branch-and-bound exploits
//! this by re-solving every node from the current tableau.

use crate::error::{Error, Result};
use crate::milp::{MilpModel, Relation};

/// Stand-in for infinite structural bounds; hitting it means the LP is unbounded.
pub const ARTIFICIAL_BOUND: f64 = 1e9;

const PIVOT_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const INFEASIBLE_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 100;
const SMALL_PIVOT: f64 = 1e-5;
const RECOMPUTE_EVERY: usize = 32;
const DEGENERATE_STALL: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `max c·x` subject to rows and `lower ≤ x ≤ upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    /// The continuous relaxation of a MILP.
    pub fn relaxation(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let mut objective = vec![0.0; n];
        for (v, c) in &model.objective {
            objective[v.0] += c;
        }
        LpProblem {
            objective,
            rows: model
                .constraints
                .iter()
                .map(|c| LpRow {
                    terms: c.terms.iter().map(|(v, a)| (v.0, *a)).collect(),
                    relation: c.relation,
                    rhs: c.rhs,
                })
                .collect(),
            lower: model.variables.iter().map(|v| v.lower).collect(),
            upper: model.variables.iter().map(|v| v.upper).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Infeasible,
    /// Iteration limit, singular refactorization or an unconfirmed infeasibility.
    Suspect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

/// Solves an LP from scratch.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    let mut s = DualSimplex::new(problem);
    let status = s.solve()?;
    Ok(LpSolution {
        status,
        objective: if status == LpStatus::Optimal { s.objective() } else { f64::NAN },
        x: s.x().to_vec(),
        iterations: s.iterations,
    })
}

/// Reusable solver state; see the module documentation.
#[derive(Clone, Debug)]
pub struct DualSimplex {
    m: usize,
    n: usize,
    cols: usize,
    rows: Vec<LpRow>,
    rhs: Vec<f64>,
    /// Minimization costs over structurals and slacks.
    cost: Vec<f64>,
    /// `B⁻¹ [A | I]`, row-major `m × cols`.
    tab: Vec<f64>,
    /// `B⁻¹ b`.
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    d: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    infinite_lo: Vec<bool>,
    infinite_up: Vec<bool>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    pub iterations: usize,
}

impl DualSimplex {
    pub fn new(problem: &LpProblem) -> Self {
        let m = problem.rows.len();
        let n = problem.objective.len();
        let cols = n + m;
        let mut cost = vec![0.0; cols];
        for (j, c) in problem.objective.iter().enumerate() {
            cost[j] = -c;
        }
        let mut lo = vec![0.0; cols];
        let mut up = vec![0.0; cols];
        for (r, row) in problem.rows.iter().enumerate() {
            let (l, u) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo[n + r] = l;
            up[n + r] = u;
        }
        let mut s = DualSimplex {
            m,
            n,
            cols,
            rows: problem.rows.clone(),
            rhs: problem.rows.iter().map(|r| r.rhs).collect(),
            cost,
            tab: Vec::new(),
            beta: Vec::new(),
            basis: Vec::new(),
            state: Vec::new(),
            d: Vec::new(),
            lo,
            up,
            infinite_lo: vec![false; cols],
            infinite_up: vec![false; cols],
            x: vec![0.0; cols],
            pivots_since_refactor: 0,
            iterations: 0,
        };
        s.set_bounds(&problem.lower, &problem.upper);
        s.reset_basis();
        s
    }

    fn reset_basis(&mut self) {
        let (m, cols, n) = (self.m, self.cols, self.n);
        self.tab = vec![0.0; m * cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                self.tab[r * cols + j] += a;
            }
            self.tab[r * cols + n + r] = 1.0;
        }
        self.beta = self.rhs.clone();
        self.basis = (n..cols).collect();
        self.state = vec![State::Lower; cols];
        for r in 0..m {
            self.state[n + r] = State::Basic;
        }
        self.d = self.cost.clone();
        for j in 0..n {
            self.place_nonbasic(j);
        }
        self.pivots_since_refactor = 0;
    }

    /// Replaces the structural bounds; infinite ones become [`ARTIFICIAL_BOUND`].
    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        assert_eq!(lower.len(), self.n);
        assert_eq!(upper.len(), self.n);
        for j in 0..self.n {
            self.infinite_lo[j] = lower[j] == f64::NEG_INFINITY;
            self.infinite_up[j] = upper[j] == f64::INFINITY;
            self.lo[j] = lower[j].max(-ARTIFICIAL_BOUND);
            self.up[j] = upper[j].min(ARTIFICIAL_BOUND);
        }
        if !self.state.is_empty() {
            for j in 0..self.n {
                if self.state[j] != State::Basic {
                    self.place_nonbasic(j);
                }
            }
        }
    }

    /// Puts a nonbasic column on the bound its reduced cost asks for.
    fn place_nonbasic(&mut self, j: usize) {
        let keep_upper = self.state[j] == State::Upper && self.up[j].is_finite();
        let side = if self.d[j] > DUAL_TOL {
            State::Lower
        } else if self.d[j] < -DUAL_TOL || keep_upper {
            State::Upper
        } else {
            State::Lower
        };
        let side = match side {
            State::Lower if !self.lo[j].is_finite() => State::Upper,
            State::Upper if !self.up[j].is_finite() => State::Lower,
            s => s,
        };
        self.state[j] = side;
        self.x[j] = if side == State::Upper { self.up[j] } else { self.lo[j] };
    }

    pub fn x(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Objective value (maximization sense) at the current point.
    pub fn objective(&self) -> f64 {
        -(0..self.n).map(|j| self.cost[j] * self.x[j]).sum::<f64>()
    }

    fn compute_basic(&mut self) {
        let cols = self.cols;
        for r in 0..self.m {
            let row = &self.tab[r * cols..(r + 1) * cols];
            let mut v = self.beta[r];
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 && self.state[j] != State::Basic {
                    v -= a * self.x[j];
                }
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let cols = self.cols;
        let piv = self.tab[r * cols + e];
        {
            let row = &mut self.tab[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v /= piv;
            }
        }
        self.beta[r] /= piv;
        let (before, rest) = self.tab.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for (i, other) in before.chunks_mut(cols).chain(after.chunks_mut(cols)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = other[e];
            if f != 0.0 {
                for (o, p) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * p;
                }
                other[e] = 0.0;
                self.beta[i] -= f * self.beta[r];
            }
        }
        let f = self.d[e];
        if f != 0.0 {
            for (dj, p) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * p;
            }
            self.d[e] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = e;
        self.state[e] = State::Basic;
        self.state[leaving] = State::Lower;
        self.pivots_since_refactor += 1;
    }

    /// Rebuilds the tableau of the current basis from the original rows. Returns false if
    /// the basis is numerically singular.
    fn refactor(&mut self) -> bool {
        let (m, cols, n) = (self.m, self.cols, self.n);
        let mut tab = vec![0.0; m * cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                tab[r * cols + j] += a;
            }
            tab[r * cols + n + r] = 1.0;
        }
        let mut beta = self.rhs.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &col in &self.basis {
            let Some(r) = (0..m)
                .filter(|&r| !assigned[r])
                .max_by(|&a, &b| tab[a * cols + col].abs().total_cmp(&tab[b * cols + col].abs()))
            else {
                return false;
            };
            let piv = tab[r * cols + col];
            if piv.abs() < 1e-11 {
                return false;
            }
            for v in &mut tab[r * cols..(r + 1) * cols] {
                *v /= piv;
            }
            beta[r] /= piv;
            for i in 0..m {
                if i != r {
                    let f = tab[i * cols + col];
                    if f != 0.0 {
                        for j in 0..cols {
                            tab[i * cols + j] -= f * tab[r * cols + j];
                        }
                        beta[i] -= f * beta[r];
                    }
                }
            }
            assigned[r] = true;
            new_basis[r] = col;
        }
        self.tab = tab;
        self.beta = beta;
        self.basis = new_basis;
        self.d = self.cost.clone();
        for r in 0..m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                for j in 0..cols {
                    self.d[j] -= cb * self.tab[r * cols + j];
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
        self.pivots_since_refactor = 0;
        true
    }

    /// Moves nonbasic columns whose reduced cost has the wrong sign to the other bound.
    fn restore_dual_feasibility(&mut self) {
        for j in 0..self.cols {
            match self.state[j] {
                State::Lower if self.d[j] < -DUAL_TOL && self.up[j].is_finite() => {
                    self.state[j] = State::Upper;
                    self.x[j] = self.up[j];
                }
                State::Upper if self.d[j] > DUAL_TOL && self.lo[j].is_finite() => {
                    self.state[j] = State::Lower;
                    self.x[j] = self.lo[j];
                }
                _ => {}
            }
        }
    }

    fn max_row_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, row) in self.rows.iter().enumerate() {
            let a: f64 = row.terms.iter().map(|&(j, c)| c * self.x[j]).sum();
            let scale = 1.0 + row.rhs.abs();
            let v = match row.relation {
                Relation::Le => a - row.rhs,
                Relation::Ge => row.rhs - a,
                Relation::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(v / scale);
            let _ = r;
        }
        for j in 0..self.n {
            worst = worst.max(self.lo[j] - self.x[j]).max(self.x[j] - self.up[j]);
        }
        worst
    }

    /// Runs the dual simplex from the current basis.
    pub fn solve(&mut self) -> Result<LpStatus> {
        for j in 0..self.n {
            if self.lo[j] > self.up[j] {
                return Ok(LpStatus::Infeasible);
            }
        }
        let mut attempts = 0;
        loop {
            match self.iterate()? {
                Outcome::Optimal => {
                    if self.max_row_violation() <= 1e-7 {
                        let unbounded = (0..self.n).any(|j| {
                            (self.infinite_up[j] && self.x[j] >= ARTIFICIAL_BOUND * (1.0 - 1e-9))
                                || (self.infinite_lo[j]
                                    && self.x[j] <= -ARTIFICIAL_BOUND * (1.0 - 1e-9))
                        });
                        return Ok(if unbounded { LpStatus::Unbounded } else { LpStatus::Optimal });
                    }
                }
                Outcome::Infeasible => return Ok(LpStatus::Infeasible),
                Outcome::Suspect => {}
            }
            attempts += 1;
            if attempts == 1 && self.refactor() {
                self.restore_dual_feasibility();
                continue;
            }
            if attempts <= 2 {
                self.reset_basis();
                continue;
            }
            self.compute_basic();
            return Err(Error::Numerical {
                iterations: self.iterations,
                violation: self.max_row_violation(),
            });
        }
    }

    /// Recomputes tableau row `r` from the original rows through its slack columns and
    /// checks that no point in the variable box can bring basic variable `r` back to the
    /// bound it violates.
    fn certifies_infeasible(&self, r: usize, to_lower: bool) -> bool {
        let (n, cols) = (self.n, self.cols);
        let y = &self.tab[r * cols + n..(r + 1) * cols];
        let mut alpha = vec![0.0; cols];
        let mut rhs = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for &(j, a) in &row.terms {
                alpha[j] += y[i] * a;
            }
            alpha[n + i] = y[i];
            rhs += y[i] * self.rhs[i];
        }
        let b = self.basis[r];
        if (alpha[b] - 1.0).abs() > 1e-6 {
            return false;
        }
        // x_b = rhs − Σ_{j≠b} α_j x_j; bound its reachable range over the box.
        let (mut hi, mut lo) = (rhs, rhs);
        for j in 0..cols {
            let a = alpha[j];
            if j == b || a == 0.0 {
                continue;
            }
            let (l, u) = (self.lo[j], self.up[j]);
            let needed = if to_lower == (a > 0.0) { l } else { u };
            if !needed.is_finite() {
                if a.abs() <= 1e-9 {
                    continue;
                }
                return false;
            }
            if to_lower {
                hi -= a * needed;
            } else {
                lo -= a * needed;
            }
        }
        if to_lower {
            hi < self.lo[b] - INFEASIBLE_TOL * (1.0 + self.lo[b].abs())
        } else {
            lo > self.up[b] + INFEASIBLE_TOL * (1.0 + self.up[b].abs())
        }
    }

    /// Ratio test on row `r`: the entering column and its dual step length.
    ///
    /// Outside Bland mode this is a two-pass test. The first pass bounds the step by the
    /// smallest ratio with every reduced cost relaxed by the dual tolerance; the second
    /// takes the largest pivot among the columns whose exact ratio fits under that bound.
    fn entering(&self, r: usize, to_lower: bool, bland: bool) -> Option<(usize, f64)> {
        let row = &self.tab[r * self.cols..(r + 1) * self.cols];
        let eligible: Vec<(usize, f64, f64)> = row
            .iter()
            .enumerate()
            .filter_map(|(j, &alpha)| {
                if alpha.abs() <= PIVOT_TOL || self.lo[j] == self.up[j] {
                    return None;
                }
                let dj = match self.state[j] {
                    State::Basic => return None,
                    State::Lower if (alpha < 0.0) == to_lower => self.d[j].max(0.0),
                    State::Upper if (alpha > 0.0) == to_lower => (-self.d[j]).max(0.0),
                    _ => return None,
                };
                Some((j, dj, alpha.abs()))
            })
            .collect();
        if bland {
            let mut enter: Option<(usize, f64)> = None;
            for &(j, dj, a) in &eligible {
                let ratio = dj / a;
                if enter.is_none_or(|(_, r0)| ratio < r0 - 1e-12) {
                    enter = Some((j, ratio));
                }
            }
            return enter;
        }
        let bound = eligible
            .iter()
            .map(|&(_, dj, a)| (dj + DUAL_TOL) / a)
            .fold(f64::INFINITY, f64::min);
        let mut enter: Option<(usize, f64, f64)> = None;
        for &(j, dj, a) in &eligible {
            let ratio = dj / a;
            if ratio <= bound && enter.is_none_or(|(_, _, a0)| a > a0) {
                enter = Some((j, ratio, a));
            }
        }
        enter.map(|(j, ratio, _)| (j, ratio))
    }

    /// Dual simplex iterations until optimality, proven infeasibility, or trouble.
    fn iterate(&mut self) -> Result<Outcome> {
        let limit = 50 * (self.m + self.cols) + 1000;
        let mut stall = 0usize;
        let mut local = 0usize;
        let mut fresh = false;
        loop {
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    return Ok(Outcome::Suspect);
                }
                self.restore_dual_feasibility();
                fresh = false;
            }
            if !fresh && (local.is_multiple_of(RECOMPUTE_EVERY) || self.pivots_since_refactor == 0) {
                self.compute_basic();
                fresh = true;
            }
            let bland = stall > DEGENERATE_STALL;

            let mut candidates: Vec<(usize, f64, bool)> = Vec::new();
            for r in 0..self.m {
                let b = self.basis[r];
                let v = self.x[b];
                if v < self.lo[b] - PRIMAL_TOL * (1.0 + self.lo[b].abs()) {
                    candidates.push((r, self.lo[b] - v, true));
                } else if v > self.up[b] + PRIMAL_TOL * (1.0 + self.up[b].abs()) {
                    candidates.push((r, v - self.up[b], false));
                }
            }
            if bland {
                candidates.sort_by_key(|c| self.basis[c.0]);
            } else {
                candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            }
            let mut chosen = None;
            let mut skipped = false;
            for &(r, viol, to_lower) in &candidates {
                match self.entering(r, to_lower, bland) {
                    Some((e, ratio)) => {
                        chosen = Some((r, to_lower, e, ratio));
                        break;
                    }
                    None => {
                        let b = self.basis[r];
                        let bound = if to_lower { self.lo[b] } else { self.up[b] };
                        if viol > INFEASIBLE_TOL * (1.0 + bound.abs()) {
                            if !fresh {
                                break;
                            }
                            if self.certifies_infeasible(r, to_lower) {
                                return Ok(Outcome::Infeasible);
                            }
                            skipped = true;
                        }
                    }
                }
            }
            let Some((r, to_lower, e, ratio)) = chosen else {
                if fresh {
                    return Ok(if skipped { Outcome::Suspect } else { Outcome::Optimal });
                }
                self.compute_basic();
                fresh = true;
                continue;
            };

            if self.tab[r * self.cols + e].abs() < SMALL_PIVOT && self.pivots_since_refactor > 0 {
                if !self.refactor() {
                    return Ok(Outcome::Suspect);
                }
                self.restore_dual_feasibility();
                fresh = false;
                continue;
            }

            let leaving = self.basis[r];
            let target = if to_lower { self.lo[leaving] } else { self.up[leaving] };
            let cols = self.cols;
            let step = (self.x[leaving] - target) / self.tab[r * cols + e];
            for i in 0..self.m {
                let a = self.tab[i * cols + e];
                if a != 0.0 {
                    self.x[self.basis[i]] -= a * step;
                }
            }
            self.x[e] += step;
            self.pivot(r, e);
            self.state[leaving] = if to_lower { State::Lower } else { State::Upper };
            self.x[leaving] = target;
            fresh = false;
            stall = if ratio <= 1e-12 { stall + 1 } else { 0 };
            self.iterations += 1;
            local += 1;
            if local > limit {
                return Ok(Outcome::Suspect);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(terms: &[(usize, f64)], relation: Relation, rhs: f64) -> LpRow {
        LpRow {
            terms: terms.to_vec(),
            relation,
            rhs,
        }
    }

    #[test]
    fn single_bounded_variable() {
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![],
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.x, vec![1.0]);
    }

    #[test]
    fn simple_packing_row() {
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Relation::Le, 1.0)],
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36
        let p = LpProblem {
            objective: vec![3.0, 5.0],
            rows: vec![
                row(&[(0, 1.0)], Relation::Le, 4.0),
                row(&[(1, 2.0)], Relation::Le, 12.0),
                row(&[(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
            ],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY],
        };
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x − y, x + y = 2, x − y ≥ −1, x ≤ 1.5 → x = 1.5, y = 0.5
        let p = LpProblem {
            objective: vec![1.0, -1.0],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Relation::Eq, 2.0),
                row(&[(0, 1.0), (1, -1.0)], Relation::Ge, -1.0),
            ],
            lower: vec![0.0, 0.0],
            upper: vec![1.5, 10.0],
        };
        let s = solve_lp(&p).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![row(&[(0, 1.0)], Relation::Ge, 2.0)],
            lower: vec![0.0],
            upper: vec![1.0],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![row(&[(0, 1.0)], Relation::Ge, 2.0)],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn warm_start_after_bound_change() {
        let p = LpProblem {
            objective: vec![2.0, 3.0, 1.0],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Le, 1.5),
                row(&[(0, 1.0), (1, -1.0)], Relation::Ge, -0.5),
            ],
            lower: vec![0.0; 3],
            upper: vec![1.0; 3],
        };
        let mut s = DualSimplex::new(&p);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        let cold = s.objective();
        s.set_bounds(&[0.0, 0.0, 0.0], &[1.0, 0.0, 1.0]);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        let mut fresh = p.clone();
        fresh.upper[1] = 0.0;
        let reference = solve_lp(&fresh).unwrap();
        assert!((s.objective() - reference.objective).abs() < 1e-9);
        s.set_bounds(&p.lower, &p.upper);
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        assert!((s.objective() - cold).abs() < 1e-9);
    }
}
