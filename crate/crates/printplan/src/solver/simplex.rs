//! Dense-tableau bounded-variable simplex.
//!
//! Every row `a·x (≤,=,≥) b` gets a slack `s` with `a·x + s = b`, so row
//! senses become slack bounds (`≤`: s ≥ 0, `≥`: s ≤ 0, `=`: s = 0). Rows are
//! scaled by their largest coefficient before anything else happens.
//!
//! Two drivers share one tableau:
//! * a two-phase primal simplex started from the slack basis, with
//!   artificial columns for rows whose slack cannot absorb the residual;
//! * a dual simplex used to re-optimize after bound changes, which is what
//!   branch-and-bound does at every node.
//!
//! Both use a Harris two-pass ratio test and fall back to Bland's rule after
//! a run of degenerate pivots.

use std::time::Instant;

use thiserror::Error;

pub(crate) const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 60;
const PERTURBATION: f64 = 1e-6;
const DRIFT_TOL: f64 = 1e-7;
const MAX_ENTRY: f64 = 1e10;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program `min c·x` over rows and column bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn with_columns(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![f64::INFINITY; n], cost: vec![0.0; n], rows: Vec::new() }
    }

    pub fn add_column(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.push(cost);
        self.lower.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(LpRow { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest scaled violation of any row or column bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let scale = row.coeffs.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max).max(1e-300);
            let act: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol / scale);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),
    #[error("numerical instability: {0}")]
    Numerical(String),
    #[error("inconsistent bounds on column {0}")]
    InconsistentBounds(usize),
    #[error("deadline passed during simplex")]
    Deadline,
}

/// Row-scaled problem in slack form, shared by every tableau built from it.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub m: usize,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Bounds for the n structural columns followed by the m slacks.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cost: Vec<f64>,
    /// Pivoting loops give up with [`LpError::Deadline`] past this instant.
    pub deadline: Option<Instant>,
}

impl StandardForm {
    pub fn new(lp: &LpProblem) -> Self {
        let n = lp.num_cols();
        let m = lp.rows.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for row in &lp.rows {
            // merge duplicate column entries
            let mut coeffs: Vec<(usize, f64)> = row.coeffs.clone();
            coeffs.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
            for (j, a) in coeffs {
                match merged.last_mut() {
                    Some((k, b)) if *k == j => *b += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            let scale = merged.iter().map(|(_, a)| a.abs()).fold(0.0, f64::max);
            let scale = if scale > 0.0 { scale } else { 1.0 };
            rows.push(merged.into_iter().map(|(j, a)| (j, a / scale)).collect());
            rhs.push(row.rhs / scale);
            let (lo, hi) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
        }
        Self { n, m, rows, rhs, lower, upper, cost: lp.cost.clone(), deadline: None }
    }
}

/// Which basis a tableau has: the basic variable of every row plus the bound
/// each nonbasic variable sits at. Enough to rebuild the tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSnapshot {
    pub(crate) basic: Vec<usize>,
    pub(crate) at_upper: Vec<bool>,
}

impl BasisSnapshot {
    pub fn structural_basic_count(&self, n: usize) -> usize {
        self.basic.iter().filter(|&&b| b < n).count()
    }
}

#[derive(Clone)]
pub(crate) struct Tableau<'a> {
    sf: &'a StandardForm,
    /// Total variable count: structurals, slacks, artificials.
    width: usize,
    stride: usize,
    /// (m + 1) rows of `stride` entries; column `width` holds B⁻¹b and the
    /// last row holds reduced costs.
    t: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    at_upper: Vec<bool>,
    cost: Vec<f64>,
    artificials: usize,
    pub pivots: usize,
    nz: Vec<usize>,
}

impl<'a> Tableau<'a> {
    /// Tableau at the all-slack basis with structurals at a finite bound.
    pub fn slack_basis(sf: &'a StandardForm) -> Self {
        Self::build(sf, 0)
    }

    fn build(sf: &'a StandardForm, artificials: usize) -> Self {
        let (n, m) = (sf.n, sf.m);
        let width = n + m + artificials;
        let stride = width + 1;
        let mut t = vec![0.0; (m + 1) * stride];
        for (i, row) in sf.rows.iter().enumerate() {
            let base = i * stride;
            for &(j, a) in row {
                t[base + j] = a;
            }
            t[base + n + i] = 1.0;
            t[base + width] = sf.rhs[i];
        }
        let mut lower = sf.lower.clone();
        let mut upper = sf.upper.clone();
        lower.resize(width, 0.0);
        upper.resize(width, f64::INFINITY);
        let mut cost = sf.cost.clone();
        cost.resize(width, 0.0);
        let cost_base = m * stride;
        t[cost_base..cost_base + n].copy_from_slice(&sf.cost);
        let basis: Vec<usize> = (n..n + m).collect();
        let mut row_of = vec![NONE; width];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = i;
        }
        let mut at_upper = vec![false; width];
        let mut x = vec![0.0; width];
        for j in 0..n {
            if lower[j].is_finite() {
                x[j] = lower[j];
            } else if upper[j].is_finite() {
                x[j] = upper[j];
                at_upper[j] = true;
            }
        }
        let mut tab = Self {
            sf,
            width,
            stride,
            t,
            basis,
            row_of,
            lower,
            upper,
            x,
            at_upper,
            cost,
            artificials,
            pivots: 0,
            nz: Vec::with_capacity(stride),
        };
        tab.recompute_basics();
        tab
    }

    /// Rebuilds the tableau for a stored basis. Bounds are reset to the
    /// standard form's; callers re-apply their own.
    pub fn from_basis(sf: &'a StandardForm, snap: &BasisSnapshot) -> Result<Self, LpError> {
        let mut tab = Self::slack_basis(sf);
        let n = sf.n;
        let target: Vec<bool> = {
            let mut v = vec![false; tab.width];
            for &b in &snap.basic {
                if b < tab.width {
                    v[b] = true;
                }
            }
            v
        };
        for &j in snap.basic.iter().filter(|&&j| j < n) {
            let mut best = NONE;
            let mut best_abs = 1e-9;
            for r in 0..sf.m {
                let cur = tab.basis[r];
                if cur >= n && !target[cur] {
                    let a = tab.at(r, j).abs();
                    if a > best_abs {
                        best_abs = a;
                        best = r;
                    }
                }
            }
            if best == NONE {
                return Err(LpError::Numerical(format!("basis column {j} is dependent")));
            }
            tab.pivot(best, j);
        }
        for j in 0..tab.width {
            if tab.row_of[j] == NONE {
                tab.at_upper[j] = snap.at_upper.get(j).copied().unwrap_or(false);
                tab.x[j] = tab.nonbasic_value(j);
            }
        }
        tab.recompute_basics();
        tab.recompute_reduced_costs();
        Ok(tab)
    }

    #[inline]
    fn at(&self, r: usize, j: usize) -> f64 {
        self.t[r * self.stride + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if self.at_upper[j] && hi.is_finite() {
            hi
        } else if lo.is_finite() {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        }
    }

    /// Pins nonbasic structural columns at fixed values and updates the
    /// basic values to match.
    fn fix_nonbasic(&mut self, fixings: &[(usize, f64)]) {
        if fixings.is_empty() {
            return;
        }
        for &(j, v) in fixings {
            debug_assert_eq!(self.row_of[j], NONE);
            self.lower[j] = v;
            self.upper[j] = v;
            self.x[j] = v;
        }
        self.recompute_basics();
    }

    pub fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot { basic: self.basis.clone(), at_upper: self.at_upper.clone() }
    }

    /// Structural values, clamped into their bounds.
    pub fn values(&self) -> Vec<f64> {
        (0..self.sf.n).map(|j| self.x[j].clamp(self.lower[j], self.upper[j])).collect()
    }

    pub fn objective(&self) -> f64 {
        self.sf.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    pub fn reduced_cost(&self, j: usize) -> f64 {
        self.at(self.sf.m, j)
    }

    pub fn lower(&self, j: usize) -> f64 {
        self.lower[j]
    }

    pub fn upper(&self, j: usize) -> f64 {
        self.upper[j]
    }

    /// Changes a column's bounds, moving it (and the basics) if it is nonbasic.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) -> Result<(), LpError> {
        if lo > hi + FEAS_TOL {
            return Err(LpError::InconsistentBounds(j));
        }
        self.lower[j] = lo;
        self.upper[j] = hi;
        if self.row_of[j] == NONE {
            let old = self.x[j];
            let new = self.nonbasic_value(j);
            let delta = new - old;
            if delta != 0.0 {
                self.x[j] = new;
                for i in 0..self.sf.m {
                    let a = self.at(i, j);
                    if a != 0.0 {
                        let b = self.basis[i];
                        self.x[b] -= a * delta;
                    }
                }
            }
        }
        Ok(())
    }

    fn recompute_basics(&mut self) {
        let m = self.sf.m;
        for i in 0..m {
            let base = i * self.stride;
            let mut v = self.t[base + self.width];
            for j in 0..self.width {
                if self.row_of[j] == NONE {
                    let a = self.t[base + j];
                    if a != 0.0 {
                        v -= a * self.x[j];
                    }
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let m = self.sf.m;
        let cbase = m * self.stride;
        for j in 0..self.width {
            self.t[cbase + j] = self.cost[j];
        }
        self.t[cbase + self.width] = 0.0;
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let base = i * self.stride;
                for j in 0..=self.width {
                    let a = self.t[base + j];
                    if a != 0.0 {
                        self.t[cbase + j] -= cb * a;
                    }
                }
            }
        }
        for &b in &self.basis {
            self.t[cbase + b] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let stride = self.stride;
        let rbase = r * stride;
        let piv = self.t[rbase + q];
        let inv = 1.0 / piv;
        self.nz.clear();
        for k in 0..stride {
            let v = self.t[rbase + k];
            if v != 0.0 {
                self.t[rbase + k] = v * inv;
                self.nz.push(k);
            }
        }
        self.t[rbase + q] = 1.0;
        let m = self.sf.m;
        for i in 0..=m {
            if i == r {
                continue;
            }
            let ibase = i * stride;
            let f = self.t[ibase + q];
            if f == 0.0 {
                continue;
            }
            let (head, tail) = self.t.split_at_mut(rbase.max(ibase));
            let (prow, irow) = if rbase < ibase {
                (&head[rbase..rbase + stride], &mut tail[..stride])
            } else {
                (&tail[..stride], &mut head[ibase..ibase + stride])
            };
            for &k in &self.nz {
                let v = irow[k] - f * prow[k];
                irow[k] = if v.abs() < 1e-13 { 0.0 } else { v };
            }
            irow[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NONE;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.pivots += 1;
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j] - self.lower[j] <= FEAS_TOL
    }

    fn infeasibility(&self, i: usize) -> f64 {
        let b = self.basis[i];
        let v = self.x[b];
        (self.lower[b] - v).max(v - self.upper[b]).max(0.0)
    }

    /// Moves nonbasic boxed columns to the bound their reduced cost prefers.
    /// Returns false if some column with the wrong sign has no bound to move to.
    pub fn make_dual_feasible(&mut self) -> bool {
        let mut ok = true;
        let mut moved = false;
        for j in 0..self.width {
            if self.row_of[j] != NONE || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            let want_upper = if d < -OPT_TOL {
                true
            } else if d > OPT_TOL {
                false
            } else {
                continue;
            };
            if want_upper != self.at_upper[j] || (want_upper && self.x[j] != self.upper[j]) {
                let target = if want_upper { self.upper[j] } else { self.lower[j] };
                if !target.is_finite() {
                    ok = false;
                    continue;
                }
                self.at_upper[j] = want_upper;
                self.x[j] = target;
                moved = true;
            }
        }
        if moved {
            self.recompute_basics();
        }
        ok
    }

    fn past_deadline(&self, iters: usize) -> bool {
        iters % 32 == 0 && self.sf.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.sf.m + self.width) + 10_000
    }

    /// Dual simplex from a dual-feasible basis.
    ///
    /// Nonbasic costs are perturbed in their feasible direction for the
    /// duration of the dual pass; with most costs zero nearly every pivot
    /// would otherwise be dual degenerate. The primal simplex then cleans up
    /// against the true costs.
    pub fn dual_simplex(&mut self) -> Result<LpStatus, LpError> {
        let original = self.cost.clone();
        let m = self.sf.m;
        let cbase = m * self.stride;
        for j in 0..self.width {
            if self.row_of[j] != NONE || self.is_fixed(j) {
                continue;
            }
            let free = !self.lower[j].is_finite() && !self.upper[j].is_finite();
            if free {
                continue;
            }
            // cheap deterministic hash in [1, 2)
            let u = 1.0 + ((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            let delta = PERTURBATION * u * original[j].abs().max(1.0);
            let delta = if self.at_upper[j] { -delta } else { delta };
            self.cost[j] += delta;
            self.t[cbase + j] += delta;
        }
        let status = self.dual_core();
        self.cost = original;
        self.recompute_reduced_costs();
        let status = status?;
        if status == LpStatus::Optimal && self.dual_infeasibility() > OPT_TOL {
            return self.primal_simplex();
        }
        Ok(status)
    }

    fn dual_core(&mut self) -> Result<LpStatus, LpError> {
        let m = self.sf.m;
        let cap = self.iteration_cap();
        let mut degenerate = 0usize;
        let mut iters = 0usize;
        // rows off by drift only, with nothing able to repair them
        let mut skip = vec![false; m];
        loop {
            iters += 1;
            if iters > cap {
                return Err(LpError::IterationLimit(cap));
            }
            if self.past_deadline(iters) {
                return Err(LpError::Deadline);
            }
            let bland = degenerate > DEGENERATE_RUN;
            // leaving row
            let mut r = NONE;
            let mut worst = FEAS_TOL;
            for i in 0..m {
                let inf = self.infeasibility(i);
                if inf > FEAS_TOL && !skip[i] {
                    if bland {
                        if r == NONE || self.basis[i] < self.basis[r] {
                            r = i;
                        }
                    } else if inf > worst {
                        worst = inf;
                        r = i;
                    }
                }
            }
            if r == NONE {
                return Ok(LpStatus::Optimal);
            }
            let b = self.basis[r];
            let to_lower = self.x[b] < self.lower[b];
            let target = if to_lower { self.lower[b] } else { self.upper[b] };
            // entering column, Harris two-pass
            let rbase = r * self.stride;
            let cbase = m * self.stride;
            let eligible = |tab: &Self, j: usize| -> Option<(f64, f64)> {
                if tab.row_of[j] != NONE || tab.is_fixed(j) {
                    return None;
                }
                let a = tab.t[rbase + j];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let up = tab.at_upper[j] && tab.upper[j].is_finite();
                let free = !tab.lower[j].is_finite() && !tab.upper[j].is_finite();
                // x_b moves by -a * dx_j
                let ok = if free {
                    true
                } else if to_lower {
                    (!up && a < 0.0) || (up && a > 0.0)
                } else {
                    (!up && a > 0.0) || (up && a < 0.0)
                };
                if !ok {
                    return None;
                }
                let d = tab.t[cbase + j];
                let slack = if free { d.abs() } else if up { (-d).max(0.0) } else { d.max(0.0) };
                Some((slack, a.abs()))
            };
            let mut bound = f64::INFINITY;
            for j in 0..self.width {
                if let Some((s, a)) = eligible(self, j) {
                    bound = bound.min((s + OPT_TOL) / a);
                }
            }
            if !bound.is_finite() {
                if self.infeasibility(r) <= DRIFT_TOL {
                    skip[r] = true;
                    continue;
                }
                return Ok(LpStatus::Infeasible);
            }
            let mut q = NONE;
            let mut best_a = 0.0;
            let mut best_ratio = f64::INFINITY;
            for j in 0..self.width {
                if let Some((s, a)) = eligible(self, j) {
                    let ratio = s / a;
                    if ratio <= bound {
                        let better = if bland {
                            ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && q == NONE)
                        } else {
                            a > best_a
                        };
                        if better {
                            q = j;
                            best_a = a;
                            best_ratio = ratio;
                        }
                    }
                }
            }
            debug_assert!(q != NONE);
            let alpha = self.t[rbase + q];
            // Harris may pick a column whose reduced cost sits just across
            // zero; stepping on it would move the dual objective backwards.
            let d = self.t[cbase + q];
            let wrong = if self.at_upper[q] { d > 0.0 } else { d < 0.0 };
            let free_q = !self.lower[q].is_finite() && !self.upper[q].is_finite();
            if wrong && !free_q {
                self.cost[q] -= d;
                self.t[cbase + q] = 0.0;
            }
            let step_ratio = {
                let d = self.t[cbase + q];
                (d / alpha).abs()
            };
            if step_ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let dx = (self.x[b] - target) / alpha;
            self.shift_entering(q, dx);
            self.pivot(r, q);
            self.x[b] = target;
            self.at_upper[b] = !to_lower;
        }
    }

    fn shift_entering(&mut self, q: usize, dx: f64) {
        if dx == 0.0 {
            return;
        }
        for i in 0..self.sf.m {
            let a = self.at(i, q);
            if a != 0.0 {
                let b = self.basis[i];
                self.x[b] -= a * dx;
            }
        }
        self.x[q] += dx;
    }

    /// Primal simplex from a primal-feasible basis on the current cost row.
    fn primal_simplex(&mut self) -> Result<LpStatus, LpError> {
        let m = self.sf.m;
        let cap = self.iteration_cap();
        let mut degenerate = 0usize;
        let mut iters = 0usize;
        let cbase = m * self.stride;
        loop {
            iters += 1;
            if iters > cap {
                return Err(LpError::IterationLimit(cap));
            }
            if self.past_deadline(iters) {
                return Err(LpError::Deadline);
            }
            let bland = degenerate > DEGENERATE_RUN;
            let mut q = NONE;
            let mut best = 0.0;
            for j in 0..self.width {
                if self.row_of[j] != NONE || self.is_fixed(j) {
                    continue;
                }
                let d = self.t[cbase + j];
                let free = !self.lower[j].is_finite() && !self.upper[j].is_finite();
                let can_up = free || (!self.at_upper[j] && self.upper[j] > self.x[j]);
                let can_down = free || self.at_upper[j] || !self.lower[j].is_finite();
                let score = if d < -OPT_TOL && can_up {
                    -d
                } else if d > OPT_TOL && can_down {
                    d
                } else {
                    continue;
                };
                if bland {
                    q = j;
                    break;
                }
                if score > best {
                    best = score;
                    q = j;
                }
            }
            if q == NONE {
                return Ok(LpStatus::Optimal);
            }
            let dir = if self.t[cbase + q] < 0.0 { 1.0 } else { -1.0 };
            // Harris two-pass over rows
            let limit = |tab: &Self, i: usize, relax: f64| -> Option<(f64, f64)> {
                let alpha = tab.t[i * tab.stride + q] * dir;
                if alpha.abs() <= PIVOT_TOL {
                    return None;
                }
                let b = tab.basis[i];
                let v = tab.x[b];
                if alpha > 0.0 {
                    let lo = tab.lower[b];
                    if !lo.is_finite() {
                        return None;
                    }
                    Some((((v - lo) + relax).max(0.0) / alpha, alpha))
                } else {
                    let hi = tab.upper[b];
                    if !hi.is_finite() {
                        return None;
                    }
                    Some((((hi - v) + relax).max(0.0) / -alpha, -alpha))
                }
            };
            let mut bound = f64::INFINITY;
            for i in 0..m {
                if let Some((t, _)) = limit(self, i, FEAS_TOL) {
                    bound = bound.min(t);
                }
            }
            let span = self.upper[q] - self.lower[q];
            if !bound.is_finite() && !span.is_finite() {
                return Ok(LpStatus::Unbounded);
            }
            let mut r = NONE;
            let mut best_a = 0.0;
            let mut theta = f64::INFINITY;
            if bound.is_finite() {
                for i in 0..m {
                    if let Some((t, a)) = limit(self, i, 0.0) {
                        if t <= bound {
                            let better = if bland {
                                r == NONE || self.basis[i] < self.basis[r]
                            } else {
                                a > best_a
                            };
                            if better {
                                r = i;
                                best_a = a;
                                theta = t;
                            }
                        }
                    }
                }
            }
            if span.is_finite() && span <= theta {
                // bound flip
                self.shift_entering(q, dir * span);
                self.at_upper[q] = dir > 0.0;
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                degenerate = 0;
                continue;
            }
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let b = self.basis[r];
            let alpha = self.t[r * self.stride + q] * dir;
            let target = if alpha > 0.0 { self.lower[b] } else { self.upper[b] };
            self.shift_entering(q, dir * theta);
            self.pivot(r, q);
            self.x[b] = target;
            self.at_upper[b] = alpha < 0.0;
        }
    }

    /// Max violation of basic-variable bounds.
    pub fn primal_infeasibility(&self) -> f64 {
        (0..self.sf.m).map(|i| self.infeasibility(i)).fold(0.0, f64::max)
    }

    /// Max violation of reduced-cost sign conditions on nonbasic columns.
    pub fn dual_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.width {
            if self.row_of[j] != NONE || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j);
            let up = self.at_upper[j];
            let free = !self.lower[j].is_finite() && !self.upper[j].is_finite();
            let v = if free { d.abs() } else if up { d.max(0.0) } else { (-d).max(0.0) };
            worst = worst.max(v);
        }
        worst
    }

    /// Checks the solution against the scaled rows; on drift, rebuilds from
    /// the current basis.
    pub fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.sf.rows.iter().enumerate() {
            let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum::<f64>() + self.x[self.sf.n + i];
            worst = worst.max((act - self.sf.rhs[i]).abs());
        }
        worst
    }

    /// Largest tableau entry; growth far beyond the data signals a bad basis.
    fn max_entry(&self) -> f64 {
        self.t.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Rebuilds this tableau from its own basis, keeping current bounds.
    pub fn refactor(&mut self) -> Result<(), LpError> {
        if self.artificials > 0 {
            return Err(LpError::Numerical("cannot refactor a phase-one tableau".into()));
        }
        let snap = self.snapshot();
        let (lower, upper) = (self.lower.clone(), self.upper.clone());
        let mut fresh = Tableau::from_basis(self.sf, &snap)?;
        for j in 0..fresh.width {
            fresh.lower[j] = lower[j];
            fresh.upper[j] = upper[j];
            if fresh.row_of[j] == NONE {
                fresh.x[j] = fresh.nonbasic_value(j);
            }
        }
        fresh.recompute_basics();
        let pivots = self.pivots;
        *self = fresh;
        self.pivots = pivots;
        Ok(())
    }

    /// Re-optimizes with the dual simplex, refactoring on residual drift.
    pub fn reoptimize(&mut self) -> Result<LpStatus, LpError> {
        for attempt in 0..3 {
            self.recompute_basics();
            if !self.make_dual_feasible() {
                // a one-sided column has the wrong reduced-cost sign
                return self.primal_from_here();
            }
            let status = self.dual_simplex()?;
            let sound = self.residual() <= 1e-7 && self.max_entry() <= MAX_ENTRY;
            if sound && (status != LpStatus::Optimal || self.dual_infeasibility() <= 1e-7) {
                return Ok(status);
            }
            if attempt < 2 {
                self.refactor()?;
            }
        }
        Err(LpError::Numerical(format!("residual {:.3e} after refactorization", self.residual())))
    }

    /// Runs primal phase two when the basis is already primal feasible,
    /// otherwise gives up on warm start.
    fn primal_from_here(&mut self) -> Result<LpStatus, LpError> {
        if self.primal_infeasibility() > FEAS_TOL {
            return Err(LpError::Numerical("basis neither primal nor dual feasible".into()));
        }
        self.primal_simplex()
    }
}

/// Solves a general LP (any bounds) with the two-phase primal simplex.
/// Returns the status, and the objective and structural values when optimal.
pub fn solve_lp(lp: &LpProblem) -> Result<(LpStatus, f64, Vec<f64>), LpError> {
    let sf = StandardForm::new(lp);
    let (status, tab) = solve_primal(&sf)?;
    match (status, tab) {
        (LpStatus::Optimal, Some(t)) => Ok((status, t.objective(), t.values())),
        (status, _) => Ok((status, f64::NAN, Vec::new())),
    }
}

/// Two-phase primal simplex from the slack basis.
pub(crate) fn solve_primal(sf: &StandardForm) -> Result<(LpStatus, Option<Tableau<'_>>), LpError> {
    solve_primal_fixed(sf, &[])
}

/// As [`solve_primal`] with the listed columns fixed to the given values.
pub(crate) fn solve_primal_fixed<'a>(
    sf: &'a StandardForm,
    fixings: &[(usize, f64)],
) -> Result<(LpStatus, Option<Tableau<'a>>), LpError> {
    for j in 0..sf.n {
        if sf.lower[j] > sf.upper[j] + FEAS_TOL {
            return Err(LpError::InconsistentBounds(j));
        }
    }
    // Rows whose slack cannot take the residual get an artificial.
    let mut probe = Tableau::slack_basis(sf);
    probe.fix_nonbasic(fixings);
    let mut needs: Vec<(usize, f64, f64)> = Vec::new();
    for i in 0..sf.m {
        let s = sf.n + i;
        let v = probe.x[s];
        let clamped = v.clamp(sf.lower[s], sf.upper[s]);
        if (v - clamped).abs() > FEAS_TOL {
            needs.push((i, clamped, v - clamped));
        }
    }
    drop(probe);
    let mut tab = Tableau::build(sf, needs.len());
    tab.fix_nonbasic(fixings);
    let (n, m) = (sf.n, sf.m);
    let width = tab.width;
    for (k, &(i, clamped, resid)) in needs.iter().enumerate() {
        let a = n + m + k;
        let sigma = resid.signum();
        let base = i * tab.stride;
        tab.t[base + a] = sigma;
        // slack leaves at its violated bound, artificial takes the residual
        let s = n + i;
        tab.row_of[s] = NONE;
        tab.x[s] = clamped;
        tab.at_upper[s] = clamped == sf.upper[s] && sf.upper[s].is_finite() && !sf.lower[s].is_finite();
        tab.basis[i] = a;
        tab.row_of[a] = i;
        tab.lower[a] = 0.0;
        tab.upper[a] = f64::INFINITY;
        tab.cost[a] = 1.0;
        if sigma < 0.0 {
            for v in &mut tab.t[base..base + width + 1] {
                *v = -*v;
            }
        }
    }
    if !needs.is_empty() {
        let phase2_cost = std::mem::replace(&mut tab.cost, {
            let mut c = vec![0.0; width];
            for k in 0..needs.len() {
                c[n + m + k] = 1.0;
            }
            c
        });
        tab.recompute_basics();
        tab.recompute_reduced_costs();
        let status = tab.primal_simplex()?;
        debug_assert_eq!(status, LpStatus::Optimal);
        let infeas: f64 = (0..needs.len()).map(|k| tab.x[n + m + k]).sum();
        if infeas > 1e-7 {
            return Ok((LpStatus::Infeasible, None));
        }
        // pin artificials at zero and pivot out the basic ones where possible
        for k in 0..needs.len() {
            let a = n + m + k;
            tab.lower[a] = 0.0;
            tab.upper[a] = 0.0;
            tab.cost[a] = 0.0;
            if tab.row_of[a] != NONE {
                let r = tab.row_of[a];
                let mut q = NONE;
                let mut best = 1e-7;
                for j in 0..n + m {
                    if tab.row_of[j] == NONE && !tab.is_fixed(j) {
                        let v = tab.at(r, j).abs();
                        if v > best {
                            best = v;
                            q = j;
                        }
                    }
                }
                if q != NONE {
                    let dx = (tab.x[a] - 0.0) / tab.at(r, q);
                    tab.shift_entering(q, dx);
                    tab.pivot(r, q);
                    tab.x[a] = 0.0;
                    tab.at_upper[a] = false;
                }
            } else {
                tab.x[a] = 0.0;
            }
        }
        tab.cost = phase2_cost;
        tab.cost.resize(width, 0.0);
    }
    tab.recompute_basics();
    tab.recompute_reduced_costs();
    let status = tab.primal_simplex()?;
    Ok((status, Some(tab)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve_both(lp: &LpProblem) -> (LpStatus, Option<f64>, LpStatus, Option<f64>) {
        let sf = StandardForm::new(lp);
        let (ps, pt) = solve_primal(&sf).unwrap();
        let pobj = pt.as_ref().filter(|_| ps == LpStatus::Optimal).map(|t| t.objective());
        let mut dt = Tableau::slack_basis(&sf);
        let (ds, dobj) = if dt.make_dual_feasible() {
            let s = dt.dual_simplex().unwrap();
            (s, (s == LpStatus::Optimal).then(|| dt.objective()))
        } else {
            (LpStatus::Unbounded, None)
        };
        (ps, pobj, ds, dobj)
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let mut lp = LpProblem::with_columns(2);
        lp.cost = vec![-3.0, -5.0];
        lp.upper = vec![100.0, 100.0];
        lp.add_row(vec![(0, 1.0)], Sense::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], Sense::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let (ps, pobj, ds, dobj) = solve_both(&lp);
        assert_eq!(ps, LpStatus::Optimal);
        assert_eq!(ds, LpStatus::Optimal);
        assert!((pobj.unwrap() + 36.0).abs() < 1e-9);
        assert!((dobj.unwrap() + 36.0).abs() < 1e-9);
    }

    #[test]
    fn phase_one_with_ge_and_eq_rows() {
        // min x + y s.t. x + y ≥ 2, x - y = 0.5 → 2
        let mut lp = LpProblem::with_columns(2);
        lp.cost = vec![1.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 2.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Eq, 0.5);
        let sf = StandardForm::new(&lp);
        let (s, t) = solve_primal(&sf).unwrap();
        assert_eq!(s, LpStatus::Optimal);
        let t = t.unwrap();
        assert!((t.objective() - 2.0).abs() < 1e-9);
        assert!((t.values()[0] - 1.25).abs() < 1e-9);
        assert!(lp.max_violation(&t.values()) < 1e-9);
    }

    #[test]
    fn infeasible_detected_by_both() {
        let mut lp = LpProblem::with_columns(1);
        lp.upper = vec![1.0];
        lp.cost = vec![1.0];
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 2.0);
        let (ps, _, ds, _) = solve_both(&lp);
        assert_eq!(ps, LpStatus::Infeasible);
        assert_eq!(ds, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LpProblem::with_columns(2);
        lp.cost = vec![-1.0, 0.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0);
        let sf = StandardForm::new(&lp);
        assert_eq!(solve_primal(&sf).unwrap().0, LpStatus::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's cycling example
        let mut lp = LpProblem::with_columns(4);
        lp.cost = vec![-0.75, 150.0, -0.02, 6.0];
        lp.add_row(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0);
        lp.add_row(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0);
        lp.add_row(vec![(2, 1.0)], Sense::Le, 1.0);
        let sf = StandardForm::new(&lp);
        let (s, t) = solve_primal(&sf).unwrap();
        assert_eq!(s, LpStatus::Optimal);
        assert!((t.unwrap().objective() + 0.05).abs() < 1e-9);
    }

    #[test]
    fn warm_start_after_bound_change_matches_cold() {
        let mut lp = LpProblem::with_columns(3);
        lp.cost = vec![-1.0, -2.0, -1.5];
        lp.upper = vec![1.0, 1.0, 1.0];
        lp.add_row(vec![(0, 2.0), (1, 3.0), (2, 2.5)], Sense::Le, 4.0);
        let sf = StandardForm::new(&lp);
        let mut t = Tableau::slack_basis(&sf);
        assert!(t.make_dual_feasible());
        assert_eq!(t.dual_simplex().unwrap(), LpStatus::Optimal);
        t.set_bounds(1, 0.0, 0.0).unwrap();
        assert_eq!(t.reoptimize().unwrap(), LpStatus::Optimal);
        let mut cold = lp.clone();
        cold.upper[1] = 0.0;
        let sf2 = StandardForm::new(&cold);
        let (_, c) = solve_primal(&sf2).unwrap();
        assert!((t.objective() - c.unwrap().objective()).abs() < 1e-9);
        // restore from snapshot reproduces the optimum
        let snap = t.snapshot();
        let mut r = Tableau::from_basis(&sf, &snap).unwrap();
        r.set_bounds(1, 0.0, 0.0).unwrap();
        assert_eq!(r.reoptimize().unwrap(), LpStatus::Optimal);
        assert!((r.objective() - t.objective()).abs() < 1e-9);
        assert_eq!(r.pivots, snap.structural_basic_count(3));
    }

    fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
        let n = rng.gen_range(2..8);
        let m = rng.gen_range(1..8);
        let mut lp = LpProblem::with_columns(n);
        for j in 0..n {
            lp.cost[j] = rng.gen_range(-5.0..5.0f64).round();
            lp.lower[j] = if rng.gen_bool(0.3) { rng.gen_range(-3.0..0.0f64).round() } else { 0.0 };
            lp.upper[j] = lp.lower[j] + rng.gen_range(0.0..6.0f64).round();
        }
        for _ in 0..m {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    coeffs.push((j, rng.gen_range(-4.0..4.0f64).round()));
                }
            }
            let sense = match rng.gen_range(0..3) {
                0 => Sense::Le,
                1 => Sense::Ge,
                _ => Sense::Eq,
            };
            lp.add_row(coeffs, sense, rng.gen_range(-6.0..6.0f64).round());
        }
        lp
    }

    /// Brute-force vertex enumeration is awkward, so primal and dual drivers
    /// are cross-checked against each other on boxed random LPs and every
    /// optimum is verified feasible with sign-correct reduced costs.
    #[test]
    fn primal_and_dual_agree_on_random_boxed_lps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut optimal = 0;
        for _ in 0..400 {
            let lp = random_lp(&mut rng);
            let sf = StandardForm::new(&lp);
            let (ps, pt) = solve_primal(&sf).unwrap();
            let mut dt = Tableau::slack_basis(&sf);
            assert!(dt.make_dual_feasible());
            let ds = dt.dual_simplex().unwrap();
            assert_eq!(ps, ds, "{lp:?}");
            if ps == LpStatus::Optimal {
                optimal += 1;
                let pt = pt.unwrap();
                assert!((pt.objective() - dt.objective()).abs() < 1e-7, "{lp:?}");
                assert!(lp.max_violation(&pt.values()) < 1e-7);
                assert!(lp.max_violation(&dt.values()) < 1e-7);
                assert!(pt.dual_infeasibility() < 1e-7);
                assert!(dt.dual_infeasibility() < 1e-7);
            }
        }
        assert!(optimal > 100, "only {optimal} optimal LPs drawn");
    }

    /// Exhaustive check on 2-column LPs: the optimum over a fine grid of the
    /// box never beats the simplex optimum, and the simplex point is feasible.
    #[test]
    fn grid_search_never_beats_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let mut lp = LpProblem::with_columns(2);
            lp.cost = vec![rng.gen_range(-3.0..3.0f64), rng.gen_range(-3.0..3.0f64)];
            lp.upper = vec![4.0, 4.0];
            for _ in 0..3 {
                lp.add_row(
                    vec![(0, rng.gen_range(-2.0..2.0f64)), (1, rng.gen_range(-2.0..2.0f64))],
                    Sense::Le,
                    rng.gen_range(0.0..4.0f64),
                );
            }
            let sf = StandardForm::new(&lp);
            let (s, t) = solve_primal(&sf).unwrap();
            assert_eq!(s, LpStatus::Optimal); // origin is always feasible
            let t = t.unwrap();
            let steps = 80;
            for a in 0..=steps {
                for b in 0..=steps {
                    let x = [4.0 * a as f64 / steps as f64, 4.0 * b as f64 / steps as f64];
                    if lp.max_violation(&x) <= 0.0 {
                        assert!(lp.objective_value(&x) >= t.objective() - 1e-9);
                    }
                }
            }
        }
    }
}
