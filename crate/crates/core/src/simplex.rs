//! Dense bounded-variable primal simplex.
//!
//! Problems are stated as
//!
//! ```text
//! minimise    c'x
//! subject to  row_lo <= A x <= row_hi
//!             var_lo <=   x <= var_hi
//! ```
//!
//! with infinite bounds allowed on both sides. Every row receives a slack
//! `s = A x` carrying the row bounds, so the working system is `A x - s = 0`.
//! Rows whose slack starts out of bounds get an artificial column and a
//! phase-one pass drives those to zero. Pricing is Dantzig with a
//! Harris-style ratio test; after a run of degenerate pivots the solver drops
//! to Bland's rule until progress resumes. All choices are index-ordered, so
//! the same problem always follows the same pivot path.

use nalgebra::{DMatrix, DVector};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted (cycling guard) or singular basis.
    Failed,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        debug_assert!(lo <= hi, "empty variable range [{lo}, {hi}]");
        self.cost.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        self.cost.len() - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.cost[var] = cost;
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, lo: f64, hi: f64) -> usize {
        debug_assert!(terms.iter().all(|(j, _)| *j < self.cost.len()));
        self.rows.push(Row { terms, lo, hi });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Value of row `r` at `x`.
    pub fn row_activity(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest violation of any row or variable bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, v) in x.iter().enumerate() {
            worst = worst.max(self.lo[j] - v).max(v - self.hi[j]);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let a = self.row_activity(r, x);
            worst = worst.max(row.lo - a).max(a - row.hi);
        }
        worst
    }

    pub fn solve(&self) -> LpSolution {
        Tableau::build(self).run(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic variable parked at zero.
    Zero,
}

struct Tableau {
    m: usize,
    n: usize,
    /// structural + slack + artificial
    width: usize,
    /// columns still taking part in pivots
    active: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    /// sign of each artificial column (row index -> sign), 0 when absent
    art_sign: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let n = lp.cost.len();
        let width = n + 2 * m;
        let mut lo = Vec::with_capacity(width);
        let mut hi = Vec::with_capacity(width);
        lo.extend_from_slice(&lp.lo);
        hi.extend_from_slice(&lp.hi);
        for row in &lp.rows {
            lo.push(row.lo);
            hi.push(row.hi);
        }
        lo.extend(std::iter::repeat_n(0.0, m));
        hi.extend(std::iter::repeat_n(0.0, m));

        let mut x = vec![0.0; width];
        let mut state = vec![State::Lower; width];
        for j in 0..n + m {
            let (l, h) = (lo[j], hi[j]);
            if l.is_finite() {
                x[j] = l;
                state[j] = State::Lower;
            } else if h.is_finite() {
                x[j] = h;
                state[j] = State::Upper;
            } else {
                x[j] = 0.0;
                state[j] = State::Zero;
            }
        }

        let mut t = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut art_sign = vec![0.0; m];
        for (r, row) in lp.rows.iter().enumerate() {
            let activity: f64 = row.terms.iter().map(|&(j, a)| a * x[j]).sum();
            let slack = n + r;
            let base = r * width;
            if activity >= row.lo - FEAS_TOL && activity <= row.hi + FEAS_TOL {
                // slack is basic: row reads -a x + s = 0
                for &(j, a) in &row.terms {
                    t[base + j] -= a;
                }
                t[base + slack] = 1.0;
                basis[r] = slack;
                state[slack] = State::Basic;
                x[slack] = activity;
            } else {
                let s_val = activity.clamp(row.lo, row.hi);
                x[slack] = s_val;
                state[slack] = if s_val == row.lo { State::Lower } else { State::Upper };
                let res = activity - s_val;
                let sign = if res > 0.0 { -1.0 } else { 1.0 };
                // sign * (a x - s) + art = 0
                for &(j, a) in &row.terms {
                    t[base + j] += sign * a;
                }
                t[base + slack] = -sign;
                let art = n + m + r;
                t[base + art] = 1.0;
                art_sign[r] = sign;
                basis[r] = art;
                state[art] = State::Basic;
                x[art] = res.abs();
                hi[art] = f64::INFINITY;
            }
        }

        Tableau {
            m,
            n,
            width,
            active: width,
            t,
            d: vec![0.0; width],
            lo,
            hi,
            x,
            state,
            basis,
            art_sign,
            iterations: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d[..self.active].copy_from_slice(&cost[..self.active]);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * w..r * w + self.active];
                for (dj, tj) in self.d[..self.active].iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn pivot(&mut self, pr: usize, q: usize) {
        let w = self.width;
        let act = self.active;
        let piv = self.t[pr * w + q];
        {
            let row = &mut self.t[pr * w..pr * w + act];
            for v in row.iter_mut() {
                *v /= piv;
            }
        }
        let (head, rest) = self.t.split_at_mut(pr * w);
        let (prow, tail) = rest.split_at_mut(w);
        let prow = &prow[..act];
        for chunk in head.chunks_mut(w).chain(tail.chunks_mut(w)) {
            let f = chunk[q];
            if f != 0.0 {
                for (v, p) in chunk[..act].iter_mut().zip(prow) {
                    *v -= f * p;
                }
                chunk[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (v, p) in self.d[..act].iter_mut().zip(prow) {
                *v -= f * p;
            }
            self.d[q] = 0.0;
        }
    }

    /// Runs simplex iterations for the cost vector `cost` until optimal.
    fn iterate(&mut self, cost: &[f64], budget: usize) -> LpStatus {
        self.price(cost);
        let w = self.width;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= budget {
                return LpStatus::Failed;
            }
            // entering column
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.active {
                let dir = match self.state[j] {
                    State::Basic => continue,
                    _ if self.lo[j] == self.hi[j] => continue,
                    State::Lower if self.d[j] < -OPT_TOL => 1.0,
                    State::Upper if self.d[j] > OPT_TOL => -1.0,
                    State::Zero if self.d[j].abs() > OPT_TOL => -self.d[j].signum(),
                    _ => continue,
                };
                let score = self.d[j].abs();
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if score > best {
                    best = score;
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else {
                return LpStatus::Optimal;
            };
            self.iterations += 1;

            // Harris two-pass ratio test
            let mut bound = f64::INFINITY;
            for r in 0..self.m {
                let a = self.t[r * w + q] * dir;
                let b = self.basis[r];
                if a > PIVOT_TOL && self.lo[b].is_finite() {
                    bound = bound.min((self.x[b] - self.lo[b] + FEAS_TOL) / a);
                } else if a < -PIVOT_TOL && self.hi[b].is_finite() {
                    bound = bound.min((self.hi[b] - self.x[b] + FEAS_TOL) / -a);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_size = 0.0;
            for r in 0..self.m {
                let a = self.t[r * w + q] * dir;
                let b = self.basis[r];
                let ratio = if a > PIVOT_TOL && self.lo[b].is_finite() {
                    (self.x[b] - self.lo[b]) / a
                } else if a < -PIVOT_TOL && self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / -a
                } else {
                    continue;
                };
                if ratio <= bound {
                    let better = match leave {
                        None => true,
                        Some((lr, _)) if bland => b < self.basis[lr],
                        Some(_) => a.abs() > leave_size,
                    };
                    if better {
                        leave = Some((r, ratio.max(0.0)));
                        leave_size = a.abs();
                    }
                }
            }
            let span = self.hi[q] - self.lo[q];
            let step = match leave {
                Some((_, ratio)) if ratio < span => ratio,
                _ if span.is_finite() => span,
                _ => return LpStatus::Unbounded,
            };
            let flip = leave.is_none_or(|(_, ratio)| span <= ratio);

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            if step > 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * w + q];
                    if a != 0.0 {
                        self.x[self.basis[r]] -= dir * step * a;
                    }
                }
            }

            if flip {
                if dir > 0.0 {
                    self.x[q] = self.hi[q];
                    self.state[q] = State::Upper;
                } else {
                    self.x[q] = self.lo[q];
                    self.state[q] = State::Lower;
                }
                continue;
            }

            let (pr, _) = leave.expect("pivot row");
            self.x[q] += dir * step;
            let out = self.basis[pr];
            let a = self.t[pr * w + q] * dir;
            if a > 0.0 {
                self.x[out] = self.lo[out];
                self.state[out] = State::Lower;
            } else {
                self.x[out] = self.hi[out];
                self.state[out] = State::Upper;
            }
            self.pivot(pr, q);
            self.basis[pr] = q;
            self.state[q] = State::Basic;
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        let budget = 50 * (self.m + self.n) + 1000;
        let has_art = self.basis.iter().any(|&b| self.is_artificial(b));
        if has_art {
            let mut phase1 = vec![0.0; self.width];
            for (r, &s) in self.art_sign.iter().enumerate() {
                if s != 0.0 {
                    phase1[self.n + self.m + r] = 1.0;
                }
            }
            let status = self.iterate(&phase1, budget);
            if status == LpStatus::Failed {
                return self.finish(lp, LpStatus::Failed);
            }
            let infeas: f64 = (0..self.m)
                .filter(|&r| self.art_sign[r] != 0.0)
                .map(|r| self.x[self.n + self.m + r])
                .sum();
            let scale = 1.0 + lp.rows.iter().map(|r| r.terms.len()).max().unwrap_or(0) as f64;
            if infeas > 1e-7 * scale {
                return self.finish(lp, LpStatus::Infeasible);
            }
            self.retire_artificials();
        }
        self.active = self.n + self.m;
        let mut cost = vec![0.0; self.width];
        cost[..self.n].copy_from_slice(&lp.cost);
        let status = self.iterate(&cost, budget);
        self.finish(lp, status)
    }

    /// Pins artificials to zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        let w = self.width;
        for r in 0..self.m {
            let art = self.n + self.m + r;
            self.hi[art] = 0.0;
            if self.state[art] != State::Basic {
                self.x[art] = 0.0;
                self.state[art] = State::Lower;
            }
        }
        for r in 0..self.m {
            let b = self.basis[r];
            if !self.is_artificial(b) {
                continue;
            }
            let row = &self.t[r * w..r * w + self.n + self.m];
            let pick = row
                .iter()
                .enumerate()
                .filter(|(j, _)| self.state[*j] != State::Basic)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .filter(|(_, v)| v.abs() > 1e-7)
                .map(|(j, _)| j);
            if let Some(q) = pick {
                // the artificial sits at (near) zero, so this pivot moves nothing
                self.x[b] = 0.0;
                self.state[b] = State::Lower;
                self.pivot(r, q);
                self.basis[r] = q;
                self.state[q] = State::Basic;
            }
        }
    }

    fn finish(mut self, lp: &LinearProgram, status: LpStatus) -> LpSolution {
        if status == LpStatus::Optimal {
            self.refine(lp);
        }
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
        }
    }

    /// Recomputes basic values from the original rows when the tableau has
    /// drifted.
    fn refine(&mut self, lp: &LinearProgram) {
        let (m, n) = (self.m, self.n);
        if m == 0 {
            return;
        }
        let residual = |x: &[f64]| {
            lp.rows
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let a: f64 = row.terms.iter().map(|&(j, c)| c * x[j]).sum();
                    let art = if self.art_sign[r] != 0.0 {
                        self.art_sign[r] * x[n + m + r]
                    } else {
                        0.0
                    };
                    (a - x[n + r] + art).abs()
                })
                .fold(0.0, f64::max)
        };
        if residual(&self.x) <= 1e-11 {
            return;
        }
        // column of variable j in the system  A x - s (+ sign*art) = 0
        let mut basis_mat = DMatrix::<f64>::zeros(m, m);
        let mut col_pos = vec![usize::MAX; self.width];
        for (k, &b) in self.basis.iter().enumerate() {
            col_pos[b] = k;
        }
        let mut rhs = DVector::<f64>::zeros(m);
        for (r, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.terms {
                match col_pos[j] {
                    usize::MAX => rhs[r] -= a * self.x[j],
                    k => basis_mat[(r, k)] += a,
                }
            }
            match col_pos[n + r] {
                usize::MAX => rhs[r] += self.x[n + r],
                k => basis_mat[(r, k)] -= 1.0,
            }
            if self.art_sign[r] != 0.0 {
                let art = n + m + r;
                match col_pos[art] {
                    usize::MAX => rhs[r] -= self.art_sign[r] * self.x[art],
                    k => basis_mat[(r, k)] += self.art_sign[r],
                }
            }
        }
        let Some(sol) = basis_mat.lu().solve(&rhs) else {
            return;
        };
        let mut trial = self.x.clone();
        for (k, &b) in self.basis.iter().enumerate() {
            trial[b] = sol[k];
        }
        if residual(&trial) < residual(&self.x) {
            self.x = trial;
        }
    }
}
