//! Load-serving optimisation with adjustable line susceptances.
//!
//! The flow on a line equipped with a device is `B (1 + beta) (theta_i -
//! theta_j)`, bilinear in `beta` and the angles. [`solve_mfacts`] searches it
//! with a multi-start local method built from three linear programs:
//!
//! * the fixed-beta LP of [`crate::lpcore`] (exact in everything but beta),
//! * an angle-fixed LP in which flows are affine in beta,
//! * a trust-region linearisation in beta around the incumbent, whose
//!   proposal is only accepted after the fixed-beta LP confirms a gain.
//!
//! Every accepted move strictly improves the objective, so a run never ends
//! below its starting point. [`brute_force_oracle`] enumerates a beta grid
//! with the fixed-beta LP and serves as an independent check on small
//! networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lpcore::{check_inputs, map_status, Dispatch, Grid, LpSubproblem, LIMIT_TOL};
use crate::model::{validate_network, AlphaCutSolution, Direction, Network, SolveStatus, Strategy};
use crate::simplex::{LinearProgram, LpStatus};

/// One alpha-level optimisation with devices on the candidate lines.
#[derive(Debug, Clone)]
pub struct BilinearProblem<'a> {
    pub net: &'a Network,
    pub alpha: f64,
    pub direction: Direction,
    pub strategy: Strategy,
    /// Cap on the summed `|beta|` over all lines. `None` leaves only the
    /// per-line bounds.
    pub budget: Option<f64>,
    pub weights: Vec<f64>,
    /// Extra starting points (one beta per line), clamped into the feasible
    /// box before use.
    pub warm_starts: Vec<Vec<f64>>,
}

impl<'a> BilinearProblem<'a> {
    pub fn new(net: &'a Network, alpha: f64, direction: Direction, strategy: Strategy) -> Self {
        BilinearProblem {
            net,
            alpha,
            direction,
            strategy,
            budget: None,
            weights: net.buses.iter().map(|b| b.weight).collect(),
            warm_starts: Vec::new(),
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_warm_start(mut self, beta: Vec<f64>) -> Self {
        self.warm_starts.push(beta);
        self
    }

    /// Beta interval of every line under the strategy.
    pub fn line_bounds(&self) -> Vec<(f64, f64)> {
        self.net
            .lines
            .iter()
            .map(|l| self.strategy.line_bounds(l))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_outer_iters: usize,
    /// Smallest objective gain (MW) that counts as progress.
    pub tol_obj: f64,
    pub multistarts: usize,
    pub seed: u64,
    pub oracle_grid_points: usize,
    /// Largest number of LP solves the oracle may spend.
    pub oracle_cap: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            max_outer_iters: 100,
            tol_obj: 1e-6,
            multistarts: 16,
            seed: 0,
            oracle_grid_points: 5,
            oracle_cap: 1_000_000,
        }
    }
}

impl SolverSettings {
    fn check(&self) -> Result<()> {
        if self.max_outer_iters == 0
            || self.multistarts == 0
            || self.oracle_grid_points < 2
            || !(self.tol_obj > 0.0)
            || self.oracle_cap == 0
        {
            return Err(Error::InvalidArgument(
                "solver settings must be positive (oracle grid needs >= 2 points)".into(),
            ));
        }
        Ok(())
    }
}

/// Best local optimum over all starts.
///
/// For the Max direction the result is never below the `beta = 0` LP, since
/// that point is always the first start.
pub fn solve_mfacts(p: &BilinearProblem<'_>, s: &SolverSettings) -> Result<AlphaCutSolution> {
    let search = Search::new(p, s)?;
    Ok(search.run())
}

/// Outcome of the exhaustive grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best objective over both grid passes, MW (NaN if nothing feasible).
    pub objective: f64,
    /// Best objective of the coarse pass alone, MW.
    pub coarse_objective: f64,
    pub beta: Vec<f64>,
    pub evaluations: u64,
}

/// Exhaustive search over a uniform beta grid on every adjustable line,
/// followed by one refinement pass spanning one grid step around the best
/// point. Each grid point is a fixed-beta LP.
pub fn brute_force_oracle(
    p: &BilinearProblem<'_>,
    grid_points: usize,
    cap: u64,
) -> Result<OracleResult> {
    let settings = SolverSettings {
        oracle_grid_points: grid_points,
        oracle_cap: cap,
        ..SolverSettings::default()
    };
    let search = Search::new(p, &settings)?;
    search.oracle()
}

struct Search<'a> {
    grid: Grid,
    net: &'a Network,
    alpha: f64,
    dir: Direction,
    bounds: Vec<(f64, f64)>,
    /// lines whose beta can move
    movable: Vec<usize>,
    budget: Option<f64>,
    warm: Vec<Vec<f64>>,
    settings: SolverSettings,
    /// objective tolerance in pu
    tol: f64,
    /// best conceivable objective, pu
    ceiling: f64,
}

struct LocalResult {
    dispatch: Dispatch,
    beta: Vec<f64>,
    converged: bool,
}

impl<'a> Search<'a> {
    fn new(p: &BilinearProblem<'a>, s: &SolverSettings) -> Result<Self> {
        let issues = validate_network(p.net);
        if !issues.is_empty() {
            return Err(Error::InvalidNetwork(issues[0].to_string()));
        }
        s.check()?;
        check_inputs(&LpSubproblem::new(p.net, p.alpha, p.direction))?;
        if let Some(b) = p.budget {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!("budget {b} must be >= 0")));
            }
        }
        if p.weights.len() != p.net.buses.len() || p.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("bad weight vector".into()));
        }
        let bounds = p.line_bounds();
        let movable: Vec<usize> = (0..bounds.len())
            .filter(|&l| bounds[l].1 - bounds[l].0 > 1e-12)
            .collect();
        let grid = Grid::new(p.net, &p.weights);
        let ceiling = grid.objective_bound(p.alpha, p.direction);
        Ok(Search {
            tol: s.tol_obj / p.net.base_mva,
            grid,
            net: p.net,
            alpha: p.alpha,
            dir: p.direction,
            bounds,
            movable,
            budget: p.budget,
            warm: p.warm_starts.clone(),
            settings: s.clone(),
            ceiling,
        })
    }

    fn sense(&self) -> f64 {
        self.dir.sense()
    }

    /// Oriented gain of `a` over `b` (positive when `a` is better).
    fn gain(&self, a: f64, b: f64) -> f64 {
        self.sense() * (a - b)
    }

    fn certified(&self, obj: f64) -> bool {
        self.gain(obj, self.ceiling) >= -1e-9 * (1.0 + self.ceiling.abs())
    }

    fn solve_at(&self, beta: &[f64], hint: &[usize]) -> Result<Dispatch> {
        self.grid.solve(self.alpha, self.dir, beta, hint)
    }

    /// Projects a beta vector into the strategy box and the budget.
    fn project(&self, raw: &[f64]) -> Vec<f64> {
        let mut beta = vec![0.0; self.bounds.len()];
        for &l in &self.movable {
            let (lo, hi) = self.bounds[l];
            beta[l] = raw.get(l).copied().unwrap_or(0.0).clamp(lo, hi);
        }
        if let Some(tau) = self.budget {
            let total: f64 = beta.iter().map(|b| b.abs()).sum();
            if total > tau {
                let scale = if total > 0.0 { tau / total } else { 0.0 };
                for b in beta.iter_mut() {
                    *b *= scale;
                }
            }
        }
        beta
    }

    fn starts(&self) -> Vec<Vec<f64>> {
        let n = self.bounds.len();
        let mut out = vec![vec![0.0; n]];
        if self.movable.is_empty() {
            return out;
        }
        for w in &self.warm {
            out.push(self.project(w));
        }
        let lows: Vec<f64> = self.bounds.iter().map(|b| b.0).collect();
        let highs: Vec<f64> = self.bounds.iter().map(|b| b.1).collect();
        for corner in [lows, highs] {
            let c = self.project(&corner);
            if c.iter().any(|v| *v != 0.0) {
                out.push(c);
            }
        }
        let fixed = out.len() - self.warm.len();
        for k in fixed..self.settings.multistarts.max(fixed) {
            let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
            rng.set_stream(k as u64);
            let mut raw = vec![0.0; n];
            for &l in &self.movable {
                let (lo, hi) = self.bounds[l];
                raw[l] = lo + (hi - lo) * rng.random::<f64>();
            }
            out.push(self.project(&raw));
        }
        out
    }

    fn run(&self) -> AlphaCutSolution {
        let mut best: Option<(LocalResult, usize)> = None;
        let mut any_converged = false;
        let mut failure = SolveStatus::Infeasible;
        for (k, start) in self.starts().into_iter().enumerate() {
            let local = match self.local_search(start) {
                Ok(Some(r)) => r,
                Ok(None) => continue,
                Err(_) => {
                    failure = SolveStatus::NumericalFailure;
                    continue;
                }
            };
            any_converged |= local.converged;
            let replace = match &best {
                None => true,
                Some((b, _)) => {
                    let g = self.gain(local.dispatch.objective, b.dispatch.objective);
                    g > self.tol
                        || (g.abs() <= self.tol && abs_sum(&local.beta) < abs_sum(&b.beta) - 1e-12)
                }
            };
            if replace {
                best = Some((local, k));
            }
            if best.as_ref().is_some_and(|(b, _)| self.certified(b.dispatch.objective)) {
                any_converged = true;
                break;
            }
        }
        let Some((best, _)) = best else {
            return AlphaCutSolution::failed(self.net, self.alpha, self.dir, failure);
        };
        let polished = self
            .grid
            .tie_break(self.alpha, self.dir, &best.beta, &best.dispatch)
            .unwrap_or_else(|_| best.dispatch.clone());
        let mut sol = self.grid.finalize(self.alpha, self.dir, &best.beta, &polished);
        if !any_converged {
            sol.status = SolveStatus::IterationLimit;
        }
        sol
    }

    fn local_search(&self, start: Vec<f64>) -> Result<Option<LocalResult>> {
        let mut beta = start;
        let mut cur = self.solve_at(&beta, &[])?;
        if cur.status != SolveStatus::Optimal {
            return Ok(None);
        }
        if self.movable.is_empty() {
            return Ok(Some(LocalResult {
                dispatch: cur,
                beta,
                converged: true,
            }));
        }
        let widest = self
            .movable
            .iter()
            .map(|&l| self.bounds[l].1 - self.bounds[l].0)
            .fold(0.0, f64::max);
        let rho_max = widest;
        let rho_min = 1e-5 * widest.max(1e-3);
        let mut rho = 0.25 * widest;
        let mut converged = false;
        for _ in 0..self.settings.max_outer_iters {
            if self.certified(cur.objective) {
                converged = true;
                break;
            }
            let mut improved = false;

            if let Some(next) = self.angle_fixed_step(&cur, &beta)? {
                let cand = self.solve_at(&next, &cur.active_lines())?;
                if cand.status == SolveStatus::Optimal
                    && self.gain(cand.objective, cur.objective) > self.tol
                {
                    beta = next;
                    cur = cand;
                    improved = true;
                }
            }

            while rho >= rho_min {
                let Some(next) = self.linearized_step(&cur, &beta, rho)? else {
                    rho *= 0.25;
                    continue;
                };
                let cand = self.solve_at(&next, &cur.active_lines())?;
                if cand.status == SolveStatus::Optimal
                    && self.gain(cand.objective, cur.objective) > self.tol
                {
                    beta = next;
                    cur = cand;
                    improved = true;
                    rho = (2.0 * rho).min(rho_max);
                    break;
                }
                rho *= 0.25;
            }
            if !improved {
                converged = true;
                break;
            }
            rho = rho.max(rho_min * 4.0);
        }
        Ok(Some(LocalResult {
            dispatch: cur,
            beta,
            converged,
        }))
    }

    /// Adds beta variables to `lp` for every movable line, split into
    /// positive and negative parts when a budget applies. Returns, per
    /// movable line, the (variable, coefficient) pairs whose sum is beta.
    fn beta_vars(
        &self,
        lp: &mut LinearProgram,
        ranges: &[(f64, f64)],
        current: &[f64],
    ) -> Vec<Vec<(usize, f64)>> {
        match self.budget {
            None => ranges
                .iter()
                .map(|&(lo, hi)| vec![(lp.add_var(0.0, lo, hi), 1.0)])
                .collect(),
            Some(tau) => {
                let mut parts = Vec::with_capacity(ranges.len());
                let mut sum_terms = Vec::new();
                for &(lo, hi) in ranges {
                    let plus = lp.add_var(0.0, lo.max(0.0), hi.max(0.0));
                    let minus = lp.add_var(0.0, (-hi).max(0.0), (-lo).max(0.0));
                    sum_terms.push((plus, 1.0));
                    sum_terms.push((minus, 1.0));
                    parts.push(vec![(plus, 1.0), (minus, -1.0)]);
                }
                let fixed: f64 = (0..current.len())
                    .filter(|l| !self.movable.contains(l))
                    .map(|l| current[l].abs())
                    .sum();
                lp.add_row(sum_terms, f64::NEG_INFINITY, (tau - fixed).max(0.0));
                parts
            }
        }
    }

    /// Holds the angles of `cur` and lets beta, demand and generation move.
    /// With angles fixed every device flow is affine in its beta, so only
    /// buses touched by a movable line take part.
    fn angle_fixed_step(&self, cur: &Dispatch, beta: &[f64]) -> Result<Option<Vec<f64>>> {
        let g = &self.grid;
        let mut touched = vec![false; g.nb];
        for &l in &self.movable {
            touched[g.ends[l].0] = true;
            touched[g.ends[l].1] = true;
        }
        let bounds = g.demand_bounds(self.alpha);
        let mut lp = LinearProgram::new();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); g.nb];
        let mut rhs = vec![0.0; g.nb];

        for (k, &i) in g.demand_bus.iter().enumerate() {
            if touched[i] {
                let (lo, hi) = bounds[k];
                let v = lp.add_var(-self.sense() * g.weight[i], lo, hi);
                rows[i].push((v, -1.0));
            }
        }
        for (k, &i) in g.gen_bus.iter().enumerate() {
            if touched[i] {
                let v = lp.add_var(0.0, g.gen_lo[k], g.gen_hi[k]);
                rows[i].push((v, 1.0));
            }
        }
        // flows of lines that stay fixed
        for l in 0..g.num_lines() {
            if !g.in_service[l] || self.movable.contains(&l) {
                continue;
            }
            let (a, b) = g.ends[l];
            rhs[a] += cur.flow[l];
            rhs[b] -= cur.flow[l];
        }
        let mut ranges = Vec::with_capacity(self.movable.len());
        let mut slope = Vec::with_capacity(self.movable.len());
        for &l in &self.movable {
            let (a, b) = g.ends[l];
            let s = g.b[l] * (cur.theta[a] - cur.theta[b]);
            let (lo, mut hi) = self.bounds[l];
            if s.abs() > 1e-14 {
                let cap = (g.limit[l] + LIMIT_TOL) / s.abs() - 1.0;
                hi = hi.min(cap.max(beta[l]));
            }
            let lo = lo.min(hi);
            ranges.push((lo, hi));
            slope.push(s);
            // flow = s + s*beta leaves a, enters b
            rhs[a] += s;
            rhs[b] -= s;
        }
        let parts = self.beta_vars(&mut lp, &ranges, beta);
        for (m, &l) in self.movable.iter().enumerate() {
            let (a, b) = g.ends[l];
            for &(v, c) in &parts[m] {
                rows[a].push((v, -slope[m] * c));
                rows[b].push((v, slope[m] * c));
            }
        }
        for i in 0..g.nb {
            if touched[i] {
                lp.add_row(std::mem::take(&mut rows[i]), rhs[i], rhs[i]);
            }
        }
        let sol = lp.solve();
        if sol.status != LpStatus::Optimal {
            return Ok(None);
        }
        let mut next = beta.to_vec();
        for (m, &l) in self.movable.iter().enumerate() {
            let v: f64 = parts[m].iter().map(|&(v, c)| c * sol.x[v]).sum();
            next[l] = v.clamp(self.bounds[l].0, self.bounds[l].1);
        }
        Ok(Some(self.project(&next)))
    }

    /// First-order model in beta around the incumbent, restricted to a box
    /// of half-width `rho`. Flows are exact in the injections and linear in
    /// the beta change.
    fn linearized_step(&self, cur: &Dispatch, beta: &[f64], rho: f64) -> Result<Option<Vec<f64>>> {
        let g = &self.grid;
        let dc = g.factor(beta)?;
        let nl = g.num_lines();
        // sensitivity of every line flow to each movable beta
        let mut sens: Vec<Vec<f64>> = Vec::with_capacity(self.movable.len());
        for &k in &self.movable {
            let (a, b) = g.ends[k];
            let z = dc.transfer_angles(a, b);
            let scale = g.b[k] * (cur.theta[a] - cur.theta[b]);
            let col: Vec<f64> = (0..nl)
                .map(|l| {
                    if !g.in_service[l] {
                        return 0.0;
                    }
                    let (i, j) = g.ends[l];
                    let phi = dc.y[l] * (z[i] - z[j]);
                    scale * (if l == k { 1.0 } else { 0.0 } - phi)
                })
                .collect();
            sens.push(col);
        }
        if sens.iter().all(|c| c.iter().all(|v| *v == 0.0)) {
            return Ok(None);
        }

        let bounds = g.demand_bounds(self.alpha);
        let mut active = cur.active.clone();
        for l in 0..nl {
            if g.in_service[l] && cur.flow[l].abs() >= 0.9 * g.limit[l] {
                active[l] = true;
            }
        }
        let ranges: Vec<(f64, f64)> = self
            .movable
            .iter()
            .map(|&l| {
                let (lo, hi) = self.bounds[l];
                ((beta[l] - rho).max(lo), (beta[l] + rho).min(hi))
            })
            .collect();

        loop {
            let mut lp = LinearProgram::new();
            let pd: Vec<usize> = g
                .demand_bus
                .iter()
                .enumerate()
                .map(|(k, &i)| lp.add_var(-self.sense() * g.weight[i], bounds[k].0, bounds[k].1))
                .collect();
            let pg: Vec<usize> = (0..g.gen_bus.len())
                .map(|k| lp.add_var(0.0, g.gen_lo[k], g.gen_hi[k]))
                .collect();
            let parts = self.beta_vars(&mut lp, &ranges, beta);
            let mut bal: Vec<(usize, f64)> = pg.iter().map(|&v| (v, 1.0)).collect();
            bal.extend(pd.iter().map(|&v| (v, -1.0)));
            lp.add_row(bal, 0.0, 0.0);
            for l in (0..nl).filter(|&l| active[l] && g.in_service[l]) {
                let h = dc.ptdf_row(g, l);
                let mut terms = Vec::new();
                for (k, &v) in pg.iter().enumerate() {
                    terms.push((v, h[g.gen_bus[k]]));
                }
                for (k, &v) in pd.iter().enumerate() {
                    terms.push((v, -h[g.demand_bus[k]]));
                }
                let mut offset = 0.0;
                for (m, &k) in self.movable.iter().enumerate() {
                    let c = sens[m][l];
                    if c != 0.0 {
                        offset -= c * beta[k];
                        terms.extend(parts[m].iter().map(|&(v, a)| (v, c * a)));
                    }
                }
                terms.retain(|t| t.1 != 0.0);
                lp.add_row(terms, -g.limit[l] - offset, g.limit[l] - offset);
            }
            let sol = lp.solve();
            if sol.status != LpStatus::Optimal {
                let _ = map_status(sol.status);
                return Ok(None);
            }
            let mut pd_bus = vec![0.0; g.nb];
            for (k, &v) in pd.iter().enumerate() {
                pd_bus[g.demand_bus[k]] = sol.x[v];
            }
            let pg_val: Vec<f64> = pg.iter().map(|&v| sol.x[v]).collect();
            let theta = dc.angles(&g.injection(&pd_bus, &pg_val));
            let base_flow = dc.flows(g, &theta);
            let mut next = beta.to_vec();
            for (m, &k) in self.movable.iter().enumerate() {
                next[k] = parts[m].iter().map(|&(v, c)| c * sol.x[v]).sum();
            }
            let mut added = false;
            for l in 0..nl {
                if !g.in_service[l] || active[l] {
                    continue;
                }
                let f: f64 = base_flow[l]
                    + self
                        .movable
                        .iter()
                        .enumerate()
                        .map(|(m, &k)| sens[m][l] * (next[k] - beta[k]))
                        .sum::<f64>();
                if f.abs() > g.limit[l] + LIMIT_TOL {
                    active[l] = true;
                    added = true;
                }
            }
            if !added {
                let next = self.project(&next);
                if next.iter().zip(beta).all(|(a, b)| (a - b).abs() < 1e-12) {
                    return Ok(None);
                }
                return Ok(Some(next));
            }
        }
    }

    fn oracle(&self) -> Result<OracleResult> {
        let pts = self.settings.oracle_grid_points;
        let axes: Vec<Vec<f64>> = self
            .movable
            .iter()
            .map(|&l| {
                let (lo, hi) = self.bounds[l];
                let mut v = uniform(lo, hi, pts);
                if lo < 0.0 && hi > 0.0 && !v.iter().any(|x| x.abs() < 1e-12) {
                    v.push(0.0);
                    v.sort_by(f64::total_cmp);
                }
                v
            })
            .collect();
        let coarse_count: u128 = axes.iter().map(|a| a.len() as u128).product();
        let refine_count: u128 = (pts as u128).pow(self.movable.len() as u32);
        let needed = coarse_count + if self.movable.is_empty() { 0 } else { refine_count };
        if needed > self.settings.oracle_cap as u128 {
            return Err(Error::OracleCapExceeded {
                needed,
                cap: self.settings.oracle_cap,
            });
        }
        let mut evaluations = 0u64;
        let base = self.net.base_mva;
        let (coarse_obj, coarse_beta) = self.enumerate(&axes, &mut evaluations)?;
        let Some(mut best_beta) = coarse_beta else {
            return Ok(OracleResult {
                objective: f64::NAN,
                coarse_objective: f64::NAN,
                beta: vec![0.0; self.bounds.len()],
                evaluations,
            });
        };
        let mut best_obj = coarse_obj;
        if !self.movable.is_empty() {
            let fine: Vec<Vec<f64>> = self
                .movable
                .iter()
                .zip(&axes)
                .map(|(&l, axis)| {
                    let (lo, hi) = self.bounds[l];
                    let step = axis
                        .windows(2)
                        .map(|w| w[1] - w[0])
                        .fold(0.0, f64::max);
                    let c = best_beta[l];
                    uniform((c - step).max(lo), (c + step).min(hi), pts)
                })
                .collect();
            let (fine_obj, fine_beta) = self.enumerate(&fine, &mut evaluations)?;
            if let Some(b) = fine_beta {
                if self.gain(fine_obj, best_obj) > 0.0 {
                    best_obj = fine_obj;
                    best_beta = b;
                }
            }
        }
        // report through the same polish as the solver so equal betas give
        // equal objectives
        let raw = self.solve_at(&best_beta, &[])?;
        let polished = self
            .grid
            .tie_break(self.alpha, self.dir, &best_beta, &raw)
            .unwrap_or(raw);
        let objective = self.grid.finalize(self.alpha, self.dir, &best_beta, &polished).objective;
        debug_assert!((objective - best_obj * base).abs() <= 1e-6 * (1.0 + objective.abs()));
        Ok(OracleResult {
            objective,
            coarse_objective: coarse_obj * base,
            beta: best_beta,
            evaluations,
        })
    }

    fn enumerate(&self, axes: &[Vec<f64>], evaluations: &mut u64) -> Result<(f64, Option<Vec<f64>>)> {
        let mut idx = vec![0usize; axes.len()];
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut hint: Vec<usize> = Vec::new();
        loop {
            let mut beta = vec![0.0; self.bounds.len()];
            for (m, &l) in self.movable.iter().enumerate() {
                beta[l] = axes[m][idx[m]];
            }
            let within_budget = self
                .budget
                .is_none_or(|tau| abs_sum(&beta) <= tau + 1e-12);
            if within_budget {
                let d = self.solve_at(&beta, &hint)?;
                *evaluations += 1;
                if d.status == SolveStatus::Optimal {
                    hint = d.active_lines();
                    if best.as_ref().is_none_or(|(b, _)| self.gain(d.objective, *b) > 0.0) {
                        best = Some((d.objective, beta));
                    }
                }
            }
            // mixed-radix increment
            let mut m = 0;
            loop {
                if m == axes.len() {
                    return Ok(match best {
                        Some((o, b)) => (o, Some(b)),
                        None => (f64::NAN, None),
                    });
                }
                idx[m] += 1;
                if idx[m] < axes[m].len() {
                    break;
                }
                idx[m] = 0;
                m += 1;
            }
        }
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi - lo <= 1e-15 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn abs_sum(v: &[f64]) -> f64 {
    v.iter().map(|b| b.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::solve_fixed_beta;
    use crate::model::{Bus, BusId, FuzzyDemand, Generator, Line, StrategyKind};

    /// Generator at bus 1, load at bus 3, two routes: direct 1-3 with a
    /// tight limit and 1-2-3 with room to spare.
    fn triangle() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus::new(1),
                Bus::new(2),
                Bus::new(3).with_demand(FuzzyDemand::new(300.0, 400.0, 255.0).unwrap()),
            ],
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 600.0,
            }],
            lines: vec![
                Line::new(1, 2, 0.05, 400.0).with_beta(-0.2, 0.2),
                Line::new(2, 3, 0.05, 400.0).with_beta(-0.2, 0.2),
                Line::new(1, 3, 0.05, 200.0).with_beta(-0.2, 0.2),
            ],
            reference_bus: None,
        }
    }

    #[test]
    fn base_strategy_matches_fixed_beta_lp() {
        let net = triangle();
        let s = SolverSettings::default();
        let p = BilinearProblem::new(&net, 0.0, Direction::Max, Strategy::base());
        let a = solve_mfacts(&p, &s).unwrap();
        let b = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Max)).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.demand, b.demand);
        let o = brute_force_oracle(&p, 5, 1000).unwrap();
        assert_eq!(o.evaluations, 1);
        assert_eq!(o.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn devices_never_hurt_the_max_direction() {
        let net = triangle();
        let s = SolverSettings::default();
        let base = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Max)).unwrap();
        // base: direct path takes 2/3 of the load and caps it at 300 MW
        assert!((base.objective - 300.0).abs() < 1e-6);
        for kind in [StrategyKind::Inductive, StrategyKind::Capacitive, StrategyKind::Smart] {
            let p = BilinearProblem::new(&net, 0.0, Direction::Max, Strategy::new(kind, 0.2));
            let sol = solve_mfacts(&p, &s).unwrap();
            assert!(sol.objective >= base.objective - 1e-9);
            assert!(sol.max_flow_residual(&net) < 1e-6 * net.base_mva);
            assert!(sol.max_balance_residual(&net) < 1e-6);
            assert!(sol.max_limit_violation(&net) < 1e-6);
        }
    }

    #[test]
    fn triangle_matches_oracle() {
        // the direct line caps the load: with y13 = 20(1+b3) and the path
        // 1-2-3 worth 10(1+b1)(1+b2)/((1+b1)+(1+b2)) the best share goes to
        // the corner b3 = -0.2, b1 = b2 = 0.2
        let net = triangle();
        let s = SolverSettings::default();
        let p = BilinearProblem::new(&net, 0.0, Direction::Max, Strategy::new(StrategyKind::Smart, 0.2));
        let sol = solve_mfacts(&p, &s).unwrap();
        let o = brute_force_oracle(&p, 5, 100_000).unwrap();
        assert!((sol.objective - o.objective).abs() <= 1e-4, "{} vs {}", sol.objective, o.objective);
        assert!((o.beta[2] + 0.2).abs() < 1e-12);
        // path admittance 20*1.2*1.2/2.4 = 12 vs direct 16 -> share 16/28
        let expect = 200.0 * 28.0 / 16.0;
        assert!((sol.objective - expect).abs() < 1e-6, "{}", sol.objective);
    }

    #[test]
    fn budget_is_respected() {
        let net = triangle();
        let s = SolverSettings::default();
        let p = BilinearProblem::new(&net, 0.0, Direction::Max, Strategy::new(StrategyKind::Smart, 0.2))
            .with_budget(0.15);
        let sol = solve_mfacts(&p, &s).unwrap();
        assert!(sol.total_abs_beta() <= 0.15 + 1e-9);
        let zero = solve_mfacts(&p.clone().with_budget(0.0), &s).unwrap();
        assert!(zero.beta.iter().all(|b| *b == 0.0));
        let base = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Max)).unwrap();
        assert!((zero.objective - base.objective).abs() < 1e-9);
        assert!(sol.objective > base.objective + 1.0);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let net = triangle();
        let p = BilinearProblem::new(&net, 0.0, Direction::Max, Strategy::new(StrategyKind::Smart, 0.2));
        assert!(matches!(
            brute_force_oracle(&p, 5, 10),
            Err(Error::OracleCapExceeded { .. })
        ));
    }

    #[test]
    fn uniform_grid_includes_endpoints() {
        assert_eq!(uniform(-0.2, 0.0, 5).len(), 5);
        assert_eq!(*uniform(-0.2, 0.0, 5).last().unwrap(), 0.0);
        assert_eq!(uniform(0.0, 0.0, 5), vec![0.0]);
    }
}
