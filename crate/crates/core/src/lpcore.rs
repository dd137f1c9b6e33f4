//! Fixed-susceptance load-serving LP.
//!
//! With every `beta` fixed the DC network is linear, so the weighted demand
//! can be optimised exactly. The LP is stated in injection space: bus angles
//! are eliminated through the power transfer distribution factors of the
//! current susceptances, leaving one system balance row plus one ranged row
//! per thermal limit. Limit rows are generated lazily: the LP is solved
//! with the rows seen so far, every line is checked against the resulting
//! flows, and violated lines are added until none remain.
//!
//! Per-bus attribution is made reproducible by a second LP that fixes the
//! optimal aggregate and minimises a bus-ordered weighted distance of each
//! demand from its forecast.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::model::{
    fuzzy_bounds, validate_network, AlphaCutSolution, Direction, Network, SolveStatus,
};
use crate::simplex::{LinearProgram, LpStatus};

/// Flow tolerance when checking limits, per unit.
pub(crate) const LIMIT_TOL: f64 = 1e-9;

/// A fixed-beta problem instance.
#[derive(Debug, Clone)]
pub struct LpSubproblem<'a> {
    pub net: &'a Network,
    pub alpha: f64,
    pub direction: Direction,
    /// Susceptance multiplier offset per line.
    pub beta: Vec<f64>,
    /// Objective weight per bus.
    pub weights: Vec<f64>,
}

impl<'a> LpSubproblem<'a> {
    /// `beta = 0` everywhere, weights taken from the buses.
    pub fn new(net: &'a Network, alpha: f64, direction: Direction) -> Self {
        LpSubproblem {
            net,
            alpha,
            direction,
            beta: vec![0.0; net.lines.len()],
            weights: net.buses.iter().map(|b| b.weight).collect(),
        }
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Self {
        self.beta = beta;
        self
    }
}

/// Solves the fixed-beta LP with lexicographic tie-breaking of the per-bus
/// demands.
///
/// Infeasibility is reported through [`AlphaCutSolution::status`]; errors are
/// reserved for malformed input.
pub fn solve_fixed_beta(p: &LpSubproblem<'_>) -> Result<AlphaCutSolution> {
    let issues = validate_network(p.net);
    if !issues.is_empty() {
        return Err(Error::InvalidNetwork(issues[0].to_string()));
    }
    check_inputs(p)?;
    let grid = Grid::new(p.net, &p.weights);
    let first = grid.solve(p.alpha, p.direction, &p.beta, &[])?;
    let sol = grid.tie_break(p.alpha, p.direction, &p.beta, &first)?;
    Ok(grid.finalize(p.alpha, p.direction, &p.beta, &sol))
}

pub(crate) fn check_inputs(p: &LpSubproblem<'_>) -> Result<()> {
    if !(0.0..=1.0).contains(&p.alpha) {
        return Err(Error::AlphaOutOfRange(p.alpha));
    }
    if p.beta.len() != p.net.lines.len() || p.weights.len() != p.net.buses.len() {
        return Err(Error::InvalidArgument(
            "beta/weight vectors do not match the network".into(),
        ));
    }
    for (l, b) in p.net.lines.iter().zip(&p.beta) {
        if !(l.beta_min - 1e-12..=l.beta_max + 1e-12).contains(b) {
            return Err(Error::InvalidArgument(format!(
                "beta {b} on line {} outside [{}, {}]",
                l.key(),
                l.beta_min,
                l.beta_max
            )));
        }
    }
    if p.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
    }
    Ok(())
}

/// Network data in per unit with bus indices resolved.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    pub base: f64,
    pub nb: usize,
    pub ref_idx: usize,
    /// (from, to) bus indices per line
    pub ends: Vec<(usize, usize)>,
    pub in_service: Vec<bool>,
    /// base susceptance per line, pu
    pub b: Vec<f64>,
    /// thermal limit per line, pu
    pub limit: Vec<f64>,
    pub gen_bus: Vec<usize>,
    pub gen_lo: Vec<f64>,
    pub gen_hi: Vec<f64>,
    /// demand bus indices in ascending bus-id order
    pub demand_bus: Vec<usize>,
    /// (forecast, upper, lower) per demand bus, pu
    pub fuzzy: Vec<(f64, f64, f64)>,
    pub weight: Vec<f64>,
    /// tie-break cost per demand bus, larger for lower bus ids
    pub tie_cost: Vec<f64>,
}

impl Grid {
    /// Assumes `net` passed validation.
    pub fn new(net: &Network, weights: &[f64]) -> Grid {
        let base = net.base_mva;
        let idx = |id| net.bus_index(id).expect("validated bus reference");
        let ref_idx = idx(net.reference().expect("nonempty network"));
        let ends = net.lines.iter().map(|l| (idx(l.from), idx(l.to))).collect();
        let mut demand: Vec<(crate::model::BusId, usize)> =
            net.demand_buses().map(|(i, b, _)| (b.id, i)).collect();
        demand.sort();
        let demand_bus: Vec<usize> = demand.iter().map(|(_, i)| *i).collect();
        let nd = demand_bus.len().max(1) as f64;
        let fuzzy = demand_bus
            .iter()
            .map(|&i| {
                let d = net.buses[i].demand.expect("demand bus");
                (d.forecast / base, d.upper / base, d.lower / base)
            })
            .collect();
        let tie_cost = (0..demand_bus.len())
            .map(|k| 1.0 + (nd - k as f64) / nd)
            .collect();
        Grid {
            base,
            nb: net.buses.len(),
            ref_idx,
            ends,
            in_service: net.lines.iter().map(|l| l.in_service).collect(),
            b: net.lines.iter().map(|l| l.susceptance()).collect(),
            limit: net.lines.iter().map(|l| l.limit / base).collect(),
            gen_bus: net.generators.iter().map(|g| idx(g.bus)).collect(),
            gen_lo: net.generators.iter().map(|g| g.p_min / base).collect(),
            gen_hi: net.generators.iter().map(|g| g.p_max / base).collect(),
            demand_bus,
            fuzzy,
            weight: weights.to_vec(),
            tie_cost,
        }
    }

    pub fn num_lines(&self) -> usize {
        self.ends.len()
    }

    /// Demand interval per demand bus at `alpha`, pu.
    pub fn demand_bounds(&self, alpha: f64) -> Vec<(f64, f64)> {
        self.fuzzy
            .iter()
            .map(|&(f, u, l)| {
                let d = crate::model::FuzzyDemand {
                    forecast: f,
                    upper: u,
                    lower: l,
                };
                fuzzy_bounds(&d, alpha).expect("alpha checked by caller")
            })
            .collect()
    }

    /// Best objective attainable if every demand reached its favourable
    /// bound, pu.
    pub fn objective_bound(&self, alpha: f64, dir: Direction) -> f64 {
        self.demand_bounds(alpha)
            .iter()
            .zip(&self.demand_bus)
            .map(|(&(lo, hi), &i)| {
                self.weight[i]
                    * match dir {
                        Direction::Max => hi,
                        Direction::Min => lo,
                    }
            })
            .sum()
    }

    pub fn factor(&self, beta: &[f64]) -> Result<DcFactor> {
        DcFactor::new(self, beta)
    }

    /// Optimal fixed-beta dispatch (aggregate objective only).
    pub fn solve(
        &self,
        alpha: f64,
        dir: Direction,
        beta: &[f64],
        hint: &[usize],
    ) -> Result<Dispatch> {
        let dc = self.factor(beta)?;
        let bounds = self.demand_bounds(alpha);
        let mut active = vec![false; self.num_lines()];
        for &l in hint {
            if self.in_service[l] {
                active[l] = true;
            }
        }
        loop {
            let stage = self.build(&dc, &bounds, dir, &active, None);
            let lp_sol = stage.lp.solve();
            let status = map_status(lp_sol.status);
            if status != SolveStatus::Optimal {
                return Ok(Dispatch::failed(self, status));
            }
            let (pd, pg) = stage.extract(self, &lp_sol.x);
            let d = self.dispatch(&dc, pd, pg, status, active.clone());
            if !self.activate_violations(&d.flow, &mut active) {
                return Ok(d);
            }
        }
    }

    /// Re-solves at the optimum with the aggregate pinned, minimising the
    /// tie-break distance from the forecast. Falls back to `first` when the
    /// second stage fails.
    pub fn tie_break(
        &self,
        alpha: f64,
        dir: Direction,
        beta: &[f64],
        first: &Dispatch,
    ) -> Result<Dispatch> {
        if first.status != SolveStatus::Optimal || self.demand_bus.is_empty() {
            return Ok(first.clone());
        }
        let dc = self.factor(beta)?;
        let bounds = self.demand_bounds(alpha);
        let mut active = first.active.clone();
        let target = first.objective;
        loop {
            let stage = self.build(&dc, &bounds, dir, &active, Some(target));
            let lp_sol = stage.lp.solve();
            if lp_sol.status != LpStatus::Optimal {
                return Ok(first.clone());
            }
            let (pd, pg) = stage.extract(self, &lp_sol.x);
            let d = self.dispatch(&dc, pd, pg, SolveStatus::Optimal, active.clone());
            if !self.activate_violations(&d.flow, &mut active) {
                return Ok(d);
            }
        }
    }

    fn activate_violations(&self, flow: &[f64], active: &mut [bool]) -> bool {
        let mut added = false;
        for l in 0..self.num_lines() {
            if self.in_service[l] && !active[l] && flow[l].abs() > self.limit[l] + LIMIT_TOL {
                active[l] = true;
                added = true;
            }
        }
        added
    }

    fn dispatch(
        &self,
        dc: &DcFactor,
        pd: Vec<f64>,
        pg: Vec<f64>,
        status: SolveStatus,
        active: Vec<bool>,
    ) -> Dispatch {
        let inj = self.injection(&pd, &pg);
        let theta = dc.angles(&inj);
        let flow = dc.flows(self, &theta);
        let objective = self
            .demand_bus
            .iter()
            .map(|&i| self.weight[i] * pd[i])
            .sum();
        Dispatch {
            status,
            objective,
            pd,
            pg,
            theta,
            flow,
            active,
        }
    }

    pub fn injection(&self, pd: &[f64], pg: &[f64]) -> Vec<f64> {
        let mut inj = vec![0.0; self.nb];
        for (g, p) in self.gen_bus.iter().zip(pg) {
            inj[*g] += p;
        }
        for (i, d) in pd.iter().enumerate() {
            inj[i] -= d;
        }
        inj
    }

    /// Builds the injection-space LP. With `pin = Some(z)` the aggregate is
    /// held at `z` and demands are expressed as forecast plus/minus
    /// deviations.
    fn build(
        &self,
        dc: &DcFactor,
        bounds: &[(f64, f64)],
        dir: Direction,
        active: &[bool],
        pin: Option<f64>,
    ) -> StageLp {
        let mut lp = LinearProgram::new();
        let mut demand_terms: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(bounds.len());
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            let i = self.demand_bus[k];
            match pin {
                None => {
                    let cost = -dir.sense() * self.weight[i];
                    let v = lp.add_var(cost, lo, hi);
                    demand_terms.push((0.0, vec![(v, 1.0)]));
                }
                Some(_) => {
                    let f = self.fuzzy[k].0;
                    let c = self.tie_cost[k];
                    let up = lp.add_var(c, 0.0, (hi - f).max(0.0));
                    let down = lp.add_var(c, 0.0, (f - lo).max(0.0));
                    demand_terms.push((f, vec![(up, 1.0), (down, -1.0)]));
                }
            }
        }
        let gen_vars: Vec<usize> = (0..self.gen_bus.len())
            .map(|g| lp.add_var(0.0, self.gen_lo[g], self.gen_hi[g]))
            .collect();

        // system balance: sum pg - sum pd = 0
        let mut terms: Vec<(usize, f64)> = gen_vars.iter().map(|&v| (v, 1.0)).collect();
        let mut constant = 0.0;
        for (c, t) in &demand_terms {
            constant += c;
            terms.extend(t.iter().map(|&(v, a)| (v, -a)));
        }
        lp.add_row(terms, constant, constant);

        if let Some(z) = pin {
            let mut terms = Vec::new();
            let mut constant = 0.0;
            for (k, (c, t)) in demand_terms.iter().enumerate() {
                let w = self.weight[self.demand_bus[k]];
                constant += w * c;
                terms.extend(t.iter().map(|&(v, a)| (v, w * a)));
            }
            let slack = 1e-10 * (1.0 + z.abs());
            match dir {
                Direction::Max => lp.add_row(terms, z - slack - constant, f64::INFINITY),
                Direction::Min => lp.add_row(terms, f64::NEG_INFINITY, z + slack - constant),
            };
        }

        for l in (0..self.num_lines()).filter(|&l| active[l] && self.in_service[l]) {
            let h = dc.ptdf_row(self, l);
            let mut terms = Vec::new();
            let mut constant = 0.0;
            for (g, &v) in gen_vars.iter().enumerate() {
                let c = h[self.gen_bus[g]];
                if c != 0.0 {
                    terms.push((v, c));
                }
            }
            for (k, (c0, t)) in demand_terms.iter().enumerate() {
                let c = h[self.demand_bus[k]];
                if c != 0.0 {
                    constant -= c * c0;
                    terms.extend(t.iter().map(|&(v, a)| (v, -c * a)));
                }
            }
            lp.add_row(terms, -self.limit[l] - constant, self.limit[l] - constant);
        }
        StageLp {
            lp,
            demand_terms,
            gen_vars,
        }
    }

    /// Turns a dispatch into the public solution type (MW, radians).
    pub fn finalize(
        &self,
        alpha: f64,
        dir: Direction,
        beta: &[f64],
        d: &Dispatch,
    ) -> AlphaCutSolution {
        if d.status != SolveStatus::Optimal {
            let mut s = AlphaCutSolution {
                alpha,
                direction: dir,
                status: d.status,
                objective: f64::NAN,
                demand: vec![0.0; self.nb],
                dispatch: vec![0.0; self.gen_bus.len()],
                angle: vec![0.0; self.nb],
                flow: vec![0.0; self.num_lines()],
                beta: vec![0.0; self.num_lines()],
            };
            s.beta.copy_from_slice(beta);
            return s;
        }
        let mw = |v: &[f64]| v.iter().map(|x| x * self.base).collect::<Vec<f64>>();
        AlphaCutSolution {
            alpha,
            direction: dir,
            status: d.status,
            objective: d.objective * self.base,
            demand: mw(&d.pd),
            dispatch: mw(&d.pg),
            angle: d.theta.clone(),
            flow: mw(&d.flow),
            beta: beta
                .iter()
                .zip(&self.in_service)
                .map(|(b, s)| if *s { *b } else { 0.0 })
                .collect(),
        }
    }
}

pub(crate) fn map_status(s: LpStatus) -> SolveStatus {
    match s {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded | LpStatus::Failed => SolveStatus::NumericalFailure,
    }
}

struct StageLp {
    lp: LinearProgram,
    demand_terms: Vec<(f64, Vec<(usize, f64)>)>,
    gen_vars: Vec<usize>,
}

impl StageLp {
    fn extract(&self, grid: &Grid, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pd = vec![0.0; grid.nb];
        for (k, (c, t)) in self.demand_terms.iter().enumerate() {
            pd[grid.demand_bus[k]] = c + t.iter().map(|&(v, a)| a * x[v]).sum::<f64>();
        }
        let pg = self.gen_vars.iter().map(|&v| x[v]).collect();
        (pd, pg)
    }
}

/// Dispatch in per unit, as produced by the fixed-beta LP.
#[derive(Debug, Clone)]
pub(crate) struct Dispatch {
    pub status: SolveStatus,
    /// weighted demand, pu
    pub objective: f64,
    /// demand per bus, pu
    pub pd: Vec<f64>,
    /// output per generator, pu
    pub pg: Vec<f64>,
    pub theta: Vec<f64>,
    /// flow per line, pu
    pub flow: Vec<f64>,
    /// lines whose limit rows were generated
    pub active: Vec<bool>,
}

impl Dispatch {
    fn failed(grid: &Grid, status: SolveStatus) -> Dispatch {
        Dispatch {
            status,
            objective: f64::NAN,
            pd: vec![0.0; grid.nb],
            pg: vec![0.0; grid.gen_bus.len()],
            theta: vec![0.0; grid.nb],
            flow: vec![0.0; grid.num_lines()],
            active: vec![false; grid.num_lines()],
        }
    }

    pub fn active_lines(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&l| self.active[l]).collect()
    }
}

/// LU factorisation of the reduced nodal susceptance matrix for one beta.
pub(crate) struct DcFactor {
    /// effective susceptance per line (zero when out of service)
    pub y: Vec<f64>,
    ref_idx: usize,
    lu: Option<LU<f64, Dyn, Dyn>>,
    nb: usize,
}

impl DcFactor {
    fn new(grid: &Grid, beta: &[f64]) -> Result<DcFactor> {
        let nb = grid.nb;
        let y: Vec<f64> = (0..grid.num_lines())
            .map(|l| {
                if grid.in_service[l] {
                    grid.b[l] * (1.0 + beta[l])
                } else {
                    0.0
                }
            })
            .collect();
        let red = |i: usize| if i < grid.ref_idx { Some(i) } else if i > grid.ref_idx { Some(i - 1) } else { None };
        let lu = if nb > 1 {
            let mut m = DMatrix::<f64>::zeros(nb - 1, nb - 1);
            for (l, &(a, b)) in grid.ends.iter().enumerate() {
                if y[l] == 0.0 {
                    continue;
                }
                let (ra, rb) = (red(a), red(b));
                if let Some(i) = ra {
                    m[(i, i)] += y[l];
                }
                if let Some(j) = rb {
                    m[(j, j)] += y[l];
                }
                if let (Some(i), Some(j)) = (ra, rb) {
                    m[(i, j)] -= y[l];
                    m[(j, i)] -= y[l];
                }
            }
            let lu = m.lu();
            if !lu.is_invertible() {
                return Err(Error::Numerical("singular susceptance matrix".into()));
            }
            Some(lu)
        } else {
            None
        };
        Ok(DcFactor {
            y,
            ref_idx: grid.ref_idx,
            lu,
            nb,
        })
    }

    /// Solves `B theta = rhs` with the reference angle at zero.
    pub fn angles(&self, rhs: &[f64]) -> Vec<f64> {
        let mut theta = vec![0.0; self.nb];
        let Some(lu) = &self.lu else {
            return theta;
        };
        let v = DVector::from_iterator(
            self.nb - 1,
            rhs.iter()
                .enumerate()
                .filter(|(i, _)| *i != self.ref_idx)
                .map(|(_, x)| *x),
        );
        let sol = lu.solve(&v).expect("factor checked invertible");
        let mut k = 0;
        for (i, t) in theta.iter_mut().enumerate() {
            if i != self.ref_idx {
                *t = sol[k];
                k += 1;
            }
        }
        theta
    }

    pub fn flows(&self, grid: &Grid, theta: &[f64]) -> Vec<f64> {
        grid.ends
            .iter()
            .zip(&self.y)
            .map(|(&(a, b), y)| y * (theta[a] - theta[b]))
            .collect()
    }

    /// Angles produced by a unit transfer from `a` to `b`.
    pub fn transfer_angles(&self, a: usize, b: usize) -> Vec<f64> {
        let mut rhs = vec![0.0; self.nb];
        rhs[a] += 1.0;
        rhs[b] -= 1.0;
        self.angles(&rhs)
    }

    /// Flow on line `l` per unit of injection at each bus (withdrawn at the
    /// reference).
    pub fn ptdf_row(&self, grid: &Grid, l: usize) -> Vec<f64> {
        let (a, b) = grid.ends[l];
        let z = self.transfer_angles(a, b);
        z.iter().map(|v| v * self.y[l]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, BusId, FuzzyDemand, Generator, Line};

    fn two_bus(limit: f64) -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus::new(1),
                Bus::new(2).with_demand(FuzzyDemand::new(300.0, 330.0, 270.0).unwrap()),
            ],
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 500.0,
            }],
            lines: vec![Line::new(1, 2, 0.1, limit)],
            reference_bus: None,
        }
    }

    #[test]
    fn line_limit_binds_below_upper_bound() {
        let net = two_bus(310.0);
        let s = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Max)).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.demand[1] - 310.0).abs() < 1e-6, "{}", s.demand[1]);
        assert!((s.objective - 310.0).abs() < 1e-6);
        assert!((s.flow[0] - 310.0).abs() < 1e-6);
    }

    #[test]
    fn min_direction_hits_lower_bound() {
        let net = two_bus(310.0);
        let s = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Min)).unwrap();
        assert!((s.demand[1] - 270.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_one_pins_demand_to_forecast() {
        let net = two_bus(1000.0);
        let s = solve_fixed_beta(&LpSubproblem::new(&net, 1.0, Direction::Max)).unwrap();
        assert!((s.demand[1] - 300.0).abs() < 1e-9);
        assert!((s.objective - 300.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_is_a_status() {
        let net = two_bus(100.0);
        let s = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Min)).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn rejects_beta_outside_line_bounds() {
        let net = two_bus(310.0);
        let p = LpSubproblem::new(&net, 0.0, Direction::Max).with_beta(vec![0.1]);
        assert!(solve_fixed_beta(&p).is_err());
        let p = LpSubproblem::new(&net, 1.2, Direction::Max);
        assert!(matches!(solve_fixed_beta(&p), Err(Error::AlphaOutOfRange(_))));
    }

    #[test]
    fn susceptance_scaling_shifts_parallel_flow() {
        // two parallel paths from 1 to 2; raising the susceptance of the
        // stronger path relieves the weaker, limited one
        let mut net = two_bus(1000.0);
        net.lines = vec![
            Line::new(1, 2, 0.1, 150.0).with_beta(-0.5, 0.5),
            {
                let mut l = Line::new(1, 2, 0.1, 400.0).with_beta(-0.5, 0.5);
                l.circuit = 2;
                l
            },
        ];
        let flat = solve_fixed_beta(&LpSubproblem::new(&net, 0.0, Direction::Max)).unwrap();
        assert!((flat.objective - 300.0).abs() < 1e-6);
        let tilted = solve_fixed_beta(
            &LpSubproblem::new(&net, 0.0, Direction::Max).with_beta(vec![-0.5, 0.5]),
        )
        .unwrap();
        // flows split 1:3, the first line caps at 150 -> 600 total, demand caps at 330
        assert!((tilted.objective - 330.0).abs() < 1e-6);
        assert!(tilted.max_flow_residual(&net) < 1e-9);
        assert!(tilted.max_balance_residual(&net) < 1e-9);
    }
}
