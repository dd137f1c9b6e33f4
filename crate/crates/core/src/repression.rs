//! Alpha sweeps, load repression and degrees of repression.
//!
//! At every alpha level the network is solved twice: once maximising and
//! once minimising the served demand. The shortfall against the forecast
//! interval at each bus, integrated over alpha, is the load repression (LR)
//! of that bus.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::bilinear::{solve_mfacts, BilinearProblem, SolverSettings};
use crate::error::{Error, Result};
use crate::model::{AlphaCutSolution, BusId, Direction, Network, SolveStatus, Strategy, StrategyKind};

/// Gaps below this (MW) are treated as solver noise.
pub const GAP_TOL: f64 = 1e-5;

/// Width at which degree bisection stops.
pub const DEGREE_WIDTH: f64 = 1e-3;

/// Strictly increasing alpha levels from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    points: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        let ok = points.len() >= 2
            && points[0] == 0.0
            && *points.last().unwrap() == 1.0
            && points.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidArgument(
                "alpha grid must increase strictly from 0 to 1".into(),
            ));
        }
        Ok(AlphaGrid { points })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("alpha grid needs at least 2 points".into()));
        }
        let step = (n - 1) as f64;
        Self::new((0..n).map(|k| k as f64 / step).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid::uniform(21).unwrap()
    }
}

/// Everything a repression study needs besides the network.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub strategy: Strategy,
    pub budget: Option<f64>,
    pub grid: AlphaGrid,
    pub settings: SolverSettings,
}

impl StudyConfig {
    pub fn new(strategy: Strategy) -> Self {
        StudyConfig {
            strategy,
            budget: None,
            grid: AlphaGrid::default(),
            settings: SolverSettings::default(),
        }
    }
}

/// Repression at one demand bus.
#[derive(Debug, Clone, PartialEq)]
pub struct BusRepression {
    pub bus: BusId,
    /// LR from unserved load increase, MW.
    pub lr_up: f64,
    /// LR from unavoidable demand above the lower bound, MW.
    pub lr_down: f64,
    /// Alpha threshold above which no increase-side repression occurs
    /// (1 when the bus is never repressed).
    pub degree_max: f64,
    pub degree_min: f64,
    pub repressed_up: bool,
    pub repressed_down: bool,
}

impl BusRepression {
    pub fn lr(&self) -> f64 {
        self.lr_up + self.lr_down
    }

    pub fn lr_in(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Max => self.lr_up,
            Direction::Min => self.lr_down,
        }
    }

    pub fn degree(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Max => self.degree_max,
            Direction::Min => self.degree_min,
        }
    }

    pub fn repressed(&self, dir: Direction) -> bool {
        match dir {
            Direction::Max => self.repressed_up,
            Direction::Min => self.repressed_down,
        }
    }
}

/// Forecast and achieved demand interval of one bus at one alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub alpha: f64,
    pub forecast_lo: f64,
    pub forecast_hi: f64,
    /// Demand at the Min solution (NaN when that level failed).
    pub achieved_lo: f64,
    /// Demand at the Max solution (NaN when that level failed).
    pub achieved_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepressionResult {
    pub strategy: Strategy,
    pub budget: Option<f64>,
    pub alphas: Vec<f64>,
    /// Demand buses in network order.
    pub buses: Vec<BusRepression>,
    /// `envelope[k][j]`: bus `buses[k]` at `alphas[j]`.
    pub envelope: Vec<Vec<EnvelopePoint>>,
    /// Max solutions, one per grid level.
    pub max_solutions: Vec<AlphaCutSolution>,
    pub min_solutions: Vec<AlphaCutSolution>,
    /// Extra levels solved while bisecting for degrees.
    pub refinements: Vec<AlphaCutSolution>,
    /// Levels without an optimal solution. LR is undefined when non-empty.
    pub failed_levels: Vec<(f64, Direction, SolveStatus)>,
}

impl RepressionResult {
    pub fn is_complete(&self) -> bool {
        self.failed_levels.is_empty()
    }

    /// Summed LR over buses and directions (NaN when a level failed).
    pub fn total_lr(&self) -> f64 {
        self.buses.iter().map(|b| b.lr()).sum()
    }

    pub fn total_in(&self, dir: Direction) -> f64 {
        self.buses.iter().map(|b| b.lr_in(dir)).sum()
    }

    pub fn bus(&self, id: BusId) -> Option<&BusRepression> {
        self.buses.iter().find(|b| b.bus == id)
    }

    /// Bus with the largest LR (first in network order on ties).
    pub fn worst_bus(&self) -> Option<&BusRepression> {
        self.buses
            .iter()
            .fold(None, |best: Option<&BusRepression>, b| match best {
                Some(x) if x.lr() >= b.lr() => Some(x),
                _ => Some(b),
            })
    }

    pub fn solution(&self, alpha: f64, dir: Direction) -> Option<&AlphaCutSolution> {
        let list = match dir {
            Direction::Max => &self.max_solutions,
            Direction::Min => &self.min_solutions,
        };
        list.iter()
            .chain(self.refinements.iter().filter(|s| s.direction == dir))
            .find(|s| s.alpha == alpha)
    }

    fn all_solutions(&self) -> impl Iterator<Item = &AlphaCutSolution> {
        self.max_solutions
            .iter()
            .chain(&self.min_solutions)
            .chain(&self.refinements)
    }
}

/// Sweeps the grid and integrates the per-bus gaps.
pub fn compute_repression(
    net: &Network,
    strategy: Strategy,
    budget: Option<f64>,
    grid: &AlphaGrid,
    s: &SolverSettings,
) -> Result<RepressionResult> {
    let cfg = StudyConfig {
        strategy,
        budget,
        grid: grid.clone(),
        settings: s.clone(),
    };
    compute_repression_warm(net, &cfg, &[])
}

/// As [`compute_repression`], additionally starting every level from the
/// beta dispatches of earlier results (nearest alpha, same direction). With
/// nested feasible sets this makes the new objectives at least as good.
pub fn compute_repression_warm(
    net: &Network,
    cfg: &StudyConfig,
    warm: &[&RepressionResult],
) -> Result<RepressionResult> {
    let weights: Vec<f64> = net.buses.iter().map(|b| b.weight).collect();
    let levels: Vec<(f64, Direction)> = cfg
        .grid
        .points()
        .iter()
        .flat_map(|&a| [(a, Direction::Max), (a, Direction::Min)])
        .collect();
    let solve = |alpha: f64, dir: Direction| -> Result<AlphaCutSolution> {
        let mut p = BilinearProblem::new(net, alpha, dir, cfg.strategy);
        p.budget = cfg.budget;
        p.weights = weights.clone();
        if cfg.strategy.kind != StrategyKind::Base {
            p.warm_starts = warm
                .iter()
                .filter_map(|r| nearest_beta(r, alpha, dir, net.lines.len()))
                .collect();
        }
        solve_mfacts(&p, &cfg.settings)
    };
    let solved: Vec<AlphaCutSolution> = levels
        .par_iter()
        .map(|&(a, d)| solve(a, d))
        .collect::<Result<_>>()?;
    let (max_solutions, min_solutions): (Vec<_>, Vec<_>) =
        solved.into_iter().partition(|s| s.direction == Direction::Max);

    let alphas = cfg.grid.points().to_vec();
    let mut failed_levels: Vec<(f64, Direction, SolveStatus)> = max_solutions
        .iter()
        .chain(&min_solutions)
        .filter(|s| !s.is_optimal())
        .map(|s| (s.alpha, s.direction, s.status))
        .collect();
    failed_levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut cache: HashMap<(u64, Direction), AlphaCutSolution> = HashMap::new();
    let mut refinements = Vec::new();
    let mut buses = Vec::new();
    let mut envelope = Vec::new();
    for (i, bus, demand) in net.demand_buses() {
        let mut points = Vec::with_capacity(alphas.len());
        let mut up = Vec::with_capacity(alphas.len());
        let mut down = Vec::with_capacity(alphas.len());
        for (j, &a) in alphas.iter().enumerate() {
            let (lo, hi) = demand.bounds(a)?;
            let smax = &max_solutions[j];
            let smin = &min_solutions[j];
            let achieved_hi = if smax.is_optimal() { smax.demand[i] } else { f64::NAN };
            let achieved_lo = if smin.is_optimal() { smin.demand[i] } else { f64::NAN };
            up.push(clip(hi - achieved_hi));
            down.push(clip(achieved_lo - lo));
            if achieved_hi.is_nan() {
                *up.last_mut().unwrap() = f64::NAN;
            }
            if achieved_lo.is_nan() {
                *down.last_mut().unwrap() = f64::NAN;
            }
            points.push(EnvelopePoint {
                alpha: a,
                forecast_lo: lo,
                forecast_hi: hi,
                achieved_lo,
                achieved_hi,
            });
        }
        let mut degree = |gaps: &[f64], dir: Direction| -> Result<(f64, bool)> {
            let gap_at = |s: &AlphaCutSolution| -> Result<f64> {
                let (lo, hi) = demand.bounds(s.alpha)?;
                Ok(match dir {
                    Direction::Max => hi - s.demand[i],
                    Direction::Min => s.demand[i] - lo,
                })
            };
            let Some(k) = gaps.iter().rposition(|g| !(*g <= GAP_TOL)) else {
                return Ok((1.0, false));
            };
            if gaps[k].is_nan() || k + 1 == gaps.len() {
                return Ok((alphas[k.min(alphas.len() - 1)], true));
            }
            // repressed at alphas[k], clear at alphas[k + 1]
            let (mut lo_a, mut hi_a) = (alphas[k], alphas[k + 1]);
            while hi_a - lo_a > DEGREE_WIDTH {
                let mid = 0.5 * (lo_a + hi_a);
                let key = (mid.to_bits(), dir);
                if let Entry::Vacant(e) = cache.entry(key) {
                    let sol = solve(mid, dir)?;
                    refinements.push(sol.clone());
                    e.insert(sol);
                }
                let sol = &cache[&key];
                if !sol.is_optimal() || gap_at(sol)? > GAP_TOL {
                    lo_a = mid;
                } else {
                    hi_a = mid;
                }
            }
            Ok((hi_a, true))
        };
        let (degree_max, repressed_up) = degree(&up, Direction::Max)?;
        let (degree_min, repressed_down) = degree(&down, Direction::Min)?;
        buses.push(BusRepression {
            bus: bus.id,
            lr_up: 0.0,
            lr_down: 0.0,
            degree_max,
            degree_min,
            repressed_up,
            repressed_down,
        });
        envelope.push(points);
    }

    // Integrate over the grid plus every level solved during bisection:
    // those bracket the kinks where a gap closes, which the grid alone
    // cuts off.
    for dir in [Direction::Max, Direction::Min] {
        let grid_sols = match dir {
            Direction::Max => &max_solutions,
            Direction::Min => &min_solutions,
        };
        let mut samples: Vec<&AlphaCutSolution> = grid_sols
            .iter()
            .chain(refinements.iter().filter(|s| s.direction == dir && s.is_optimal()))
            .collect();
        samples.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        let xs: Vec<f64> = samples.iter().map(|s| s.alpha).collect();
        for (k, (i, _, demand)) in net.demand_buses().enumerate() {
            let gaps = samples
                .iter()
                .map(|s| -> Result<f64> {
                    if !s.is_optimal() {
                        return Ok(f64::NAN);
                    }
                    let (lo, hi) = demand.bounds(s.alpha)?;
                    Ok(clip(match dir {
                        Direction::Max => hi - s.demand[i],
                        Direction::Min => s.demand[i] - lo,
                    }))
                })
                .collect::<Result<Vec<f64>>>()?;
            let lr = trapezoid(&xs, &gaps);
            match dir {
                Direction::Max => buses[k].lr_up = lr,
                Direction::Min => buses[k].lr_down = lr,
            }
        }
    }
    refinements.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.direction.cmp(&b.direction)));
    Ok(RepressionResult {
        strategy: cfg.strategy,
        budget: cfg.budget,
        alphas,
        buses,
        envelope,
        max_solutions,
        min_solutions,
        refinements,
        failed_levels,
    })
}

/// Drops solver dust so that unrepressed buses integrate to exactly zero.
fn clip(gap: f64) -> f64 {
    if gap > GAP_TOL || gap.is_nan() {
        gap
    } else {
        0.0
    }
}

fn nearest_beta(r: &RepressionResult, alpha: f64, dir: Direction, lines: usize) -> Option<Vec<f64>> {
    r.all_solutions()
        .filter(|s| s.direction == dir && s.is_optimal() && s.beta.len() == lines)
        .min_by(|a, b| (a.alpha - alpha).abs().total_cmp(&(b.alpha - alpha).abs()))
        .map(|s| s.beta.clone())
}

/// Composite trapezoid rule over a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// One cell of a capacity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub strategy: StrategyKind,
    pub capacity: f64,
    pub total_lr: f64,
    pub lr_up: f64,
    pub lr_down: f64,
    pub worst_bus: Option<BusId>,
    pub worst_bus_lr: f64,
    pub complete: bool,
}

/// Total LR for every strategy and device capacity.
///
/// Candidate lines are rated to at least each capacity before the strategy
/// clamp applies. Capacities are solved in ascending order, each cell warm
/// started from the previous capacity and, for the smart strategy, from
/// the single-mode strategies at the same capacity.
pub fn capacity_sweep(
    net: &Network,
    strategies: &[StrategyKind],
    capacities: &[f64],
    cfg: &StudyConfig,
) -> Result<Vec<SweepRow>> {
    if capacities.iter().any(|c| !(0.0..=0.9).contains(c)) {
        return Err(Error::InvalidArgument("capacities must lie in [0, 0.9]".into()));
    }
    let mut order: Vec<usize> = (0..capacities.len()).collect();
    order.sort_by(|&a, &b| capacities[a].total_cmp(&capacities[b]));
    let mut kinds: Vec<StrategyKind> = strategies.to_vec();
    kinds.sort();
    kinds.dedup();

    let mut cells: HashMap<(StrategyKind, usize), RepressionResult> = HashMap::new();
    let mut base: Option<RepressionResult> = None;
    let mut prev: HashMap<StrategyKind, usize> = HashMap::new();
    let needed: Vec<StrategyKind> = if kinds.contains(&StrategyKind::Smart) {
        StrategyKind::ALL.to_vec()
    } else {
        kinds.clone()
    };
    for &c in &order {
        let cap = capacities[c];
        let rated = net.with_device_rating(cap);
        for &kind in &needed {
            if kind == StrategyKind::Base {
                if base.is_none() {
                    let cfg = StudyConfig {
                        strategy: Strategy::base(),
                        ..cfg.clone()
                    };
                    base = Some(compute_repression_warm(net, &cfg, &[])?);
                }
                continue;
            }
            let mut warm: Vec<&RepressionResult> = Vec::new();
            if let Some(&p) = prev.get(&kind) {
                warm.push(&cells[&(kind, p)]);
            }
            if kind == StrategyKind::Smart {
                for k in [StrategyKind::Inductive, StrategyKind::Capacitive] {
                    if let Some(r) = cells.get(&(k, c)) {
                        warm.push(r);
                    }
                }
            }
            let cell_cfg = StudyConfig {
                strategy: Strategy::new(kind, cap),
                ..cfg.clone()
            };
            let r = compute_repression_warm(&rated, &cell_cfg, &warm)?;
            cells.insert((kind, c), r);
            prev.insert(kind, c);
        }
    }
    let mut rows = Vec::new();
    for &kind in strategies {
        for (c, &cap) in capacities.iter().enumerate() {
            let r = if kind == StrategyKind::Base {
                base.as_ref().unwrap()
            } else {
                &cells[&(kind, c)]
            };
            rows.push(SweepRow {
                strategy: kind,
                capacity: cap,
                total_lr: r.total_lr(),
                lr_up: r.total_in(Direction::Max),
                lr_down: r.total_in(Direction::Min),
                worst_bus: r.worst_bus().map(|b| b.bus),
                worst_bus_lr: r.worst_bus().map_or(0.0, |b| b.lr()),
                complete: r.is_complete(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, FuzzyDemand, Generator, Line};

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
    fn grid_validation() {
        assert!(AlphaGrid::new(vec![0.0, 0.5]).is_err());
        assert!(AlphaGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert_eq!(AlphaGrid::default().points().len(), 21);
        assert_eq!(AlphaGrid::uniform(3).unwrap().points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let x = [0.0, 0.3, 1.0];
        let y = [2.0, 1.4, 0.0];
        assert!((trapezoid(&x, &y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unconstrained_network_has_no_repression() {
        let net = two_bus(1000.0);
        let r = compute_repression(&net, Strategy::base(), None, &AlphaGrid::default(), &SolverSettings::default())
            .unwrap();
        assert_eq!(r.total_lr(), 0.0);
        let b = &r.buses[0];
        assert_eq!((b.degree_max, b.degree_min), (1.0, 1.0));
        assert!(!b.repressed_up && !b.repressed_down);
    }

    #[test]
    fn single_binding_line_gives_triangle_area() {
        // upper bound 330 - 30a, served 310: gap 20 - 30a until a = 2/3
        let net = two_bus(310.0);
        let grid = AlphaGrid::uniform(301).unwrap();
        let r = compute_repression(&net, Strategy::base(), None, &grid, &SolverSettings::default()).unwrap();
        let b = &r.buses[0];
        let exact = 0.5 * 20.0 * (2.0 / 3.0);
        assert!((b.lr_up - exact).abs() < 1e-3, "{}", b.lr_up);
        assert_eq!(b.lr_down, 0.0);
        assert!(b.repressed_up);
        assert!((b.degree_max - 2.0 / 3.0).abs() <= DEGREE_WIDTH);
        assert!(b.degree_max >= 2.0 / 3.0);
        for p in &r.envelope[0] {
            assert!(p.achieved_hi <= p.forecast_hi + 1e-9);
            assert!(p.achieved_lo >= p.forecast_lo - 1e-9);
        }
    }

    #[test]
    fn generator_floor_represses_the_min_side() {
        let mut net = two_bus(1000.0);
        net.generators[0].p_min = 290.0;
        let r = compute_repression(&net, Strategy::base(), None, &AlphaGrid::default(), &SolverSettings::default())
            .unwrap();
        let b = &r.buses[0];
        // lower bound 270 + 30a, floor 290: gap 20 - 30a
        assert!((b.lr_down - 20.0 / 3.0).abs() < 0.05, "{}", b.lr_down);
        assert!((b.degree_min - 2.0 / 3.0).abs() <= DEGREE_WIDTH);
    }

    #[test]
    fn infeasible_levels_are_reported() {
        let mut net = two_bus(1000.0);
        net.generators[0].p_max = 280.0;
        let r = compute_repression(&net, Strategy::base(), None, &AlphaGrid::uniform(5).unwrap(), &SolverSettings::default())
            .unwrap();
        assert!(!r.is_complete());
        assert!(r.total_lr().is_nan());
        assert!(r.failed_levels.iter().all(|f| f.0 > 0.0));
    }
}
