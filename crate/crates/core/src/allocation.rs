//! Placing a limited stock of devices.
//!
//! The budget `tau` caps the summed `|beta|` over all lines. Sweeping it
//! upwards shows which lines the optimiser equips first.

use crate::error::{Error, Result};
use crate::model::{Direction, LineKey, Network, Strategy};
use crate::repression::{compute_repression_warm, RepressionResult, StudyConfig};

/// A line counts as equipped above this `|beta|`.
pub const ACTIVATION_THRESHOLD: f64 = 1e-4;

/// Optimal deployment at one budget.
///
/// The deployment is the beta of the alpha = 0 solution in the direction
/// carrying more LR (increase side on ties): the widest cut, where devices
/// matter most.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub tau: f64,
    pub direction: Direction,
    /// Per line, in network order.
    pub beta: Vec<f64>,
    pub total_lr: f64,
    pub lr_up: f64,
    pub lr_down: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub line: LineKey,
    /// First budget at which the line is equipped.
    pub tau: f64,
    pub beta: f64,
    /// The LR gain at this step was within 10 solver tolerances, or another
    /// line activated at the same budget. Such positions can swap between
    /// seeds.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub strategy: Strategy,
    pub outage: Option<LineKey>,
    /// Line keys in network order, matching `Deployment::beta`.
    pub lines: Vec<LineKey>,
    pub deployments: Vec<Deployment>,
    pub activation: Vec<Activation>,
}

impl AllocationResult {
    pub fn order_ambiguous(&self) -> bool {
        self.activation.iter().any(|a| a.ambiguous)
    }
}

/// Summed per-line device capacity under `strategy`.
pub fn total_capacity(net: &Network, strategy: Strategy) -> f64 {
    net.lines
        .iter()
        .map(|l| {
            let (lo, hi) = strategy.line_bounds(l);
            lo.abs().max(hi)
        })
        .sum()
}

/// `points` uniform budgets from 0 to the total capacity.
pub fn default_taus(net: &Network, strategy: Strategy, points: usize) -> Vec<f64> {
    let cap = total_capacity(net, strategy);
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| cap * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Runs a budgeted repression study for every `tau` (ascending, each warm
/// started from the previous budget) and derives the activation order.
pub fn allocate(
    net: &Network,
    strategy: Strategy,
    taus: &[f64],
    outage: Option<&LineKey>,
    cfg: &StudyConfig,
) -> Result<AllocationResult> {
    if taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("budgets must be finite and nonnegative".into()));
    }
    if taus.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("budgets must be sorted ascending".into()));
    }
    let owned;
    let net = match outage {
        None => net,
        Some(key) => {
            let l = net
                .line_index(key)
                .ok_or_else(|| Error::UnknownLine(key.to_string()))?;
            owned = net.with_outage(l);
            if !owned.is_connected() {
                return Err(Error::InvalidArgument(format!("outage of {key} islands the network")));
            }
            &owned
        }
    };

    let mut deployments = Vec::with_capacity(taus.len());
    let mut prev: Option<RepressionResult> = None;
    for &tau in taus {
        let c = StudyConfig {
            strategy,
            budget: Some(tau),
            ..cfg.clone()
        };
        let warm: Vec<&RepressionResult> = prev.iter().collect();
        let r = compute_repression_warm(net, &c, &warm)?;
        deployments.push(deployment(&r, tau, net.lines.len()));
        prev = Some(r);
    }

    let lines: Vec<LineKey> = net.lines.iter().map(|l| l.key()).collect();
    let activation = activation_order(&lines, &deployments, 10.0 * cfg.settings.tol_obj);
    Ok(AllocationResult {
        strategy,
        outage: outage.copied(),
        lines,
        deployments,
        activation,
    })
}

fn deployment(r: &RepressionResult, tau: f64, lines: usize) -> Deployment {
    let up = r.total_in(Direction::Max);
    let down = r.total_in(Direction::Min);
    let direction = if down > up { Direction::Min } else { Direction::Max };
    let beta = r
        .solution(0.0, direction)
        .filter(|s| s.is_optimal())
        .map_or_else(|| vec![0.0; lines], |s| s.beta.clone());
    Deployment {
        tau,
        direction,
        beta,
        total_lr: r.total_lr(),
        lr_up: up,
        lr_down: down,
        complete: r.is_complete(),
    }
}

fn activation_order(lines: &[LineKey], deps: &[Deployment], resolution: f64) -> Vec<Activation> {
    let mut seen = vec![false; lines.len()];
    let mut order = Vec::new();
    for (k, d) in deps.iter().enumerate() {
        let mut fresh: Vec<usize> = (0..lines.len())
            .filter(|&l| !seen[l] && d.beta[l].abs() > ACTIVATION_THRESHOLD)
            .collect();
        fresh.sort_by(|&a, &b| d.beta[b].abs().total_cmp(&d.beta[a].abs()).then(a.cmp(&b)));
        let gain = if k == 0 {
            f64::INFINITY
        } else {
            deps[k - 1].total_lr - d.total_lr
        };
        let ambiguous = fresh.len() > 1 || !(gain > resolution);
        for &l in &fresh {
            seen[l] = true;
            order.push(Activation {
                line: lines[l],
                tau: d.tau,
                beta: d.beta[l],
                ambiguous,
            });
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, BusId, FuzzyDemand, Generator, Line, StrategyKind};
    use crate::repression::{compute_repression, AlphaGrid};

    // two parallel paths from 1 to 3; only 1-3 is congested
    fn net() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus::new(1),
                Bus::new(2),
                Bus::new(3).with_demand(FuzzyDemand::symmetric(300.0, 0.1).unwrap()),
            ],
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 500.0,
            }],
            lines: vec![
                Line::new(1, 2, 0.1, 400.0).with_beta(-0.3, 0.3),
                Line::new(2, 3, 0.1, 400.0).with_beta(-0.3, 0.3),
                Line::new(1, 3, 0.1, 210.0).with_beta(-0.3, 0.3),
            ],
            reference_bus: None,
        }
    }

    fn cfg(strategy: Strategy) -> StudyConfig {
        let mut c = StudyConfig::new(strategy);
        c.grid = AlphaGrid::uniform(6).unwrap();
        c
    }

    #[test]
    fn budget_sweep_is_monotone_and_bounded() {
        let n = net();
        let s = Strategy::new(StrategyKind::Smart, 0.3);
        let taus = default_taus(&n, s, 7);
        assert_eq!(taus.len(), 7);
        assert!((taus[6] - 0.9).abs() < 1e-12);
        let a = allocate(&n, s, &taus, None, &cfg(s)).unwrap();
        let base = compute_repression(&n, Strategy::base(), None, &cfg(s).grid, &cfg(s).settings).unwrap();
        assert_eq!(a.deployments[0].beta, vec![0.0; 3]);
        assert!((a.deployments[0].total_lr - base.total_lr()).abs() < 1e-9, "{} {}", a.deployments[0].total_lr, base.total_lr());
        assert!(base.total_lr() > 1.0);
        for w in a.deployments.windows(2) {
            assert!(w[1].total_lr <= w[0].total_lr + 1e-6);
        }
        for d in &a.deployments {
            assert!(d.beta.iter().map(|b| b.abs()).sum::<f64>() <= d.tau + 1e-9);
        }
        let free = compute_repression(&n, s, None, &cfg(s).grid, &cfg(s).settings).unwrap();
        let last = a.deployments.last().unwrap();
        assert!((last.total_lr - free.total_lr()).abs() < 1e-3);
        assert!(!a.activation.is_empty());
    }

    #[test]
    fn rejects_unsorted_budgets_and_islanding_outages() {
        let n = net();
        let s = Strategy::new(StrategyKind::Inductive, 0.3);
        assert!(allocate(&n, s, &[0.2, 0.1], None, &cfg(s)).is_err());
        assert!(allocate(&n, s, &[-0.1], None, &cfg(s)).is_err());
        let mut spur = net();
        spur.buses.push(Bus::new(4));
        spur.lines.push(Line::new(3, 4, 0.1, 10.0));
        let key: LineKey = "3-4".parse().unwrap();
        assert!(allocate(&spur, s, &[0.0], Some(&key), &cfg(s)).is_err());
    }

    #[test]
    fn order_follows_first_use() {
        let lines: Vec<LineKey> = ["1-2", "2-3", "1-3"].iter().map(|k| k.parse().unwrap()).collect();
        let dep = |tau: f64, beta: [f64; 3], lr: f64| Deployment {
            tau,
            direction: Direction::Max,
            beta: beta.to_vec(),
            total_lr: lr,
            lr_up: lr,
            lr_down: 0.0,
            complete: true,
        };
        let deps = [
            dep(0.0, [0.0; 3], 10.0),
            dep(0.1, [0.0, 0.0, -0.1], 8.0),
            dep(0.2, [0.05, 0.0, -0.15], 7.0),
            dep(0.3, [0.1, 0.00005, -0.2], 7.0),
        ];
        let order = activation_order(&lines, &deps, 1e-5);
        let keys: Vec<String> = order.iter().map(|a| a.line.to_string()).collect();
        assert_eq!(keys, ["1-3", "1-2"]);
        assert!(order.iter().all(|a| !a.ambiguous));
    }
}
