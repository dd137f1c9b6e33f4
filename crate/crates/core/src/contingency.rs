//! Single-line outage screening.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{LineKey, Network, StrategyKind};
use crate::repression::{capacity_sweep, StudyConfig, SweepRow};

/// Results for one operating state: the intact network or one outage.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageStudy {
    /// `None` for the intact network.
    pub outage: Option<LineKey>,
    /// The removal would split the network; no rows are computed.
    pub islanding: bool,
    /// Total LR without devices, used for ranking (NaN when islanding or
    /// when a level failed).
    pub base_lr: f64,
    /// One row per requested strategy and capacity.
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub intact: OutageStudy,
    /// Ranked by `base_lr`, largest first. Islanding outages come last, in
    /// line order.
    pub outages: Vec<OutageStudy>,
}

impl ContingencyTable {
    pub fn outage(&self, key: &LineKey) -> Option<&OutageStudy> {
        self.outages.iter().find(|o| o.outage.as_ref() == Some(key))
    }

    /// Outages sharing the largest base LR (within `tol` MW).
    pub fn worst(&self, tol: f64) -> Vec<&OutageStudy> {
        let Some(top) = self.outages.first().filter(|o| o.base_lr.is_finite()) else {
            return Vec::new();
        };
        self.outages
            .iter()
            .take_while(|o| o.base_lr.is_finite() && top.base_lr - o.base_lr <= tol)
            .collect()
    }
}

/// Removes each in-service line in turn (or only those in `only`) and runs
/// a capacity sweep on the remaining network. Parallel circuits are outaged
/// one at a time.
pub fn n_minus_1(
    net: &Network,
    strategies: &[StrategyKind],
    capacities: &[f64],
    cfg: &StudyConfig,
    only: Option<&[LineKey]>,
) -> Result<ContingencyTable> {
    let mut targets: Vec<usize> = Vec::new();
    match only {
        None => targets.extend((0..net.lines.len()).filter(|&l| net.lines[l].in_service)),
        Some(keys) => {
            for key in keys {
                let l = net
                    .line_index(key)
                    .ok_or_else(|| Error::UnknownLine(key.to_string()))?;
                if !net.lines[l].in_service {
                    return Err(Error::InvalidArgument(format!("line {key} is already out of service")));
                }
                if !targets.contains(&l) {
                    targets.push(l);
                }
            }
            targets.sort_unstable();
        }
    }

    let mut kinds = strategies.to_vec();
    if !kinds.contains(&StrategyKind::Base) {
        kinds.push(StrategyKind::Base);
    }
    let study = |outaged: &Network, outage: Option<LineKey>| -> Result<OutageStudy> {
        if !outaged.is_connected() {
            return Ok(OutageStudy {
                outage,
                islanding: true,
                base_lr: f64::NAN,
                rows: Vec::new(),
            });
        }
        let all = capacity_sweep(outaged, &kinds, capacities, cfg)?;
        let base_lr = all
            .iter()
            .find(|r| r.strategy == StrategyKind::Base)
            .map_or(f64::NAN, |r| r.total_lr);
        let rows = all
            .into_iter()
            .filter(|r| strategies.contains(&r.strategy))
            .collect();
        Ok(OutageStudy {
            outage,
            islanding: false,
            base_lr,
            rows,
        })
    };

    let intact = study(net, None)?;
    let mut outages: Vec<OutageStudy> = targets
        .par_iter()
        .map(|&l| study(&net.with_outage(l), Some(net.lines[l].key())))
        .collect::<Result<_>>()?;
    // stable: equal LR keeps line order
    outages.sort_by(|a, b| rank(b).total_cmp(&rank(a)));
    Ok(ContingencyTable { intact, outages })
}

fn rank(o: &OutageStudy) -> f64 {
    if o.islanding {
        f64::NEG_INFINITY
    } else if o.base_lr.is_nan() {
        f64::MIN
    } else {
        o.base_lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bus, BusId, FuzzyDemand, Generator, Line};
    use crate::repression::AlphaGrid;
    use crate::model::Strategy;

    // triangle 1-2-3 with a radial spur 3-4
    fn net() -> Network {
        Network {
            base_mva: 100.0,
            buses: vec![
                Bus::new(1),
                Bus::new(2).with_demand(FuzzyDemand::symmetric(150.0, 0.1).unwrap()),
                Bus::new(3),
                Bus::new(4).with_demand(FuzzyDemand::symmetric(50.0, 0.1).unwrap()),
            ],
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 400.0,
            }],
            lines: vec![
                Line::new(1, 2, 0.1, 150.0).with_beta(-0.2, 0.2),
                Line::new(1, 3, 0.1, 200.0).with_beta(-0.2, 0.2),
                Line::new(2, 3, 0.1, 200.0).with_beta(-0.2, 0.2),
                Line::new(3, 4, 0.1, 200.0),
            ],
            reference_bus: None,
        }
    }

    fn cfg() -> StudyConfig {
        let mut c = StudyConfig::new(Strategy::base());
        c.grid = AlphaGrid::uniform(6).unwrap();
        c
    }

    #[test]
    fn one_row_per_line_and_spur_islands() {
        let t = n_minus_1(&net(), &StrategyKind::ALL, &[0.1], &cfg(), None).unwrap();
        assert_eq!(t.outages.len(), 4);
        let last = t.outages.last().unwrap();
        assert!(last.islanding);
        assert_eq!(last.outage.unwrap().to_string(), "3-4");
        for o in t.outages.iter().filter(|o| !o.islanding) {
            assert_eq!(o.rows.len(), 4);
        }
        assert!(t.outages.windows(2).all(|w| rank(&w[0]) >= rank(&w[1])));
    }

    #[test]
    fn only_filter_and_unknown_lines() {
        let keys: Vec<LineKey> = vec!["2-3".parse().unwrap()];
        let t = n_minus_1(&net(), &[StrategyKind::Smart], &[0.2], &cfg(), Some(&keys)).unwrap();
        assert_eq!(t.outages.len(), 1);
        assert_eq!(t.outages[0].rows.len(), 1);
        assert!(t.outages[0].base_lr.is_finite());
        let bad: Vec<LineKey> = vec!["2-4".parse().unwrap()];
        assert!(matches!(
            n_minus_1(&net(), &[StrategyKind::Base], &[0.0], &cfg(), Some(&bad)),
            Err(Error::UnknownLine(_))
        ));
    }

    #[test]
    fn idle_line_outage_changes_nothing() {
        // symmetric feeders: the tie 2-3 carries nothing at any level
        let d = FuzzyDemand::symmetric(150.0, 0.1).unwrap();
        let n = Network {
            base_mva: 100.0,
            buses: vec![Bus::new(1), Bus::new(2).with_demand(d), Bus::new(3).with_demand(d)],
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 400.0,
            }],
            lines: vec![
                Line::new(1, 2, 0.1, 150.0),
                Line::new(1, 3, 0.1, 150.0),
                Line::new(2, 3, 0.1, 100.0),
            ],
            reference_bus: None,
        };
        let r = crate::repression::compute_repression(&n, Strategy::base(), None, &cfg().grid, &cfg().settings)
            .unwrap();
        for s in r.max_solutions.iter().chain(&r.min_solutions) {
            assert!(s.flow[2].abs() < 1e-6, "{} {:?} {:?} {:?}", s.alpha, s.direction, s.flow, s.demand);
        }
        let keys: Vec<LineKey> = vec!["2-3".parse().unwrap()];
        let t = n_minus_1(&n, &[StrategyKind::Base], &[0.0], &cfg(), Some(&keys)).unwrap();
        assert!(t.intact.base_lr > 1.0);
        assert!((t.outages[0].base_lr - t.intact.base_lr).abs() < 1e-9);
    }
}
