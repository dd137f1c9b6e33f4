//! Network, fuzzy demand and solution types.
//!
//! Everything here is plain data. Quantities are stored in MW (powers), per
//! unit on `base_mva` (reactances) and radians (angles); solvers convert to
//! per unit internally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Lowest admissible multiplicative susceptance change. `1 + beta` must stay
/// positive or the line degenerates into an open circuit.
pub const BETA_FLOOR: f64 = -0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Triangular membership function of one bus demand, in MW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyDemand {
    /// Peak of the membership function (the forecast).
    pub forecast: f64,
    /// Upper end of the support.
    pub upper: f64,
    /// Lower end of the support.
    pub lower: f64,
}

impl FuzzyDemand {
    pub fn new(forecast: f64, upper: f64, lower: f64) -> Result<Self> {
        let d = FuzzyDemand {
            forecast,
            upper,
            lower,
        };
        match d.check() {
            None => Ok(d),
            Some(msg) => Err(Error::InvalidArgument(msg)),
        }
    }

    /// Symmetric relative band around the forecast: `(1 ± u) * forecast`.
    pub fn symmetric(forecast: f64, uncertainty: f64) -> Result<Self> {
        Self::new(
            forecast,
            (1.0 + uncertainty) * forecast,
            (1.0 - uncertainty) * forecast,
        )
    }

    fn check(&self) -> Option<String> {
        let vals = [self.lower, self.forecast, self.upper];
        if vals.iter().any(|v| !v.is_finite()) {
            return Some("non-finite demand value".into());
        }
        if vals.iter().any(|v| *v < 0.0) {
            return Some("negative demand value".into());
        }
        if !(self.lower <= self.forecast && self.forecast <= self.upper) {
            return Some(format!(
                "demand bounds out of order (lower {}, forecast {}, upper {})",
                self.lower, self.forecast, self.upper
            ));
        }
        None
    }

    /// Alpha-cut of the membership function.
    pub fn bounds(&self, alpha: f64) -> Result<(f64, f64)> {
        fuzzy_bounds(self, alpha)
    }
}

/// Interval of admissible demand at membership level `alpha`.
///
/// `alpha = 0` returns the full support, `alpha = 1` collapses to the
/// forecast. Both ends move linearly toward the forecast in between.
pub fn fuzzy_bounds(d: &FuzzyDemand, alpha: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let spread = 1.0 - alpha;
    let lower = d.forecast - spread * (d.forecast - d.lower);
    let upper = d.forecast + spread * (d.upper - d.forecast);
    Ok((lower, upper))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub weight: f64,
    pub demand: Option<FuzzyDemand>,
}

impl Bus {
    pub fn new(id: u32) -> Self {
        Bus {
            id: BusId(id),
            weight: 1.0,
            demand: None,
        }
    }

    pub fn with_demand(mut self, demand: FuzzyDemand) -> Self {
        self.demand = Some(demand);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub bus: BusId,
    pub p_min: f64,
    pub p_max: f64,
}

/// Identifies a circuit: ordered bus pair plus a circuit number for
/// parallel lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineKey {
    pub from: BusId,
    pub to: BusId,
    pub circuit: u32,
}

impl fmt::Display for LineKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.circuit == 1 {
            write!(f, "{}-{}", self.from, self.to)
        } else {
            write!(f, "{}-{}#{}", self.from, self.to, self.circuit)
        }
    }
}

impl FromStr for LineKey {
    type Err = Error;

    /// Accepts `from-to` or `from-to#circuit`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownLine(s.to_string());
        let (pair, circuit) = match s.split_once('#') {
            Some((p, c)) => (p, c.trim().parse::<u32>().map_err(|_| bad())?),
            None => (s, 1),
        };
        let (a, b) = pair.split_once('-').ok_or_else(bad)?;
        let from = a.trim().parse::<u32>().map_err(|_| bad())?;
        let to = b.trim().parse::<u32>().map_err(|_| bad())?;
        Ok(LineKey {
            from: BusId(from),
            to: BusId(to),
            circuit,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from: BusId,
    pub to: BusId,
    pub circuit: u32,
    /// Series reactance, per unit.
    pub x: f64,
    /// Thermal limit, MW.
    pub limit: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Eligible to host a modular FACTS device.
    pub candidate: bool,
    pub in_service: bool,
}

impl Line {
    pub fn new(from: u32, to: u32, x: f64, limit: f64) -> Self {
        Line {
            from: BusId(from),
            to: BusId(to),
            circuit: 1,
            x,
            limit,
            beta_min: 0.0,
            beta_max: 0.0,
            candidate: true,
            in_service: true,
        }
    }

    pub fn with_beta(mut self, beta_min: f64, beta_max: f64) -> Self {
        self.beta_min = beta_min;
        self.beta_max = beta_max;
        self
    }

    pub fn key(&self) -> LineKey {
        LineKey {
            from: self.from,
            to: self.to,
            circuit: self.circuit,
        }
    }

    /// Susceptance `1/x` in per unit.
    pub fn susceptance(&self) -> f64 {
        1.0 / self.x
    }

    /// Either endpoint ordering matches `from`/`to`.
    pub fn connects(&self, a: BusId, b: BusId) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    /// Angle reference. `None` selects the lowest bus id.
    pub reference_bus: Option<BusId>,
}

impl Network {
    pub fn bus_index(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn reference(&self) -> Option<BusId> {
        self.reference_bus
            .or_else(|| self.buses.iter().map(|b| b.id).min())
    }

    pub fn line_index(&self, key: &LineKey) -> Option<usize> {
        self.lines.iter().position(|l| l.key() == *key).or_else(|| {
            // tolerate reversed orientation
            self.lines.iter().position(|l| {
                l.circuit == key.circuit && l.from == key.to && l.to == key.from
            })
        })
    }

    /// Copy of the network with one line taken out of service.
    pub fn with_outage(&self, line: usize) -> Network {
        let mut net = self.clone();
        net.lines[line].in_service = false;
        net
    }

    /// Copy of the network where every candidate line can host a device of
    /// at least `capacity` in both directions (bounds are widened, never
    /// narrowed).
    pub fn with_device_rating(&self, capacity: f64) -> Network {
        let mut net = self.clone();
        for l in net.lines.iter_mut().filter(|l| l.candidate) {
            l.beta_min = l.beta_min.min(-capacity).max(BETA_FLOOR);
            l.beta_max = l.beta_max.max(capacity);
        }
        net
    }

    pub fn demand_buses(&self) -> impl Iterator<Item = (usize, &Bus, &FuzzyDemand)> {
        self.buses
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.demand.as_ref().map(|d| (i, b, d)))
    }

    pub fn total_forecast(&self) -> f64 {
        self.demand_buses().map(|(_, _, d)| d.forecast).sum()
    }

    /// True when every bus is reachable over in-service lines.
    pub fn is_connected(&self) -> bool {
        if self.buses.is_empty() {
            return true;
        }
        let index: BTreeMap<BusId, usize> = self
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect();
        let mut parent: Vec<usize> = (0..self.buses.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for l in self.lines.iter().filter(|l| l.in_service) {
            if let (Some(&a), Some(&b)) = (index.get(&l.from), index.get(&l.to)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..self.buses.len()).all(|i| find(&mut parent, i) == root)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

/// Collects every broken invariant of `net`. An empty report means the
/// network is usable by the solvers.
pub fn validate_network(net: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |element: String, message: String| out.push(Violation { element, message });

    if !(net.base_mva.is_finite() && net.base_mva > 0.0) {
        push("network".into(), "nonpositive base_mva".into());
    }
    if net.buses.is_empty() {
        push("network".into(), "no buses".into());
    }

    let mut ids = BTreeSet::new();
    for b in &net.buses {
        let el = format!("bus {}", b.id);
        if !ids.insert(b.id) {
            push(el.clone(), "duplicate bus id".into());
        }
        if !(b.weight.is_finite() && b.weight >= 0.0) {
            push(el.clone(), "weight must be finite and >= 0".into());
        }
        if let Some(d) = &b.demand {
            if let Some(msg) = d.check() {
                push(el, msg);
            }
        }
    }

    if let Some(r) = net.reference_bus {
        if !ids.contains(&r) {
            push("network".into(), format!("reference bus {r} does not exist"));
        }
    }

    for (k, g) in net.generators.iter().enumerate() {
        let el = format!("generator {k} at bus {}", g.bus);
        if !ids.contains(&g.bus) {
            push(el.clone(), "references unknown bus".into());
        }
        if !(g.p_min.is_finite() && g.p_max.is_finite() && 0.0 <= g.p_min && g.p_min <= g.p_max) {
            push(el, "limits must satisfy 0 <= p_min <= p_max".into());
        }
    }

    let mut keys = BTreeSet::new();
    for l in &net.lines {
        let el = format!("line {}", l.key());
        if !keys.insert(l.key()) {
            push(el.clone(), "duplicate line key".into());
        }
        if !ids.contains(&l.from) || !ids.contains(&l.to) {
            push(el.clone(), "references unknown bus".into());
        }
        if l.from == l.to {
            push(el.clone(), "from and to buses coincide".into());
        }
        if !(l.x.is_finite() && l.x > 0.0) {
            push(el.clone(), "nonpositive reactance".into());
        }
        if !(l.limit.is_finite() && l.limit > 0.0) {
            push(el.clone(), "nonpositive thermal limit".into());
        }
        if !(l.beta_min.is_finite()
            && l.beta_max.is_finite()
            && BETA_FLOOR <= l.beta_min
            && l.beta_min <= 0.0
            && 0.0 <= l.beta_max)
        {
            push(el, "beta bounds must satisfy -0.9 <= beta_min <= 0 <= beta_max".into());
        }
    }

    if !net.buses.is_empty() && !net.is_connected() {
        push("network".into(), "disconnected over in-service lines".into());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Base,
    Inductive,
    Capacitive,
    Smart,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Base,
        StrategyKind::Inductive,
        StrategyKind::Capacitive,
        StrategyKind::Smart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Base => "base",
            StrategyKind::Inductive => "inductive",
            StrategyKind::Capacitive => "capacitive",
            StrategyKind::Smart => "smart",
        }
    }

    /// Short label c1..c4.
    pub fn label(self) -> &'static str {
        match self {
            StrategyKind::Base => "c1",
            StrategyKind::Inductive => "c2",
            StrategyKind::Capacitive => "c3",
            StrategyKind::Smart => "c4",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" | "c1" => Ok(StrategyKind::Base),
            "inductive" | "c2" => Ok(StrategyKind::Inductive),
            "capacitive" | "c3" => Ok(StrategyKind::Capacitive),
            "smart" | "c4" => Ok(StrategyKind::Smart),
            other => Err(Error::InvalidArgument(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Operating mode of the devices plus the symmetric cap on `|beta|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub capacity: f64,
}

impl Strategy {
    pub fn new(kind: StrategyKind, capacity: f64) -> Self {
        Strategy { kind, capacity }
    }

    pub fn base() -> Self {
        Strategy::new(StrategyKind::Base, 0.0)
    }

    /// Admissible `beta` interval on `line`: the strategy clamp intersected
    /// with the line's own device bounds. Non-candidate and out-of-service
    /// lines are pinned to zero.
    pub fn line_bounds(&self, line: &Line) -> (f64, f64) {
        if !line.candidate || !line.in_service {
            return (0.0, 0.0);
        }
        let cap = self.capacity.max(0.0);
        let (lo, hi) = match self.kind {
            StrategyKind::Base => (0.0, 0.0),
            StrategyKind::Inductive => (-cap, 0.0),
            StrategyKind::Capacitive => (0.0, cap),
            StrategyKind::Smart => (-cap, cap),
        };
        let lo = lo.max(line.beta_min).clamp(BETA_FLOOR, 0.0);
        let hi = hi.min(line.beta_max).max(0.0);
        (lo, hi)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind, self.capacity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Load reduction: minimise the weighted demand.
    Min,
    /// Load increase: maximise the weighted demand.
    Max,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Min => "min",
            Direction::Max => "max",
        }
    }

    /// `+1` for Max, `-1` for Min; multiplies an objective so that larger is
    /// always better.
    pub fn sense(self) -> f64 {
        match self {
            Direction::Min => -1.0,
            Direction::Max => 1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
    /// The simplex cycling guard tripped or a basis became singular.
    NumericalFailure,
}

/// Result of one optimisation at one alpha level in one direction.
///
/// Vectors follow the ordering of the network they were solved on:
/// `demand` and `angle` per bus, `dispatch` per generator, `flow` and `beta`
/// per line. Out-of-service lines carry zero flow and zero beta.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCutSolution {
    pub alpha: f64,
    pub direction: Direction,
    pub status: SolveStatus,
    /// Weighted demand, MW.
    pub objective: f64,
    pub demand: Vec<f64>,
    pub dispatch: Vec<f64>,
    pub angle: Vec<f64>,
    pub flow: Vec<f64>,
    pub beta: Vec<f64>,
}

impl AlphaCutSolution {
    pub(crate) fn failed(net: &Network, alpha: f64, direction: Direction, status: SolveStatus) -> Self {
        AlphaCutSolution {
            alpha,
            direction,
            status,
            objective: f64::NAN,
            demand: vec![0.0; net.buses.len()],
            dispatch: vec![0.0; net.generators.len()],
            angle: vec![0.0; net.buses.len()],
            flow: vec![0.0; net.lines.len()],
            beta: vec![0.0; net.lines.len()],
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Generation summed over the generators at `bus`.
    pub fn generation_at(&self, net: &Network, bus: BusId) -> f64 {
        net.generators
            .iter()
            .zip(&self.dispatch)
            .filter(|(g, _)| g.bus == bus)
            .map(|(_, p)| *p)
            .sum()
    }

    pub fn total_abs_beta(&self) -> f64 {
        self.beta.iter().map(|b| b.abs()).sum()
    }

    /// Largest nodal balance mismatch, MW.
    pub fn max_balance_residual(&self, net: &Network) -> f64 {
        let mut injection = vec![0.0; net.buses.len()];
        for (g, p) in net.generators.iter().zip(&self.dispatch) {
            if let Some(i) = net.bus_index(g.bus) {
                injection[i] += p;
            }
        }
        for (i, d) in self.demand.iter().enumerate() {
            injection[i] -= d;
        }
        for (l, f) in net.lines.iter().zip(&self.flow) {
            if !l.in_service {
                continue;
            }
            let (a, b) = (net.bus_index(l.from).unwrap(), net.bus_index(l.to).unwrap());
            injection[a] -= f;
            injection[b] += f;
        }
        injection.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest deviation from `P = B (1 + beta) (theta_i - theta_j)`, MW.
    pub fn max_flow_residual(&self, net: &Network) -> f64 {
        net.lines
            .iter()
            .enumerate()
            .filter(|(_, l)| l.in_service)
            .map(|(k, l)| {
                let (a, b) = (net.bus_index(l.from).unwrap(), net.bus_index(l.to).unwrap());
                let expect = net.base_mva
                    * l.susceptance()
                    * (1.0 + self.beta[k])
                    * (self.angle[a] - self.angle[b]);
                (expect - self.flow[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest thermal-limit overshoot, MW (zero when all limits hold).
    pub fn max_limit_violation(&self, net: &Network) -> f64 {
        net.lines
            .iter()
            .zip(&self.flow)
            .filter(|(l, _)| l.in_service)
            .map(|(l, f)| (f.abs() - l.limit).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn table_one() -> Network {
        let buses = (1..=5).map(Bus::new).collect();
        let lines = vec![
            Line::new(1, 2, 0.030, 240.0),
            Line::new(1, 4, 0.050, 270.0),
            Line::new(1, 5, 0.060, 250.0),
            Line::new(2, 3, 0.025, 270.0),
            Line::new(3, 4, 0.030, 270.0),
            Line::new(4, 5, 0.020, 270.0),
        ];
        Network {
            base_mva: 100.0,
            buses,
            generators: vec![Generator {
                bus: BusId(1),
                p_min: 0.0,
                p_max: 500.0,
            }],
            lines,
            reference_bus: None,
        }
    }

    #[test]
    fn fuzzy_bounds_examples() {
        let d = FuzzyDemand::new(300.0, 315.0, 285.0).unwrap();
        assert_eq!(fuzzy_bounds(&d, 0.0).unwrap(), (285.0, 315.0));
        assert_eq!(fuzzy_bounds(&d, 1.0).unwrap(), (300.0, 300.0));
        assert_eq!(fuzzy_bounds(&d, 0.5).unwrap(), (292.5, 307.5));
    }

    #[test]
    fn fuzzy_bounds_rejects_alpha_outside_unit_interval() {
        let d = FuzzyDemand::new(300.0, 315.0, 285.0).unwrap();
        assert!(matches!(fuzzy_bounds(&d, -0.01), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(fuzzy_bounds(&d, 1.5), Err(Error::AlphaOutOfRange(_))));
        assert!(fuzzy_bounds(&d, f64::NAN).is_err());
    }

    #[test]
    fn fuzzy_demand_rejects_unordered_bounds() {
        assert!(FuzzyDemand::new(300.0, 290.0, 285.0).is_err());
        assert!(FuzzyDemand::new(-1.0, 0.0, -2.0).is_err());
    }

    #[test]
    fn table_one_is_valid() {
        assert!(validate_network(&table_one()).is_empty());
    }

    #[test]
    fn zero_reactance_is_reported() {
        let mut net = table_one();
        net.lines[2].x = 0.0;
        let report = validate_network(&net);
        assert!(report.iter().any(|v| v.message.contains("nonpositive reactance")));
    }

    #[test]
    fn removing_all_but_one_line_disconnects() {
        let mut net = table_one();
        for l in net.lines.iter_mut().skip(1) {
            l.in_service = false;
        }
        let report = validate_network(&net);
        assert!(report.iter().any(|v| v.message.contains("disconnected")));
    }

    #[test]
    fn validation_catches_bad_references_and_bounds() {
        let mut net = table_one();
        net.generators.push(Generator {
            bus: BusId(9),
            p_min: 10.0,
            p_max: 5.0,
        });
        net.lines[0].beta_min = -0.95;
        net.lines[1].to = net.lines[1].from;
        net.buses[1].weight = -1.0;
        let report = validate_network(&net);
        let text: Vec<String> = report.iter().map(|v| v.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("unknown bus")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("p_min <= p_max")));
        assert!(text.iter().any(|t| t.contains("beta bounds")));
        assert!(text.iter().any(|t| t.contains("coincide")));
        assert!(text.iter().any(|t| t.contains("weight")));
        // idempotent
        assert_eq!(report, validate_network(&net));
    }

    #[test]
    fn strategy_clamps_compose_with_line_bounds() {
        let line = Line::new(1, 2, 0.1, 100.0).with_beta(-0.1, 0.3);
        assert_eq!(Strategy::base().line_bounds(&line), (0.0, 0.0));
        assert_eq!(Strategy::new(StrategyKind::Inductive, 0.2).line_bounds(&line), (-0.1, 0.0));
        assert_eq!(Strategy::new(StrategyKind::Capacitive, 0.2).line_bounds(&line), (0.0, 0.2));
        assert_eq!(Strategy::new(StrategyKind::Smart, 0.2).line_bounds(&line), (-0.1, 0.2));
        let mut fixed = line.clone();
        fixed.candidate = false;
        assert_eq!(Strategy::new(StrategyKind::Smart, 0.2).line_bounds(&fixed), (0.0, 0.0));
    }

    #[test]
    fn line_key_parses_both_forms() {
        let k: LineKey = "15-21#2".parse().unwrap();
        assert_eq!(k.to_string(), "15-21#2");
        let k: LineKey = "3-24".parse().unwrap();
        assert_eq!((k.from, k.to, k.circuit), (BusId(3), BusId(24), 1));
        assert!("3".parse::<LineKey>().is_err());
    }

    #[test]
    fn reversed_key_still_finds_line() {
        let net = table_one();
        let k: LineKey = "5-4".parse().unwrap();
        assert_eq!(net.line_index(&k), Some(5));
    }
}
