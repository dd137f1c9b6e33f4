//! Reading and writing `.gfcase` files.
//!
//! A case is a TOML document:
//!
//! ```toml
//! schema_version = "1"
//! name = "two-bus"
//! base_mva = 100.0
//! default_uncertainty = 0.05
//!
//! [[buses]]
//! id = 1
//!
//! [[buses]]
//! id = 2
//! demand = 300.0          # bounds derived from default_uncertainty
//!
//! [[generators]]
//! bus = 1
//! p_max = 500.0
//!
//! [[lines]]
//! from = 1
//! to = 2
//! x = 0.1
//! limit = 310.0
//! beta_min = -0.2
//! beta_max = 0.2
//! ```
//!
//! Unknown keys are errors unless the lenient parser is used, which drops
//! them and returns a warning for each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_network, Bus, BusId, FuzzyDemand, Generator, Line, Network};

pub const SCHEMA_VERSION: &str = "1";

/// A parsed case: the network plus file-level metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseFile {
    pub schema_version: String,
    pub name: String,
    pub network: Network,
    /// Relative band used for demands without explicit bounds.
    pub default_uncertainty: Option<f64>,
    /// Set on cases whose data was rebuilt from incomplete sources.
    pub reconstructed: bool,
    pub notes: Option<String>,
}

impl CaseFile {
    pub fn new(name: impl Into<String>, network: Network) -> Self {
        CaseFile {
            schema_version: SCHEMA_VERSION.to_string(),
            name: name.into(),
            network,
            default_uncertainty: None,
            reconstructed: false,
            notes: None,
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "schema_version",
    "name",
    "base_mva",
    "reference_bus",
    "default_uncertainty",
    "reconstructed",
    "notes",
    "buses",
    "generators",
    "lines",
];
const BUS_KEYS: &[&str] = &["id", "weight", "demand", "demand_upper", "demand_lower"];
const GEN_KEYS: &[&str] = &["bus", "p_min", "p_max"];
const LINE_KEYS: &[&str] = &[
    "from",
    "to",
    "circuit",
    "x",
    "limit",
    "beta_min",
    "beta_max",
    "candidate",
    "in_service",
];

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

fn is_true(v: &bool) -> bool {
    *v
}

fn is_circuit_one(v: &u32) -> bool {
    *v == 1
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn circuit_one() -> u32 {
    1
}

fn hundred() -> f64 {
    100.0
}

#[derive(Serialize, Deserialize)]
struct RawCase {
    schema_version: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    name: String,
    #[serde(default = "hundred")]
    base_mva: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_bus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default_uncertainty: Option<f64>,
    #[serde(default, skip_serializing_if = "is_default")]
    reconstructed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    #[serde(default)]
    buses: Vec<RawBus>,
    #[serde(default)]
    generators: Vec<RawGenerator>,
    #[serde(default)]
    lines: Vec<RawLine>,
}

#[derive(Serialize, Deserialize)]
struct RawBus {
    id: u32,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demand: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demand_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demand_lower: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGenerator {
    bus: u32,
    #[serde(default)]
    p_min: f64,
    p_max: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLine {
    from: u32,
    to: u32,
    #[serde(default = "circuit_one", skip_serializing_if = "is_circuit_one")]
    circuit: u32,
    x: f64,
    limit: f64,
    #[serde(default)]
    beta_min: f64,
    #[serde(default)]
    beta_max: f64,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    candidate: bool,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    in_service: bool,
}

/// Bounds implied by the file-level uncertainty (crisp when none is set).
fn derived_bounds(forecast: f64, uncertainty: Option<f64>) -> (f64, f64) {
    match uncertainty {
        Some(u) => ((1.0 + u) * forecast, (1.0 - u) * forecast),
        None => (forecast, forecast),
    }
}

/// Strict parse: unknown keys are errors.
pub fn parse_case(text: &[u8]) -> Result<CaseFile> {
    parse(text, false).map(|(c, _)| c)
}

/// Lenient parse: unknown keys are dropped and reported as warnings.
pub fn parse_case_lenient(text: &[u8]) -> Result<(CaseFile, Vec<String>)> {
    parse(text, true)
}

pub fn read_case(path: &std::path::Path, lenient: bool) -> Result<(CaseFile, Vec<String>)> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&bytes, lenient)
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

fn parse(bytes: &[u8], lenient: bool) -> Result<(CaseFile, Vec<String>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let (line, column) = position(&String::from_utf8_lossy(bytes), e.valid_up_to());
        Error::Syntax {
            line,
            column,
            message: "invalid UTF-8".into(),
        }
    })?;
    if text.trim().is_empty() {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "empty case file".into(),
        });
    }
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        Error::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let mut warnings = Vec::new();
    scrub(&mut table, TOP_KEYS, "case", lenient, &mut warnings)?;
    for (section, keys, label) in [
        ("buses", BUS_KEYS, "bus"),
        ("generators", GEN_KEYS, "generator"),
        ("lines", LINE_KEYS, "line"),
    ] {
        if let Some(toml::Value::Array(items)) = table.get_mut(section) {
            for (k, item) in items.iter_mut().enumerate() {
                if let toml::Value::Table(t) = item {
                    let element = element_name(label, k, t);
                    scrub(t, keys, &element, lenient, &mut warnings)?;
                }
            }
        }
    }

    let raw: RawCase = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Semantic {
            element: "case".into(),
            message: e.message().trim().to_string(),
        })?;
    let case = build(raw)?;
    Ok((case, warnings))
}

fn element_name(label: &str, index: usize, t: &toml::Table) -> String {
    let int = |k: &str| t.get(k).and_then(|v| v.as_integer());
    match label {
        "bus" => match int("id") {
            Some(id) => format!("bus {id}"),
            None => format!("buses[{index}]"),
        },
        "generator" => match int("bus") {
            Some(b) => format!("generator {index} at bus {b}"),
            None => format!("generators[{index}]"),
        },
        _ => match (int("from"), int("to")) {
            (Some(a), Some(b)) => format!("line {a}-{b}"),
            _ => format!("lines[{index}]"),
        },
    }
}

fn scrub(
    t: &mut toml::Table,
    known: &[&str],
    element: &str,
    lenient: bool,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let unknown: Vec<String> = t
        .keys()
        .filter(|k| !known.contains(&k.as_str()))
        .cloned()
        .collect();
    for key in unknown {
        let message = format!("unknown field `{key}`");
        if !lenient {
            return Err(Error::Semantic {
                element: element.to_string(),
                message,
            });
        }
        log::warn!("{element}: {message} ignored");
        warnings.push(format!("{element}: {message}"));
        t.remove(&key);
    }
    Ok(())
}

fn build(raw: RawCase) -> Result<CaseFile> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion(raw.schema_version));
    }
    let sem = |element: String, message: String| Error::Semantic { element, message };
    if !(raw.base_mva > 0.0 && raw.base_mva.is_finite()) {
        return Err(sem("case".into(), "base_mva must be positive".into()));
    }
    if let Some(u) = raw.default_uncertainty {
        if !(0.0..=1.0).contains(&u) {
            return Err(sem("case".into(), "default_uncertainty must lie in [0, 1]".into()));
        }
    }
    let mut buses = Vec::with_capacity(raw.buses.len());
    for b in raw.buses {
        let element = format!("bus {}", b.id);
        let demand = match b.demand {
            None => {
                if b.demand_upper.is_some() || b.demand_lower.is_some() {
                    return Err(sem(element, "demand bounds given without `demand`".into()));
                }
                None
            }
            Some(p) => {
                let (hi, lo) = derived_bounds(p, raw.default_uncertainty);
                let d = FuzzyDemand::new(p, b.demand_upper.unwrap_or(hi), b.demand_lower.unwrap_or(lo))
                    .map_err(|e| sem(element.clone(), e.to_string()))?;
                Some(d)
            }
        };
        buses.push(Bus {
            id: BusId(b.id),
            weight: b.weight,
            demand,
        });
    }
    let generators = raw
        .generators
        .into_iter()
        .map(|g| Generator {
            bus: BusId(g.bus),
            p_min: g.p_min,
            p_max: g.p_max,
        })
        .collect();
    let lines = raw
        .lines
        .into_iter()
        .map(|l| Line {
            from: BusId(l.from),
            to: BusId(l.to),
            circuit: l.circuit,
            x: l.x,
            limit: l.limit,
            beta_min: l.beta_min,
            beta_max: l.beta_max,
            candidate: l.candidate,
            in_service: l.in_service,
        })
        .collect();
    let network = Network {
        base_mva: raw.base_mva,
        buses,
        generators,
        lines,
        reference_bus: raw.reference_bus.map(BusId),
    };
    if let Some(v) = validate_network(&network).into_iter().next() {
        return Err(sem(v.element, v.message));
    }
    Ok(CaseFile {
        schema_version: raw.schema_version,
        name: raw.name,
        network,
        default_uncertainty: raw.default_uncertainty,
        reconstructed: raw.reconstructed,
        notes: raw.notes,
    })
}

/// Serialises a case. Demand bounds that equal the ones implied by
/// `default_uncertainty` are left implicit.
pub fn write_case(c: &CaseFile) -> Vec<u8> {
    let u = c.default_uncertainty;
    let net = &c.network;
    let raw = RawCase {
        schema_version: c.schema_version.clone(),
        name: c.name.clone(),
        base_mva: net.base_mva,
        reference_bus: net.reference_bus.map(|b| b.0),
        default_uncertainty: u,
        reconstructed: c.reconstructed,
        notes: c.notes.clone(),
        buses: net
            .buses
            .iter()
            .map(|b| {
                let (demand, upper, lower) = match &b.demand {
                    None => (None, None, None),
                    Some(d) => {
                        let (hi, lo) = derived_bounds(d.forecast, u);
                        (
                            Some(d.forecast),
                            (d.upper.to_bits() != hi.to_bits()).then_some(d.upper),
                            (d.lower.to_bits() != lo.to_bits()).then_some(d.lower),
                        )
                    }
                };
                RawBus {
                    id: b.id.0,
                    weight: b.weight,
                    demand,
                    demand_upper: upper,
                    demand_lower: lower,
                }
            })
            .collect(),
        generators: net
            .generators
            .iter()
            .map(|g| RawGenerator {
                bus: g.bus.0,
                p_min: g.p_min,
                p_max: g.p_max,
            })
            .collect(),
        lines: net
            .lines
            .iter()
            .map(|l| RawLine {
                from: l.from.0,
                to: l.to.0,
                circuit: l.circuit,
                x: l.x,
                limit: l.limit,
                beta_min: l.beta_min,
                beta_max: l.beta_max,
                candidate: l.candidate,
                in_service: l.in_service,
            })
            .collect(),
    };
    toml::to_string(&raw)
        .expect("case serialisation cannot fail")
        .into_bytes()
}
