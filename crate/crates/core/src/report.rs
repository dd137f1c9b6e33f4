//! CSV and text reports.
//!
//! Numbers are printed with 6 significant digits so that reruns compare
//! byte for byte.

use std::io::Write;

use crate::allocation::AllocationResult;
use crate::contingency::{ContingencyTable, OutageStudy};
use crate::error::Result;
use crate::model::{Direction, Network};
use crate::repression::{RepressionResult, SweepRow};

/// Rounds to 6 significant digits and prints without exponent.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r: f64 = format!("{x:.5e}").parse().expect("round trip of a formatted float");
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// Degree as shown in tables: 0 for a direction without repression.
pub fn shown_degree(r: &RepressionResult, k: usize, dir: Direction) -> f64 {
    let b = &r.buses[k];
    if b.repressed(dir) {
        b.degree(dir)
    } else {
        0.0
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w)
}

/// `bus, direction, LR_MW, degree`, two rows per demand bus.
pub fn write_lr_summary<W: Write>(w: W, r: &RepressionResult) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["bus", "direction", "LR_MW", "degree"])?;
    for (k, b) in r.buses.iter().enumerate() {
        for dir in [Direction::Max, Direction::Min] {
            out.write_record([
                b.bus.to_string(),
                dir.name().to_string(),
                sig6(b.lr_in(dir)),
                sig6(shown_degree(r, k, dir)),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `bus, alpha, forecast_lo, forecast_hi, achieved_lo, achieved_hi`.
pub fn write_envelope<W: Write>(w: W, r: &RepressionResult) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["bus", "alpha", "forecast_lo", "forecast_hi", "achieved_lo", "achieved_hi"])?;
    for (b, points) in r.buses.iter().zip(&r.envelope) {
        for p in points {
            out.write_record([
                b.bus.to_string(),
                sig6(p.alpha),
                sig6(p.forecast_lo),
                sig6(p.forecast_hi),
                sig6(p.achieved_lo),
                sig6(p.achieved_hi),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `strategy, capacity, total_LR_MW`.
pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["strategy", "capacity", "total_LR_MW"])?;
    for row in rows {
        out.write_record([row.strategy.name().to_string(), sig6(row.capacity), sig6(row.total_lr)])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `outage, strategy, capacity, total_LR_MW, worst_bus, worst_bus_LR_MW`.
///
/// The intact network comes first as outage `intact`. An islanding outage
/// gets a single row with `islanding` in the LR column.
pub fn write_n1<W: Write>(w: W, t: &ContingencyTable) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "outage",
        "strategy",
        "capacity",
        "total_LR_MW",
        "worst_bus",
        "worst_bus_LR_MW",
    ])?;
    let mut emit = |o: &OutageStudy| -> Result<()> {
        let name = o.outage.map_or_else(|| "intact".to_string(), |k| k.to_string());
        if o.islanding {
            out.write_record([name.as_str(), "", "", "islanding", "", ""])?;
            return Ok(());
        }
        for row in &o.rows {
            let (bus, lr) = match row.worst_bus {
                Some(b) if row.worst_bus_lr > 0.0 => (b.to_string(), sig6(row.worst_bus_lr)),
                _ => (String::new(), sig6(0.0)),
            };
            out.write_record([
                name.clone(),
                row.strategy.name().to_string(),
                sig6(row.capacity),
                sig6(row.total_lr),
                bus,
                lr,
            ])?;
        }
        Ok(())
    };
    emit(&t.intact)?;
    for o in &t.outages {
        emit(o)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `tau, line, beta, total_LR_MW`, one row per budget and candidate line.
pub fn write_alloc<W: Write>(w: W, net: &Network, a: &AllocationResult) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["tau", "line", "beta", "total_LR_MW"])?;
    let shown: Vec<usize> = (0..a.lines.len())
        .filter(|&l| {
            let (lo, hi) = a.strategy.line_bounds(&net.lines[l]);
            lo < hi && a.outage != Some(a.lines[l])
        })
        .collect();
    for d in &a.deployments {
        for &l in &shown {
            out.write_record([
                sig6(d.tau),
                a.lines[l].to_string(),
                sig6(d.beta[l]),
                sig6(d.total_lr),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Numbered activation list, one line per device.
pub fn write_activation<W: Write>(mut w: W, a: &AllocationResult) -> std::io::Result<()> {
    let head = match a.outage {
        Some(k) => format!("# {} strategy, outage {k}\n", a.strategy.kind),
        None => format!("# {} strategy\n", a.strategy.kind),
    };
    w.write_all(head.as_bytes())?;
    if a.activation.is_empty() {
        w.write_all(b"no device activated\n")?;
    }
    for (k, act) in a.activation.iter().enumerate() {
        let flag = if act.ambiguous { " (order ambiguous)" } else { "" };
        let line = format!(
            "{}. {} tau={} beta={}{}\n",
            k + 1,
            act.line,
            sig6(act.tau),
            sig6(act.beta),
            flag
        );
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(17.427_549), "17.4275");
        assert_eq!(sig6(0.000_123_456_78), "0.000123457");
        assert_eq!(sig6(1_234_567.0), "1234570");
        assert_eq!(sig6(-0.0), "0");
        assert_eq!(sig6(1e-300 * 1e-300), "0");
        assert_eq!(sig6(0.2), "0.2");
        assert_eq!(sig6(-0.15), "-0.15");
        assert_eq!(sig6(f64::NAN), "nan");
    }
}
