//! The 118-bus case with line limits cut to 70%. Takes a few minutes.

use std::time::Instant;

use gridflex::cases::bundled;
use gridflex::model::{Strategy, StrategyKind};
use gridflex::repression::{capacity_sweep, StudyConfig};

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("ieee118_stressed").expect("bundled case").network;
    let t = Instant::now();
    let rows = capacity_sweep(&net, &StrategyKind::ALL, &[0.15], &StudyConfig::new(Strategy::base()))?;
    for r in &rows {
        let worst = r.worst_bus.map_or("-".to_string(), |b| b.to_string());
        println!("{:<10} {:>9.4} MW  worst bus {worst}", r.strategy.name(), r.total_lr);
    }
    println!("{:.1?}", t.elapsed());
    Ok(())
}
