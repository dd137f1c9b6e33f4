//! Total LR against device capacity on the 5-bus case.

use gridflex::cases::bundled;
use gridflex::model::{Strategy, StrategyKind};
use gridflex::repression::{capacity_sweep, StudyConfig};

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("pjm5").expect("bundled case").network;
    let caps: Vec<f64> = (0..=8).map(|k| k as f64 * 0.05).collect();
    let rows = capacity_sweep(&net, &StrategyKind::ALL, &caps, &StudyConfig::new(Strategy::base()))?;
    print!("{:>8}", "capacity");
    for k in StrategyKind::ALL {
        print!(" {:>11}", k.name());
    }
    println!();
    for c in &caps {
        print!("{c:>8.2}");
        for k in StrategyKind::ALL {
            let row = rows.iter().find(|r| r.strategy == k && r.capacity == *c).unwrap();
            print!(" {:>11.4}", row.total_lr);
        }
        println!();
    }
    Ok(())
}
