//! N-1 screening of the 24-bus case with devices at 0.2.

use gridflex::cases::bundled;
use gridflex::contingency::n_minus_1;
use gridflex::model::{Strategy, StrategyKind};
use gridflex::repression::StudyConfig;

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("ieee24").expect("bundled case").network;
    let cfg = StudyConfig::new(Strategy::base());
    let t = n_minus_1(&net, &StrategyKind::ALL, &[0.2], &cfg, None)?;
    println!("intact base LR {:.4} MW", t.intact.base_lr);
    for o in &t.outages {
        let key = o.outage.expect("outage row");
        if o.islanding {
            println!("{key:<8} islands the network");
            continue;
        }
        let lrs: Vec<String> = o.rows.iter().map(|r| format!("{}={:.3}", r.strategy.name(), r.total_lr)).collect();
        println!("{key:<8} {}", lrs.join(" "));
    }
    Ok(())
}
