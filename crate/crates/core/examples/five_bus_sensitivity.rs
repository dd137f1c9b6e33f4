//! How the 5-bus base LR reacts to scaling every demand.

use gridflex::cases::bundled;
use gridflex::model::{BusId, Direction, FuzzyDemand, Strategy};
use gridflex::repression::{compute_repression_warm, StudyConfig};

fn main() -> Result<(), gridflex::error::Error> {
    let base = bundled("pjm5").expect("bundled case").network;
    for scale in [0.96, 0.97, 0.98, 0.99, 1.0, 1.005, 1.01, 1.02] {
        let mut net = base.clone();
        for b in &mut net.buses {
            if let Some(d) = b.demand {
                b.demand = Some(FuzzyDemand::new(d.forecast * scale, d.upper * scale, d.lower * scale)?);
            }
        }
        let r = compute_repression_warm(&net, &StudyConfig::new(Strategy::base()), &[])?;
        if !r.is_complete() {
            println!("scale {scale:<6} infeasible");
            continue;
        }
        let degree = r
            .bus(BusId(4))
            .filter(|b| b.repressed(Direction::Max))
            .map_or("-".to_string(), |b| format!("{:.3}", b.degree(Direction::Max)));
        println!("scale {scale:<6} LR {:>8.4} MW  bus 4 degree {degree}", r.total_lr());
    }
    Ok(())
}
