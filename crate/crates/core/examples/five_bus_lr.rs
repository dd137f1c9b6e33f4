//! Load repression of each strategy on the 5-bus case at capacity 0.2.

use gridflex::cases::bundled;
use gridflex::model::{Direction, Strategy, StrategyKind};
use gridflex::report::shown_degree;
use gridflex::repression::{compute_repression_warm, StudyConfig};

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("pjm5").expect("bundled case").network.with_device_rating(0.2);
    for kind in StrategyKind::ALL {
        let cfg = StudyConfig::new(Strategy::new(kind, 0.2));
        let r = compute_repression_warm(&net, &cfg, &[])?;
        println!("{:<10} total LR {:>8.4} MW", kind.name(), r.total_lr());
        for (k, b) in r.buses.iter().enumerate() {
            if b.lr() > 0.0 {
                println!(
                    "    bus {}  up {:.4}  down {:.4}  degree {:.3}/{:.3}",
                    b.bus,
                    b.lr_up,
                    b.lr_down,
                    shown_degree(&r, k, Direction::Max),
                    shown_degree(&r, k, Direction::Min)
                );
            }
        }
    }
    Ok(())
}
