//! Which device to install first: inductive devices on the 5-bus case
//! under a growing budget.

use gridflex::allocation::{allocate, default_taus};
use gridflex::cases::bundled;
use gridflex::model::{Strategy, StrategyKind};
use gridflex::repression::StudyConfig;

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("pjm5").expect("bundled case").network.with_device_rating(0.2);
    let strategy = Strategy::new(StrategyKind::Inductive, 0.2);
    let taus = default_taus(&net, strategy, 12);
    let res = allocate(&net, strategy, &taus, None, &StudyConfig::new(strategy))?;
    for d in &res.deployments {
        println!("tau {:>5.2}  LR {:>8.4} MW", d.tau, d.total_lr);
    }
    for (k, a) in res.activation.iter().enumerate() {
        let note = if a.ambiguous { " (ambiguous)" } else { "" };
        println!("{}. {} at tau {:.2}, beta {:.3}{note}", k + 1, a.line, a.tau, a.beta);
    }
    Ok(())
}
