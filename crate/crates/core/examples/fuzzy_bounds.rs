//! Alpha-cuts of a triangular demand.

use gridflex::model::FuzzyDemand;

fn main() -> Result<(), gridflex::error::Error> {
    let d = FuzzyDemand::new(300.0, 345.0, 270.0)?;
    println!("{:>5} {:>9} {:>9}", "alpha", "low", "high");
    for k in 0..=10 {
        let alpha = k as f64 / 10.0;
        let (lo, hi) = d.bounds(alpha)?;
        println!("{alpha:>5.1} {lo:>9.3} {hi:>9.3}");
    }
    let sym = FuzzyDemand::symmetric(300.0, 0.05)?;
    println!("symmetric 5%: {:?}", sym.bounds(0.0)?);
    Ok(())
}
