//! Solver against exhaustive grid search on the 5-bus case.

use gridflex::bilinear::{brute_force_oracle, solve_mfacts, BilinearProblem, SolverSettings};
use gridflex::cases::bundled;
use gridflex::model::{Direction, Strategy, StrategyKind};

fn main() -> Result<(), gridflex::error::Error> {
    let net = bundled("pjm5").expect("bundled case").network.with_device_rating(0.2);
    for kind in [StrategyKind::Inductive, StrategyKind::Capacitive, StrategyKind::Smart] {
        for alpha in [0.0, 0.5] {
            for dir in [Direction::Max, Direction::Min] {
                let p = BilinearProblem::new(&net, alpha, dir, Strategy::new(kind, 0.2));
                let sol = solve_mfacts(&p, &SolverSettings::default())?;
                let oracle = brute_force_oracle(&p, 5, 1_000_000)?;
                println!(
                    "{:<10} alpha {alpha:.1} {dir}: solver {:.4} oracle {:.4} ({} LPs)",
                    kind.name(),
                    sol.objective,
                    oracle.objective,
                    oracle.evaluations
                );
            }
        }
    }
    Ok(())
}
