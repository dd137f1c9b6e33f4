#![allow(dead_code)]

use gridflex::caseio::CaseFile;
use gridflex::model::{Bus, BusId, FuzzyDemand, Generator, Line, Network};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pick<R: Rng>(rng: &mut R, p: f64) -> bool {
    rng.random_bool(p)
}

/// Arbitrary valid case exercising every optional field of the file format.
pub fn random_case(seed: u64) -> CaseFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8);
    let mut ids: Vec<u32> = (1..=60).collect();
    ids.shuffle(&mut rng);
    ids.truncate(n);
    let default_uncertainty = if pick(&mut rng, 0.6) {
        Some(rng.random_range(0.0..0.5))
    } else {
        None
    };

    let buses = ids
        .iter()
        .map(|&id| {
            let mut b = Bus::new(id);
            if pick(&mut rng, 0.3) {
                b.weight = rng.random_range(0.0..3.0);
            }
            if pick(&mut rng, 0.7) {
                let f: f64 = rng.random_range(0.0..500.0);
                b.demand = Some(match (default_uncertainty, pick(&mut rng, 0.5)) {
                    (Some(u), true) => FuzzyDemand::symmetric(f, u).unwrap(),
                    _ => FuzzyDemand::new(f, f + rng.random_range(0.0..80.0), f * rng.random_range(0.0..1.0))
                        .unwrap(),
                });
            }
            b
        })
        .collect::<Vec<_>>();

    let mut lines = Vec::new();
    let line = |rng: &mut ChaCha8Rng, a: u32, b: u32, circuit: u32| {
        let mut l = Line::new(a, b, rng.random_range(0.001..0.5), rng.random_range(1.0..900.0));
        l.circuit = circuit;
        if pick(rng, 0.5) {
            l = l.with_beta(-rng.random_range(0.0..0.9), rng.random_range(0.0..0.9));
        }
        l.candidate = pick(rng, 0.8);
        l
    };
    // spanning tree keeps the case connected
    for k in 1..n {
        let parent = ids[rng.random_range(0..k)];
        let (a, b) = if pick(&mut rng, 0.5) { (parent, ids[k]) } else { (ids[k], parent) };
        lines.push(line(&mut rng, a, b, 1));
    }
    if n > 1 {
        for _ in 0..rng.random_range(0..4) {
            let a = ids[rng.random_range(0..n)];
            let b = ids[rng.random_range(0..n)];
            if a == b {
                continue;
            }
            let used = lines
                .iter()
                .filter(|l: &&Line| l.from == BusId(a) && l.to == BusId(b))
                .map(|l| l.circuit)
                .max()
                .unwrap_or(0);
            let mut l = line(&mut rng, a, b, used + 1);
            l.in_service = pick(&mut rng, 0.7);
            lines.push(l);
        }
    }

    let generators = (0..rng.random_range(0..4))
        .map(|_| {
            let p_max: f64 = rng.random_range(0.0..800.0);
            Generator {
                bus: BusId(ids[rng.random_range(0..n)]),
                p_min: if pick(&mut rng, 0.3) { p_max * rng.random_range(0.0..1.0) } else { 0.0 },
                p_max,
            }
        })
        .collect();

    let network = Network {
        base_mva: if pick(&mut rng, 0.8) { 100.0 } else { rng.random_range(1.0..1000.0) },
        buses,
        generators,
        lines,
        reference_bus: pick(&mut rng, 0.3).then(|| BusId(ids[rng.random_range(0..n)])),
    };
    let mut case = CaseFile::new(format!("random-{seed}"), network);
    case.default_uncertainty = default_uncertainty;
    case.reconstructed = pick(&mut rng, 0.2);
    if pick(&mut rng, 0.4) {
        case.notes = Some("quotes \" backslash \\ newline\n tab\t ünïcode".into());
    }
    case
}

/// Small meshed network, usually congested: 4 buses, at most 6 lines,
/// every line a device candidate with |beta| <= 0.2. Feasible at the
/// forecast with beta = 0.
pub fn random_study_network(seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut pairs: Vec<(u32, u32)> = vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
        pairs.shuffle(&mut rng);
        pairs.truncate(rng.random_range(4..=6));
        let buses = (1..=4u32)
            .map(|id| {
                let b = Bus::new(id);
                if id >= 2 && pick(&mut rng, 0.8) {
                    b.with_demand(FuzzyDemand::symmetric(rng.random_range(50.0..250.0), 0.1).unwrap())
                } else {
                    b
                }
            })
            .collect::<Vec<_>>();
        let total: f64 = buses.iter().filter_map(|b| b.demand.map(|d| d.upper)).sum();
        let lines = pairs
            .iter()
            .map(|&(a, b)| {
                Line::new(a, b, rng.random_range(0.01..0.1), rng.random_range(0.25..0.8) * total.max(100.0))
                    .with_beta(-0.2, 0.2)
            })
            .collect();
        let mut generators = vec![Generator {
            bus: BusId(1),
            p_min: 0.0,
            p_max: total * 1.2,
        }];
        if pick(&mut rng, 0.5) {
            generators.push(Generator {
                bus: BusId(rng.random_range(2..=4)),
                p_min: 0.0,
                p_max: rng.random_range(20.0..100.0),
            });
        }
        let net = Network {
            base_mva: 100.0,
            buses,
            generators,
            lines,
            reference_bus: None,
        };
        if net.is_connected() && net.total_forecast() > 0.0 && feasible_at_forecast(&net) {
            return net;
        }
    }
}

fn feasible_at_forecast(net: &Network) -> bool {
    use gridflex::lpcore::{solve_fixed_beta, LpSubproblem};
    use gridflex::model::Direction;
    let p = LpSubproblem::new(net, 1.0, Direction::Max);
    solve_fixed_beta(&p).map(|s| s.is_optimal()).unwrap_or(false)
}
