//! Builds a case in code, writes it, and reads it back.

use gridflex::caseio::{parse_case, write_case, CaseFile};
use gridflex::model::{Bus, BusId, FuzzyDemand, Generator, Line, Network};

fn main() -> Result<(), gridflex::error::Error> {
    let net = Network {
        base_mva: 100.0,
        buses: vec![
            Bus::new(1),
            Bus::new(2).with_demand(FuzzyDemand::symmetric(120.0, 0.1)?),
            Bus::new(3).with_demand(FuzzyDemand::new(80.0, 95.0, 70.0)?),
        ],
        generators: vec![Generator { bus: BusId(1), p_min: 0.0, p_max: 300.0 }],
        lines: vec![
            Line::new(1, 2, 0.05, 150.0).with_beta(-0.2, 0.2),
            Line::new(2, 3, 0.04, 100.0),
            Line::new(1, 3, 0.06, 100.0).with_beta(-0.2, 0.2),
        ],
        reference_bus: None,
    };
    let case = CaseFile::new("triangle", net);
    let text = write_case(&case);
    print!("{}", String::from_utf8_lossy(&text));
    assert_eq!(parse_case(&text)?, case);
    Ok(())
}
