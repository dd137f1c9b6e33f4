//! Case files shipped with the crate.

use crate::caseio::{parse_case, CaseFile};

/// Raw text of the bundled cases, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("pjm5", include_str!("../../../cases/pjm5.gfcase")),
    ("ieee24", include_str!("../../../cases/ieee24.gfcase")),
    ("ieee118", include_str!("../../../cases/ieee118.gfcase")),
    ("ieee118_stressed", include_str!("../../../cases/ieee118_stressed.gfcase")),
];

/// Every bundled case, parsed.
pub fn bundled_cases() -> Vec<(&'static str, CaseFile)> {
    BUNDLED
        .iter()
        .map(|(name, text)| (*name, parse_case(text.as_bytes()).expect("bundled case parses")))
        .collect()
}

/// One bundled case by name.
pub fn bundled(name: &str) -> Option<CaseFile> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_case(text.as_bytes()).expect("bundled case parses"))
}
