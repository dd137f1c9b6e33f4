pub mod allocation;
pub mod bilinear;
pub mod caseio;
pub mod cases;
pub mod cli;
pub mod contingency;
pub mod error;
pub mod lpcore;
pub mod model;
pub mod report;
pub mod repression;
pub mod simplex;
