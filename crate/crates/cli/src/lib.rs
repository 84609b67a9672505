//! Command-line front end: instance generation, solving, bounds and report tables.

pub mod report;
pub mod run;
