//! Command-line front end, file formats and parallel Monte Carlo driver.

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod plot;
