//! Support library for the `dcsbm` command-line tool: file formats, the
//! Monte Carlo experiment harness, and the numerical check sweeps.

pub mod checks;
pub mod experiment;
pub mod io;
