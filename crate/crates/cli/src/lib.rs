//! Command-line experiment runner for the nonlocal-perimeter laboratory:
//! argument handling, experiment dispatch, and the reproduction suite.

pub mod cli;
pub mod repro;
