//! Monte Carlo harness around the core model: scenario sampling, the
//! statistical experiments, the verification battery, and file formats for
//! the command-line tool.

pub mod cli;
pub mod experiments;
pub mod formats;
pub mod sampling;
pub mod stats;
