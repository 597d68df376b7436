//! Field synthesis, Monte Carlo experiments, file formats and command-line
//! plumbing around [`exctop_core`].

pub mod experiment;
pub mod io;
pub mod rng;
pub mod stats;
pub mod synthesis;

pub use exctop_core as core;
