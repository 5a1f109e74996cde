//! Two Λ emitters coupled through a detuned cavity mode: model hierarchy,
//! open-system dynamics and protocol analysis.
//!
//! All frequencies are in units of the emitter–cavity coupling `g`.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod model;

pub use error::{Error, Result};
