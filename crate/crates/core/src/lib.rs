//! Light-shift-induced two-qubit gates for trapped ions in thermal motion.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod model;

pub use error::{Error, Result};
