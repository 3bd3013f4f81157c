pub mod associativity;
pub mod born_solver;
pub mod error;
pub mod pair_algebra;
mod polysys;
pub mod reciprocity;
pub mod regrading;
pub mod rng;
pub mod sequence_lab;

pub use error::{Error, Result};
