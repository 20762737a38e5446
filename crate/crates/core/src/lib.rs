pub mod analysis;
pub mod cli;
pub mod confidence_set;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};
