pub mod aep;
pub mod bitstring;
pub mod cli;
pub mod error;
pub mod gpb;
pub mod optimizer;
pub mod picksix;
pub mod rng;
pub mod tournament;

pub use error::{Error, Result};
