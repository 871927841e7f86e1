pub mod cli;
pub mod dp;
pub mod error;
pub mod eval;
pub mod lp;
pub mod model;
pub mod myerson;
pub mod ptas;
pub mod rounding;

pub use error::{Error, Result};
