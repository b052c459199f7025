pub mod cli;
pub mod error;
pub mod processes;
pub mod quadrature;
pub mod schauder;
pub mod seminorms;
pub mod smalldev;
pub mod stable_rng;
pub mod stats;

pub use error::{Error, Result};
