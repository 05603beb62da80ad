//! Cut-and-knit simulation of quantum data-encoder circuits.

pub mod aqc;
pub mod circuit;
pub mod cutting;
pub mod encoder;
pub mod error;
pub mod knitting;
mod linalg;
pub mod mps;
pub mod pipeline;

pub use error::{Error, Result};
