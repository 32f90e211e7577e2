//! Error-function entire symbols, spectral multipliers on the line and the
//! circle, and numerical factorization of analytic vectors.

pub mod certificate;
pub mod cli;
pub mod dd;
pub mod error;
pub mod multiplier;
pub mod quad;
pub mod representation;
pub mod strongfact;
pub mod symbols;

pub use error::{Error, Result};
