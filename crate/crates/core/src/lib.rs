//! Digital quasi-Monte Carlo sequences whose index digits come from b-adic integers.

pub mod arith;
pub mod badic;
pub mod discrepancy;
pub mod engine;
pub mod error;
pub mod field;
pub mod genmatrix;
pub mod inputseq;
pub mod quality;
pub mod selftest;

pub use error::{Error, ErrorClass, Result};
