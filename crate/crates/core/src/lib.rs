// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coefficients;
pub mod config;
pub mod corpus;
pub mod dispersion;
pub mod error;
pub mod evolution;
pub mod format;
pub mod operator;
pub mod quadrature;
pub mod riemann;
pub mod specfun;
pub mod svg;
pub mod verify;

pub use error::{BgkError, Result};
