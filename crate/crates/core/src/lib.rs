//! Pseudospectral approximation of Weyl-Marchaud and Riesz-Feller fractional
//! operators on the real line, using the Higgins (rational Fourier) basis.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod basis;
pub mod cli;
pub mod closedform;
pub mod error;
pub mod evolve;
pub mod operators;
pub mod opmatrix;
pub mod oracle;
pub mod specfun;

pub use error::{Error, Result};
