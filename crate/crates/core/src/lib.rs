pub mod check;
pub mod convergence;
pub mod error;
pub mod exprcalc;
pub mod format;
pub mod measures;
pub mod potential;
pub mod quadrature;
pub mod real;
pub mod rulegen;
pub mod spline;
mod tridiag;

pub use error::{Error, Result};
pub use num_complex;
