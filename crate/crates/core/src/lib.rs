#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Exact and asymptotic spectral counting for products of spheres, circles
//! and Zoll-cluster models, with the weighted lattice-point machinery used
//! to study the remainder in Weyl's law.

pub mod analysis;
pub mod config;
pub mod counting;
pub mod error;
pub mod fourier;
pub mod lattice;
pub mod numeric;
pub mod spectra;

pub use error::{Result, WeylError};
