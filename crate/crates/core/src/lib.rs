//! Numerical laboratory for random unitary band operators.
//!
//! The crate builds the standard families of random unitary band matrices
//! (magnetic-ring monodromy operators, the one-dimensional band model, the
//! unitary Anderson model in `d` dimensions, CMV matrices and coined quantum
//! walks), evolves states under them and estimates the usual localization
//! diagnostics: kernel decay, fractional moments of the Green function and
//! Lyapunov exponents of the transfer-matrix recursion.
//!
//! Everything is finite volume. Disorder is sampled from a counter-based
//! generator keyed by `(master_seed, realization_index, site_label)`, so any
//! realization can be regenerated on its own and parallel runs reproduce
//! serial runs bit for bit.

pub mod arc;
pub mod band;
pub mod dense;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod green;
pub mod models;
pub mod poisson;
pub mod solve;
pub mod spectral;
pub mod stats;
pub mod transfer;

pub use arc::{Arc, ArcSet};
pub use band::{ComplexBandMatrix, SiteLabel, Spin};
pub use dense::DenseMatrix;
pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;

pub(crate) const TAU: f64 = std::f64::consts::TAU;
