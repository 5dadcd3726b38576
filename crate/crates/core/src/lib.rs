//! Numerical toolkit for semiconcave functions with fractional modulus on
//! domains with boundary: semiconcavity certificates, reachable gradients,
//! extension envelopes, mollified approximants and propagation of
//! singularities from boundary points.

pub mod cli;
pub mod error;
pub mod extension;
pub mod funcspace;
pub mod geometry;
pub mod gradients;
pub mod linalg;
pub mod sampling;
pub mod semiconcavity;
pub mod singularity;

pub use error::{Error, Result};
