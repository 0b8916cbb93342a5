//! Positive definite kernels on products of spheres and locally compact
//! abelian groups: Schoenberg expansions, Fourier certification, spectral
//! synthesis of space-time covariances and a brute-force Gram oracle.

pub mod abelian;
pub mod appendix;
pub mod chg;
pub mod error;
pub mod gneiting;
pub mod gram;
#[cfg(test)]
mod properties;
pub mod quad;
pub mod report;
pub mod schoenberg;
pub mod settings;
pub mod special_fn;

pub use error::{GkError, Result};
pub use report::{CertReport, Tolerances, Verdict, Witness};
pub use settings::NumericSettings;
