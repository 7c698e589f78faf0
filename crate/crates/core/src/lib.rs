//! Quantum-channel algebra and error-mitigation analysis.

pub mod analysis;
pub mod circuits;
pub mod classical;
pub mod error;
pub mod inverses;
pub mod linalg;
pub mod matrep;
pub mod noisemodels;
pub mod protocols;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
