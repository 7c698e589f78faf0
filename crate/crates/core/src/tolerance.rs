use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the property checks and the inverse constructions.
///
/// Every routine that makes a yes/no decision from floating-point data has a
/// `_with` variant taking one of these, so callers can override per call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity residual `max |A - A^dagger|`.
    pub herm: f64,
    /// Operator-norm distance of the Choi partial trace from the identity.
    pub tp: f64,
    /// Most negative Choi eigenvalue still accepted as completely positive.
    pub cp: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd: f64,
    /// Modulus (or singular value) below which a value counts as zero.
    pub zero: f64,
    /// Relative singular-value threshold used for numerical rank decisions.
    pub rank: f64,
    /// Eigenvalues closer than this are merged into one cluster.
    pub cluster: f64,
    /// Largest accepted condition number of a generalized eigenvector basis.
    pub cond_max: f64,
    /// Relative Jordan reconstruction residual `||Q J Q^-1 - M|| / ||M||`.
    pub jordan: f64,
    /// Relative agreement required between the two Drazin backends.
    pub backend: f64,
    /// Residual accepted for inverse identities (Penrose conditions, `M M^-1 = I`, ...).
    pub inv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            tp: 1e-9,
            cp: 1e-9,
            psd: 1e-9,
            zero: 1e-9,
            rank: 1e-9,
            cluster: 1e-7,
            cond_max: 1e8,
            jordan: 1e-7,
            backend: 1e-7,
            inv: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn all_positive(&self) -> bool {
        [
            self.herm,
            self.tp,
            self.cp,
            self.psd,
            self.zero,
            self.rank,
            self.cluster,
            self.cond_max,
            self.jordan,
            self.backend,
            self.inv,
        ]
        .iter()
        .all(|t| *t > 0.0 && t.is_finite())
    }
}
