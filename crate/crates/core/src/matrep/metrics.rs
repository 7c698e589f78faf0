use serde::{Deserialize, Serialize};

use super::matrix::{
    hermitian_eigen, hermitian_function, hermitian_residual, trace_norm, ComplexMatrix,
};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Root fidelity `tr sqrt(sqrt(ρ1) ρ2 sqrt(ρ1))` with a validity flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    pub value: f64,
    /// False when an input had an eigenvalue below `-tol_psd` and was clipped.
    pub valid: bool,
}

pub fn fidelity(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<Fidelity> {
    fidelity_with(rho1, rho2, &Tolerances::default())
}

pub fn fidelity_with(
    rho1: &ComplexMatrix,
    rho2: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Fidelity> {
    if rho1.shape() != rho2.shape() || !rho1.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "fidelity needs equal square shapes, got {:?} and {:?}",
            rho1.shape(),
            rho2.shape()
        )));
    }
    for r in [rho1, rho2] {
        let h = hermitian_residual(r);
        if h > tol.herm {
            return Err(Error::NonHermitianInput(h));
        }
    }
    let min1 = hermitian_eigen(rho1).0.first().copied().unwrap_or(0.0);
    let min2 = hermitian_eigen(rho2).0.first().copied().unwrap_or(0.0);
    let valid = min1 >= -tol.psd && min2 >= -tol.psd;
    let sqrt1 = hermitian_function(rho1, |x| x.max(0.0).sqrt());
    let clipped2 = hermitian_function(rho2, |x| x.max(0.0));
    let inner = &sqrt1 * clipped2 * &sqrt1;
    let value = hermitian_eigen(&inner)
        .0
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    Ok(Fidelity { value, valid })
}

/// `½ ||ρ1 − ρ2||_tr`.
pub fn trace_distance(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(rho1 - rho2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::matrix::{c64, from_real_rows, identity};

    fn ket0() -> ComplexMatrix {
        from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0], 1.0)
    }
    fn ket1() -> ComplexMatrix {
        from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0], 1.0)
    }

    #[test]
    fn pure_state_values() {
        let f = fidelity(&ket0(), &ket0()).unwrap();
        assert!((f.value - 1.0).abs() < 1e-12 && f.valid);
        assert!(fidelity(&ket0(), &ket1()).unwrap().value.abs() < 1e-12);
        // oracle: for pure ψ, F = sqrt(<ψ|σ|ψ>) = sqrt(1/2)
        let f = fidelity(&ket0(), &identity(2).scale(0.5)).unwrap();
        assert!((f.value - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((trace_distance(&ket0(), &ket1()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_states_are_clipped_and_flagged() {
        let bad = from_real_rows(2, 2, &[1.25, 0.0, 0.0, -0.25], 1.0);
        let f = fidelity(&bad, &ket0()).unwrap();
        assert!(!f.valid);
        // clipped bad = diag(1.25, 0): sqrt gives diag(sqrt 1.25, 0)
        assert!((f.value - 1.25f64.sqrt()).abs() < 1e-12);
        let skew = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        );
        assert!(matches!(
            fidelity(&skew, &ket0()),
            Err(Error::NonHermitianInput(_))
        ));
    }
}
