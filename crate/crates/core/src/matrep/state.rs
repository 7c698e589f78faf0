use super::matrix::{hermitian_residual, min_hermitian_eigenvalue, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::new_with(mat, &Tolerances::default())
    }

    pub fn new_with(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "density matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        super::matrix::ensure_finite(&mat)?;
        let herm = hermitian_residual(&mat);
        if herm > tol.herm {
            return Err(Error::NonHermitianInput(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.tp || tr.im.abs() > tol.tp {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_hermitian_eigenvalue(&mat);
        if min < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ|` for a vector normalised on the fly.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState(
                "zero or non-finite state vector".into(),
            ));
        }
        let v =
            super::matrix::ComplexVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d, d).scale(1.0 / d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn expectation(&self, obs: &Observable) -> f64 {
        expectation(&self.mat, obs)
    }
}

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    mat: ComplexMatrix,
}

impl Observable {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch("observable must be square".into()));
        }
        super::matrix::ensure_finite(&mat)?;
        let herm = hermitian_residual(&mat);
        if herm > Tolerances::default().herm {
            return Err(Error::NonHermitianInput(herm));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}

/// `Re Tr(ρ A)` for any square operator `ρ` (state or not).
pub fn expectation(rho: &ComplexMatrix, obs: &Observable) -> f64 {
    (rho * obs.matrix()).trace().re
}

/// A Hermitian operator that is meant to be a state but may fail positivity,
/// as produced by non-CP recovery maps.
#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedState {
    pub matrix: ComplexMatrix,
    /// True when the matrix is positive semidefinite within tolerance.
    pub is_valid_state: bool,
    pub min_eigenvalue: f64,
}

impl FlaggedState {
    pub fn from_matrix(matrix: ComplexMatrix, tol: &Tolerances) -> Self {
        let min_eigenvalue = min_hermitian_eigenvalue(&matrix);
        Self {
            is_valid_state: min_eigenvalue >= -tol.psd,
            matrix,
            min_eigenvalue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::matrix::{c64, paulis};

    #[test]
    fn rejects_non_states() {
        let [i, x, _, z] = paulis();
        assert!(DensityMatrix::new(i.scale(0.5)).is_ok());
        assert!(matches!(
            DensityMatrix::new(i.clone()),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            DensityMatrix::new((&i + z.scale(1.5)).scale(0.5)),
            Err(Error::InvalidState(_))
        ));
        let skew = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(0.5, 0.0), c64(0.0, 1.0), c64(0.0, 1.0), c64(0.5, 0.0)],
        );
        assert!(matches!(
            DensityMatrix::new(skew),
            Err(Error::NonHermitianInput(_))
        ));
        let rho = DensityMatrix::pure(&[c64(1.0, 0.0), c64(1.0, 0.0)]).unwrap();
        assert!((rho.expectation(&Observable::new(x).unwrap()) - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-15);
    }
}
