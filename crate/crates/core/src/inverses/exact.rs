use nalgebra::SVD;
use num_complex::Complex64;
use serde::Serialize;

use super::drazin::{drazin_inverse_with, DrazinOptions};
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{frobenius_norm, identity, min_hermitian_eigenvalue, ComplexMatrix};
use crate::matrep::properties::{check_properties_with, natural_tp_residual, PropertyVerdict};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InvertibilityClass {
    InvertibleCptpInverse,
    /// Invertible, but the inverse is not a CPTP map.
    InvertibleNonCpInverse,
    NonInvertible,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: InvertibilityClass,
    /// Smallest eigenvalue modulus of the natural form.
    pub witness: f64,
    pub inverse_verdict: Option<PropertyVerdict>,
}

fn require_square(ch: &ChannelRep) -> Result<()> {
    if ch.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
        })
    }
}

fn min_eigen_modulus(m: &ComplexMatrix) -> f64 {
    eigenvalues(m)
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn classify(ch: &ChannelRep) -> Result<Classification> {
    classify_with(ch, &Tolerances::default())
}

pub fn classify_with(ch: &ChannelRep, tol: &Tolerances) -> Result<Classification> {
    require_square(ch)?;
    let witness = min_eigen_modulus(&ch.natural());
    if witness <= tol.zero {
        return Ok(Classification {
            class: InvertibilityClass::NonInvertible,
            witness,
            inverse_verdict: None,
        });
    }
    let inv = exact_inverse_with(ch, tol)?;
    let verdict = check_properties_with(&inv, tol);
    let class = if verdict.is_cptp() {
        InvertibilityClass::InvertibleCptpInverse
    } else {
        InvertibilityClass::InvertibleNonCpInverse
    };
    Ok(Classification {
        class,
        witness,
        inverse_verdict: Some(verdict),
    })
}

pub fn exact_inverse(ch: &ChannelRep) -> Result<ChannelRep> {
    exact_inverse_with(ch, &Tolerances::default())
}

pub fn exact_inverse_with(ch: &ChannelRep, tol: &Tolerances) -> Result<ChannelRep> {
    require_square(ch)?;
    let m = ch.natural();
    let witness = min_eigen_modulus(&m);
    if witness <= tol.zero {
        return Err(Error::NonInvertibleChannel(witness));
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::NonInvertibleChannel(witness))?;
    let n = m.nrows();
    let scale = (frobenius_norm(&m) * frobenius_norm(&inv)).max(1.0);
    let residual =
        frobenius_norm(&(&m * &inv - identity(n))).max(frobenius_norm(&(&inv * &m - identity(n))));
    if residual > tol.inv * scale {
        return Err(Error::NonInvertibleChannel(witness));
    }
    let out = ChannelRep::from_natural(ch.dim_out(), ch.dim_in(), inv)?;
    if natural_tp_residual(ch) <= tol.tp {
        let r = natural_tp_residual(&out);
        if r > tol.tp * frobenius_norm(&out.natural()).max(1.0) {
            return Err(Error::DrazinPostcondition {
                check: "inverse trace preservation",
                residual: r,
            });
        }
    }
    Ok(out)
}

/// SVD pseudoinverse of the natural form; singular values `<= tol_zero` are dropped.
pub fn moore_penrose(ch: &ChannelRep) -> ChannelRep {
    moore_penrose_with(ch, &Tolerances::default())
}

pub fn moore_penrose_with(ch: &ChannelRep, tol: &Tolerances) -> ChannelRep {
    let pinv = pseudo_inverse(&ch.natural(), tol.zero);
    ChannelRep::from_natural(ch.dim_out(), ch.dim_in(), pinv)
        .expect("pseudoinverse has transposed shape")
}

pub fn pseudo_inverse(m: &ComplexMatrix, cutoff: f64) -> ComplexMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return ComplexMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut out = ComplexMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out += v_t.row(k).adjoint() * u.column(k).adjoint() * Complex64::new(1.0 / s, 0.0);
        }
    }
    out
}

/// Frobenius residuals of the four Penrose conditions.
pub fn penrose_residuals(m: &ComplexMatrix, p: &ComplexMatrix) -> [f64; 4] {
    let mp = m * p;
    let pm = p * m;
    [
        frobenius_norm(&(&mp * m - m)),
        frobenius_norm(&(&pm * p - p)),
        frobenius_norm(&(mp.adjoint() - &mp)),
        frobenius_norm(&(pm.adjoint() - &pm)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonCpWitness {
    pub eigenvalue: Complex64,
    pub inverse_min_choi_eigenvalue: f64,
}

/// A nonzero eigenvalue of modulus inside `(tol_zero, 1 - tol_zero)`, with the
/// minimum Choi eigenvalue of the Drazin inverse that it forces to be negative.
pub fn non_cp_witness(ch: &ChannelRep) -> Result<Option<NonCpWitness>> {
    non_cp_witness_with(ch, &Tolerances::default())
}

pub fn non_cp_witness_with(ch: &ChannelRep, tol: &Tolerances) -> Result<Option<NonCpWitness>> {
    require_square(ch)?;
    let best = eigenvalues(&ch.natural())
        .into_iter()
        .filter(|z| z.norm() > tol.zero && z.norm() < 1.0 - tol.zero)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()));
    let Some(eigenvalue) = best else {
        return Ok(None);
    };
    let opts = DrazinOptions {
        tol: *tol,
        ..Default::default()
    };
    let inv = drazin_inverse_with(ch, &opts)?.inverse;
    let min = min_hermitian_eigenvalue(&inv.choi());
    if min >= -tol.cp {
        return Err(Error::DrazinPostcondition {
            check: "non-CP inverse",
            residual: min,
        });
    }
    Ok(Some(NonCpWitness {
        eigenvalue,
        inverse_min_choi_eigenvalue: min,
    }))
}
