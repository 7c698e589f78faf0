//! Drazin inverse: nonzero Jordan blocks inverted, the nilpotent part sent to 0.
//!
//! Two constructions are provided. The Schur backend reorders the triangular
//! factor so the zero cluster trails and uses the closed form for
//! block-triangular matrices; the spectral backend assembles `Q J' Q⁻¹` from
//! the numerical Jordan decomposition. By default both run and must agree.

use num_complex::Complex64;
use serde::Serialize;

use super::spectral::spectral_decompose_with;
use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, upper_triangular_inverse, SchurForm};
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{frobenius_norm, trace_functional, ComplexMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DrazinBackend {
    Schur,
    Spectral,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default)]
pub struct DrazinOptions {
    pub backend: DrazinBackend,
    pub tol: Tolerances,
}

/// Absolute residuals of the defining relations, all in Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrazinResiduals {
    /// `M D - D M`
    pub commutation: f64,
    /// `D M D - D`
    pub reflexive: f64,
    /// `M^{k+1} D - M^k`
    pub index_power: f64,
    /// `(M D)² - M D`
    pub idempotent: f64,
    /// Natural-form TP residual of `D`; present when `M` itself is TP.
    pub tp_output: Option<f64>,
    /// `||D_schur - D_spectral||_F`; present when both backends ran.
    pub backend_difference: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DrazinOutcome {
    pub inverse: ChannelRep,
    /// Index `k` used for `M^{k+1} D = M^k`.
    pub index: usize,
    pub residuals: DrazinResiduals,
}

/// Inverse of the Jordan block `J_size(λ)`, `λ ≠ 0`.
pub fn jordan_block_inverse(lambda: Complex64, size: usize) -> ComplexMatrix {
    let inv = Complex64::new(1.0, 0.0) / lambda;
    ComplexMatrix::from_fn(size, size, |i, j| {
        if j < i {
            Complex64::new(0.0, 0.0)
        } else {
            let s = (j - i) as i32;
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            inv.powi(s + 1) * sign
        }
    })
}

/// Schur backend. Returns `D` and the size of the zero cluster.
pub fn drazin_matrix_schur(m: &ComplexMatrix, tol: &Tolerances) -> Result<(ComplexMatrix, usize)> {
    let n = m.nrows();
    let mut schur = SchurForm::new(m);
    let values = schur.eigenvalues();
    let clusters = cluster_eigenvalues(&values, tol.cluster)?;
    let mut is_zero = vec![false; n];
    for c in &clusters {
        if c.center.norm() <= tol.zero {
            for &i in &c.members {
                is_zero[i] = true;
            }
        }
    }
    let mz = is_zero.iter().filter(|&&z| z).count();
    schur.reorder_by(|i| is_zero[i] as usize);
    let r = n - mz;
    let t = &schur.triangular;
    let t11_inv = upper_triangular_inverse(&t.view((0, 0), (r, r)).into_owned());
    let t12 = t.view((0, r), (r, mz)).into_owned();
    // near-nilpotent block used as computed: its powers decay like the true ones
    let t22 = t.view((r, r), (mz, mz)).into_owned();
    let mut s = ComplexMatrix::zeros(r, mz);
    let mut left = &t11_inv * &t11_inv;
    let mut right = ComplexMatrix::identity(mz, mz);
    for _ in 0..mz {
        s += &left * &t12 * &right;
        left = &t11_inv * left;
        right *= &t22;
    }
    let mut dt = ComplexMatrix::zeros(n, n);
    dt.view_mut((0, 0), (r, r)).copy_from(&t11_inv);
    dt.view_mut((0, r), (r, mz)).copy_from(&s);
    Ok((&schur.unitary * dt * schur.unitary.adjoint(), mz))
}

/// Spectral backend. Returns `D` and the nilpotency index of the zero part.
pub fn drazin_matrix_spectral(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, usize)> {
    let dec = spectral_decompose_with(m, tol)?;
    let j_prime = dec.block_matrix(|b| {
        if b.eigenvalue.norm() == 0.0 {
            ComplexMatrix::zeros(b.size, b.size)
        } else {
            jordan_block_inverse(b.eigenvalue, b.size)
        }
    });
    Ok((&dec.basis * j_prime * &dec.basis_inverse, dec.zero_index))
}

pub fn drazin_residuals(m: &ComplexMatrix, d: &ComplexMatrix, k: usize) -> DrazinResiduals {
    let md = m * d;
    let mut mk = ComplexMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        mk = m * mk;
    }
    DrazinResiduals {
        commutation: frobenius_norm(&(&md - d * m)),
        reflexive: frobenius_norm(&(d * &md - d)),
        index_power: frobenius_norm(&(m * &mk * d - &mk)),
        idempotent: frobenius_norm(&(&md * &md - &md)),
        tp_output: None,
        backend_difference: None,
    }
}

/// `||t M - t||` for the trace functional `t`, when `M` acts on `d × d` operators.
fn matrix_tp_residual(m: &ComplexMatrix) -> Option<f64> {
    let d = (m.nrows() as f64).sqrt().round() as usize;
    if d * d != m.nrows() || !m.is_square() {
        return None;
    }
    let t = trace_functional(d);
    Some(frobenius_norm(&(&t * m - &t)))
}

pub fn drazin_inverse(ch: &ChannelRep) -> Result<ChannelRep> {
    Ok(drazin_inverse_with(ch, &DrazinOptions::default())?.inverse)
}

pub fn drazin_inverse_with(ch: &ChannelRep, opts: &DrazinOptions) -> Result<DrazinOutcome> {
    if !ch.is_square() {
        return Err(Error::DimensionMismatch {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
        });
    }
    let m = ch.natural();
    let tol = &opts.tol;
    let (d, index, difference) = match opts.backend {
        DrazinBackend::Schur => {
            let (d, mz) = drazin_matrix_schur(&m, tol)?;
            (d, mz, None)
        }
        DrazinBackend::Spectral => {
            let (d, k) = drazin_matrix_spectral(&m, tol)?;
            (d, k, None)
        }
        DrazinBackend::Both => {
            let (ds, _) = drazin_matrix_schur(&m, tol)?;
            let (dp, k) = drazin_matrix_spectral(&m, tol)?;
            let diff = frobenius_norm(&(&ds - &dp));
            if diff > tol.backend * frobenius_norm(&ds).max(1.0) {
                return Err(Error::BackendDisagreement(diff));
            }
            (ds, k, Some(diff))
        }
    };
    let mut residuals = drazin_residuals(&m, &d, index);
    residuals.backend_difference = difference;

    let nm = frobenius_norm(&m).max(1.0);
    let nd = frobenius_norm(&d).max(1.0);
    let checks = [
        ("commutation", residuals.commutation, nm * nd),
        ("reflexive", residuals.reflexive, nd * nd * nm),
        (
            "index power",
            residuals.index_power,
            nm.powi(index as i32 + 1) * nd,
        ),
        ("idempotent", residuals.idempotent, (nm * nd).powi(2)),
    ];
    for (check, residual, scale) in checks {
        if residual > tol.jordan * scale {
            return Err(Error::DrazinPostcondition { check, residual });
        }
    }
    if matches!(matrix_tp_residual(&m), Some(r) if r <= tol.tp) {
        let r = matrix_tp_residual(&d).unwrap_or(f64::INFINITY);
        residuals.tp_output = Some(r);
        if r > tol.tp * nd {
            return Err(Error::DrazinPostcondition {
                check: "trace preservation",
                residual: r,
            });
        }
    }
    Ok(DrazinOutcome {
        inverse: ChannelRep::from_natural(ch.dim_in(), ch.dim_out(), d)?,
        index,
        residuals,
    })
}
