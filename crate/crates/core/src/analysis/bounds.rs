use serde::Serialize;

use super::delta::{delta_report, DeltaReport};
use crate::circuits::{LayeredCircuit, Which};
use crate::error::{Error, Result};
use crate::matrep::matrix::{
    frobenius_norm, hermitian_residual, sigma_min, spectral_norm, unvectorize, vectorize,
    ComplexMatrix,
};
use crate::matrep::metrics::{fidelity_with, trace_distance};
use crate::matrep::state::Observable;

/// Per-observable part of an [`AnalysisReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableCheck {
    /// `|Tr[A(ρ_EM - ρ_ideal)]|`.
    pub delta: f64,
    /// `||A||_F · Δ_ρ`.
    pub bound: f64,
    /// `|Tr(ρ_EM A) - Tr(ρ_ideal A)| <= |Tr(ρ_ideal A) - Tr(ρ_exp A)|`.
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    /// `F(ρ_ideal + Δρ⁽¹⁾, ρ_ideal)`.
    pub f_first_order: f64,
    /// Whether `ρ_ideal + Δρ⁽¹⁾` is positive semidefinite.
    pub f_first_order_valid: bool,
    /// `F(ρ_EM, ρ_EM + Δρ⁽¹⁾)`, kept for comparison only.
    pub f_main_text: f64,
    /// `1 - ½√d C_exp ||v(Δ𝓝⁽¹⁾)||` before squaring; negative means the bound is vacuous.
    pub lower_bound_raw: f64,
    /// Square of the raw value clamped at zero.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub c_exp: f64,
    pub l_u: f64,
    /// `σ_min(v(𝓡) - v(𝓤_{n⋯1})†)`.
    pub l_ideal_exp: f64,
    /// `||v(Δ𝓝)||` for the full difference `𝓡̃ - 𝓡`.
    pub delta_norm: f64,
    pub delta_first_order_norm: f64,
    /// Product-of-norms bound on `||v(Δ𝓝⁽¹⁾)||`.
    pub layerwise_bound: f64,
    pub suff_condition_holds: bool,
    /// `Δ_ρ = ||𝓡̃(ρ_exp) - ρ_in||_F`; multiply by `||A||_F` for the observable bound.
    pub delta_obs_bound: f64,
    pub max_consistency_residual: f64,
    pub observables: Vec<ObservableCheck>,
}

impl AnalysisReport {
    pub fn improvement_verdicts(&self) -> Vec<bool> {
        self.observables.iter().map(|o| o.improved).collect()
    }

    /// The layerwise bound is an equality for a single layer, so allow rounding.
    pub fn layerwise_dominates(&self) -> bool {
        self.layerwise_bound * (1.0 + 1e-12) >= self.delta_first_order_norm
    }

    pub fn sandwich_holds(&self, tol: f64) -> bool {
        self.lower_bound - tol <= self.f_first_order && self.f_first_order <= self.upper_bound + tol
    }
}

/// Rounding allowance when comparing the two expectation-value errors.
const IMPROVEMENT_SLACK: f64 = 1e-12;

fn apply(m: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    unvectorize(&(m * vectorize(rho)), rho.nrows(), rho.ncols())
}

fn check_dims(c: &LayeredCircuit, obs: &Observable) -> Result<()> {
    if obs.dim() != c.dim() {
        return Err(Error::ShapeMismatch(format!(
            "observable of dimension {} for a circuit of dimension {}",
            obs.dim(),
            c.dim()
        )));
    }
    Ok(())
}

fn tr_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a * b).trace().re
}

/// Product-of-norms bound on `||v(Δ𝓝⁽¹⁾)||`.
pub fn layerwise_bound(c: &LayeredCircuit, delta: &DeltaReport) -> f64 {
    let unitaries: f64 = c
        .layers()
        .iter()
        .map(|l| spectral_norm(&l.ideal.natural().adjoint()))
        .product();
    let est: Vec<f64> = delta.estimated_inverses.iter().map(spectral_norm).collect();
    let sum: f64 = delta
        .delta_inverses
        .iter()
        .enumerate()
        .map(|(i, dinv)| {
            let others: f64 = est
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| x)
                .product();
            spectral_norm(dinv) * others
        })
        .sum();
    unitaries * sum
}

/// `σ_min(v(𝓡) - v(𝓤_{n⋯1})†)`.
pub fn ideal_exp_lipschitz(c: &LayeredCircuit) -> Result<f64> {
    let r = c
        .clone()
        .with_drazin_fallback(false)
        .reversal_matrix(Which::Ideal)?;
    Ok(sigma_min(&(r - c.ideal_unitary().adjoint())))
}

/// Fidelity sandwich, Lipschitz constants and observable checks for one circuit.
pub fn first_order_report(
    c: &LayeredCircuit,
    observables: &[Observable],
) -> Result<AnalysisReport> {
    for o in observables {
        check_dims(c, o)?;
    }
    let tol = c.tol;
    let d = c.dim();
    let delta = delta_report(c)?;
    let u = c.ideal_unitary();
    let rho_exp = c.noisy_output_matrix();
    let rho_ideal = c.ideal_output().into_matrix();
    let v_exp = vectorize(&rho_exp);

    let drho = apply(&(&u * &delta.first_order), &rho_exp)?;
    let first = &rho_ideal + &drho;
    let herm = hermitian_residual(&first);
    if herm > tol.herm * first.norm().max(1.0) {
        return Err(Error::InvalidFirstOrderState(herm));
    }
    let f1 = fidelity_with(&first, &rho_ideal, &tol)?;

    let em = c.em_output()?.matrix;
    let f_main_text = fidelity_with(&em, &(&em + &drho), &tol)?.value;

    let first_norm = spectral_norm(&delta.first_order);
    let c_exp = spectral_norm(&u) * v_exp.norm();
    let l_u = sigma_min(&u);
    let lower_bound_raw = 1.0 - 0.5 * (d as f64).sqrt() * c_exp * first_norm;
    let upper_bound = 1.0 - 0.25 * (l_u * (&delta.first_order * &v_exp).norm()).powi(2);

    let l_ideal_exp = ideal_exp_lipschitz(c)?;
    let delta_norm = spectral_norm(&delta.total);
    let delta_rho = frobenius_norm(&(c.recovered_input()? - c.input().matrix()));

    let observables = observables
        .iter()
        .map(|a| {
            let a = a.matrix();
            let e_em = tr_product(&em, a);
            let e_ideal = tr_product(&rho_ideal, a);
            let e_exp = tr_product(&rho_exp, a);
            ObservableCheck {
                delta: (e_em - e_ideal).abs(),
                bound: frobenius_norm(a) * delta_rho,
                improved: (e_em - e_ideal).abs() <= (e_ideal - e_exp).abs() + IMPROVEMENT_SLACK,
            }
        })
        .collect();

    Ok(AnalysisReport {
        f_first_order: f1.value,
        f_first_order_valid: f1.valid,
        f_main_text,
        lower_bound_raw,
        lower_bound: lower_bound_raw.max(0.0).powi(2),
        upper_bound,
        c_exp,
        l_u,
        l_ideal_exp,
        delta_norm,
        delta_first_order_norm: first_norm,
        layerwise_bound: layerwise_bound(c, &delta),
        suff_condition_holds: delta_norm <= l_ideal_exp,
        delta_obs_bound: delta_rho,
        max_consistency_residual: delta
            .consistency_residuals
            .iter()
            .cloned()
            .fold(0.0, f64::max),
        observables,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientCondition {
    pub holds: bool,
    /// `||v(Δ𝓝)||`.
    pub lhs: f64,
    /// `σ_min(v(𝓡) - v(𝓤_{n⋯1})†)`.
    pub rhs: f64,
    /// Observables for which the improvement inequality failed (checked only when `holds`).
    pub counterexamples: Vec<usize>,
}

/// Evaluates `||v(Δ𝓝)|| <= l_ideal-exp` and, when it holds, the improvement
/// inequality on every supplied observable.
pub fn sufficient_condition(
    c: &LayeredCircuit,
    observables: &[Observable],
) -> Result<SufficientCondition> {
    for o in observables {
        check_dims(c, o)?;
    }
    let delta = delta_report(c)?;
    let lhs = spectral_norm(&delta.total);
    let rhs = ideal_exp_lipschitz(c)?;
    let holds = lhs <= rhs;
    let mut counterexamples = Vec::new();
    if holds {
        let em = c.em_output()?.matrix;
        let ideal = c.ideal_output().into_matrix();
        let exp = c.noisy_output_matrix();
        for (k, a) in observables.iter().enumerate() {
            let a = a.matrix();
            let gained = (tr_product(&em, a) - tr_product(&ideal, a)).abs();
            let raw = (tr_product(&ideal, a) - tr_product(&exp, a)).abs();
            if gained > raw + IMPROVEMENT_SLACK {
                counterexamples.push(k);
            }
        }
    }
    Ok(SufficientCondition {
        holds,
        lhs,
        rhs,
        counterexamples,
    })
}

/// `(Δ, ||A||_F · Δ_ρ)` with `Δ = |Tr[A(ρ_EM - ρ_ideal)]|`.
pub fn observable_error_bound(c: &LayeredCircuit, a: &Observable) -> Result<(f64, f64)> {
    check_dims(c, a)?;
    let em = c.em_output()?.matrix;
    let ideal = c.ideal_output().into_matrix();
    let delta = tr_product(&(em - ideal), a.matrix()).abs();
    let delta_rho = frobenius_norm(&(c.recovered_input()? - c.input().matrix()));
    Ok((delta, frobenius_norm(a.matrix()) * delta_rho))
}

/// Trace distance and fidelity of a pair, with the two Fuchs–van de Graaf
/// inequalities `(1-D)² <= F` and `F <= 1-D²` evaluated as written.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuchsVanDeGraaf {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

pub fn fuchs_van_de_graaf(
    rho1: &ComplexMatrix,
    rho2: &ComplexMatrix,
    slack: f64,
) -> Result<FuchsVanDeGraaf> {
    let f = crate::matrep::metrics::fidelity(rho1, rho2)?.value;
    let dist = trace_distance(rho1, rho2);
    Ok(FuchsVanDeGraaf {
        fidelity: f,
        trace_distance: dist,
        lower_holds: (1.0 - dist).powi(2) <= f + slack,
        upper_holds: f <= 1.0 - dist * dist + slack,
    })
}
