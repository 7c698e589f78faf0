//! Seeded random instances for the fidelity sandwich, the sufficient
//! condition and the observable bound.
//!
//! Trial `k` of a suite draws from stream `k` of a ChaCha generator seeded
//! with the suite seed, so results do not depend on evaluation order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bounds::{first_order_report, observable_error_bound, sufficient_condition};
use super::delta::delta_report;
use crate::circuits::{CircuitLayer, LayeredCircuit};
use crate::error::Result;
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{c64, frobenius_norm, from_real_rows, kron, paulis, ComplexMatrix};
use crate::matrep::state::{DensityMatrix, Observable};
use crate::noisemodels::{
    complex_gaussian, random_channel_rng, random_state_rng, random_unitary, rng_from_seed,
    StateKind,
};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(trial);
    rng
}

/// `(1-ε)·𝓐 + ε·𝓑`.
pub fn mix(a: &ChannelRep, b: &ChannelRep, eps: f64) -> Result<ChannelRep> {
    ChannelRep::linear_combination(&[(1.0 - eps, a), (eps, b)])
}

/// `n` Haar-random unitary layers on dimension `d` with noise
/// `(1-η)·id + η·𝓜` (η in [0.1, 0.3]) and estimates `(1-ε)·𝓝 + ε·𝓜'`,
/// acting on a trace-induced mixed input. The random draws do not depend on
/// `eps`, so the same generator state gives the same circuit at every scale.
pub fn perturbed_circuit<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    eps: f64,
    rng: &mut R,
) -> Result<LayeredCircuit> {
    let mut layers = Vec::with_capacity(n);
    for _ in 0..n {
        let u = random_unitary(d, rng);
        let eta = rng.random_range(0.1..0.3);
        let noise = mix(
            &ChannelRep::identity(d),
            &random_channel_rng(d, d, rng)?,
            eta,
        )?;
        let estimate = mix(&noise, &random_channel_rng(d, d, rng)?, eps)?;
        layers.push(CircuitLayer::from_unitary(u, noise, estimate)?);
    }
    let input = random_state_rng(d, StateKind::MixedTraceInduced, rng)?;
    LayeredCircuit::new(layers, input)
}

/// Random Hermitian matrices with unit Frobenius norm.
pub fn random_observables<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Vec<Observable> {
    (0..count)
        .map(|_| {
            let g = complex_gaussian(d, d, rng);
            let h = (&g + g.adjoint()).scale(0.5);
            let norm = frobenius_norm(&h);
            Observable::new(h.unscale(norm)).expect("Hermitian by construction")
        })
        .collect()
}

/// Tensor products of Pauli matrices when `d` is a power of two, otherwise empty.
pub fn pauli_observables(d: usize) -> Vec<Observable> {
    if !d.is_power_of_two() || d < 2 {
        return Vec::new();
    }
    let mut ops = vec![ComplexMatrix::identity(1, 1)];
    let mut dim = 1;
    while dim < d {
        ops = ops
            .iter()
            .flat_map(|a| paulis().into_iter().map(move |p| kron(a, &p)))
            .collect();
        dim *= 2;
    }
    ops.into_iter()
        .map(|m| Observable::new(m).expect("Pauli strings are Hermitian"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichSummary {
    pub instances: usize,
    pub skipped: usize,
    pub violations: usize,
    pub max_lower_excess: f64,
    pub max_upper_excess: f64,
    pub layerwise_failures: usize,
    pub max_consistency_residual: f64,
    /// Fitted log-log slope of `||Δ𝓝 - Δ𝓝⁽¹⁾||` against `ε`.
    pub residual_slope: f64,
}

/// Samples circuits (n in 1..=3, d in {2, 4}, ε log-uniform in [1e-4, 1e-2])
/// until `count` have a valid first-order state and a positive lower bound.
pub fn sandwich_suite(seed: u64, count: usize) -> Result<SandwichSummary> {
    let mut s = SandwichSummary {
        instances: 0,
        skipped: 0,
        violations: 0,
        max_lower_excess: f64::NEG_INFINITY,
        max_upper_excess: f64::NEG_INFINITY,
        layerwise_failures: 0,
        max_consistency_residual: 0.0,
        residual_slope: residual_slope(seed)?,
    };
    let mut trial = 0;
    while s.instances < count {
        let mut rng = trial_rng(seed, trial);
        trial += 1;
        let n = rng.random_range(1..=3);
        let d = if rng.random_bool(0.5) { 2 } else { 4 };
        let eps = 10f64.powf(rng.random_range(-4.0..-2.0));
        let c = perturbed_circuit(n, d, eps, &mut rng)?;
        let r = first_order_report(&c, &[])?;
        if !r.f_first_order_valid || r.lower_bound_raw <= 0.0 {
            s.skipped += 1;
            continue;
        }
        s.instances += 1;
        if !r.sandwich_holds(1e-9) {
            s.violations += 1;
        }
        s.max_lower_excess = s.max_lower_excess.max(r.lower_bound - r.f_first_order);
        s.max_upper_excess = s.max_upper_excess.max(r.f_first_order - r.upper_bound);
        if !r.layerwise_dominates() {
            s.layerwise_failures += 1;
        }
        s.max_consistency_residual = s.max_consistency_residual.max(r.max_consistency_residual);
    }
    Ok(s)
}

/// Least-squares slope of `log ||Δ𝓝 - Δ𝓝⁽¹⁾||` against `log ε` for one
/// two-layer circuit at ε = 1e-2 … 1e-4.
pub fn residual_slope(seed: u64) -> Result<f64> {
    let scales = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let mut points = Vec::with_capacity(scales.len());
    for eps in scales {
        let c = perturbed_circuit(2, 2, eps, &mut trial_rng(seed, u64::MAX))?;
        let r = delta_report(&c)?;
        points.push((eps.ln(), frobenius_norm(&(&r.total - &r.first_order)).ln()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Qubit amplitude damping `{[[1,0],[0,√(1-γ)]], [[0,√γ],[0,0]]}`.
pub fn amplitude_damping(gamma: f64) -> Result<ChannelRep> {
    let k0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()], 1.0);
    let k1 = from_real_rows(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0], 1.0);
    ChannelRep::from_kraus(vec![k0, k1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientSummary {
    pub attempts: usize,
    /// Instances with `Δ𝓝 ≠ 0` on which the condition held.
    pub found: usize,
    pub observables_checked: usize,
    pub counterexamples: usize,
    pub min_rhs: f64,
    pub max_rhs: f64,
    pub min_lhs: f64,
    /// `l_ideal-exp` of a circuit whose noise is the identity.
    pub noiseless_rhs: f64,
}

/// Rejection search on single-qubit, single-layer circuits with strongly
/// non-unital noise (amplitude damping, γ in [0.5, 0.9], after a random
/// unitary) and estimation error ε log-uniform in [1e-6, 1e-1].
pub fn sufficient_search(
    seed: u64,
    attempts: usize,
    observables_per_instance: usize,
) -> Result<SufficientSummary> {
    let mut s = SufficientSummary {
        attempts,
        found: 0,
        observables_checked: 0,
        counterexamples: 0,
        min_rhs: f64::INFINITY,
        max_rhs: 0.0,
        min_lhs: f64::INFINITY,
        noiseless_rhs: 0.0,
    };
    for trial in 0..attempts as u64 {
        let mut rng = trial_rng(seed, trial);
        let u = random_unitary(2, &mut rng);
        let gamma = rng.random_range(0.5..0.9);
        let twist = ChannelRep::unitary(random_unitary(2, &mut rng))?;
        let noise = amplitude_damping(gamma)?.then(&twist)?;
        let eps = 10f64.powf(rng.random_range(-6.0..-1.0));
        let estimate = mix(&noise, &random_channel_rng(2, 2, &mut rng)?, eps)?;
        let input = random_state_rng(2, StateKind::MixedTraceInduced, &mut rng)?;
        let c = LayeredCircuit::new(vec![CircuitLayer::from_unitary(u, noise, estimate)?], input)?;
        let mut obs = random_observables(2, observables_per_instance, &mut rng);
        obs.extend(pauli_observables(2));
        let r = sufficient_condition(&c, &obs)?;
        s.min_rhs = s.min_rhs.min(r.rhs);
        s.max_rhs = s.max_rhs.max(r.rhs);
        s.min_lhs = s.min_lhs.min(r.lhs);
        if r.holds && r.lhs > 1e-12 {
            s.found += 1;
            s.observables_checked += obs.len();
            s.counterexamples += r.counterexamples.len();
        }
    }
    let mut rng = trial_rng(seed, u64::MAX);
    let u = random_unitary(2, &mut rng);
    let noiseless =
        CircuitLayer::from_unitary(u, ChannelRep::identity(2), ChannelRep::identity(2))?;
    let c = LayeredCircuit::new(vec![noiseless], DensityMatrix::maximally_mixed(2))?;
    s.noiseless_rhs = sufficient_condition(&c, &[])?.rhs;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableBoundSummary {
    pub instances: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Random circuits (as in [`sandwich_suite`], without the validity filter),
/// one random observable each.
pub fn observable_bound_suite(seed: u64, count: usize) -> Result<ObservableBoundSummary> {
    let mut s = ObservableBoundSummary {
        instances: count,
        violations: 0,
        max_ratio: 0.0,
    };
    for trial in 0..count as u64 {
        let mut rng = trial_rng(seed, trial);
        let n = rng.random_range(1..=3);
        let d = if rng.random_bool(0.5) { 2 } else { 4 };
        let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
        let c = perturbed_circuit(n, d, eps, &mut rng)?;
        let mut a = random_observables(d, 1, &mut rng)
            .remove(0)
            .matrix()
            .clone();
        a *= c64(rng.random_range(0.5..5.0), 0.0);
        let (delta, bound) = observable_error_bound(&c, &Observable::new(a)?)?;
        if delta > bound + 1e-10 {
            s.violations += 1;
        }
        if bound > 0.0 {
            s.max_ratio = s.max_ratio.max(delta / bound);
        }
    }
    Ok(s)
}
