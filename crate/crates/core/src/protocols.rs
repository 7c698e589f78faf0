//! Desk-scale versions of the standard mitigation protocols: zero-noise
//! extrapolation, quasiprobability sampling, readout inversion and virtual
//! distillation.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use crate::classical::{QuasiDistribution, StochasticMatrix};
use crate::error::{Error, Result};
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{hermitian_function, paulis, vectorize};
use crate::matrep::state::DensityMatrix;
use crate::noisemodels::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fit {
    /// Polynomial cancellation through all points.
    #[default]
    Richardson,
    /// Least-squares line, evaluated at zero.
    Linear,
    /// Least-squares fit of `A e^{-bλ}`, evaluated at zero.
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationInput {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExtrapolationInput {
    pub fn new(scales: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let input = Self { scales, values };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        if self.scales.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.scales.len(),
                got: self.values.len(),
            });
        }
        if self.scales.is_empty() {
            return Err(Error::DegenerateScales("no data points".into()));
        }
        if let Some(s) = self.scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::DegenerateScales(format!(
                "scale factor {s} is not positive"
            )));
        }
        for (i, a) in self.scales.iter().enumerate() {
            if self.scales[..i].contains(a) {
                return Err(Error::DegenerateScales(format!(
                    "scale factor {a} repeated"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Richardson weights `r_i`; empty for the fitted models.
    pub weights: Vec<f64>,
}

/// `r_i = Π_{j≠i} λ_j / (λ_j - λ_i)`.
pub fn richardson_weights(scales: &[f64]) -> Vec<f64> {
    scales
        .iter()
        .enumerate()
        .map(|(i, li)| {
            scales
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, lj)| lj / (lj - li))
                .product()
        })
        .collect()
}

pub fn richardson_extrapolate(input: &ExtrapolationInput) -> Result<Extrapolation> {
    extrapolate(input, Fit::Richardson)
}

pub fn extrapolate(input: &ExtrapolationInput, fit: Fit) -> Result<Extrapolation> {
    input.validate()?;
    match fit {
        Fit::Richardson => {
            let weights = richardson_weights(&input.scales);
            let value = weights.iter().zip(&input.values).map(|(r, v)| r * v).sum();
            Ok(Extrapolation { value, weights })
        }
        Fit::Linear => Ok(Extrapolation {
            value: line_intercept(&input.scales, &input.values)?,
            weights: Vec::new(),
        }),
        Fit::Exp => {
            let sign = input.values[0].signum();
            if input.values.iter().any(|v| *v == 0.0 || v.signum() != sign) {
                return Err(Error::ParamOutOfRange(
                    "exponential fit needs nonzero values of one sign".into(),
                ));
            }
            let logs: Vec<f64> = input.values.iter().map(|v| v.abs().ln()).collect();
            Ok(Extrapolation {
                value: sign * line_intercept(&input.scales, &logs)?.exp(),
                weights: Vec::new(),
            })
        }
    }
}

fn line_intercept(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::DegenerateScales(
            "a fitted model needs at least two points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(my - sxy / sxx * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiprobDecomposition {
    pub coefficients: Vec<f64>,
    /// `τ = Σ|a_i|`.
    pub tau: f64,
    /// Relative residual `||Σ a_i v(G_i) - v(target)||_F / max(1, ||v(target)||_F)`.
    pub residual: f64,
}

impl QuasiprobDecomposition {
    /// `(a_1, ..., a_n)` with `τ` and residual filled in.
    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        let tau = coefficients.iter().map(|a| a.abs()).sum();
        Self {
            coefficients,
            tau,
            residual: 0.0,
        }
    }

    /// `p_i = |a_i| / τ`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|a| a.abs() / self.tau)
            .collect()
    }
}

/// Residual accepted for a basis decomposition.
pub const TOL_SPAN: f64 = 1e-9;

/// Real least-squares coefficients of `target` over `basis` in natural form.
pub fn quasiprob_decompose(
    target: &ChannelRep,
    basis: &[ChannelRep],
) -> Result<QuasiprobDecomposition> {
    if basis.is_empty() {
        return Err(Error::ShapeMismatch("empty basis".into()));
    }
    let dims = (target.dim_in(), target.dim_out());
    if let Some(b) = basis.iter().find(|b| (b.dim_in(), b.dim_out()) != dims) {
        return Err(Error::DimensionMismatch {
            dim_in: b.dim_in(),
            dim_out: b.dim_out(),
        });
    }
    let t = vectorize(&target.natural());
    let len = t.len();
    // stack real and imaginary parts so the coefficients come out real
    let columns: Vec<_> = basis.iter().map(|b| vectorize(&b.natural())).collect();
    let a = DMatrix::from_fn(2 * len, basis.len(), |r, c| {
        let z = columns[c][r % len];
        if r < len {
            z.re
        } else {
            z.im
        }
    });
    let b = DVector::from_fn(
        2 * len,
        |r, _| if r < len { t[r].re } else { t[r - len].im },
    );
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12 * svd.singular_values.max())
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let residual = (&a * &x - &b).norm() / b.norm().max(1.0);
    if residual > TOL_SPAN {
        return Err(Error::TargetOutsideSpan(residual));
    }
    let mut dec = QuasiprobDecomposition::from_coefficients(x.as_slice().to_vec());
    dec.residual = residual;
    Ok(dec)
}

/// Conjugation channels by `I, X, Y, Z`.
pub fn pauli_conjugations() -> Vec<ChannelRep> {
    paulis()
        .into_iter()
        .map(|p| ChannelRep::from_kraus(vec![p]).expect("Pauli matrices are valid Kraus operators"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiprobEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// Sample variance of the single-shot estimator `τ sgn(a_i) x`.
    pub sample_variance: f64,
}

/// Monte-Carlo estimate of `Σ a_i ⟨A⟩_i`: draw `i` with probability `|a_i|/τ`,
/// record a single-shot `±1` outcome with mean `⟨A⟩_i`, and weight it by
/// `τ sgn(a_i)`.
pub fn quasiprob_estimate(
    dec: &QuasiprobDecomposition,
    expectations: &[f64],
    n_samples: u64,
    seed: u64,
) -> Result<QuasiprobEstimate> {
    if expectations.len() != dec.coefficients.len() {
        return Err(Error::LengthMismatch {
            expected: dec.coefficients.len(),
            got: expectations.len(),
        });
    }
    if let Some(e) = expectations.iter().find(|e| !(-1.0..=1.0).contains(*e)) {
        return Err(Error::ParamOutOfRange(format!(
            "expectation {e} of a ±1 observable outside [-1, 1]"
        )));
    }
    if n_samples < 2 {
        return Err(Error::ParamOutOfRange("need at least two samples".into()));
    }
    let pick = WeightedIndex::new(dec.probabilities())
        .map_err(|e| Error::ParamOutOfRange(format!("invalid sampling weights: {e}")))?;
    let ups = expectations
        .iter()
        .map(|e| Bernoulli::new((1.0 + e) / 2.0).expect("probability in [0, 1]"))
        .collect::<Vec<_>>();
    let mut rng = rng_from_seed(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let i = pick.sample(&mut rng);
        let shot = if ups[i].sample(&mut rng) { 1.0 } else { -1.0 };
        let x = dec.tau * dec.coefficients[i].signum() * shot;
        sum += x;
        sum_sq += x * x;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    Ok(QuasiprobEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        sample_variance: var,
    })
}

pub type ReadoutMatrix = StochasticMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutResult {
    pub probabilities: Vec<f64>,
    pub has_negative: bool,
    /// Euclidean projection onto the probability simplex, when requested.
    pub projected: Option<Vec<f64>>,
}

/// `T⁻¹ p_noisy`, optionally followed by the nearest-distribution projection.
pub fn readout_mitigate(
    t: &ReadoutMatrix,
    p_noisy: &[f64],
    project: bool,
) -> Result<ReadoutResult> {
    if p_noisy.len() != t.dim() {
        return Err(Error::LengthMismatch {
            expected: t.dim(),
            got: p_noisy.len(),
        });
    }
    let QuasiDistribution {
        values,
        has_negative,
    } = QuasiDistribution::from_values(t.solve(p_noisy).map_err(Error::SingularReadoutMatrix)?);
    let projected = project.then(|| project_to_simplex(&values));
    Ok(ReadoutResult {
        probabilities: values,
        has_negative,
        projected,
    })
}

/// Nearest point of the probability simplex in Euclidean distance (sort-and-threshold).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `ρ^m / Tr[ρ^m]`.
pub fn virtual_distill(rho: &DensityMatrix, m: u32) -> Result<DensityMatrix> {
    if m == 0 {
        return Err(Error::ParamOutOfRange(
            "number of copies must be at least 1".into(),
        ));
    }
    let power = hermitian_function(rho.matrix(), |x| x.max(0.0).powi(m as i32));
    let tr = power.trace().re;
    if tr <= 1e-12 {
        return Err(Error::DegenerateInput(format!("Tr[ρ^{m}] = {tr:e}")));
    }
    DensityMatrix::new(power.unscale(tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inverses::exact_inverse;
    use crate::matrep::matrix::{from_real_rows, max_abs_diff};
    use crate::noisemodels::{depolarizing, random_state, StateKind};

    #[test]
    fn richardson_cancels_polynomials() {
        let lin = ExtrapolationInput::new(vec![1.0, 2.0], vec![3.0 + 0.5, 3.0 + 1.0]).unwrap();
        assert_eq!(richardson_extrapolate(&lin).unwrap().value, 3.0);
        let f = |l: f64| 0.8 - 0.3 * l + 0.07 * l * l;
        let quad =
            ExtrapolationInput::new(vec![1.0, 2.0, 3.0], vec![f(1.0), f(2.0), f(3.0)]).unwrap();
        let r = richardson_extrapolate(&quad).unwrap();
        assert!((r.value - 0.8).abs() < 1e-12);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let single = ExtrapolationInput::new(vec![1.5], vec![0.42]).unwrap();
        assert_eq!(richardson_extrapolate(&single).unwrap().value, 0.42);
        assert!(matches!(
            ExtrapolationInput::new(vec![1.0, 1.0], vec![0.0, 0.0]),
            Err(Error::DegenerateScales(_))
        ));
        assert!(matches!(
            ExtrapolationInput::new(vec![0.0, 1.0], vec![0.0, 0.0]),
            Err(Error::DegenerateScales(_))
        ));
    }

    #[test]
    fn fitted_models() {
        let exp = ExtrapolationInput::new(
            vec![1.0, 2.0, 3.0],
            (1..=3).map(|l| 0.9 * (-0.2 * l as f64).exp()).collect(),
        )
        .unwrap();
        assert!((extrapolate(&exp, Fit::Exp).unwrap().value - 0.9).abs() < 1e-12);
        let lin = ExtrapolationInput::new(vec![1.0, 2.0, 4.0], vec![0.7, 0.6, 0.4]).unwrap();
        assert!((extrapolate(&lin, Fit::Linear).unwrap().value - 0.8).abs() < 1e-12);
        let mixed = ExtrapolationInput::new(vec![1.0, 2.0], vec![0.1, -0.1]).unwrap();
        assert!(extrapolate(&mixed, Fit::Exp).is_err());
    }

    #[test]
    fn depolarizing_inverse_over_paulis() {
        for lambda in [0.05, 0.3, 0.6] {
            let target = exact_inverse(&depolarizing(lambda).unwrap()).unwrap();
            let dec = quasiprob_decompose(&target, &pauli_conjugations()).unwrap();
            // oracle: Pauli-diagonal system solved by hand
            let side = -lambda / (4.0 - 4.0 * lambda);
            let expected = [(4.0 - lambda) / (4.0 - 4.0 * lambda), side, side, side];
            for (a, e) in dec.coefficients.iter().zip(expected) {
                assert!((a - e).abs() < 1e-12);
            }
            assert!((dec.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((dec.tau - (2.0 + lambda) / (2.0 - 2.0 * lambda)).abs() < 1e-12);
        }
        let basis = pauli_conjugations();
        let dec = quasiprob_decompose(&basis[2], &basis).unwrap();
        assert!((dec.coefficients[2] - 1.0).abs() < 1e-12 && (dec.tau - 1.0).abs() < 1e-12);
        let amp = crate::analysis::ensembles::amplitude_damping(0.3).unwrap();
        assert!(matches!(
            quasiprob_decompose(&amp, &basis),
            Err(Error::TargetOutsideSpan(_))
        ));
    }

    #[test]
    fn quasiprob_variance_amplification() {
        let dec = QuasiprobDecomposition::from_coefficients(vec![2.0, -1.0]);
        assert_eq!(dec.tau, 3.0);
        let n = 200_000;
        let mitigated = quasiprob_estimate(&dec, &[0.0, 0.0], n, 11).unwrap();
        let plain = quasiprob_estimate(
            &QuasiprobDecomposition::from_coefficients(vec![1.0]),
            &[0.0],
            n,
            12,
        )
        .unwrap();
        let ratio = mitigated.sample_variance / plain.sample_variance;
        assert!((ratio - 9.0).abs() < 0.3 * 9.0, "{ratio}");
        let biased = quasiprob_estimate(&dec, &[0.6, 0.2], n, 13).unwrap();
        assert!((biased.estimate - 1.0).abs() < 5.0 * biased.std_error);
    }

    #[test]
    fn readout_inversion() {
        let t = StochasticMatrix::from_rows(2, &[0.9, 0.2, 0.1, 0.8]).unwrap();
        let p = [0.35, 0.65];
        let r = readout_mitigate(&t, &t.apply(&p).unwrap(), false).unwrap();
        assert!(
            (r.probabilities[0] - 0.35).abs() < 1e-12 && (r.probabilities[1] - 0.65).abs() < 1e-12
        );
        let half = StochasticMatrix::from_rows(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            readout_mitigate(&half, &p, false),
            Err(Error::SingularReadoutMatrix(_))
        ));
        let r = readout_mitigate(&t, &[0.95, 0.05], true).unwrap();
        assert!(r.has_negative);
        assert_eq!(r.projected.unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.5, 0.8, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.35).abs() < 1e-15 && (p[1] - 0.65).abs() < 1e-15 && p[2] == 0.0);
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
    }

    #[test]
    fn virtual_distillation() {
        let rho = DensityMatrix::new(from_real_rows(2, 2, &[0.9, 0.0, 0.0, 0.1], 1.0)).unwrap();
        let vd = virtual_distill(&rho, 2).unwrap();
        assert!(
            max_abs_diff(
                vd.matrix(),
                &from_real_rows(2, 2, &[81.0, 0.0, 0.0, 1.0], 1.0 / 82.0)
            ) < 1e-15
        );
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(max_abs_diff(virtual_distill(&mixed, 5).unwrap().matrix(), mixed.matrix()) < 1e-15);
        let pure = random_state(3, StateKind::PureUniform, 4).unwrap();
        assert!(max_abs_diff(virtual_distill(&pure, 3).unwrap().matrix(), pure.matrix()) < 1e-12);
        assert!(max_abs_diff(virtual_distill(&pure, 1).unwrap().matrix(), pure.matrix()) < 1e-12);
        assert!(virtual_distill(&pure, 0).is_err());
    }
}
