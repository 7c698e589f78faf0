//! Mitigating a Pauli channel with a depolarizing estimate chosen to
//! maximise the Bloch-vector overlap.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inverses::exact_inverse;
use crate::linalg::eigenvalues;
use crate::matrep::matrix::paulis;
use crate::matrep::metrics::fidelity;
use crate::matrep::state::{expectation, Observable};
use crate::noisemodels::{
    depolarizing, pauli_channel, random_state_rng, rng_from_seed, PauliChannelParams, StateKind,
};

/// `sqrt(p1 (1 - 3λ/4)) + (sqrt p2 + sqrt p3 + sqrt p4) sqrt(λ/4)`.
pub fn mismatch_overlap(p: &PauliChannelParams, lambda: f64) -> f64 {
    let [p1, p2, p3, p4] = p.weights();
    (p1 * (1.0 - 0.75 * lambda)).max(0.0).sqrt()
        + (p2.sqrt() + p3.sqrt() + p4.sqrt()) * (0.25 * lambda).sqrt()
}

/// Depolarizing strength maximising [`mismatch_overlap`] over `[0, 1]`.
pub fn mismatch_lambda_max(p: &PauliChannelParams) -> Result<f64> {
    p.validate()?;
    let [p1, p2, p3, p4] = p.weights();
    // s² expanded so that a single nonzero weight enters exactly
    let s2 = p2 + p3 + p4 + 2.0 * ((p2 * p3).sqrt() + (p2 * p4).sqrt() + (p3 * p4).sqrt());
    let mut candidates = vec![0.0, 1.0];
    let denom = 2.25 * p1 * p1 + 0.75 * p1 * s2;
    if p1 > 0.0 && denom > 0.0 {
        candidates.insert(0, (s2 * p1 / denom).clamp(0.0, 1.0));
    }
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if mismatch_overlap(p, c) > mismatch_overlap(p, best) {
            best = c;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchRow {
    pub state_id: usize,
    pub z_in: f64,
    pub z_noisy: f64,
    pub z_mitigated: f64,
    pub y_in: f64,
    pub y_noisy: f64,
    pub y_mitigated: f64,
    pub f_noisy: f64,
    pub f_mitigated: f64,
    pub f_mitigated_valid: bool,
}

pub const MISMATCH_CSV_HEADER: &str =
    "state_id,z_in,z_noisy,z_mitigated,y_in,y_noisy,y_mitigated,f_noisy,f_mitigated,f_mitigated_valid";

impl MismatchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.state_id,
            self.z_in,
            self.z_noisy,
            self.z_mitigated,
            self.y_in,
            self.y_noisy,
            self.y_mitigated,
            self.f_noisy,
            self.f_mitigated,
            self.f_mitigated_valid
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MismatchOutcome {
    Table {
        lambda_max: f64,
        /// Eigenvalues of `v(𝓓⁻¹∘𝓝)`, sorted by decreasing real part.
        recovered_eigenvalues: Vec<Complex64>,
        rows: Vec<MismatchRow>,
    },
    /// The optimal estimate is not invertible, so nothing can be mitigated.
    EstimateNotInvertible {
        lambda_max: f64,
        noise_invertible: bool,
        verdict: String,
    },
}

impl MismatchOutcome {
    pub fn lambda_max(&self) -> f64 {
        match self {
            Self::Table { lambda_max, .. } | Self::EstimateNotInvertible { lambda_max, .. } => {
                *lambda_max
            }
        }
    }

    /// Header plus one line per state; empty when the estimate was not invertible.
    pub fn to_csv(&self) -> String {
        match self {
            Self::Table { rows, .. } => {
                let mut out = String::from(MISMATCH_CSV_HEADER);
                out.push('\n');
                for r in rows {
                    out.push_str(&r.to_csv());
                    out.push('\n');
                }
                out
            }
            Self::EstimateNotInvertible { .. } => String::new(),
        }
    }
}

/// Applies `𝓝` and `𝓓(λ_max)⁻¹∘𝓝` to `n_states` Haar-random pure states.
pub fn mismatch_experiment(
    p: &PauliChannelParams,
    n_states: usize,
    seed: u64,
) -> Result<MismatchOutcome> {
    let lambda_max = mismatch_lambda_max(p)?;
    let noise = pauli_channel(*p)?;
    let estimate = depolarizing(lambda_max)?;
    let d_inv = match exact_inverse(&estimate) {
        Ok(inv) => inv,
        Err(Error::NonInvertibleChannel(_)) => {
            let noise_invertible = exact_inverse(&noise).is_ok();
            let verdict = format!(
                "estimated depolarizing channel (lambda = {lambda_max}) is non-invertible while the noise is {}",
                if noise_invertible { "invertible" } else { "also non-invertible" }
            );
            return Ok(MismatchOutcome::EstimateNotInvertible {
                lambda_max,
                noise_invertible,
                verdict,
            });
        }
        Err(e) => return Err(e),
    };
    let recovered = noise.then(&d_inv)?;
    let mut recovered_eigenvalues = eigenvalues(&recovered.natural());
    recovered_eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let [_, _, y, z] = paulis();
    let (y, z) = (Observable::new(y)?, Observable::new(z)?);
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n_states);
    for state_id in 0..n_states {
        let rho = random_state_rng(2, StateKind::PureUniform, &mut rng)?;
        let noisy = noise.apply(rho.matrix())?;
        let mitigated = recovered.apply(rho.matrix())?;
        let f_mit = fidelity(&mitigated, rho.matrix())?;
        rows.push(MismatchRow {
            state_id,
            z_in: rho.expectation(&z),
            z_noisy: expectation(&noisy, &z),
            z_mitigated: expectation(&mitigated, &z),
            y_in: rho.expectation(&y),
            y_noisy: expectation(&noisy, &y),
            y_mitigated: expectation(&mitigated, &y),
            f_noisy: fidelity(&noisy, rho.matrix())?.value,
            f_mitigated: f_mit.value,
            f_mitigated_valid: f_mit.valid,
        });
    }
    Ok(MismatchOutcome::Table {
        lambda_max,
        recovered_eigenvalues,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn params(p1: f64, p2: f64, p3: f64) -> PauliChannelParams {
        PauliChannelParams::new(p1, p2, p3).unwrap()
    }

    #[test]
    fn printed_optima() {
        assert_eq!(
            mismatch_lambda_max(&params(0.5, 0.0, 0.0)).unwrap(),
            1.0 / 3.0
        );
        assert_eq!(mismatch_lambda_max(&params(0.0, 1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(mismatch_lambda_max(&params(1.0, 0.0, 0.0)).unwrap(), 0.0);
        assert!(mismatch_lambda_max(&PauliChannelParams {
            p1: 0.9,
            p2: 0.3,
            p3: 0.0
        })
        .is_err());
    }

    #[test]
    fn optimum_matches_grid_search() {
        let mut rng = rng_from_seed(77);
        for _ in 0..200 {
            let mut w: Vec<f64> = (0..4).map(|_| -rng.random::<f64>().ln()).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            let p = params(w[0], w[1], w[2]);
            let best = (0..=100_000)
                .map(|k| mismatch_overlap(&p, k as f64 * 1e-5))
                .fold(f64::NEG_INFINITY, f64::max);
            let ours = mismatch_overlap(&p, mismatch_lambda_max(&p).unwrap());
            assert!(ours >= best - 1e-4, "{p:?}: {ours} vs {best}");
        }
    }

    #[test]
    fn dephasing_mitigation_is_worse_along_z() {
        let out = mismatch_experiment(&params(0.5, 0.0, 0.0), 20, 7).unwrap();
        let MismatchOutcome::Table {
            recovered_eigenvalues,
            rows,
            ..
        } = &out
        else {
            panic!("expected a table")
        };
        for (e, want) in recovered_eigenvalues.iter().zip([1.5, 1.0, 0.0, 0.0]) {
            assert!((e - want).norm() < 1e-9, "{recovered_eigenvalues:?}");
        }
        for r in rows {
            assert!((r.z_mitigated - 1.5 * r.z_in).abs() < 1e-9);
            assert!((r.z_noisy - r.z_in).abs() < 1e-9);
            assert!(r.y_noisy.abs() < 1e-9 && r.y_mitigated.abs() < 1e-9);
        }
        assert_eq!(out.to_csv().lines().count(), 21);
    }

    #[test]
    fn bit_flip_gives_the_non_invertible_verdict() {
        let out = mismatch_experiment(&params(0.0, 1.0, 0.0), 5, 1).unwrap();
        match out {
            MismatchOutcome::EstimateNotInvertible {
                lambda_max,
                noise_invertible,
                ..
            } => {
                assert_eq!(lambda_max, 1.0);
                assert!(noise_invertible);
            }
            other => panic!("{other:?}"),
        }
    }
}
