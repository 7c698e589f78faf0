//! Concrete channels: Pauli families, dilations, worked-example fixtures and
//! seeded random channels and states.

mod fixtures;
mod random;

pub use fixtures::{fixture, fixture_json, FIXTURE_NAMES};
pub use random::{
    complex_gaussian, random_channel, random_channel_rng, random_state, random_state_rng,
    random_tp_similarity, random_unitary, rng_from_seed, StateKind,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{hermitian_eigen, paulis, unitarity_residual, ComplexMatrix};
use crate::matrep::state::DensityMatrix;

/// Weights of `I, X, Y`; the `Z` weight is `1 - p1 - p2 - p3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliChannelParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PauliChannelParams {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        let p = Self { p1, p2, p3 };
        p.validate()?;
        Ok(p)
    }

    pub fn p4(&self) -> f64 {
        1.0 - self.p1 - self.p2 - self.p3
    }

    pub fn weights(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4().max(0.0)]
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p1, self.p2, self.p3, self.p4()];
        if all
            .iter()
            .all(|w| w.is_finite() && (-1e-12..=1.0 + 1e-12).contains(w))
        {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange(format!(
                "Pauli weights ({}, {}, {}, {}) must lie in [0, 1]",
                all[0], all[1], all[2], all[3]
            )))
        }
    }
}

/// `ρ ↦ p1 ρ + p2 XρX + p3 YρY + p4 ZρZ`.
pub fn pauli_channel(p: PauliChannelParams) -> Result<ChannelRep> {
    p.validate()?;
    let ops = paulis()
        .into_iter()
        .zip(p.weights())
        .filter(|(_, w)| *w > 0.0)
        .map(|(s, w)| s.scale(w.sqrt()))
        .collect();
    ChannelRep::from_kraus(ops)
}

/// Kraus set `{sqrt(1-3λ/4) I, sqrt(λ/4) X, sqrt(λ/4) Y, sqrt(λ/4) Z}`.
pub fn depolarizing(lambda: f64) -> Result<ChannelRep> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::ParamOutOfRange(format!(
            "depolarizing strength {lambda} not in [0, 1]"
        )));
    }
    pauli_channel(PauliChannelParams {
        p1: 1.0 - 0.75 * lambda,
        p2: 0.25 * lambda,
        p3: 0.25 * lambda,
    })
}

/// Kraus set `{diag(1, sqrt(1-γ)), diag(0, sqrt γ)}`.
pub fn phase_damping(gamma: f64) -> Result<ChannelRep> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::ParamOutOfRange(format!(
            "phase damping {gamma} not in [0, 1]"
        )));
    }
    let k0 =
        crate::matrep::matrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()], 1.0);
    let k1 = crate::matrep::matrix::from_real_rows(2, 2, &[0.0, 0.0, 0.0, gamma.sqrt()], 1.0);
    ChannelRep::from_kraus(vec![k0, k1])
}

/// Which tensor factor of the joint space is the environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Traced {
    First,
    #[default]
    Second,
}

/// Reduced channel `ρ ↦ Tr_env[U (ρ ⊗ σ_env) U†]` (factor order set by `traced`).
///
/// Kraus operators are `sqrt(p_k) ⟨l|_env U |e_k⟩_env` over an eigenbasis
/// `{p_k, e_k}` of `σ_env` and a basis `{l}` of the environment.
pub fn channel_from_dilation(
    u: &ComplexMatrix,
    env: &DensityMatrix,
    traced: Traced,
) -> Result<ChannelRep> {
    let de = env.dim();
    if !u.is_square() || de == 0 || !u.nrows().is_multiple_of(de) {
        return Err(Error::ShapeMismatch(format!(
            "joint unitary {}x{} does not factor with environment dimension {de}",
            u.nrows(),
            u.ncols()
        )));
    }
    let res = unitarity_residual(u);
    if res > 1e-9 {
        return Err(Error::NonUnitaryInput(res));
    }
    let ds = u.nrows() / de;
    let joint = |s: usize, e: usize| match traced {
        Traced::Second => s * de + e,
        Traced::First => e * ds + s,
    };
    let (weights, vectors) = hermitian_eigen(env.matrix());
    let mut ops = Vec::new();
    for (k, &p) in weights.iter().enumerate() {
        if p <= 1e-15 {
            continue;
        }
        for l in 0..de {
            let op = ComplexMatrix::from_fn(ds, ds, |i, j| {
                (0..de)
                    .map(|e| u[(joint(i, l), joint(j, e))] * vectors[(e, k)])
                    .sum::<num_complex::Complex64>()
                    * p.sqrt()
            });
            if op.norm() > 1e-15 {
                ops.push(op);
            }
        }
    }
    ChannelRep::from_kraus(ops)
}

/// CNOT with the first qubit as control.
pub fn cnot() -> ComplexMatrix {
    crate::matrep::matrix::from_real_rows(
        4,
        4,
        &[
            1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
        ],
        1.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inverses::{classify, InvertibilityClass};
    use crate::matrep::matrix::{from_real_rows, identity, kron, max_abs_diff};
    use crate::matrep::properties::check_properties;

    fn ket0() -> DensityMatrix {
        DensityMatrix::new(from_real_rows(2, 2, &[1., 0., 0., 0.], 1.0)).unwrap()
    }

    #[test]
    fn printed_pauli_natural_forms() {
        let deph = pauli_channel(PauliChannelParams::new(0.5, 0.0, 0.0).unwrap()).unwrap();
        let expected = from_real_rows(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1.,
            ],
            1.0,
        );
        assert!(max_abs_diff(&deph.natural(), &expected) < 1e-15);
        let d = depolarizing(1.0 / 3.0).unwrap();
        let expected = from_real_rows(
            4,
            4,
            &[
                5., 0., 0., 1., 0., 4., 0., 0., 0., 0., 4., 0., 1., 0., 0., 5.,
            ],
            1.0 / 6.0,
        );
        assert!(max_abs_diff(&d.natural(), &expected) < 1e-15);
        assert!(max_abs_diff(&depolarizing(0.0).unwrap().natural(), &identity(4)) < 1e-15);
        assert!(matches!(depolarizing(1.5), Err(Error::ParamOutOfRange(_))));
        assert!(PauliChannelParams::new(0.6, 0.6, 0.0).is_err());
    }

    #[test]
    fn constructors_are_cptp() {
        for ch in [
            pauli_channel(PauliChannelParams::new(0.7, 0.1, 0.05).unwrap()).unwrap(),
            depolarizing(0.4).unwrap(),
            phase_damping(0.3).unwrap(),
        ] {
            let v = check_properties(&ch);
            assert!(v.is_cptp(), "{v:?}");
            assert!((v.spectral_radius.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cnot_dilation_is_full_dephasing() {
        let ch = channel_from_dilation(&cnot(), &ket0(), Traced::Second).unwrap();
        let expected = from_real_rows(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 1.,
            ],
            1.0,
        );
        assert!(max_abs_diff(&ch.natural(), &expected) < 1e-15);
        assert_eq!(
            classify(&ch).unwrap().class,
            InvertibilityClass::NonInvertible
        );
        // oracle: conjugate the joint state and trace out the target directly
        let rho = from_real_rows(2, 2, &[0.6, 0.3, 0.3, 0.4], 1.0);
        let joint = cnot() * kron(&rho, ket0().matrix()) * cnot().adjoint();
        let reduced = ComplexMatrix::from_fn(2, 2, |i, j| {
            joint[(2 * i, 2 * j)] + joint[(2 * i + 1, 2 * j + 1)]
        });
        assert!(max_abs_diff(&ch.apply(&rho).unwrap(), &reduced) < 1e-15);
        let id = channel_from_dilation(&identity(4), &ket0(), Traced::Second).unwrap();
        assert!(max_abs_diff(&id.natural(), &identity(4)) < 1e-15);
        let bad = identity(4).scale(2.0);
        assert!(matches!(
            channel_from_dilation(&bad, &ket0(), Traced::Second),
            Err(Error::NonUnitaryInput(_))
        ));
    }

    #[test]
    fn traced_first_swaps_roles() {
        // with the first qubit as environment in |0⟩ the CNOT acts trivially on the target
        let ch = channel_from_dilation(&cnot(), &ket0(), Traced::First).unwrap();
        assert!(max_abs_diff(&ch.natural(), &identity(4)) < 1e-15);
    }
}
