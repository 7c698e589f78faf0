use serde::{Deserialize, Serialize};

use super::channel::ChannelRep;
use super::matrix::{
    hermitian_residual, identity, min_hermitian_eigenvalue, spectral_norm, trace_functional,
    ComplexMatrix,
};
use crate::linalg::spectral_radius;
use crate::tolerance::Tolerances;

/// CP / TP / HP verdict of a linear map together with the residuals behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub is_cp: bool,
    pub is_tp: bool,
    pub is_hp: bool,
    /// Smallest eigenvalue of the Hermitian part of the Choi matrix.
    pub min_choi_eigenvalue: f64,
    /// `|| Tr_2 C - I ||` in operator norm.
    pub tp_residual: f64,
    /// `max |C - C†|`.
    pub hp_residual: f64,
    /// Largest eigenvalue modulus of the natural form; `None` for non-square maps.
    pub spectral_radius: Option<f64>,
}

impl PropertyVerdict {
    pub fn is_cptp(&self) -> bool {
        self.is_cp && self.is_tp
    }
}

pub fn check_properties(ch: &ChannelRep) -> PropertyVerdict {
    check_properties_with(ch, &Tolerances::default())
}

pub fn check_properties_with(ch: &ChannelRep, tol: &Tolerances) -> PropertyVerdict {
    let choi = ch.choi();
    let hp_residual = hermitian_residual(&choi);
    let min_choi_eigenvalue = min_hermitian_eigenvalue(&choi);
    let tp_residual = spectral_norm(
        &(partial_trace_output(&choi, ch.dim_in(), ch.dim_out()) - identity(ch.dim_in())),
    );
    let spectral_radius = ch.is_square().then(|| spectral_radius(&ch.natural()));
    PropertyVerdict {
        is_cp: hp_residual <= tol.herm && min_choi_eigenvalue >= -tol.cp,
        is_tp: tp_residual <= tol.tp,
        is_hp: hp_residual <= tol.herm,
        min_choi_eigenvalue,
        tp_residual,
        hp_residual,
        spectral_radius,
    }
}

/// Traces out the second (output) factor of a Choi matrix: `[Tr Φ(E_{a,b})]_{a,b}`.
pub fn partial_trace_output(choi: &ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(din, din, |a, b| {
        (0..dout).map(|i| choi[(a * dout + i, b * dout + i)]).sum()
    })
}

/// Distance of `t · M` from `t`, where `t` is the trace functional: the
/// natural-form TP criterion, independent of any Choi ordering convention.
pub fn natural_tp_residual(ch: &ChannelRep) -> f64 {
    let t_in = trace_functional(ch.dim_in());
    let t_out = trace_functional(ch.dim_out());
    (t_out * ch.natural() - t_in).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::channel::natural_from_kraus;
    use crate::matrep::matrix::{c64, paulis};

    #[test]
    fn unitary_channel_is_cptp_with_unit_radius() {
        let h = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0)],
        )
        .scale(0.5f64.sqrt());
        let v = check_properties(&ChannelRep::unitary(h).unwrap());
        assert!(v.is_cp && v.is_tp && v.is_hp);
        assert!((v.spectral_radius.unwrap() - 1.0).abs() < 1e-12);
        assert!(v.tp_residual < 1e-14);
    }

    #[test]
    fn negated_kraus_weight_breaks_cp_only() {
        // Φ(ρ) = 2ρ - ZρZ: TP and HP, not CP
        let [i, _, _, z] = paulis();
        let id = natural_from_kraus(&[i]).unwrap();
        let zc = natural_from_kraus(&[z]).unwrap();
        let ch = ChannelRep::linear_combination(&[(2.0, &id), (-1.0, &zc)]).unwrap();
        let v = check_properties(&ch);
        assert!(v.is_hp && v.is_tp && !v.is_cp);
        // Choi = 2|Ω⟩⟨Ω| - |Ω_Z⟩⟨Ω_Z| with ⟨Ω|Ω⟩ = 2
        assert!((v.min_choi_eigenvalue + 2.0).abs() < 1e-12);
        assert!(natural_tp_residual(&ch) < 1e-14);
    }

    #[test]
    fn scaled_identity_is_not_tp() {
        let ch = ChannelRep::from_natural(2, 2, identity(4).scale(0.5)).unwrap();
        let v = check_properties(&ch);
        assert!(!v.is_tp && v.is_cp);
        assert!((v.tp_residual - 0.5).abs() < 1e-12);
        assert!((natural_tp_residual(&ch) - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
