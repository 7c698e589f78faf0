use crate::circuits::{reversal_from_parts, LayeredCircuit, Which};
use crate::error::Result;
use crate::matrep::matrix::{frobenius_norm, ComplexMatrix};

/// Estimation errors of one circuit, all as natural forms.
#[derive(Debug, Clone)]
pub struct DeltaReport {
    /// `Δ𝓝_i⁻¹ = 𝓝̃_i⁻¹ - 𝓝_i⁻¹`.
    pub delta_inverses: Vec<ComplexMatrix>,
    /// `Δ𝓝_i = 𝓝̃_i - 𝓝_i`.
    pub deltas: Vec<ComplexMatrix>,
    pub true_inverses: Vec<ComplexMatrix>,
    pub estimated_inverses: Vec<ComplexMatrix>,
    /// `||Δ𝓝_i 𝓝̃_i⁻¹ + 𝓝_i Δ𝓝_i⁻¹||_F`, zero up to rounding.
    pub consistency_residuals: Vec<f64>,
    /// `Δ𝓝 = 𝓡̃ - 𝓡`.
    pub total: ComplexMatrix,
    /// First-order part: one `Δ𝓝_i⁻¹` per term, every other factor kept as `𝓝̃_j⁻¹`.
    pub first_order: ComplexMatrix,
}

pub fn delta_report(c: &LayeredCircuit) -> Result<DeltaReport> {
    let exact = c.clone().with_drazin_fallback(false);
    let true_inverses = exact.noise_inverses(Which::Ideal)?;
    let estimated_inverses = exact.noise_inverses(Which::Estimated)?;
    let layers = c.layers();
    let mut delta_inverses = Vec::with_capacity(layers.len());
    let mut deltas = Vec::with_capacity(layers.len());
    let mut consistency_residuals = Vec::with_capacity(layers.len());
    for (i, l) in layers.iter().enumerate() {
        let dinv = &estimated_inverses[i] - &true_inverses[i];
        let n = l.true_noise.natural();
        let d = l.estimated_noise.natural() - &n;
        consistency_residuals.push(frobenius_norm(&(&d * &estimated_inverses[i] + &n * &dinv)));
        delta_inverses.push(dinv);
        deltas.push(d);
    }
    let total = reversal_from_parts(layers, &estimated_inverses)
        - reversal_from_parts(layers, &true_inverses);
    let mut first_order = ComplexMatrix::zeros(total.nrows(), total.ncols());
    for i in 0..layers.len() {
        let mut factors = estimated_inverses.clone();
        factors[i] = delta_inverses[i].clone();
        first_order += reversal_from_parts(layers, &factors);
    }
    Ok(DeltaReport {
        delta_inverses,
        deltas,
        true_inverses,
        estimated_inverses,
        consistency_residuals,
        total,
        first_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ensembles::perturbed_circuit;
    use crate::circuits::CircuitLayer;
    use crate::matrep::matrix::max_abs_diff;
    use crate::noisemodels::rng_from_seed;

    #[test]
    fn perfect_estimates_give_zero_deltas() {
        let mut rng = rng_from_seed(3);
        let c = perturbed_circuit(2, 2, 0.0, &mut rng).unwrap();
        let r = delta_report(&c).unwrap();
        assert!(frobenius_norm(&r.total) < 1e-12 && frobenius_norm(&r.first_order) < 1e-12);
        assert!(r.deltas.iter().all(|d| frobenius_norm(d) == 0.0));
    }

    #[test]
    fn single_layer_first_order_is_exact() {
        let mut rng = rng_from_seed(4);
        let c = perturbed_circuit(1, 2, 0.05, &mut rng).unwrap();
        let r = delta_report(&c).unwrap();
        let l: &CircuitLayer = &c.layers()[0];
        let expected = l.ideal.natural().adjoint() * &r.delta_inverses[0];
        assert!(max_abs_diff(&r.first_order, &expected) < 1e-13);
        assert!(max_abs_diff(&r.total, &expected) < 1e-13);
        assert!(r.consistency_residuals[0] < 1e-9);
    }

    #[test]
    fn second_order_residual_scales_quadratically() {
        let residual = |eps: f64| {
            let mut rng = rng_from_seed(21);
            let c = perturbed_circuit(2, 2, eps, &mut rng).unwrap();
            let r = delta_report(&c).unwrap();
            frobenius_norm(&(&r.total - &r.first_order))
        };
        let ratio = residual(2e-3) / residual(1e-3);
        assert!(ratio > 4.0 / 1.5 && ratio < 4.0 * 1.5, "ratio {ratio}");
    }
}
