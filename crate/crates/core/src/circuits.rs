//! Layered noisy circuits `ρ_out = 𝓝_n∘𝓤_n∘⋯∘𝓝_1∘𝓤_1(ρ_in)` and the
//! outputs of the mitigation strategies built on them.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::inverses::{drazin_inverse, exact_inverse};
use crate::matrep::channel::ChannelRep;
use crate::matrep::json::{channel_from_json, operator_from_json};
use crate::matrep::matrix::{identity, unitarity_residual, unvectorize, vectorize, ComplexMatrix};
use crate::matrep::properties::check_properties;
use crate::matrep::state::{DensityMatrix, FlaggedState};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct CircuitLayer {
    pub ideal: ChannelRep,
    pub true_noise: ChannelRep,
    pub estimated_noise: ChannelRep,
}

impl CircuitLayer {
    pub fn new(
        ideal: ChannelRep,
        true_noise: ChannelRep,
        estimated_noise: ChannelRep,
    ) -> Result<Self> {
        let d = ideal.dim_in();
        for ch in [&ideal, &true_noise, &estimated_noise] {
            if ch.dim_in() != d || ch.dim_out() != d {
                return Err(Error::DimensionMismatch {
                    dim_in: ch.dim_in(),
                    dim_out: ch.dim_out(),
                });
            }
        }
        // a CPTP map with a unitary natural form is a unitary conjugation
        let res = unitarity_residual(&ideal.natural());
        if res > 1e-9 || !check_properties(&ideal).is_cptp() {
            return Err(Error::NonUnitaryInput(res));
        }
        Ok(Self {
            ideal,
            true_noise,
            estimated_noise,
        })
    }

    /// Layer whose ideal gate is conjugation by `u`.
    pub fn from_unitary(
        u: ComplexMatrix,
        true_noise: ChannelRep,
        estimated_noise: ChannelRep,
    ) -> Result<Self> {
        Self::new(ChannelRep::unitary(u)?, true_noise, estimated_noise)
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim_in()
    }
}

/// Which noise a reversal channel inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Ideal,
    Estimated,
}

#[derive(Debug, Clone)]
pub struct LayeredCircuit {
    layers: Vec<CircuitLayer>,
    input: DensityMatrix,
    /// Substitute Drazin inverses for non-invertible noises instead of erroring.
    pub drazin_fallback: bool,
    pub tol: Tolerances,
}

fn apply_natural(m: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.nrows();
    unvectorize(&(m * vectorize(rho)), d, d).expect("square natural form")
}

impl LayeredCircuit {
    pub fn new(layers: Vec<CircuitLayer>, input: DensityMatrix) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ShapeMismatch(
                "circuit needs at least one layer".into(),
            ));
        }
        let d = input.dim();
        if let Some(l) = layers.iter().find(|l| l.dim() != d) {
            return Err(Error::DimensionMismatch {
                dim_in: l.dim(),
                dim_out: d,
            });
        }
        Ok(Self {
            layers,
            input,
            drazin_fallback: false,
            tol: Tolerances::default(),
        })
    }

    pub fn with_drazin_fallback(mut self, on: bool) -> Self {
        self.drazin_fallback = on;
        self
    }

    pub fn layers(&self) -> &[CircuitLayer] {
        &self.layers
    }

    pub fn input(&self) -> &DensityMatrix {
        &self.input
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    /// Natural form of `𝓤_n∘⋯∘𝓤_1`.
    pub fn ideal_unitary(&self) -> ComplexMatrix {
        self.layers
            .iter()
            .fold(identity(self.dim() * self.dim()), |acc, l| {
                l.ideal.natural() * acc
            })
    }

    /// Natural form of `𝓝_n∘𝓤_n∘⋯∘𝓝_1∘𝓤_1`.
    pub fn noisy_composite(&self) -> ComplexMatrix {
        self.layers
            .iter()
            .fold(identity(self.dim() * self.dim()), |acc, l| {
                l.true_noise.natural() * l.ideal.natural() * acc
            })
    }

    fn state(&self, m: ComplexMatrix) -> DensityMatrix {
        DensityMatrix::new_with(m, &self.tol).expect("composition of CPTP maps yields a state")
    }

    pub fn ideal_output(&self) -> DensityMatrix {
        let mut rho = self.input.matrix().clone();
        for l in &self.layers {
            rho = apply_natural(&l.ideal.natural(), &rho);
        }
        self.state(rho)
    }

    /// Experimental output; a valid state when every true noise is CPTP.
    pub fn noisy_output(&self) -> DensityMatrix {
        self.state(self.noisy_output_matrix())
    }

    pub fn noisy_output_matrix(&self) -> ComplexMatrix {
        let mut rho = self.input.matrix().clone();
        for l in &self.layers {
            rho = apply_natural(&l.ideal.natural(), &rho);
            rho = apply_natural(&l.true_noise.natural(), &rho);
        }
        rho
    }

    fn invert(&self, ch: &ChannelRep, layer: usize, which: Which) -> Result<ComplexMatrix> {
        match exact_inverse(ch) {
            Ok(inv) => Ok(inv.natural()),
            Err(Error::NonInvertibleChannel(_)) if self.drazin_fallback => {
                Ok(drazin_inverse(ch)?.natural())
            }
            Err(Error::NonInvertibleChannel(_)) => Err(match which {
                Which::Ideal => Error::NonInvertibleNoise { layer },
                Which::Estimated => Error::NonInvertibleEstimate { layer },
            }),
            Err(e) => Err(e),
        }
    }

    /// Natural forms of `𝓝_i⁻¹` (or `𝓝̃_i⁻¹`) for every layer, in layer order.
    pub fn noise_inverses(&self, which: Which) -> Result<Vec<ComplexMatrix>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let ch = match which {
                    Which::Ideal => &l.true_noise,
                    Which::Estimated => &l.estimated_noise,
                };
                self.invert(ch, i + 1, which)
            })
            .collect()
    }

    /// Physically inserted inverses: `𝓝̃_i⁻¹` applied after every noisy layer.
    pub fn physical_inverse_output(&self) -> Result<FlaggedState> {
        let inverses = self.noise_inverses(Which::Estimated)?;
        let mut rho = self.input.matrix().clone();
        for (l, inv) in self.layers.iter().zip(&inverses) {
            rho = apply_natural(&(inv * l.true_noise.natural() * l.ideal.natural()), &rho);
        }
        Ok(FlaggedState::from_matrix(rho, &self.tol))
    }

    /// `𝓡 = 𝓤_1†∘𝓝_1⁻¹∘⋯∘𝓤_n†∘𝓝_n⁻¹` in natural form.
    pub fn reversal_matrix(&self, which: Which) -> Result<ComplexMatrix> {
        let inverses = self.noise_inverses(which)?;
        Ok(reversal_from_parts(&self.layers, &inverses))
    }

    pub fn reversal(&self, which: Which) -> Result<ChannelRep> {
        let d = self.dim();
        ChannelRep::from_natural(d, d, self.reversal_matrix(which)?)
    }

    /// `ρ_EM = 𝓤_{n⋯1}∘𝓡̃(ρ_out^exp)`.
    pub fn em_output(&self) -> Result<FlaggedState> {
        let r = self.reversal_matrix(Which::Estimated)?;
        let recovered = apply_natural(&r, &self.noisy_output_matrix());
        Ok(FlaggedState::from_matrix(
            apply_natural(&self.ideal_unitary(), &recovered),
            &self.tol,
        ))
    }

    /// `𝓡̃(ρ_out^exp)`, the estimate of the input state.
    pub fn recovered_input(&self) -> Result<ComplexMatrix> {
        let r = self.reversal_matrix(Which::Estimated)?;
        Ok(apply_natural(&r, &self.noisy_output_matrix()))
    }

    /// A single recovery map applied to the experimental output.
    pub fn effective_recovery_output(&self, n_eff_inv: &ChannelRep) -> Result<FlaggedState> {
        if n_eff_inv.dim_in() != self.dim() || n_eff_inv.dim_out() != self.dim() {
            return Err(Error::DimensionMismatch {
                dim_in: n_eff_inv.dim_in(),
                dim_out: n_eff_inv.dim_out(),
            });
        }
        Ok(FlaggedState::from_matrix(
            apply_natural(&n_eff_inv.natural(), &self.noisy_output_matrix()),
            &self.tol,
        ))
    }
}

/// `v(𝓤_1†) v(X_1) ⋯ v(𝓤_n†) v(X_n)` for per-layer factors `X_i`.
pub fn reversal_from_parts(layers: &[CircuitLayer], factors: &[ComplexMatrix]) -> ComplexMatrix {
    let n = layers[0].ideal.natural().nrows();
    let mut acc = identity(n);
    for (l, x) in layers.iter().zip(factors) {
        acc = acc * l.ideal.natural().adjoint() * x;
    }
    acc
}

fn resolve<'a>(
    v: &'a Value,
    base: Option<&Path>,
    owned: &'a mut Option<Value>,
) -> Result<&'a Value> {
    match v {
        Value::String(path) => {
            let full = match base {
                Some(b) => b.join(path),
                None => Path::new(path).to_path_buf(),
            };
            let text = std::fs::read_to_string(&full)
                .map_err(|e| Error::Parse(format!("{}: {e}", full.display())))?;
            let parsed = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", full.display())))?;
            Ok(owned.insert(parsed))
        }
        other => Ok(other),
    }
}

/// Parses `{"input": state, "layers": [{"ideal", "true_noise", "estimated_noise"}]}`;
/// each entry is inline JSON or a path relative to `base`.
pub fn circuit_from_json(v: &Value, base: Option<&Path>) -> Result<LayeredCircuit> {
    let mut slot = None;
    let input = v
        .get("input")
        .ok_or_else(|| Error::Parse("circuit: missing \"input\"".into()))?;
    let input = DensityMatrix::new(operator_from_json(resolve(input, base, &mut slot)?)?)?;
    let layers = v
        .get("layers")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("circuit: missing \"layers\" list".into()))?;
    let mut out = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        let get = |key: &str| -> Result<ChannelRep> {
            let entry = layer
                .get(key)
                .ok_or_else(|| Error::Parse(format!("layer {}: missing {key:?}", i + 1)))?;
            let mut slot = None;
            channel_from_json(resolve(entry, base, &mut slot)?)
                .map_err(|e| Error::Parse(format!("layer {} {key}: {e}", i + 1)))
        };
        out.push(CircuitLayer::new(
            get("ideal")?,
            get("true_noise")?,
            get("estimated_noise")?,
        )?);
    }
    let drazin = v
        .get("drazin_fallback")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    Ok(LayeredCircuit::new(out, input)?.with_drazin_fallback(drazin))
}
