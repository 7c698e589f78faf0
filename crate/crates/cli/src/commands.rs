use std::path::Path;

use qemtk_core::analysis::{
    first_order_report, mismatch_experiment, sufficient_condition, MismatchOutcome,
};
use qemtk_core::circuits::{circuit_from_json, LayeredCircuit};
use qemtk_core::classical::{bsc, invert_distribution, repetition_error_rate, StochasticMatrix};
use qemtk_core::inverses::{
    classify_with, drazin_inverse_with, exact_inverse_with, moore_penrose_with, DrazinBackend,
    DrazinOptions,
};
use qemtk_core::linalg::eigenvalues;
use qemtk_core::matrep::json::{channel_to_json, operator_to_json, parse_real};
use qemtk_core::matrep::{
    check_properties_with, ComplexMatrix, DensityMatrix, FlaggedState, Observable, RepKind,
};
use qemtk_core::noisemodels::{
    depolarizing, fixture, fixture_json, pauli_channel, phase_damping, PauliChannelParams,
};
use qemtk_core::protocols::{
    extrapolate, pauli_conjugations, quasiprob_decompose, quasiprob_estimate, readout_mitigate,
    virtual_distill, ExtrapolationInput, Fit,
};
use qemtk_core::Tolerances;
use serde_json::{json, Value};

use crate::error::{CliError, Context};
use crate::io::{base_dir, emit, load_channel, load_operator, read_json, write_text};
use crate::{
    tolerances, AnalyzeCommand, Backend, ClassicalCommand, Cli, Command, FitArg, InverseKind,
    NoiseCommand, NoiseModel, ProtocolCommand, Rep, SimMode,
};

/// Runs one command and returns its exit code.
pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let tol = tolerances(&cli.tol)?;
    match &cli.command {
        Command::Convert { input, to, out } => {
            let ch = load_channel(input)?;
            let v = channel_to_json(&ch, rep_kind(*to), tol.cp).context(input.display())?;
            emit(&v, out.as_deref())?;
        }
        Command::Check { input, out } => {
            let verdict = check_properties_with(&load_channel(input)?, &tol);
            emit(&to_json(&verdict), out.as_deref())?;
        }
        Command::Invert {
            kind,
            input,
            backend,
            rep,
            out,
        } => emit(&invert(*kind, input, *backend, *rep, &tol)?, out.as_deref())?,
        Command::Noise(NoiseCommand::Make {
            model,
            params,
            rep,
            out,
        }) => emit(&make_noise(*model, params, *rep, &tol)?, out.as_deref())?,
        Command::Simulate {
            circuit,
            mode,
            recovery,
            drazin_fallback,
            out,
        } => {
            let mut c = load_circuit(circuit, &tol)?;
            if *drazin_fallback {
                c = c.with_drazin_fallback(true);
            }
            let v = simulate(&c, *mode, recovery.as_deref())?;
            emit(&v, out.as_deref())?;
        }
        Command::Analyze(cmd) => return analyze(cmd, cli.seed, &tol),
        Command::Protocol(cmd) => protocol(cmd, cli.seed)?,
        Command::Classical(cmd) => classical(cmd, cli.seed)?,
        Command::Reproduce(args) => return crate::reproduce::run(args, cli.seed, &tol),
    }
    Ok(0)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialise")
}

fn rep_kind(rep: Rep) -> RepKind {
    match rep {
        Rep::Choi => RepKind::Choi,
        Rep::Natural => RepKind::Natural,
        Rep::Kraus => RepKind::Kraus,
    }
}

fn complex_list(values: &[num_complex::Complex64]) -> Value {
    values.iter().map(|z| json!([z.re, z.im])).collect()
}

fn invert(
    kind: InverseKind,
    input: &Path,
    backend: Backend,
    rep: Rep,
    tol: &Tolerances,
) -> Result<Value, CliError> {
    let ch = load_channel(input)?;
    let ctx = input.display();
    let mut drazin = Value::Null;
    let result = match kind {
        InverseKind::Exact => exact_inverse_with(&ch, tol).context(&ctx)?,
        InverseKind::Drazin => {
            let backend = match backend {
                Backend::Schur => DrazinBackend::Schur,
                Backend::Spectral => DrazinBackend::Spectral,
                Backend::Both => DrazinBackend::Both,
            };
            let outcome =
                drazin_inverse_with(&ch, &DrazinOptions { backend, tol: *tol }).context(&ctx)?;
            drazin = json!({ "index": outcome.index, "residuals": to_json(&outcome.residuals) });
            outcome.inverse
        }
        InverseKind::Mp => moore_penrose_with(&ch, tol),
    };
    let (class, eigs) = if ch.is_square() {
        let class = classify_with(&ch, tol).context(&ctx)?.class;
        (to_json(&class), complex_list(&eigenvalues(&ch.natural())))
    } else {
        (Value::Null, Value::Null)
    };
    // extra keys leave the output readable as a channel
    let mut out = channel_to_json(&result, rep_kind(rep), tol.cp).context("inverse")?;
    out["verdict"] = to_json(&check_properties_with(&result, tol));
    out["input"] = json!({ "class": class, "eigenvalues": eigs });
    if !drazin.is_null() {
        out["drazin"] = drazin;
    }
    Ok(out)
}

fn numbers(params: &[String], want: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if params.len() != want {
        return Err(CliError::usage(
            "Usage",
            format!("{what} takes {want} parameter(s), got {}", params.len()),
        ));
    }
    params
        .iter()
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::usage("Usage", format!("{what}: {p:?} is not a number")))
        })
        .collect()
}

fn make_noise(
    model: NoiseModel,
    params: &[String],
    rep: Option<Rep>,
    tol: &Tolerances,
) -> Result<Value, CliError> {
    let ch = match model {
        NoiseModel::Pauli => {
            let p = numbers(params, 3, "pauli")?;
            let params = PauliChannelParams::new(p[0], p[1], p[2]).context("pauli")?;
            pauli_channel(params).context("pauli")?
        }
        NoiseModel::Depolarizing => {
            depolarizing(numbers(params, 1, "depolarizing")?[0]).context("depolarizing")?
        }
        NoiseModel::Phasedamping => {
            phase_damping(numbers(params, 1, "phasedamping")?[0]).context("phasedamping")?
        }
        NoiseModel::Fixture => {
            let [name] = params else {
                return Err(CliError::usage("Usage", "fixture takes one name"));
            };
            if rep.is_none() {
                return fixture_json(name).context("fixture");
            }
            fixture(name).context("fixture")?
        }
    };
    channel_to_json(&ch, rep_kind(rep.unwrap_or(Rep::Natural)), tol.cp).context("noise")
}

fn load_circuit(path: &Path, tol: &Tolerances) -> Result<LayeredCircuit, CliError> {
    let v = read_json(path)?;
    let mut c = circuit_from_json(&v, Some(&base_dir(path))).context(path.display())?;
    c.tol = *tol;
    Ok(c)
}

fn state_json(mode: &str, s: &FlaggedState) -> Value {
    json!({
        "mode": mode,
        "state": operator_to_json(&s.matrix),
        "is_valid_state": s.is_valid_state,
        "min_eigenvalue": s.min_eigenvalue,
        "trace": s.matrix.trace().re,
    })
}

fn simulate(c: &LayeredCircuit, mode: SimMode, recovery: Option<&Path>) -> Result<Value, CliError> {
    let flagged = |m: ComplexMatrix| FlaggedState::from_matrix(m, &c.tol);
    let (name, state) = match mode {
        SimMode::Ideal => ("ideal", flagged(c.ideal_output().into_matrix())),
        SimMode::Noisy => ("noisy", flagged(c.noisy_output_matrix())),
        SimMode::Physical => ("physical", c.physical_inverse_output().context("simulate")?),
        SimMode::Numerical => ("numerical", c.em_output().context("simulate")?),
        SimMode::Effective => {
            let path = recovery.ok_or_else(|| {
                CliError::usage("Usage", "--mode effective needs --recovery <channel.json>")
            })?;
            let r = load_channel(path)?;
            (
                "effective",
                c.effective_recovery_output(&r).context(path.display())?,
            )
        }
    };
    Ok(state_json(name, &state))
}

fn load_observables(path: &Path) -> Result<Vec<Observable>, CliError> {
    let v = read_json(path)?;
    let list = v.as_array().ok_or_else(|| {
        CliError::usage(
            "Parse",
            format!("{}: expected a list of operators", path.display()),
        )
    })?;
    list.iter()
        .enumerate()
        .map(|(i, item)| {
            let ctx = format!("{} entry {i}", path.display());
            let m = qemtk_core::matrep::json::operator_from_json(item).context(&ctx)?;
            Observable::new(m).context(&ctx)
        })
        .collect()
}

fn analyze(cmd: &AnalyzeCommand, seed: u64, tol: &Tolerances) -> Result<u8, CliError> {
    match cmd {
        AnalyzeCommand::Bounds {
            circuit,
            observables,
            out,
        } => {
            let c = load_circuit(circuit, tol)?;
            let obs = match observables {
                Some(p) => load_observables(p)?,
                None => Vec::new(),
            };
            let report = first_order_report(&c, &obs).context(circuit.display())?;
            let suff = sufficient_condition(&c, &obs).context(circuit.display())?;
            let v = json!({
                "report": to_json(&report),
                "sandwich_holds": report.sandwich_holds(1e-9),
                "layerwise_dominates": report.layerwise_dominates(),
                "sufficient_condition": to_json(&suff),
            });
            emit(&v, out.as_deref())?;
        }
        AnalyzeCommand::Mismatch {
            p1,
            p2,
            p3,
            states,
            out,
        } => {
            let p = PauliChannelParams::new(*p1, *p2, *p3).context("mismatch")?;
            let outcome = mismatch_experiment(&p, *states, seed).context("mismatch")?;
            match (&outcome, out) {
                (MismatchOutcome::Table { .. }, None) => write_text(&outcome.to_csv(), None)?,
                (
                    MismatchOutcome::Table {
                        lambda_max,
                        recovered_eigenvalues,
                        rows,
                    },
                    Some(path),
                ) => {
                    write_text(&outcome.to_csv(), Some(path))?;
                    emit(
                        &json!({
                            "outcome": "table",
                            "lambda_max": lambda_max,
                            "recovered_eigenvalues": complex_list(recovered_eigenvalues),
                            "states": rows.len(),
                            "csv": path.display().to_string(),
                        }),
                        None,
                    )?;
                }
                (MismatchOutcome::EstimateNotInvertible { .. }, _) => {
                    emit(&to_json(&outcome), None)?
                }
            }
        }
    }
    Ok(0)
}

fn protocol(cmd: &ProtocolCommand, seed: u64) -> Result<(), CliError> {
    match cmd {
        ProtocolCommand::Richardson {
            scales,
            values,
            fit,
            out,
        } => {
            let input = ExtrapolationInput::new(scales.clone(), values.clone())
                .context("extrapolation input")?;
            let fit = match fit {
                FitArg::Richardson => Fit::Richardson,
                FitArg::Linear => Fit::Linear,
                FitArg::Exp => Fit::Exp,
            };
            let r = extrapolate(&input, fit).context("extrapolation")?;
            let v = json!({ "fit": to_json(&fit), "value": r.value, "weights": r.weights });
            emit(&v, out.as_deref())
        }
        ProtocolCommand::Quasiprob {
            target,
            basis,
            expectations,
            samples,
            out,
        } => {
            let t = load_channel(target)?;
            let basis = if basis.is_empty() {
                pauli_conjugations()
            } else {
                basis
                    .iter()
                    .map(|p| load_channel(p))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let dec = quasiprob_decompose(&t, &basis).context(target.display())?;
            let mut v = json!({
                "coefficients": dec.coefficients,
                "tau": dec.tau,
                "residual": dec.residual,
                "probabilities": dec.probabilities(),
            });
            if !expectations.is_empty() {
                let est =
                    quasiprob_estimate(&dec, expectations, *samples, seed).context("estimate")?;
                v["estimate"] = to_json(&est);
            }
            emit(&v, out.as_deref())
        }
        ProtocolCommand::Readout {
            matrix,
            probs,
            project,
            out,
        } => {
            let t = load_stochastic(matrix)?;
            let r = readout_mitigate(&t, probs, *project).context("readout")?;
            emit(&to_json(&r), out.as_deref())
        }
        ProtocolCommand::Vd { state, copies, out } => {
            let rho = DensityMatrix::new(load_operator(state)?).context(state.display())?;
            let distilled = virtual_distill(&rho, *copies).context("virtual distillation")?;
            let v = json!({
                "copies": copies,
                "purity_in": rho.purity(),
                "purity_out": distilled.purity(),
                "state": operator_to_json(distilled.matrix()),
            });
            emit(&v, out.as_deref())
        }
    }
}

/// Column-stochastic matrix from a JSON list of rows.
fn load_stochastic(path: &Path) -> Result<StochasticMatrix, CliError> {
    let v = read_json(path)?;
    let bad = || {
        CliError::usage(
            "Parse",
            format!("{}: expected a list of rows", path.display()),
        )
    };
    let rows = v.as_array().ok_or_else(bad)?;
    let mut flat = Vec::new();
    for row in rows {
        for x in row.as_array().ok_or_else(bad)? {
            flat.push(parse_real(x).context(path.display())?);
        }
    }
    StochasticMatrix::from_rows(rows.len(), &flat).context(path.display())
}

/// Independent bit flips on `bits` bits, with bit 0 the most significant.
pub fn bsc_power(p: f64, bits: u32) -> qemtk_core::Result<StochasticMatrix> {
    let one = bsc(p)?;
    let m = one.matrix();
    let k = 1usize << bits;
    let mut rows = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            rows.push((0..bits).map(|b| m[((i >> b) & 1, (j >> b) & 1)]).product());
        }
    }
    StochasticMatrix::from_rows(k, &rows)
}

fn matrix_rows(m: &StochasticMatrix) -> Value {
    let m = m.matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())
        .collect()
}

fn classical(cmd: &ClassicalCommand, seed: u64) -> Result<(), CliError> {
    match cmd {
        ClassicalCommand::Bsc { p, probs, out } => {
            let m = bsc(*p).context("bsc")?;
            let mut v = json!({ "p": p, "matrix": matrix_rows(&m) });
            if !probs.is_empty() {
                v["output"] = json!(m.apply(probs).context("bsc")?);
            }
            emit(&v, out.as_deref())
        }
        ClassicalCommand::Repetition { p, trials, out } => {
            let r = repetition_error_rate(*p, *trials, seed).context("repetition")?;
            emit(&to_json(&r), out.as_deref())
        }
        ClassicalCommand::Invert { p, observed, out } => {
            let bits = observed.len().trailing_zeros();
            if observed.len() < 2 || !observed.len().is_power_of_two() {
                return Err(CliError::usage(
                    "Usage",
                    format!("--observed needs 2^k entries, got {}", observed.len()),
                ));
            }
            let n = bsc_power(*p, bits).context("invert")?;
            let q = invert_distribution(&n, observed).context("invert")?;
            let mut v = to_json(&q);
            v["bits"] = json!(bits);
            emit(&v, out.as_deref())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_power_factorises() {
        let two = bsc_power(0.1, 2).unwrap();
        let m = two.matrix();
        // 00 -> 11 needs two flips, 00 -> 01 one
        assert!((m[(3, 0)] - 0.01).abs() < 1e-15);
        assert!((m[(1, 0)] - 0.09).abs() < 1e-15);
        assert!((m[(0, 0)] - 0.81).abs() < 1e-15);
        for j in 0..4 {
            assert!(((0..4).map(|i| m[(i, j)]).sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
