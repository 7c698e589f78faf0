use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrep::channel::ChannelRep;
use crate::matrep::matrix::{c64, ComplexMatrix};
use crate::matrep::state::DensityMatrix;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of i.i.d. standard complex Gaussians (unit variance per entry).
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * s, im * s)
    })
}

/// Haar-distributed isometry `rows × cols` (rows ≥ cols) from a phase-fixed QR.
fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let qr = complex_gaussian(rows, cols, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

/// CPTP map with `rank` Kraus operators cut from a Haar isometry `C^d → C^{rank·d}`.
pub fn random_channel(d: usize, rank: usize, seed: u64) -> Result<ChannelRep> {
    random_channel_rng(d, rank, &mut rng_from_seed(seed))
}

pub fn random_channel_rng<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> Result<ChannelRep> {
    if d < 1 || rank < 1 {
        return Err(Error::ParamOutOfRange(format!(
            "random channel needs d, rank >= 1 (got {d}, {rank})"
        )));
    }
    let v = haar_isometry(rank * d, d, rng);
    let ops = (0..rank).map(|k| v.rows(k * d, d).into_owned()).collect();
    ChannelRep::from_kraus(ops)
}

/// Trace-preserving map `Q J Q⁻¹` with prescribed Jordan-type matrix `J`.
///
/// Column `trace_index` of `Q` is `v(I)/√d` and every other column is traceless,
/// so the map is TP exactly when row `trace_index` of `J` is the unit row
/// `e_{trace_index}ᵀ`. `Q` is a random unitary times a mild perturbation of the
/// traceless columns, which keeps it well conditioned.
pub fn random_tp_similarity<R: Rng + ?Sized>(
    d: usize,
    j: &ComplexMatrix,
    trace_index: usize,
    rng: &mut R,
) -> Result<ChannelRep> {
    let n = d * d;
    if d < 1 || j.shape() != (n, n) || trace_index >= n {
        return Err(Error::ShapeMismatch(format!(
            "need a {n}x{n} matrix and trace index below {n}, got {:?} and {trace_index}",
            j.shape()
        )));
    }
    let off_unit = (0..n)
        .map(|k| (j[(trace_index, k)] - if k == trace_index { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    if off_unit > 1e-12 {
        return Err(Error::ParamOutOfRange(format!(
            "row {trace_index} of J is not a unit row (deviation {off_unit:e})"
        )));
    }
    let mut seed = complex_gaussian(n, n, rng);
    seed.column_mut(0).fill(c64(0.0, 0.0));
    for i in 0..d {
        seed[(i * (d + 1), 0)] = c64(1.0, 0.0);
    }
    let w = seed.qr().q();
    let mut t = ComplexMatrix::identity(n, n);
    if n > 1 {
        let g = complex_gaussian(n - 1, n - 1, rng).scale(0.15);
        let mut corner = t.view_mut((1, 1), (n - 1, n - 1));
        corner += g;
    }
    let mut q = w * t;
    q.swap_columns(0, trace_index);
    let q_inv = q
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedBasis(f64::INFINITY))?;
    ChannelRep::from_superoperator(&q * j * q_inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Normalised complex Gaussian vector.
    PureUniform,
    /// `G G† / Tr(G G†)` with a `d × d` Gaussian `G` (environment dimension `d`).
    MixedTraceInduced,
}

pub fn random_state(d: usize, kind: StateKind, seed: u64) -> Result<DensityMatrix> {
    random_state_rng(d, kind, &mut rng_from_seed(seed))
}

pub fn random_state_rng<R: Rng + ?Sized>(
    d: usize,
    kind: StateKind,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if d < 1 {
        return Err(Error::ParamOutOfRange(
            "state dimension must be positive".into(),
        ));
    }
    let g = complex_gaussian(d, if kind == StateKind::PureUniform { 1 } else { d }, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    let mut rho = rho.unscale(tr);
    // exact Hermiticity regardless of rounding in the product
    rho = (&rho + rho.adjoint()).scale(0.5);
    DensityMatrix::new(rho)
}
