//! Random trace-preserving maps shared by the integration tests.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qemtk_core::inverses::jordan_block;
use qemtk_core::matrep::matrix::{basis_matrix, c64};
use qemtk_core::matrep::{ChannelRep, ComplexMatrix};
use qemtk_core::noisemodels::{random_channel_rng, random_tp_similarity};

fn ok<T>(r: qemtk_core::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

pub fn random_eigenvalue(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(
        rng.random_range(0.1..0.95),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `Q J Q⁻¹` with the trace functional as a left eigenvector of eigenvalue 1.
/// With `defective_one` the unit eigenvalue sits in a 2×2 Jordan block whose
/// last chain vector carries the trace.
pub fn structured_tp_map(
    d: usize,
    defective_one: bool,
    rng: &mut ChaCha8Rng,
) -> Result<ChannelRep, String> {
    let n = d * d;
    let (lead, c) = if defective_one {
        (jordan_block(c64(1.0, 0.0), 2), 1)
    } else {
        (jordan_block(c64(1.0, 0.0), 1), 0)
    };
    let mut blocks = vec![lead, jordan_block(c64(0.0, 0.0), 2)];
    let used: usize = blocks.iter().map(|b| b.nrows()).sum();
    for _ in used..n {
        let lambda = if rng.random_bool(0.2) {
            c64(0.0, 0.0)
        } else {
            random_eigenvalue(rng)
        };
        blocks.push(jordan_block(lambda, 1));
    }
    ok(
        random_tp_similarity(d, &block_diag(&blocks), c, rng),
        "similarity",
    )
}

/// Rank-deficient TP projector `Q diag(1, 1|0, ...) Q⁻¹`.
pub fn tp_projector(d: usize, rng: &mut ChaCha8Rng) -> Result<ChannelRep, String> {
    let n = d * d;
    let mut diag = vec![c64(1.0, 0.0)];
    diag.extend((1..n).map(|k| {
        if k == 1 || rng.random_bool(0.5) {
            c64(0.0, 0.0)
        } else {
            c64(1.0, 0.0)
        }
    }));
    let p = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
    ok(random_tp_similarity(d, &p, 0, rng), "similarity")
}

pub fn dephasing(d: usize) -> ChannelRep {
    ChannelRep::from_kraus((0..d).map(|i| basis_matrix(d, d, i, i)).collect())
        .expect("projective Kraus set")
}

pub fn random_tp_map(trial: usize, rng: &mut ChaCha8Rng) -> Result<ChannelRep, String> {
    let d = rng.random_range(2..=3);
    let mut rank = || rng.random_range(1..=d * d);
    match trial % 6 {
        0 => ok(random_channel_rng(d, rank(), rng), "random channel"),
        1 => {
            let (r1, r2) = (rank(), rank());
            let a = ok(random_channel_rng(d, r1, rng), "random channel")?;
            let b = ok(random_channel_rng(d, r2, rng), "random channel")?;
            let w = rng.random_range(0.0..1.0);
            ok(
                ChannelRep::linear_combination(&[(w, &a), (1.0 - w, &b)]),
                "mixture",
            )
        }
        2 => {
            let r = rank();
            let a = ok(random_channel_rng(d, r, rng), "random channel")?;
            ok(dephasing(d).then(&a), "composition")
        }
        3 => structured_tp_map(d, false, rng),
        4 => structured_tp_map(d, true, rng),
        _ => {
            let r = rank();
            let a = ok(random_channel_rng(d, r, rng), "random channel")?;
            ok(tp_projector(d, rng)?.then(&a), "composition")
        }
    }
}
