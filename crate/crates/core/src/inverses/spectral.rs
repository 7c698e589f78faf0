//! Numerical Jordan decomposition `M = Q J Q⁻¹`.
//!
//! The Schur form is reordered so that each eigenvalue cluster is contiguous,
//! block-diagonalised with triangular Sylvester solves, and each cluster block
//! is split into Jordan chains from the rank sequence of `(B - λ̄ I)^j`.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, solve_triangular_sylvester, SchurForm};
use crate::matrep::matrix::{frobenius_norm, numerical_rank, singular_values, ComplexMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JordanBlock {
    pub eigenvalue: Complex64,
    pub size: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Columns are (generalised) eigenvectors, grouped block by block.
    pub basis: ComplexMatrix,
    pub basis_inverse: ComplexMatrix,
    pub blocks: Vec<JordanBlock>,
    /// Largest Jordan block of the zero cluster, 0 if there is none.
    pub zero_index: usize,
    pub condition_number: f64,
    /// `||Q J Q⁻¹ - M||_F / max(||M||_F, 1)`.
    pub reconstruction_residual: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Block-diagonal Jordan matrix assembled from `blocks`.
    pub fn jordan_matrix(&self) -> ComplexMatrix {
        self.block_matrix(|b| jordan_block(b.eigenvalue, b.size))
    }

    /// Assembles a block-diagonal matrix from one square block per Jordan block.
    pub fn block_matrix(&self, f: impl Fn(&JordanBlock) -> ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut at = 0;
        for b in &self.blocks {
            out.view_mut((at, at), (b.size, b.size)).copy_from(&f(b));
            at += b.size;
        }
        out
    }

    /// Column ranges of the basis belonging to each block.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut at = 0;
        self.blocks
            .iter()
            .map(|b| {
                at += b.size;
                at - b.size..at
            })
            .collect()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.eigenvalue, b.size))
            .collect()
    }
}

/// `λ I + superdiagonal ones`.
pub fn jordan_block(lambda: Complex64, size: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(size, size, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn spectral_decompose(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    spectral_decompose_with(m, &Tolerances::default())
}

pub fn spectral_decompose_with(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "spectral decomposition of {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let mut schur = SchurForm::new(m);
    let values = schur.eigenvalues();
    let mut clusters = cluster_eigenvalues(&values, tol.cluster)?;
    for c in &mut clusters {
        if c.center.norm() <= tol.zero {
            c.center = Complex64::new(0.0, 0.0);
        }
    }
    // nonzero clusters first (in order of appearance), zero cluster last
    clusters.sort_by_key(|c| c.center.norm() == 0.0);
    let mut cluster_of = vec![0usize; n];
    for (k, c) in clusters.iter().enumerate() {
        for &i in &c.members {
            cluster_of[i] = k;
        }
    }
    schur.reorder_by(|i| cluster_of[i]);

    // block-diagonalise the reordered triangular factor: T = Y B Y⁻¹
    let mut t = schur.triangular.clone();
    let mut y = ComplexMatrix::identity(n, n);
    let mut offsets = Vec::with_capacity(clusters.len() + 1);
    let mut at = 0;
    for c in &clusters {
        offsets.push(at);
        at += c.members.len();
    }
    offsets.push(n);
    for k in 0..clusters.len().saturating_sub(1) {
        let (s, e) = (offsets[k], offsets[k + 1]);
        let a = t.view((s, s), (e - s, e - s)).into_owned();
        let b = t.view((e, e), (n - e, n - e)).into_owned();
        let c = t.view((s, e), (e - s, n - e)).into_owned();
        let x = solve_triangular_sylvester(&a, &b, &(-c));
        t.view_mut((s, e), (e - s, n - e))
            .fill(Complex64::new(0.0, 0.0));
        let update = y.columns(s, e - s) * &x;
        let mut tail = y.columns_mut(e, n - e);
        tail += update;
    }

    // Jordan chains per cluster, in block coordinates
    let mut chains = ComplexMatrix::zeros(n, n);
    let mut blocks = Vec::new();
    let mut col = 0;
    for (k, c) in clusters.iter().enumerate() {
        let (s, e) = (offsets[k], offsets[k + 1]);
        let bc = t.view((s, s), (e - s, e - s)).into_owned();
        for (vectors, size) in cluster_chains(&bc, c.center, tol)? {
            for v in vectors {
                chains.view_mut((s, col), (e - s, 1)).copy_from(&v);
                col += 1;
            }
            blocks.push(JordanBlock {
                eigenvalue: c.center,
                size,
            });
        }
    }
    debug_assert_eq!(col, n);

    let basis = &schur.unitary * y * chains;
    let sv = singular_values(&basis);
    let smin = sv.last().copied().unwrap_or(1.0);
    let condition_number = if n == 0 {
        1.0
    } else if smin == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / smin
    };
    if condition_number > tol.cond_max {
        return Err(Error::IllConditionedBasis(condition_number));
    }
    let basis_inverse = basis
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditionedBasis(f64::INFINITY))?;
    let zero_index = blocks
        .iter()
        .filter(|b| b.eigenvalue.norm() == 0.0)
        .map(|b| b.size)
        .max()
        .unwrap_or(0);
    let mut dec = SpectralDecomposition {
        basis,
        basis_inverse,
        blocks,
        zero_index,
        condition_number,
        reconstruction_residual: 0.0,
    };
    let rebuilt = &dec.basis * dec.jordan_matrix() * &dec.basis_inverse;
    dec.reconstruction_residual = frobenius_norm(&(rebuilt - m)) / frobenius_norm(m).max(1.0);
    if dec.reconstruction_residual > tol.jordan {
        return Err(Error::JordanReconstruction(dec.reconstruction_residual));
    }
    Ok(dec)
}

/// Jordan chains `[N^{j-1} v, …, N v, v]` of one cluster block, longest first.
fn cluster_chains(
    block: &ComplexMatrix,
    center: Complex64,
    tol: &Tolerances,
) -> Result<Vec<(Vec<ComplexMatrix>, usize)>> {
    let m = block.nrows();
    let nmat = block - ComplexMatrix::identity(m, m) * center;
    // ranks[j] = rank(N^j)
    let mut powers = vec![ComplexMatrix::identity(m, m)];
    let mut ranks = vec![m];
    while *ranks.last().unwrap() > 0 && ranks.len() <= m {
        let next = &nmat * powers.last().unwrap();
        let r = numerical_rank(&next, tol.rank);
        let stalled = r == *ranks.last().unwrap();
        powers.push(next);
        ranks.push(r);
        if stalled {
            break;
        }
    }
    if *ranks.last().unwrap() != 0 {
        // the cluster block is not nilpotent after the shift
        return Err(Error::JordanReconstruction(frobenius_norm(
            powers.last().unwrap(),
        )));
    }
    let p = ranks.len() - 1;
    let count_at_least = |j: usize| ranks[j - 1] - ranks[j];
    let kernels: Vec<ComplexMatrix> = (0..=p)
        .map(|j| kernel_basis(&powers[j], m - ranks[j]))
        .collect();

    let mut out: Vec<(Vec<ComplexMatrix>, usize)> = Vec::new();
    for j in (1..=p).rev() {
        let longer = if j < p { count_at_least(j + 1) } else { 0 };
        let new = count_at_least(j) - longer;
        if new == 0 {
            continue;
        }
        // vectors already reaching level j from longer chains
        let existing: Vec<ComplexMatrix> =
            out.iter().map(|(chain, _)| chain[j - 1].clone()).collect();
        let kj = &kernels[j];
        let p_perp = complement_projector(&kernels[j - 1], m);
        let mut b = &p_perp * kj;
        if !existing.is_empty() {
            let z = &p_perp
                * ComplexMatrix::from_columns(
                    &existing
                        .iter()
                        .map(|v| v.column(0).into_owned())
                        .collect::<Vec<_>>(),
                );
            let q = orthonormal_columns(&z);
            b -= &q * (q.adjoint() * &b);
        }
        let svd = SVD::new(b, false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let order = descending_order(&svd.singular_values.iter().copied().collect::<Vec<_>>());
        for &idx in order.iter().take(new) {
            let coeff = v_t.row(idx).adjoint();
            let top = ComplexMatrix::from_column_slice(m, 1, (kj * coeff).as_slice());
            let mut chain = vec![ComplexMatrix::zeros(m, 1); j];
            chain[j - 1] = top;
            for i in (0..j - 1).rev() {
                chain[i] = &nmat * &chain[i + 1];
            }
            out.push((chain, j));
        }
    }
    Ok(out)
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

/// Orthonormal basis (as columns) of the `dim`-dimensional numerical kernel.
fn kernel_basis(a: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    let m = a.ncols();
    if dim == 0 {
        return ComplexMatrix::zeros(m, 0);
    }
    if dim == m {
        return ComplexMatrix::identity(m, m);
    }
    // pad to square so SVD returns a full set of right singular vectors
    let mut sq = ComplexMatrix::zeros(m.max(a.nrows()), m);
    sq.view_mut((0, 0), (a.nrows(), m)).copy_from(a);
    let svd = SVD::new(sq, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let order = descending_order(&svd.singular_values.iter().copied().collect::<Vec<_>>());
    let cols: Vec<_> = order[m - dim..]
        .iter()
        .map(|&i| v_t.row(i).adjoint())
        .collect();
    ComplexMatrix::from_columns(&cols)
}

fn complement_projector(basis: &ComplexMatrix, m: usize) -> ComplexMatrix {
    ComplexMatrix::identity(m, m) - basis * basis.adjoint()
}

/// Orthonormal basis of the column span of `z` (numerical rank at 1e-12).
fn orthonormal_columns(z: &ComplexMatrix) -> ComplexMatrix {
    let svd = SVD::new(z.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-12 * smax.max(1e-300))
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        ComplexMatrix::zeros(z.nrows(), 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::matrix::{c64, from_real_rows, max_abs_diff, real};

    fn sorted_re(v: &[Complex64]) -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        r
    }

    #[test]
    fn nilpotent_two_block() {
        let m = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0], 1.0);
        let d = spectral_decompose(&m).unwrap();
        assert_eq!(
            d.blocks,
            vec![JordanBlock {
                eigenvalue: real(0.0),
                size: 2
            }]
        );
        assert_eq!(d.zero_index, 2);
    }

    #[test]
    fn diagonalizable_repeated_eigenvalue() {
        let m = from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5], 1.0);
        let d = spectral_decompose(&m).unwrap();
        assert_eq!(d.blocks.len(), 3);
        assert!(d.blocks.iter().all(|b| b.size == 1));
        assert_eq!(sorted_re(&d.eigenvalues()), vec![0.5, 1.0, 1.0]);
        assert_eq!(d.zero_index, 0);
    }

    #[test]
    fn hidden_jordan_structure_is_recovered() {
        // S J S⁻¹ with J = J_2(0.5) ⊕ J_1(0.5) ⊕ J_2(0) ⊕ [2i]
        let mut j = ComplexMatrix::zeros(6, 6);
        j.view_mut((0, 0), (2, 2))
            .copy_from(&jordan_block(real(0.5), 2));
        j[(2, 2)] = real(0.5);
        j.view_mut((3, 3), (2, 2))
            .copy_from(&jordan_block(real(0.0), 2));
        j[(5, 5)] = c64(0.0, 2.0);
        let s = ComplexMatrix::from_fn(6, 6, |a, b| {
            let x = (a * 6 + b) as f64;
            c64((x * 0.37).sin(), (x * 0.11).cos() * 0.3)
                + if a == b { real(2.0) } else { real(0.0) }
        });
        let m = &s * &j * s.clone().try_inverse().unwrap();
        let d = spectral_decompose(&m).unwrap();
        let mut sizes: Vec<(i64, usize)> = d
            .blocks
            .iter()
            .map(|b| {
                (
                    (b.eigenvalue.re * 10.0).round() as i64
                        + (b.eigenvalue.im * 100.0).round() as i64,
                    b.size,
                )
            })
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![(0, 2), (5, 1), (5, 2), (200, 1)]);
        assert_eq!(d.zero_index, 2);
        let rebuilt = &d.basis * d.jordan_matrix() * &d.basis_inverse;
        assert!(max_abs_diff(&rebuilt, &m) < 1e-8);
    }

    #[test]
    fn exact_triangular_three_block() {
        let m = jordan_block(real(0.0), 3);
        let d = spectral_decompose(&m).unwrap();
        assert_eq!(
            d.blocks,
            vec![JordanBlock {
                eigenvalue: real(0.0),
                size: 3
            }]
        );
        assert_eq!(d.zero_index, 3);
    }

    fn column_trace(basis: &ComplexMatrix, j: usize, d: usize) -> f64 {
        let col = basis.column(j).into_owned();
        crate::matrep::matrix::vec_trace(&col, d).unwrap().norm() / col.norm()
    }

    #[test]
    fn eigenvectors_of_channels_away_from_one_are_traceless() {
        use crate::noisemodels::{random_channel_rng, rng_from_seed};
        use rand::Rng;
        let mut rng = rng_from_seed(31);
        for trial in 0..200 {
            let d = rng.random_range(2..=3);
            let rank = rng.random_range(1..=d * d);
            let ch = random_channel_rng(d, rank, &mut rng).unwrap();
            let sd = spectral_decompose(&ch.natural()).unwrap();
            let mut at = 0;
            for b in &sd.blocks {
                if (b.eigenvalue - real(1.0)).norm() > 1e-6 {
                    for j in at..at + b.size {
                        let t = column_trace(&sd.basis, j, d);
                        assert!(
                            t <= 1e-8,
                            "trial {trial}: eigenvalue {} has trace {t:e}",
                            b.eigenvalue
                        );
                    }
                }
                at += b.size;
            }
        }
    }

    #[test]
    fn defective_unit_block_carries_trace_on_its_last_chain_vector() {
        use crate::noisemodels::{random_tp_similarity, rng_from_seed};
        use rand::Rng;
        let mut rng = rng_from_seed(32);
        for trial in 0..100 {
            let d = rng.random_range(2..=3);
            let n = d * d;
            let mut j = ComplexMatrix::zeros(n, n);
            j.view_mut((0, 0), (2, 2))
                .copy_from(&jordan_block(real(1.0), 2));
            j.view_mut((2, 2), (2, 2))
                .copy_from(&jordan_block(real(0.0), 2));
            for k in 4..n {
                j[(k, k)] = Complex64::from_polar(
                    rng.random_range(0.1..0.9),
                    rng.random_range(0.0..std::f64::consts::TAU),
                );
            }
            let ch = random_tp_similarity(d, &j, 1, &mut rng).unwrap();
            let sd = spectral_decompose(&ch.natural()).unwrap();
            let mut at = 0;
            let mut seen = false;
            for b in &sd.blocks {
                if (b.eigenvalue - real(1.0)).norm() <= 1e-6 {
                    assert_eq!(b.size, 2, "trial {trial}");
                    seen = true;
                    let t = column_trace(&sd.basis, at, d);
                    assert!(t <= 1e-8, "trial {trial}: eigenvector trace {t:e}");
                    assert!(column_trace(&sd.basis, at + 1, d) > 1e-3);
                }
                at += b.size;
            }
            assert!(seen, "trial {trial}: no unit block");
        }
    }
}
