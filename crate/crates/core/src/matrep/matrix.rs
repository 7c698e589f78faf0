//! Dense complex matrices, the column-stacking vectorization and the norms
//! used throughout the crate.
//!
//! Composite indices of a tensor product space `m ⊗ n` are laid out as
//! `(outer, inner) -> outer * n + inner`. Vectorization sends the basis matrix
//! `E_{a,b}` to `e_b ⊗ e_a`, i.e. entry `(i, j)` of a `rows × cols` matrix lands
//! at flat index `j * rows + i`. This is column-major order, which is also
//! nalgebra's storage order.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            got: entries.len(),
        });
    }
    let m = DMatrix::from_row_slice(rows, cols, entries);
    ensure_finite(&m)?;
    Ok(m)
}

/// Builds a real matrix from row-major entries scaled by `scale`.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64], scale: f64) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols, "entry count");
    DMatrix::from_row_slice(rows, cols, entries).map(|x: f64| real(x * scale))
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// `E_{a,b}`: a `rows × cols` matrix with a single one at `(a, b)`.
pub fn basis_matrix(rows: usize, cols: usize, a: usize, b: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    m[(a, b)] = real(1.0);
    m
}

pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    // column-major storage is exactly the column-stacking order
    ComplexVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(ComplexMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// Trace of the operator whose vectorization is `v`.
pub fn vec_trace(v: &ComplexVector, d: usize) -> Result<Complex64> {
    if v.len() != d * d {
        return Err(Error::LengthMismatch {
            expected: d * d,
            got: v.len(),
        });
    }
    Ok((0..d).map(|i| v[i * d + i]).sum())
}

/// Row vector `t` with `t · v(A) = Tr(A)` for `d × d` operators.
pub fn trace_functional(d: usize) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(1, d * d);
    for i in 0..d {
        t[(0, i * d + i)] = real(1.0);
    }
    t
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn hermitian_residual(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    (a - a.adjoint())
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Ascending eigenvalues and matching eigenvectors of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(a: &ComplexMatrix) -> f64 {
    hermitian_eigen(a).0.first().copied().unwrap_or(0.0)
}

/// Applies `f` to the eigenvalues of the Hermitian part of `a`.
pub fn hermitian_function(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let diag = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        values.len(),
        values.iter().map(|&x| real(f(x))),
    ));
    &vectors * diag * vectors.adjoint()
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// Induced 2-norm (largest singular value).
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest singular value: `inf_{|x| = 1} |A x|` for square or tall `A`.
pub fn sigma_min(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    if a.ncols() > a.nrows() {
        return 0.0;
    }
    s.last().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `rel_tol * max(1, sigma_max)`.
pub fn numerical_rank(a: &ComplexMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > rel_tol * scale).count()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.trace()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    unitarity_residual(u) <= tol
}

pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// The single-qubit Paulis `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let z = real(0.0);
    let o = real(1.0);
    let i = c64(0.0, 1.0);
    [
        ComplexMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_matrix_vectorizes_to_swapped_tensor() {
        // v(E_{0,1}) = e_1 ⊗ e_0 = (0, 0, 1, 0)
        let v = vectorize(&basis_matrix(2, 2, 0, 1));
        let expected = [0.0, 0.0, 1.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(v[k], real(*e));
        }
    }

    #[test]
    fn identity_vectorizes_to_diagonal_positions() {
        let v = vectorize(&identity(2));
        assert_eq!(v.as_slice(), &[real(1.0), real(0.0), real(0.0), real(1.0)]);
        assert_eq!(vec_trace(&v, 2).unwrap(), real(2.0));
        assert_eq!(
            vec_trace(&vectorize(&basis_matrix(2, 2, 0, 1)), 2).unwrap(),
            real(0.0)
        );
    }

    #[test]
    fn entry_lands_at_column_major_index() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c64(i as f64, j as f64));
        let v = vectorize(&a);
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(v[j * 3 + i], a[(i, j)]);
            }
        }
        assert_eq!(unvectorize(&v, 3, 2).unwrap(), a);
    }

    #[test]
    fn vec_trace_rejects_wrong_length() {
        let v = ComplexVector::zeros(5);
        assert!(matches!(
            vec_trace(&v, 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let e = [real(1.0), real(f64::NAN), real(0.0), real(1.0)];
        assert!(matches!(
            from_row_major(2, 2, &e),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn norms_of_small_examples() {
        let d = from_real_rows(2, 2, &[3.0, 0.0, 0.0, -4.0], 1.0);
        assert!((trace_norm(&d) - 7.0).abs() < 1e-12);
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-12);
        assert!((sigma_min(&d) - 3.0).abs() < 1e-12);
        assert!((frobenius_norm(&d) - 5.0).abs() < 1e-12);
        let h = paulis()[2].clone();
        assert!((sigma_min(&h) - 1.0).abs() < 1e-12);
    }
}
