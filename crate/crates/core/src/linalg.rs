//! Schur-form plumbing shared by the spectral routines: complex Schur
//! factorisation, reordering of the triangular factor by Givens swaps,
//! eigenvalue clustering and triangular Sylvester solves.

use nalgebra::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrep::matrix::ComplexMatrix;

/// Shifted QR iterations can cycle without converging on highly symmetric
/// spectra (e.g. unitary channels), so each attempt is capped; after a
/// failure the matrix is rotated by a fixed random unitary `W` and the
/// factors of `W M W†` are rotated back.
fn schur_factors(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.nrows();
    let max_iter = 200 * n.max(10);
    if let Some(s) = Schur::try_new(m.clone(), f64::EPSILON, max_iter) {
        return s.unpack();
    }
    for attempt in 0..16u64 {
        let w =
            crate::noisemodels::random_unitary(n, &mut crate::noisemodels::rng_from_seed(attempt));
        let rotated = &w * m * w.adjoint();
        if let Some(s) = Schur::try_new(rotated, f64::EPSILON, max_iter) {
            let (q, t) = s.unpack();
            return (w.adjoint() * q, t);
        }
    }
    panic!("Schur iteration failed to converge on a {n}x{n} matrix");
}

/// `M = U T U†` with `U` unitary and `T` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub unitary: ComplexMatrix,
    pub triangular: ComplexMatrix,
}

impl SchurForm {
    pub fn new(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "Schur form needs a square matrix");
        let n = m.nrows();
        if n == 0 {
            return Self {
                unitary: ComplexMatrix::zeros(0, 0),
                triangular: ComplexMatrix::zeros(0, 0),
            };
        }
        let (unitary, mut triangular) = schur_factors(m);
        // the subdiagonal is zero up to rounding; make it exactly zero
        for j in 0..n {
            for i in (j + 1)..n {
                triangular[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
        Self {
            unitary,
            triangular,
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.triangular.nrows())
            .map(|i| self.triangular[(i, i)])
            .collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.unitary * &self.triangular * self.unitary.adjoint()
    }

    /// Swaps the diagonal entries at `k` and `k + 1` by a unitary Givens similarity.
    pub fn swap_adjacent(&mut self, k: usize) {
        let t = &mut self.triangular;
        let n = t.nrows();
        let a = t[(k, k)];
        let b = t[(k + 1, k + 1)];
        let x = t[(k, k + 1)];
        let diff = b - a;
        let r = (x.norm_sqr() + diff.norm_sqr()).sqrt();
        if r == 0.0 {
            return;
        }
        // first column of G is the eigenvector of the 2x2 block for `b`
        let c = x / r;
        let s = diff / r;
        // G = [[c, -conj(s)], [s, conj(c)]]
        let g00 = c;
        let g01 = -s.conj();
        let g10 = s;
        let g11 = c.conj();
        // T <- T G on columns k, k+1
        for i in 0..n {
            let ti0 = t[(i, k)];
            let ti1 = t[(i, k + 1)];
            t[(i, k)] = ti0 * g00 + ti1 * g10;
            t[(i, k + 1)] = ti0 * g01 + ti1 * g11;
        }
        // T <- G† T on rows k, k+1
        for j in 0..n {
            let t0j = t[(k, j)];
            let t1j = t[(k + 1, j)];
            t[(k, j)] = g00.conj() * t0j + g10.conj() * t1j;
            t[(k + 1, j)] = g01.conj() * t0j + g11.conj() * t1j;
        }
        t[(k + 1, k)] = Complex64::new(0.0, 0.0);
        t[(k, k)] = b;
        t[(k + 1, k + 1)] = a;
        let u = &mut self.unitary;
        for i in 0..n {
            let ui0 = u[(i, k)];
            let ui1 = u[(i, k + 1)];
            u[(i, k)] = ui0 * g00 + ui1 * g10;
            u[(i, k + 1)] = ui0 * g01 + ui1 * g11;
        }
    }

    /// Stable reordering of the diagonal by `rank(i)` (smaller ranks first).
    pub fn reorder_by<F: Fn(usize) -> usize>(&mut self, rank_of_original: F) {
        let n = self.triangular.nrows();
        let mut ranks: Vec<usize> = (0..n).map(&rank_of_original).collect();
        // bubble sort: each transposition is one Givens swap
        for pass in 0..n {
            let mut swapped = false;
            for k in 0..n.saturating_sub(1 + pass) {
                if ranks[k] > ranks[k + 1] {
                    self.swap_adjacent(k);
                    ranks.swap(k, k + 1);
                    swapped = true;
                }
            }
            if !swapped {
                break;
            }
        }
    }
}

/// One group of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: Complex64,
    pub members: Vec<usize>,
}

/// Single-linkage clustering at distance `eps`. Clusters whose closest members
/// lie within `2 eps` of each other are rejected as ambiguous.
pub fn cluster_eigenvalues(values: &[Complex64], eps: f64) -> Result<Vec<Cluster>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        let mut c = i;
        while label[c] != r {
            let next = label[c];
            label[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= eps {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_of_cluster: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match root_of_cluster.iter().position(|&x| x == r) {
            Some(c) => clusters[c].members.push(i),
            None => {
                root_of_cluster.push(r);
                clusters.push(Cluster {
                    center: Complex64::new(0.0, 0.0),
                    members: vec![i],
                });
            }
        }
    }
    for c in &mut clusters {
        let sum: Complex64 = c.members.iter().map(|&i| values[i]).sum();
        c.center = sum / c.members.len() as f64;
    }
    for a in 0..clusters.len() {
        for b in (a + 1)..clusters.len() {
            for &i in &clusters[a].members {
                for &j in &clusters[b].members {
                    let d = (values[i] - values[j]).norm();
                    if d <= 2.0 * eps {
                        return Err(Error::ClusterAmbiguity(d));
                    }
                }
            }
        }
    }
    Ok(clusters)
}

/// Eigenvalues of a square matrix via the Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    SchurForm::new(m).eigenvalues()
}

pub fn spectral_radius(m: &ComplexMatrix) -> f64 {
    eigenvalues(m).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Solves `A X - X B = C` for upper-triangular `A` (p×p) and `B` (q×q) with
/// disjoint spectra, column by column.
pub fn solve_triangular_sylvester(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
) -> ComplexMatrix {
    let p = a.nrows();
    let q = b.nrows();
    let mut x = ComplexMatrix::zeros(p, q);
    for j in 0..q {
        // (A - b_jj I) x_j = c_j + Σ_{k<j} x_k b_kj
        let mut rhs = c.column(j).into_owned();
        for k in 0..j {
            let bkj = b[(k, j)];
            if bkj != Complex64::new(0.0, 0.0) {
                rhs += x.column(k) * bkj;
            }
        }
        let shift = b[(j, j)];
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for l in (i + 1)..p {
                s -= a[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = s / (a[(i, i)] - shift);
        }
    }
    x
}

/// Inverse of an upper-triangular matrix with nonzero diagonal.
pub fn upper_triangular_inverse(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.nrows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = Complex64::new(1.0, 0.0) / t[(j, j)];
        for i in (0..j).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in (i + 1)..=j {
                s += t[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / t[(i, i)];
        }
    }
    inv
}
