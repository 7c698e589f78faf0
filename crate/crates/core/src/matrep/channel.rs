//! Linear maps between operator spaces in Kraus, Choi or natural form.
//!
//! Conventions (fixed once, pinned by the worked-example fixtures):
//!
//! * natural form `M` satisfies `M · v(A) = v(Φ(A))`, shape `dout² × din²`;
//! * Choi form `C = Σ_{a,b} E_{a,b} ⊗ Φ(E_{a,b})`, shape `din·dout × din·dout`,
//!   related entrywise by `C[(a,i),(b,j)] = M[(j,i),(b,a)]`.

use serde::{Deserialize, Serialize};

use super::matrix::{
    basis_matrix, hermitian_eigen, identity, unvectorize, vectorize, ComplexMatrix,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    Kraus,
    Choi,
    Natural,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Kraus(Vec<ComplexMatrix>),
    Choi(ComplexMatrix),
    Natural(ComplexMatrix),
}

/// A linear map `L(C^dim_in) -> L(C^dim_out)` in one of the three forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRep {
    dim_in: usize,
    dim_out: usize,
    rep: Representation,
}

impl ChannelRep {
    pub fn from_kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty Kraus set".into()))?;
        let (dout, din) = first.shape();
        if din == 0 || dout == 0 {
            return Err(Error::ShapeMismatch("zero-sized Kraus operator".into()));
        }
        if let Some(bad) = ops.iter().find(|k| k.shape() != (dout, din)) {
            return Err(Error::ShapeMismatch(format!(
                "Kraus operators must share shape {dout}x{din}, found {}x{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        for k in &ops {
            super::matrix::ensure_finite(k)?;
        }
        Ok(Self {
            dim_in: din,
            dim_out: dout,
            rep: Representation::Kraus(ops),
        })
    }

    pub fn from_choi(dim_in: usize, dim_out: usize, choi: ComplexMatrix) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "Choi matrix for {dim_in}->{dim_out} must be {n}x{n}, got {}x{}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        super::matrix::ensure_finite(&choi)?;
        Ok(Self {
            dim_in,
            dim_out,
            rep: Representation::Choi(choi),
        })
    }

    pub fn from_natural(dim_in: usize, dim_out: usize, natural: ComplexMatrix) -> Result<Self> {
        if natural.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::ShapeMismatch(format!(
                "natural form for {dim_in}->{dim_out} must be {}x{}, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                natural.nrows(),
                natural.ncols()
            )));
        }
        super::matrix::ensure_finite(&natural)?;
        Ok(Self {
            dim_in,
            dim_out,
            rep: Representation::Natural(natural),
        })
    }

    /// Square natural form given as a `d² × d²` matrix.
    pub fn from_superoperator(natural: ComplexMatrix) -> Result<Self> {
        let n = natural.nrows();
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || !natural.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "superoperator must be d²×d², got {}x{}",
                natural.nrows(),
                natural.ncols()
            )));
        }
        Self::from_natural(d, d, natural)
    }

    /// Conjugation `ρ ↦ U ρ U†`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            rep: Representation::Natural(identity(d * d)),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn kind(&self) -> RepKind {
        match self.rep {
            Representation::Kraus(_) => RepKind::Kraus,
            Representation::Choi(_) => RepKind::Choi,
            Representation::Natural(_) => RepKind::Natural,
        }
    }

    /// The natural-form matrix, converting if needed.
    pub fn natural(&self) -> ComplexMatrix {
        match &self.rep {
            Representation::Natural(m) => m.clone(),
            Representation::Choi(c) => natural_matrix_from_choi(c, self.dim_in, self.dim_out),
            Representation::Kraus(k) => natural_matrix_from_kraus(k, self.dim_in, self.dim_out),
        }
    }

    /// The Choi matrix, converting if needed.
    pub fn choi(&self) -> ComplexMatrix {
        match &self.rep {
            Representation::Choi(c) => c.clone(),
            _ => choi_matrix_from_natural(&self.natural(), self.dim_in, self.dim_out),
        }
    }

    pub fn to_natural(&self) -> Self {
        Self {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            rep: Representation::Natural(self.natural()),
        }
    }

    pub fn to_choi(&self) -> Self {
        Self {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            rep: Representation::Choi(self.choi()),
        }
    }

    /// Kraus operators from the Choi eigendecomposition. Only CP maps have one.
    pub fn to_kraus(&self, tol_cp: f64) -> Result<Self> {
        if let Representation::Kraus(_) = self.rep {
            return Ok(self.clone());
        }
        let choi = self.choi();
        let (values, vectors) = hermitian_eigen(&choi);
        if let Some(&min) = values.first() {
            if min < -tol_cp {
                return Err(Error::ShapeMismatch(format!(
                    "map is not completely positive (Choi eigenvalue {min:e}); no Kraus form"
                )));
            }
        }
        let (din, dout) = (self.dim_in, self.dim_out);
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut ops = Vec::new();
        for (k, &lambda) in values.iter().enumerate().rev() {
            if lambda <= tol_cp * scale {
                continue;
            }
            let s = lambda.sqrt();
            let op = ComplexMatrix::from_fn(dout, din, |i, a| vectors[(a * dout + i, k)] * s);
            ops.push(op);
        }
        if ops.is_empty() {
            ops.push(ComplexMatrix::zeros(dout, din));
        }
        Self::from_kraus(ops)
    }

    /// Applies the map to a `dim_in × dim_in` operator.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::ShapeMismatch(format!(
                "operator must be {0}x{0}, got {1}x{2}",
                self.dim_in,
                a.nrows(),
                a.ncols()
            )));
        }
        match &self.rep {
            Representation::Kraus(ops) => Ok(kraus_action(ops, a)),
            _ => {
                let out = self.natural() * vectorize(a);
                unvectorize(&out, self.dim_out, self.dim_out)
            }
        }
    }

    /// `next ∘ self`, returned in natural form.
    pub fn then(&self, next: &ChannelRep) -> Result<Self> {
        if next.dim_in != self.dim_out {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {}->{} after {}->{}",
                next.dim_in, next.dim_out, self.dim_in, self.dim_out
            )));
        }
        Self::from_natural(self.dim_in, next.dim_out, next.natural() * self.natural())
    }

    /// Linear combination `Σ w_i Φ_i` of maps with equal dimensions, in natural form.
    pub fn linear_combination(terms: &[(f64, &ChannelRep)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty combination".into()))?;
        let (din, dout) = (first.dim_in, first.dim_out);
        let mut acc = ComplexMatrix::zeros(dout * dout, din * din);
        for (w, ch) in terms {
            if (ch.dim_in, ch.dim_out) != (din, dout) {
                return Err(Error::ShapeMismatch(
                    "mixed dimensions in combination".into(),
                ));
            }
            acc += ch.natural().scale(*w);
        }
        Self::from_natural(din, dout, acc)
    }

    /// `Σ K_i† K_i - I` in Frobenius norm, for Kraus-form maps.
    pub fn kraus_completeness_residual(&self) -> Option<f64> {
        match &self.rep {
            Representation::Kraus(ops) => {
                let sum: ComplexMatrix = ops
                    .iter()
                    .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                        acc + k.adjoint() * k
                    });
                Some((sum - identity(self.dim_in)).norm())
            }
            _ => None,
        }
    }
}

fn kraus_action(ops: &[ComplexMatrix], a: &ComplexMatrix) -> ComplexMatrix {
    let dout = ops[0].nrows();
    ops.iter().fold(ComplexMatrix::zeros(dout, dout), |acc, k| {
        acc + k * a * k.adjoint()
    })
}

/// Natural form built column by column from the defining relation
/// `M · v(E_{a,b}) = v(Φ(E_{a,b}))`, with `v(E_{a,b})` the basis vector `b·din + a`.
pub fn natural_matrix_from_kraus(ops: &[ComplexMatrix], din: usize, dout: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dout * dout, din * din);
    for b in 0..din {
        for a in 0..din {
            let image = vectorize(&kraus_action(ops, &basis_matrix(din, din, a, b)));
            m.set_column(b * din + a, &image);
        }
    }
    m
}

pub fn choi_matrix_from_natural(m: &ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    let n = din * dout;
    let mut c = ComplexMatrix::zeros(n, n);
    for a in 0..din {
        for b in 0..din {
            for i in 0..dout {
                for j in 0..dout {
                    c[(a * dout + i, b * dout + j)] = m[(j * dout + i, b * din + a)];
                }
            }
        }
    }
    c
}

pub fn natural_matrix_from_choi(c: &ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dout * dout, din * din);
    for a in 0..din {
        for b in 0..din {
            for i in 0..dout {
                for j in 0..dout {
                    m[(j * dout + i, b * din + a)] = c[(a * dout + i, b * dout + j)];
                }
            }
        }
    }
    m
}

pub fn natural_from_kraus(ops: &[ComplexMatrix]) -> Result<ChannelRep> {
    Ok(ChannelRep::from_kraus(ops.to_vec())?.to_natural())
}

pub fn choi_from_natural(ch: &ChannelRep) -> Result<ChannelRep> {
    if ch.kind() != RepKind::Natural {
        return Err(Error::ShapeMismatch(format!(
            "expected a natural-form channel, got {:?}",
            ch.kind()
        )));
    }
    Ok(ch.to_choi())
}

pub fn natural_from_choi(ch: &ChannelRep) -> Result<ChannelRep> {
    if ch.kind() != RepKind::Choi {
        return Err(Error::ShapeMismatch(format!(
            "expected a Choi-form channel, got {:?}",
            ch.kind()
        )));
    }
    Ok(ch.to_natural())
}

/// Adjoint of a unitary-conjugation map (`U† · U`), in natural form.
pub fn unitary_adjoint(u: &ComplexMatrix) -> Result<ChannelRep> {
    natural_from_kraus(&[u.adjoint()])
}
