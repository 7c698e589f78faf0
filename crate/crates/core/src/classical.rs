//! Classical baseline: binary symmetric channel, 3-bit repetition code and
//! inversion of a known stochastic channel on output distributions.

use nalgebra::{DMatrix, DVector};
use rand::distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noisemodels::rng_from_seed;

const STOCHASTIC_TOL: f64 = 1e-9;

/// Column-stochastic `K × K` matrix: entry `(i, j)` is `P(out = i | in = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "stochastic matrix must be square, got {:?}",
                m.shape()
            )));
        }
        if m.iter().any(|x| !x.is_finite() || *x < -STOCHASTIC_TOL) {
            return Err(Error::ParamOutOfRange(
                "stochastic matrix entries must be nonnegative".into(),
            ));
        }
        for (j, col) in m.column_iter().enumerate() {
            let s: f64 = col.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::ParamOutOfRange(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(k: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != k * k {
            return Err(Error::LengthMismatch {
                expected: k * k,
                got: rows.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(k, k, rows))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), p)?;
        Ok((&self.0 * DVector::from_column_slice(p))
            .as_slice()
            .to_vec())
    }

    fn smallest_singular_value(&self) -> f64 {
        self.0
            .singular_values()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// `M⁻¹ p`, or `None` (with the smallest singular value) when `M` is singular.
    pub(crate) fn solve(&self, p: &[f64]) -> std::result::Result<Vec<f64>, f64> {
        let smin = self.smallest_singular_value();
        if smin <= STOCHASTIC_TOL {
            return Err(smin);
        }
        let lu = self.0.clone().lu();
        let x = lu.solve(&DVector::from_column_slice(p)).ok_or(smin)?;
        Ok(x.as_slice().to_vec())
    }
}

fn check_len(k: usize, p: &[f64]) -> Result<()> {
    if p.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: p.len(),
        });
    }
    Ok(())
}

/// `[[1-p, p], [p, 1-p]]`.
pub fn bsc(p: f64) -> Result<StochasticMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParamOutOfRange(format!(
            "flip probability {p} not in [0, 1]"
        )));
    }
    StochasticMatrix::from_rows(2, &[1.0 - p, p, p, 1.0 - p])
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn repetition_encode(s: &BitString) -> BitString {
    BitString(s.0.iter().flat_map(|&b| [b, b, b]).collect())
}

/// Majority vote over consecutive triples.
pub fn repetition_decode(r: &BitString) -> Result<BitString> {
    if !r.len().is_multiple_of(3) {
        return Err(Error::LengthNotMultipleOf3(r.len()));
    }
    Ok(BitString(
        r.0.chunks(3)
            .map(|t| t.iter().filter(|&&b| b).count() >= 2)
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepetitionRate {
    pub p: f64,
    pub trials: u64,
    pub empirical: f64,
    /// `3p²(1-p) + p³`.
    pub exact: f64,
    /// `3p²(1-p)`, the leading-order expression.
    pub paper_value: f64,
    /// Binomial standard error `sqrt(exact (1 - exact) / trials)`.
    pub std_error: f64,
}

/// Probability that majority decoding of three independent flips is wrong,
/// by enumerating the eight flip patterns.
pub fn repetition_exact_error(p: f64) -> f64 {
    (0u8..8)
        .filter(|pattern| pattern.count_ones() >= 2)
        .map(|pattern| {
            let k = pattern.count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(3 - k)
        })
        .sum()
}

/// Sends one encoded bit through three BSC uses per trial and decodes.
pub fn repetition_error_rate(p: f64, n_trials: u64, seed: u64) -> Result<RepetitionRate> {
    let flip = Bernoulli::new(p)
        .map_err(|_| Error::ParamOutOfRange(format!("flip probability {p} not in [0, 1]")))?;
    let mut rng = rng_from_seed(seed);
    let errors = (0..n_trials)
        .filter(|_| (0..3).filter(|_| flip.sample(&mut rng)).count() >= 2)
        .count();
    let exact = repetition_exact_error(p);
    Ok(RepetitionRate {
        p,
        trials: n_trials,
        empirical: if n_trials == 0 {
            0.0
        } else {
            errors as f64 / n_trials as f64
        },
        exact,
        paper_value: 3.0 * p * p * (1.0 - p),
        std_error: if n_trials == 0 {
            f64::INFINITY
        } else {
            (exact * (1.0 - exact) / n_trials as f64).sqrt()
        },
    })
}

/// Per-bit agreement of the two deterministic bitwise post-processings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostProcessingAgreement {
    pub keep: f64,
    pub flip: f64,
}

/// Agreement probabilities for `keep` and `flip`, from the channel matrix
/// and a uniform source bit.
pub fn bitwise_postprocessing_agreement(p: f64) -> Result<PostProcessingAgreement> {
    let m = bsc(p)?;
    let agree = |flip: bool| {
        (0..2)
            .map(|sent| {
                let received = if flip { 1 - sent } else { sent };
                0.5 * m.matrix()[(received, sent)]
            })
            .sum::<f64>()
    };
    Ok(PostProcessingAgreement {
        keep: agree(false),
        flip: agree(true),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiDistribution {
    pub values: Vec<f64>,
    /// Some entry is below `-1e-12`.
    pub has_negative: bool,
}

impl QuasiDistribution {
    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        let has_negative = values.iter().any(|&x| x < -1e-12);
        Self {
            values,
            has_negative,
        }
    }
}

/// `N⁻¹ · observed`.
pub fn invert_distribution(n: &StochasticMatrix, observed: &[f64]) -> Result<QuasiDistribution> {
    check_len(n.dim(), observed)?;
    n.solve(observed)
        .map(QuasiDistribution::from_values)
        .map_err(Error::SingularChannel)
}

/// Empirical output frequencies of `shots` uses of `n` on input distribution `p`.
pub fn sample_frequencies(
    n: &StochasticMatrix,
    p: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let out = n.apply(p)?;
    let dist = rand::distr::weighted::WeightedIndex::new(out.iter().map(|x| x.max(0.0)))
        .map_err(|e| Error::ParamOutOfRange(format!("invalid distribution: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u64; out.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| c as f64 / shots as f64)
        .collect())
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn repetition_round_trip(bits in prop::collection::vec(any::<bool>(), 0..40)) {
            let s = BitString::new(bits);
            prop_assert_eq!(repetition_decode(&repetition_encode(&s)).unwrap(), s);
        }

        #[test]
        fn single_flip_per_block_is_corrected(bits in prop::collection::vec(any::<bool>(), 1..20), pos in 0usize..3) {
            let s = BitString::new(bits);
            let mut code = repetition_encode(&s).bits().to_vec();
            for block in code.chunks_mut(3) {
                block[pos] = !block[pos];
            }
            prop_assert_eq!(repetition_decode(&BitString::new(code)).unwrap(), s);
        }

        #[test]
        fn inversion_round_trip(p in 0.0f64..0.49, a in 0.0f64..1.0) {
            let m = bsc(p).unwrap();
            let back = invert_distribution(&m, &m.apply(&[a, 1.0 - a]).unwrap()).unwrap();
            prop_assert!((back.values[0] - a).abs() < 1e-12);
        }
    }
}
