//! JSON exchange format for channels, states and observables.
//!
//! Complex entries are `[re, im]`; a bare number or an exact rational string
//! `"p/q"` is also accepted for either part. Matrix data is a list of rows or
//! a flat row-major list.

use num_complex::Complex64;
use serde_json::{json, Value};

use super::channel::{ChannelRep, RepKind, Representation};
use super::matrix::{from_row_major, ComplexMatrix};
use crate::error::{Error, Result};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses `"p/q"`, `"x"` or a JSON number.
pub fn parse_real(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| parse_err(format!("bad number {n}"))),
        Value::String(s) => parse_rational(s),
        other => Err(parse_err(format!("expected a real number, got {other}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad numerator in {s:?}")))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad denominator in {s:?}")))?;
            if q == 0.0 {
                return Err(parse_err(format!("zero denominator in {s:?}")));
            }
            p / q
        }
        None => s
            .parse()
            .map_err(|_| parse_err(format!("bad number {s:?}")))?,
    };
    if !value.is_finite() {
        return Err(parse_err(format!("non-finite value {s:?}")));
    }
    Ok(value)
}

pub fn parse_complex(v: &Value) -> Result<Complex64> {
    match v {
        Value::Array(parts) if parts.len() == 2 => Ok(Complex64::new(
            parse_real(&parts[0])?,
            parse_real(&parts[1])?,
        )),
        Value::Array(parts) => Err(parse_err(format!(
            "complex entry needs 2 parts, got {}",
            parts.len()
        ))),
        other => Ok(Complex64::new(parse_real(other)?, 0.0)),
    }
}

/// Parses a `rows × cols` matrix from nested rows or a flat row-major list.
/// The layout is decided by the list length: `rows` means nested rows,
/// `rows * cols` means flat.
pub fn parse_matrix(v: &Value, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    let list = v
        .as_array()
        .ok_or_else(|| parse_err("matrix data must be a list"))?;
    let mut entries = Vec::with_capacity(rows * cols);
    let nested = list.len() == rows
        && (cols != 1
            || list
                .iter()
                .all(|r| matches!(r, Value::Array(x) if x.len() == 1)));
    if nested && rows * cols != 0 {
        for (r, row) in list.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| parse_err(format!("row {r} is not a list")))?;
            if row.len() != cols {
                return Err(parse_err(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for e in row {
                entries.push(parse_complex(e)?);
            }
        }
    } else if list.len() == rows * cols {
        for e in list {
            entries.push(parse_complex(e)?);
        }
    } else {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            got: list.len(),
        });
    }
    from_row_major(rows, cols, &entries)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn get_usize(obj: &Value, key: &str) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("missing or invalid field {key:?}")))
}

pub fn channel_from_json(v: &Value) -> Result<ChannelRep> {
    let din = get_usize(v, "dim_in")?;
    let dout = get_usize(v, "dim_out")?;
    let rep: RepKind = serde_json::from_value(v.get("rep").cloned().unwrap_or(Value::Null))
        .map_err(|e| parse_err(format!("field \"rep\": {e}")))?;
    let data = v
        .get("data")
        .ok_or_else(|| parse_err("missing field \"data\""))?;
    match rep {
        RepKind::Choi => {
            ChannelRep::from_choi(din, dout, parse_matrix(data, din * dout, din * dout)?)
        }
        RepKind::Natural => {
            ChannelRep::from_natural(din, dout, parse_matrix(data, dout * dout, din * din)?)
        }
        RepKind::Kraus => {
            let ops = data
                .as_array()
                .ok_or_else(|| parse_err("Kraus data must be a list of matrices"))?;
            let ops = ops
                .iter()
                .map(|m| parse_matrix(m, dout, din))
                .collect::<Result<Vec<_>>>()?;
            if ops.is_empty() {
                return Err(parse_err("Kraus data is empty"));
            }
            ChannelRep::from_kraus(ops)
        }
    }
}

/// Serialises `ch` in the requested form; Kraus output needs a CP map.
pub fn channel_to_json(ch: &ChannelRep, kind: RepKind, tol_cp: f64) -> Result<Value> {
    let data = match kind {
        RepKind::Natural => matrix_to_json(&ch.natural()),
        RepKind::Choi => matrix_to_json(&ch.choi()),
        RepKind::Kraus => {
            let k = ch.to_kraus(tol_cp)?;
            match k.representation() {
                Representation::Kraus(ops) => {
                    Value::Array(ops.iter().map(matrix_to_json).collect())
                }
                _ => unreachable!("to_kraus returns Kraus form"),
            }
        }
    };
    Ok(json!({
        "dim_in": ch.dim_in(),
        "dim_out": ch.dim_out(),
        "rep": kind,
        "data": data,
    }))
}

/// `{"dim": d, "data": ...}` into a square matrix (not yet validated as a state).
pub fn operator_from_json(v: &Value) -> Result<ComplexMatrix> {
    let d = get_usize(v, "dim")?;
    let data = v
        .get("data")
        .ok_or_else(|| parse_err("missing field \"data\""))?;
    parse_matrix(data, d, d)
}

pub fn operator_to_json(m: &ComplexMatrix) -> Value {
    json!({ "dim": m.nrows(), "data": matrix_to_json(m) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrep::matrix::{c64, max_abs_diff};

    #[test]
    fn rationals_and_layouts() {
        assert_eq!(parse_rational("3/4").unwrap(), 0.75);
        assert_eq!(parse_rational(" -1 / 8 ").unwrap(), -0.125);
        assert!(parse_rational("1/0").is_err());
        let nested = json!([[["1/2", 0], [0, "1/8"]], [[0, "-1/8"], 0.5]]);
        let flat = json!([["1/2", 0], [0, "1/8"], [0, "-1/8"], 0.5]);
        let a = parse_matrix(&nested, 2, 2).unwrap();
        let b = parse_matrix(&flat, 2, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(0, 1)], c64(0.0, 0.125));
        assert!(parse_matrix(&json!([[1, 2], [3]]), 2, 2).is_err());
    }

    #[test]
    fn channel_round_trip() {
        let ch = ChannelRep::identity(2);
        for kind in [RepKind::Natural, RepKind::Choi, RepKind::Kraus] {
            let v = channel_to_json(&ch, kind, 1e-9).unwrap();
            let back = channel_from_json(&v).unwrap();
            assert_eq!(back.kind(), kind);
            assert!(max_abs_diff(&back.natural(), &ch.natural()) < 1e-12);
        }
        let bad = json!({"dim_in": 2, "dim_out": 2, "rep": "choi", "data": [[1]]});
        assert!(channel_from_json(&bad).is_err());
        let bad = json!({"dim_in": 2, "dim_out": 2, "rep": "ptm", "data": []});
        assert!(matches!(channel_from_json(&bad), Err(Error::Parse(_))));
    }
}
