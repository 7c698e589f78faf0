//! The two worked-example channels and their printed inverses, stored as
//! exact rationals in the channel JSON format.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrep::channel::ChannelRep;
use crate::matrep::json::channel_from_json;

pub const FIXTURE_NAMES: [&str; 7] = [
    "example1",
    "example1_natural",
    "example1_inverse",
    "example2",
    "example2_natural",
    "example2_drazin",
    "example2_moore_penrose",
];

const EXAMPLE1: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "choi", "data": [
  [["3/4", 0], [0, 0], [0, "-1/8"], ["1/2", "1/8"]],
  [[0, 0], ["1/4", 0], [0, "-1/8"], [0, "1/8"]],
  [[0, "1/8"], [0, "1/8"], ["1/4", 0], [0, 0]],
  [["1/2", "-1/8"], [0, "-1/8"], [0, 0], ["3/4", 0]]]}"#;

const EXAMPLE1_NATURAL: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "natural", "data": [
  [["3/4", 0], [0, "1/8"], [0, "-1/8"], ["1/4", 0]],
  [[0, 0], ["1/2", "-1/8"], [0, "-1/8"], [0, 0]],
  [[0, 0], [0, "1/8"], ["1/2", "1/8"], [0, 0]],
  [["1/4", 0], [0, "-1/8"], [0, "1/8"], ["3/4", 0]]]}"#;

const EXAMPLE1_INVERSE: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "natural", "data": [
  [["3/2", 0], ["1/4", "-1/2"], ["1/4", "1/2"], ["-1/2", 0]],
  [[0, 0], [2, "1/2"], [0, "1/2"], [0, 0]],
  [[0, 0], [0, "-1/2"], [2, "-1/2"], [0, 0]],
  [["-1/2", 0], ["-1/4", "1/2"], ["-1/4", "-1/2"], ["3/2", 0]]]}"#;

const EXAMPLE2: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "choi", "data": [
  ["8/20", 0, "1/20", "6/20"],
  [0, "12/20", "2/20", "-1/20"],
  ["1/20", "2/20", "8/20", 0],
  ["6/20", "-1/20", 0, "12/20"]]}"#;

const EXAMPLE2_NATURAL: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "natural", "data": [
  ["8/20", "1/20", "1/20", "8/20"],
  [0, "6/20", "2/20", 0],
  [0, "2/20", "6/20", 0],
  ["12/20", "-1/20", "-1/20", "12/20"]]}"#;

const EXAMPLE2_DRAZIN: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "natural", "data": [
  ["2/5", "5/16", "5/16", "2/5"],
  [0, "15/4", "-5/4", 0],
  [0, "-5/4", "15/4", 0],
  ["3/5", "-5/16", "-5/16", "3/5"]]}"#;

const EXAMPLE2_MOORE_PENROSE: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "natural", "data": [
  ["115/294", "10/441", "10/441", "505/882"],
  ["50/147", "3245/882", "-1165/882", "-100/441"],
  ["50/147", "-1165/882", "3245/882", "-100/441"],
  ["115/294", "10/441", "10/441", "505/882"]]}"#;

/// Raw JSON payload of a named fixture.
pub fn fixture_json(name: &str) -> Result<Value> {
    let text = match name {
        "example1" => EXAMPLE1,
        "example1_natural" => EXAMPLE1_NATURAL,
        "example1_inverse" => EXAMPLE1_INVERSE,
        "example2" => EXAMPLE2,
        "example2_natural" => EXAMPLE2_NATURAL,
        "example2_drazin" => EXAMPLE2_DRAZIN,
        "example2_moore_penrose" => EXAMPLE2_MOORE_PENROSE,
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    Ok(serde_json::from_str(text).expect("fixture JSON is well formed"))
}

pub fn fixture(name: &str) -> Result<ChannelRep> {
    channel_from_json(&fixture_json(name)?)
}
