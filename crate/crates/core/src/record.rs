//! JSON form of [`SlopeRecord`]: one object per `(p, k)`, rationals as
//! `{"num": .., "den": ..}` in lowest terms with positive denominator.

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slopes::SlopeRecord;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed record JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rational {num}/{den} is not in lowest terms with positive denominator")]
    NonCanonical { num: i64, den: i64 },
    #[error("multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("value {0} does not fit the record format")]
    Overflow(String),
    #[error("inconsistent record: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatJson {
    pub num: i64,
    pub den: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatMultJson {
    pub num: i64,
    pub den: i64,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordJson {
    pub p: u64,
    pub k: u32,
    pub dim: usize,
    pub tp_slopes: Vec<RatMultJson>,
    pub u_slopes: Vec<RatMultJson>,
    pub ssing: Vec<RatMultJson>,
    pub ulmer_ok: bool,
    pub exceptional: Vec<RatJson>,
    pub fractional: Vec<RatJson>,
    pub tool_version: String,
}

fn to_json(r: &Rational) -> Result<RatJson, RecordError> {
    let num = r.numer().to_i64().ok_or_else(|| RecordError::Overflow(r.to_string()))?;
    let den = r.denom().to_i64().ok_or_else(|| RecordError::Overflow(r.to_string()))?;
    Ok(RatJson { num, den })
}

fn from_json(num: i64, den: i64) -> Result<Rational, RecordError> {
    if den <= 0 || Integer::from(num).gcd(&Integer::from(den)) != 1 {
        return Err(RecordError::NonCanonical { num, den });
    }
    Ok(Rational::from((num, den)))
}

/// Groups a sorted list into `(value, multiplicity)` runs.
fn group(xs: &[Rational]) -> Result<Vec<RatMultJson>, RecordError> {
    let mut out: Vec<RatMultJson> = Vec::new();
    let mut prev: Option<&Rational> = None;
    for x in xs {
        if prev == Some(x) {
            out.last_mut().expect("run started").mult += 1;
        } else {
            let RatJson { num, den } = to_json(x)?;
            out.push(RatMultJson { num, den, mult: 1 });
        }
        prev = Some(x);
    }
    Ok(out)
}

fn ungroup(runs: &[RatMultJson]) -> Result<Vec<Rational>, RecordError> {
    let mut out = Vec::new();
    for run in runs {
        if run.mult == 0 {
            return Err(RecordError::ZeroMultiplicity);
        }
        let x = from_json(run.num, run.den)?;
        out.extend(std::iter::repeat_n(x, run.mult));
    }
    Ok(out)
}

fn plain(xs: &[Rational]) -> Result<Vec<RatJson>, RecordError> {
    xs.iter().map(to_json).collect()
}

fn unplain(xs: &[RatJson]) -> Result<Vec<Rational>, RecordError> {
    xs.iter().map(|r| from_json(r.num, r.den)).collect()
}

impl RecordJson {
    pub fn from_record(r: &SlopeRecord) -> Result<Self, RecordError> {
        Ok(RecordJson {
            p: r.p,
            k: r.k,
            dim: r.dim,
            tp_slopes: group(&r.tp_slopes)?,
            u_slopes: group(&r.u_slopes)?,
            ssing: group(&r.ssing)?,
            ulmer_ok: r.ulmer_ok,
            exceptional: plain(&r.exceptional)?,
            fractional: plain(&r.fractional)?,
            tool_version: TOOL_VERSION.to_string(),
        })
    }

    pub fn to_record(&self) -> Result<SlopeRecord, RecordError> {
        let rec = SlopeRecord {
            p: self.p,
            k: self.k,
            dim: self.dim,
            tp_slopes: ungroup(&self.tp_slopes)?,
            u_slopes: ungroup(&self.u_slopes)?,
            ssing: ungroup(&self.ssing)?,
            ulmer_ok: self.ulmer_ok,
            exceptional: unplain(&self.exceptional)?,
            fractional: unplain(&self.fractional)?,
        };
        if rec.tp_slopes.len() != rec.dim || rec.u_slopes.len() != 2 * rec.dim || rec.ssing.len() != 2 * rec.dim {
            return Err(RecordError::Inconsistent("sequence lengths do not match dim"));
        }
        Ok(rec)
    }
}

/// Pretty-printed JSON with a trailing newline; byte-identical for equal records.
pub fn to_json_string(r: &SlopeRecord) -> Result<String, RecordError> {
    let mut s = serde_json::to_string_pretty(&RecordJson::from_record(r)?)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_record(text: &str) -> Result<(SlopeRecord, String), RecordError> {
    let json: RecordJson = serde_json::from_str(text)?;
    let rec = json.to_record()?;
    Ok((rec, json.tool_version))
}

pub fn record_file_name(p: u64, k: u32) -> String {
    format!("p{p}_k{k}.json")
}
