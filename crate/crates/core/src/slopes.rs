//! Slope and supersingularity sequences of `U` on level-`p` oldforms,
//! exceptional and fractional slope detection, trains, and the measures
//! `mu_k`.
//!
//! The `T_p` slopes on level one determine the oldform `U` slopes: each
//! `T_p` slope `a < (k-1)/2` gives the `U` pair `(a, k-1-a)`, and a slope
//! `a >= (k-1)/2` would force the pair `((k-1)/2, (k-1)/2)`. The second
//! branch is kept and flagged through `ulmer_ok`.

use std::collections::BTreeMap;

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::exactlinalg::char_poly;
use crate::modforms::{
    cusp_dim, hecke_matrix, is_prime, miller_basis_via, required_precision, BasisRoute, ModFormsError,
};
use crate::newton::{newton_slopes, NewtonError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SlopeError {
    #[error("weight {0} must be even and at least 12")]
    BadWeight(u32),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("empty space: weight {0} has no cusp forms")]
    EmptySpace(u32),
    #[error(transparent)]
    ModForms(#[from] ModFormsError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
}

/// Result of the slope computation for one `(p, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeRecord {
    pub p: u64,
    pub k: u32,
    pub dim: usize,
    /// Newton slopes of `T_p`, ascending, with repetition.
    pub tp_slopes: Vec<Rational>,
    /// All `2 dim` oldform `U` slopes, ascending.
    pub u_slopes: Vec<Rational>,
    /// `u_slopes / (k - 1)`, ascending.
    pub ssing: Vec<Rational>,
    /// Every `T_p` slope is strictly below `(k-1)/2`.
    pub ulmer_ok: bool,
    /// Lower-half slopes with supersingularity above `1/(p+1)`.
    pub exceptional: Vec<Rational>,
    /// Non-integral lower-half slopes.
    pub fractional: Vec<Rational>,
}

impl SlopeRecord {
    /// First half of the `U` slope sequence (the published "slope sequence").
    pub fn lower_half(&self) -> &[Rational] {
        &self.u_slopes[..self.dim]
    }

    pub fn is_exceptional_weight(&self) -> bool {
        !self.exceptional.is_empty()
    }

    /// Number of times `slope` occurs in the lower half.
    pub fn lower_multiplicity(&self, slope: &Rational) -> usize {
        self.lower_half().iter().filter(|s| *s == slope).count()
    }
}

pub fn is_exceptional(slope: &Rational, p: u64, k: u32) -> bool {
    Rational::from(slope * Integer::from(p + 1)) > (k - 1)
}

fn is_integral(r: &Rational) -> bool {
    *r.denom() == 1
}

/// Assembles a record from the `T_p` slopes of weight `k`.
pub fn record_from_tp_slopes(p: u64, k: u32, mut tp_slopes: Vec<Rational>) -> SlopeRecord {
    tp_slopes.sort();
    let km1 = Integer::from(k - 1);
    let half = Rational::from((k - 1, 2));
    let mut ulmer_ok = true;
    let mut lower = Vec::with_capacity(tp_slopes.len());
    let mut upper = Vec::with_capacity(tp_slopes.len());
    for a in &tp_slopes {
        if *a < half {
            lower.push(a.clone());
            upper.push(Rational::from(&km1 - a));
        } else {
            ulmer_ok = false;
            lower.push(half.clone());
            upper.push(half.clone());
        }
    }
    let exceptional = lower.iter().filter(|s| is_exceptional(s, p, k)).cloned().collect();
    let fractional = lower.iter().filter(|s| !is_integral(s)).cloned().collect();
    let mut u_slopes = lower;
    u_slopes.extend(upper);
    u_slopes.sort();
    let ssing = u_slopes.iter().map(|s| Rational::from(s / &km1)).collect();
    SlopeRecord { p, k, dim: tp_slopes.len(), tp_slopes, u_slopes, ssing, ulmer_ok, exceptional, fractional }
}

/// Echelon basis, `T_p` matrix, characteristic polynomial, Newton polygon.
pub fn compute_record(p: u64, k: u32) -> Result<SlopeRecord, SlopeError> {
    if k % 2 == 1 || k < 12 {
        return Err(SlopeError::BadWeight(k));
    }
    if !is_prime(p) {
        return Err(SlopeError::NotPrime(p));
    }
    let d = cusp_dim(k)?;
    if d == 0 {
        return Ok(record_from_tp_slopes(p, k, Vec::new()));
    }
    let space = miller_basis_via(k, required_precision(d, p), BasisRoute::DeltaPowers)?;
    let tp = hecke_matrix(&space, p)?;
    drop(space);
    let poly = char_poly(&tp.entries);
    let polygon = newton_slopes(&poly, p)?;
    Ok(record_from_tp_slopes(p, k, polygon.expanded()))
}

/// One row of the exception table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionRow {
    pub p: u64,
    pub k: u32,
    pub slopes: Vec<Rational>,
}

/// Records with at least one exceptional slope, ordered by `(p, k)`.
pub fn scan_exceptions<'a, I>(records: I) -> Vec<ExceptionRow>
where
    I: IntoIterator<Item = &'a SlopeRecord>,
{
    let mut rows: Vec<ExceptionRow> = records
        .into_iter()
        .filter(|r| r.is_exceptional_weight())
        .map(|r| ExceptionRow { p: r.p, k: r.k, slopes: r.exceptional.clone() })
        .collect();
    rows.sort_by_key(|r| (r.p, r.k));
    rows
}

/// Expected fractional pair at one weight of a train.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainLink {
    pub weight: u32,
    pub slope: Rational,
    /// Lower-half multiplicity found, `None` when the weight was not computed.
    pub found: Option<usize>,
}

impl TrainLink {
    pub fn matched(&self) -> bool {
        self.found == Some(2)
    }
}

/// An exceptional integral slope `n >= 2` at weight `k` and the pairs of
/// slope `(2(n-j)-1)/2` expected at weights `k - 2j`, `j = 1..n-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainCertificate {
    pub p: u64,
    pub k: u32,
    pub n: u32,
    pub links: Vec<TrainLink>,
}

impl TrainCertificate {
    pub fn matched(&self) -> bool {
        self.links.iter().all(TrainLink::matched)
    }
}

pub fn detect_trains<'a, I>(records: I) -> Vec<TrainCertificate>
where
    I: IntoIterator<Item = &'a SlopeRecord>,
{
    let by_key: BTreeMap<(u64, u32), &SlopeRecord> = records.into_iter().map(|r| ((r.p, r.k), r)).collect();
    let mut out = Vec::new();
    for (&(p, k), rec) in &by_key {
        for s in &rec.exceptional {
            let Some(n) = Some(s).filter(|s| is_integral(s)).and_then(|s| s.numer().to_u32()).filter(|&n| n >= 2) else {
                continue;
            };
            let links = (1..n)
                .filter(|&j| 2 * j < k)
                .map(|j| {
                    let weight = k - 2 * j;
                    let slope = Rational::from((2 * (n - j) - 1, 2));
                    let found = by_key.get(&(p, weight)).map(|r| r.lower_multiplicity(&slope));
                    TrainLink { weight, slope, found }
                })
                .collect();
            out.push(TrainCertificate { p, k, n, links });
        }
    }
    out
}

/// Finite measure on `[0, 1]` given by point masses, merged and sorted by point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    pub atoms: Vec<(Rational, Rational)>,
}

impl Measure {
    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().fold(Rational::new(), |acc, (_, m)| acc + m)
    }

    pub fn mass_at(&self, x: &Rational) -> Rational {
        self.atoms.iter().find(|(pt, _)| pt == x).map_or_else(Rational::new, |(_, m)| m.clone())
    }

    /// Invariant under `x -> 1 - x`.
    pub fn is_symmetric(&self) -> bool {
        self.atoms
            .iter()
            .all(|(x, m)| self.mass_at(&Rational::from(1 - x)) == *m)
    }
}

/// `mu_k`: mass `1/(2d)` at every supersingularity of the full sequence.
pub fn measure_mu(record: &SlopeRecord) -> Result<Measure, SlopeError> {
    if record.dim == 0 {
        return Err(SlopeError::EmptySpace(record.k));
    }
    let unit = Rational::from((1, 2 * record.dim as u64));
    let mut atoms: BTreeMap<Rational, Rational> = BTreeMap::new();
    for eta in &record.ssing {
        *atoms.entry(eta.clone()).or_default() += &unit;
    }
    Ok(Measure { atoms: atoms.into_iter().collect() })
}

/// One bin `[lo, hi)` (the last bin is closed) with its exact mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bin {
    pub lo: Rational,
    pub hi: Rational,
    pub mass: Rational,
}

/// Index of the bin containing `x` in `[0, 1]` split into `bins` pieces.
pub fn bin_index(x: &Rational, bins: usize) -> usize {
    let scaled = Integer::from(x.numer() * bins) / x.denom();
    scaled.to_usize().unwrap_or(bins).min(bins - 1)
}

/// Dimension-weighted average of the `mu_k`, binned. Records of dimension
/// zero carry no weight.
pub fn aggregate_measures<'a, I>(records: I, bins: usize) -> Vec<Bin>
where
    I: IntoIterator<Item = &'a SlopeRecord>,
{
    assert!(bins >= 1, "at least one bin");
    let mut sorted: Vec<&SlopeRecord> = records.into_iter().filter(|r| r.dim > 0).collect();
    sorted.sort_by_key(|r| (r.p, r.k));
    let total_dim: usize = sorted.iter().map(|r| r.dim).sum();
    let mut masses = vec![Rational::new(); bins];
    if total_dim > 0 {
        // d_k * mu_k puts mass 1/2 on each supersingularity.
        let unit = Rational::from((1, 2 * total_dim as u64));
        for rec in sorted {
            for eta in &rec.ssing {
                masses[bin_index(eta, bins)] += &unit;
            }
        }
    }
    masses
        .into_iter()
        .enumerate()
        .map(|(i, mass)| Bin {
            lo: Rational::from((i as u64, bins as u64)),
            hi: Rational::from((i as u64 + 1, bins as u64)),
            mass,
        })
        .collect()
}

/// `x` rounded toward zero to `places` decimals, e.g. `1/15 -> "0.066"`.
pub fn truncate_decimal(x: &Rational, places: u32) -> String {
    let scale = Integer::from(10).pow(places);
    let scaled = Integer::from(x.numer() * &scale);
    let t = Integer::from(scaled.abs_ref()) / x.denom();
    let sign = if *x < 0 && t != 0 { "-" } else { "" };
    let (int_part, frac_part) = t.div_rem(scale);
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = places as usize)
}

/// Supersingularities of the exceptional slopes of `p`, by weight, as
/// 3-place decimals truncated toward zero.
pub fn exceptional_ssing_series<'a, I>(p: u64, records: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a SlopeRecord>,
{
    let mut recs: Vec<&SlopeRecord> = records.into_iter().filter(|r| r.p == p).collect();
    recs.sort_by_key(|r| r.k);
    recs.iter()
        .flat_map(|r| {
            r.exceptional
                .iter()
                .map(move |s| truncate_decimal(&Rational::from(s / Integer::from(r.k - 1)), 3))
        })
        .collect()
}
