//! p-adic valuations and Newton polygons of monic integer polynomials.

use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};
use thiserror::Error;

use crate::exactlinalg::CharPoly;

/// `ord_p` of an integer; zero has infinite valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

pub fn ordp(n: &Integer, p: u64) -> Valuation {
    assert!(p >= 2, "valuation base must be at least 2");
    if *n == 0 {
        return Valuation::Infinite;
    }
    if p == 2 {
        return Valuation::Finite(u64::from(n.find_one(0).expect("nonzero")));
    }
    let p = Integer::from(p);
    let mut m = n.clone();
    let v = m.remove_factor_mut(&p);
    Valuation::Finite(u64::from(v))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("zero eigenvalue / infinite slope: constant term vanishes")]
    ZeroConstantTerm,
}

/// Lower convex hull of `(i, ord_p(coeff of x^(d-i)))` for a monic polynomial
/// of degree `d`. With this orientation each segment's slope is the valuation
/// of the roots it accounts for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub p: u64,
    pub points: Vec<(usize, u64)>,
    pub vertices: Vec<(usize, u64)>,
    /// Strictly increasing slopes with their multiplicities.
    pub slopes: Vec<(Rational, usize)>,
}

impl NewtonPolygon {
    pub fn degree(&self) -> usize {
        self.slopes.iter().map(|(_, m)| m).sum()
    }

    /// Each slope repeated by its multiplicity, ascending.
    pub fn expanded(&self) -> Vec<Rational> {
        self.slopes
            .iter()
            .flat_map(|(s, m)| std::iter::repeat_n(s.clone(), *m))
            .collect()
    }

    /// `sum slope * multiplicity`, which equals the valuation of the constant term.
    pub fn slope_sum(&self) -> Rational {
        self.slopes
            .iter()
            .fold(Rational::new(), |acc, (s, m)| acc + Rational::from(s * Integer::from(*m)))
    }
}

/// Cross product of `(a - o)` and `(b - o)`.
fn cross(o: (usize, u64), a: (usize, u64), b: (usize, u64)) -> i128 {
    let (ox, oy) = (o.0 as i128, o.1 as i128);
    (a.0 as i128 - ox) * (b.1 as i128 - oy) - (a.1 as i128 - oy) * (b.0 as i128 - ox)
}

/// Vertices of the lower hull of points sorted by x (monotone chain); collinear
/// interior points are dropped.
pub fn lower_hull(points: &[(usize, u64)]) -> Vec<(usize, u64)> {
    let mut hull: Vec<(usize, u64)> = Vec::with_capacity(points.len());
    for &pt in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], pt) <= 0 {
            hull.pop();
        }
        hull.push(pt);
    }
    hull
}

pub fn newton_slopes(f: &CharPoly, p: u64) -> Result<NewtonPolygon, NewtonError> {
    newton_slopes_of(f.descending(), p)
}

/// Newton polygon of a monic polynomial given by descending coefficients.
pub fn newton_slopes_of(descending: &[Integer], p: u64) -> Result<NewtonPolygon, NewtonError> {
    assert!(descending.first().is_some_and(|c| *c == 1), "polynomial must be monic");
    if descending.last().is_some_and(|c| *c == 0) {
        return Err(NewtonError::ZeroConstantTerm);
    }
    let points: Vec<(usize, u64)> = descending
        .iter()
        .enumerate()
        .filter_map(|(i, c)| ordp(c, p).finite().map(|v| (i, v)))
        .collect();
    let vertices = lower_hull(&points);
    let slopes = vertices
        .windows(2)
        .map(|w| {
            let run = w[1].0 - w[0].0;
            let rise = w[1].1 - w[0].1;
            (Rational::from((rise, run as u64)), run)
        })
        .collect();
    Ok(NewtonPolygon { p, points, vertices, slopes })
}
