//! Level-one cusp spaces: dimensions, the monomial basis `Delta E4^a E6^b`,
//! the echelonized integral (Miller) basis, and matrices of `T_p`.

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::qseries::{delta, eisenstein_e4, eisenstein_e6, IntSeries, SeriesError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModFormsError {
    #[error("weight {0} is odd; level-one forms have even weight")]
    OddWeight(u32),
    #[error("weight {0} is negative or too small for cusp forms")]
    BadWeight(u32),
    #[error("precision {have} is too small: {what} needs at least {need} coefficients")]
    InsufficientPrecision { have: usize, need: usize, what: &'static str },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("leading block of the monomial basis is singular at weight {0}")]
    SingularLeadingBlock(u32),
    #[error("echelon basis at weight {k} has a non-integral coefficient at q^{index} of form {form}")]
    NonIntegral { k: u32, form: usize, index: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Pairs `(a, b)` with `4a + 6b = w`, ordered by decreasing `a`.
fn exponent_pairs(w: u32) -> Vec<(u32, u32)> {
    (0..=w / 4)
        .rev()
        .filter(|a| (w - 4 * a).is_multiple_of(6))
        .map(|a| (a, (w - 4 * a) / 6))
        .collect()
}

/// Dimension of the space of level-one cusp forms of weight `k`.
pub fn cusp_dim(k: u32) -> Result<usize, ModFormsError> {
    if k % 2 == 1 {
        return Err(ModFormsError::OddWeight(k));
    }
    if k < 12 {
        return Ok(0);
    }
    Ok(exponent_pairs(k - 12).len())
}

fn check_weight(k: u32) -> Result<usize, ModFormsError> {
    let d = cusp_dim(k)?;
    if k < 12 {
        return Err(ModFormsError::BadWeight(k));
    }
    Ok(d)
}

/// Minimal precision for reading off `T_p` on a space of dimension `d`.
pub fn required_precision(d: usize, p: u64) -> usize {
    d * p as usize + 1
}

/// `Delta E4^a E6^b` for all `4a + 6b = k - 12`, ordered by decreasing `a`.
pub fn monomial_basis(k: u32, prec: usize) -> Result<Vec<IntSeries>, ModFormsError> {
    let d = check_weight(k)?;
    if prec < d + 1 {
        return Err(ModFormsError::InsufficientPrecision { have: prec, need: d + 1, what: "monomial basis" });
    }
    let pairs = exponent_pairs(k - 12);
    let delta = delta(prec)?;
    let e4 = eisenstein_e4(prec);
    let e6 = eisenstein_e6(prec);
    let mut e4_pows = vec![IntSeries::one(prec)];
    let mut e6_pows = vec![IntSeries::one(prec)];
    let max_a = pairs.first().map_or(0, |&(a, _)| a) as usize;
    let max_b = pairs.last().map_or(0, |&(_, b)| b) as usize;
    while e4_pows.len() <= max_a {
        let next = e4_pows.last().unwrap().mul(&e4);
        e4_pows.push(next);
    }
    while e6_pows.len() <= max_b {
        let next = e6_pows.last().unwrap().mul(&e6);
        e6_pows.push(next);
    }
    Ok(pairs
        .iter()
        .map(|&(a, b)| delta.mul(&e4_pows[a as usize]).mul(&e6_pows[b as usize]))
        .collect())
}

/// Weight-`k` cusp space with the echelon basis `f_i = q^i + O(q^(d+1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspSpace {
    pub weight: u32,
    pub basis: Vec<IntSeries>,
    pub prec: usize,
}

impl CuspSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn empty(weight: u32, prec: usize) -> Self {
        CuspSpace { weight, basis: Vec::new(), prec }
    }

    /// The coefficients of `q^1..q^d` form the identity matrix.
    pub fn has_identity_block(&self) -> bool {
        let d = self.dim();
        self.basis
            .iter()
            .enumerate()
            .all(|(i, f)| (1..=d).all(|j| *f.coeff(j) == i32::from(i + 1 == j)))
    }
}

/// Which spanning set is reduced to produce the echelon basis. Both give the
/// same space (the reduced echelon form of a space is unique).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisRoute {
    /// Row-reduce the monomial basis `Delta E4^a E6^b` over the rationals.
    Monomial,
    /// Reduce `Delta^i A (E6^2)^(d-i)`, which is already unitriangular, using
    /// integer back-substitution only.
    #[default]
    DeltaPowers,
}

/// Echelonized integral basis of the weight-`k` cusp space.
pub fn miller_basis(k: u32, prec: usize) -> Result<CuspSpace, ModFormsError> {
    miller_basis_via(k, prec, BasisRoute::Monomial)
}

pub fn miller_basis_via(k: u32, prec: usize, route: BasisRoute) -> Result<CuspSpace, ModFormsError> {
    if k % 2 == 1 {
        return Err(ModFormsError::OddWeight(k));
    }
    if k < 12 || cusp_dim(k)? == 0 {
        return Ok(CuspSpace::empty(k, prec));
    }
    let d = cusp_dim(k)?;
    if prec < d + 1 {
        return Err(ModFormsError::InsufficientPrecision { have: prec, need: d + 1, what: "echelon basis" });
    }
    let basis = match route {
        BasisRoute::Monomial => echelon_from_monomials(k, prec)?,
        BasisRoute::DeltaPowers => echelon_from_delta_powers(k, prec)?,
    };
    Ok(CuspSpace { weight: k, basis, prec })
}

/// Gauss-Jordan over Q on the leading `d x d` block, then applies the inverse
/// to the full series and checks the result is integral.
fn echelon_from_monomials(k: u32, prec: usize) -> Result<Vec<IntSeries>, ModFormsError> {
    let monomials = monomial_basis(k, prec)?;
    let d = monomials.len();
    // Augmented [A | I] with A[i][j] = coefficient of q^(j+1) in monomial i.
    let mut aug: Vec<Vec<Rational>> = monomials
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut row: Vec<Rational> = (1..=d).map(|j| Rational::from(m.coeff(j))).collect();
            row.extend((0..d).map(|j| Rational::from(i32::from(i == j))));
            row
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d)
            .find(|&r| aug[r][col] != 0)
            .ok_or(ModFormsError::SingularLeadingBlock(k))?;
        aug.swap(col, pivot);
        let inv = Rational::from(aug[col][col].recip_ref());
        for x in aug[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let factor = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= Rational::from(&factor * y);
            }
        }
    }
    // Row i of the inverse gives f_i as a rational combination of monomials;
    // clear denominators, combine in integers, then divide exactly.
    let mut basis = Vec::with_capacity(d);
    for (i, row) in aug.iter().enumerate() {
        let inv_row = &row[d..];
        let mut den = Integer::from(1);
        for x in inv_row {
            den.lcm_mut(x.denom());
        }
        let mut acc = vec![Integer::new(); prec];
        for (x, m) in inv_row.iter().zip(&monomials) {
            if *x == 0 {
                continue;
            }
            let c = x.numer() * Integer::from(&den / x.denom());
            for (a, b) in acc.iter_mut().zip(m.coeffs()) {
                *a += &c * b;
            }
        }
        let mut coeffs = Vec::with_capacity(prec);
        for (index, a) in acc.into_iter().enumerate() {
            let (q, r): (Integer, Integer) = a.div_rem_ref(&den).into();
            if r != 0 {
                return Err(ModFormsError::NonIntegral { k, form: i + 1, index });
            }
            coeffs.push(q);
        }
        basis.push(IntSeries::new(coeffs)?);
    }
    Ok(basis)
}

/// Weight-`r` Eisenstein product with constant term 1, `r` in {0,4,6,8,10,14}.
fn leading_factor(r: u32, prec: usize) -> IntSeries {
    let (a, b) = exponent_pairs(r).into_iter().next().expect("r admits an E4/E6 monomial");
    eisenstein_e4(prec).pow(a).mul(&eisenstein_e6(prec).pow(b))
}

fn echelon_from_delta_powers(k: u32, prec: usize) -> Result<Vec<IntSeries>, ModFormsError> {
    let d = cusp_dim(k)?;
    let r = k - 12 * d as u32;
    let delta = delta(prec)?;
    let e6_sq = eisenstein_e6(prec).square();
    // tails[j] = A (E6^2)^j, weight r + 12 j
    let mut tails = Vec::with_capacity(d);
    tails.push(leading_factor(r, prec));
    for j in 1..d {
        let next = tails[j - 1].mul(&e6_sq);
        tails.push(next);
    }
    let mut gens = Vec::with_capacity(d);
    let mut delta_pow = delta.clone();
    for i in 1..=d {
        if i > 1 {
            delta_pow = delta_pow.mul(&delta);
        }
        gens.push(delta_pow.mul(&tails[d - i]));
    }
    drop(tails);
    // gens[i-1] = q^i + ...; clear entries above the diagonal from the bottom up.
    for i in (0..d).rev() {
        for j in i + 1..d {
            let c = gens[i].coeff(j + 1).clone();
            if c != 0 {
                let (head, tail) = gens.split_at_mut(j);
                head[i].sub_mul_assign(&c, &tail[0]);
            }
        }
    }
    Ok(gens)
}

/// Matrix of `T_p` on the echelon basis: row `i` holds the coefficients
/// `q^1..q^d` of `T_p f_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeMatrix {
    pub p: u64,
    pub k: u32,
    pub entries: Vec<Vec<Integer>>,
}

impl HeckeMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// Coefficient `n` of `T_p f` for a weight-`k` form `f`:
/// `a_{np} + p^(k-1) a_{n/p}`.
fn hecke_coefficient(f: &IntSeries, n: usize, p: u64, p_km1: &Integer) -> Integer {
    let pu = p as usize;
    let mut c = f.coeff(n * pu).clone();
    if n.is_multiple_of(pu) {
        c += p_km1 * f.coeff(n / pu);
    }
    c
}

pub fn hecke_matrix(space: &CuspSpace, p: u64) -> Result<HeckeMatrix, ModFormsError> {
    if !is_prime(p) {
        return Err(ModFormsError::NotPrime(p));
    }
    let d = space.dim();
    let need = required_precision(d, p);
    if d > 0 && space.prec < need {
        return Err(ModFormsError::InsufficientPrecision { have: space.prec, need, what: "Hecke matrix" });
    }
    let p_km1 = Integer::from(p).pow(space.weight - 1);
    let entries = space
        .basis
        .iter()
        .map(|f| (1..=d).map(|n| hecke_coefficient(f, n, p, &p_km1)).collect())
        .collect();
    Ok(HeckeMatrix { p, k: space.weight, entries })
}

/// Matrix of `T_p` computed against the raw monomial basis: coordinates are
/// found by solving against the leading block over Q. Independent of the
/// echelon basis; used to cross-check it.
pub fn hecke_matrix_monomial(k: u32, p: u64) -> Result<Vec<Vec<Rational>>, ModFormsError> {
    if !is_prime(p) {
        return Err(ModFormsError::NotPrime(p));
    }
    let d = check_weight(k)?;
    let prec = required_precision(d, p);
    let monomials = monomial_basis(k, prec)?;
    let p_km1 = Integer::from(p).pow(k - 1);
    // Leading block B (rows = monomials) and images T (rows = T_p monomial).
    let block: Vec<Vec<Rational>> = monomials
        .iter()
        .map(|m| (1..=d).map(|j| Rational::from(m.coeff(j))).collect())
        .collect();
    let images: Vec<Vec<Rational>> = monomials
        .iter()
        .map(|m| (1..=d).map(|n| Rational::from(hecke_coefficient(m, n, p, &p_km1))).collect())
        .collect();
    // Coordinates X with X B = T, i.e. X = T B^{-1}.
    let inv = invert(block).ok_or(ModFormsError::SingularLeadingBlock(k))?;
    Ok(images
        .iter()
        .map(|row| {
            (0..d)
                .map(|j| {
                    row.iter()
                        .zip(&inv)
                        .fold(Rational::new(), |acc, (x, inv_row)| acc + Rational::from(x * &inv_row[j]))
                })
                .collect()
        })
        .collect())
}

fn invert(mut m: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let d = m.len();
    for (i, row) in m.iter_mut().enumerate() {
        row.extend((0..d).map(|j| Rational::from(i32::from(i == j))));
    }
    for col in 0..d {
        let pivot = (col..d).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        let inv = Rational::from(m[col][col].recip_ref());
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col] == 0 {
                continue;
            }
            let factor = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= Rational::from(&factor * y);
            }
        }
    }
    Some(m.into_iter().map(|row| row[d..].to_vec()).collect())
}
