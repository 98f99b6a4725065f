//! Truncated q-expansions with exact integer coefficients.
//!
//! An [`IntSeries`] stores the coefficients of `q^0 .. q^(prec-1)`. Binary
//! operations truncate to the smaller of the two precisions and never extend
//! precision on their own.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::integer::Order;
use rug::ops::Pow;
use rug::Integer;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series precision must be at least 1")]
    EmptyPrecision,
    #[error("inexact division by {divisor} at q^{index}")]
    InexactDivision { index: usize, divisor: Integer },
}

/// A power series `sum a_n q^n` known modulo `q^prec`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntSeries {
    coeffs: Vec<Integer>,
}

/// Products whose operand lengths multiply to less than this use the
/// schoolbook convolution; larger ones go through Kronecker substitution.
const SCHOOLBOOK_LIMIT: usize = 48 * 48;

impl IntSeries {
    pub fn new(coeffs: Vec<Integer>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Err(SeriesError::EmptyPrecision);
        }
        Ok(IntSeries { coeffs })
    }

    /// Builds a series from small integers; panics on an empty slice.
    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Integer::from(c)).collect()).expect("nonempty coefficients")
    }

    pub fn zero(prec: usize) -> Self {
        assert!(prec >= 1, "series precision must be at least 1");
        IntSeries { coeffs: vec![Integer::new(); prec] }
    }

    pub fn one(prec: usize) -> Self {
        let mut s = Self::zero(prec);
        s.coeffs[0] = Integer::from(1);
        s
    }

    /// Number of retained coefficients.
    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, n: usize) -> &Integer {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    /// Lowest exponent with a nonzero coefficient, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != 0)
    }

    pub fn truncate(&self, prec: usize) -> Self {
        assert!(prec >= 1 && prec <= self.prec(), "truncation must keep 1..=prec terms");
        IntSeries { coeffs: self.coeffs[..prec].to_vec() }
    }

    pub fn add(&self, other: &IntSeries) -> IntSeries {
        let n = self.prec().min(other.prec());
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| Integer::from(a + b))
            .collect();
        IntSeries { coeffs }
    }

    pub fn sub(&self, other: &IntSeries) -> IntSeries {
        let n = self.prec().min(other.prec());
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| Integer::from(a - b))
            .collect();
        IntSeries { coeffs }
    }

    pub fn scale(&self, c: &Integer) -> IntSeries {
        IntSeries { coeffs: self.coeffs.iter().map(|a| Integer::from(a * c)).collect() }
    }

    /// `self -= c * other` on the common precision, in place.
    pub fn sub_mul_assign(&mut self, c: &Integer, other: &IntSeries) {
        let n = self.prec().min(other.prec());
        self.coeffs.truncate(n);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs[..n]) {
            *a -= b * c;
        }
    }

    /// Divides every coefficient by `d`, failing if any division leaves a remainder.
    pub fn div_exact(&self, d: &Integer) -> Result<IntSeries, SeriesError> {
        let mut coeffs = Vec::with_capacity(self.prec());
        for (index, a) in self.coeffs.iter().enumerate() {
            let (q, r) = a.div_rem_ref(d).into();
            let (q, r): (Integer, Integer) = (q, r);
            if r != 0 {
                return Err(SeriesError::InexactDivision { index, divisor: d.clone() });
            }
            coeffs.push(q);
        }
        Ok(IntSeries { coeffs })
    }

    /// Cauchy product truncated to the smaller precision.
    pub fn mul(&self, other: &IntSeries) -> IntSeries {
        let n = self.prec().min(other.prec());
        let coeffs = mul_truncated(&self.coeffs, &other.coeffs, n);
        IntSeries { coeffs }
    }

    pub fn square(&self) -> IntSeries {
        self.mul(self)
    }

    /// `self^e` by repeated squaring, at the precision of `self`.
    pub fn pow(&self, mut e: u32) -> IntSeries {
        let mut result = IntSeries::one(self.prec());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }
}

impl fmt::Debug for IntSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntSeries(")?;
        for (i, c) in self.coeffs.iter().enumerate().take(8) {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if self.prec() > 8 {
            write!(f, ", ...")?;
        }
        write!(f, "; O(q^{}))", self.prec())
    }
}

impl Add for &IntSeries {
    type Output = IntSeries;
    fn add(self, rhs: &IntSeries) -> IntSeries {
        IntSeries::add(self, rhs)
    }
}

impl Sub for &IntSeries {
    type Output = IntSeries;
    fn sub(self, rhs: &IntSeries) -> IntSeries {
        IntSeries::sub(self, rhs)
    }
}

impl Mul for &IntSeries {
    type Output = IntSeries;
    fn mul(self, rhs: &IntSeries) -> IntSeries {
        IntSeries::mul(self, rhs)
    }
}

impl Neg for &IntSeries {
    type Output = IntSeries;
    fn neg(self) -> IntSeries {
        IntSeries { coeffs: self.coeffs.iter().map(|a| Integer::from(-a)).collect() }
    }
}

/// First `n` coefficients of the product of two coefficient lists.
fn mul_truncated(a: &[Integer], b: &[Integer], n: usize) -> Vec<Integer> {
    let a = &a[..a.len().min(n)];
    let b = &b[..b.len().min(n)];
    let a = &a[..a.iter().rposition(|c| *c != 0).map_or(0, |i| i + 1)];
    let b = &b[..b.iter().rposition(|c| *c != 0).map_or(0, |i| i + 1)];
    if a.is_empty() || b.is_empty() {
        return vec![Integer::new(); n];
    }
    if a.len() * b.len() < SCHOOLBOOK_LIMIT {
        schoolbook(a, b, n)
    } else {
        kronecker(a, b, n)
    }
}

fn schoolbook(a: &[Integer], b: &[Integer], n: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn max_bits(xs: &[Integer]) -> u32 {
    xs.iter().map(|x| x.significant_bits()).max().unwrap_or(0)
}

/// Packs signed coefficients into one integer `sum c_i 2^(64*limbs*i)`.
fn pack(xs: &[Integer], limbs: usize) -> Integer {
    let mut pos = vec![0u64; xs.len() * limbs];
    let mut neg = vec![0u64; xs.len() * limbs];
    let mut any_neg = false;
    for (i, x) in xs.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        let target = if *x < 0 {
            any_neg = true;
            &mut neg
        } else {
            &mut pos
        };
        let slot = &mut target[i * limbs..(i + 1) * limbs];
        // `write_digits` uses the absolute value.
        x.write_digits(&mut slot[..x.significant_digits::<u64>()], Order::Lsf);
    }
    let mut packed = Integer::from_digits(&pos, Order::Lsf);
    if any_neg {
        packed -= Integer::from_digits(&neg, Order::Lsf);
    }
    packed
}

/// Product via a single big-integer multiplication. The slot width is chosen
/// so every product coefficient fits strictly inside a signed slot, which
/// makes the balanced unpacking below exact.
fn kronecker(a: &[Integer], b: &[Integer], n: usize) -> Vec<Integer> {
    let terms = a.len().min(b.len()) as u64;
    let bound_bits = u64::from(max_bits(a)) + u64::from(max_bits(b)) + (64 - terms.leading_zeros()) as u64 + 1;
    let limbs = bound_bits.div_ceil(64) as usize;
    let slot_bits = 64 * limbs as u32;

    let mut product = pack(a, limbs) * pack(b, limbs);
    let negative = product < 0;
    if negative {
        product = -product;
    }
    let total = product.significant_digits::<u64>();
    let mut digits = vec![0u64; total.max(n * limbs)];
    product.write_digits(&mut digits[..total], Order::Lsf);
    drop(product);

    let half = Integer::from(1) << (slot_bits - 1);
    let full = Integer::from(1) << slot_bits;
    let mut carry = false;
    let mut out = Vec::with_capacity(n);
    let mut c = Integer::new();
    for i in 0..n {
        c.assign_digits(&digits[i * limbs..(i + 1) * limbs], Order::Lsf);
        if carry {
            c += 1;
        }
        if c >= half {
            c -= &full;
            carry = true;
        } else {
            carry = false;
        }
        out.push(if negative { Integer::from(-&c) } else { c.clone() });
    }
    out
}

/// `sigma_r(n)` for `0 <= n < len` via a divisor sieve; entry 0 is 0.
pub fn divisor_sigma_table(r: u32, len: usize) -> Vec<Integer> {
    let mut sigma = vec![Integer::new(); len];
    for d in 1..len {
        let dr = Integer::from(d).pow(r);
        let mut m = d;
        while m < len {
            sigma[m] += &dr;
            m += d;
        }
    }
    sigma
}

fn eisenstein(prec: usize, r: u32, scale: i64) -> IntSeries {
    assert!(prec >= 1, "series precision must be at least 1");
    let mut coeffs = divisor_sigma_table(r, prec);
    coeffs[0] = Integer::from(1);
    for c in coeffs.iter_mut().skip(1) {
        *c *= scale;
    }
    IntSeries { coeffs }
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn eisenstein_e4(prec: usize) -> IntSeries {
    eisenstein(prec, 3, 240)
}

/// `E6 = 1 - 504 sum sigma_5(n) q^n`.
pub fn eisenstein_e6(prec: usize) -> IntSeries {
    eisenstein(prec, 5, -504)
}

/// The discriminant form `(E4^3 - E6^2) / 1728`, whose coefficients are
/// Ramanujan's tau function.
pub fn delta(prec: usize) -> Result<IntSeries, SeriesError> {
    let e4 = eisenstein_e4(prec);
    let e6 = eisenstein_e6(prec);
    let diff = &e4.pow(3) - &e6.square();
    diff.div_exact(&Integer::from(1728))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<Integer> {
        xs.iter().map(|&x| Integer::from(x)).collect()
    }

    // q * prod (1 - q^n)^24, expanded term by term.
    fn eta_product(prec: usize) -> Vec<Integer> {
        let mut acc = vec![Integer::new(); prec];
        acc[0] = Integer::from(1);
        for n in 1..prec {
            for _ in 0..24 {
                for m in (n..prec).rev() {
                    let t = acc[m - n].clone();
                    acc[m] -= t;
                }
            }
        }
        let mut out = vec![Integer::new(); prec];
        out[1..prec].clone_from_slice(&acc[..prec - 1]);
        out
    }

    #[test]
    fn add_cancels_and_keeps_precision() {
        let a = IntSeries::from_i64s(&[1, 1, 0, 0]);
        let b = IntSeries::from_i64s(&[1, -1, 0, 0]);
        let s = &a + &b;
        assert_eq!(s.coeffs(), ints(&[2, 0, 0, 0]).as_slice());
        assert_eq!(s.prec(), 4);
        assert_eq!(&a + &IntSeries::zero(4), a);
    }

    #[test]
    fn add_truncates_to_min_precision() {
        let a = IntSeries::from_i64s(&[1, 2, 3, 4, 5]);
        let b = IntSeries::from_i64s(&[1, 1, 1]);
        assert_eq!((&a + &b).coeffs(), ints(&[2, 3, 4]).as_slice());
        assert_eq!((&a * &b).prec(), 3);
    }

    #[test]
    fn e4_plus_e6_low_terms() {
        let s = &eisenstein_e4(5) + &eisenstein_e6(5);
        assert_eq!(*s.coeff(0), 2);
        assert_eq!(*s.coeff(1), 240 - 504);
    }

    #[test]
    fn small_products() {
        let a = IntSeries::from_i64s(&[1, 1, 0, 0]);
        let b = IntSeries::from_i64s(&[1, -1, 0, 0]);
        assert_eq!((&a * &b).coeffs(), ints(&[1, 0, -1, 0]).as_slice());
        assert_eq!(&a * &IntSeries::one(4), a);
        assert_eq!(a.pow(2).coeffs(), ints(&[1, 2, 1, 0]).as_slice());
        assert_eq!(a.pow(0), IntSeries::one(4));
    }

    #[test]
    fn e4_cubed_minus_e6_squared() {
        let e4 = eisenstein_e4(6);
        let e6 = eisenstein_e6(6);
        let d = &e4.pow(3) - &e6.square();
        assert_eq!(*d.coeff(0), 0);
        assert_eq!(*d.coeff(1), 1728);
        assert_eq!(*e4.square().coeff(1), 480);
    }

    #[test]
    fn eisenstein_low_coefficients() {
        let e4 = eisenstein_e4(3);
        assert_eq!(e4.coeffs(), ints(&[1, 240, 2160]).as_slice());
        assert_eq!(*eisenstein_e6(2).coeff(1), -504);
        assert_eq!(eisenstein_e4(1), IntSeries::one(1));
    }

    #[test]
    fn delta_matches_eta_product() {
        let d = delta(200).unwrap();
        assert_eq!(d.coeffs(), eta_product(200).as_slice());
        assert_eq!(*d.coeff(0), 0);
        assert_eq!(d.coeffs()[1..4], ints(&[1, -24, 252])[..]);
        assert_eq!(*d.coeff(6), -6048);
    }

    #[test]
    fn tau_is_multiplicative_on_coprime_pairs() {
        let d = delta(901).unwrap();
        for m in 1..=30usize {
            for n in 1..=30usize {
                if num_gcd(m, n) == 1 {
                    assert_eq!(*d.coeff(m * n), Integer::from(d.coeff(m) * d.coeff(n)), "tau({m}*{n})");
                }
            }
        }
    }

    fn num_gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { num_gcd(b, a % b) }
    }

    #[test]
    fn kronecker_agrees_with_schoolbook() {
        let e4 = eisenstein_e4(150);
        let d = delta(150).unwrap();
        let e6 = eisenstein_e6(150);
        let mixed = &(&e4 - &e6.scale(&Integer::from(7))) - &d;
        for (x, y) in [(&e4, &d), (&mixed, &e6), (&d, &mixed), (&mixed, &mixed)] {
            assert_eq!(kronecker(x.coeffs(), y.coeffs(), 150), schoolbook(x.coeffs(), y.coeffs(), 150));
        }
    }

    #[test]
    fn kronecker_handles_negative_products() {
        let a = IntSeries::from_i64s(&[-3, -1, -4, -1, -5]);
        let b = IntSeries::from_i64s(&[2, 7, -1, 8, 2]);
        assert_eq!(kronecker(a.coeffs(), b.coeffs(), 5), schoolbook(a.coeffs(), b.coeffs(), 5));
    }

    #[test]
    fn inexact_division_is_reported() {
        let s = IntSeries::from_i64s(&[6, 4, 3]);
        let err = s.div_exact(&Integer::from(2)).unwrap_err();
        assert_eq!(err, SeriesError::InexactDivision { index: 2, divisor: Integer::from(2) });
    }

    #[test]
    fn empty_series_rejected() {
        assert_eq!(IntSeries::new(Vec::new()).unwrap_err(), SeriesError::EmptyPrecision);
    }
}
