//! Independent oracles shared by the integration tests. Nothing here calls
//! into the arithmetic being checked.

#![allow(dead_code)]

use rug::ops::Pow;
use rug::{Integer, Rational};

/// `q * prod_{n>=1} (1 - q^n)^24` to `len` terms, by repeated
/// multiplication with `(1 - q^n)`.
pub fn eta_delta(len: usize) -> Vec<Integer> {
    let mut prod = vec![Integer::new(); len];
    if len < 2 {
        return prod;
    }
    // prod holds prod (1 - q^n)^24 shifted by one.
    prod[1] = Integer::from(1);
    for n in 1..len {
        for _ in 0..24 {
            for i in (n + 1..len).rev() {
                let t = prod[i - n].clone();
                prod[i] -= t;
            }
        }
    }
    prod
}

/// Polynomials in `x` with rational coefficients, ascending.
pub type RPoly = Vec<Rational>;

fn poly_mul(a: &RPoly, b: &RPoly) -> RPoly {
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    out
}

fn poly_add_assign(a: &mut RPoly, b: &RPoly, sign: i32) {
    if a.len() < b.len() {
        a.resize(b.len(), Rational::new());
    }
    for (i, y) in b.iter().enumerate() {
        if sign > 0 {
            a[i] += y;
        } else {
            a[i] -= y;
        }
    }
}

/// Laplace expansion of a matrix of polynomials along the first row.
fn cofactor_det(m: &[Vec<RPoly>]) -> RPoly {
    let n = m.len();
    if n == 0 {
        return vec![Rational::from(1)];
    }
    let mut acc: RPoly = vec![Rational::new()];
    for j in 0..n {
        let minor: Vec<Vec<RPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, e)| e.clone()).collect())
            .collect();
        let term = poly_mul(&m[0][j], &cofactor_det(&minor));
        poly_add_assign(&mut acc, &term, if j % 2 == 0 { 1 } else { -1 });
    }
    acc
}

/// `det(xI - m)` by cofactor expansion, descending coefficients.
pub fn charpoly_cofactor(m: &[Vec<Rational>]) -> Vec<Rational> {
    let n = m.len();
    let entries: Vec<Vec<RPoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = Rational::from(-&m[i][j]);
                    if i == j {
                        vec![c, Rational::from(1)]
                    } else {
                        vec![c]
                    }
                })
                .collect()
        })
        .collect();
    let mut asc = cofactor_det(&entries);
    asc.resize(n + 1, Rational::new());
    asc.reverse();
    asc
}

pub fn to_rational_matrix(m: &[Vec<Integer>]) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.iter().map(Rational::from).collect()).collect()
}

/// A polynomial with known root valuations: the product of factors
/// `x^m - p^a u` with `p` not dividing `u`, whose `m` roots all have
/// valuation `a/m`.
/// Returns descending integer coefficients and the expected sorted slopes.
pub fn constructed_polynomial(p: u64, factors: &[(u32, u32, i64)]) -> (Vec<Integer>, Vec<Rational>) {
    let mut asc: Vec<Integer> = vec![Integer::from(1)];
    let mut slopes = Vec::new();
    for &(m, a, unit) in factors {
        assert!(m >= 1 && unit % p as i64 != 0);
        let mut f = vec![Integer::new(); m as usize + 1];
        f[0] = -Integer::from(p).pow(a) * unit;
        f[m as usize] = Integer::from(1);
        let mut out = vec![Integer::new(); asc.len() + f.len() - 1];
        for (i, x) in asc.iter().enumerate() {
            for (j, y) in f.iter().enumerate() {
                out[i + j] += Integer::from(x * y);
            }
        }
        asc = out;
        for _ in 0..m {
            slopes.push(Rational::from((a, m)));
        }
    }
    asc.reverse();
    slopes.sort();
    (asc, slopes)
}

/// Largest `e` with `p^e | n`, by repeated division; `None` for zero.
pub fn naive_ordp(n: &Integer, p: u64) -> Option<u32> {
    if *n == 0 {
        return None;
    }
    let mut n = Integer::from(n.abs_ref());
    let mut e = 0;
    while n.is_divisible_u(p as u32) {
        n /= p as u32;
        e += 1;
    }
    Some(e)
}

/// Cusp form dimension from the classical formula.
pub fn dim_formula(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base - 1
    } else {
        base
    }
}
