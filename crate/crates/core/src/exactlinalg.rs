//! Exact characteristic polynomials and determinants of integer matrices.

use std::fmt;

use rug::Integer;

use crate::newton::{ordp, Valuation};

/// Monic integer polynomial, coefficients stored from degree `d` down to 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharPoly {
    coeffs: Vec<Integer>,
}

impl CharPoly {
    /// Wraps descending coefficients; panics unless the leading one is 1.
    pub fn from_descending(coeffs: Vec<Integer>) -> Self {
        assert!(coeffs.first().is_some_and(|c| *c == 1), "characteristic polynomials are monic");
        CharPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients from `x^d` down to `x^0`.
    pub fn descending(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Coefficient of `x^i`.
    pub fn coeff(&self, i: usize) -> &Integer {
        &self.coeffs[self.degree() - i]
    }

    pub fn constant_term(&self) -> &Integer {
        self.coeffs.last().expect("nonempty")
    }

    pub fn eval(&self, x: &Integer) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |acc, c| acc * x + c)
    }
}

impl fmt::Debug for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d - i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                e => write!(f, "({c})x^{e}")?,
            }
        }
        Ok(())
    }
}

fn assert_square(m: &[Vec<Integer>]) {
    assert!(m.iter().all(|row| row.len() == m.len()), "matrix must be square");
}

/// `det(xI - m)` by Berkowitz's division-free recurrence.
///
/// Bordering the leading `r x r` block with column `s`, row `t` and corner
/// `a`, the new polynomial is the product of the old one with the sequence
/// `1, -a, -t s, -t A s, -t A^2 s, ...` (truncated to degree `r`).
pub fn char_poly(m: &[Vec<Integer>]) -> CharPoly {
    assert_square(m);
    let n = m.len();
    let mut poly = vec![Integer::from(1)];
    for r in 0..n {
        // Leading block is m[0..r][0..r]; border is column m[..r][r], row m[r][..r].
        let mut seq = Vec::with_capacity(r + 2);
        seq.push(Integer::from(1));
        seq.push(Integer::from(-&m[r][r]));
        let mut v: Vec<Integer> = (0..r).map(|i| m[i][r].clone()).collect();
        for j in 0..r {
            let dot = dot_row(&m[r][..r], &v);
            seq.push(-dot);
            if j + 1 < r {
                v = (0..r).map(|i| dot_row(&m[i][..r], &v)).collect();
            }
        }
        poly = convolve_prefix(&seq, &poly, r + 2);
    }
    CharPoly { coeffs: poly }
}

fn dot_row(row: &[Integer], v: &[Integer]) -> Integer {
    let mut acc = Integer::new();
    for (a, b) in row.iter().zip(v) {
        if *a != 0 && *b != 0 {
            acc += a * b;
        }
    }
    acc
}

fn convolve_prefix(a: &[Integer], b: &[Integer], len: usize) -> Vec<Integer> {
    (0..len)
        .map(|i| {
            let mut acc = Integer::new();
            for j in 0..=i {
                if let (Some(x), Some(y)) = (a.get(j), b.get(i - j)) {
                    acc += x * y;
                }
            }
            acc
        })
        .collect()
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn det_bareiss(m: &[Vec<Integer>]) -> Integer {
    assert_square(m);
    let n = m.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut a: Vec<Vec<Integer>> = m.to_vec();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                a[i][j] = t.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

pub fn trace(m: &[Vec<Integer>]) -> Integer {
    m.iter().enumerate().fold(Integer::new(), |acc, (i, row)| acc + &row[i])
}

/// `ord_p(det m)`, read from the constant term of the characteristic polynomial.
pub fn det_valuation(m: &[Vec<Integer>], p: u64) -> Valuation {
    ordp(char_poly(m).constant_term(), p)
}
