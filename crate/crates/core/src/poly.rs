//! Exact Laurent polynomials in one variable `A` with integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

/// Sparse Laurent polynomial; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPolynomial {
    terms: BTreeMap<i32, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("bad polynomial term `{0}`")]
pub struct PolyParseError(pub String);

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(coef: i64, exp: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(coef, exp);
        p
    }

    /// `-A^2 - A^-2`, the value of a trivial loop.
    pub fn delta() -> Self {
        Self::monomial(-1, 2) + Self::monomial(-1, -2)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: i32) -> i64 {
        self.terms.get(&exp).copied().unwrap_or(0)
    }

    /// Terms `(exponent, coefficient)` in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn add_term(&mut self, coef: i64, exp: i32) {
        if coef == 0 {
            return;
        }
        let slot = self.terms.entry(exp).or_insert(0);
        *slot += coef;
        if *slot == 0 {
            self.terms.remove(&exp);
        }
    }

    /// Multiplies by `coef * A^exp`.
    pub fn scale(&self, coef: i64, exp: i32) -> Self {
        if coef == 0 {
            return Self::zero();
        }
        LaurentPolynomial { terms: self.terms.iter().map(|(&e, &c)| (e + exp, c * coef)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}:{e}")?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPolynomial {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut p = Self::zero();
        if s == "0" {
            return Ok(p);
        }
        for term in s.split(';') {
            let bad = || PolyParseError(term.to_string());
            let (c, e) = term.split_once(':').ok_or_else(bad)?;
            let c: i64 = c.parse().map_err(|_| bad())?;
            let e: i32 = e.parse().map_err(|_| bad())?;
            if c == 0 || p.terms.contains_key(&e) {
                return Err(bad());
            }
            p.add_term(c, e);
        }
        Ok(p)
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(c, e);
        }
        out
    }
}

impl Add for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: LaurentPolynomial) -> LaurentPolynomial {
        &self + &rhs
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.scale(-1, 0)
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = LaurentPolynomial::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(c1 * c2, e1 + e2);
            }
        }
        out
    }
}

impl Mul for LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: LaurentPolynomial) -> LaurentPolynomial {
        &self * &rhs
    }
}
