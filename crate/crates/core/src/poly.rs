//! Exact polynomials in the loop weight τ with rational coefficients.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Dense coefficient vector, index = power of τ. Trailing zeros are never stored,
/// so the zero polynomial is the empty vector and equality is coefficient-wise.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct TauPoly {
    coeffs: Vec<Rational>,
}

impl TauPoly {
    pub fn zero() -> Self {
        TauPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn tau() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(int(c))
    }

    pub fn monomial(c: Rational, power: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); power + 1];
        coeffs[power] = c;
        TauPoly { coeffs }
    }

    /// `τ^power`
    pub fn tau_pow(power: usize) -> Self {
        Self::monomial(Rational::one(), power)
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut p = TauPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, power: usize) -> Rational {
        self.coeffs.get(power).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Nonzero `(power, coefficient)` pairs in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        TauPoly { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.scale(&int(c))
    }

    pub fn shift(&self, power: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); power];
        coeffs.extend(self.coeffs.iter().cloned());
        TauPoly { coeffs }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn eval_f64(&self, tau: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_rational(&self, tau: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * tau + c)
    }

    pub fn eval_complex(&self, tau: num_complex::Complex64) -> num_complex::Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(num_complex::Complex64::new(0.0, 0.0), |acc, c| acc * tau + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Even or odd part selector: true if every nonzero power has the given parity.
    pub fn has_parity(&self, parity: usize) -> bool {
        self.terms().all(|(p, _)| p % 2 == parity % 2)
    }

    /// `[["-2", 0], ["1", 2]]`-style pairs used by the JSON export.
    pub fn to_pairs(&self) -> Vec<(String, usize)> {
        self.terms().map(|(p, c)| (c.to_string(), p)).collect()
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        parse_poly(s)
    }
}

impl From<i64> for TauPoly {
    fn from(c: i64) -> Self {
        Self::from_int(c)
    }
}

impl From<Rational> for TauPoly {
    fn from(c: Rational) -> Self {
        Self::constant(c)
    }
}

impl AddAssign<&TauPoly> for TauPoly {
    fn add_assign(&mut self, rhs: &TauPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self.trim();
    }
}

impl SubAssign<&TauPoly> for TauPoly {
    fn sub_assign(&mut self, rhs: &TauPoly) {
        if self.coeffs.len() < rhs.coeffs.len() {
            self.coeffs.resize(rhs.coeffs.len(), Rational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self.trim();
    }
}

impl Add<&TauPoly> for &TauPoly {
    type Output = TauPoly;
    fn add(self, rhs: &TauPoly) -> TauPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for TauPoly {
    type Output = TauPoly;
    fn add(mut self, rhs: TauPoly) -> TauPoly {
        self += &rhs;
        self
    }
}

impl Sub<&TauPoly> for &TauPoly {
    type Output = TauPoly;
    fn sub(self, rhs: &TauPoly) -> TauPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for TauPoly {
    type Output = TauPoly;
    fn sub(mut self, rhs: TauPoly) -> TauPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &TauPoly {
    type Output = TauPoly;
    fn neg(self) -> TauPoly {
        TauPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for TauPoly {
    type Output = TauPoly;
    fn neg(self) -> TauPoly {
        -&self
    }
}

impl Mul<&TauPoly> for &TauPoly {
    type Output = TauPoly;
    fn mul(self, rhs: &TauPoly) -> TauPoly {
        if self.is_zero() || rhs.is_zero() {
            return TauPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        TauPoly::from_coeffs(coeffs)
    }
}

impl Mul for TauPoly {
    type Output = TauPoly;
    fn mul(self, rhs: TauPoly) -> TauPoly {
        &self * &rhs
    }
}

impl fmt::Display for TauPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.terms() {
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            first = false;
            let tau = match p {
                0 => String::new(),
                1 => "tau".to_string(),
                _ => format!("tau^{p}"),
            };
            if p == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{tau}")?;
            } else {
                write!(f, "{mag}*{tau}")?;
            }
        }
        Ok(())
    }
}

/// Grammar: terms joined by `+`/`-`; each term is `c`, `c*tau`, `c*tau^n`, `tau^n`,
/// `tau/d`; `c` is an integer or `p/q`. Whitespace and the letter `τ` are accepted.
fn parse_poly(src: &str) -> Result<TauPoly, Error> {
    let s: String = src.replace('τ', "tau").chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse(format!("empty polynomial '{src}'")));
    }
    let bytes = s.as_bytes();
    let mut out = TauPoly::zero();
    let mut i = 0;
    let bad = |msg: &str| Error::Parse(format!("{msg} in polynomial '{src}'"));
    while i < bytes.len() {
        let mut sign = 1i64;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -1;
            }
            i += 1;
        } else if i != 0 {
            return Err(bad("expected sign"));
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let term = &s[start..i];
        if term.is_empty() {
            return Err(bad("empty term"));
        }
        let (mut coef, mut power) = (int(sign), 0usize);
        for factor in term.split('*') {
            let (base, div) = match factor.split_once('/') {
                Some((b, d)) => (b, Some(d)),
                None => (factor, None),
            };
            if let Some(rest) = base.strip_prefix("tau") {
                power += match rest.strip_prefix('^') {
                    Some(e) => e.parse::<usize>().map_err(|_| bad("bad exponent"))?,
                    None if rest.is_empty() => 1,
                    None => return Err(bad("bad tau factor")),
                };
            } else {
                let n: BigInt = base.parse().map_err(|_| bad("bad number"))?;
                coef *= BigRational::from_integer(n);
            }
            if let Some(d) = div {
                let d: BigInt = d.parse().map_err(|_| bad("bad denominator"))?;
                if d.is_zero() {
                    return Err(bad("zero denominator"));
                }
                coef /= BigRational::from_integer(d);
            }
        }
        out += &TauPoly::monomial(coef, power);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_round_trip() {
        let p = TauPoly::from_ints(&[2, 0, -2]);
        assert_eq!(p.to_string(), "2-2*tau^2");
        assert_eq!(TauPoly::parse("2-2*tau^2").unwrap(), p);
        assert_eq!(TauPoly::parse("-tau").unwrap(), -TauPoly::tau());
        assert_eq!(TauPoly::parse("tau/2").unwrap(), TauPoly::monomial(rat(1, 2), 1));
        assert_eq!(TauPoly::parse("5/2*tau^3").unwrap(), TauPoly::monomial(rat(5, 2), 3));
        assert_eq!(TauPoly::parse("0").unwrap(), TauPoly::zero());
        assert!(TauPoly::parse("2+").is_err());
        assert!(TauPoly::parse("x").is_err());
    }

    #[test]
    fn arithmetic() {
        let a = TauPoly::parse("1+tau").unwrap();
        let b = TauPoly::parse("1-tau").unwrap();
        assert_eq!(&a * &b, TauPoly::parse("1-tau^2").unwrap());
        assert!((&a - &a).is_zero());
        assert_eq!(a.eval_f64(2.0), 3.0);
        assert_eq!(TauPoly::tau().pow(3), TauPoly::tau_pow(3));
    }
}
