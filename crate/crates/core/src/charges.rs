//! The closed-form charge densities `Q_k` and the coefficient functions behind them.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::diagram::LinComb;
use crate::error::{Error, Result};
use crate::poly::{int, Rational, TauPoly};
use crate::words::{enumerate_candidates, TL1Word, WordParams};

/// Generalized binomial `n (n-1) ... (n-m+1) / m!`, zero for `m < 0`.
pub fn binom_gen(n: i64, m: i64) -> i64 {
    if m < 0 {
        return 0;
    }
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..m {
        num *= (n - i) as i128;
        den *= (i + 1) as i128;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    debug_assert_eq!(den.abs(), 1);
    (num / den) as i64
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

pub fn z_value(k: i64, w: i64, t: i64) -> i64 {
    if w > k {
        return 0;
    }
    let sign = if t.rem_euclid(2) == 0 { 1 } else { -1 };
    let up = (k + 1) / 2;
    let down = k / 2;
    sign * (binom_gen(up - t - 1, k - w) + binom_gen(down - t - 1, k - w))
}

/// `Z_k(w, t-1) + Z_k(w, t) + Z_k(w+1, t) = 0` for `0 < t < w <= max_w`, and
/// the row `w = k + 1` vanishes.
pub fn triangle_check(k: i64, max_w: i64) -> bool {
    triangle_violations(k, max_w, |w, t| int(z_value(k, w, t))).is_empty()
}

/// Every `(w, t)` where the triangle sum of `z` is nonzero, plus `(k + 1, t)`
/// for nonzero entries of the row beyond `k`.
pub fn triangle_violations(k: i64, max_w: i64, z: impl Fn(i64, i64) -> Rational) -> Vec<(i64, i64)> {
    let mut bad = Vec::new();
    for w in 2..=max_w {
        for t in 1..w {
            if !(z(w, t - 1) + z(w, t) + z(w + 1, t)).is_zero() {
                bad.push((w, t));
            }
        }
    }
    for t in 0..=k + 1 {
        if !z(k + 1, t).is_zero() {
            bad.push((k + 1, t));
        }
    }
    bad
}

/// Source of the connected coefficients `Z_k(w, t)` or, more generally, of the
/// full coefficient `C_k(w, t, v, g)` of a word.
pub trait CoefficientModel: Sync {
    fn order(&self) -> usize;

    /// `C_k(W, T)` of a connected word.
    fn connected(&self, w: i64, t: i64) -> TauPoly;

    /// `C_k(w, t, v, g) = (-τ)^g C_k(w + v + g, t + v + g)`.
    fn full(&self, p: &WordParams) -> TauPoly {
        if p.g < 0 {
            return TauPoly::zero();
        }
        let c = self.connected(p.big_w(), p.big_t());
        let s = c.shift(p.g as usize);
        if p.g % 2 == 1 {
            -s
        } else {
            s
        }
    }

    fn coefficient(&self, word: &TL1Word) -> TauPoly {
        self.full(&word.params())
    }
}

/// `C_k(w, t) = Σ_j τ^{k-w-2j} Z(w+2j, t+j)` for any table `z`.
pub fn connected_from_z(k: i64, w: i64, t: i64, z: impl Fn(i64, i64) -> Rational) -> TauPoly {
    let mut out = TauPoly::zero();
    if w < 1 {
        return out;
    }
    let mut j = 0;
    while w + 2 * j <= k {
        let zz = z(w + 2 * j, t + j);
        if !zz.is_zero() {
            out += &TauPoly::monomial(zz, (k - w - 2 * j) as usize);
        }
        j += 1;
    }
    out
}

/// The closed form.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForm {
    pub k: usize,
}

impl CoefficientModel for ClosedForm {
    fn order(&self) -> usize {
        self.k
    }

    fn connected(&self, w: i64, t: i64) -> TauPoly {
        c_connected(self.k as i64, w, t)
    }
}

/// An explicit `Z` table, zero outside `0 <= t < w <= k`.
#[derive(Clone, Debug)]
pub struct ZTable {
    pub k: usize,
    /// `rows[w][t]` for `1 <= w <= k`; `rows[0]` is unused.
    pub rows: Vec<Vec<Rational>>,
}

impl ZTable {
    pub fn closed_form(k: usize) -> Self {
        let rows = (0..=k as i64).map(|w| (0..w).map(|t| int(z_value(k as i64, w, t))).collect()).collect();
        ZTable { k, rows }
    }

    /// Solves the triangle equation downwards from a vanishing row `k + 1`,
    /// taking `Z(w, 0) = seeds[w - 1]` as the one free value per row.
    pub fn from_triangle(k: usize, seeds: &[Rational]) -> Result<Self> {
        if seeds.len() != k {
            return Err(Error::Invalid(format!("need {k} seeds, got {}", seeds.len())));
        }
        let mut rows: Vec<Vec<Rational>> = vec![Vec::new(); k + 1];
        for w in (1..=k).rev() {
            let mut row = vec![seeds[w - 1].clone()];
            for t in 1..w {
                let above = if w < k { rows[w + 1][t].clone() } else { Rational::zero() };
                let r = -(row[t - 1].clone() + above);
                row.push(r);
            }
            rows[w] = row;
        }
        Ok(ZTable { k, rows })
    }

    pub fn z(&self, w: i64, t: i64) -> Rational {
        if w < 1 || t < 0 || t >= w || w as usize > self.k {
            return Rational::zero();
        }
        self.rows[w as usize][t as usize].clone()
    }
}

impl CoefficientModel for ZTable {
    fn order(&self) -> usize {
        self.k
    }

    fn connected(&self, w: i64, t: i64) -> TauPoly {
        connected_from_z(self.k as i64, w, t, |a, b| self.z(a, b))
    }
}

/// Deterministic pseudo-random coefficients depending on `(w, t, v, g)`,
/// nonzero only when `W <= k`. Conservation fails for these, but any identity
/// that is linear in the coefficients and holds for arbitrary functions of the
/// four parameters must still hold.
#[derive(Clone, Copy, Debug)]
pub struct Arbitrary {
    pub k: usize,
    pub seed: u64,
}

impl Arbitrary {
    fn hash(&self, p: &WordParams) -> u64 {
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for x in [p.w, p.t, p.v, p.g] {
            h ^= x as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
            h ^= h >> 29;
        }
        h
    }
}

impl CoefficientModel for Arbitrary {
    fn order(&self) -> usize {
        self.k
    }

    fn connected(&self, w: i64, t: i64) -> TauPoly {
        self.full(&WordParams::new(w, t, 0, 0))
    }

    fn full(&self, p: &WordParams) -> TauPoly {
        if p.big_w() > self.k as i64 || p.w < 1 || p.t < 0 || p.v < 0 || p.g < 0 {
            return TauPoly::zero();
        }
        let h = self.hash(p);
        let coeffs: Vec<i64> = (0..3).map(|i| ((h >> (16 * i)) % 7) as i64 - 3).collect();
        TauPoly::from_ints(&coeffs)
    }
}

pub fn c_connected(k: i64, w: i64, t: i64) -> TauPoly {
    connected_from_z(k, w, t, |a, b| int(z_value(k, a, b)))
}

pub fn coefficient(k: usize, word: &TL1Word) -> TauPoly {
    ClosedForm { k }.coefficient(word)
}

/// `Δ_k(W, T) = C_k(W, T-1) + C_k(W, T) + τ C_k(W+1, T)`.
pub fn delta(k: i64, w: i64, t: i64) -> TauPoly {
    let mut out = c_connected(k, w, t - 1);
    out += &c_connected(k, w, t);
    out += &c_connected(k, w + 1, t).shift(1);
    out
}

/// Translation-invariant operator `Σ_x Σ_p c_p · (p shifted by x)`, stored by
/// representatives with minimal index 0.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ChargeDensity {
    pub k: usize,
    terms: BTreeMap<TL1Word, TauPoly>,
}

impl ChargeDensity {
    pub fn new(k: usize) -> Self {
        ChargeDensity { k, terms: BTreeMap::new() }
    }

    pub fn from_terms(k: usize, terms: impl IntoIterator<Item = (TL1Word, TauPoly)>) -> Self {
        let mut out = Self::new(k);
        for (w, c) in terms {
            out.add(&w, &c);
        }
        out
    }

    pub fn add(&mut self, word: &TL1Word, c: &TauPoly) {
        if c.is_zero() {
            return;
        }
        let key = word.normalized();
        let entry = self.terms.entry(key.clone()).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn get(&self, word: &TL1Word) -> TauPoly {
        self.terms.get(&word.normalized()).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TL1Word, &TauPoly)> {
        self.terms.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &TL1Word> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &TauPoly) -> ChargeDensity {
        ChargeDensity::from_terms(self.k, self.terms.iter().map(|(w, x)| (w.clone(), x * c)))
    }

    pub fn scale_rational(&self, c: &Rational) -> ChargeDensity {
        self.scale(&TauPoly::constant(c.clone()))
    }

    pub fn plus(&self, other: &ChargeDensity) -> ChargeDensity {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add(w, c);
        }
        out
    }

    pub fn minus(&self, other: &ChargeDensity) -> ChargeDensity {
        self.plus(&other.scale(&TauPoly::from_int(-1)))
    }

    /// Image under a word map (time reversal, reflection); coefficients follow
    /// their words.
    pub fn map_words(&self, f: impl Fn(&TL1Word) -> TL1Word) -> ChargeDensity {
        ChargeDensity::from_terms(self.k, self.terms.iter().map(|(w, c)| (f(w), c.clone())))
    }

    /// The operator restricted to translates lying in `[lo, hi)` (monoid
    /// indices), as an element of the open diagram algebra.
    pub fn embed(&self, lo: i64, hi: i64) -> LinComb {
        let mut out = LinComb::zero();
        for (w, c) in &self.terms {
            for x in lo..=hi - 1 - w.max_index() {
                out.add_assign(&LinComb::embed_word(&w.translate(x).to_general()).scale(c));
            }
        }
        out
    }

    /// Terms in display order: by length, then by word notation.
    pub fn sorted(&self) -> Vec<(TL1Word, TauPoly)> {
        self.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect()
    }

    /// Least common multiple of all coefficient denominators.
    pub fn denominator(&self) -> num_bigint::BigInt {
        let mut l = num_bigint::BigInt::one();
        for c in self.terms.values() {
            for (_, r) in c.terms() {
                l = num_integer::Integer::lcm(&l, r.denom());
            }
        }
        l
    }
}

impl fmt::Display for ChargeDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (w, c) in &self.terms {
            writeln!(f, "{}\t{}", w.notation(), c)?;
        }
        Ok(())
    }
}

pub fn build_with(model: &dyn CoefficientModel) -> ChargeDensity {
    let k = model.order();
    let words = enumerate_candidates(k);
    let terms: Vec<(TL1Word, TauPoly)> =
        words.into_par_iter().map(|w| { let c = model.coefficient(&w); (w, c) }).filter(|(_, c)| !c.is_zero()).collect();
    ChargeDensity::from_terms(k, terms)
}

/// `Q_k` from the closed form. `Q_1` is defined as `Σ e_j`; the closed form
/// would give twice that.
pub fn build_charge(k: usize) -> ChargeDensity {
    if k == 1 {
        return ChargeDensity::from_terms(1, [(TL1Word::single(0), TauPoly::one())]);
    }
    build_with(&ClosedForm { k })
}
