//! Independent constructions of conserved densities: logarithmic derivatives
//! of the product `Π (1 + b e_j)`, their (anti)symmetrized combinations, and
//! the boost recursion `G_{k+1} = [B, G_k]`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::charges::{build_charge, ChargeDensity};
use crate::diagram::{Diagram, LinComb, Tl1Index};
use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::{int, rat, Rational, TauPoly};
use crate::words::{enumerate_with, TL1Word};

/// Power series in `b` truncated at a fixed order; `coeffs[d]` multiplies `b^d`.
#[derive(Clone, Debug, Default)]
pub struct BSeries {
    pub coeffs: Vec<LinComb>,
}

impl BSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn mul(&self, other: &BSeries, order: usize) -> BSeries {
        let mut coeffs = vec![LinComb::zero(); order + 1];
        for (a, x) in self.coeffs.iter().enumerate() {
            for (b, y) in other.coeffs.iter().enumerate() {
                if a + b > order || x.is_zero() || y.is_zero() {
                    continue;
                }
                coeffs[a + b].add_assign(&x.par_mul(y));
            }
        }
        BSeries { coeffs }
    }

    /// `Π_{j = lo}^{hi-1} (1 + b e_j)` with `e_lo` leftmost.
    pub fn product(lo: i64, hi: i64, order: usize) -> BSeries {
        let mut coeffs = vec![LinComb::zero(); order + 1];
        coeffs[0] = LinComb::identity();
        for j in lo..hi {
            let e = LinComb::generator(j);
            for d in (1..=order).rev() {
                if coeffs[d - 1].is_zero() {
                    continue;
                }
                let t = coeffs[d - 1].mul(&e);
                coeffs[d].add_assign(&t);
            }
        }
        BSeries { coeffs }
    }

    /// `log(1 + X) = Σ_m (-1)^{m+1} X^m / m` for a series with constant term 1.
    pub fn log(&self) -> BSeries {
        let order = self.order();
        let mut x = self.clone();
        x.coeffs[0] = LinComb::zero();
        let mut out = BSeries { coeffs: vec![LinComb::zero(); order + 1] };
        let mut power = x.clone();
        for m in 1..=order {
            let c = TauPoly::constant(rat(if m % 2 == 1 { 1 } else { -1 }, m as i64));
            for d in 0..=order {
                out.coeffs[d].add_assign(&power.coeffs[d].scale(&c));
            }
            if m < order {
                power = power.mul(&x, order);
            }
        }
        out
    }
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, i| acc * int(i))
}

/// Collects the translation-invariant part of an operator on an open window:
/// every diagram whose monoids lie in `[lo, hi)` is kept, and all translates
/// of one class inside that window must carry the same coefficient.
pub fn extract_bulk(lc: &LinComb, lo: i64, hi: i64, k: usize, index: &mut Tl1Index) -> Result<ChargeDensity> {
    let mut classes: HashMap<Diagram, BTreeMap<i64, TauPoly>> = HashMap::new();
    for (d, c) in lc.iter() {
        if d.is_identity() {
            return Err(Error::NonTl1Term("identity".into()));
        }
        if d.lo() < lo || d.hi() - 1 > hi {
            continue;
        }
        classes.entry(d.normalized()).or_default().insert(d.lo(), c.clone());
    }
    let mut out = ChargeDensity::new(k);
    for (d, by_pos) in classes {
        let positions = (hi + 1 - d.hi()) - lo + 1;
        let first = by_pos.values().next().expect("nonempty").clone();
        if by_pos.len() as i64 != positions || by_pos.values().any(|c| c != &first) {
            return Err(Error::Contaminated(format!("{d}: {} of {positions} translates agree", by_pos.values().filter(|c| **c == first).count())));
        }
        let word = index.word_of(&d).ok_or_else(|| Error::NonTl1Term(d.to_string()))?;
        out.add(&word, &first);
    }
    Ok(out)
}

fn densities_from_log(log: &BSeries, lo: i64, hi: i64, k: usize) -> Result<Vec<ChargeDensity>> {
    let mut index = Tl1Index::new();
    (1..=k)
        .map(|d| Ok(extract_bulk(&log.coeffs[d], lo, hi, d, &mut index)?.scale_rational(&factorial(d))))
        .collect()
}

/// `Ã_1 … Ã_k` from the product over the open window `[0, m)`, keeping the
/// central window `[k, m - k)`.
pub fn transfer_series(k: usize, m: usize) -> Result<Vec<ChargeDensity>> {
    let min = 3 * k + 2;
    if m < min {
        return Err(Error::WindowTooSmall { k, m, min });
    }
    let log = BSeries::product(0, m as i64, k).log();
    densities_from_log(&log, k as i64, (m - k) as i64, k)
}

/// `Ã_1 … Ã_k` by inclusion–exclusion over intervals: the part of the
/// logarithm on `[0, n)` that involves both end monoids, summed over `n <= k`.
pub fn transfer_series_clustered(k: usize) -> Result<Vec<ChargeDensity>> {
    let logs: Vec<BSeries> = (0..=k as i64).map(|n| BSeries::product(0, n, k).log()).collect();
    let mut index = Tl1Index::new();
    let mut out = Vec::new();
    for d in 1..=k {
        let mut density = ChargeDensity::new(d);
        let mut collected = LinComb::zero();
        for n in 1..=d {
            let mut phi = logs[n].coeffs[d].sub(&logs[n - 1].coeffs[d].translate(1));
            phi = phi.sub(&logs[n - 1].coeffs[d]);
            if n >= 2 {
                phi.add_assign(&logs[n - 2].coeffs[d].translate(1));
            }
            for (diag, c) in phi.iter() {
                collected.add_term(diag.normalized(), c);
            }
        }
        // individual clusters may carry repeated-index diagrams that cancel
        // between cluster sizes
        for (diag, c) in collected.iter() {
            let word = index.word_of(diag).ok_or_else(|| Error::NonTl1Term(diag.to_string()))?;
            density.add(&word, c);
        }
        out.push(density.scale_rational(&factorial(d)));
    }
    Ok(out)
}

/// `A_k` together with the mixing coefficients `a_{k,i}`.
#[derive(Clone, Debug)]
pub struct ASeries {
    pub k: usize,
    pub density: ChargeDensity,
    /// `a_{k,i}` for `i = 1 ..= k/2`.
    pub mixing: Vec<TauPoly>,
    /// False when the symmetry conditions leave some `a_{k,i}` undetermined;
    /// the free coefficients are then set to zero.
    pub unique: bool,
}

/// `A_k = Ã_k/(k-1)! + Σ_i a_{k,i} Ã_{k+1-2i}` with `a_{k,i}` polynomials in
/// `τ` fixed by requiring `A_k` to be symmetric (odd `k`) or antisymmetric
/// (even `k`) under time reversal. `tilde[d - 1]` is `Ã_d`.
pub fn a_series_from(tilde: &[ChargeDensity], k: usize) -> Result<ASeries> {
    if tilde.len() < k || k == 0 {
        return Err(Error::Invalid(format!("need Ã_1..Ã_{k}, got {}", tilde.len())));
    }
    let base = tilde[k - 1].scale_rational(&factorial(k - 1).recip());
    let sign = if k % 2 == 1 { 1 } else { -1 };
    let halves = k / 2;
    // odd powers up to 2i-1 first; widen to all powers up to 2i+1 if needed
    let attempts: [Box<dyn Fn(usize) -> Vec<usize>>; 2] =
        [Box::new(|i| (1..2 * i).step_by(2).collect()), Box::new(|i| (0..=2 * i + 1).collect())];
    for powers_of in attempts.iter() {
        let unknowns: Vec<(usize, usize)> = (1..=halves).flat_map(|i| powers_of(i).into_iter().map(move |p| (i, p))).collect();
        let odd_part = |d: &ChargeDensity, w: &TL1Word| &d.get(w) - &d.get(&w.time_reverse()).scale_int(sign);
        let mut words: Vec<TL1Word> = base.words().cloned().collect();
        for i in 1..=halves {
            words.extend(tilde[k - 2 * i].words().cloned());
        }
        words.sort();
        words.dedup();
        let mut eqs: BTreeMap<(TL1Word, usize), (Vec<Rational>, Rational)> = BTreeMap::new();
        for w in &words {
            let rhs = -odd_part(&base, w);
            let cols: Vec<TauPoly> = unknowns.iter().map(|&(i, p)| odd_part(&tilde[k - 2 * i], w).shift(p)).collect();
            let top = cols.iter().chain([&rhs]).filter_map(|c| c.degree()).max();
            let Some(top) = top else { continue };
            for power in 0..=top {
                let row: Vec<Rational> = cols.iter().map(|c| c.coeff(power)).collect();
                let r = rhs.coeff(power);
                if row.iter().all(|x| x.is_zero()) && r.is_zero() {
                    continue;
                }
                eqs.insert((w.clone(), power), (row, r));
            }
        }
        let (rows, rhs): (Vec<_>, Vec<_>) = eqs.into_values().unzip();
        let Some(sol) = linalg::solve(rows, rhs, unknowns.len()) else { continue };
        let mut mixing = vec![TauPoly::zero(); halves];
        for (&(i, p), x) in unknowns.iter().zip(&sol.x) {
            mixing[i - 1] += &TauPoly::monomial(x.clone(), p);
        }
        let mut density = base.clone();
        for (i, a) in mixing.iter().enumerate() {
            density = density.plus(&tilde[k - 2 * (i + 1)].scale(a));
        }
        density.k = k;
        return Ok(ASeries { k, density, mixing, unique: sol.nullity == 0 });
    }
    Err(Error::NoSolution(format!("no (anti)symmetric combination for A_{k}")))
}

pub fn a_series(k: usize, m: usize) -> Result<ASeries> {
    a_series_from(&transfer_series(k, m)?, k)
}

pub fn a_series_clustered(k: usize) -> Result<ASeries> {
    a_series_from(&transfer_series_clustered(k)?, k)
}

/// `G_1 … G_k` with `G_1 = Σ e_j` and `G_{n+1} = [B, G_n]`, `B = Σ j e_j`, on
/// the open window `[0, m)`; densities from the central window `[k, m - k)`.
///
/// Word `[a b]` denotes `e_a · e_b` here, while the tables read products
/// right to left. `[B, G]` in their convention is `G·B - B·G` in ours.
pub fn boost_series(k: usize, m: usize) -> Result<Vec<ChargeDensity>> {
    let min = 4 * k;
    if m < min {
        return Err(Error::WindowTooSmall { k, m, min });
    }
    let mut b = LinComb::zero();
    let mut g = LinComb::zero();
    for j in 0..m as i64 {
        b.add_term(Diagram::generator(j), &TauPoly::from_int(j));
        g.add_term(Diagram::generator(j), &TauPoly::one());
    }
    let mut index = Tl1Index::new();
    let (lo, hi) = (k as i64, (m - k) as i64);
    let mut out = vec![extract_bulk(&g, lo, hi, 1, &mut index)?];
    for n in 2..=k {
        g = g.commutator(&b);
        out.push(extract_bulk(&g, lo, hi, n, &mut index)?);
    }
    Ok(out)
}

/// Coefficient of `τ^{k-w}` of every connected word, keyed by `(w, t)`;
/// errors if two connected words with equal `(w, t)` disagree.
pub fn lot_table(density: &ChargeDensity) -> Result<BTreeMap<(i64, i64), Rational>> {
    let k = density.k as i64;
    let mut out: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
    for w in enumerate_with(k, |p| p.v == 0) {
        let p = w.params();
        let lot = density.get(&w).coeff((k - p.w) as usize);
        match out.get(&(p.w, p.t)) {
            Some(prev) if prev != &lot => {
                return Err(Error::Invalid(format!("connected words with (w, t) = ({}, {}) disagree", p.w, p.t)))
            }
            _ => {
                out.insert((p.w, p.t), lot);
            }
        }
    }
    Ok(out)
}

/// `X = α Q_k + Σ_{j >= 1} β_j τ^j Q_{k-j}` with rational `α, β_j`.
#[derive(Clone, Debug, Serialize)]
pub struct SpanFit {
    pub alpha: String,
    /// `(j, β_j)` for nonzero `β_j`.
    pub betas: Vec<(usize, String)>,
    pub unique: bool,
}

pub fn span_decomposition(x: &ChargeDensity, k: usize) -> Result<SpanFit> {
    let basis: Vec<(usize, ChargeDensity)> = (0..k).map(|j| (j, build_charge(k - j).scale(&TauPoly::tau_pow(j)))).collect();
    let mut words: Vec<TL1Word> = x.words().cloned().collect();
    for (_, q) in &basis {
        words.extend(q.words().cloned());
    }
    words.sort();
    words.dedup();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for w in &words {
        let target = x.get(w);
        let cols: Vec<TauPoly> = basis.iter().map(|(_, q)| q.get(w)).collect();
        let top = cols.iter().chain([&target]).filter_map(|c| c.degree()).max().unwrap_or(0);
        for power in 0..=top {
            rows.push(cols.iter().map(|c| c.coeff(power)).collect());
            rhs.push(target.coeff(power));
        }
    }
    let sol = linalg::solve(rows, rhs, basis.len()).ok_or_else(|| Error::NoSolution(format!("not in the span of τ^j Q_{{{k}-j}}")))?;
    Ok(SpanFit {
        alpha: sol.x[0].to_string(),
        betas: sol.x.iter().enumerate().skip(1).filter(|(_, b)| !b.is_zero()).map(|(j, b)| (j, b.to_string())).collect(),
        unique: sol.nullity == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> TauPoly {
        TauPoly::parse(s).unwrap()
    }

    fn w(s: &str) -> TL1Word {
        TL1Word::parse(s).unwrap()
    }

    #[test]
    fn first_two_log_derivatives() {
        let t = transfer_series(2, 8).unwrap();
        assert_eq!(t[0].sorted(), vec![(TL1Word::single(0), TauPoly::one())]);
        assert_eq!(t[1].get(&w("[0 1]")), p("1"));
        assert_eq!(t[1].get(&w("[1 0]")), p("-1"));
        assert_eq!(t[1].get(&TL1Word::single(0)), p("-tau"));
        assert_eq!(t[1].len(), 3);
    }

    #[test]
    fn window_too_small() {
        assert_eq!(transfer_series(3, 10).unwrap_err(), Error::WindowTooSmall { k: 3, m: 10, min: 11 });
        assert!(boost_series(3, 11).is_err());
    }

    #[test]
    fn clustered_matches_direct() {
        let direct = transfer_series(4, 14).unwrap();
        let clustered = transfer_series_clustered(4).unwrap();
        assert_eq!(direct, clustered);
    }

    #[test]
    fn boost_low_orders() {
        let g = boost_series(4, 16).unwrap();
        assert_eq!(g[0].get(&TL1Word::single(0)), p("1"));
        assert_eq!(g[1].get(&w("[0 1]")), p("1"));
        assert_eq!(g[1].get(&w("[1 0]")), p("-1"));
        assert_eq!(g[3].get(&w("[0 1]")), p("2+tau^2"));
        assert_eq!(g[3].get(&w("[0 1 2]")), p("6*tau"));
        assert_eq!(g[3].get(&w("[0 1 2 3]")), p("6"));
    }

    #[test]
    fn a_two_and_four() {
        let a2 = a_series_clustered(2).unwrap();
        assert_eq!(a2.mixing, vec![TauPoly::tau()]);
        assert_eq!(a2.density.get(&w("[0 1]")), p("1"));
        let a4 = a_series_clustered(4).unwrap();
        assert_eq!(a4.density.get(&w("[0 1]")), p("-1-tau^2"));
    }
}
