//! Symbolic checks of `[Q_k, H] = 0`: the commutator density in the diagram
//! algebra, the per-word coefficient `S_k(p)` by direct enumeration and by
//! environment codes, and the linear identities among the code contributions.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::charges::{ChargeDensity, ClosedForm, CoefficientModel};
use crate::diagram::{Diagram, Tl1Index};
use crate::error::{Error, Result};
use crate::poly::TauPoly;
use crate::words::{enumerate_with, EnvCode, GeneralWord, MonoidIndex, TL1Word, WordParams};

/// `Σ_q Σ_δ D(q) (q e_δ - e_δ q)` keyed by translation-normalized diagrams.
#[derive(Clone, Debug, Default)]
pub struct CommutatorDensity {
    pub k: usize,
    pub terms: HashMap<Diagram, TauPoly>,
    /// Every normalized diagram produced by some product, including those
    /// whose coefficients cancelled.
    pub touched: HashSet<Diagram>,
}

impl CommutatorDensity {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, d: &Diagram) -> TauPoly {
        self.terms.get(&d.normalized()).cloned().unwrap_or_default()
    }

    fn add(&mut self, d: Diagram, c: TauPoly) {
        self.touched.insert(d.clone());
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d.clone()).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }

    fn merge(self, other: CommutatorDensity) -> CommutatorDensity {
        let (mut big, small) = if self.touched.len() >= other.touched.len() { (self, other) } else { (other, self) };
        for (d, c) in small.terms {
            big.add(d, c);
        }
        big.touched.extend(small.touched);
        big
    }
}

/// The commutator of `density` with `Σ_j e_j`; empty iff the density is
/// conserved.
pub fn commutator_density_of(density: &ChargeDensity) -> CommutatorDensity {
    let terms: Vec<(&TL1Word, &TauPoly)> = density.iter().collect();
    let mut out = terms
        .par_iter()
        .fold(CommutatorDensity::default, |mut acc, (q, c)| {
            let dq = Diagram::of_tl1(q);
            for delta in q.min_index() - 1..=q.max_index() + 1 {
                let e = Diagram::generator(delta);
                let (right, lr) = dq.compose(&e);
                acc.add(right.normalized(), c.shift(lr));
                let (left, ll) = e.compose(&dq);
                acc.add(left.normalized(), -c.shift(ll));
            }
            acc
        })
        .reduce(CommutatorDensity::default, CommutatorDensity::merge);
    out.k = density.k;
    out
}

pub fn commutator_density(k: usize) -> CommutatorDensity {
    commutator_density_of(&crate::charges::build_charge(k))
}

/// Splits the touched set into single-occurrence words and the rest.
pub fn reachable_words(cd: &CommutatorDensity) -> (Vec<TL1Word>, Vec<Diagram>) {
    let mut index = Tl1Index::new();
    let max = cd.touched.iter().map(|d| d.width()).max().unwrap_or(0);
    index.prepare(max);
    let mut words = Vec::new();
    let mut other = Vec::new();
    for d in &cd.touched {
        if d.is_identity() {
            other.push(d.clone());
            continue;
        }
        match index.lookup(d) {
            Some(w) => words.push(w),
            None => other.push(d.clone()),
        }
    }
    words.sort();
    other.sort();
    (words, other)
}

fn subsets(items: &[MonoidIndex]) -> Vec<Vec<MonoidIndex>> {
    (0..1u32 << items.len()).map(|m| items.iter().enumerate().filter(|(b, _)| m >> b & 1 == 1).map(|(_, &x)| x).collect()).collect()
}

/// `S(p) = Σ_{p = q e_σ} D(q) - Σ_{p = e_σ q} D(q)` for a single-occurrence
/// word `p`, by enumerating every `q` that differs from `p` only around `σ`.
pub fn s_direct(model: &dyn CoefficientModel, p: &TL1Word) -> TauPoly {
    let target = Diagram::of_tl1(p);
    let mut out = TauPoly::zero();
    for sigma in p.min_index() - 1..=p.max_index() + 1 {
        let near = [sigma - 1, sigma, sigma + 1];
        let base: Vec<MonoidIndex> = p.support().iter().copied().filter(|i| !near.contains(i)).collect();
        let e = Diagram::generator(sigma);
        for extra in subsets(&near) {
            let mut support = base.clone();
            support.extend(extra);
            if support.is_empty() {
                continue;
            }
            support.sort();
            let pairs: Vec<MonoidIndex> = support.windows(2).filter(|w| w[1] == w[0] + 1).map(|w| w[0]).collect();
            let fixed: Vec<MonoidIndex> =
                pairs.iter().copied().filter(|&j| !(sigma - 2..=sigma + 1).contains(&j) && p.transposed(j) == Some(true)).collect();
            let free: Vec<MonoidIndex> = pairs.iter().copied().filter(|&j| (sigma - 2..=sigma + 1).contains(&j)).collect();
            for chosen in subsets(&free) {
                let mut transposed = fixed.clone();
                transposed.extend(chosen);
                let q = TL1Word::new(&support, &transposed).expect("valid candidate");
                let c = model.coefficient(&q);
                if c.is_zero() {
                    continue;
                }
                let dq = Diagram::of_tl1(&q);
                let (right, lr) = dq.compose(&e);
                if right == target {
                    out += &c.shift(lr);
                }
                let (left, ll) = e.compose(&dq);
                if left == target {
                    out -= &c.shift(ll);
                }
            }
        }
    }
    out
}

/// `S(p)` for an arbitrary reduced diagram by brute force over every
/// single-occurrence `q` inside the reach of `p`. Exponential in the width;
/// meant for small windows.
pub fn s_direct_diagram(model: &dyn CoefficientModel, p: &Diagram) -> TauPoly {
    if p.is_identity() {
        return TauPoly::zero();
    }
    let (lo, hi) = (p.lo() - 1, p.hi() - 1);
    let width = hi - lo + 1;
    let mut out = TauPoly::zero();
    for q0 in enumerate_with(width, |_| true) {
        for shift in 0..=width - 1 - q0.max_index() {
            let q = q0.translate(lo + shift);
            let c = model.coefficient(&q);
            if c.is_zero() {
                continue;
            }
            let dq = Diagram::of_tl1(&q);
            for sigma in lo..=hi {
                let e = Diagram::generator(sigma);
                let (right, lr) = dq.compose(&e);
                if &right == p {
                    out += &c.shift(lr);
                }
                let (left, ll) = e.compose(&dq);
                if &left == p {
                    out -= &c.shift(ll);
                }
            }
        }
    }
    out
}

/// One term `sign · τ^tau · C(w + dw, t + dt, v + dv, g + dg)` of a code's
/// contribution.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Row {
    pub sign: i8,
    pub tau: bool,
    pub shift: [i64; 4],
}

const fn r(sign: i8, tau: bool, dw: i64, dt: i64, dv: i64, dg: i64) -> Row {
    Row { sign, tau, shift: [dw, dt, dv, dg] }
}

/// Monoid preceding a neighbour.
pub fn table_preceding(code: EnvCode) -> Option<Vec<Row>> {
    Some(match code {
        EnvCode::PL(1) => vec![r(1, false, 0, 1, -1, -1), r(1, false, 0, 2, -1, -1), r(1, true, 0, 0, 0, 0), r(1, false, 0, -1, 1, 0)],
        EnvCode::PR(1) => vec![r(1, false, 0, 0, -1, -1), r(1, false, 0, 1, -1, -1), r(1, true, 0, 0, 0, 0), r(1, false, 0, 0, 1, 0)],
        EnvCode::PL(2) => vec![r(1, false, 0, 1, -1, 0), r(1, true, 0, 0, 0, 0), r(1, false, 0, -1, 1, 0)],
        EnvCode::PR(2) => vec![r(1, false, 0, 0, -1, 0), r(1, true, 0, 0, 0, 0), r(1, false, 0, 0, 1, 0)],
        EnvCode::PL(3) => vec![r(1, false, 1, 1, 0, 0), r(1, true, 0, 0, 0, 0), r(1, false, -1, -1, 0, 0)],
        EnvCode::PR(3) => vec![r(1, false, 1, 0, 0, 0), r(1, true, 0, 0, 0, 0), r(1, false, -1, 0, 0, 0)],
        EnvCode::PP => vec![r(1, true, 0, 0, 0, 0), r(1, false, 0, -1, 1, 1)],
        _ => return None,
    })
}

/// Monoid following its neighbours.
pub fn table_following(code: EnvCode) -> Option<Vec<Row>> {
    Some(match code {
        EnvCode::FR(1) => vec![r(-1, false, 0, 1, -1, -1), r(-1, false, 0, 2, -1, -1), r(-1, true, 0, 0, 0, 0), r(-1, false, 0, -1, 1, 0)],
        EnvCode::FL(1) => vec![r(-1, false, 0, 0, -1, -1), r(-1, false, 0, 1, -1, -1), r(-1, true, 0, 0, 0, 0), r(-1, false, 0, 0, 1, 0)],
        EnvCode::FR(2) => vec![r(-1, false, 0, 1, -1, 0), r(-1, true, 0, 0, 0, 0), r(-1, false, 0, -1, 1, 0)],
        EnvCode::FL(2) => vec![r(-1, false, 0, 0, -1, 0), r(-1, true, 0, 0, 0, 0), r(-1, false, 0, 0, 1, 0)],
        EnvCode::FR(3) => vec![r(-1, false, 1, 1, 0, 0), r(-1, true, 0, 0, 0, 0), r(-1, false, -1, -1, 0, 0)],
        EnvCode::FL(3) => vec![r(-1, false, 1, 0, 0, 0), r(-1, true, 0, 0, 0, 0), r(-1, false, -1, 0, 0, 0)],
        EnvCode::FF => vec![r(-1, true, 0, 0, 0, 0), r(-1, false, 0, -1, 1, 1)],
        _ => return None,
    })
}

/// Half-contributions of an isolated monoid: `L_i` from its left vacancy and
/// `R_j` from its right one.
pub fn table_isolated_left(i: u8) -> Vec<Row> {
    match i {
        1 => vec![r(-1, false, 0, 0, -1, -1), r(-1, false, 0, 1, -1, -1), r(1, false, 0, 1, -1, -1), r(1, false, 0, 2, -1, -1)],
        2 => vec![r(-1, false, 0, 0, -1, 0), r(1, false, 0, 1, -1, 0)],
        _ => vec![r(-1, false, 1, 0, 0, 0), r(1, false, 1, 1, 0, 0)],
    }
}

pub fn table_isolated_right(j: u8) -> Vec<Row> {
    match j {
        1 => vec![r(1, false, 0, 0, -1, -1), r(1, false, 0, 1, -1, -1), r(-1, false, 0, 1, -1, -1), r(-1, false, 0, 2, -1, -1)],
        2 => vec![r(1, false, 0, 0, -1, 0), r(-1, false, 0, 1, -1, 0)],
        _ => vec![r(1, false, 1, 0, 0, 0), r(-1, false, 1, 1, 0, 0)],
    }
}

pub fn rows(code: EnvCode) -> Vec<Row> {
    match code {
        EnvCode::LR(i, j) => {
            let mut v = table_isolated_left(i);
            v.extend(table_isolated_right(j));
            v
        }
        c => table_preceding(c).or_else(|| table_following(c)).expect("every code has a table"),
    }
}

/// Evaluates a code's contribution at the parameters of the word `p`.
pub fn contribution(model: &dyn CoefficientModel, code: EnvCode, p: &WordParams) -> TauPoly {
    let mut out = TauPoly::zero();
    for row in rows(code) {
        let [dw, dt, dv, dg] = row.shift;
        let q = WordParams::new(p.w + dw, p.t + dt, p.v + dv, p.g + dg);
        if q.v < 0 || q.g < 0 || q.w < 1 {
            continue;
        }
        let mut c = model.full(&q);
        if row.tau {
            c = c.shift(1);
        }
        if row.sign < 0 {
            out -= &c;
        } else {
            out += &c;
        }
    }
    out
}

pub fn s_env(model: &dyn CoefficientModel, p: &TL1Word) -> Result<TauPoly> {
    let params = p.params();
    let mut out = TauPoly::zero();
    for (i, code) in p.classify_environments() {
        let valid = match code {
            EnvCode::PL(s) | EnvCode::PR(s) | EnvCode::FL(s) | EnvCode::FR(s) => (1..=3).contains(&s),
            EnvCode::LR(a, b) => (1..=3).contains(&a) && (1..=3).contains(&b),
            EnvCode::PP | EnvCode::FF => true,
        };
        if !valid {
            return Err(Error::UnknownCode(i));
        }
        out += &contribution(model, code, &params);
    }
    Ok(out)
}

/// Table rows of every preceding code equal the negated rows of its mirror.
pub fn row_negation_holds() -> bool {
    [EnvCode::PL(1), EnvCode::PR(1), EnvCode::PL(2), EnvCode::PR(2), EnvCode::PL(3), EnvCode::PR(3), EnvCode::PP]
        .into_iter()
        .all(|c| {
            let p = table_preceding(c).unwrap();
            let f = table_following(c.mirror()).unwrap();
            p.len() == f.len() && p.iter().zip(&f).all(|(a, b)| a.sign == -b.sign && a.tau == b.tau && a.shift == b.shift)
        })
        && (1..=3).all(|i| {
            let l = table_isolated_left(i);
            let rr = table_isolated_right(i);
            let sum = |rows: &[Row]| {
                let mut m: HashMap<(bool, [i64; 4]), i64> = HashMap::new();
                for row in rows {
                    *m.entry((row.tau, row.shift)).or_default() += row.sign as i64;
                }
                m.retain(|_, v| *v != 0);
                m
            };
            let neg: Vec<Row> = rr.iter().map(|x| Row { sign: -x.sign, ..*x }).collect();
            sum(&l) == sum(&neg)
        })
}

/// Multiplicities of `Φ` and `Λ_1..Λ_3` when every emitted code of `p` is
/// replaced by its four-parameter form; all zero for any word.
pub fn code_balance(p: &TL1Word) -> [i64; 4] {
    let mut m = [0i64; 4];
    for (_, code) in p.classify_environments() {
        match code {
            EnvCode::FL(j) => {
                m[0] += 1;
                m[j as usize] += 1;
            }
            EnvCode::FR(j) => {
                m[0] += 1;
                m[j as usize] -= 1;
            }
            EnvCode::PL(j) => {
                m[0] -= 1;
                m[j as usize] += 1;
            }
            EnvCode::PR(j) => {
                m[0] -= 1;
                m[j as usize] -= 1;
            }
            EnvCode::FF => m[0] += 2,
            EnvCode::PP => m[0] -= 2,
            EnvCode::LR(a, b) => {
                m[a as usize] += 1;
                m[b as usize] -= 1;
            }
        }
    }
    m
}

/// A linear identity among code contributions, valid where `in_range` holds.
pub struct Identity {
    pub name: &'static str,
    pub codes: &'static [EnvCode],
    pub in_range: fn(i64, i64) -> bool,
}

fn always(_: i64, _: i64) -> bool {
    true
}

pub const IDENTITIES: &[Identity] = &[
    Identity { name: "L3R1+L1R2+L2R3", codes: &[EnvCode::LR(3, 1), EnvCode::LR(1, 2), EnvCode::LR(2, 3)], in_range: always },
    Identity { name: "FL3+PR2+L2R3", codes: &[EnvCode::FL(3), EnvCode::PR(2), EnvCode::LR(2, 3)], in_range: always },
    Identity { name: "PL3+FR2+L2R3", codes: &[EnvCode::PL(3), EnvCode::FR(2), EnvCode::LR(2, 3)], in_range: always },
    Identity {
        name: "PL3+FR1+L1R3",
        codes: &[EnvCode::PL(3), EnvCode::FR(1), EnvCode::LR(1, 3)],
        in_range: |w, t| 0 < t - 1 && t - 1 < w - 2,
    },
    Identity { name: "PL3+FF+PR3", codes: &[EnvCode::PL(3), EnvCode::FF, EnvCode::PR(3)], in_range: |w, t| 0 < t && t < w - 1 },
    Identity { name: "PL1+FF+PR1", codes: &[EnvCode::PL(1), EnvCode::FF, EnvCode::PR(1)], in_range: |w, t| 1 < t && t < w - 2 },
];

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityFailure {
    pub identity: String,
    pub params: WordParams,
    pub value: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IdentityReport {
    pub k: usize,
    pub tuples: usize,
    /// Nonzero inside the stated range: a genuine failure.
    pub violations: Vec<IdentityFailure>,
    /// Nonzero outside the stated range: allowed.
    pub out_of_range: Vec<IdentityFailure>,
    pub row_negation: bool,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.row_negation
    }
}

/// Parameter tuples of genuine words with `W <= max_big_w`.
pub fn word_tuples(max_big_w: i64) -> Vec<WordParams> {
    let mut out = Vec::new();
    for w in 1..=max_big_w {
        for v in 0..w {
            let gs = if v == 0 { 0..=0 } else { 1..=v };
            for g in gs {
                if v + g >= w || w + v + g > max_big_w {
                    continue;
                }
                for t in 0..w - v - g {
                    out.push(WordParams::new(w, t, v, g));
                }
            }
        }
    }
    out
}

fn phi_lambda(model: &dyn CoefficientModel, p: &WordParams) -> (TauPoly, [TauPoly; 3]) {
    let ff = contribution(model, EnvCode::FF, p);
    let half = TauPoly::constant(crate::poly::rat(1, 2));
    let phi = &ff * &half;
    let lam = [1u8, 2, 3].map(|j| &contribution(model, EnvCode::FL(j), p) - &phi);
    (phi, lam)
}

/// Residual of every code against `FL_j = Φ+Λ_j, FR_j = Φ-Λ_j, PL_j = -Φ+Λ_j,
/// PR_j = -Φ-Λ_j, FF = 2Φ, PP = -2Φ, L_iR_j = Λ_i-Λ_j`.
pub fn pattern_residuals(model: &dyn CoefficientModel, p: &WordParams) -> Vec<(EnvCode, TauPoly)> {
    let (phi, lam) = phi_lambda(model, p);
    let two = TauPoly::from_int(2);
    let mut out = Vec::new();
    for code in EnvCode::all() {
        let expected = match code {
            EnvCode::FL(j) => &phi + &lam[j as usize - 1],
            EnvCode::FR(j) => &phi - &lam[j as usize - 1],
            EnvCode::PL(j) => &lam[j as usize - 1] - &phi,
            EnvCode::PR(j) => -(&phi + &lam[j as usize - 1]),
            EnvCode::FF => &two * &phi,
            EnvCode::PP => -(&two * &phi),
            EnvCode::LR(a, b) => &lam[a as usize - 1] - &lam[b as usize - 1],
        };
        let got = contribution(model, code, p);
        let res = &got - &expected;
        if !res.is_zero() {
            out.push((code, res));
        }
    }
    out
}

/// For each identity, the parameter tuples of words that carry all of its
/// codes at once, over words with `W <= max_big_w`.
pub fn realizable_tuples(max_big_w: i64) -> (Vec<HashSet<WordParams>>, HashMap<WordParams, HashSet<EnvCode>>) {
    let mut out = vec![HashSet::new(); IDENTITIES.len()];
    let mut codes_at: HashMap<WordParams, HashSet<EnvCode>> = HashMap::new();
    for p in enumerate_with(max_big_w, |x| x.big_w() <= max_big_w) {
        let codes: HashSet<EnvCode> = p.classify_environments().into_iter().map(|(_, c)| c).collect();
        let params = p.params();
        for (n, id) in IDENTITIES.iter().enumerate() {
            if id.codes.iter().all(|c| codes.contains(c)) {
                out[n].insert(params);
            }
        }
        codes_at.entry(params).or_default().extend(codes);
    }
    (out, codes_at)
}

pub fn check_identities_with(model: &dyn CoefficientModel) -> IdentityReport {
    let k = model.order();
    let max_big_w = k as i64 + 3;
    let tuples = word_tuples(max_big_w);
    let (realizable, codes_at) = realizable_tuples(max_big_w);
    let mut report = IdentityReport { k, tuples: tuples.len(), row_negation: row_negation_holds(), ..Default::default() };
    let pattern_range = |w: i64, t: i64| IDENTITIES.iter().all(|id| (id.in_range)(w, t));
    for p in &tuples {
        let (bw, bt) = (p.big_w(), p.big_t());
        for (n, id) in IDENTITIES.iter().enumerate() {
            if !realizable[n].contains(p) {
                continue;
            }
            let mut sum = TauPoly::zero();
            for &c in id.codes {
                sum += &contribution(model, c, p);
            }
            if sum.is_zero() {
                continue;
            }
            let f = IdentityFailure { identity: id.name.to_string(), params: *p, value: sum.to_string() };
            if (id.in_range)(bw, bt) {
                report.violations.push(f);
            } else {
                report.out_of_range.push(f);
            }
        }
        let present = codes_at.get(p).cloned().unwrap_or_default();
        for (code, res) in pattern_residuals(model, p) {
            if !present.contains(&code) {
                continue;
            }
            let f = IdentityFailure { identity: format!("pattern:{code}"), params: *p, value: res.to_string() };
            if pattern_range(bw, bt) {
                report.violations.push(f);
            } else {
                report.out_of_range.push(f);
            }
        }
    }
    report
}

pub fn check_identities(k: usize) -> IdentityReport {
    check_identities_with(&ClosedForm { k })
}

/// Result of comparing the two routes to `S(p)` over the reachable set.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ReachReport {
    pub k: usize,
    pub words: usize,
    pub other_diagrams: usize,
    /// Words where `s_env`, `s_direct` and the accumulated value disagree.
    pub disagreements: Vec<String>,
    /// Words with a nonzero `S(p)`.
    pub nonzero: Vec<String>,
    /// Non-single-occurrence diagrams with a nonzero accumulated coefficient.
    pub other_nonzero: usize,
}

impl ReachReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty() && self.nonzero.is_empty() && self.other_nonzero == 0
    }
}

/// Computes `S(p)` three ways for every reachable word of `model`'s charge.
pub fn reach_check(model: &dyn CoefficientModel) -> ReachReport {
    let density = crate::charges::build_with(model);
    let cd = commutator_density_of(&density);
    let (words, other) = reachable_words(&cd);
    let results: Vec<(String, bool, bool)> = words
        .par_iter()
        .map(|p| {
            let direct = s_direct(model, p);
            let env = s_env(model, p).unwrap_or_else(|_| TauPoly::from_int(i64::MAX));
            let acc = cd.get(&Diagram::of_tl1(p));
            let agree = direct == env && env == acc;
            (format!("{} direct={} env={} acc={}", p.notation(), direct, env, acc), agree, direct.is_zero())
        })
        .collect();
    let mut report = ReachReport { k: model.order(), words: words.len(), other_diagrams: other.len(), ..Default::default() };
    for (line, agree, zero) in results {
        if !agree {
            report.disagreements.push(line.clone());
        }
        if !zero {
            report.nonzero.push(line);
        }
    }
    report.other_nonzero = other.iter().filter(|d| !cd.get(d).is_zero()).count();
    report
}

/// The sample word with parameters `(20, 7, 5, 3)` used to illustrate the codes.
pub fn sample_word() -> TL1Word {
    GeneralWord::from_sequence(&[2, 1, 3, 4, 10, 9, 8, 7, 6, 11, 13, 12, 17, 20, 19]).canonical_tl1().expect("single occurrence")
}
