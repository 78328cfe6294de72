//! Spin-chain representation on `(ℂ²)^{⊗L}`.
//!
//! Site `s` is bit `s` of a basis index, bit value 0 is spin up (σ^z = +1).
//! Monoid `j` (1-based) acts on sites `j-1` and `j mod L`; monoid `L` crosses
//! the boundary and carries the twist on site 0.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::charges::build_charge;
use crate::error::{Error, Result};
use crate::poly::{Rational, TauPoly};

type C = Complex64;

/// Field the matrices live over: exact rationals or complex floats.
pub trait Scalar:
    Clone + Debug + PartialEq + Send + Sync + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + 'static
{
    fn from_rational(r: &Rational) -> Self;
    fn inverse(&self) -> Self;
    fn abs_sqr(&self) -> f64;
    fn to_complex(&self) -> C;
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn inverse(&self) -> Self {
        self.recip()
    }
    fn abs_sqr(&self) -> f64 {
        let f = self.to_f64().unwrap_or(f64::NAN);
        f * f
    }
    fn to_complex(&self) -> C {
        C::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
}

impl Scalar for C {
    fn from_rational(r: &Rational) -> Self {
        C::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn inverse(&self) -> Self {
        C::new(1.0, 0.0) / *self
    }
    fn abs_sqr(&self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex(&self) -> C {
        *self
    }
}

fn eval_tau<S: Scalar>(p: &TauPoly, tau: &S) -> S {
    p.coeffs().iter().rev().fold(S::zero(), |acc, c| acc * tau.clone() + S::from_rational(c))
}

/// Two-site operator in the basis `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (first factor is
/// the first site); `m[r][c] = ⟨r|op|c⟩`.
pub type Local2<S> = [[S; 4]; 4];
pub type Local1<S> = [[S; 2]; 2];

fn zero4<S: Scalar>() -> Local2<S> {
    std::array::from_fn(|_| std::array::from_fn(|_| S::zero()))
}

fn mul4<S: Scalar>(a: &Local2<S>, b: &Local2<S>) -> Local2<S> {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| (0..4).fold(S::zero(), |acc, m| acc + a[r][m].clone() * b[m][c].clone()))
    })
}

/// `1 ⊗ t` on the two-site basis.
fn on_second<S: Scalar>(t: &Local1<S>) -> Local2<S> {
    std::array::from_fn(|r| std::array::from_fn(|c| if r >> 1 == c >> 1 { t[r & 1][c & 1].clone() } else { S::zero() }))
}

fn monoid_local<S: Scalar>(q: &S) -> Local2<S> {
    let mut m = zero4();
    m[1][1] = -q.inverse();
    m[2][2] = -q.clone();
    m[1][2] = S::one();
    m[2][1] = S::one();
    m
}

/// `½(σˣσˣ + σʸσʸ) + (q + q⁻¹)/4 (σᶻσᶻ - 1)`.
fn xxz_local<S: Scalar>(q: &S) -> Local2<S> {
    let mut m = zero4();
    let two = S::one() + S::one();
    let d = -(q.clone() + q.inverse()) * two.inverse();
    m[1][1] = d.clone();
    m[2][2] = d;
    m[1][2] = S::one();
    m[2][1] = S::one();
    m
}

/// Boundary twist, a 2×2 matrix of determinant one with its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Twist<S> {
    pub m: Local1<S>,
    pub inv: Local1<S>,
    pub diagonal: bool,
}

impl<S: Scalar> Twist<S> {
    fn conjugate(&self, op: &Local2<S>) -> Local2<S> {
        mul4(&mul4(&on_second(&self.m), op), &on_second(&self.inv))
    }

    pub fn trace(&self) -> S {
        self.m[0][0].clone() + self.m[1][1].clone()
    }
}

/// Textual twist: `none`, `diag:t` (`diag(t, 1/t)`), `expdiag:f`
/// (`diag(e^f, e^-f)`, float only) or `general:a,b,c,d` (row major, det 1).
#[derive(Clone, Debug, PartialEq)]
pub enum TwistSpec {
    None,
    Diag(Rational),
    ExpDiag(f64),
    General([Rational; 4]),
}

fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    s.parse::<Rational>()
        .or_else(|_| s.parse::<BigInt>().map(Rational::from_integer))
        .map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))
}

impl TwistSpec {
    pub fn parse(s: &str) -> Result<TwistSpec> {
        let s = s.trim();
        if s == "none" {
            return Ok(TwistSpec::None);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(|| Error::Parse(format!("bad twist {s:?}")))?;
        match kind {
            "diag" => {
                let t = parse_rational(arg)?;
                if t.is_zero() {
                    return Err(Error::Invalid("diagonal twist needs t != 0".into()));
                }
                Ok(TwistSpec::Diag(t))
            }
            "expdiag" => arg.trim().parse().map(TwistSpec::ExpDiag).map_err(|_| Error::Parse(format!("bad exponent {arg:?}"))),
            "general" => {
                let v: Vec<Rational> = arg.split(',').map(parse_rational).collect::<Result<_>>()?;
                let v: [Rational; 4] = v.try_into().map_err(|_| Error::Parse("general twist needs four entries".into()))?;
                if &v[0] * &v[3] - &v[1] * &v[2] != Rational::one() {
                    return Err(Error::Invalid("twist must have determinant 1".into()));
                }
                Ok(TwistSpec::General(v))
            }
            _ => Err(Error::Parse(format!("unknown twist kind {kind:?}"))),
        }
    }

    fn build<S: Scalar>(&self, exp: impl Fn(f64) -> Option<S>) -> Result<Option<Twist<S>>> {
        let mk = |a: S, b: S, c: S, d: S, diagonal: bool| Twist {
            inv: [[d.clone(), -b.clone()], [-c.clone(), a.clone()]],
            m: [[a, b], [c, d]],
            diagonal,
        };
        Ok(match self {
            TwistSpec::None => None,
            TwistSpec::Diag(t) => Some(mk(S::from_rational(t), S::zero(), S::zero(), S::from_rational(&t.recip()), true)),
            TwistSpec::ExpDiag(f) => {
                let (a, d) = exp(*f).zip(exp(-*f)).ok_or_else(|| Error::Invalid("expdiag twist needs float mode".into()))?;
                Some(mk(a, S::zero(), S::zero(), d, true))
            }
            TwistSpec::General(v) => {
                let [a, b, c, d] = v.clone().map(|x| S::from_rational(&x));
                let diagonal = b.is_zero() && c.is_zero();
                Some(mk(a, b, c, d, diagonal))
            }
        })
    }
}

/// Textual `q`: a rational `p/r`, a complex `re,im`, or `unit:x` for `e^{iπx}`.
#[derive(Clone, Debug, PartialEq)]
pub enum QSpec {
    Rational(Rational),
    Complex(C),
}

impl QSpec {
    pub fn parse(s: &str) -> Result<QSpec> {
        let s = s.trim();
        if let Some(x) = s.strip_prefix("unit:") {
            let x = parse_rational(x)?.to_f64().unwrap_or(f64::NAN);
            return Ok(QSpec::Complex(C::from_polar(1.0, std::f64::consts::PI * x)));
        }
        if let Some((re, im)) = s.split_once(',') {
            let p = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad complex q {s:?}")));
            return Ok(QSpec::Complex(C::new(p(re)?, p(im)?)));
        }
        let q = parse_rational(s)?;
        if q.is_zero() {
            return Err(Error::Invalid("q must be nonzero".into()));
        }
        Ok(QSpec::Rational(q))
    }
}

#[derive(Clone, Debug)]
pub struct ChainParams<S> {
    pub l: usize,
    pub q: S,
    pub twist: Option<Twist<S>>,
}

impl<S: Scalar> ChainParams<S> {
    pub fn new(l: usize, q: S, twist: Option<Twist<S>>) -> Result<Self> {
        if l < 3 {
            return Err(Error::Invalid(format!("chain length {l} too small")));
        }
        if l > 24 {
            return Err(Error::Invalid(format!("chain length {l} too large")));
        }
        if q.is_zero() {
            return Err(Error::Invalid("q must be nonzero".into()));
        }
        Ok(ChainParams { l, q, twist })
    }

    pub fn tau(&self) -> S {
        -(self.q.clone() + self.q.inverse())
    }

    pub fn dim(&self) -> usize {
        1 << self.l
    }

    fn boundary(&self, op: Local2<S>) -> Local2<S> {
        match &self.twist {
            Some(t) => t.conjugate(&op),
            None => op,
        }
    }
}

impl ChainParams<Rational> {
    pub fn exact(l: usize, q: &QSpec, twist: &TwistSpec) -> Result<Self> {
        let QSpec::Rational(q) = q else {
            return Err(Error::Invalid("exact mode needs rational q".into()));
        };
        ChainParams::new(l, q.clone(), twist.build(|_| None)?)
    }
}

impl ChainParams<C> {
    pub fn float(l: usize, q: &QSpec, twist: &TwistSpec) -> Result<Self> {
        let q = match q {
            QSpec::Rational(r) => C::from_rational(r),
            QSpec::Complex(c) => *c,
        };
        ChainParams::new(l, q, twist.build(|f| Some(C::new(f.exp(), 0.0)))?)
    }
}

/// Sparse `2^n × 2^n` operator, rows sorted by column with no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp<S> {
    sites: usize,
    rows: Vec<Vec<(u32, S)>>,
}

fn finish<S: Scalar>(sites: usize, maps: Vec<BTreeMap<u32, S>>) -> SparseOp<S> {
    let rows = maps.into_iter().map(|m| m.into_iter().filter(|(_, v)| !v.is_zero()).collect()).collect();
    SparseOp { sites, rows }
}

fn accumulate<S: Scalar>(row: &mut BTreeMap<u32, S>, j: u32, v: S) {
    match row.get_mut(&j) {
        Some(x) => *x = x.clone() + v,
        None => {
            row.insert(j, v);
        }
    }
}

impl<S: Scalar> SparseOp<S> {
    pub fn zero(sites: usize) -> Self {
        SparseOp { sites, rows: vec![Vec::new(); 1 << sites] }
    }

    pub fn identity(sites: usize) -> Self {
        SparseOp { sites, rows: (0..1u32 << sites).map(|i| vec![(i, S::one())]).collect() }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(u32, S)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.rows[i].binary_search_by_key(&(j as u32), |e| e.0).map(|p| self.rows[i][p].1.clone()).unwrap_or_else(|_| S::zero())
    }

    pub fn two_site(sites: usize, a: usize, b: usize, m: &Local2<S>) -> Self {
        let maps = (0..1usize << sites)
            .map(|i| {
                let r = ((i >> a) & 1) << 1 | ((i >> b) & 1);
                let base = i & !(1 << a) & !(1 << b);
                let mut row = BTreeMap::new();
                for (c, v) in m[r].iter().enumerate() {
                    if !v.is_zero() {
                        accumulate(&mut row, (base | (c >> 1) << a | (c & 1) << b) as u32, v.clone());
                    }
                }
                row
            })
            .collect();
        finish(sites, maps)
    }

    pub fn one_site(sites: usize, s: usize, m: &Local1<S>) -> Self {
        let maps = (0..1usize << sites)
            .map(|i| {
                let r = (i >> s) & 1;
                let mut row = BTreeMap::new();
                for (c, v) in m[r].iter().enumerate() {
                    if !v.is_zero() {
                        accumulate(&mut row, (i & !(1 << s) | c << s) as u32, v.clone());
                    }
                }
                row
            })
            .collect();
        finish(sites, maps)
    }

    /// Cyclic shift `ρ` with `ρ X_s ρ⁻¹ = X_{s+1}`.
    pub fn shift(sites: usize) -> Self {
        let mask = (1usize << sites) - 1;
        let rows = (0..1usize << sites).map(|i| vec![((((i >> 1) | (i << (sites - 1))) & mask) as u32, S::one())]).collect();
        SparseOp { sites, rows }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.sites != other.sites {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let maps = self
            .rows
            .iter()
            .map(|row| {
                let mut out = BTreeMap::new();
                for (m, a) in row {
                    for (j, b) in &other.rows[*m as usize] {
                        accumulate(&mut out, *j, a.clone() * b.clone());
                    }
                }
                out
            })
            .collect();
        finish(self.sites, maps)
    }

    fn combine(&self, other: &Self, sign: S) -> Self {
        let maps = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut out: BTreeMap<u32, S> = a.iter().cloned().collect();
                for (j, v) in b {
                    accumulate(&mut out, *j, sign.clone() * v.clone());
                }
                out
            })
            .collect();
        finish(self.sites, maps)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -S::one())
    }

    pub fn scale(&self, c: &S) -> Self {
        let maps = self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, c.clone() * v.clone())).collect()).collect();
        finish(self.sites, maps)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn frobenius(&self) -> f64 {
        self.rows.iter().flatten().map(|(_, v)| v.abs_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j as usize)] = v.to_complex();
            }
        }
        m
    }

    /// Dense block on the given basis states.
    pub fn block(&self, states: &[usize]) -> DMatrix<C> {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &s) in states.iter().enumerate() {
            pos[s] = k;
        }
        let mut m = DMatrix::zeros(states.len(), states.len());
        for (a, &s) in states.iter().enumerate() {
            for (j, v) in &self.rows[s] {
                let b = pos[*j as usize];
                if b != usize::MAX {
                    m[(a, b)] = v.to_complex();
                }
            }
        }
        m
    }

    /// Adds `c · local` where local site `s` sits on global site `map[s]`.
    fn embed_into(local: &SparseOp<S>, map: &[usize], maps: &mut [BTreeMap<u32, S>]) {
        let scatter = |li: usize| map.iter().enumerate().fold(0usize, |acc, (s, &g)| acc | ((li >> s) & 1) << g);
        let mask = scatter((1 << map.len()) - 1);
        for (i, out) in maps.iter_mut().enumerate() {
            let li = map.iter().enumerate().fold(0usize, |acc, (s, &g)| acc | ((i >> g) & 1) << s);
            let rest = i & !mask;
            for (lj, v) in &local.rows[li] {
                accumulate(out, (rest | scatter(*lj as usize)) as u32, v.clone());
            }
        }
    }
}

/// Monoid `e_j`, `1 <= j <= L`.
pub fn monoid_matrix<S: Scalar>(j: usize, p: &ChainParams<S>) -> Result<SparseOp<S>> {
    if j < 1 || j > p.l {
        return Err(Error::InvalidIndex { j, l: p.l });
    }
    let e = monoid_local(&p.q);
    Ok(if j == p.l { SparseOp::two_site(p.l, p.l - 1, 0, &p.boundary(e)) } else { SparseOp::two_site(p.l, j - 1, j, &e) })
}

/// `H = -Σ_j e_j`.
pub fn tl_hamiltonian<S: Scalar>(p: &ChainParams<S>) -> SparseOp<S> {
    (1..=p.l).fold(SparseOp::zero(p.l), |h, j| h.sub(&monoid_matrix(j, p).expect("valid index")))
}

/// Spin form with `S_{L+1} = T S_1 T⁻¹`.
pub fn xxz_hamiltonian<S: Scalar>(p: &ChainParams<S>) -> SparseOp<S> {
    let h = xxz_local(&p.q);
    let mut out = SparseOp::zero(p.l);
    for j in 0..p.l - 1 {
        out = out.sub(&SparseOp::two_site(p.l, j, j + 1, &h));
    }
    out.sub(&SparseOp::two_site(p.l, p.l - 1, 0, &p.boundary(h)))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RelationsReport {
    pub l: usize,
    pub checks: usize,
    /// Whether `EρE = τ′E` was part of the run (untwisted, even `L`).
    pub e_rho_e_checked: bool,
    pub failures: Vec<String>,
}

impl RelationsReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn same<S: Scalar>(a: &SparseOp<S>, b: &SparseOp<S>, tol: Option<f64>) -> bool {
    match tol {
        None => a == b,
        Some(t) => a.sub(b).frobenius() <= t * (1.0 + a.frobenius().max(b.frobenius())),
    }
}

/// `e_j² = τ e_j`, `e_j e_{j±1} e_j = e_j`, far commutation, all indices mod
/// `L`; plus `EρE = 2E` with `E = e_1 e_3 ⋯ e_{L-1}` when untwisted and `L`
/// even. `tol = None` demands exact equality.
pub fn relations_check<S: Scalar>(p: &ChainParams<S>, tol: Option<f64>) -> RelationsReport {
    let l = p.l;
    let e: Vec<SparseOp<S>> = (1..=l).map(|j| monoid_matrix(j, p).expect("valid index")).collect();
    let at = |j: usize| &e[(j + l - 1) % l];
    let mut rep = RelationsReport { l, ..Default::default() };
    let mut record = |ok: bool, what: String| {
        rep.checks += 1;
        if !ok {
            rep.failures.push(what);
        }
    };
    let tau = p.tau();
    for j in 1..=l {
        record(same(&at(j).mul(at(j)), &at(j).scale(&tau), tol), format!("e_{j}^2 = tau e_{j}"));
        for s in [l - 1, 1] {
            let n = (j + s - 1) % l + 1;
            record(same(&at(j).mul(at(n)).mul(at(j)), at(j), tol), format!("e_{j} e_{n} e_{j} = e_{j}"));
        }
        for m in j + 2..=l {
            if (m + 1 - j) % l == 0 {
                continue;
            }
            record(same(&at(j).mul(at(m)), &at(m).mul(at(j)), tol), format!("[e_{j}, e_{m}] = 0"));
        }
    }
    if p.twist.is_none() && l % 2 == 0 {
        rep.e_rho_e_checked = true;
        let big_e = (1..=l).step_by(2).fold(SparseOp::identity(l), |acc, j| acc.mul(at(j)));
        let rho = SparseOp::shift(l);
        let two = S::one() + S::one();
        record(same(&big_e.mul(&rho).mul(&big_e), &big_e.scale(&two), tol), "E rho E = 2 E".into());
    }
    rep
}

/// Local pieces of `Q_k` on `n = k + 1` sites, words anchored at monoid 0;
/// entry `1 + p` has local monoid `p` replaced by the twisted boundary monoid.
fn charge_locals<S: Scalar>(k: usize, p: &ChainParams<S>) -> (usize, Vec<SparseOp<S>>) {
    let density = build_charge(k);
    let n = density.words().map(|w| w.max_index() as usize + 2).max().unwrap_or(2);
    let plain = monoid_local(&p.q);
    let twisted = p.boundary(plain.clone());
    let variants = if p.twist.is_some() { n } else { 1 };
    let mut out = Vec::with_capacity(variants);
    let tau = p.tau();
    for v in 0..variants {
        let ops: Vec<SparseOp<S>> =
            (0..n - 1).map(|m| SparseOp::two_site(n, m, m + 1, if v == m + 1 { &twisted } else { &plain })).collect();
        let mut h = SparseOp::zero(n);
        for (w, c) in density.iter() {
            let letters = w.to_general();
            let prod = letters.letters().iter().fold(SparseOp::identity(n), |acc, &i| acc.mul(&ops[i as usize]));
            h = h.add(&prod.scale(&eval_tau(c, &tau)));
        }
        out.push(h);
    }
    (n, out)
}

/// `Q_k` on the chain: every word of the density at every translation, indices
/// mod `L`, with the twisted monoid wherever a translate uses monoid `L`.
pub fn charge_matrix<S: Scalar>(k: usize, p: &ChainParams<S>) -> Result<SparseOp<S>> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    if p.l < k + 2 {
        return Err(Error::ChainTooShort { k, l: p.l, min: k + 2 });
    }
    let (n, locals) = charge_locals(k, p);
    let l = p.l;
    let mut maps = vec![BTreeMap::new(); 1 << l];
    for x in 0..l {
        let map: Vec<usize> = (0..n).map(|s| (x + s) % l).collect();
        // boundary monoid (0-based L-1) sits at local monoid L-1-x
        let local_boundary = l - 1 - x;
        let v = if p.twist.is_some() && local_boundary < n - 1 { local_boundary + 1 } else { 0 };
        SparseOp::embed_into(&locals[v], &map, &mut maps);
    }
    Ok(finish(l, maps))
}

/// Frobenius norm of `ab - ba`.
pub fn commutator_norm<S: Scalar>(a: &SparseOp<S>, b: &SparseOp<S>) -> Result<f64> {
    a.check(b)?;
    Ok(a.commutator(b).frobenius())
}

/// `‖[a, b]‖ / (‖a‖ ‖b‖)`, zero when either operand vanishes.
pub fn relative_commutator<S: Scalar>(a: &SparseOp<S>, b: &SparseOp<S>) -> Result<f64> {
    let scale = a.frobenius() * b.frobenius();
    let c = commutator_norm(a, b)?;
    Ok(if scale == 0.0 { 0.0 } else { c / scale })
}

fn integer_rows(a: &SparseOp<Rational>) -> Option<(Vec<Vec<(u32, i128)>>, i128)> {
    let den = a.rows.iter().flatten().fold(BigInt::one(), |l, (_, v)| num_integer::Integer::lcm(&l, v.denom()));
    let mut max = 0i128;
    let rows = a
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|(j, v)| {
                    let x = (v * Rational::from_integer(den.clone())).to_integer().to_i128()?;
                    max = max.max(x.abs());
                    Some((*j, x))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some((rows, max))
}

/// Exact `[a, b] = 0` over the rationals. Both operands are cleared of
/// denominators and multiplied in `i128` when the bound allows, otherwise in
/// big rationals.
pub fn commutes_exactly(a: &SparseOp<Rational>, b: &SparseOp<Rational>) -> Result<bool> {
    a.check(b)?;
    if let (Some((ra, ma)), Some((rb, mb))) = (integer_rows(a), integer_rows(b)) {
        let width = ra.iter().chain(&rb).map(Vec::len).max().unwrap_or(0) as i128;
        let bound = ma.checked_mul(mb).and_then(|x| x.checked_mul(2 * width + 1));
        if bound.is_some_and(|x| x < i128::MAX / 4) {
            let prod = |x: &[Vec<(u32, i128)>], y: &[Vec<(u32, i128)>], i: usize, out: &mut BTreeMap<u32, i128>, s: i128| {
                for (m, u) in &x[i] {
                    for (j, v) in &y[*m as usize] {
                        *out.entry(*j).or_insert(0) += s * u * v;
                    }
                }
            };
            return Ok((0..ra.len()).all(|i| {
                let mut out = BTreeMap::new();
                prod(&ra, &rb, i, &mut out, 1);
                prod(&rb, &ra, i, &mut out, -1);
                out.values().all(|v| *v == 0)
            }));
        }
    }
    Ok(a.commutator(b).is_zero())
}

// ---------------------------------------------------------------------------
// Transfer matrix (float mode only)

fn bracket(x: C) -> C {
    x - C::new(1.0, 0.0) / x
}

/// `R(z)`: `[qz]` on `↑↑, ↓↓`, `[z]` on `↑↓, ↓↑`, `[q]` hopping.
fn r_local(q: C, z: C) -> Local2<C> {
    let mut m = zero4::<C>();
    m[0][0] = bracket(q * z);
    m[3][3] = m[0][0];
    m[1][1] = bracket(z);
    m[2][2] = m[1][1];
    m[1][2] = bracket(q);
    m[2][1] = m[1][2];
    m
}

/// Taylor coefficients of `R(e^s)` in `s`.
fn r_taylor(q: C, order: usize) -> Vec<Local2<C>> {
    let mut fact = 1.0;
    (0..=order)
        .map(|m| {
            if m > 0 {
                fact *= m as f64;
            }
            if m == 0 {
                return r_local(q, C::new(1.0, 0.0));
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let qz = (q - q.inv() * sign) / fact;
            let z = C::new((1.0 - sign) / fact, 0.0);
            let mut t = zero4::<C>();
            t[0][0] = qz;
            t[3][3] = qz;
            t[1][1] = z;
            t[2][2] = z;
            t
        })
        .collect()
}

fn apply2(v: &[C], out: &mut [C], a: usize, b: usize, m: &Local2<C>) {
    for (i, x) in v.iter().enumerate() {
        if *x == C::zero() {
            continue;
        }
        let c = ((i >> a) & 1) << 1 | ((i >> b) & 1);
        let base = i & !(1 << a) & !(1 << b);
        for (r, row) in m.iter().enumerate() {
            let f = row[c];
            if f != C::zero() {
                out[base | (r >> 1) << a | (r & 1) << b] += f * x;
            }
        }
    }
}

fn apply1(v: &[C], s: usize, m: &Local1<C>) -> Vec<C> {
    let mut out = vec![C::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        if *x == C::zero() {
            continue;
        }
        let c = (i >> s) & 1;
        for r in 0..2 {
            if m[r][c] != C::zero() {
                out[i & !(1 << s) | r << s] += m[r][c] * x;
            }
        }
    }
    out
}

fn transfer_twist(p: &ChainParams<C>) -> Result<Option<Local1<C>>> {
    match &p.twist {
        None => Ok(None),
        Some(t) if t.diagonal => Ok(Some(t.inv)),
        Some(_) => Err(Error::Invalid("transfer matrix supports diagonal twists only".into())),
    }
}

/// Columns `v` of `Tr_a(T_a R_{a,1}(s) ⋯ R_{a,L}(s))` as Taylor series in `s`,
/// restricted to the given chain basis states; `coeffs[m]` multiplies `s^m`.
fn transfer_series_columns(p: &ChainParams<C>, rs: &[Local2<C>], states: &[usize], rows: &[usize]) -> Result<Vec<DMatrix<C>>> {
    let twist = transfer_twist(p)?;
    let l = p.l;
    let order = rs.len() - 1;
    let full = 1usize << (l + 1);
    let mut out = vec![DMatrix::zeros(rows.len(), states.len()); order + 1];
    for (col, &v) in states.iter().enumerate() {
        for a in 0..2 {
            let mut series = vec![vec![C::zero(); full]; order + 1];
            series[0][v | a << l] = C::new(1.0, 0.0);
            for site in (0..l).rev() {
                let mut next = vec![vec![C::zero(); full]; order + 1];
                for (o, target) in next.iter_mut().enumerate() {
                    for m in 0..=o {
                        apply2(&series[o - m], target, l, site, &rs[m]);
                    }
                }
                series = next;
            }
            for (o, vec) in series.iter().enumerate() {
                let vec = match &twist {
                    Some(t) => apply1(vec, l, t),
                    None => vec.clone(),
                };
                for (r, &u) in rows.iter().enumerate() {
                    out[o][(r, col)] += vec[u | a << l];
                }
            }
        }
    }
    Ok(out)
}

fn all_states(l: usize) -> Vec<usize> {
    (0..1usize << l).collect()
}

/// `T_L(z) = Tr_a(T_a R_{a,1}(z) ⋯ R_{a,L}(z))`, dense.
///
/// With this site ordering the auxiliary factor that reproduces the chain
/// boundary `S_{L+1} = T S_1 T⁻¹` is `T⁻¹`, so that is what gets inserted.
pub fn transfer_matrix(z: C, p: &ChainParams<C>) -> Result<DMatrix<C>> {
    let states = all_states(p.l);
    let rs = [r_local(p.q, z)];
    Ok(transfer_series_columns(p, &rs, &states, &states)?.remove(0))
}

#[derive(Clone, Debug, Serialize)]
pub struct LogDerivReport {
    pub l: usize,
    /// Largest `‖[T(z), T(z′)]‖ / (‖T(z)‖ ‖T(z′)‖)` over the sampled pairs.
    pub commutator: f64,
    /// `‖D - D_expected‖ / ‖D_expected‖` for the central difference `D`.
    pub finite_difference: f64,
    pub step: f64,
}

/// Spectral parameters on the unit circle used for the commutation check.
pub const SAMPLE_ANGLES: [f64; 4] = [0.37, 1.91, -2.44, 0.83];

/// Checks `[T(z), T(z′)] = 0` on sampled pairs and compares the central
/// difference of `z ∂_z log T` at `z = 1` with the Hamiltonian. With this
/// R-matrix the log-derivative is `(2/[q]) Σ e_j + L (q + q⁻¹)/[q]`.
pub fn logderiv_check(p: &ChainParams<C>, step: f64) -> Result<LogDerivReport> {
    let mut worst: f64 = 0.0;
    let ts: Vec<DMatrix<C>> = SAMPLE_ANGLES.iter().map(|&a| transfer_matrix(C::from_polar(1.0, a), p)).collect::<Result<_>>()?;
    for (i, a) in ts.iter().enumerate() {
        for b in &ts[i + 1..] {
            let c = (a * b - b * a).norm() / (a.norm() * b.norm());
            worst = worst.max(c);
        }
    }
    let t0 = transfer_matrix(C::new(1.0, 0.0), p)?;
    let inv = t0.try_inverse().ok_or_else(|| Error::Singular("T(1)".into()))?;
    let plus = transfer_matrix(C::new(step.exp(), 0.0), p)?;
    let minus = transfer_matrix(C::new((-step).exp(), 0.0), p)?;
    let d = (plus - minus) * inv / C::new(2.0 * step, 0.0);
    let bq = bracket(p.q);
    let sum_e = tl_hamiltonian(p).to_dense() * C::new(-1.0, 0.0);
    let expected = sum_e * (C::new(2.0, 0.0) / bq)
        + DMatrix::identity(p.dim(), p.dim()) * ((p.q + p.q.inv()) * (p.l as f64) / bq);
    Ok(LogDerivReport { l: p.l, commutator: worst, finite_difference: (d - &expected).norm() / expected.norm(), step })
}

/// Basis states grouped by number of down spins; `T(z)` and the charges
/// preserve these sectors.
pub fn sectors(l: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); l + 1];
    for s in 0..1usize << l {
        out[s.count_ones() as usize].push(s);
    }
    out
}

/// Per sector, `D_n = ∂ⁿ log T / (∂ log z)ⁿ` at `z = 1` for `n = 1 ..= order`,
/// from the exact Taylor series of `T(e^s)`.
pub fn log_derivatives(p: &ChainParams<C>, order: usize) -> Result<Vec<(Vec<usize>, Vec<DMatrix<C>>)>> {
    let rs = r_taylor(p.q, order);
    let mut out = Vec::new();
    for states in sectors(p.l) {
        let coeffs = transfer_series_columns(p, &rs, &states, &states)?;
        let inv = coeffs[0].clone().try_inverse().ok_or_else(|| Error::Singular("T(1) block".into()))?;
        let x: Vec<DMatrix<C>> = coeffs.iter().map(|c| &inv * c).collect();
        let n = states.len();
        // log(1 + X) with X = Σ_{m>=1} x_m s^m, truncated at s^order
        let mut log = vec![DMatrix::<C>::zeros(n, n); order + 1];
        let mut power: Vec<DMatrix<C>> = (0..=order).map(|m| if m == 0 { DMatrix::zeros(n, n) } else { x[m].clone() }).collect();
        for m in 1..=order {
            let c = C::new(if m % 2 == 1 { 1.0 } else { -1.0 } / m as f64, 0.0);
            for o in 0..=order {
                log[o] += &power[o] * c;
            }
            let mut next = vec![DMatrix::<C>::zeros(n, n); order + 1];
            for a in 1..order {
                for b in 1..=order - a {
                    next[a + b] += &power[a] * &x[b];
                }
            }
            power = next;
        }
        let mut fact = 1.0;
        let ds = (1..=order)
            .map(|m| {
                fact *= m as f64;
                &log[m] * C::new(fact, 0.0)
            })
            .collect();
        out.push((states, ds));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanReport {
    pub k: usize,
    pub l: usize,
    /// `‖Q_k - fit‖ / ‖Q_k‖`.
    pub residual: f64,
    /// Coefficients of `1, D_1, …, D_k` as `(re, im)`.
    pub coefficients: Vec<(f64, f64)>,
}

/// Least-squares fit of `Q_k` in `span{1, D_1, …, D_k}` over all sectors.
pub fn span_check(k: usize, p: &ChainParams<C>) -> Result<SpanReport> {
    let q = charge_matrix(k, p)?;
    let derivs = log_derivatives(p, k)?;
    let rows: usize = derivs.iter().map(|(s, _)| s.len() * s.len()).sum();
    let mut a = DMatrix::<C>::zeros(rows, k + 1);
    let mut b = nalgebra::DVector::<C>::zeros(rows);
    let mut r = 0;
    for (states, ds) in &derivs {
        let qb = q.block(states);
        let n = states.len();
        for i in 0..n {
            for j in 0..n {
                a[(r, 0)] = if i == j { C::new(1.0, 0.0) } else { C::zero() };
                for (m, d) in ds.iter().enumerate() {
                    a[(r, m + 1)] = d[(i, j)];
                }
                b[r] = qb[(i, j)];
                r += 1;
            }
        }
    }
    // normalize columns for conditioning
    let norms: Vec<f64> = (0..=k).map(|c| a.column(c).norm().max(f64::MIN_POSITIVE)).collect();
    for (c, n) in norms.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / n);
    }
    let gram = a.adjoint() * &a;
    let rhs = a.adjoint() * &b;
    let sol = gram.lu().solve(&rhs).ok_or_else(|| Error::Singular("span Gram matrix".into()))?;
    let fit = &a * &sol;
    let residual = (&b - fit).norm() / b.norm();
    let coefficients = sol.iter().zip(&norms).map(|(c, n)| (c.re / n, c.im / n)).collect();
    Ok(SpanReport { k, l: p.l, residual, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    fn exact(l: usize, q: Rational, twist: &str) -> ChainParams<Rational> {
        ChainParams::exact(l, &QSpec::Rational(q), &TwistSpec::parse(twist).unwrap()).unwrap()
    }

    #[test]
    fn monoid_spectrum_two_sites() {
        // e on a single bond: eigenvalues {-q - 1/q, 0, 0, 0}
        let q = rat(3, 2);
        let e = monoid_local(&q);
        let tau = -(&q + q.recip());
        assert_eq!(mul4(&e, &e), e.clone().map(|r| r.map(|x| x * &tau)));
        let trace: Rational = (0..4).map(|i| e[i][i].clone()).sum();
        assert_eq!(trace, tau);
    }

    #[test]
    fn relations_exact() {
        for l in [6, 8] {
            let rep = relations_check(&exact(l, rat(3, 2), "none"), None);
            assert!(rep.passed() && rep.e_rho_e_checked, "{:?}", rep.failures);
        }
        let rep = relations_check(&exact(6, rat(7, 3), "diag:2"), None);
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn twist_only_touches_boundary() {
        let a = exact(6, rat(3, 2), "none");
        let b = exact(6, rat(3, 2), "diag:5/4");
        for j in 1..6 {
            assert_eq!(monoid_matrix(j, &a).unwrap(), monoid_matrix(j, &b).unwrap());
        }
        assert_ne!(monoid_matrix(6, &a).unwrap(), monoid_matrix(6, &b).unwrap());
        assert_eq!(monoid_matrix(7, &a).unwrap_err(), Error::InvalidIndex { j: 7, l: 6 });
    }

    #[test]
    fn hamiltonian_forms() {
        let p = exact(6, rat(3, 2), "diag:2");
        assert_eq!(tl_hamiltonian(&p), xxz_hamiltonian(&p));
        let rho = SparseOp::<Rational>::shift(4);
        let p = exact(4, rat(3, 2), "none");
        let h = tl_hamiltonian(&p);
        assert_eq!(rho.mul(&h), h.mul(&rho));
        // general twist: H_TL - H_XXZ = -(q - 1/q)/4 (σᶻ_1 - T σᶻ_1 T⁻¹)
        let p = exact(5, rat(3, 2), "general:1,1,1,2");
        let t = p.twist.clone().unwrap();
        let sz: Local1<Rational> = [[int(1), int(0)], [int(0), int(-1)]];
        let conj = |a: &Local1<Rational>, b: &Local1<Rational>| -> Local1<Rational> {
            std::array::from_fn(|r| std::array::from_fn(|c| (0..2).map(|m| &a[r][m] * &b[m][c]).sum()))
        };
        let tst = conj(&conj(&t.m, &sz), &t.inv);
        let diff: Local1<Rational> = std::array::from_fn(|r| std::array::from_fn(|c| &sz[r][c] - &tst[r][c]));
        let c = -(rat(3, 2) - rat(2, 3)) / int(4);
        let expected = SparseOp::one_site(5, 0, &diff).scale(&c);
        assert_eq!(tl_hamiltonian(&p).sub(&xxz_hamiltonian(&p)), expected);
    }

    #[test]
    fn first_charge_is_minus_h() {
        let p = exact(6, rat(7, 3), "diag:3");
        assert_eq!(charge_matrix(1, &p).unwrap(), tl_hamiltonian(&p).scale(&int(-1)));
        assert_eq!(charge_matrix(5, &p).unwrap_err(), Error::ChainTooShort { k: 5, l: 6, min: 7 });
    }

    #[test]
    fn charges_commute_exactly() {
        for twist in ["none", "diag:2"] {
            let p = exact(8, rat(3, 2), twist);
            let h = tl_hamiltonian(&p);
            for k in 2..=4 {
                let q = charge_matrix(k, &p).unwrap();
                assert!(commutes_exactly(&q, &h).unwrap(), "k = {k}, {twist}");
                assert!(q.commutator(&h).is_zero());
            }
        }
    }

    #[test]
    fn perturbed_charge_fails() {
        let p = exact(8, rat(3, 2), "none");
        let q = charge_matrix(3, &p).unwrap().add(&monoid_matrix(2, &p).unwrap().mul(&monoid_matrix(3, &p).unwrap()));
        assert!(!commutes_exactly(&q, &tl_hamiltonian(&p)).unwrap());
    }

    #[test]
    fn float_mode_agrees() {
        let p = ChainParams::float(8, &QSpec::parse("unit:1/5").unwrap(), &TwistSpec::parse("expdiag:0.3").unwrap()).unwrap();
        let h = tl_hamiltonian(&p);
        let q = charge_matrix(3, &p).unwrap();
        assert!(relative_commutator(&q, &h).unwrap() < 1e-12);
    }

    #[test]
    fn transfer_log_derivative() {
        let p = ChainParams::float(6, &QSpec::parse("unit:1/5").unwrap(), &TwistSpec::None).unwrap();
        let rep = logderiv_check(&p, 1e-4).unwrap();
        assert!(rep.commutator < 1e-12, "{rep:?}");
        assert!(rep.finite_difference < 1e-6, "{rep:?}");
        // exact first derivative from the series agrees
        let derivs = log_derivatives(&p, 1).unwrap();
        let h = tl_hamiltonian(&p);
        let bq = bracket(p.q);
        for (states, ds) in &derivs {
            let n = states.len();
            let expected = h.block(states) * (C::new(-2.0, 0.0) / bq)
                + DMatrix::<C>::identity(n, n) * ((p.q + p.q.inv()) * 6.0 / bq);
            assert!((&ds[0] - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn twisted_log_derivative() {
        let p = ChainParams::float(6, &QSpec::parse("unit:2/7").unwrap(), &TwistSpec::parse("expdiag:0.4").unwrap()).unwrap();
        let rep = logderiv_check(&p, 1e-4).unwrap();
        assert!(rep.commutator < 1e-12 && rep.finite_difference < 1e-6, "{rep:?}");
        let general = ChainParams::float(6, &QSpec::parse("unit:2/7").unwrap(), &TwistSpec::parse("general:1,1,1,2").unwrap()).unwrap();
        assert!(transfer_matrix(C::new(1.0, 0.0), &general).is_err());
    }

    #[test]
    fn low_charges_in_transfer_span() {
        for k in 2..=3 {
            let p = ChainParams::float(2 * k + 2, &QSpec::parse("unit:1/5").unwrap(), &TwistSpec::None).unwrap();
            let rep = span_check(k, &p).unwrap();
            assert!(rep.residual < 1e-8, "{rep:?}");
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(TwistSpec::parse("diag:1/3").unwrap(), TwistSpec::Diag(rat(1, 3)));
        assert!(TwistSpec::parse("general:1,2,3,4").is_err());
        assert!(TwistSpec::parse("diag:0").is_err());
        assert_eq!(QSpec::parse("3/2").unwrap(), QSpec::Rational(rat(3, 2)));
        assert!(matches!(QSpec::parse("0.6,0.8").unwrap(), QSpec::Complex(_)));
        assert!(ChainParams::exact(6, &QSpec::parse("0.6,0.8").unwrap(), &TwistSpec::None).is_err());
    }
}
