//! Open Temperley–Lieb diagrams on a sparse window of strands, and finite
//! linear combinations of them with τ-polynomial coefficients.
//!
//! A diagram on the window `[lo, lo + n)` is a perfect matching of `2n`
//! points: bottom points `0..n` and top points `n..2n`. Strands outside the
//! window go straight through. The monoid `e_i` lives on strands `i, i+1`.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::TauPoly;
use crate::words::{GeneralWord, MonoidIndex, TL1Word};

const UNSET: u16 = u16::MAX;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Diagram {
    lo: i64,
    pair: Vec<u16>,
}

impl Diagram {
    pub fn identity() -> Self {
        Diagram { lo: 0, pair: Vec::new() }
    }

    pub fn generator(i: MonoidIndex) -> Self {
        Diagram { lo: i, pair: vec![1, 0, 3, 2] }
    }

    /// Builds a diagram from a window start and a matching; checks planarity
    /// and trims through-strands at the edges.
    pub fn from_pairing(lo: i64, pair: Vec<u16>) -> Result<Self> {
        let n2 = pair.len();
        if n2 % 2 != 0 {
            return Err(Error::Invalid("pairing needs an even number of points".into()));
        }
        for (a, &b) in pair.iter().enumerate() {
            if b as usize >= n2 || pair[b as usize] as usize != a || b as usize == a {
                return Err(Error::Invalid("pairing is not a perfect matching".into()));
            }
        }
        let d = Diagram { lo, pair };
        if !d.is_planar() {
            return Err(Error::Invalid("pairing is not planar".into()));
        }
        Ok(d.trimmed())
    }

    pub fn is_identity(&self) -> bool {
        self.pair.is_empty()
    }

    pub fn width(&self) -> usize {
        self.pair.len() / 2
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.width() as i64
    }

    pub fn pairing(&self) -> &[u16] {
        &self.pair
    }

    /// Points around the boundary of the rectangle in cyclic order: bottom
    /// left to right, then top right to left. Planar iff no two chords cross.
    pub fn is_planar(&self) -> bool {
        let n = self.width();
        let cyc = |p: usize| if p < n { p } else { 3 * n - 1 - p };
        let mut stack: Vec<usize> = Vec::new();
        let mut order = vec![0usize; 2 * n];
        for p in 0..2 * n {
            order[cyc(p)] = p;
        }
        for &p in &order {
            let c = cyc(self.pair[p] as usize);
            if c > cyc(p) {
                stack.push(p);
            } else {
                match stack.pop() {
                    Some(top) if top == self.pair[p] as usize => {}
                    _ => return false,
                }
            }
        }
        stack.is_empty()
    }

    pub fn translate(&self, d: i64) -> Self {
        if self.is_identity() {
            return self.clone();
        }
        Diagram { lo: self.lo + d, pair: self.pair.clone() }
    }

    pub fn normalize_translation(&self) -> Result<(Diagram, i64)> {
        if self.is_identity() {
            return Err(Error::NoCanonicalShift);
        }
        Ok((self.translate(-self.lo), -self.lo))
    }

    /// Translation representative with `lo = 0`; the identity maps to itself.
    pub fn normalized(&self) -> Diagram {
        self.translate(-self.lo)
    }

    fn extended(&self, lo: i64, n: usize) -> Vec<u16> {
        let mut out: Vec<u16> = (0..2 * n).map(|p| if p < n { (p + n) as u16 } else { (p - n) as u16 }).collect();
        if self.is_identity() {
            return out;
        }
        let m = self.width();
        let o = (self.lo - lo) as usize;
        let map = |p: usize| if p < m { p + o } else { n + o + (p - m) };
        for p in 0..2 * m {
            out[map(p)] = map(self.pair[p] as usize) as u16;
        }
        out
    }

    fn trimmed(mut self) -> Self {
        let mut n = self.width();
        let mut left = 0;
        while left < n && self.pair[left] as usize == n + left {
            left += 1;
        }
        if left == n {
            return Diagram::identity();
        }
        let mut right = 0;
        while self.pair[n - 1 - right] as usize == 2 * n - 1 - right {
            right += 1;
        }
        if left == 0 && right == 0 {
            return self;
        }
        let m = n - left - right;
        let map = |p: usize| if p < n { p - left } else { m + (p - n - left) };
        let mut pair = vec![0u16; 2 * m];
        for b in left..n - right {
            pair[map(b)] = map(self.pair[b] as usize) as u16;
            pair[map(b + n)] = map(self.pair[b + n] as usize) as u16;
        }
        n = m;
        debug_assert_eq!(pair.len(), 2 * n);
        self.lo += left as i64;
        self.pair = pair;
        self
    }

    /// Stacks `self` on top of `below` (so `below` acts first) and returns the
    /// reduced diagram with the number of closed loops removed.
    pub fn compose(&self, below: &Diagram) -> (Diagram, usize) {
        if self.is_identity() {
            return (below.clone(), 0);
        }
        if below.is_identity() {
            return (self.clone(), 0);
        }
        let lo = self.lo.min(below.lo);
        let hi = self.hi().max(below.hi());
        let n = (hi - lo) as usize;
        let a = self.extended(lo, n);
        let b = below.extended(lo, n);
        let mut res = vec![UNSET; 2 * n];
        let mut seen = vec![false; n];
        for start in 0..2 * n {
            if res[start] != UNSET {
                continue;
            }
            // on_b: currently at point p of `b`, else at point p of `a`
            let (mut on_b, mut p) = (start < n, start);
            let end = loop {
                if on_b {
                    let q = b[p] as usize;
                    if q < n {
                        break q;
                    }
                    seen[q - n] = true;
                    on_b = false;
                    p = q - n;
                } else {
                    let q = a[p] as usize;
                    if q >= n {
                        break q;
                    }
                    seen[q] = true;
                    on_b = true;
                    p = q + n;
                }
            };
            res[start] = end as u16;
            res[end] = start as u16;
        }
        let mut loops = 0;
        for m in 0..n {
            if seen[m] {
                continue;
            }
            loops += 1;
            let mut cur = m;
            loop {
                seen[cur] = true;
                let via_a = a[cur] as usize;
                seen[via_a] = true;
                let via_b = b[via_a + n] as usize - n;
                if via_b == m {
                    break;
                }
                cur = via_b;
            }
        }
        (Diagram { lo, pair: res }.trimmed(), loops)
    }

    /// Diagram of the product of a word, with the number of loops removed.
    pub fn of_word(word: &GeneralWord) -> (Diagram, usize) {
        let mut d = Diagram::identity();
        let mut loops = 0;
        for &i in word.letters().iter().rev() {
            let (nd, l) = Diagram::generator(i).compose(&d);
            d = nd;
            loops += l;
        }
        (d, loops)
    }

    pub fn of_tl1(word: &TL1Word) -> Diagram {
        let (d, loops) = Diagram::of_word(&word.to_general());
        debug_assert_eq!(loops, 0);
        d
    }

    /// Vertical flip: swaps bottom and top rows (the anti-automorphism that
    /// reverses products).
    pub fn flipped(&self) -> Diagram {
        let n = self.width();
        let sw = |p: usize| if p < n { p + n } else { p - n };
        let mut pair = vec![0u16; 2 * n];
        for p in 0..2 * n {
            pair[sw(p)] = sw(self.pair[p] as usize) as u16;
        }
        Diagram { lo: self.lo, pair }
    }

    /// Horizontal mirror `strand s -> pivot - s`.
    pub fn mirrored(&self, pivot: i64) -> Diagram {
        if self.is_identity() {
            return self.clone();
        }
        let n = self.width();
        let mm = |p: usize| if p < n { n - 1 - p } else { n + (2 * n - 1 - p) };
        let mut pair = vec![0u16; 2 * n];
        for p in 0..2 * n {
            pair[mm(p)] = mm(self.pair[p] as usize) as u16;
        }
        Diagram { lo: pivot - (self.hi() - 1), pair }
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        write!(f, "D[{}..{})", self.lo, self.hi())?;
        let n = self.width();
        let mut chords = Vec::new();
        for p in 0..2 * n {
            let q = self.pair[p] as usize;
            if p < q {
                let name = |x: usize| if x < n { format!("b{}", x) } else { format!("t{}", x - n) };
                chords.push(format!("{}-{}", name(p), name(q)));
            }
        }
        write!(f, "{{{}}}", chords.join(","))
    }
}

/// Finite linear combination `Σ c_d d` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinComb {
    terms: HashMap<Diagram, TauPoly>,
}

impl LinComb {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(d: Diagram, c: TauPoly) -> Self {
        let mut out = Self::zero();
        out.add_term(d, &c);
        out
    }

    pub fn identity() -> Self {
        Self::single(Diagram::identity(), TauPoly::one())
    }

    pub fn generator(i: MonoidIndex) -> Self {
        Self::single(Diagram::generator(i), TauPoly::one())
    }

    pub fn embed_word(word: &GeneralWord) -> Self {
        let (d, loops) = Diagram::of_word(word);
        Self::single(d, TauPoly::tau_pow(loops))
    }

    pub fn add_term(&mut self, d: Diagram, c: &TauPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&d) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&d);
                }
            }
            None => {
                self.terms.insert(d, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, d: &Diagram) -> TauPoly {
        self.terms.get(d).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Diagram, &TauPoly)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> HashMap<Diagram, TauPoly> {
        self.terms
    }

    /// Terms in a deterministic order.
    pub fn sorted_terms(&self) -> Vec<(Diagram, TauPoly)> {
        let mut v: Vec<_> = self.terms.iter().map(|(d, c)| (d.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn add(&self, other: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &LinComb) {
        for (d, c) in &other.terms {
            self.add_term(d.clone(), c);
        }
    }

    pub fn sub(&self, other: &LinComb) -> LinComb {
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(d.clone(), &-c);
        }
        out
    }

    pub fn scale(&self, c: &TauPoly) -> LinComb {
        let mut out = LinComb::zero();
        if c.is_zero() {
            return out;
        }
        for (d, x) in &self.terms {
            out.add_term(d.clone(), &(x * c));
        }
        out
    }

    /// Product `self · other`, i.e. `other` acts first.
    pub fn mul(&self, other: &LinComb) -> LinComb {
        let mut out = LinComb::zero();
        for (da, ca) in &self.terms {
            for (db, cb) in &other.terms {
                let (d, loops) = da.compose(db);
                out.add_term(d, &(ca * cb).shift(loops));
            }
        }
        out
    }

    /// Parallel product for large operands.
    pub fn par_mul(&self, other: &LinComb) -> LinComb {
        let left: Vec<(&Diagram, &TauPoly)> = self.terms.iter().collect();
        left.par_iter()
            .fold(LinComb::zero, |mut acc, (da, ca)| {
                for (db, cb) in &other.terms {
                    let (d, loops) = da.compose(db);
                    acc.add_term(d, &(*ca * cb).shift(loops));
                }
                acc
            })
            .reduce(LinComb::zero, |mut a, b| {
                if a.len() < b.len() {
                    let mut b = b;
                    b.add_assign(&a);
                    return b;
                }
                a.add_assign(&b);
                a
            })
    }

    pub fn commutator(&self, other: &LinComb) -> LinComb {
        self.par_mul(other).sub(&other.par_mul(self))
    }

    pub fn translate(&self, d: i64) -> LinComb {
        LinComb { terms: self.terms.iter().map(|(x, c)| (x.translate(d), c.clone())).collect() }
    }
}

/// Lookup from reduced diagrams back to single-occurrence words, filled per
/// window width on demand.
#[derive(Default)]
pub struct Tl1Index {
    by_width: HashMap<usize, HashMap<Diagram, TL1Word>>,
}

impl Tl1Index {
    pub fn new() -> Self {
        Self::default()
    }

    /// The word whose diagram is `d`, or `None` if `d` is not the diagram of
    /// a single-occurrence word.
    pub fn word_of(&mut self, d: &Diagram) -> Option<TL1Word> {
        if d.is_identity() {
            return None;
        }
        let n = d.width();
        let table = self.by_width.entry(n).or_insert_with(|| build_width(n));
        table.get(&d.normalized()).map(|w| w.translate(d.lo()))
    }

    /// Read-only lookup; widths must have been requested before via `prepare`.
    pub fn lookup(&self, d: &Diagram) -> Option<TL1Word> {
        let table = self.by_width.get(&d.width())?;
        table.get(&d.normalized()).map(|w| w.translate(d.lo()))
    }

    pub fn prepare(&mut self, max_width: usize) {
        for n in 2..=max_width {
            self.by_width.entry(n).or_insert_with(|| build_width(n));
        }
    }
}

fn build_width(n: usize) -> HashMap<Diagram, TL1Word> {
    // words with min 0 and max n - 2 occupy strands [0, n)
    let max_w = n as i64 - 1;
    crate::words::enumerate_with(max_w, |p| p.w == max_w)
        .into_iter()
        .map(|w| (Diagram::of_tl1(&w), w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_relations() {
        for j in -3..6 {
            let e = Diagram::generator(j);
            assert_eq!(e.compose(&e), (e.clone(), 1));
            for s in [-1, 1] {
                let f = Diagram::generator(j + s);
                let (ef, l1) = e.compose(&f);
                let (efe, l2) = ef.compose(&e);
                assert_eq!((efe, l1 + l2), (e.clone(), 0));
            }
            for far in [2, 3, 5] {
                let f = Diagram::generator(j + far);
                assert_eq!(e.compose(&f), f.compose(&e));
            }
        }
    }

    #[test]
    fn identity_and_window() {
        let d = Diagram::generator(3);
        assert_eq!(Diagram::identity().compose(&d), (d.clone(), 0));
        assert_eq!((d.lo(), d.hi()), (3, 5));
        assert_eq!(d.normalize_translation().unwrap(), (Diagram::generator(0), -3));
        assert_eq!(Diagram::identity().normalize_translation(), Err(Error::NoCanonicalShift));
    }

    #[test]
    fn embed_examples() {
        let w = LinComb::embed_word(&GeneralWord::from_sequence(&[1, 2, 1]));
        assert_eq!(w, LinComb::generator(1));
        let w = LinComb::embed_word(&GeneralWord::from_sequence(&[0, 0, 0]));
        assert_eq!(w, LinComb::single(Diagram::generator(0), TauPoly::tau_pow(2)));
        let (d, _) = Diagram::of_word(&GeneralWord::from_sequence(&[0, 2]));
        assert_eq!((d.lo(), d.width()), (0, 4));
        // strand 1 bottom goes straight to strand 1 top? no: 0-1 cup and 2-3 cup
        assert_eq!(d.pairing()[1], 0);
    }

    #[test]
    fn tl1_index_round_trip() {
        let mut idx = Tl1Index::new();
        for w in crate::words::enumerate_candidates(5) {
            let d = Diagram::of_tl1(&w.translate(7));
            assert_eq!(idx.word_of(&d), Some(w.translate(7)));
        }
        let (d, _) = Diagram::of_word(&GeneralWord::from_sequence(&[1, 0, 2, 1]));
        assert_eq!(idx.word_of(&d), None);
    }

    #[test]
    fn planarity_check() {
        assert!(Diagram::generator(0).is_planar());
        assert!(Diagram::from_pairing(0, vec![3, 2, 1, 0]).is_err());
        assert_eq!(Diagram::from_pairing(0, vec![2, 3, 0, 1]).unwrap(), Diagram::identity());
        assert_eq!(Diagram::from_pairing(4, vec![1, 0, 3, 2]).unwrap(), Diagram::generator(4));
    }

    #[test]
    fn flip_reverses_products() {
        let w = GeneralWord::from_sequence(&[0, 1, 3, 2]);
        let r = GeneralWord::from_sequence(&[2, 3, 1, 0]);
        assert_eq!(Diagram::of_word(&w).0.flipped(), Diagram::of_word(&r).0);
    }
}
