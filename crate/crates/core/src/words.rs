//! Words in the monoids `e_j`: general products, the single-occurrence canonical
//! form, structural parameters and environment codes.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use crate::error::{Error, Result};

pub type MonoidIndex = i64;

/// A product `e_{i_m} ⋯ e_{i_1}` stored left to right; the last letter acts first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GeneralWord {
    letters: Vec<MonoidIndex>,
}

impl GeneralWord {
    pub fn from_sequence(indices: &[MonoidIndex]) -> Self {
        GeneralWord { letters: indices.to_vec() }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[MonoidIndex] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn canonical_tl1(&self) -> Result<TL1Word> {
        let mut pos: HashMap<MonoidIndex, usize> = HashMap::new();
        for (p, &i) in self.letters.iter().enumerate() {
            if pos.insert(i, p).is_some() {
                return Err(Error::NotTl1(i));
            }
        }
        let support: Vec<MonoidIndex> = pos.keys().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let flags = support
            .windows(2)
            .map(|w| w[1] == w[0] + 1 && pos[&w[1]] < pos[&w[0]])
            .collect();
        Ok(TL1Word::from_parts(support, flags))
    }

    /// Representative of the commutation class: the lexicographically smallest
    /// reordering reachable by swapping neighbouring letters `|i - j| > 1`.
    pub fn commutation_normal_form(&self) -> GeneralWord {
        let n = self.letters.len();
        let mut preds = vec![0usize; n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if (self.letters[a] - self.letters[b]).abs() <= 1 {
                    succs[a].push(b);
                    preds[b] += 1;
                }
            }
        }
        let mut heap: BinaryHeap<Reverse<(MonoidIndex, usize)>> =
            (0..n).filter(|&p| preds[p] == 0).map(|p| Reverse((self.letters[p], p))).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(Reverse((letter, p))) = heap.pop() {
            out.push(letter);
            for &s in &succs[p] {
                preds[s] -= 1;
                if preds[s] == 0 {
                    heap.push(Reverse((self.letters[s], s)));
                }
            }
        }
        GeneralWord { letters: out }
    }

    pub fn translate(&self, d: MonoidIndex) -> Self {
        GeneralWord { letters: self.letters.iter().map(|i| i + d).collect() }
    }

    /// Parses `[i_m … i_1]`. Whitespace separates indices; a bracket without
    /// whitespace and with more than one character is read digit by digit
    /// (the compact form `[210345]`).
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("word '{s}' must be enclosed in brackets")))?
            .trim();
        if inner.is_empty() {
            return Ok(Self::identity());
        }
        let bad = || Error::Parse(format!("bad word notation '{s}'"));
        let letters = if inner.contains(char::is_whitespace) || inner.contains(',') {
            inner
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<MonoidIndex>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        } else if inner.starts_with('-') {
            vec![inner.parse::<MonoidIndex>().map_err(|_| bad())?]
        } else {
            inner
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as MonoidIndex).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(GeneralWord { letters })
    }
}

impl fmt::Display for GeneralWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, serde::Serialize)]
pub struct WordParams {
    pub w: i64,
    pub t: i64,
    pub v: i64,
    pub g: i64,
}

impl WordParams {
    pub fn new(w: i64, t: i64, v: i64, g: i64) -> Self {
        WordParams { w, t, v, g }
    }

    /// `W = w + v + g`
    pub fn big_w(&self) -> i64 {
        self.w + self.v + self.g
    }

    /// `T = t + v + g`
    pub fn big_t(&self) -> i64 {
        self.t + self.v + self.g
    }
}

impl fmt::Display for WordParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.w, self.t, self.v, self.g)
    }
}

/// Single-occurrence word: a support set plus one flag per adjacent pair
/// `{i, i+1}`, set when `e_{i+1}` is applied after `e_i`.
///
/// `flags[n]` belongs to `(support[n], support[n+1])` and is always false when
/// the two are not adjacent integers.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TL1Word {
    support: Vec<MonoidIndex>,
    flags: Vec<bool>,
}

impl TL1Word {
    fn from_parts(support: Vec<MonoidIndex>, flags: Vec<bool>) -> Self {
        debug_assert_eq!(flags.len() + 1, support.len().max(1));
        TL1Word { support, flags }
    }

    /// Builds a word from a support and the set of transposed pairs, given by
    /// their left index. Pairs outside the support are rejected.
    pub fn new(support: &[MonoidIndex], transposed: &[MonoidIndex]) -> Result<Self> {
        let set: BTreeSet<MonoidIndex> = support.iter().copied().collect();
        if set.is_empty() {
            return Err(Error::Invalid("a single-occurrence word needs a nonempty support".into()));
        }
        if set.len() != support.len() {
            return Err(Error::NotTl1(support[0]));
        }
        let support: Vec<MonoidIndex> = set.into_iter().collect();
        for &i in transposed {
            if !(support.contains(&i) && support.contains(&(i + 1))) {
                return Err(Error::Invalid(format!("pair ({i}, {}) is not in the support", i + 1)));
            }
        }
        let flags = support.windows(2).map(|w| w[1] == w[0] + 1 && transposed.contains(&w[0])).collect();
        Ok(TL1Word { support, flags })
    }

    pub fn single(i: MonoidIndex) -> Self {
        TL1Word { support: vec![i], flags: Vec::new() }
    }

    pub fn parse(s: &str) -> Result<Self> {
        GeneralWord::parse(s)?.canonical_tl1()
    }

    pub fn support(&self) -> &[MonoidIndex] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min_index(&self) -> MonoidIndex {
        self.support[0]
    }

    pub fn max_index(&self) -> MonoidIndex {
        *self.support.last().unwrap()
    }

    pub fn contains(&self, i: MonoidIndex) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// Flag of the pair `(i, i+1)`; `None` if the pair is not in the support.
    pub fn transposed(&self, i: MonoidIndex) -> Option<bool> {
        let n = self.support.binary_search(&i).ok()?;
        if self.support.get(n + 1) == Some(&(i + 1)) {
            Some(self.flags[n])
        } else {
            None
        }
    }

    /// Left indices of all adjacent pairs in the support.
    pub fn adjacent_pairs(&self) -> Vec<MonoidIndex> {
        self.support.windows(2).filter(|w| w[1] == w[0] + 1).map(|w| w[0]).collect()
    }

    pub fn transposed_pairs(&self) -> Vec<MonoidIndex> {
        self.support.windows(2).zip(&self.flags).filter(|(_, &f)| f).map(|(w, _)| w[0]).collect()
    }

    pub fn params(&self) -> WordParams {
        let w = self.max_index() - self.min_index() + 1;
        let t = self.flags.iter().filter(|&&f| f).count() as i64;
        let v = w - self.support.len() as i64;
        let g = self.support.windows(2).filter(|x| x[1] > x[0] + 1).count() as i64;
        WordParams { w, t, v, g }
    }

    pub fn translate(&self, d: MonoidIndex) -> Self {
        TL1Word { support: self.support.iter().map(|i| i + d).collect(), flags: self.flags.clone() }
    }

    /// Translation representative with minimal index 0.
    pub fn normalized(&self) -> Self {
        self.translate(-self.min_index())
    }

    /// Spatial mirror `i -> pivot - i`. Every pair keeps its application order
    /// in time, which flips its flag.
    pub fn reflect(&self, pivot: MonoidIndex) -> Self {
        let transposed: Vec<MonoidIndex> = self
            .adjacent_pairs()
            .into_iter()
            .filter(|&i| !self.transposed(i).unwrap())
            .map(|i| pivot - i - 1)
            .collect();
        let support: Vec<MonoidIndex> = self.support.iter().map(|i| pivot - i).collect();
        TL1Word::new(&support, &transposed).expect("mirror of a valid word")
    }

    /// Reverses the application order: every adjacent-pair flag is negated.
    pub fn time_reverse(&self) -> Self {
        let flags = self
            .support
            .windows(2)
            .zip(&self.flags)
            .map(|(w, &f)| w[1] == w[0] + 1 && !f)
            .collect();
        TL1Word { support: self.support.clone(), flags }
    }

    /// Application sequence for display: among all valid orders the
    /// lexicographically smallest, so indices increase unless an adjacent pair
    /// forces otherwise.
    pub fn sequence(&self) -> Vec<MonoidIndex> {
        let n = self.support.len();
        // edge a -> b: support[a] is written before support[b]
        let mut preds = vec![0usize; n];
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in 0..n.saturating_sub(1) {
            if self.support[a + 1] == self.support[a] + 1 {
                let (first, second) = if self.flags[a] { (a + 1, a) } else { (a, a + 1) };
                succs[first].push(second);
                preds[second] += 1;
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&a| preds[a] == 0).map(Reverse).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(Reverse(a)) = heap.pop() {
            out.push(self.support[a]);
            for &s in &succs[a] {
                preds[s] -= 1;
                if preds[s] == 0 {
                    heap.push(Reverse(s));
                }
            }
        }
        out
    }

    pub fn to_general(&self) -> GeneralWord {
        GeneralWord::from_sequence(&self.sequence())
    }

    pub fn notation(&self) -> String {
        self.to_general().to_string()
    }

    /// Monoids that can be moved to the right end of the product (applied first).
    pub fn initial_monoids(&self) -> Vec<MonoidIndex> {
        self.support
            .iter()
            .copied()
            .filter(|&i| {
                // e_i is applied first iff no neighbour is applied before it
                let left_before = self.transposed(i - 1) == Some(false);
                let right_before = self.transposed(i) == Some(true);
                !left_before && !right_before
            })
            .collect()
    }

    /// Monoids that can be moved to the left end of the product (applied last).
    pub fn final_monoids(&self) -> Vec<MonoidIndex> {
        self.support
            .iter()
            .copied()
            .filter(|&i| {
                let left_after = self.transposed(i - 1) == Some(true);
                let right_after = self.transposed(i) == Some(false);
                !left_after && !right_after
            })
            .collect()
    }

    pub fn classify_environments(&self) -> Vec<(MonoidIndex, EnvCode)> {
        let mut out = Vec::new();
        for (n, &i) in self.support.iter().enumerate() {
            let left = match self.transposed(i - 1) {
                Some(true) => Side::F,
                Some(false) => Side::P,
                None if n == 0 => Side::Vacancy(3),
                None => Side::Vacancy(if i - self.support[n - 1] - 1 == 1 { 1 } else { 2 }),
            };
            let right = match self.transposed(i) {
                Some(true) => Side::P,
                Some(false) => Side::F,
                None if n + 1 == self.support.len() => Side::Vacancy(3),
                None => Side::Vacancy(if self.support[n + 1] - i - 1 == 1 { 1 } else { 2 }),
            };
            let code = match (left, right) {
                (Side::P, Side::P) => EnvCode::PP,
                (Side::F, Side::F) => EnvCode::FF,
                (Side::P, Side::F) | (Side::F, Side::P) => continue,
                (Side::P, Side::Vacancy(s)) => EnvCode::PR(s),
                (Side::F, Side::Vacancy(s)) => EnvCode::FR(s),
                (Side::Vacancy(s), Side::P) => EnvCode::PL(s),
                (Side::Vacancy(s), Side::F) => EnvCode::FL(s),
                (Side::Vacancy(a), Side::Vacancy(b)) => EnvCode::LR(a, b),
            };
            out.push((i, code));
        }
        out
    }

    fn sort_key(&self) -> (usize, Vec<MonoidIndex>) {
        (self.support.len(), self.sequence())
    }
}

#[derive(Clone, Copy)]
enum Side {
    P,
    F,
    Vacancy(u8),
}

impl Ord for TL1Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for TL1Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TL1Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.notation())
    }
}

/// Environment code of a contributing monoid. Suffix 1: one-vacancy gap,
/// 2: longer gap, 3: end of the word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum EnvCode {
    PL(u8),
    PR(u8),
    FL(u8),
    FR(u8),
    PP,
    FF,
    LR(u8, u8),
}

impl EnvCode {
    pub fn all() -> Vec<EnvCode> {
        let mut v = Vec::with_capacity(23);
        for s in 1..=3 {
            v.extend([EnvCode::PL(s), EnvCode::PR(s), EnvCode::FL(s), EnvCode::FR(s)]);
        }
        v.push(EnvCode::PP);
        v.push(EnvCode::FF);
        for a in 1..=3 {
            for b in 1..=3 {
                v.push(EnvCode::LR(a, b));
            }
        }
        v
    }

    /// P <-> F and L <-> R.
    pub fn mirror(self) -> EnvCode {
        match self {
            EnvCode::PL(s) => EnvCode::FR(s),
            EnvCode::PR(s) => EnvCode::FL(s),
            EnvCode::FL(s) => EnvCode::PR(s),
            EnvCode::FR(s) => EnvCode::PL(s),
            EnvCode::PP => EnvCode::FF,
            EnvCode::FF => EnvCode::PP,
            EnvCode::LR(a, b) => EnvCode::LR(b, a),
        }
    }

    pub fn parse(s: &str) -> Result<EnvCode> {
        let b = s.trim().as_bytes();
        let digit = |c: u8| match c {
            b'1'..=b'3' => Ok(c - b'0'),
            _ => Err(Error::Parse(format!("bad environment code '{s}'"))),
        };
        match b {
            b"PP" => Ok(EnvCode::PP),
            b"FF" => Ok(EnvCode::FF),
            [b'P', b'L', d] => Ok(EnvCode::PL(digit(*d)?)),
            [b'P', b'R', d] => Ok(EnvCode::PR(digit(*d)?)),
            [b'F', b'L', d] => Ok(EnvCode::FL(digit(*d)?)),
            [b'F', b'R', d] => Ok(EnvCode::FR(digit(*d)?)),
            [b'L', a, b'R', d] => Ok(EnvCode::LR(digit(*a)?, digit(*d)?)),
            _ => Err(Error::Parse(format!("bad environment code '{s}'"))),
        }
    }
}

impl fmt::Display for EnvCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvCode::PL(s) => write!(f, "PL{s}"),
            EnvCode::PR(s) => write!(f, "PR{s}"),
            EnvCode::FL(s) => write!(f, "FL{s}"),
            EnvCode::FR(s) => write!(f, "FR{s}"),
            EnvCode::PP => write!(f, "PP"),
            EnvCode::FF => write!(f, "FF"),
            EnvCode::LR(a, b) => write!(f, "L{a}R{b}"),
        }
    }
}

/// Every single-occurrence word with minimal index 0 and `w + v + g <= k`.
pub fn enumerate_candidates(k: usize) -> Vec<TL1Word> {
    enumerate_with(k as i64, |p| p.big_w() <= k as i64)
}

/// Every single-occurrence word with minimal index 0, width at most `max_w`
/// and parameters accepted by `keep`, in canonical order.
pub fn enumerate_with(max_w: i64, keep: impl Fn(&WordParams) -> bool) -> Vec<TL1Word> {
    let mut out = Vec::new();
    if max_w < 1 {
        return out;
    }
    // supports are subsets of [0, max_w) containing 0
    let inner = (max_w - 1) as u32;
    for mask in 0u64..(1u64 << inner) {
        let mut support = vec![0];
        support.extend((0..inner).filter(|b| mask >> b & 1 == 1).map(|b| b as i64 + 1));
        let base = TL1Word { flags: vec![false; support.len() - 1], support };
        let pairs: Vec<usize> = (0..base.flags.len()).filter(|&n| base.support[n + 1] == base.support[n] + 1).collect();
        let g = base.params().g;
        let w = base.params().w;
        let v = base.params().v;
        // cheap prefilter with t = 0; t does not enter W
        if !(0..=pairs.len() as i64).any(|t| keep(&WordParams { w, t, v, g })) {
            continue;
        }
        for fm in 0u64..(1u64 << pairs.len()) {
            let mut word = base.clone();
            for (b, &n) in pairs.iter().enumerate() {
                word.flags[n] = fm >> b & 1 == 1;
            }
            if keep(&word.params()) {
                out.push(word);
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> TL1Word {
        GeneralWord::from_sequence(&[2, 1, 3, 4, 10, 9, 8, 7, 6, 11, 13, 12, 17, 20, 19]).canonical_tl1().unwrap()
    }

    #[test]
    fn fig1_parameters_and_codes() {
        let p = fig1();
        assert_eq!(p.params(), WordParams::new(20, 7, 5, 3));
        let codes: Vec<String> = p.classify_environments().iter().map(|(i, c)| format!("e{i}:{c}")).collect();
        assert_eq!(
            codes.join(" "),
            "e1:PL3 e2:FF e4:PR1 e6:PL1 e10:FF e12:PP e13:FR2 e17:L2R1 e19:PL1 e20:FR3"
        );
    }

    #[test]
    fn canonical_form_examples() {
        let w01 = GeneralWord::from_sequence(&[0, 1]).canonical_tl1().unwrap();
        assert_eq!(w01.transposed(0), Some(false));
        let w10 = GeneralWord::from_sequence(&[1, 0]).canonical_tl1().unwrap();
        assert_eq!(w10.transposed(0), Some(true));
        assert_eq!(GeneralWord::from_sequence(&[0, 0]).canonical_tl1(), Err(Error::NotTl1(0)));
        assert_eq!(TL1Word::single(5).params(), WordParams::new(1, 0, 0, 0));
        assert_eq!(TL1Word::parse("[0 2]").unwrap().params(), WordParams::new(3, 0, 1, 1));
    }

    #[test]
    fn display_order_matches_table_notation() {
        for s in ["[2 1 0 3]", "[0 3 2 1]", "[1 0 4 3]", "[4 3 2 1 0 5]", "[0 2 1 5 4 3]"] {
            assert_eq!(TL1Word::parse(s).unwrap().notation(), s);
        }
        assert_eq!(TL1Word::parse("[432105]").unwrap().notation(), "[4 3 2 1 0 5]");
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_candidates(1), vec![TL1Word::single(0)]);
        let k2: Vec<String> = enumerate_candidates(2).iter().map(|w| w.notation()).collect();
        assert_eq!(k2, ["[0]", "[0 1]", "[1 0]"]);
        let k5 = enumerate_candidates(5);
        assert!(k5.contains(&TL1Word::parse("[0 2]").unwrap()));
        assert_eq!(k5.iter().filter(|w| w.len() == 5).count(), 16);
        assert!(k5.iter().all(|w| w.params().big_w() <= 5));
    }

    #[test]
    fn reflect_and_reverse() {
        let w = TL1Word::parse("[0 1]").unwrap();
        assert_eq!(w.reflect(1), TL1Word::parse("[1 0]").unwrap());
        assert_eq!(w.time_reverse(), TL1Word::parse("[1 0]").unwrap());
        assert_eq!(TL1Word::single(0).reflect(0), TL1Word::single(0));
        let p = fig1();
        assert_eq!(p.reflect(7).reflect(7), p);
        assert_eq!(p.time_reverse().time_reverse(), p);
    }

    #[test]
    fn isolated_and_pair_codes() {
        assert_eq!(TL1Word::single(0).classify_environments(), vec![(0, EnvCode::LR(3, 3))]);
        // e_1 acts first, so e_0 follows it
        let w = TL1Word::parse("[0 1]").unwrap();
        assert_eq!(w.classify_environments(), vec![(0, EnvCode::FL(3)), (1, EnvCode::PR(3))]);
        let w = TL1Word::parse("[1 0]").unwrap();
        assert_eq!(w.classify_environments(), vec![(0, EnvCode::PL(3)), (1, EnvCode::FR(3))]);
    }

    #[test]
    fn commutation_normal_form_identifies_swaps() {
        let a = GeneralWord::from_sequence(&[3, 0, 1, 3]);
        let b = GeneralWord::from_sequence(&[0, 3, 3, 1]);
        assert_eq!(a.commutation_normal_form(), b.commutation_normal_form());
        let c = GeneralWord::from_sequence(&[0, 1, 0]);
        let d = GeneralWord::from_sequence(&[1, 0, 0]);
        assert_ne!(c.commutation_normal_form(), d.commutation_normal_form());
    }

    #[test]
    fn env_code_parse_round_trip() {
        for c in EnvCode::all() {
            assert_eq!(EnvCode::parse(&c.to_string()).unwrap(), c);
            assert_eq!(c.mirror().mirror(), c);
        }
        assert_eq!(EnvCode::all().len(), 23);
    }
}
