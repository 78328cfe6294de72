//! Reference tables of `Q_k`, `A_k` and `G_k` for `k = 2..=7`, embedded at
//! build time, and an exact diff against computed densities.

use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::charges::ChargeDensity;
use crate::error::{Error, Result};
use crate::poly::{Rational, TauPoly};
use crate::words::TL1Word;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize)]
pub enum Series {
    Q,
    A,
    G,
}

impl Series {
    pub fn parse(s: &str) -> Result<Series> {
        match s.trim() {
            "Q" => Ok(Series::Q),
            "A" => Ok(Series::A),
            "G" => Ok(Series::G),
            other => Err(Error::Parse(format!("unknown series '{other}'"))),
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Series::Q => "Q",
            Series::A => "A",
            Series::G => "G",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub series: Series,
    pub k: usize,
    /// The table lists `normalization · X_k`.
    pub normalization: Rational,
    /// Words shorter than this are not tabulated.
    pub min_len: usize,
    pub rows: Vec<(TL1Word, TauPoly)>,
}

macro_rules! embed {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../fixtures/", $name, ".tsv")))),*]
    };
}

const SOURCES: &[(&str, &str)] = embed!(
    "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "A2", "A3", "A4", "A5", "A6", "A7", "G2", "G3", "G4", "G5", "G6", "G7",
);

impl Fixture {
    pub fn parse(name: &str, text: &str) -> Result<Fixture> {
        let mut series = None;
        let mut k = None;
        let mut normalization = Rational::one();
        let mut min_len = 1;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let at = |msg: String| Error::Parse(format!("{name}:{}: {msg}", n + 1));
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta.trim().split_once('\t').ok_or_else(|| at("bad header".into()))?;
                match key.trim() {
                    "series" => series = Some(Series::parse(value).map_err(|e| at(e.to_string()))?),
                    "k" => k = Some(value.trim().parse().map_err(|_| at("bad k".into()))?),
                    "normalization" => {
                        normalization = value.trim().parse().map_err(|_| at("bad normalization".into()))?
                    }
                    "scope" => {
                        let v = value.trim().strip_prefix("length>=").ok_or_else(|| at("bad scope".into()))?;
                        min_len = v.parse().map_err(|_| at("bad scope".into()))?;
                    }
                    other => return Err(at(format!("unknown header '{other}'"))),
                }
                continue;
            }
            let (word, coeff) = line.split_once('\t').ok_or_else(|| at("expected word<TAB>coefficient".into()))?;
            let word = TL1Word::parse(word).map_err(|e| at(e.to_string()))?;
            let coeff = TauPoly::parse(coeff).map_err(|e| at(e.to_string()))?;
            rows.push((word, coeff));
        }
        Ok(Fixture {
            series: series.ok_or_else(|| Error::Parse(format!("{name}: missing series")))?,
            k: k.ok_or_else(|| Error::Parse(format!("{name}: missing k")))?,
            normalization,
            min_len,
            rows,
        })
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.series, self.k)
    }

    /// Compares `normalization · computed` with the table, within its scope.
    pub fn diff(&self, computed: &ChargeDensity) -> FixtureDiff {
        let scaled = computed.scale_rational(&self.normalization);
        let mut report = FixtureDiff { name: self.name(), ..Default::default() };
        let expected = ChargeDensity::from_terms(self.k, self.rows.iter().cloned());
        for (w, c) in expected.iter() {
            let got = scaled.get(w);
            if got.is_zero() {
                report.missing.push((w.notation(), c.to_string()));
            } else if &got != c {
                report.mismatched.push(Mismatch {
                    word: w.notation(),
                    expected: c.to_string(),
                    computed: got.to_string(),
                    delta: (&got - c).to_string(),
                });
            }
        }
        for (w, c) in scaled.iter() {
            if w.len() >= self.min_len && expected.get(w).is_zero() {
                report.extra.push((w.notation(), c.to_string()));
            }
        }
        report
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Mismatch {
    pub word: String,
    pub expected: String,
    pub computed: String,
    pub delta: String,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct FixtureDiff {
    pub name: String,
    pub missing: Vec<(String, String)>,
    pub extra: Vec<(String, String)>,
    pub mismatched: Vec<Mismatch>,
}

impl FixtureDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.mismatched.is_empty()
    }
}

impl fmt::Display for FixtureDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{}: ok", self.name);
        }
        writeln!(f, "{}: {} missing, {} extra, {} mismatched", self.name, self.missing.len(), self.extra.len(), self.mismatched.len())?;
        for (w, c) in &self.missing {
            writeln!(f, "  missing {w} {c}")?;
        }
        for (w, c) in &self.extra {
            writeln!(f, "  extra {w} {c}")?;
        }
        for m in &self.mismatched {
            writeln!(f, "  {} expected {} got {} (delta {})", m.word, m.expected, m.computed, m.delta)?;
        }
        Ok(())
    }
}

pub fn load_fixtures() -> Result<Vec<Fixture>> {
    SOURCES.iter().map(|(name, text)| Fixture::parse(name, text)).collect()
}

pub fn fixture(series: Series, k: usize) -> Result<Fixture> {
    load_fixtures()?
        .into_iter()
        .find(|f| f.series == series && f.k == k)
        .ok_or_else(|| Error::Invalid(format!("no table for {series}{k}")))
}

/// The density a table should match, recomputed from scratch: `Q_k` from the
/// closed form, `A_k` from the transfer series, `G_k` from the boost recursion.
pub fn recompute(series: Series, k: usize) -> Result<ChargeDensity> {
    match series {
        Series::Q => Ok(crate::charges::build_charge(k)),
        Series::A => Ok(crate::oracle::a_series_clustered(k)?.density),
        Series::G => Ok(crate::oracle::boost_series(k, 4 * k)?.pop().expect("k >= 1")),
    }
}

/// Recomputes every bundled table and diffs it.
pub fn selftest() -> Result<Vec<FixtureDiff>> {
    let all = load_fixtures()?;
    let max_g = all.iter().filter(|f| f.series == Series::G).map(|f| f.k).max().unwrap_or(1);
    let boost = crate::oracle::boost_series(max_g, 4 * max_g)?;
    all.iter()
        .map(|f| {
            let computed = match f.series {
                Series::G => boost[f.k - 1].clone(),
                s => recompute(s, f.k)?,
            };
            Ok(f.diff(&computed))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_tables_parse() {
        let all = load_fixtures().unwrap();
        assert_eq!(all.len(), 18);
        let q6 = fixture(Series::Q, 6).unwrap();
        assert!(q6.rows.contains(&(TL1Word::parse("[3 2 1 0]").unwrap(), TauPoly::parse("2-2*tau^2").unwrap())));
        let g6 = fixture(Series::G, 6).unwrap();
        assert!(g6.rows.contains(&(TL1Word::parse("[0 1]").unwrap(), TauPoly::parse("16+22*tau^2+tau^4").unwrap())));
        assert_eq!(fixture(Series::A, 7).unwrap().normalization, Rational::from_integer(4.into()));
    }

    #[test]
    fn self_diff_is_empty() {
        let f = fixture(Series::Q, 4).unwrap();
        let d = ChargeDensity::from_terms(4, f.rows.clone());
        assert!(f.diff(&d).is_empty());
        assert!(f.diff(&ChargeDensity::new(4)).missing.len() == f.rows.len());
    }

    #[test]
    fn parse_errors_carry_location() {
        let e = Fixture::parse("X", "# series\tQ\n# k\t2\n[0 1]\t2+\n").unwrap_err();
        assert!(e.to_string().contains("X:3"));
    }
}
