//! Emitters for charge densities: JSON, CSV, TSV (fixture layout) and a TeX
//! table. All of them list terms by length, then by word notation.

use num_traits::{One, Signed};
use serde::Serialize;
use serde_json::{json, Value};

use crate::charges::ChargeDensity;
use crate::poly::TauPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Tsv,
    Tex,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "tex" => Ok(Format::Tex),
            _ => Err(format!("unknown format {s:?} (json, csv, tsv, tex)")),
        }
    }
}

#[derive(Serialize)]
struct Term {
    word: Vec<i64>,
    w: i64,
    t: i64,
    v: i64,
    g: i64,
    coeff: Vec<(String, usize)>,
}

/// `{"k": 4, "terms": [{"word": [0, 1], "w": 2, …, "coeff": [["-2", 0]]}, …]}`.
pub fn to_json(d: &ChargeDensity) -> Value {
    let terms: Vec<Term> = d
        .sorted()
        .into_iter()
        .map(|(w, c)| {
            let p = w.params();
            Term { word: w.sequence(), w: p.w, t: p.t, v: p.v, g: p.g, coeff: c.to_pairs() }
        })
        .collect();
    json!({ "k": d.k, "terms": terms })
}

pub fn to_csv(d: &ChargeDensity) -> String {
    let mut out = String::from("word,w,t,v,g,coefficient\n");
    for (w, c) in d.sorted() {
        let p = w.params();
        out.push_str(&format!("{},{},{},{},{},{}\n", w.notation(), p.w, p.t, p.v, p.g, c));
    }
    out
}

/// Same layout as the bundled fixture files.
pub fn to_tsv(d: &ChargeDensity, series: &str) -> String {
    let mut out = format!("# series\t{series}\n# k\t{}\n# normalization\t1\n# scope\tlength>=1\n", d.k);
    for (w, c) in d.sorted() {
        out.push_str(&format!("{}\t{}\n", w.notation(), c));
    }
    out
}

pub fn tex_poly(p: &TauPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (pow, c)) in p.terms().enumerate() {
        if c.is_negative() {
            s.push('-');
        } else if i > 0 {
            s.push('+');
        }
        let mag = c.abs();
        let num = if mag.is_integer() { mag.to_string() } else { format!("\\tfrac{{{}}}{{{}}}", mag.numer(), mag.denom()) };
        let tau = match pow {
            0 => String::new(),
            1 => "\\tau".into(),
            _ => format!("\\tau^{{{pow}}}"),
        };
        if pow == 0 {
            s.push_str(&num);
        } else if mag.is_one() {
            s.push_str(&tau);
        } else {
            s.push_str(&num);
            s.push_str(&tau);
        }
    }
    s
}

pub fn to_tex(d: &ChargeDensity, label: &str) -> String {
    let mut out = format!("\\begin{{tabular}}{{l|r}}\nindices & ${label}$ \\\\\\hline\n");
    for (w, c) in d.sorted() {
        out.push_str(&format!("{} & ${}$ \\\\\n", w.notation(), tex_poly(&c)));
    }
    out.push_str("\\end{tabular}\n");
    out
}

pub fn render(d: &ChargeDensity, format: Format, label: &str) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&to_json(d)).expect("serializable") + "\n",
        Format::Csv => to_csv(d),
        Format::Tsv => to_tsv(d, label),
        Format::Tex => to_tex(d, label),
    }
}
