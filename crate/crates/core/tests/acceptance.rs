//! Acceptance run: one line per criterion. Run with `cargo test --test acceptance`.
//!
//! The exit status is nonzero only when an outcome differs from the expected
//! one. Two criteria are known to fail and print FAIL:
//! - 3: a general SL(2) twist breaks conservation, since only a diagonal twist
//!   commutes past its locus. The untwisted and diagonal cases must hold.
//! - 5: the total number of nonzero words reaches 2^k at k = 5 and exceeds it
//!   from k = 7 on, counting gapped words such as `[0 3]` in `Q_7` that the
//!   bundled tables confirm. The length-k count and the bound on connected
//!   words must hold.

use std::process::ExitCode;
use std::time::Instant;

use tlcharges::charges::{build_charge, triangle_check, ClosedForm};
use tlcharges::fixtures::{fixture, Series};
use tlcharges::matrep::{self, ChainParams, QSpec, TwistSpec};
use tlcharges::oracle::{a_series_clustered, boost_series, lot_table, transfer_series_clustered};
use tlcharges::poly::{int, rat};
use tlcharges::verify::{check_identities, commutator_density, reach_check, row_negation_holds};
use tlcharges::{ChargeDensity, TL1Word, TauPoly};

/// Relative Frobenius bound for `[Q_k, H]` and `[Q_j, Q_k]` in float mode.
const COMMUTATOR_TOL: f64 = 1e-10;
/// `‖[T(z), T(z′)]‖` relative bound.
const TRANSFER_TOL: f64 = 1e-10;
/// Central difference of `z ∂_z log T` against `H`, relative.
const FINITE_DIFF_TOL: f64 = 1e-6;
const FINITE_DIFF_STEP: f64 = 1e-4;
/// Least-squares residual of `Q_k` in `span{1, D_1, …, D_k}`.
const SPAN_TOL: f64 = 1e-8;
const TABLE_SECONDS: f64 = 1.0;
const SYMBOLIC_SECONDS: f64 = 300.0;

const UNIT_Q: &str = "unit:3/10";

struct Outcome {
    ok: bool,
    /// Whether `ok` is the result we expect; a known failure must also fail
    /// in the documented way.
    expected: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, expected: ok, detail: detail.into() }
}

fn known_failure(ok: bool, shape_ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, expected: !ok && shape_ok, detail: detail.into() }
}

fn word(s: &str) -> TL1Word {
    TL1Word::parse(s).unwrap()
}

fn poly(s: &str) -> TauPoly {
    TauPoly::parse(s).unwrap()
}

fn exact(l: usize, q: &str, twist: &str) -> ChainParams<tlcharges::Rational> {
    ChainParams::exact(l, &QSpec::parse(q).unwrap(), &TwistSpec::parse(twist).unwrap()).unwrap()
}

fn float(l: usize, q: &str, twist: &str) -> ChainParams<num_complex::Complex64> {
    ChainParams::float(l, &QSpec::parse(q).unwrap(), &TwistSpec::parse(twist).unwrap()).unwrap()
}

fn tables_match(series: Series, computed: impl Fn(usize) -> ChargeDensity) -> Vec<String> {
    (2..=7)
        .filter_map(|k| {
            let d = fixture(series, k).unwrap().diff(&computed(k));
            (!d.is_empty()).then(|| d.to_string())
        })
        .collect()
}

fn c1_tables() -> Outcome {
    let t = Instant::now();
    let bad = tables_match(Series::Q, build_charge);
    let secs = t.elapsed().as_secs_f64();
    let spots = build_charge(5).get(&word("[0 1 2]")) == poly("-2+tau^2")
        && build_charge(6).get(&word("[3 2 1 0]")) == poly("2-2*tau^2")
        && build_charge(7).get(&word("[0 3]")) == poly("2*tau");
    outcome(bad.is_empty() && spots && secs < TABLE_SECONDS, format!("Q_2..Q_7 exact, {secs:.3}s {}", bad.join("; ")))
}

fn c2_symbolic() -> Outcome {
    let t = Instant::now();
    let bad: Vec<usize> = (1..=8).filter(|&k| !commutator_density(k).is_empty()).collect();
    let secs = t.elapsed().as_secs_f64();
    outcome(bad.is_empty() && secs < SYMBOLIC_SECONDS, format!("k=1..8 nonzero at {bad:?}, {secs:.2}s"))
}

fn c3_numeric() -> Outcome {
    let (regular, general) = c3_parts();
    // every k >= 2 fails for the general twist, in each exact chain and in float
    let shape_ok = regular.is_empty() && general.len() == 4 * 2 * 2 + 4;
    let detail = format!(
        "none/diagonal twists: {} failures; general SL(2) twist: {} failures (not a true twist) {}",
        regular.len(),
        general.len(),
        regular.join("; ")
    );
    known_failure(regular.is_empty() && general.is_empty(), shape_ok, detail)
}

/// Failing combinations of the untwisted and diagonal part and of the
/// general-twist part, separately.
fn c3_parts() -> (Vec<String>, Vec<String>) {
    let (mut regular, mut general) = (Vec::new(), Vec::new());
    for twist in ["none", "diag:2", "general:1,1,1,2"] {
        let bucket = if twist.starts_with("general") { &mut general } else { &mut regular };
        for l in [8, 10] {
            for q in ["3/2", "7/3"] {
                let p = exact(l, q, twist);
                let h = matrep::tl_hamiltonian(&p);
                for k in 1..=5 {
                    if !matrep::commutes_exactly(&matrep::charge_matrix(k, &p).unwrap(), &h).unwrap() {
                        bucket.push(format!("exact k={k} L={l} q={q} {twist}"));
                    }
                }
            }
        }
        let ftwist = if twist == "diag:2" { "expdiag:0.4" } else { twist };
        let p = float(12, UNIT_Q, ftwist);
        let h = matrep::tl_hamiltonian(&p);
        for k in 1..=5 {
            let rel = matrep::relative_commutator(&matrep::charge_matrix(k, &p).unwrap(), &h).unwrap();
            if rel >= COMMUTATOR_TOL {
                bucket.push(format!("float k={k} L=12 {ftwist} rel={rel:.1e}"));
            }
        }
    }
    (regular, general)
}

fn c4_triangle() -> Outcome {
    let bad: Vec<i64> = (1..=12).filter(|&k| !triangle_check(k, k + 1)).collect();
    outcome(bad.is_empty(), format!("k=1..12 violations at {bad:?}"))
}

fn c5_counting() -> Outcome {
    let (mut other, mut total) = (Vec::new(), Vec::new());
    for k in 1..=10usize {
        let q = build_charge(k);
        let top = q.words().filter(|w| w.len() == k).count();
        let connected = q.words().filter(|w| w.params().v == 0).count();
        if top != 1 << (k - 1) || connected >= 1 << k {
            other.push(format!("k={k} top={top} connected={connected}"));
        }
        if q.len() >= 1 << k {
            total.push(format!("k={k} total={}", q.len()));
        }
    }
    let shape_ok = other.is_empty() && total.len() == 5;
    let detail = format!(
        "k=1..10 length-k and connected counts: {} failures; total >= 2^k at {} {}",
        other.len(),
        total.join(", "),
        other.join("; ")
    );
    known_failure(other.is_empty() && total.is_empty(), shape_ok, detail)
}

fn c6_symmetry() -> Outcome {
    let mut bad = Vec::new();
    for k in 1..=8usize {
        let q = build_charge(k);
        let expected = q.scale(&TauPoly::from_int(if k % 2 == 1 { 1 } else { -1 }));
        if q.map_words(|w| w.time_reverse()) != expected {
            bad.push(format!("time reversal k={k}"));
        }
        if q.map_words(|w| w.reflect(0)) != expected {
            bad.push(format!("reflection k={k}"));
        }
    }
    outcome(bad.is_empty(), format!("k=1..8 {}", bad.join("; ")))
}

fn c7_boost() -> Outcome {
    let g = boost_series(7, 28).unwrap();
    let bad = tables_match(Series::G, |k| g[k - 1].clone());
    let spot = g[3].get(&word("[0 1 2 3]")) == TauPoly::from_int(6);
    outcome(bad.is_empty() && spot, format!("G_2..G_7 exact {}", bad.join("; ")))
}

fn c8_transfer() -> Outcome {
    let bad = tables_match(Series::A, |k| a_series_clustered(k).unwrap().density);
    let a4 = a_series_clustered(4).unwrap().density.get(&word("[0 1]")) == poly("-1-tau^2");
    let a7 = a_series_clustered(7).unwrap().density.get(&word("[0 1]")).scale(&int(4)) == poly("2*tau+9*tau^3+17*tau^5");
    let first = transfer_series_clustered(1).unwrap()[0] == ChargeDensity::from_terms(1, [(TL1Word::single(0), TauPoly::one())]);
    outcome(bad.is_empty() && a4 && a7 && first, format!("A_2..A_7 exact, first density single generator {}", bad.join("; ")))
}

fn c9_machinery() -> Outcome {
    let mut bad = Vec::new();
    let mut words = 0;
    for k in 1..=8 {
        let reach = reach_check(&ClosedForm { k });
        words += reach.words;
        if !reach.passed() {
            bad.push(format!("reach k={k}"));
        }
        if !check_identities(k).passed() {
            bad.push(format!("identities k={k}"));
        }
    }
    if !row_negation_holds() {
        bad.push("row negation".into());
    }
    let a6 = lot_table(&a_series_clustered(6).unwrap().density).unwrap();
    let a7 = lot_table(&a_series_clustered(7).unwrap().density).unwrap();
    let lot = [
        (&a6, (6, 0), int(1)),
        (&a6, (5, 0), int(2)),
        (&a6, (3, 1), int(0)),
        (&a6, (1, 0), int(0)),
        (&a7, (6, 0), rat(5, 2)),
        (&a7, (4, 0), rat(-25, 4)),
        (&a7, (3, 1), rat(-17, 2)),
        (&a7, (2, 0), rat(17, 4)),
        (&a7, (1, 0), rat(-17, 4)),
    ];
    for (table, key, want) in lot {
        if table.get(&key) != Some(&want) {
            bad.push(format!("LOT {key:?}"));
        }
    }
    outcome(bad.is_empty(), format!("k=1..8, {words} reachable words {}", bad.join("; ")))
}

fn c10_relations() -> Outcome {
    let mut bad = Vec::new();
    for l in [6, 8] {
        for twist in ["none", "diag:2"] {
            let p = exact(l, "3/2", twist);
            let rep = matrep::relations_check(&p, None);
            if !rep.passed() || (twist == "none" && !rep.e_rho_e_checked) {
                bad.push(format!("relations L={l} {twist}: {:?}", rep.failures));
            }
            if matrep::tl_hamiltonian(&p) != matrep::xxz_hamiltonian(&p) {
                bad.push(format!("H_tl != H_xxz L={l} {twist}"));
            }
        }
        let p = exact(l, "3/2", "general:1,1,1,2");
        if matrep::tl_hamiltonian(&p) == matrep::xxz_hamiltonian(&p) {
            bad.push(format!("H_tl == H_xxz for a non-diagonal twist L={l}"));
        }
        if !matrep::relations_check(&float(l, UNIT_Q, "none"), Some(COMMUTATOR_TOL)).passed() {
            bad.push(format!("float relations L={l}"));
        }
    }
    outcome(bad.is_empty(), format!("L=6,8 exact {}", bad.join("; ")))
}

fn c11_transfer_numerics() -> Outcome {
    let mut bad = Vec::new();
    let (mut worst_c, mut worst_fd, mut worst_span) = (0f64, 0f64, 0f64);
    for l in 6..=8 {
        for (q, twist) in [("3/2", "none"), (UNIT_Q, "none"), ("3/2", "expdiag:0.4")] {
            let r = matrep::logderiv_check(&float(l, q, twist), FINITE_DIFF_STEP).unwrap();
            worst_c = worst_c.max(r.commutator);
            worst_fd = worst_fd.max(r.finite_difference);
            if r.commutator >= TRANSFER_TOL || r.finite_difference >= FINITE_DIFF_TOL {
                bad.push(format!("L={l} q={q} {twist}"));
            }
        }
    }
    for k in 1..=4 {
        let r = matrep::span_check(k, &float(2 * k + 2, "3/2", "none")).unwrap();
        worst_span = worst_span.max(r.residual);
        if r.residual >= SPAN_TOL {
            bad.push(format!("span k={k} residual={:.1e}", r.residual));
        }
    }
    outcome(
        bad.is_empty(),
        format!("[T,T'] {worst_c:.1e}, finite difference {worst_fd:.1e}, span residual {worst_span:.1e} {}", bad.join("; ")),
    )
}

fn c12_mutual() -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (q, twist) in [("3/2", "none"), (UNIT_Q, "expdiag:0.4")] {
        let p = float(10, q, twist);
        let qs: Vec<_> = (1..=4).map(|k| matrep::charge_matrix(k, &p).unwrap()).collect();
        for j in 0..4 {
            for k in j + 1..4 {
                let rel = matrep::relative_commutator(&qs[j], &qs[k]).unwrap();
                worst = worst.max(rel);
                if rel >= COMMUTATOR_TOL {
                    bad.push(format!("[Q_{}, Q_{}] q={q}", j + 1, k + 1));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("j,k<=4 L=10 worst {worst:.1e} {}", bad.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("charge tables", c1_tables),
        ("symbolic commutator", c2_symbolic),
        ("numeric commutator", c3_numeric),
        ("triangle equation", c4_triangle),
        ("word counts", c5_counting),
        ("symmetry", c6_symmetry),
        ("boost oracle", c7_boost),
        ("transfer oracle", c8_transfer),
        ("proof machinery", c9_machinery),
        ("representation", c10_relations),
        ("transfer matrix", c11_transfer_numerics),
        ("mutual commutativity", c12_mutual),
    ];
    let mut unexpected = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.ok { "PASS" } else { "FAIL" };
        let note = if o.expected { "" } else { " [UNEXPECTED]" };
        println!("criterion {:>2} {status} {name}: {}{note}", n + 1, o.detail.trim_end());
        unexpected += usize::from(!o.expected);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected outcome(s)");
        ExitCode::FAILURE
    }
}
