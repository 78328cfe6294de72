use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tlcharges::charges::{build_charge, triangle_check, ClosedForm};
use tlcharges::export::{self, Format};
use tlcharges::fixtures::{self, fixture, Series};
use tlcharges::matrep::{self, ChainParams, QSpec, TwistSpec};
use tlcharges::oracle;
use tlcharges::verify::{check_identities, commutator_density, reach_check};
use tlcharges::Error;

#[derive(Parser)]
#[command(name = "tlcharges", version, about = "Local conserved charges of the XXZ chain in the Temperley-Lieb algebra")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit the charge density Q_k.
    Gen {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check conservation symbolically or on a spin chain.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Independent charge series from the transfer matrix and the boost.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Structural properties of the closed form.
    #[command(subcommand)]
    Props(PropsCmd),
    /// Recompute every bundled table and diff it exactly.
    Selftest,
}

#[derive(Args)]
struct Chain {
    #[arg(long = "L")]
    l: usize,
    /// Rational `p/r`, complex `re,im`, or `unit:x` for e^{iπx}.
    #[arg(long, default_value = "3/2")]
    q: String,
    /// `none`, `diag:t`, `expdiag:f` or `general:a,b,c,d`.
    #[arg(long, default_value = "none")]
    twist: String,
    /// Exact rational arithmetic instead of complex floats.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// The commutator density [Q_k, H] in the diagram algebra.
    Symbolic {
        #[arg(long)]
        k: usize,
    },
    /// [Q_k, H] (or [Q_k, Q_j] with --against) on the spin chain.
    Numeric {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        against: Option<usize>,
        #[command(flatten)]
        chain: Chain,
    },
    /// Temperley-Lieb relations of the monoid matrices.
    Relations {
        #[command(flatten)]
        chain: Chain,
    },
    /// Transfer-matrix commutation, log-derivative, and span of Q_k.
    Transfer {
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[command(flatten)]
        chain: Chain,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Log-derivative densities Ã_1..Ã_k.
    Transfer {
        #[arg(long)]
        k: usize,
        /// Open window size; clusters are used when omitted.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Boost densities G_1..G_k.
    Boost {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        window: Option<usize>,
    },
    /// The (anti)symmetrized combination A_k.
    Aseries {
        #[arg(long)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum PropsCmd {
    Triangle {
        #[arg(long)]
        max_k: i64,
    },
    Identities {
        #[arg(long)]
        k: usize,
    },
}

enum Outcome {
    Pass(String),
    Fail(String),
}

fn report(v: Value, ok: bool) -> Outcome {
    let s = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
    if ok {
        Outcome::Pass(s)
    } else {
        Outcome::Fail(s)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn densities(ds: &[tlcharges::ChargeDensity]) -> Value {
    Value::Array(ds.iter().map(export::to_json).collect())
}

fn run(cmd: Cmd) -> Result<Outcome, Error> {
    match cmd {
        Cmd::Gen { k, format, out } => {
            if k == 0 {
                return Err(Error::Invalid("k must be at least 1".into()));
            }
            let text = export::render(&build_charge(k), format, &format!("Q_{k}"));
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
                    Ok(report(json!({ "k": k, "out": path }), true))
                }
                None => Ok(Outcome::Pass(text)),
            }
        }
        Cmd::Verify(v) => verify(v),
        Cmd::Oracle(o) => oracle_cmd(o),
        Cmd::Props(PropsCmd::Triangle { max_k }) => {
            let rows: Vec<Value> = (1..=max_k)
                .map(|k| {
                    let q = build_charge(k as usize);
                    let top = q.words().filter(|w| w.len() == k as usize).count();
                    json!({ "k": k, "triangle": triangle_check(k, k + 1), "words_of_length_k": top, "words": q.len() })
                })
                .collect();
            let ok = rows.iter().all(|r| r["triangle"] == true);
            Ok(report(json!({ "rows": rows }), ok))
        }
        Cmd::Props(PropsCmd::Identities { k }) => {
            let t = Instant::now();
            let ids = check_identities(k);
            let reach = reach_check(&ClosedForm { k });
            let ok = ids.passed() && reach.passed();
            Ok(report(json!({ "k": k, "identities": ids, "reach": reach, "elapsed_ms": ms(t) }), ok))
        }
        Cmd::Selftest => {
            let t = Instant::now();
            let diffs = fixtures::selftest()?;
            let ok = diffs.iter().all(|d| d.is_empty());
            let names: Vec<Value> = diffs.iter().map(|d| json!({ "table": d.name, "ok": d.is_empty(), "diff": d })).collect();
            Ok(report(json!({ "tables": names, "passed": ok, "elapsed_ms": ms(t) }), ok))
        }
    }
}

fn verify(v: VerifyCmd) -> Result<Outcome, Error> {
    match v {
        VerifyCmd::Symbolic { k } => {
            let t = Instant::now();
            let q = build_charge(k);
            let cd = commutator_density(k);
            let ok = cd.is_empty();
            Ok(report(
                json!({ "k": k, "terms": q.len(), "touched": cd.touched.len(), "nonzero": cd.terms.len(), "passed": ok, "elapsed_ms": ms(t) }),
                ok,
            ))
        }
        VerifyCmd::Numeric { k, against, chain } => {
            let t = Instant::now();
            let (q, twist) = (QSpec::parse(&chain.q)?, TwistSpec::parse(&chain.twist)?);
            let mut out = json!({ "k": k, "L": chain.l, "q": chain.q, "twist": chain.twist, "against": against });
            let ok = if chain.exact {
                let p = ChainParams::exact(chain.l, &q, &twist)?;
                let a = matrep::charge_matrix(k, &p)?;
                let b = match against {
                    Some(j) => matrep::charge_matrix(j, &p)?,
                    None => matrep::tl_hamiltonian(&p),
                };
                let zero = matrep::commutes_exactly(&a, &b)?;
                out["mode"] = json!("exact");
                out["commutator_zero"] = json!(zero);
                zero
            } else {
                let p = ChainParams::float(chain.l, &q, &twist)?;
                let a = matrep::charge_matrix(k, &p)?;
                let b = match against {
                    Some(j) => matrep::charge_matrix(j, &p)?,
                    None => matrep::tl_hamiltonian(&p),
                };
                let rel = matrep::relative_commutator(&a, &b)?;
                out["mode"] = json!("float");
                out["relative_commutator"] = json!(rel);
                out["tolerance"] = json!(chain.tol);
                rel < chain.tol
            };
            out["passed"] = json!(ok);
            out["elapsed_ms"] = json!(ms(t));
            Ok(report(out, ok))
        }
        VerifyCmd::Relations { chain } => {
            let (q, twist) = (QSpec::parse(&chain.q)?, TwistSpec::parse(&chain.twist)?);
            let rep = if chain.exact {
                matrep::relations_check(&ChainParams::exact(chain.l, &q, &twist)?, None)
            } else {
                matrep::relations_check(&ChainParams::float(chain.l, &q, &twist)?, Some(chain.tol))
            };
            let ok = rep.passed();
            Ok(report(json!(rep), ok))
        }
        VerifyCmd::Transfer { k, chain } => {
            let (q, twist) = (QSpec::parse(&chain.q)?, TwistSpec::parse(&chain.twist)?);
            let p = ChainParams::float(chain.l, &q, &twist)?;
            let ld = matrep::logderiv_check(&p, 1e-4)?;
            let mut ok = ld.commutator < chain.tol && ld.finite_difference < 1e-6;
            let mut out = json!({ "logderiv": ld });
            if k > 0 {
                let span = matrep::span_check(k, &p)?;
                ok &= span.residual < 1e-8;
                out["span"] = json!(span);
            }
            out["passed"] = json!(ok);
            Ok(report(out, ok))
        }
    }
}

fn oracle_cmd(o: OracleCmd) -> Result<Outcome, Error> {
    match o {
        OracleCmd::Transfer { k, window } => {
            let ds = match window {
                Some(m) => oracle::transfer_series(k, m)?,
                None => oracle::transfer_series_clustered(k)?,
            };
            Ok(report(json!({ "k": k, "densities": densities(&ds) }), true))
        }
        OracleCmd::Boost { k, window } => {
            let ds = oracle::boost_series(k, window.unwrap_or(4 * k))?;
            let diff = fixture(Series::G, k).ok().map(|f| f.diff(&ds[k - 1]));
            let ok = diff.as_ref().is_none_or(|d| d.is_empty());
            Ok(report(json!({ "k": k, "densities": densities(&ds), "table_diff": diff }), ok))
        }
        OracleCmd::Aseries { k } => {
            let a = oracle::a_series_clustered(k)?;
            let mixing: Vec<String> = a.mixing.iter().map(|m| m.to_string()).collect();
            let diff = fixture(Series::A, k).ok().map(|f| f.diff(&a.density));
            let ok = diff.as_ref().is_none_or(|d| d.is_empty());
            Ok(report(
                json!({ "k": k, "density": export::to_json(&a.density), "mixing": mixing, "unique": a.unique, "table_diff": diff }),
                ok,
            ))
        }
    }
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_) | Error::Invalid(_) | Error::ChainTooShort { .. } | Error::WindowTooSmall { .. } | Error::InvalidIndex { .. }
    )
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("TLCHARGES_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.cmd) {
        Ok(Outcome::Pass(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Fail(s)) => {
            print!("{s}");
            ExitCode::from(1)
        }
        Err(e) => {
            println!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
