//! Python bindings: words, charge densities, the oracles, and the spin-chain
//! checks. Coefficients cross the boundary as strings like `"2-2*tau^2"`.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use tlcharges::charges::{self, ChargeDensity};
use tlcharges::matrep::{self, ChainParams, QSpec, TwistSpec};
use tlcharges::{export, fixtures, oracle, verify, Error, TL1Word};

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidIndex { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A word in which every monoid index occurs at most once.
#[pyclass(name = "Word", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyWord(TL1Word);

#[pymethods]
impl PyWord {
    /// Parses the bracket notation, e.g. `Word("[1 0 2]")`.
    #[new]
    fn new(notation: &str) -> PyResult<Self> {
        TL1Word::parse(notation).map(PyWord).map_err(err)
    }

    /// From the product order of the monoids; fails on repeated indices.
    #[staticmethod]
    fn from_sequence(indices: Vec<i64>) -> PyResult<Self> {
        tlcharges::GeneralWord::from_sequence(&indices).canonical_tl1().map(PyWord).map_err(err)
    }

    #[getter]
    fn sequence(&self) -> Vec<i64> {
        self.0.sequence()
    }

    /// `(w, t, v, g)`.
    #[getter]
    fn params(&self) -> (i64, i64, i64, i64) {
        let p = self.0.params();
        (p.w, p.t, p.v, p.g)
    }

    fn time_reverse(&self) -> Self {
        PyWord(self.0.time_reverse())
    }

    fn reflect(&self, pivot: i64) -> Self {
        PyWord(self.0.reflect(pivot))
    }

    fn normalized(&self) -> Self {
        PyWord(self.0.normalized())
    }

    /// `[(index, "PL3"), …]` for every contributing monoid.
    fn environments(&self) -> Vec<(i64, String)> {
        self.0.classify_environments().into_iter().map(|(i, c)| (i, c.to_string())).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.notation()
    }

    fn __repr__(&self) -> String {
        format!("Word('{}')", self.0.notation())
    }
}

/// A translation-invariant sum of words with coefficients in `τ`.
#[pyclass(name = "Density", frozen)]
struct PyDensity(ChargeDensity);

#[pymethods]
impl PyDensity {
    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    /// `[(notation, coefficient), …]` in canonical order.
    fn terms(&self) -> Vec<(String, String)> {
        self.0.sorted().into_iter().map(|(w, c)| (w.notation(), c.to_string())).collect()
    }

    /// Coefficient of a word given by notation; `"0"` when absent.
    fn get(&self, word: &str) -> PyResult<String> {
        Ok(self.0.get(&TL1Word::parse(word).map_err(err)?).to_string())
    }

    /// Coefficient with `τ` set to a number.
    fn evaluate(&self, word: &str, tau: f64) -> PyResult<f64> {
        Ok(self.0.get(&TL1Word::parse(word).map_err(err)?).eval_f64(tau))
    }

    fn to_json(&self) -> String {
        export::to_json(&self.0).to_string()
    }

    fn to_csv(&self) -> String {
        export::to_csv(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Density(k={}, terms={})", self.0.k, self.0.len())
    }
}

fn densities(ds: Vec<ChargeDensity>) -> Vec<PyDensity> {
    ds.into_iter().map(PyDensity).collect()
}

/// The closed-form charge `Q_k`.
#[pyfunction]
fn build_charge(k: usize) -> PyResult<PyDensity> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be at least 1"));
    }
    Ok(PyDensity(charges::build_charge(k)))
}

#[pyfunction]
fn coefficient(k: usize, word: &PyWord) -> String {
    charges::coefficient(k, &word.0).to_string()
}

#[pyfunction]
fn z_value(k: i64, w: i64, t: i64) -> i64 {
    charges::z_value(k, w, t)
}

#[pyfunction]
fn triangle_check(k: i64, max_w: i64) -> bool {
    charges::triangle_check(k, max_w)
}

/// True when `[Q_k, H]` vanishes in the diagram algebra.
#[pyfunction]
fn commutator_vanishes(py: Python<'_>, k: usize) -> bool {
    py.detach(|| verify::commutator_density(k).is_empty())
}

/// Identity and reachable-set report as a JSON string.
#[pyfunction]
fn check_identities(py: Python<'_>, k: usize) -> String {
    py.detach(|| {
        let ids = verify::check_identities(k);
        let reach = verify::reach_check(&charges::ClosedForm { k });
        serde_json::json!({ "passed": ids.passed() && reach.passed(), "identities": ids, "reach": reach }).to_string()
    })
}

#[pyfunction]
fn transfer_series(k: usize) -> PyResult<Vec<PyDensity>> {
    oracle::transfer_series_clustered(k).map(densities).map_err(err)
}

#[pyfunction]
fn a_series(k: usize) -> PyResult<PyDensity> {
    oracle::a_series_clustered(k).map(|a| PyDensity(a.density)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, window = None))]
fn boost_series(k: usize, window: Option<usize>) -> PyResult<Vec<PyDensity>> {
    oracle::boost_series(k, window.unwrap_or(4 * k)).map(densities).map_err(err)
}

/// Recomputes every bundled table; returns the names of those that differ.
#[pyfunction]
fn selftest(py: Python<'_>) -> PyResult<Vec<String>> {
    let diffs = py.detach(fixtures::selftest).map_err(err)?;
    Ok(diffs.into_iter().filter(|d| !d.is_empty()).map(|d| d.name).collect())
}

/// `[Q_k, H]` on an `L`-site chain. Exact mode returns 0.0 or 1.0; float mode
/// returns the relative Frobenius norm.
#[pyfunction]
#[pyo3(signature = (k, l, q = "3/2", twist = "none", exact = true))]
fn charge_commutator(py: Python<'_>, k: usize, l: usize, q: &str, twist: &str, exact: bool) -> PyResult<f64> {
    let (q, twist) = (QSpec::parse(q).map_err(err)?, TwistSpec::parse(twist).map_err(err)?);
    py.detach(|| {
        if exact {
            let p = ChainParams::exact(l, &q, &twist)?;
            let zero = matrep::commutes_exactly(&matrep::charge_matrix(k, &p)?, &matrep::tl_hamiltonian(&p))?;
            Ok(if zero { 0.0 } else { 1.0 })
        } else {
            let p = ChainParams::float(l, &q, &twist)?;
            matrep::relative_commutator(&matrep::charge_matrix(k, &p)?, &matrep::tl_hamiltonian(&p))
        }
    })
    .map_err(err)
}

/// Failed relations of the monoid matrices (exact arithmetic).
#[pyfunction]
#[pyo3(signature = (l, q = "3/2", twist = "none"))]
fn relations_check(l: usize, q: &str, twist: &str) -> PyResult<Vec<String>> {
    let p = ChainParams::exact(l, &QSpec::parse(q).map_err(err)?, &TwistSpec::parse(twist).map_err(err)?).map_err(err)?;
    Ok(matrep::relations_check(&p, None).failures)
}

#[pymodule]
fn tlcharges_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWord>()?;
    m.add_class::<PyDensity>()?;
    m.add_function(wrap_pyfunction!(build_charge, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(z_value, m)?)?;
    m.add_function(wrap_pyfunction!(triangle_check, m)?)?;
    m.add_function(wrap_pyfunction!(commutator_vanishes, m)?)?;
    m.add_function(wrap_pyfunction!(check_identities, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_series, m)?)?;
    m.add_function(wrap_pyfunction!(a_series, m)?)?;
    m.add_function(wrap_pyfunction!(boost_series, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add_function(wrap_pyfunction!(charge_commutator, m)?)?;
    m.add_function(wrap_pyfunction!(relations_check, m)?)?;
    Ok(())
}
