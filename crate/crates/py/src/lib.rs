use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qet_core::model::StarConvention;
use qet_core::table::{self, TableConfig};
use qet_core::{self as core, Method, QetError};

fn err(e: QetError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn convention(name: &str) -> PyResult<StarConvention> {
    name.parse().map_err(err)
}

#[pyclass(frozen, name = "Receiver", skip_from_py_object)]
#[derive(Clone)]
struct Receiver {
    #[pyo3(get)]
    theta: f64,
    #[pyo3(get)]
    hx: f64,
    #[pyo3(get)]
    hz: f64,
    #[pyo3(get)]
    e: f64,
    #[pyo3(get)]
    e_b: f64,
    /// `(hx, hz, e)` standard errors for sampled records.
    #[pyo3(get)]
    stderr: Option<(f64, f64, f64)>,
}

#[pymethods]
impl Receiver {
    fn __repr__(&self) -> String {
        format!(
            "Receiver(theta={:.6}, e={:.6}, e_b={:.6})",
            self.theta, self.e, self.e_b
        )
    }
}

#[pyclass(frozen, name = "QetRecord", skip_from_py_object)]
struct Record {
    inner: core::QetRecord,
}

#[pymethods]
impl Record {
    #[getter]
    fn method(&self) -> &'static str {
        match self.inner.method {
            Method::Exact => "exact",
            Method::Sampled => "sampled",
        }
    }

    #[getter]
    fn e0(&self) -> f64 {
        self.inner.e0
    }

    #[getter]
    fn e0_stderr(&self) -> Option<f64> {
        self.inner.e0_stderr
    }

    #[getter]
    fn receivers(&self) -> BTreeMap<usize, Receiver> {
        self.inner
            .receivers
            .iter()
            .map(|(&j, r)| {
                (
                    j,
                    Receiver {
                        theta: r.theta.theta,
                        hx: r.energy.hx,
                        hz: r.energy.hz,
                        e: r.energy.e,
                        e_b: r.energy.e_b,
                        stderr: r.stderr.map(|s| (s.hx, s.hz, s.e)),
                    },
                )
            })
            .collect()
    }

    fn total_extracted(&self) -> f64 {
        self.inner.total_extracted()
    }

    fn max_abs_diff(&self, other: &Record) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "QetRecord(method={}, e0={:.6}, receivers={:?})",
            self.method(),
            self.inner.e0,
            self.inner.receivers.keys().collect::<Vec<_>>()
        )
    }
}

/// Exact two-qubit energy teleportation.
#[pyfunction]
fn run_minimal_qet(h: f64, k: f64) -> PyResult<Record> {
    let p = core::MinimalModelParams::new(h, k).map_err(err)?;
    Ok(Record {
        inner: core::run_minimal_qet(p).map_err(err)?,
    })
}

/// Exact distribution to `receivers` of a `{3,q}` star.
#[pyfunction]
#[pyo3(signature = (h, k, q, receivers, convention = "published"))]
fn run_qed(h: f64, k: f64, q: usize, receivers: Vec<usize>, convention: &str) -> PyResult<Record> {
    let p = core::StarModelParams::with_convention(h, k, q, self::convention(convention)?)
        .map_err(err)?;
    Ok(Record {
        inner: core::run_qed(p, &receivers).map_err(err)?,
    })
}

/// Shot-sampled distribution, `shots` per readout basis.
#[pyfunction]
#[pyo3(signature = (h, k, q, receivers, shots, seed = table::DEFAULT_SEED, convention = "published"))]
#[allow(clippy::too_many_arguments)]
fn sample_qed(
    py: Python<'_>,
    h: f64,
    k: f64,
    q: usize,
    receivers: Vec<usize>,
    shots: u64,
    seed: u64,
    convention: &str,
) -> PyResult<Record> {
    let p = core::StarModelParams::with_convention(h, k, q, self::convention(convention)?)
        .map_err(err)?;
    let inner = py
        .detach(|| {
            let (bundle, ground) = core::build_star_with_ground(p)?;
            core::sampled_record(&bundle, &ground, &receivers, shots, seed, 0)
        })
        .map_err(err)?;
    Ok(Record { inner })
}

/// Relayed teleportation: the record and the classical transcript text.
#[pyfunction]
#[pyo3(signature = (h, k, hops, seed = table::DEFAULT_SEED))]
fn run_longrange_qet(h: f64, k: f64, hops: usize, seed: u64) -> PyResult<(Record, String)> {
    let p = core::MinimalModelParams::new(h, k).map_err(err)?;
    let (inner, transcript) = core::run_longrange_qet(p, hops, seed).map_err(err)?;
    Ok((Record { inner }, transcript.to_text()))
}

/// Ground-state amplitudes of the two-qubit model, qubit 0 least significant.
#[pyfunction]
fn minimal_ground_state(h: f64, k: f64) -> PyResult<Vec<Complex64>> {
    let p = core::MinimalModelParams::new(h, k).map_err(err)?;
    let bundle = core::build_minimal(p).map_err(err)?;
    let g = core::solve_ground(&bundle.total).map_err(err)?;
    Ok(g.state.amplitudes().to_vec())
}

/// `<psi| sum_i c_i P_i + offset |psi>` for Pauli words like `"XZ"`.
#[pyfunction]
#[pyo3(signature = (amplitudes, terms, offset = 0.0))]
fn expectation(
    amplitudes: Vec<Complex64>,
    terms: Vec<(f64, String)>,
    offset: f64,
) -> PyResult<f64> {
    let psi = core::StateVector::normalized(amplitudes).map_err(err)?;
    let words = terms
        .into_iter()
        .map(|(c, w)| Ok((c, w.parse::<core::PauliString>()?)))
        .collect::<Result<Vec<_>, QetError>>()
        .map_err(err)?;
    let obs = core::ObservableSum::from_terms(psi.n_qubits(), words, offset).map_err(err)?;
    psi.expectation(&obs).map_err(err)
}

/// Ring sizes of a `{3,q}` tiling out to `depth`.
#[pyfunction]
fn tiling_rings(q: usize, depth: usize) -> PyResult<Vec<usize>> {
    let spec = core::TilingSpec::new(3, q, depth).map_err(err)?;
    Ok(core::ring_sizes(&core::generate(spec).map_err(err)?))
}

/// `E_B[h][k]` of the two-qubit model.
#[pyfunction]
fn sweep_eb(h: Vec<f64>, k: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    Ok(core::sweep_eb(&h, &k).map_err(err)?.e_b)
}

type Row = (String, f64, f64, String, usize, String, f64, f64);

fn row(r: &table::TableRow) -> Row {
    (
        r.config.tiling(),
        r.config.h,
        r.config.k,
        r.observable.name().to_string(),
        r.observable.site(),
        match r.method {
            Method::Exact => "exact".into(),
            Method::Sampled => "sampled".into(),
        },
        r.mean,
        r.stderr,
    )
}

/// Star table rows `(tiling, h, k, observable, site, method, mean, stderr)`;
/// sampled rows are added when `shots` is given.
#[pyfunction]
#[pyo3(signature = (shots = None, seed = table::DEFAULT_SEED, q = None))]
fn table1(
    py: Python<'_>,
    shots: Option<u64>,
    seed: u64,
    q: Option<Vec<usize>>,
) -> PyResult<Vec<Row>> {
    let configs: Vec<TableConfig> = match q {
        None => table::table1_configs(),
        Some(qs) => table::table1_configs()
            .into_iter()
            .filter(|c| qs.contains(&c.q))
            .collect(),
    };
    let rows = py
        .detach(|| table::estimate_table1(&configs, shots, seed, StarConvention::Published))
        .map_err(err)?;
    Ok(rows.iter().map(row).collect())
}

/// Published reference cells `(tiling, h, k, observable, site, value, stderr)`.
#[pyfunction]
fn paper_table1() -> Vec<(String, f64, f64, String, usize, f64, f64)> {
    table::paper_table1()
        .iter()
        .map(|c| {
            (
                c.config.tiling(),
                c.config.h,
                c.config.k,
                c.observable.name().to_string(),
                c.observable.site(),
                c.value,
                c.stderr,
            )
        })
        .collect()
}

#[pymodule]
fn qet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Record>()?;
    m.add_class::<Receiver>()?;
    m.add_function(wrap_pyfunction!(run_minimal_qet, m)?)?;
    m.add_function(wrap_pyfunction!(run_qed, m)?)?;
    m.add_function(wrap_pyfunction!(sample_qed, m)?)?;
    m.add_function(wrap_pyfunction!(run_longrange_qet, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(expectation, m)?)?;
    m.add_function(wrap_pyfunction!(tiling_rings, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_eb, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(paper_table1, m)?)?;
    m.add("DEFAULT_SEED", table::DEFAULT_SEED)?;
    Ok(())
}
