use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use qkd_core::analyzers::{b92_rate_depolarizing, bell_rate, Protocol};
use qkd_core::cinfo::{self, Order};
use qkd_core::engine::{AttackModel, ProtocolConfig};
use qkd_core::suites::{run_suite, Suite, SuiteOptions};
use qkd_core::{qcore, randkit};

create_exception!(qkdsec, QkdError, PyValueError);

fn err(e: qkd_core::Error) -> PyErr {
    QkdError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| QkdError::new_err(e.to_string()))?;
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = value.extract::<String>() {
        s
    } else {
        PyModule::import(py, "json")?.call_method1("dumps", (value,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| QkdError::new_err(e.to_string()))
}

fn order(text: &str) -> PyResult<Order> {
    text.parse().map_err(err)
}

/// A finite probability distribution.
#[pyclass(module = "qkdsec", frozen)]
struct ProbDist {
    inner: cinfo::ProbDist,
}

#[pymethods]
impl ProbDist {
    #[new]
    #[pyo3(signature = (probs, alphabet=None))]
    fn new(probs: Vec<f64>, alphabet: Option<Vec<String>>) -> PyResult<Self> {
        let inner = match alphabet {
            Some(a) => cinfo::ProbDist::new(a, probs),
            None => cinfo::ProbDist::from_probs(probs),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet().to_vec()
    }

    /// Rényi entropy of the given order ("0", "1", "2", "inf", ...),
    /// smoothed over the ε-ball when `eps > 0`.
    #[pyo3(signature = (order="1", eps=0.0))]
    fn entropy(&self, order: &str, eps: f64) -> PyResult<f64> {
        let o = self::order(order)?;
        if eps == 0.0 { cinfo::renyi_entropy(&self.inner, o) } else { cinfo::smooth_renyi(&self.inner, o, eps) }
            .map_err(err)
    }

    fn distance(&self, other: &ProbDist) -> PyResult<f64> {
        cinfo::variational_distance(&self.inner, &other.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ProbDist({:?})", self.inner.probs())
    }
}

/// A measurement with labelled outcomes.
#[pyclass(module = "qkdsec", frozen)]
struct Povm {
    inner: qcore::Povm,
}

#[pymethods]
impl Povm {
    #[staticmethod]
    fn computational(d: usize) -> PyResult<Self> {
        Ok(Self { inner: qcore::Povm::computational(d).map_err(err)? })
    }

    #[staticmethod]
    fn qubit_x() -> Self {
        Self { inner: qcore::Povm::qubit_x() }
    }

    #[staticmethod]
    fn qubit_y() -> Self {
        Self { inner: qcore::Povm::qubit_y() }
    }

    #[staticmethod]
    fn bell() -> Self {
        Self { inner: qcore::bell_povm() }
    }

    fn tensor(&self, other: &Povm) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tensor(&other.inner).map_err(err)? })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// A density operator on a space of dimension at most 16.
#[pyclass(module = "qkdsec", frozen)]
struct DensityOperator {
    inner: qcore::DensityOperator,
}

#[pymethods]
impl DensityOperator {
    /// From a square nested list of real or complex numbers.
    #[new]
    fn new(matrix: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let part = |attr: &str| -> PyResult<Vec<Vec<f64>>> {
            matrix.iter().map(|row| row.iter().map(|z| z.getattr(attr)?.extract::<f64>()).collect()).collect()
        };
        let raw = serde_json::json!({ "dim": matrix.len(), "re": part("real")?, "im": part("imag")? });
        let inner = serde_json::from_value(raw).map_err(|e| QkdError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    /// Mixture of the Bell states ψ⁺, ψ⁻, φ⁺, φ⁻ with the given weights.
    #[staticmethod]
    fn bell_diagonal(lambdas: [f64; 4]) -> PyResult<Self> {
        Ok(Self { inner: qcore::bell_diagonal_state(lambdas).map_err(err)? })
    }

    #[staticmethod]
    fn maximally_mixed(d: usize) -> PyResult<Self> {
        Ok(Self { inner: qcore::DensityOperator::maximally_mixed(d).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    /// `(real, imaginary)` parts as nested lists.
    fn matrix(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let v = to_py(py, &self.inner)?;
        let v = v.bind(py);
        Ok((v.get_item("re")?, v.get_item("im")?).into_pyobject(py)?.into_any().unbind())
    }

    #[pyo3(signature = (order="1", eps=0.0))]
    fn entropy(&self, order: &str, eps: f64) -> PyResult<f64> {
        qcore::q_entropy(&self.inner, self::order(order)?, eps).map_err(err)
    }

    fn trace_distance(&self, other: &DensityOperator) -> PyResult<f64> {
        qcore::trace_distance(&self.inner, &other.inner).map_err(err)
    }

    fn measure(&self, povm: &Povm) -> PyResult<ProbDist> {
        Ok(ProbDist { inner: qcore::measure(&self.inner, &povm.inner).map_err(err)? })
    }

    fn tensor(&self, other: &DensityOperator) -> PyResult<Self> {
        Ok(Self { inner: self.inner.tensor(&other.inner).map_err(err)? })
    }

    fn partial_trace_b(&self, dim_a: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.partial_trace_b(dim_a).map_err(err)? })
    }

    fn partial_trace_a(&self, dim_a: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.partial_trace_a(dim_a).map_err(err)? })
    }
}

/// A Toeplitz hash from `n_in` to `n_out` bits.
#[pyclass(module = "qkdsec", frozen)]
struct ToeplitzHash {
    inner: randkit::ToeplitzHash,
}

#[pymethods]
impl ToeplitzHash {
    #[new]
    fn new(n_in: usize, n_out: usize, diag: Vec<u8>) -> PyResult<Self> {
        Ok(Self { inner: randkit::ToeplitzHash::new(n_in, n_out, diag).map_err(err)? })
    }

    #[staticmethod]
    fn random(n_in: usize, n_out: usize, seed: u64) -> PyResult<Self> {
        let mut rng = randkit::stream(seed, "python hash");
        Ok(Self { inner: randkit::ToeplitzHash::random(n_in, n_out, &mut rng).map_err(err)? })
    }

    fn apply(&self, bits: Vec<u8>) -> PyResult<Vec<u8>> {
        self.inner.apply(&bits).map_err(err)
    }

    #[getter]
    fn diag(&self) -> Vec<u8> {
        self.inner.diag.clone()
    }
}

/// Full record of one simulated run.
#[pyclass(module = "qkdsec", frozen)]
struct Transcript {
    inner: qkd_core::engine::Transcript,
}

#[pymethods]
impl Transcript {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: qkd_core::engine::Transcript::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn aborted(&self) -> bool {
        self.inner.aborted
    }

    #[getter]
    fn abort_reason(&self) -> Option<String> {
        self.inner.abort_reason.map(|r| r.to_string())
    }

    #[getter]
    fn n_prime(&self) -> usize {
        self.inner.n_prime
    }

    #[getter]
    fn r_prime(&self) -> Option<usize> {
        self.inner.r_prime
    }

    #[getter]
    fn s_prime(&self) -> usize {
        self.inner.s_prime()
    }

    #[getter]
    fn key_alice(&self) -> Vec<u8> {
        self.inner.key_alice.clone()
    }

    #[getter]
    fn key_bob(&self) -> Vec<u8> {
        self.inner.key_bob.clone()
    }
}

#[pyfunction]
fn binary_entropy(eps: f64) -> PyResult<f64> {
    cinfo::binary_entropy(eps).map_err(err)
}

/// Asymptotic key rate. Bell protocols take `qber` or `depol`; B92 takes
/// `depol` and the signal amplitude `alpha`.
#[pyfunction]
#[pyo3(signature = (protocol, qber=None, depol=None, conditioned=false, alpha=0.38))]
fn rate(
    py: Python<'_>,
    protocol: &str,
    qber: Option<f64>,
    depol: Option<f64>,
    conditioned: bool,
    alpha: f64,
) -> PyResult<Py<PyAny>> {
    let protocol: Protocol = protocol.parse().map_err(err)?;
    let report = match (protocol, qber, depol) {
        (Protocol::B92, None, Some(p)) => b92_rate_depolarizing(p, alpha),
        (Protocol::B92, _, _) => return Err(QkdError::new_err("B92 takes depol only")),
        (_, Some(q), None) => bell_rate(protocol, q, conditioned),
        (_, None, Some(p)) => bell_rate(protocol, 2.0 * p / 3.0, conditioned),
        _ => return Err(QkdError::new_err("give exactly one of qber and depol")),
    }
    .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (protocol, conditioned=false))]
fn threshold(py: Python<'_>, protocol: &str, conditioned: bool) -> PyResult<Py<PyAny>> {
    let protocol: Protocol = protocol.parse().map_err(err)?;
    to_py(py, &qkd_core::analyzers::threshold(protocol, conditioned).map_err(err)?)
}

/// Run the protocol on a configuration dict (or JSON string) and return
/// the transcript with a summary dict.
#[pyfunction]
fn simulate_config(py: Python<'_>, config: &Bound<'_, PyAny>) -> PyResult<(Transcript, Py<PyAny>)> {
    let config: ProtocolConfig = from_py(py, config)?;
    let (t, summary) = qkd_core::cli::simulate(&config).map_err(err)?;
    Ok((Transcript { inner: t }, to_py(py, &summary)?))
}

#[pyfunction]
#[pyo3(signature = (protocol, n, lambdas=None, depol=None, seed=0, sampling_rate=None, exact_eve=false, key_length=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    protocol: &str,
    n: usize,
    lambdas: Option<[f64; 4]>,
    depol: Option<f64>,
    seed: u64,
    sampling_rate: Option<f64>,
    exact_eve: bool,
    key_length: Option<usize>,
) -> PyResult<(Transcript, Py<PyAny>)> {
    let attack = match (lambdas, depol) {
        (Some(lambdas), None) => AttackModel::BellDiagonal { lambdas },
        (None, Some(p)) => AttackModel::Depolarizing { p },
        _ => return Err(QkdError::new_err("give exactly one of lambdas and depol")),
    };
    let mut config = ProtocolConfig::new(protocol.parse().map_err(err)?, n, attack, seed);
    config.sampling_rate = sampling_rate;
    config.exact_eve = exact_eve;
    config.key_length = key_length;
    let (t, summary) = qkd_core::cli::simulate(&config).map_err(err)?;
    Ok((Transcript { inner: t }, to_py(py, &summary)?))
}

/// Run a verification suite; returns a list of bound reports.
#[pyfunction]
#[pyo3(signature = (suite="all", trials=1000, seed=0))]
fn verify(py: Python<'_>, suite: &str, trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    to_py(py, &run_suite(suite, SuiteOptions { trials, seed }).map_err(err)?)
}

#[pyfunction]
fn collision_probability(n_in: usize, n_out: usize) -> PyResult<f64> {
    randkit::collision_probability_exhaustive(n_in, n_out).map_err(err)
}

#[pymodule]
fn qkdsec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QkdError", m.py().get_type::<QkdError>())?;
    m.add_class::<ProbDist>()?;
    m.add_class::<Povm>()?;
    m.add_class::<DensityOperator>()?;
    m.add_class::<ToeplitzHash>()?;
    m.add_class::<Transcript>()?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(rate, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(collision_probability, m)?)?;
    Ok(())
}
