//! Python bindings. Curves and configurations are wrapped as classes;
//! reports come back as plain dicts and lists with complex numbers where
//! the Rust side has them.

use std::time::Duration;

use inscribe_core::config::{check_interleaved_on_circle, make_pinwheel};
use inscribe_core::curves::{fit_from_polyline, DEFAULT_BANDWIDTH};
use inscribe_core::interp::{build_transfer, interpolate as interpolate_nodes};
use inscribe_core::io::SolveRequest;
use inscribe_core::symplectic::{diagonal_forms, maslov_index_diagonal};
use inscribe_core::verify::{run_suite, Suite};
use inscribe_core::{JordanCurve, PointConfig, SolveOptions};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

create_exception!(inscribe, InscribeError, PyValueError, "Invalid input or solver failure.");

fn err(e: inscribe_core::Error) -> PyErr {
    InscribeError::new_err(format!("{}: {e}", e.code()))
}

fn json_err(e: serde_json::Error) -> PyErr {
    InscribeError::new_err(format!("MalformedJson: {e}"))
}

/// Report fields holding a complex number or a list of them.
const COMPLEX_FIELDS: &[&str] = &["poly", "lambda_raw", "mu_raw", "value", "alpha", "beta", "center", "images"];

fn complex_to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    match value {
        Value::Array(items) => match items.as_slice() {
            [Value::Number(re), Value::Number(im)] => {
                let z = Complex64::new(re.as_f64().unwrap_or(f64::NAN), im.as_f64().unwrap_or(f64::NAN));
                Ok(z.into_pyobject(py)?.into_any().unbind())
            }
            _ => {
                let list = PyList::empty(py);
                for item in items {
                    list.append(complex_to_py(py, item)?)?;
                }
                Ok(list.into_any().unbind())
            }
        },
        other => to_py(py, other),
    }
}

fn to_py(py: Python<'_>, value: &Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                let v = if COMPLEX_FIELDS.contains(&k.as_str()) {
                    complex_to_py(py, v)?
                } else {
                    to_py(py, v)?
                };
                dict.set_item(k, v)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn serialize_to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(value).map_err(json_err)?;
    to_py(py, &value)
}

/// A smooth Jordan curve given by finitely many Fourier coefficients.
#[pyclass(name = "Curve", module = "inscribe", frozen)]
struct PyCurve {
    inner: JordanCurve,
}

#[pymethods]
impl PyCurve {
    /// `coeffs` maps frequency k to the complex coefficient c_k.
    #[new]
    fn new(coeffs: Vec<(i64, Complex64)>) -> Self {
        PyCurve {
            inner: JordanCurve::from_coeffs(coeffs),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (center = Complex64::new(0.0, 0.0), radius = 1.0))]
    fn circle(center: Complex64, radius: f64) -> Self {
        PyCurve {
            inner: JordanCurve::circle(center, radius),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: JordanCurve = serde_json::from_str(text).map_err(json_err)?;
        Ok(PyCurve { inner })
    }

    /// Least-squares Fourier fit to a closed polyline, rejected unless the
    /// result is a valid Jordan curve.
    #[staticmethod]
    #[pyo3(signature = (points, bandwidth = DEFAULT_BANDWIDTH))]
    fn fit(points: Vec<Complex64>, bandwidth: usize) -> PyResult<Self> {
        let inner = fit_from_polyline(&points, bandwidth).map_err(err)?;
        Ok(PyCurve { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn bandwidth(&self) -> usize {
        self.inner.bandwidth()
    }

    fn coeff(&self, k: i64) -> Complex64 {
        self.inner.coeff(k)
    }

    fn __call__(&self, t: f64) -> Complex64 {
        self.inner.eval(t)
    }

    fn derivative(&self, t: f64) -> Complex64 {
        self.inner.derivative(t)
    }

    fn sample(&self, n: usize) -> Vec<Complex64> {
        self.inner.sample(n)
    }

    fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        serialize_to_py(py, &self.inner.validate())
    }

    fn maslov_index(&self, n: usize) -> PyResult<i64> {
        maslov_index_diagonal(&self.inner, n).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Curve(bandwidth={})", self.inner.bandwidth())
    }
}

/// Ordered nodes `alpha` and `beta` of a point configuration.
#[pyclass(name = "Config", module = "inscribe", frozen)]
struct PyConfig {
    inner: PointConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new(alpha: Vec<Complex64>, beta: Vec<Complex64>) -> PyResult<Self> {
        let inner = PointConfig::new(alpha, beta).map_err(err)?;
        Ok(PyConfig { inner })
    }

    #[staticmethod]
    fn pinwheel(n: usize, theta: f64) -> PyResult<Self> {
        let inner = make_pinwheel(n, theta).map_err(err)?;
        Ok(PyConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: PointConfig = serde_json::from_str(text).map_err(json_err)?;
        Ok(PyConfig { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alpha(&self) -> Vec<Complex64> {
        self.inner.alpha().to_vec()
    }

    #[getter]
    fn beta(&self) -> Vec<Complex64> {
        self.inner.beta().to_vec()
    }

    fn is_interleaved(&self) -> PyResult<bool> {
        check_interleaved_on_circle(&self.inner).map_err(err)
    }

    /// Rows of the transfer map F taking values at alpha to values at beta.
    fn transfer_matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let transfer = build_transfer(&self.inner).map_err(err)?;
        Ok(transfer
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect())
    }

    fn forms(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let forms = diagonal_forms(&self.inner).map_err(err)?;
        serialize_to_py(py, &forms)
    }

    fn __repr__(&self) -> String {
        format!("Config(n={})", self.inner.n())
    }
}

/// Multistart search for polynomials inscribing `config` into `curve`.
#[pyfunction]
#[pyo3(signature = (curve, config, *, degree = None, n_starts = None, seed = 0, threads = None, time_limit = None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    curve: &PyCurve,
    config: &PyConfig,
    degree: Option<usize>,
    n_starts: Option<usize>,
    seed: u64,
    threads: Option<usize>,
    time_limit: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let time_limit = match time_limit {
        Some(s) => Some(
            Duration::try_from_secs_f64(s)
                .map_err(|e| InscribeError::new_err(format!("InvalidOption: time_limit {e}")))?,
        ),
        None => None,
    };
    let request = SolveRequest {
        curve: curve.inner.clone(),
        config: config.inner.clone(),
        degree,
        opts: SolveOptions {
            n_starts,
            seed,
            threads,
            time_limit,
            ..Default::default()
        },
    };
    let report = py.detach(|| request.solve()).map_err(err)?;
    serialize_to_py(py, &report)
}

/// Coefficients, lowest degree first, of the polynomial through the nodes.
#[pyfunction]
fn interpolate(nodes: Vec<Complex64>, values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let poly = interpolate_nodes(&nodes, &values).map_err(err)?;
    Ok(poly.coeffs().to_vec())
}

/// Runs a seeded invariant suite: forms, clean, maslov, pinwheel or all.
#[pyfunction]
#[pyo3(signature = (suite = "all", n_trials = 100, seed = 0))]
fn verify(py: Python<'_>, suite: &str, n_trials: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let report = py.detach(|| run_suite(suite, n_trials, seed));
    serialize_to_py(py, &report)
}

#[pymodule]
fn inscribe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("InscribeError", m.py().get_type::<InscribeError>())?;
    m.add_class::<PyCurve>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
