use num_rational::Ratio;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use sis_invariance::config::parse_config;
use sis_invariance::report::run_analysis;
use sis_invariance::spectrum::{evaluate, Rational};
use sis_invariance::{fiber, frames, invariance, oracle};
use sis_invariance::{Complex64, Error, FrequencyGrid, GeneratorSpec, PiecewiseConstantSpectrum, SampledSpectrum, Sampling};

fn to_py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Serialize through JSON into plain Python dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid {
    inner: FrequencyGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (samples_per_unit, fiber_half_width, sampling = "midpoint"))]
    fn new(samples_per_unit: usize, fiber_half_width: usize, sampling: &str) -> PyResult<Self> {
        let sampling = match sampling {
            "midpoint" => Sampling::Midpoint,
            "left" => Sampling::Left,
            other => return Err(PyValueError::new_err(format!("unknown sampling {other:?}"))),
        };
        let inner = FrequencyGrid::with_sampling(samples_per_unit, fiber_half_width, sampling).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn samples_per_unit(&self) -> usize {
        self.inner.samples_per_unit()
    }

    #[getter]
    fn fiber_half_width(&self) -> usize {
        self.inner.fiber_half_width()
    }

    fn omega(&self, i: usize) -> PyResult<f64> {
        if i >= self.inner.samples_per_unit() {
            return Err(to_py_err(Error::IndexOutOfRange { index: i, len: self.inner.samples_per_unit() }));
        }
        Ok(self.inner.omega(i))
    }

    fn __len__(&self) -> usize {
        self.inner.samples_per_unit()
    }

    fn __repr__(&self) -> String {
        format!("Grid(M={}, K={})", self.inner.samples_per_unit(), self.inner.fiber_half_width())
    }
}

/// Samples `φ̂(ω_i + k)` of one generator on a grid.
#[pyclass(name = "Spectrum", frozen, from_py_object)]
#[derive(Clone)]
struct PySpectrum {
    inner: SampledSpectrum,
}

fn parse_rational(s: &Bound<'_, PyAny>) -> PyResult<Ratio<i64>> {
    if let Ok(n) = s.extract::<i64>() {
        return Ok(Ratio::from_integer(n));
    }
    let text: String = s.extract()?;
    text.parse::<Rational>().map(|r| r.0).map_err(PyValueError::new_err)
}

#[pymethods]
impl PySpectrum {
    /// Evaluate a generator described as a JSON object, e.g.
    /// `{"type": "bspline", "order": 1}`.
    #[staticmethod]
    fn from_json(spec: &str, grid: PyGrid) -> PyResult<Self> {
        let spec: GeneratorSpec = serde_json::from_str(spec).map_err(|e| PyValueError::new_err(e.to_string()))?;
        spec.validate().map_err(to_py_err)?;
        Ok(Self { inner: evaluate(&spec, &grid.inner).map_err(to_py_err)? })
    }

    /// Indicator of a union of intervals with rational endpoints (ints or "p/q").
    #[staticmethod]
    fn indicator(intervals: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>, grid: PyGrid) -> PyResult<Self> {
        let parsed = intervals
            .iter()
            .map(|(a, b)| Ok((parse_rational(a)?, parse_rational(b)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let spectrum = PiecewiseConstantSpectrum::indicator(&parsed).map_err(to_py_err)?;
        Ok(Self { inner: spectrum.sample(&grid.inner).map_err(to_py_err)? })
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: *self.inner.grid() }
    }

    fn get(&self, i: usize, k: i64) -> PyResult<Complex64> {
        let g = self.inner.grid();
        if i >= g.samples_per_unit() || !g.offsets().contains(&k) {
            return Err(PyValueError::new_err(format!("sample ({i}, {k}) outside the grid")));
        }
        Ok(self.inner.get(i, k))
    }

    /// All samples, `i`-major.
    fn values(&self) -> Vec<Complex64> {
        self.inner.values().to_vec()
    }

    fn scale(&self, c: Complex64) -> Self {
        Self { inner: self.inner.scale(c) }
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }
}

fn unwrap_all(phi: Vec<PySpectrum>) -> Vec<SampledSpectrum> {
    phi.into_iter().map(|s| s.inner).collect()
}

#[pyfunction]
#[pyo3(signature = (phi, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn dimension_function(phi: Vec<PySpectrum>, grid: PyGrid, rel_tol: f64) -> PyResult<Vec<usize>> {
    Ok(fiber::dimension_function(&unwrap_all(phi), &grid.inner, rel_tol).map_err(to_py_err)?.ranks)
}

#[pyfunction]
#[pyo3(signature = (phi, n, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn rank_sum_test<'py>(py: Python<'py>, phi: Vec<PySpectrum>, n: usize, grid: PyGrid, rel_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = invariance::rank_sum_test(&unwrap_all(phi), n, &grid.inner, rel_tol).map_err(to_py_err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (phi, n_max, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn invariance_order<'py>(py: Python<'py>, phi: Vec<PySpectrum>, n_max: usize, grid: PyGrid, rel_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = invariance::invariance_order(&unwrap_all(phi), n_max, &grid.inner, rel_tol).map_err(to_py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (phi, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn ti_check(phi: Vec<PySpectrum>, grid: PyGrid, rel_tol: f64) -> PyResult<bool> {
    invariance::ti_check(&unwrap_all(phi), &grid.inner, rel_tol).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (phi, n, start, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn zero_set_bound_check<'py>(
    py: Python<'py>,
    phi: Vec<PySpectrum>,
    n: usize,
    start: f64,
    grid: PyGrid,
    rel_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let z = invariance::zero_set_bound_check(&unwrap_all(phi), n, start, &grid.inner, rel_tol).map_err(to_py_err)?;
    to_py(py, &z)
}

/// `(A, B)` for the integer translates of `phi`.
#[pyfunction]
#[pyo3(signature = (phi, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn frame_bounds(phi: Vec<PySpectrum>, grid: PyGrid, rel_tol: f64) -> PyResult<(f64, f64)> {
    let b = frames::frame_bounds(&unwrap_all(phi), &grid.inner, rel_tol).map_err(to_py_err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
#[pyo3(signature = (phi, n, grid, rel_tol = fiber::DEFAULT_REL_TOL))]
fn cutoff_frame_check<'py>(py: Python<'py>, phi: Vec<PySpectrum>, n: usize, grid: PyGrid, rel_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = frames::cutoff_frame_check(&unwrap_all(phi), n, &grid.inner, rel_tol).map_err(to_py_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (phi, n, grid, tol = oracle::DEFAULT_ORACLE_TOL))]
fn invariance_oracle<'py>(py: Python<'py>, phi: Vec<PySpectrum>, n: usize, grid: PyGrid, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = oracle::invariance_oracle(&unwrap_all(phi), n, &grid.inner, tol).map_err(to_py_err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (g, f, n, tol = oracle::DEFAULT_ORACLE_TOL))]
fn refined_membership<'py>(py: Python<'py>, g: PySpectrum, f: PySpectrum, n: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let v = oracle::refined_membership(&g.inner, &f.inner, n, tol).map_err(to_py_err)?;
    to_py(py, &v)
}

#[pyfunction]
fn in_partition(n: usize, k: usize, omega: f64) -> PyResult<bool> {
    invariance::in_partition(n, k, omega).map_err(to_py_err)
}

#[pyfunction]
fn modulation_h(n: usize, k: usize, omega: f64) -> PyResult<Complex64> {
    invariance::modulation_h(n, k, omega).map_err(to_py_err)
}

/// Run the full pipeline on a JSON config and return the JSON report.
#[pyfunction]
fn analyze(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let config = parse_config(config_json).map_err(to_py_err)?;
    let report = py.detach(|| run_analysis(&config)).map_err(to_py_err)?;
    report.to_json().map_err(to_py_err)
}

#[pymodule(name = "sis_invariance")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(dimension_function, m)?)?;
    m.add_function(wrap_pyfunction!(rank_sum_test, m)?)?;
    m.add_function(wrap_pyfunction!(invariance_order, m)?)?;
    m.add_function(wrap_pyfunction!(ti_check, m)?)?;
    m.add_function(wrap_pyfunction!(zero_set_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(frame_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(cutoff_frame_check, m)?)?;
    m.add_function(wrap_pyfunction!(invariance_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(refined_membership, m)?)?;
    m.add_function(wrap_pyfunction!(in_partition, m)?)?;
    m.add_function(wrap_pyfunction!(modulation_h, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add("SCHEMA", sis_invariance::report::SCHEMA)?;
    Ok(())
}
