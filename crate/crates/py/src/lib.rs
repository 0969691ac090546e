//! Python bindings: grids, sample fields, lifts, operators, sampling, metrics and
//! configured restoration runs.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use slrm_core::config::ExperimentConfig;
use slrm_core::experiment::{self, Method};
use slrm_core::grid::CenteredGrid;
use slrm_core::hankel::{self, DEFAULT_RANK_TOL};
use slrm_core::{diffops, metrics, sampling, SampleField, SlrmError, SpatialImage};

fn to_py(e: SlrmError) -> PyErr {
    match e {
        SlrmError::Io(_) | SlrmError::Format(_) => PyIOError::new_err(e.to_string()),
        SlrmError::NotConverged { .. } | SlrmError::NonFinite(_) | SlrmError::UepViolation(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Complex tensor field on a centered frequency grid.
#[pyclass(name = "Field", module = "slrm", skip_from_py_object)]
#[derive(Clone)]
pub struct PyField {
    inner: SampleField,
}

#[pymethods]
impl PyField {
    /// `components` holds `2**order` lists of `n1*n2` complex values in centered storage.
    #[new]
    fn new(n1: usize, n2: usize, order: usize, components: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let grid = CenteredGrid::new(n1, n2).map_err(to_py)?;
        Ok(Self { inner: SampleField::from_components(order, grid, components).map_err(to_py)? })
    }

    #[staticmethod]
    fn zeros(n1: usize, n2: usize, order: usize) -> PyResult<Self> {
        let grid = CenteredGrid::new(n1, n2).map_err(to_py)?;
        Ok(Self { inner: SampleField::zeros(order, grid) })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn extents(&self) -> (usize, usize) {
        self.inner.grid().extents()
    }

    fn components(&self) -> Vec<Vec<Complex64>> {
        self.inner.components().to_vec()
    }

    /// Value of component `j` at centered frequency `(k1, k2)`.
    fn get(&self, j: usize, k1: i64, k2: i64) -> PyResult<Complex64> {
        let grid = self.inner.grid();
        if j >= self.inner.num_components() || !grid.contains([k1, k2]) {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.get(j, [k1, k2]))
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn __sub__(&self, other: &PyField) -> PyResult<PyField> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        let (n1, n2) = self.inner.grid().extents();
        format!("Field(order={}, extents=({n1}, {n2}))", self.inner.order())
    }
}

fn wrap(r: slrm_core::Result<SampleField>) -> PyResult<PyField> {
    r.map(|inner| PyField { inner }).map_err(to_py)
}

#[pyfunction]
fn apply_d(v: &PyField) -> PyResult<PyField> {
    wrap(diffops::apply_d(&v.inner))
}

#[pyfunction]
fn apply_e(q: &PyField) -> PyResult<PyField> {
    wrap(diffops::apply_e(&q.inner))
}

#[pyfunction]
fn apply_d2(v: &PyField) -> PyResult<PyField> {
    wrap(diffops::apply_d2(&v.inner))
}

#[pyfunction]
fn adjoint_d(y: &PyField) -> PyResult<PyField> {
    wrap(diffops::adjoint_d(&y.inner))
}

#[pyfunction]
fn adjoint_e(y: &PyField) -> PyResult<PyField> {
    wrap(diffops::adjoint_e(&y.inner))
}

/// Rows of the multi-fold Hankel lift with a `k1 x k2` support.
#[pyfunction]
fn lift(field: &PyField, k1: usize, k2: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let support = CenteredGrid::new(k1, k2).map_err(to_py)?;
    let h = hankel::lift(&field.inner, support).map_err(to_py)?;
    let m = h.matrix();
    Ok((0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
}

/// Singular values (nonincreasing) of the lift.
#[pyfunction]
fn singular_values(field: &PyField, k1: usize, k2: usize) -> PyResult<Vec<f64>> {
    let support = CenteredGrid::new(k1, k2).map_err(to_py)?;
    let h = hankel::lift(&field.inner, support).map_err(to_py)?;
    Ok(hankel::svd_of(&h).map_err(to_py)?.values)
}

#[pyfunction]
#[pyo3(signature = (values, tol = DEFAULT_RANK_TOL))]
fn numerical_rank(values: Vec<f64>, tol: f64) -> usize {
    hankel::numerical_rank(&values, tol)
}

/// Analytic spectrum (`n1*n2` times the continuous transform) of the two-region phantom.
#[pyfunction]
fn two_region_spectrum(n: usize) -> PyResult<PyField> {
    let grid = CenteredGrid::square(n).map_err(to_py)?;
    Ok(PyField { inner: experiment::analytic_spectrum(&experiment::two_region_phantom(), grid) })
}

/// Analytic spectrum of a seeded random rectangle phantom.
#[pyfunction]
#[pyo3(signature = (n, seed, count = 4))]
fn rectangle_spectrum(n: usize, seed: u64, count: usize) -> PyResult<PyField> {
    let grid = CenteredGrid::square(n).map_err(to_py)?;
    let model = experiment::random_rect_phantom(seed, count).map_err(to_py)?;
    Ok(PyField { inner: experiment::analytic_spectrum(&model, grid) })
}

/// Real part of the inverse spectrum-scale DFT, row-major.
#[pyfunction]
fn to_image(field: &PyField) -> PyResult<Vec<f64>> {
    Ok(slrm_core::dft::to_intensity(&field.inner).map_err(to_py)?.real_part())
}

#[pyfunction]
#[pyo3(signature = (n1, n2, fraction, seed, decay_power = 3.0, center_radius = 4.0))]
fn variable_density_mask(
    n1: usize,
    n2: usize,
    fraction: f64,
    seed: u64,
    decay_power: f64,
    center_radius: f64,
) -> PyResult<Vec<bool>> {
    let grid = CenteredGrid::new(n1, n2).map_err(to_py)?;
    let m = sampling::variable_density_mask(grid, fraction, seed, decay_power, center_radius).map_err(to_py)?;
    Ok(m.kept().to_vec())
}

fn image(values: &[f64], n1: usize, n2: usize) -> PyResult<SpatialImage> {
    let grid = CenteredGrid::new(n1, n2).map_err(to_py)?;
    SpatialImage::from_real(grid, values).map_err(to_py)
}

/// `(snr_db, hfen, ssim)` of `u` against `reference`, both row-major `n1 x n2`.
#[pyfunction]
fn evaluate(u: Vec<f64>, reference: Vec<f64>, n1: usize, n2: usize) -> PyResult<(f64, f64, f64)> {
    let r = metrics::evaluate(&image(&u, n1, n2)?, &image(&reference, n1, n2)?).map_err(to_py)?;
    Ok((r.snr_db, r.hfen, r.ssim))
}

/// Runs every method of a TOML experiment config and returns
/// `[(method, snr_db, hfen, ssim)]`.
#[pyfunction]
fn restore(config: &str) -> PyResult<Vec<(String, f64, f64, f64)>> {
    let cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    let data = experiment::prepare(&cfg).map_err(to_py)?;
    let problem = experiment::build_problem(&cfg, &data).map_err(to_py)?;
    let mut rows = Vec::new();
    for name in &cfg.method.names {
        let method: Method = name.parse().map_err(to_py)?;
        let res = experiment::run_method(method, &cfg, &problem).map_err(to_py)?;
        let r = metrics::evaluate(&res.image, &data.reference).map_err(to_py)?;
        rows.push((name.clone(), r.snr_db, r.hfen, r.ssim));
    }
    Ok(rows)
}

#[pymodule]
fn slrm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(apply_d, m)?)?;
    m.add_function(wrap_pyfunction!(apply_e, m)?)?;
    m.add_function(wrap_pyfunction!(apply_d2, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint_d, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint_e, m)?)?;
    m.add_function(wrap_pyfunction!(lift, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(numerical_rank, m)?)?;
    m.add_function(wrap_pyfunction!(two_region_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(rectangle_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(to_image, m)?)?;
    m.add_function(wrap_pyfunction!(variable_density_mask, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(restore, m)?)?;
    Ok(())
}
