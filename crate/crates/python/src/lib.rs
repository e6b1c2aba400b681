//! Python bindings: curves, distances, simplification, the representative
//! curve solver and clustering.

use fk::cluster::{kl_median as kl_median_rs, FinderOverrides};
use fk::frechet;
use fk::simplify::bicriteria_simplify;
use fk::twophase::{solve_q, QInstance, SolveMode, SolveOptions, SolveOutcome};
use fk::{Error, PolygonalCurve};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(frechet_kit, BudgetExceeded, PyException);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded(m) => BudgetExceeded::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A polygonal curve given by its vertices.
#[pyclass(name = "Curve", module = "frechet_kit", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCurve {
    inner: PolygonalCurve,
}

#[pymethods]
impl PyCurve {
    #[new]
    fn new(points: Vec<Vec<f64>>) -> PyResult<Self> {
        PolygonalCurve::from_coords(&points).map(|inner| PyCurve { inner }).map_err(to_py)
    }

    /// Vertex coordinates as a list of lists.
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.vertices().iter().map(|p| p.coords().to_vec()).collect()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Curve({:?})", self.points())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn wrap(c: PolygonalCurve) -> PyCurve {
    PyCurve { inner: c }
}

fn unwrap(cs: &[PyRef<'_, PyCurve>]) -> Vec<PolygonalCurve> {
    cs.iter().map(|c| c.inner.clone()).collect()
}

/// Fréchet distance, bracketed to `tol`. Returns `(value, lower, upper)`.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-6))]
fn frechet_distance(a: &PyCurve, b: &PyCurve, tol: f64) -> (f64, f64, f64) {
    let r = frechet::frechet_distance(&a.inner, &b.inner, tol);
    (r.value, r.lower, r.upper)
}

/// Whether the Fréchet distance is at most `delta`.
#[pyfunction]
fn free_space_decision(a: &PyCurve, b: &PyCurve, delta: f64) -> bool {
    frechet::free_space_decision(&a.inner, &b.inner, delta)
}

#[pyfunction]
fn discrete_frechet(a: &PyCurve, b: &PyCurve) -> f64 {
    frechet::discrete_frechet(&a.inner, &b.inner)
}

/// Simplifies `curve` within `(1 + eps) delta`. Returns `(curve, blocks)`.
#[pyfunction]
#[pyo3(signature = (curve, delta, alpha = 0.5, eps = 0.25, budget = 10_000_000))]
fn simplify(py: Python<'_>, curve: &PyCurve, delta: f64, alpha: f64, eps: f64, budget: u64) -> PyResult<(PyCurve, Vec<(usize, usize)>)> {
    let tau = curve.inner.clone();
    let r = py.detach(|| bicriteria_simplify(&tau, delta, alpha, eps, budget)).map_err(to_py)?;
    Ok((wrap(r.curve), r.blocks))
}

/// A curve of at most `ell` vertices within `thresholds[i] + eps * max(thresholds)`
/// of every curve, or `None` when no curve is within the thresholds themselves.
#[pyfunction]
#[pyo3(signature = (curves, thresholds, ell, eps = 0.5, mode = "full", budget = 10_000_000, threads = 1))]
#[allow(clippy::too_many_arguments)]
fn representative(
    py: Python<'_>,
    curves: Vec<PyRef<'_, PyCurve>>,
    thresholds: Vec<f64>,
    ell: usize,
    eps: f64,
    mode: &str,
    budget: u64,
    threads: usize,
) -> PyResult<Option<PyCurve>> {
    let mode = match mode {
        "full" => SolveMode::Full,
        "subset5l" => SolveMode::Subset5l,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let inst = QInstance::new(unwrap(&curves), thresholds, ell, eps).map_err(to_py)?;
    let opts = SolveOptions {
        mode,
        node_budget: budget,
        threads,
        ..SolveOptions::default()
    };
    match py.detach(|| solve_q(&inst, &opts)).map_err(to_py)? {
        SolveOutcome::Found { curve, .. } => Ok(Some(wrap(curve))),
        SolveOutcome::Null { .. } => Ok(None),
    }
}

/// `(k, ell)`-median. Returns `(centers, cost, assignment, flags)`.
#[pyfunction]
#[pyo3(signature = (curves, k, ell, mu = 0.2, eps = 0.5, seed = 0, sample_size = None, subset_size = None,
                    threshold_factors = None, budget = 20_000, threads = 1))]
#[allow(clippy::too_many_arguments)]
fn kl_median(
    py: Python<'_>,
    curves: Vec<PyRef<'_, PyCurve>>,
    k: usize,
    ell: usize,
    mu: f64,
    eps: f64,
    seed: u64,
    sample_size: Option<usize>,
    subset_size: Option<usize>,
    threshold_factors: Option<Vec<f64>>,
    budget: u64,
    threads: usize,
) -> PyResult<(Vec<PyCurve>, f64, Vec<usize>, Vec<String>)> {
    let t = unwrap(&curves);
    let ov = FinderOverrides {
        sample_size,
        subset_size,
        threshold_factors,
        node_budget: budget,
        threads,
        ..FinderOverrides::default()
    };
    let r = py.detach(|| kl_median_rs(&t, k, ell, mu, eps, seed, &ov)).map_err(to_py)?;
    Ok((r.centers.into_iter().map(wrap).collect(), r.cost, r.assignment, r.candidates.flags))
}

/// Seeded planted clusters in the plane. Returns `(curves, centers, assignment, cost)`.
#[pyfunction]
#[pyo3(signature = (k, per_cluster, m, ell, separation, noise, seed = 0))]
fn plant_clusters(k: usize, per_cluster: usize, m: usize, ell: usize, separation: f64, noise: f64, seed: u64) -> PyResult<(Vec<PyCurve>, Vec<PyCurve>, Vec<usize>, f64)> {
    let p = fk::oracles::plant_clusters(k, per_cluster, m, ell, separation, noise, seed).map_err(to_py)?;
    Ok((p.curves.into_iter().map(wrap).collect(), p.centers.into_iter().map(wrap).collect(), p.assignment, p.cost))
}

#[pymodule]
fn frechet_kit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCurve>()?;
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add_function(wrap_pyfunction!(frechet_distance, m)?)?;
    m.add_function(wrap_pyfunction!(free_space_decision, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_frechet, m)?)?;
    m.add_function(wrap_pyfunction!(simplify, m)?)?;
    m.add_function(wrap_pyfunction!(representative, m)?)?;
    m.add_function(wrap_pyfunction!(kl_median, m)?)?;
    m.add_function(wrap_pyfunction!(plant_clusters, m)?)?;
    Ok(())
}
