//! Python bindings: manifolds, cutoffs, spectral states, multiplier tables,
//! time slicing and the experiment runner.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pathslice_core::acceptance;
use pathslice_core::experiment::{self, ExperimentConfig};
use pathslice_core::kernel;
use pathslice_core::propagator::{self, ProjectorPolicy, SlicingPlan};
use pathslice_core::{
    Complex64, CutoffProfile, Error, Generator, ManifoldModel, MultiplierCache, Point, QuadratureSettings,
    SpectralState, Spectrum,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::QuadratureNonConvergence { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn settings(budget: u32, tolerance: f64) -> QuadratureSettings {
    QuadratureSettings { oscillation_budget: budget, tolerance, ..QuadratureSettings::default() }
}

/// A circle, flat torus or round 2-sphere, built from a key such as
/// `"circle:1"`, `"torus:2pi,2pi"` or `"sphere2:1"`.
#[pyclass(name = "Manifold", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyManifold {
    inner: ManifoldModel,
}

#[pymethods]
impl PyManifold {
    #[new]
    fn new(key: &str) -> PyResult<Self> {
        Ok(PyManifold { inner: key.parse().map_err(to_py)? })
    }

    #[getter]
    fn key(&self) -> String {
        self.inner.key()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn scalar_curvature(&self) -> f64 {
        self.inner.scalar_curvature()
    }

    #[getter]
    fn injectivity_radius(&self) -> f64 {
        self.inner.injectivity_radius()
    }

    #[getter]
    fn total_volume(&self) -> f64 {
        self.inner.total_volume()
    }

    fn geodesic_distance(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let n = self.inner.dimension();
        if x.len() != n || y.len() != n {
            return Err(PyValueError::new_err(format!("points need {n} coordinates")));
        }
        Ok(self.inner.geodesic_distance(&Point::new(x), &Point::new(y)))
    }

    fn normal_metric_det(&self, r: f64) -> PyResult<f64> {
        self.inner.normal_metric_det(r).map_err(to_py)
    }

    fn polar_volume_density(&self, r: f64) -> PyResult<f64> {
        self.inner.polar_volume_density(r).map_err(to_py)
    }

    /// Eigenvalues and multiplicities of `-Δ` up to `e_max`.
    fn eigenlevels(&self, e_max: f64) -> Vec<(f64, usize)> {
        Spectrum::new(self.inner.clone(), e_max).levels().iter().map(|l| (l.eigenvalue, l.multiplicity)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Manifold({:?})", self.inner.key())
    }
}

/// Smooth cutoff with support and plateau given as fractions of the injectivity radius.
#[pyclass(name = "Cutoff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCutoff {
    inner: CutoffProfile,
}

#[pymethods]
impl PyCutoff {
    #[new]
    #[pyo3(signature = (manifold, support=0.8, plateau=0.4))]
    fn new(manifold: &PyManifold, support: f64, plateau: f64) -> PyResult<Self> {
        Ok(PyCutoff { inner: CutoffProfile::for_manifold(&manifold.inner, support, plateau).map_err(to_py)? })
    }

    #[getter]
    fn support(&self) -> f64 {
        self.inner.support()
    }

    #[getter]
    fn plateau(&self) -> f64 {
        self.inner.plateau()
    }

    fn __call__(&self, r: f64) -> f64 {
        self.inner.eval(r)
    }

    fn __repr__(&self) -> String {
        format!("Cutoff(support={}, plateau={})", self.inner.support(), self.inner.plateau())
    }
}

/// A function on a manifold, as coefficients in the Laplace eigenbasis up to `e_max`.
#[pyclass(name = "SpectralState", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: SpectralState,
}

fn parse_generator(name: &str) -> PyResult<Generator> {
    name.parse().map_err(to_py)
}

#[pymethods]
impl PyState {
    /// `terms` is a list of `(level, m, amplitude)`.
    #[new]
    #[pyo3(signature = (manifold, e_max, terms))]
    fn new(manifold: &PyManifold, e_max: f64, terms: Vec<(usize, usize, Complex64)>) -> PyResult<Self> {
        let spectrum = Spectrum::new(manifold.inner.clone(), e_max);
        Ok(PyState { inner: SpectralState::from_terms(spectrum, &terms).map_err(to_py)? })
    }

    /// Normalized random state on the lowest `levels` levels.
    #[staticmethod]
    fn random(manifold: &PyManifold, e_max: f64, levels: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let spectrum = Spectrum::new(manifold.inner.clone(), e_max);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        PyState { inner: SpectralState::random_low_energy(spectrum, levels, &mut rng) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyState { inner: SpectralState::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coefficients().to_vec()
    }

    fn coefficient(&self, level: usize, m: usize) -> Option<Complex64> {
        self.inner.coefficient(level, m)
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn normalized(&self) -> Self {
        PyState { inner: self.inner.clone().normalized() }
    }

    fn project(&self, energy: f64) -> Self {
        PyState { inner: self.inner.project(energy) }
    }

    #[pyo3(signature = (t, generator="corrected"))]
    fn exact_propagate(&self, t: f64, generator: &str) -> PyResult<Self> {
        Ok(PyState { inner: self.inner.exact_propagate(t, parse_generator(generator)?) })
    }

    fn l2_error(&self, other: &PyState) -> PyResult<f64> {
        self.inner.l2_error(&other.inner).map_err(to_py)
    }

    fn sobolev_norm(&self, k: f64) -> f64 {
        self.inner.sobolev_norm(k)
    }

    fn evaluate(&self, point: Vec<f64>) -> Complex64 {
        self.inner.evaluate(&Point::new(point))
    }

    fn __repr__(&self) -> String {
        format!("SpectralState({}, E_max={}, norm={:.6})", self.inner.manifold(), self.inner.spectrum().e_max(), self.inner.norm())
    }
}

/// The short-time operator `U(t)` as one eigenvalue per Laplace level.
#[pyclass(name = "MultiplierTable", frozen)]
struct PyTable {
    inner: pathslice_core::MultiplierTable,
}

#[pymethods]
impl PyTable {
    #[new]
    #[pyo3(signature = (manifold, cutoff, t, e_cap, oscillation_budget=16, tolerance=1e-12))]
    fn new(manifold: &PyManifold, cutoff: &PyCutoff, t: f64, e_cap: f64, oscillation_budget: u32, tolerance: f64) -> PyResult<Self> {
        let spectrum = Spectrum::new(manifold.inner.clone(), e_cap);
        let inner = pathslice_core::MultiplierTable::build(&spectrum, &cutoff.inner, t, e_cap, &settings(oscillation_budget, tolerance))
            .map_err(to_py)?;
        Ok(PyTable { inner })
    }

    /// `(eigenvalue, λ)` per level.
    fn values(&self) -> Vec<(f64, Complex64)> {
        self.inner.entries.iter().map(|e| (e.eigenvalue, e.value)).collect()
    }

    fn apply(&self, state: &PyState) -> PyState {
        PyState { inner: self.inner.apply(&state.inner) }
    }

    fn apply_power(&self, state: &PyState, n: u32) -> PyState {
        PyState { inner: self.inner.apply_power(&state.inner, n) }
    }

    fn operator_norm(&self) -> f64 {
        self.inner.operator_norm()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }
}

#[pyfunction]
fn action(t: f64, r: f64) -> PyResult<f64> {
    kernel::action(t, r).map_err(to_py)
}

#[pyfunction]
fn van_vleck_sqrt(manifold: &PyManifold, t: f64, r: f64) -> PyResult<f64> {
    kernel::van_vleck_sqrt(&manifold.inner, t, r).map_err(to_py)
}

#[pyfunction]
fn kernel_value(manifold: &PyManifold, cutoff: &PyCutoff, t: f64, r: f64) -> PyResult<Complex64> {
    kernel::kernel_value(&manifold.inner, &cutoff.inner, t, r).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (manifold, t, h=1e-3))]
fn curvature_limit_check(manifold: &PyManifold, t: f64, h: f64) -> PyResult<f64> {
    kernel::curvature_limit_check(&manifold.inner, t, h).map_err(to_py)
}

/// `U(t/n)^n ρ(E) f`; `energy` is `fixed:E`, `rho-n` or `rho-n-power[:ε]` (default: the state's `E_max`).
#[pyfunction]
#[pyo3(signature = (state, cutoff, t, n, energy=None))]
fn sliced_apply(state: &PyState, cutoff: &PyCutoff, t: f64, n: u32, energy: Option<&str>) -> PyResult<PyState> {
    let policy = match energy {
        Some(s) => s.parse::<ProjectorPolicy>().map_err(to_py)?,
        None => ProjectorPolicy::FixedE { energy: state.inner.spectrum().e_max() },
    };
    let plan = SlicingPlan::new(t, n, policy, state.inner.manifold().dimension()).map_err(to_py)?;
    let out = propagator::sliced_apply(&MultiplierCache::new(), &cutoff.inner, &plan, &state.inner, &QuadratureSettings::default())
        .map_err(to_py)?;
    Ok(PyState { inner: out })
}

#[pyfunction]
#[pyo3(signature = (state, cutoff, t, generator="corrected"))]
fn single_step_error(state: &PyState, cutoff: &PyCutoff, t: f64, generator: &str) -> PyResult<f64> {
    propagator::single_step_error(&cutoff.inner, t, &state.inner, parse_generator(generator)?, &QuadratureSettings::default())
        .map_err(to_py)
}

/// `(slope, intercept, residual)` of a log-log least-squares fit.
#[pyfunction]
fn fit_rate(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = experiment::fit_rate(&points).map_err(to_py)?;
    Ok((f.slope, f.intercept, f.residual))
}

/// Runs a study from its JSON config and returns the JSON report.
#[pyfunction]
fn run_experiment(config_json: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    experiment::run(&config).and_then(|r| r.to_json()).map_err(to_py)
}

/// Runs one acceptance criterion; returns `(passed, summary line)`.
#[pyfunction]
fn verify(criterion: u8) -> PyResult<(bool, String)> {
    let outcome = acceptance::run_criterion(criterion)
        .ok_or_else(|| PyValueError::new_err(format!("unknown criterion {criterion}")))?;
    Ok((outcome.passed, outcome.to_string()))
}

#[pymodule]
fn pathslice(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyManifold>()?;
    m.add_class::<PyCutoff>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyTable>()?;
    m.add_function(wrap_pyfunction!(action, m)?)?;
    m.add_function(wrap_pyfunction!(van_vleck_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_value, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_limit_check, m)?)?;
    m.add_function(wrap_pyfunction!(sliced_apply, m)?)?;
    m.add_function(wrap_pyfunction!(single_step_error, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
