//! Python bindings (`import rwrs_lab`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rwrs_core::bounds;
use rwrs_core::experiments::{self, Command, ExperimentConfig};
use rwrs_core::rwrs;
use rwrs_core::sampler::{self, ContinuumScenery, DiscreteScenery, SceneryLaw};
use rwrs_core::stats;
use rwrs_core::strassen::{self, DictionaryTarget};
use rwrs_core::theta::{self, Discretization};

fn py_err(e: rwrs_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn disc(dt: f64, h: f64) -> Discretization {
    Discretization { dt, h }
}

/// Piecewise-linear function, constant outside its knot range.
#[pyclass(name = "StrassenFunction", module = "rwrs_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStrassenFunction {
    inner: strassen::StrassenFunction,
}

#[pymethods]
impl PyStrassenFunction {
    #[new]
    fn new(knots: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: strassen::StrassenFunction::new(knots, values).map_err(py_err)?,
        })
    }

    /// One of `zero`, `tent_ramp`, `neg_tent_ramp`, `symmetric_hat`, `two_sided_ramp`.
    #[staticmethod]
    fn dictionary(name: &str) -> PyResult<Self> {
        let t: DictionaryTarget = name.parse().map_err(py_err)?;
        Ok(Self { inner: t.function() })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: strassen::StrassenFunction::from_csv(text).map_err(py_err)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.inner.knots().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.derivative(x)
    }

    fn energy(&self) -> f64 {
        strassen::energy(&self.inner)
    }

    #[pyo3(signature = (tol=1e-12))]
    fn is_in_kstar(&self, tol: f64) -> bool {
        strassen::is_in_kstar(&self.inner, tol)
    }

    fn __repr__(&self) -> String {
        format!(
            "StrassenFunction(knots={:?}, values={:?})",
            self.inner.knots(),
            self.inner.values()
        )
    }
}

/// Values of a standard Brownian path on `[0, horizon]` at spacing `dt`.
#[pyfunction]
fn simulate_bm(horizon: f64, dt: f64, seed: u64) -> PyResult<Vec<f64>> {
    Ok(sampler::simulate_bm(horizon, dt, seed)
        .map_err(py_err)?
        .values()
        .to_vec())
}

/// Positions `S_0 = 0, ..., S_n` of a simple random walk.
#[pyfunction]
fn simulate_srw(n: usize, seed: u64) -> Vec<i64> {
    sampler::simulate_srw(n, seed).positions().to_vec()
}

/// `K_n` along a walk with the discrete scenery of `scenery_seed`.
#[pyfunction]
#[pyo3(signature = (positions, scenery_seed, law="rademacher"))]
fn compute_k(positions: Vec<i64>, scenery_seed: u64, law: &str) -> PyResult<f64> {
    let law: SceneryLaw = law.parse().map_err(py_err)?;
    let walk = sampler::WalkPath::from_positions(positions).map_err(py_err)?;
    Ok(rwrs::compute_k(&walk, &DiscreteScenery::new(scenery_seed, law)))
}

#[pyfunction]
fn rescale(raw: f64, time: f64) -> PyResult<f64> {
    Ok(rwrs::rescale(raw, time).map_err(py_err)?.scaled)
}

#[pyfunction]
fn unscale(scaled: f64, time: f64) -> PyResult<f64> {
    rwrs::unscale(scaled, time).map_err(py_err)
}

#[pyfunction]
fn kappa(time: f64) -> PyResult<f64> {
    rwrs::kappa(time).map_err(py_err)
}

#[pyfunction]
fn s_of_f(f: &PyStrassenFunction) -> f64 {
    bounds::s_of_f(&f.inner)
}

/// `(occupation, stieltjes, ito)` estimates of `int f dL_1` on one path.
#[pyfunction]
#[pyo3(signature = (f, seed, dt=1e-4, h=0.02))]
fn theta_sample(f: &PyStrassenFunction, seed: u64, dt: f64, h: f64) -> PyResult<(f64, f64, f64)> {
    let (path, grid) = theta::unit_path(seed, disc(dt, h)).map_err(py_err)?;
    let s = theta::theta_sample_on(&f.inner, seed, &path, &grid);
    Ok((s.value_occupation, s.value_stieltjes, s.value_ito))
}

/// Sorted occupation samples of `int f dL_1` over independent paths.
#[pyfunction]
#[pyo3(signature = (f, n_paths, seed, dt=1e-4, h=0.02))]
fn theta_law(py: Python<'_>, f: &PyStrassenFunction, n_paths: usize, seed: u64, dt: f64, h: f64) -> PyResult<Vec<f64>> {
    let f = f.inner.clone();
    let law = py
        .detach(|| theta::theta_law(&f, n_paths, seed, disc(dt, h)))
        .map_err(py_err)?;
    Ok(law.samples().to_vec())
}

fn empirical(v: Vec<f64>) -> PyResult<stats::EmpiricalDistribution> {
    stats::EmpiricalDistribution::new(v).map_err(py_err)
}

#[pyfunction]
fn ks_distance(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    Ok(stats::ks_distance(&empirical(p)?, &empirical(q)?))
}

#[pyfunction]
fn wasserstein1(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    Ok(stats::wasserstein1(&empirical(p)?, &empirical(q)?))
}

/// Grid points `lambda` at which the rescaled continuum scenery is within
/// `epsilon` of the named target on the window.
#[pyfunction]
#[pyo3(signature = (scenery_seed, target, lambdas, epsilon=0.4, window=(-1.0, 1.0), step=1.0/128.0))]
fn find_matching_times(
    scenery_seed: u64,
    target: &str,
    lambdas: Vec<f64>,
    epsilon: f64,
    window: (f64, f64),
    step: f64,
) -> PyResult<Vec<f64>> {
    let t: DictionaryTarget = target.parse().map_err(py_err)?;
    experiments::quenched::find_matching_times(
        &ContinuumScenery::new(scenery_seed),
        &t.function(),
        window,
        epsilon,
        &lambdas,
        step,
    )
    .map_err(py_err)
}

/// Runs a lab command (e.g. `"verify-identities"`) and returns the JSON
/// summary. Files are written when `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (command, config_toml=None, out_dir=None))]
fn run_experiment(py: Python<'_>, command: &str, config_toml: Option<&str>, out_dir: Option<&str>) -> PyResult<String> {
    let command: Command = command.parse().map_err(py_err)?;
    let cfg = match config_toml {
        Some(text) => ExperimentConfig::from_toml_str(text).map_err(py_err)?,
        None => ExperimentConfig::default(),
    };
    let out_dir = out_dir.map(std::path::PathBuf::from);
    py.detach(move || {
        let mut out = experiments::run(command, &cfg)?;
        if let Some(dir) = out_dir {
            out.write(&dir)?;
        }
        Ok(serde_json::to_string(&out.summary)?)
    })
    .map_err(py_err)
}

#[pymodule]
fn rwrs_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStrassenFunction>()?;
    m.add_function(wrap_pyfunction!(simulate_bm, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_srw, m)?)?;
    m.add_function(wrap_pyfunction!(compute_k, m)?)?;
    m.add_function(wrap_pyfunction!(rescale, m)?)?;
    m.add_function(wrap_pyfunction!(unscale, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(s_of_f, m)?)?;
    m.add_function(wrap_pyfunction!(theta_sample, m)?)?;
    m.add_function(wrap_pyfunction!(theta_law, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(find_matching_times, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
