//! Python bindings: `import oncopoisson`.

use oncopoisson::model_spec::{parse_rate_model, parse_success_model};
use oncopoisson::{calibration, cohort, expansion, incidence, process, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(_) => PyIOError::new_err(err.to_string()),
        Error::State(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Mutation rate μ(t).
#[pyclass(name = "RateModel", frozen)]
struct PyRateModel(oncopoisson::RateModel);

#[pymethods]
impl PyRateModel {
    /// Parses `constant:mu=..`, `powerlaw:mu0=..,gamma=..`,
    /// `piecewise:breaks=..,rates=..` or `tabulated:file=..`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        parse_rate_model(spec).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn constant(mu: f64) -> PyResult<Self> {
        oncopoisson::RateModel::constant(mu).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn power_law(mu0: f64, gamma: f64) -> PyResult<Self> {
        oncopoisson::RateModel::power_law(mu0, gamma).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn piecewise_constant(breakpoints: Vec<f64>, rates: Vec<f64>) -> PyResult<Self> {
        oncopoisson::RateModel::piecewise_constant(breakpoints, rates)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn tabulated(ages: Vec<f64>, rates: Vec<f64>) -> PyResult<Self> {
        oncopoisson::RateModel::tabulated(ages, rates).map(Self).map_err(to_py)
    }

    fn rate(&self, t: f64) -> PyResult<f64> {
        self.0.eval_rate(t).map_err(to_py)
    }

    fn cumulative(&self, t: f64) -> PyResult<f64> {
        self.0.cumulative_rate(t).map_err(to_py)
    }

    fn effective_cumulative(&self, success: &PySuccessModel, t: f64) -> PyResult<f64> {
        self.0.effective_cumulative_rate(&success.0, t).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("RateModel('{}')", self.0)
    }
}

/// Probability σ that a mutation expands into a cancer.
#[pyclass(name = "SuccessModel", frozen)]
struct PySuccessModel(oncopoisson::SuccessModel);

#[pymethods]
impl PySuccessModel {
    /// Parses `constant:sigma=..`, `moran:r=..,n=..` or `branching:p=..`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        parse_success_model(spec).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn constant(sigma: f64) -> PyResult<Self> {
        oncopoisson::SuccessModel::constant(sigma).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn moran(r: f64, n: u64) -> PyResult<Self> {
        oncopoisson::SuccessModel::moran(r, n).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn branching(p: f64) -> PyResult<Self> {
        oncopoisson::SuccessModel::branching(p).map(Self).map_err(to_py)
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.eval_success()
    }

    fn __repr__(&self) -> String {
        format!("SuccessModel('{}')", self.0)
    }
}

#[pyfunction]
fn moran_fixation(r: f64, n: u64) -> PyResult<f64> {
    let params = expansion::MoranParams::new(r, n).map_err(to_py)?;
    Ok(expansion::moran_fixation(&params))
}

#[pyfunction]
fn branching_survival(p: f64) -> PyResult<f64> {
    let params = expansion::BranchingParams::new(p).map_err(to_py)?;
    Ok(expansion::branching_survival(&params))
}

#[pyfunction]
#[pyo3(signature = (p, tol = 1e-12))]
fn extinction_fixed_point(p: f64, tol: f64) -> PyResult<f64> {
    let params = expansion::BranchingParams::new(p).map_err(to_py)?;
    expansion::extinction_fixed_point(&params, tol).map_err(to_py)
}

#[pyfunction]
fn poisson_pmf(k: u64, mean: f64) -> PyResult<f64> {
    process::poisson_pmf(k, mean).map_err(to_py)
}

/// Event times on `(0, horizon]` for stream `(seed, index)`; with `success`
/// the events are also marked and `(times, flags)` is returned.
#[pyfunction]
#[pyo3(signature = (rate, horizon, seed, index = 0, success = None))]
fn sample_events(
    py: Python<'_>,
    rate: &PyRateModel,
    horizon: f64,
    seed: u64,
    index: u64,
    success: Option<&PySuccessModel>,
) -> PyResult<Py<PyAny>> {
    let stream = oncopoisson::RandomStream::new(seed, index);
    let traj = process::sample_nhpp(&rate.0, horizon, stream).map_err(to_py)?;
    match success {
        None => Ok(traj.mutation_times().to_vec().into_pyobject(py)?.into_any().unbind()),
        Some(s) => {
            let marked = process::mark_events(traj, &s.0, stream.lane(1)).map_err(to_py)?;
            let flags = marked.success_flags().unwrap_or_default().to_vec();
            Ok((marked.mutation_times().to_vec(), flags).into_pyobject(py)?.into_any().unbind())
        }
    }
}

fn pairs(curve: oncopoisson::IncidenceCurve) -> Vec<(f64, f64)> {
    curve.points().collect()
}

/// `[(age, I(age))]` with I = 1 − exp(−M), or ≈ M when `approx`.
#[pyfunction]
#[pyo3(signature = (rate, success, ages, approx = false))]
fn incidence_curve(
    rate: &PyRateModel,
    success: &PySuccessModel,
    ages: Vec<f64>,
    approx: bool,
) -> PyResult<Vec<(f64, f64)>> {
    let curve = if approx {
        incidence::incidence_approx(&rate.0, &success.0, &ages)
    } else {
        incidence::incidence_exact(&rate.0, &success.0, &ages)
    };
    curve.map(pairs).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rate, success, ages, fixation_delay = 0.0, detection_delay = 0.0))]
fn incidence_with_delay(
    rate: &PyRateModel,
    success: &PySuccessModel,
    ages: Vec<f64>,
    fixation_delay: f64,
    detection_delay: f64,
) -> PyResult<Vec<(f64, f64)>> {
    incidence::incidence_with_delay(&rate.0, &success.0, &ages, fixation_delay, detection_delay)
        .map(pairs)
        .map_err(to_py)
}

#[pyfunction]
fn power_law_mu0(c: f64, gamma: f64, sigma: f64) -> PyResult<f64> {
    calibration::power_law_mu0(c, gamma, sigma).map_err(to_py)
}

/// Log-log least squares fit I = c·t^γ. Returns a dict with `c`, `gamma`,
/// `r_squared`, `n_points`, `n_excluded` and, given `sigma`, `mu0`.
#[pyfunction]
#[pyo3(signature = (points, sigma = None))]
fn fit_power_law(py: Python<'_>, points: Vec<(f64, f64)>, sigma: Option<f64>) -> PyResult<Py<PyAny>> {
    let mut fit = calibration::fit_power_law(&points).map_err(to_py)?;
    if let Some(s) = sigma {
        fit = fit.with_sigma(s).map_err(to_py)?;
    }
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("c", fit.c)?;
    dict.set_item("gamma", fit.gamma)?;
    dict.set_item("r_squared", fit.r_squared)?;
    dict.set_item("n_points", fit.n_points)?;
    dict.set_item("n_excluded", fit.n_excluded)?;
    if let Some(mu0) = fit.mu0 {
        dict.set_item("mu0", mu0)?;
    }
    Ok(dict.into_any().unbind())
}

/// Outcome of a Monte Carlo cohort.
#[pyclass(name = "CohortResult", frozen)]
struct PyCohortResult(cohort::CohortResult);

#[pymethods]
impl PyCohortResult {
    #[getter]
    fn ages(&self) -> Vec<f64> {
        self.0.empirical_curve.ages().to_vec()
    }

    #[getter]
    fn empirical(&self) -> Vec<f64> {
        self.0.empirical_curve.values().to_vec()
    }

    #[getter]
    fn std_errors(&self) -> Vec<f64> {
        self.0.std_errors.clone()
    }

    #[getter]
    fn total_mutations(&self) -> u64 {
        self.0.total_mutations
    }

    #[getter]
    fn total_successes(&self) -> u64 {
        self.0.total_successes
    }

    fn analytic(&self) -> PyResult<Vec<f64>> {
        self.0.analytic_curve().map(|c| c.values().to_vec()).map_err(to_py)
    }

    /// `(max_abs_z, n_ages_gated, pass)` against the analytic curve.
    #[pyo3(signature = (tolerance_sigmas = 4.0))]
    fn validate(&self, tolerance_sigmas: f64) -> PyResult<(f64, usize, bool)> {
        let report = cohort::validate_against_analytic(&self.0, tolerance_sigmas).map_err(to_py)?;
        Ok((report.max_abs_z, report.n_ages_gated, report.pass))
    }
}

#[pyfunction]
#[pyo3(signature = (cohort_size, horizon, rate, success, seed, threads = None))]
fn simulate_cohort(
    py: Python<'_>,
    cohort_size: u64,
    horizon: f64,
    rate: &PyRateModel,
    success: &PySuccessModel,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<PyCohortResult> {
    let config = cohort::CohortConfig::new(cohort_size, horizon, rate.0.clone(), success.0.clone(), seed)
        .map_err(to_py)?;
    let result = py
        .detach(|| cohort::simulate_cohort_with_threads(&config, threads))
        .map_err(to_py)?;
    Ok(PyCohortResult(result))
}

#[pymodule]
#[pyo3(name = "oncopoisson")]
fn oncopoisson_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRateModel>()?;
    m.add_class::<PySuccessModel>()?;
    m.add_class::<PyCohortResult>()?;
    m.add_function(wrap_pyfunction!(moran_fixation, m)?)?;
    m.add_function(wrap_pyfunction!(branching_survival, m)?)?;
    m.add_function(wrap_pyfunction!(extinction_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(sample_events, m)?)?;
    m.add_function(wrap_pyfunction!(incidence_curve, m)?)?;
    m.add_function(wrap_pyfunction!(incidence_with_delay, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_mu0, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cohort, m)?)?;
    Ok(())
}
