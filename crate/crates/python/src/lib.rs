use cdsp_core::simlab::{run_accuracy_experiment, ExperimentConfig, SimScenario, DESK_N_MC};
use cdsp_core::{BivariateSample, CdspConfig, CdspError};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(cdsp, DegenerateError, PyArithmeticError);
create_exception!(cdsp, NumericError, PyException);

fn to_py(e: CdspError) -> PyErr {
    match e {
        CdspError::Degenerate(_) | CdspError::RankDeficient(_) => DegenerateError::new_err(e.to_string()),
        CdspError::Numeric(_) | CdspError::Serialize(_) => NumericError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sample(x: Vec<f64>, y: Vec<f64>) -> PyResult<BivariateSample> {
    BivariateSample::new(x, y).map_err(to_py)
}

#[pyclass(frozen, skip_from_py_object, module = "cdsp")]
#[derive(Clone)]
struct DirectionalEstimates {
    #[pyo3(get)]
    direction: String,
    #[pyo3(get)]
    theta_hat: f64,
    #[pyo3(get)]
    sigma_hat: f64,
    #[pyo3(get)]
    c_hat_over_n: f64,
    #[pyo3(get)]
    index_hat: f64,
    #[pyo3(get)]
    statistic: f64,
    #[pyo3(get)]
    reject: bool,
}

impl From<&cdsp_core::DirectionalEstimates> for DirectionalEstimates {
    fn from(d: &cdsp_core::DirectionalEstimates) -> Self {
        DirectionalEstimates {
            direction: d.direction.label().to_string(),
            theta_hat: d.theta_hat,
            sigma_hat: d.sigma_hat,
            c_hat_over_n: d.c_hat_over_n,
            index_hat: d.index_hat,
            statistic: d.statistic,
            reject: d.decision.is_reject(),
        }
    }
}

#[pymethods]
impl DirectionalEstimates {
    fn __repr__(&self) -> String {
        format!(
            "DirectionalEstimates(direction={:?}, index_hat={:.4}, reject={})",
            self.direction, self.index_hat, self.reject
        )
    }
}

#[pyclass(frozen, module = "cdsp")]
struct CdspResult {
    inner: cdsp_core::CdspResult,
}

#[pymethods]
impl CdspResult {
    #[getter]
    fn direction(&self) -> &'static str {
        self.inner.direction.label()
    }
    #[getter]
    fn p_cdsp(&self) -> f64 {
        self.inner.p_cdsp
    }
    #[getter]
    fn favorable(&self) -> usize {
        self.inner.favorable
    }
    #[getter]
    fn support(&self) -> &'static str {
        self.inner.support().label()
    }
    /// Index of the Y -> X working model.
    #[getter]
    fn i_hat_x(&self) -> f64 {
        self.inner.estimates_ytox.index_hat
    }
    /// Index of the X -> Y working model.
    #[getter]
    fn i_hat_y(&self) -> f64 {
        self.inner.estimates_xtoy.index_hat
    }
    #[getter]
    fn xtoy(&self) -> DirectionalEstimates {
        (&self.inner.estimates_xtoy).into()
    }
    #[getter]
    fn ytox(&self) -> DirectionalEstimates {
        (&self.inner.estimates_ytox).into()
    }
    #[getter]
    fn replicate_indices(&self) -> Vec<(f64, f64)> {
        self.inner.replicate_indices.clone()
    }
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| NumericError::new_err(e.to_string()))
    }
    fn __repr__(&self) -> String {
        format!(
            "CdspResult(direction={:?}, p_cdsp={}, support={:?})",
            self.direction(),
            self.inner.p_cdsp,
            self.support()
        )
    }
}

#[pyclass(frozen, module = "cdsp")]
struct LingamResult {
    #[pyo3(get)]
    direction: String,
    #[pyo3(get)]
    dep_xtoy: f64,
    #[pyo3(get)]
    dep_ytox: f64,
    #[pyo3(get)]
    bootstrap_rate: f64,
    #[pyo3(get)]
    n_boot: usize,
}

#[pymethods]
impl LingamResult {
    fn __repr__(&self) -> String {
        format!(
            "LingamResult(direction={:?}, bootstrap_rate={})",
            self.direction, self.bootstrap_rate
        )
    }
}

/// Direction estimate with its bootstrap support probability.
#[pyfunction]
#[pyo3(signature = (x, y, alpha=0.05, boot_outer=100, boot_inner=100, seed=0))]
fn infer(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    alpha: f64,
    boot_outer: usize,
    boot_inner: usize,
    seed: u64,
) -> PyResult<CdspResult> {
    let s = sample(x, y)?;
    let cfg = CdspConfig {
        alpha,
        n_boot_inner: boot_inner,
        n_boot_outer: boot_outer,
    };
    let inner = py
        .detach(|| cdsp_core::cdsp_support_probability(&s, &cfg, seed))
        .map_err(to_py)?;
    Ok(CdspResult { inner })
}

/// Point estimate only: returns `(direction, xtoy, ytox)`.
#[pyfunction]
#[pyo3(signature = (x, y, alpha=0.05, n_boot=100, seed=0))]
fn point_estimate(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> PyResult<(String, DirectionalEstimates, DirectionalEstimates)> {
    let s = sample(x, y)?;
    let p = py
        .detach(|| cdsp_core::cdsp_point_estimate(&s, alpha, n_boot, seed))
        .map_err(to_py)?;
    Ok((p.direction.label().to_string(), (&p.xtoy).into(), (&p.ytox).into()))
}

#[pyfunction]
#[pyo3(signature = (x, y, n_boot=100, seed=0))]
fn lingam(py: Python<'_>, x: Vec<f64>, y: Vec<f64>, n_boot: usize, seed: u64) -> PyResult<LingamResult> {
    let s = sample(x, y)?;
    let r = py
        .detach(|| cdsp_core::lingam_bootstrap_rate(&s, n_boot, seed))
        .map_err(to_py)?;
    Ok(LingamResult {
        direction: r.direction.label().to_string(),
        dep_xtoy: r.dep_xtoy,
        dep_ytox: r.dep_ytox,
        bootstrap_rate: r.bootstrap_rate,
        n_boot: r.n_boot,
    })
}

/// Gaussian-kernel HSIC V-statistic with median-heuristic bandwidths.
#[pyfunction]
fn hsic(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    let bu = cdsp_core::median_heuristic_bandwidth(&u).map_err(to_py)?;
    let bv = cdsp_core::median_heuristic_bandwidth(&v).map_err(to_py)?;
    Ok(cdsp_core::hsic_gaussian(&u, &v, bu, bv).map_err(to_py)?.value)
}

#[pyfunction]
fn support_category(p: f64) -> PyResult<&'static str> {
    cdsp_core::support_category(p).map(|c| c.label()).map_err(to_py)
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    SimScenario::preset_names()
}

/// Runs a simulation scenario given by preset name or TOML text and
/// returns the JSON summary.
#[pyfunction]
#[pyo3(signature = (scenario, n=None, reps=None, n_mc=None, boot=100, alpha=0.05))]
fn simulate(
    py: Python<'_>,
    scenario: &str,
    n: Option<usize>,
    reps: Option<usize>,
    n_mc: Option<usize>,
    boot: usize,
    alpha: f64,
) -> PyResult<String> {
    let mut sc = match SimScenario::preset(scenario) {
        Some(sc) => sc,
        None => SimScenario::from_toml_str(scenario).map_err(to_py)?,
    };
    if let Some(n) = n {
        sc.n = n;
    }
    if let Some(m) = reps {
        sc.m_reps = m;
    }
    let cfg = ExperimentConfig {
        cdsp: CdspConfig {
            alpha,
            n_boot_inner: boot,
            n_boot_outer: boot,
        },
        n_mc: n_mc.unwrap_or(DESK_N_MC.max(10 * sc.n)),
        sigma_reps: None,
    };
    py.detach(|| run_accuracy_experiment(&sc, &cfg).and_then(|r| r.summary_json()))
        .map_err(to_py)
}

#[pymodule]
fn cdsp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add("NumericError", m.py().get_type::<NumericError>())?;
    m.add_class::<DirectionalEstimates>()?;
    m.add_class::<CdspResult>()?;
    m.add_class::<LingamResult>()?;
    m.add_function(wrap_pyfunction!(infer, m)?)?;
    m.add_function(wrap_pyfunction!(point_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(lingam, m)?)?;
    m.add_function(wrap_pyfunction!(hsic, m)?)?;
    m.add_function(wrap_pyfunction!(support_category, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
