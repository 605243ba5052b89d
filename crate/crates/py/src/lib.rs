//! Python bindings: model metrics, Mackey-Glass series, the ESN forecasting
//! benchmark, prototype FSCIL and the MIS/QUBO solvers.

use nmbench_core::fscil::{run_fscil, synthetic_clusters, FscilMode, IdentityExtractor, SessionPlan, SyntheticConfig};
use nmbench_core::mackeyglass::{integrate_mg, make_instances, MgParams};
use nmbench_core::metrics::{self, MetricsReport};
use nmbench_core::model::parse_model_description;
use nmbench_core::qubo::{
    brute_force_bks, build_q, generate_mis_workload, qubo_cost, simulated_annealing, tabu_search,
    QMatrix, SaSchedule, SolverRun, StopRule, TabuParams,
};
use nmbench_core::reservoir::{run_esn_benchmark, EsnConfig};
use nmbench_core::{build_model, ErrorKind, ModelGraph, Tensor};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: nmbench_core::Error) -> PyErr {
    match e.kind() {
        ErrorKind::Numerical => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Metrics of one model; workload fields are `None` in static-only mode.
#[pyclass(name = "MetricsReport", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMetricsReport {
    footprint_bytes: u64,
    connection_sparsity: f64,
    activation_sparsity: Option<f64>,
    synops_dense: Option<f64>,
    synops_eff_mac: Option<f64>,
    synops_eff_ac: Option<f64>,
    execution_rate_hz: Option<f64>,
    json: String,
}

impl From<MetricsReport> for PyMetricsReport {
    fn from(r: MetricsReport) -> Self {
        Self {
            json: serde_json::to_string(&r).unwrap_or_default(),
            footprint_bytes: r.footprint_bytes,
            connection_sparsity: r.connection_sparsity,
            activation_sparsity: r.activation_sparsity,
            synops_dense: r.synops_dense,
            synops_eff_mac: r.synops_eff_mac,
            synops_eff_ac: r.synops_eff_ac,
            execution_rate_hz: r.execution_rate_hz,
        }
    }
}

#[pymethods]
impl PyMetricsReport {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        format!("MetricsReport({})", self.json)
    }
}

/// Layered model loaded from its JSON description.
#[pyclass(name = "Model")]
pub struct PyModel {
    graph: ModelGraph,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let desc = parse_model_description(text).map_err(to_py)?;
        Ok(Self {
            graph: build_model(&desc).map_err(to_py)?,
        })
    }

    #[getter]
    fn input_size(&self) -> usize {
        self.graph.input_size()
    }

    #[getter]
    fn output_size(&self) -> usize {
        self.graph.output_size()
    }

    fn footprint(&self) -> u64 {
        metrics::footprint(&self.graph)
    }

    fn connection_sparsity(&self) -> PyResult<f64> {
        metrics::connection_sparsity(&self.graph).map_err(to_py)
    }

    /// Runs `samples[sample][timestep][feature]` (state reset per sample) and
    /// returns the outputs with the same nesting.
    fn run(&mut self, samples: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let (out, _) = self.graph.run_workload(&tensors(samples)).map_err(to_py)?;
        Ok(out
            .into_iter()
            .map(|s| s.into_iter().map(Tensor::into_data).collect())
            .collect())
    }

    /// Static metrics, plus workload metrics when `samples` is given.
    #[pyo3(signature = (samples=None, stride=None))]
    fn analyze(&mut self, samples: Option<Vec<Vec<Vec<f64>>>>, stride: Option<f64>) -> PyResult<PyMetricsReport> {
        let mut report = match samples {
            None => MetricsReport::static_only(&self.graph),
            Some(s) => {
                let (_, trace) = self.graph.run_workload(&tensors(s)).map_err(to_py)?;
                MetricsReport::with_workload(&self.graph, &trace)
            }
        }
        .map_err(to_py)?;
        if let Some(s) = stride {
            report.execution_rate_hz = Some(metrics::execution_rate(s).map_err(to_py)?);
        }
        Ok(report.into())
    }
}

fn tensors(samples: Vec<Vec<Vec<f64>>>) -> Vec<Vec<Tensor>> {
    samples
        .into_iter()
        .map(|s| s.into_iter().map(Tensor::vector).collect())
        .collect()
}

#[pyfunction]
fn smape(predictions: Vec<f64>, targets: Vec<f64>) -> PyResult<f64> {
    metrics::smape(&predictions, &targets).map_err(to_py)
}

fn params_for(tau: f64, lyapunov_time: Option<f64>, x0: Option<f64>) -> PyResult<MgParams> {
    let mut p = match (MgParams::from_table(tau), lyapunov_time) {
        (Some(p), None) => p,
        (Some(p), Some(l)) => MgParams { lyapunov_time: l, ..p },
        (None, Some(l)) => MgParams {
            tau,
            x0: 1.2,
            lyapunov_time: l,
            ..MgParams::from_table(17.0).expect("tabulated")
        },
        (None, None) => {
            return Err(PyValueError::new_err(format!(
                "tau = {tau} is not tabulated; pass lyapunov_time"
            )))
        }
    };
    if let Some(x0) = x0 {
        p.x0 = x0;
    }
    Ok(p)
}

/// Samples of a Mackey-Glass series, 75 per Lyapunov time after burn-in.
#[pyfunction]
#[pyo3(signature = (tau, duration=50, lyapunov_time=None, x0=None))]
fn mackey_glass(tau: f64, duration: usize, lyapunov_time: Option<f64>, x0: Option<f64>) -> PyResult<Vec<f64>> {
    let p = params_for(tau, lyapunov_time, x0)?;
    Ok(integrate_mg(&p, duration).map_err(to_py)?.values)
}

/// ESN autoregressive forecasting benchmark.
/// Returns `(per_instance_smape, mean_smape)`.
#[pyfunction]
#[pyo3(signature = (
    tau, instances=30, offset=0.5, seed=0, reservoir_size=186, connection_prob=0.11,
    alpha=0.3, spectral_radius=0.9, beta_in=0.5, lambda_=1e-6, duration=50
))]
#[allow(clippy::too_many_arguments)]
fn chaotic_benchmark(
    py: Python<'_>,
    tau: f64,
    instances: usize,
    offset: f64,
    seed: u64,
    reservoir_size: usize,
    connection_prob: f64,
    alpha: f64,
    spectral_radius: f64,
    beta_in: f64,
    lambda_: f64,
    duration: usize,
) -> PyResult<(Vec<f64>, f64)> {
    let p = params_for(tau, None, None)?;
    let cfg = EsnConfig {
        reservoir_size,
        connection_prob,
        alpha,
        spectral_radius: Some(spectral_radius),
        beta_in,
        lambda: lambda_,
        seed,
        ..EsnConfig::default()
    };
    let report = py
        .detach(|| {
            let series = integrate_mg(&p, duration)?;
            let inst = make_instances(&series, instances, offset)?;
            run_esn_benchmark(&cfg, &series, &inst)
        })
        .map_err(to_py)?;
    Ok((report.instances.iter().map(|r| r.smape).collect(), report.mean_smape))
}

type SessionRow = (usize, usize, f64, f64, Option<f64>);

/// Prototype FSCIL on seeded Gaussian clusters. Returns one
/// `(session, classes, all, base, novel)` tuple per session.
#[pyfunction]
#[pyo3(signature = (base=20, sessions=5, ways=10, shots=5, dim=16, seed=0, frozen=false))]
fn fscil_synthetic(
    base: usize,
    sessions: usize,
    ways: usize,
    shots: usize,
    dim: usize,
    seed: u64,
    frozen: bool,
) -> PyResult<Vec<SessionRow>> {
    let data = synthetic_clusters(&SyntheticConfig {
        classes: base + sessions * ways,
        dim,
        seed,
        ..SyntheticConfig::default()
    })
    .map_err(to_py)?;
    let plan = SessionPlan::contiguous(base, sessions, ways, shots);
    let mode = if frozen { FscilMode::Frozen } else { FscilMode::Prototypical };
    let report = run_fscil(&IdentityExtractor { dim }, &plan, &data.train, &data.test, mode, None)
        .map_err(to_py)?;
    Ok(report
        .sessions
        .into_iter()
        .map(|s| (s.session, s.classes, s.all, s.base, s.novel))
        .collect())
}

/// Maximum independent set instance in QUBO form.
#[pyclass(name = "MisWorkload")]
pub struct PyMisWorkload {
    #[pyo3(get)]
    n: usize,
    #[pyo3(get)]
    edges: Vec<(usize, usize)>,
    q: QMatrix,
}

fn run_tuple(r: SolverRun) -> (i64, Vec<u8>, u64) {
    (r.best_cost, r.best_x, r.iterations)
}

#[pymethods]
impl PyMisWorkload {
    #[new]
    #[pyo3(signature = (n, density, seed=0))]
    fn new(n: usize, density: f64, seed: u64) -> PyResult<Self> {
        let w = generate_mis_workload(n, density, seed).map_err(to_py)?;
        Ok(Self {
            n,
            q: build_q(&w),
            edges: w.edges,
        })
    }

    fn cost(&self, x: Vec<u8>) -> PyResult<i64> {
        qubo_cost(&self.q, &x).map_err(to_py)
    }

    /// Exact optimum `(cost, x)` by enumeration (n <= 24).
    fn brute_force(&self) -> PyResult<(i64, Vec<u8>)> {
        let b = brute_force_bks(&self.q).map_err(to_py)?;
        Ok((b.cost, b.x))
    }

    /// `(best_cost, best_x, iterations)` after a fixed iteration budget.
    #[pyo3(signature = (seed=0, iterations=100_000))]
    fn simulated_annealing(&self, py: Python<'_>, seed: u64, iterations: u64) -> PyResult<(i64, Vec<u8>, u64)> {
        py.detach(|| simulated_annealing(&self.q, seed, &SaSchedule::default(), StopRule::iterations(iterations)))
            .map(run_tuple)
            .map_err(to_py)
    }

    #[pyo3(signature = (seed=0, iterations=100_000))]
    fn tabu_search(&self, py: Python<'_>, seed: u64, iterations: u64) -> PyResult<(i64, Vec<u8>, u64)> {
        py.detach(|| tabu_search(&self.q, seed, &TabuParams::default(), StopRule::iterations(iterations)))
            .map(run_tuple)
            .map_err(to_py)
    }
}

#[pymodule]
fn nmbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyMetricsReport>()?;
    m.add_class::<PyMisWorkload>()?;
    m.add_function(wrap_pyfunction!(smape, m)?)?;
    m.add_function(wrap_pyfunction!(mackey_glass, m)?)?;
    m.add_function(wrap_pyfunction!(chaotic_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(fscil_synthetic, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("PRNG", nmbench_core::rng::PRNG_ID)?;
    Ok(())
}
