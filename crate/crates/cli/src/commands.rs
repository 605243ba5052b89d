use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nmbench_core::fscil::{
    load_embeddings, run_fscil, synthetic_clusters, FscilMode, FscilReport, IdentityExtractor,
    Sample, SessionPlan, SyntheticConfig,
};
use nmbench_core::mackeyglass::{
    integrate_mg_with_burn_in, make_instances, ChaoticReport, Forecaster, MgParams, MgSeries,
    SeriesFormat, INSTANCE_LYAPUNOV, SAMPLES_PER_LYAPUNOV,
};
use nmbench_core::metrics::{execution_rate, CorrectnessName, MetricsReport};
use nmbench_core::model::load_model;
use nmbench_core::qubo::{
    compute_bks_table, generate_mis_workload, run_qubo_benchmark, summarize, write_report_csv,
    BksTable, QuboBenchConfig, SolverKind,
};
use nmbench_core::reservoir::{grid_search, run_esn_benchmark, EsnConfig, EsnForecaster, EsnGrid, GridPoint};
use nmbench_core::rng::PRNG_ID;
use nmbench_core::{build_model, Error, Result, Tensor};
use serde::{Deserialize, Serialize};

use crate::{
    AnalyzeArgs, BksArgs, ChaoticArgs, FscilArgs, FscilModeArg, MgGenArgs, QuboArgs, QuboGenArgs,
    ReportFormat, SeriesFormatArg,
};

pub const DATA_DIR_ENV: &str = "NEUROBENCH_DATA_DIR";
const CUSTOM_TAU_X0: f64 = 1.2;
const DEFAULT_SERIES_LYAPUNOV: usize = 50;

#[derive(Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config: serde_json::Value,
    pub prng: String,
}

impl Provenance {
    fn new<T: Serialize>(command: &str, args: &T) -> Self {
        let mut config = serde_json::to_value(args).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut config {
            map.insert("command".into(), command.into());
        }
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            prng: PRNG_ID.into(),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

/// Pretty JSON to `out`, or to stdout when no path is given.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("report is not serializable: {e}")))?;
    match out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| io_err(path, e))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// `a..b` (inclusive) or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidParameter(format!("cannot parse seeds '{s}' (use a..b or a,b,c)"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn mg_params(tau: f64, lyapunov_time: Option<f64>, x0: Option<f64>, dt_int: f64) -> Result<MgParams> {
    let mut p = match (MgParams::from_table(tau), lyapunov_time) {
        (Some(p), l) => MgParams {
            lyapunov_time: l.unwrap_or(p.lyapunov_time),
            ..p
        },
        (None, Some(l)) => MgParams {
            n: 10.0,
            beta: 0.2,
            gamma: 0.1,
            tau,
            x0: CUSTOM_TAU_X0,
            dt_int,
            lyapunov_time: l,
        },
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "tau = {tau} is not a tabulated series; pass --lyapunov-time"
            )))
        }
    };
    if let Some(x0) = x0 {
        p.x0 = x0;
    }
    p.dt_int = dt_int;
    p.validate()?;
    Ok(p)
}

fn series_file_name(tau: f64, format: SeriesFormat) -> String {
    let ext = match format {
        SeriesFormat::Csv => "csv",
        SeriesFormat::Binary => "bin",
    };
    format!("mg_tau{tau}.{ext}")
}

pub fn mg_gen(a: &MgGenArgs) -> Result<()> {
    let params = mg_params(a.tau, a.lyapunov_time, a.x0, a.dt_int)?;
    if a.duration == 0 {
        return Err(Error::InvalidParameter("--duration must be positive".into()));
    }
    let format = match a.format {
        SeriesFormatArg::Csv => SeriesFormat::Csv,
        SeriesFormatArg::Binary => SeriesFormat::Binary,
    };
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| data_dir().join(series_file_name(a.tau, format)));
    let series = integrate_mg_with_burn_in(&params, a.duration, a.burn_in)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    series.save(&out, format)?;
    eprintln!("wrote {} samples to {}", series.values.len(), out.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChaoticOutput {
    pub provenance: Provenance,
    pub model: String,
    pub series: SeriesInfo,
    pub config: EsnConfig,
    pub offset_lyapunov: f64,
    #[serde(flatten)]
    pub report: ChaoticReport,
    pub diverged_instances: usize,
    /// Metrics of the instance-0 model, traced over its training half.
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<Vec<GridPoint>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub params: MgParams,
    pub burn_in_lyapunov: f64,
    pub samples: usize,
    pub source: String,
}

fn chaotic_series(a: &ChaoticArgs, needed: usize) -> Result<(MgSeries, String)> {
    if let Some(path) = &a.series {
        return Ok((MgSeries::load(path)?, path.display().to_string()));
    }
    let params = mg_params(a.tau, None, None, nmbench_core::mackeyglass::DEFAULT_DT_INT)?;
    let duration = DEFAULT_SERIES_LYAPUNOV.max(needed.div_ceil(SAMPLES_PER_LYAPUNOV));
    // the cache directory is only consulted when explicitly configured
    if std::env::var_os(DATA_DIR_ENV).is_some() {
        let path = data_dir().join(series_file_name(a.tau, SeriesFormat::Csv));
        if path.exists() {
            let cached = MgSeries::load(&path)?;
            if cached.params == params && cached.values.len() >= needed {
                return Ok((cached, path.display().to_string()));
            }
        }
        let series = integrate_mg_with_burn_in(&params, duration, nmbench_core::mackeyglass::BURN_IN_LYAPUNOV)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        series.save(&path, SeriesFormat::Csv)?;
        return Ok((series, path.display().to_string()));
    }
    let series = integrate_mg_with_burn_in(&params, duration, nmbench_core::mackeyglass::BURN_IN_LYAPUNOV)?;
    Ok((series, "generated".into()))
}

pub fn bench_chaotic(a: &ChaoticArgs) -> Result<()> {
    if a.instances == 0 {
        return Err(Error::InvalidParameter("--instances must be positive".into()));
    }
    let base = EsnConfig {
        reservoir_size: a.reservoir_size,
        connection_prob: a.connection_prob,
        alpha: a.alpha,
        gamma: a.gamma,
        spectral_radius: Some(a.spectral_radius),
        beta_in: a.beta_in,
        lambda: a.lambda,
        washout: a.washout,
        seed: a.seed,
    };
    base.validate()?;
    let last_start = nmbench_core::mackeyglass::instance_start(a.instances - 1, a.offset);
    let needed = last_start + INSTANCE_LYAPUNOV * SAMPLES_PER_LYAPUNOV + 1;
    let (series, source) = chaotic_series(a, needed)?;
    let instances = make_instances(&series, a.instances, a.offset)?;

    let (config, grid) = if a.grid_search {
        let points = grid_search(&base, &EsnGrid::default(), &series, &instances)?;
        (points[0].config.clone(), Some(points))
    } else {
        (base, None)
    };
    let report = run_esn_benchmark(&config, &series, &instances)?;

    let mut esn = EsnForecaster::new(&EsnConfig {
        seed: nmbench_core::reservoir::instance_seed(config.seed, 0),
        ..config.clone()
    })?;
    esn.fit(&instances[0].train)?;
    let mut graph = build_model(&esn.model.to_model_description()?)?;
    let sample: Vec<Tensor> = instances[0].train[..instances[0].train.len() - 1]
        .iter()
        .map(|&v| Tensor::vector(vec![1.0, v]))
        .collect();
    let (_, trace) = graph.run_workload(&[sample])?;
    let mut metrics = MetricsReport::with_workload(&graph, &trace)?;
    metrics.correctness_name = Some(CorrectnessName::Smape);
    metrics.correctness_value = Some(report.mean_smape);

    let out = ChaoticOutput {
        provenance: Provenance::new("bench chaotic", a),
        model: "esn".into(),
        series: SeriesInfo {
            params: series.params,
            burn_in_lyapunov: series.burn_in_lyapunov,
            samples: series.values.len(),
            source,
        },
        config,
        offset_lyapunov: a.offset,
        diverged_instances: report.instances.iter().filter(|r| r.diverged).count(),
        report,
        metrics,
        grid,
    };
    emit_json(&out, a.out.as_deref())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FscilOutput {
    pub provenance: Provenance,
    pub plan: SessionPlan,
    pub embedding_dim: usize,
    pub timesteps: Option<usize>,
    pub reports: Vec<FscilReport>,
    pub mean_accuracy: Vec<f64>,
}

pub fn bench_fscil(a: &FscilArgs) -> Result<()> {
    if a.temporal == Some(0) {
        return Err(Error::InvalidParameter("--temporal must be positive".into()));
    }
    let (plan, train, test): (SessionPlan, Vec<Sample>, Vec<Sample>) = match (&a.train, &a.test, &a.plan) {
        (Some(tr), Some(te), Some(pl)) => (SessionPlan::load(pl)?, load_embeddings(tr)?, load_embeddings(te)?),
        _ => {
            let plan = SessionPlan::contiguous(a.base, a.sessions, a.ways, a.shots);
            let data = synthetic_clusters(&SyntheticConfig {
                classes: a.base + a.sessions * a.ways,
                dim: a.dim,
                separation: a.separation,
                noise: a.noise,
                timesteps: a.temporal.unwrap_or(1),
                seed: a.seed,
                ..SyntheticConfig::default()
            })?;
            (plan, data.train, data.test)
        }
    };
    let dim = train
        .first()
        .and_then(|s| s.steps.first())
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidInput("no training samples".into()))?;
    let extractor = IdentityExtractor { dim };
    let modes: &[FscilMode] = match a.mode {
        FscilModeArg::Prototypical => &[FscilMode::Prototypical],
        FscilModeArg::Frozen => &[FscilMode::Frozen],
        FscilModeArg::Both => &[FscilMode::Prototypical, FscilMode::Frozen],
    };
    let reports = modes
        .iter()
        .map(|&m| run_fscil(&extractor, &plan, &train, &test, m, a.temporal))
        .collect::<Result<Vec<_>>>()?;
    let out = FscilOutput {
        provenance: Provenance::new("bench fscil", a),
        plan,
        embedding_dim: dim,
        timesteps: a.temporal,
        mean_accuracy: reports.iter().map(FscilReport::mean_all).collect(),
        reports,
    };
    emit_json(&out, a.out.as_deref())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QuboJsonOutput {
    pub provenance: Provenance,
    pub rows: Vec<nmbench_core::qubo::ReportRow>,
    pub summary: Vec<nmbench_core::qubo::CellSummary>,
}

fn qubo_config(n: &[usize], density: &[f64], seeds: &str) -> Result<QuboBenchConfig> {
    if n.is_empty() || density.is_empty() {
        return Err(Error::InvalidParameter("--n and --density need at least one value".into()));
    }
    Ok(QuboBenchConfig {
        sizes: n.to_vec(),
        densities: density.to_vec(),
        seeds: parse_seeds(seeds)?,
        ..QuboBenchConfig::default()
    })
}

pub fn bench_qubo(a: &QuboArgs) -> Result<()> {
    let mut cfg = qubo_config(&a.n, &a.density, &a.seeds)?;
    cfg.timeouts = a.timeout.clone();
    cfg.iteration_budget = a.iters_mode;
    cfg.solvers = a
        .solvers
        .iter()
        .map(|s| SolverKind::parse(s))
        .collect::<Result<_>>()?;
    if cfg.iteration_budget == Some(0) {
        return Err(Error::InvalidParameter("--iters-mode must be positive".into()));
    }
    // validate grid values before the (possibly long) BKS computation
    for &n in &cfg.sizes {
        for &d in &cfg.densities {
            generate_mis_workload(n, d, 0)?;
        }
    }
    for &t in &cfg.timeouts {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("timeout must be positive, got {t}")));
        }
    }
    let bks = match &a.bks {
        Some(path) => BksTable::load(path)?,
        None => compute_bks_table(&cfg)?,
    };
    let rows = run_qubo_benchmark(&cfg, &bks)?;
    let provenance = Provenance::new("bench qubo", a);
    match a.format {
        ReportFormat::Json => emit_json(
            &QuboJsonOutput {
                provenance,
                summary: summarize(&rows),
                rows,
            },
            a.out.as_deref(),
        ),
        ReportFormat::Csv => match &a.out {
            Some(path) => {
                let mut w = create(path)?;
                write_report_csv(&mut w, &rows)?;
                w.flush().map_err(|e| io_err(path, e))?;
                emit_json(&provenance, Some(&sidecar_path(path)))
            }
            None => write_report_csv(std::io::stdout().lock(), &rows),
        },
    }
}

/// `<out>.provenance.json` next to a CSV report.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadFile {
    samples: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnalyzeOutput {
    #[serde(flatten)]
    pub metrics: MetricsReport,
    pub provenance: Provenance,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let mut model = load_model(&a.model)?;
    let mut metrics = match &a.workload {
        None => MetricsReport::static_only(&model)?,
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let w: WorkloadFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
                field: "workload".into(),
                detail: e.to_string(),
            })?;
            let samples: Vec<Vec<Tensor>> = w
                .samples
                .into_iter()
                .map(|s| s.into_iter().map(Tensor::vector).collect())
                .collect();
            let (_, trace) = model.run_workload(&samples)?;
            MetricsReport::with_workload(&model, &trace)?
        }
    };
    if let Some(stride) = a.stride {
        metrics.execution_rate_hz = Some(execution_rate(stride)?);
    }
    emit_json(
        &AnalyzeOutput {
            metrics,
            provenance: Provenance::new("analyze", a),
        },
        a.out.as_deref(),
    )
}

pub fn qubo_gen(a: &QuboGenArgs) -> Result<()> {
    let w = generate_mis_workload(a.n, a.density, a.seed)?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| data_dir().join(format!("{}.json", w.id())));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    w.save(&out)?;
    eprintln!("wrote {} edges to {}", w.edges.len(), out.display());
    Ok(())
}

pub fn bks(a: &BksArgs) -> Result<()> {
    let cfg = qubo_config(&a.n, &a.density, &a.seeds)?;
    let table = compute_bks_table(&cfg)?;
    match &a.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            table.save(path)?;
            emit_json(&Provenance::new("bks", a), Some(&sidecar_path(path)))
        }
        None => table.write_csv(std::io::stdout().lock()),
    }
}
