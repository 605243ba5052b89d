//! BKS-gap benchmark over a grid of workloads, solvers and time budgets.

use std::io::{Read, Write};
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    bks_gap, build_q, compute_bks, generate_mis_workload, simulated_annealing, tabu_search,
    LongTabuConfig, SaSchedule, StopRule, TabuParams,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Sa,
    Tabu,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Sa => "sa",
            SolverKind::Tabu => "tabu",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sa" => Ok(SolverKind::Sa),
            "tabu" => Ok(SolverKind::Tabu),
            other => Err(Error::InvalidParameter(format!(
                "unknown solver `{other}` (expected sa or tabu)"
            ))),
        }
    }
}

/// One row of the BKS file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BksEntry {
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub bks_cost: i64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BksTable {
    pub entries: Vec<BksEntry>,
}

impl BksTable {
    pub fn get(&self, n: usize, density: f64, seed: u64) -> Option<&BksEntry> {
        self.entries
            .iter()
            .find(|e| e.n == n && e.density == density && e.seed == seed)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let entries = rdr
            .deserialize()
            .enumerate()
            .map(|(i, rec)| rec.map_err(|e| Error::parse(format!("BKS line {}", i + 2), e)))
            .collect::<Result<Vec<BksEntry>>>()?;
        Ok(Self { entries })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Self::read_csv(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        self.write_csv(f)
    }
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::parse("csv", e))?;
    }
    wtr.flush().map_err(|e| Error::parse("csv", e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuboBenchConfig {
    pub sizes: Vec<usize>,
    pub densities: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Per-run wall-clock budgets in seconds; also the cell label in
    /// iteration mode.
    pub timeouts: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    /// Replaces the wall clock with a fixed iteration budget (deterministic).
    pub iteration_budget: Option<u64>,
    pub sa: SaSchedule,
    pub tabu: TabuParams,
    pub long_tabu: LongTabuConfig,
}

impl Default for QuboBenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![10, 25],
            densities: super::REFERENCE_DENSITIES.to_vec(),
            seeds: (0..5).collect(),
            timeouts: vec![0.1],
            solvers: vec![SolverKind::Sa, SolverKind::Tabu],
            iteration_budget: None,
            sa: SaSchedule::default(),
            tabu: TabuParams::default(),
            long_tabu: LongTabuConfig::default(),
        }
    }
}

impl QuboBenchConfig {
    fn workload_keys(&self) -> Vec<(usize, f64, u64)> {
        let mut keys = Vec::new();
        for &n in &self.sizes {
            for &d in &self.densities {
                for &s in &self.seeds {
                    keys.push((n, d, s));
                }
            }
        }
        keys
    }
}

/// Computes BKS entries for every workload of the grid.
pub fn compute_bks_table(cfg: &QuboBenchConfig) -> Result<BksTable> {
    let entries = cfg
        .workload_keys()
        .par_iter()
        .map(|&(n, density, seed)| {
            let w = generate_mis_workload(n, density, seed)?;
            let bks = compute_bks(&build_q(&w), &cfg.long_tabu)?;
            Ok(BksEntry {
                n,
                density,
                seed,
                bks_cost: bks.cost,
                method: bks.method.as_str().into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BksTable { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub solver: String,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub timeout_s: f64,
    pub best_cost: i64,
    pub bks_cost: i64,
    pub bks_gap: f64,
    pub iterations: u64,
}

/// One solver run per (workload, timeout, solver) cell. The solver seed is
/// the workload seed. Rows are sorted by solver, n, density, seed, timeout.
pub fn run_qubo_benchmark(cfg: &QuboBenchConfig, bks: &BksTable) -> Result<Vec<ReportRow>> {
    for &t in &cfg.timeouts {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("timeout must be positive, got {t}")));
        }
    }
    let mut cells = Vec::new();
    for (n, density, seed) in cfg.workload_keys() {
        let target = bks.get(n, density, seed).ok_or_else(|| {
            Error::InvalidInput(format!(
                "no BKS entry for n={n} density={density} seed={seed}"
            ))
        })?;
        for &timeout in &cfg.timeouts {
            for &solver in &cfg.solvers {
                cells.push((solver, n, density, seed, timeout, target.bks_cost));
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|&(solver, n, density, seed, timeout, bks_cost)| {
            let q = build_q(&generate_mis_workload(n, density, seed)?);
            let stop = match cfg.iteration_budget {
                Some(iters) => StopRule::iterations(iters),
                None => StopRule::deadline(Duration::from_secs_f64(timeout)),
            };
            let run = match solver {
                SolverKind::Sa => simulated_annealing(&q, seed, &cfg.sa, stop)?,
                SolverKind::Tabu => tabu_search(&q, seed, &cfg.tabu, stop)?,
            };
            Ok(ReportRow {
                solver: solver.as_str().into(),
                n,
                density,
                seed,
                timeout_s: timeout,
                best_cost: run.best_cost,
                bks_cost,
                bks_gap: bks_gap(run.best_cost, bks_cost)?,
                iterations: run.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.solver
            .cmp(&b.solver)
            .then(a.n.cmp(&b.n))
            .then(a.density.total_cmp(&b.density))
            .then(a.seed.cmp(&b.seed))
            .then(a.timeout_s.total_cmp(&b.timeout_s))
    });
    Ok(rows)
}

pub fn write_report_csv<W: Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    if rows.is_empty() {
        let mut w = w;
        return writeln!(
            w,
            "solver,n,density,seed,timeout_s,best_cost,bks_cost,bks_gap,iterations"
        )
        .map_err(|e| Error::parse("csv", e));
    }
    write_rows(w, rows)
}

pub fn read_report_csv<R: Read>(r: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| Error::parse(format!("report line {}", i + 2), e)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub solver: String,
    pub n: usize,
    pub density: f64,
    pub timeout_s: f64,
    pub runs: usize,
    pub mean_gap: f64,
    pub median_gap: f64,
    pub p90_gap: f64,
    /// Fraction of runs that matched or beat the BKS.
    pub solved_fraction: f64,
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Aggregates runs over seeds for each (solver, n, density, timeout) cell.
pub fn summarize(rows: &[ReportRow]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    let mut i = 0;
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        a.solver
            .cmp(&b.solver)
            .then(a.n.cmp(&b.n))
            .then(a.density.total_cmp(&b.density))
            .then(a.timeout_s.total_cmp(&b.timeout_s))
    });
    while i < sorted.len() {
        let r = &sorted[i];
        let j = sorted[i..]
            .iter()
            .position(|o| {
                o.solver != r.solver || o.n != r.n || o.density != r.density || o.timeout_s != r.timeout_s
            })
            .map_or(sorted.len(), |k| i + k);
        let mut gaps: Vec<f64> = sorted[i..j].iter().map(|o| o.bks_gap).collect();
        gaps.sort_by(f64::total_cmp);
        out.push(CellSummary {
            solver: r.solver.clone(),
            n: r.n,
            density: r.density,
            timeout_s: r.timeout_s,
            runs: gaps.len(),
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
            median_gap: percentile(&gaps, 50.0),
            p90_gap: percentile(&gaps, 90.0),
            solved_fraction: gaps.iter().filter(|g| **g <= 0.0).count() as f64 / gaps.len() as f64,
        });
        i = j;
    }
    out
}
