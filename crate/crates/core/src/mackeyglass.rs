//! Mackey-Glass series generation and the chaotic forecasting protocol.
//!
//! The delay equation `dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t)`
//! is integrated with fixed-step RK4 from a constant history `x(t <= 0) = x0`.
//! Delayed values between grid points come from cubic Hermite interpolation
//! over the stored trajectory and its derivatives. A burn-in of
//! [`BURN_IN_LYAPUNOV`] Lyapunov times is discarded, after which the series
//! is sampled [`SAMPLES_PER_LYAPUNOV`] times per Lyapunov time.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::smape;

pub const SAMPLES_PER_LYAPUNOV: usize = 75;
pub const BURN_IN_LYAPUNOV: f64 = 10.0;
/// Length of one benchmark instance in Lyapunov times.
pub const INSTANCE_LYAPUNOV: usize = 20;
pub const DEFAULT_DT_INT: f64 = 0.1;
const BLOW_UP: f64 = 1e6;

/// `(tau, lyapunov_time, x0)` for the fourteen benchmark series.
pub const MG_TABLE: [(f64, f64, f64); 14] = [
    (17.0, 197.0, 0.7206597),
    (18.0, 138.0, 0.7744313),
    (19.0, 315.0, 0.7783468),
    (20.0, 131.0, 0.9225991),
    (21.0, 191.0, 0.9479431),
    (22.0, 119.0, 0.5455960),
    (23.0, 106.0, 0.8622247),
    (24.0, 97.0, 0.3259660),
    (25.0, 98.0, 0.8297825),
    (26.0, 104.0, 1.0033490),
    (27.0, 112.0, 0.6491406),
    (28.0, 119.0, 1.0957495),
    (29.0, 131.0, 0.9256179),
    (30.0, 139.0, 0.2713639),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgParams {
    pub n: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
    pub x0: f64,
    pub dt_int: f64,
    pub lyapunov_time: f64,
}

impl MgParams {
    /// Parameters of a tabulated series.
    pub fn from_table(tau: f64) -> Option<Self> {
        MG_TABLE
            .iter()
            .find(|(t, _, _)| *t == tau)
            .map(|&(tau, lyapunov_time, x0)| Self {
                n: 10.0,
                beta: 0.2,
                gamma: 0.1,
                tau,
                x0,
                dt_int: DEFAULT_DT_INT,
                lyapunov_time,
            })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if !(self.dt_int > 0.0) {
            return bad("dt_int must be positive");
        }
        if self.dt_int > self.tau {
            return bad("dt_int must not exceed tau");
        }
        if !(self.lyapunov_time > 0.0) {
            return bad("Lyapunov time must be positive");
        }
        if ![self.n, self.beta, self.gamma, self.x0].iter().all(|v| v.is_finite()) {
            return bad("parameters must be finite");
        }
        Ok(())
    }

    /// Sampling interval `L / 75` in time units.
    pub fn sample_interval(&self) -> f64 {
        self.lyapunov_time / SAMPLES_PER_LYAPUNOV as f64
    }

    /// Right-hand side of the delay equation.
    #[inline]
    pub fn rhs(&self, x: f64, x_delayed: f64) -> f64 {
        self.beta * x_delayed / (1.0 + x_delayed.powf(self.n)) - self.gamma * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgSeries {
    pub params: MgParams,
    pub burn_in_lyapunov: f64,
    pub total_lyapunov_times: usize,
    pub values: Vec<f64>,
}

impl MgSeries {
    pub fn sample_interval(&self) -> f64 {
        self.params.sample_interval()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = self.sample_interval();
        (0..self.values.len()).map(move |k| k as f64 * dt)
    }
}

#[inline]
fn hermite(x0: f64, f0: f64, x1: f64, f1: f64, theta: f64, h: f64) -> f64 {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    (2.0 * t3 - 3.0 * t2 + 1.0) * x0
        + (t3 - 2.0 * t2 + theta) * h * f0
        + (-2.0 * t3 + 3.0 * t2) * x1
        + (t3 - t2) * h * f1
}

/// Dense RK4 trajectory with Hermite interpolation between grid points.
struct Trajectory<'a> {
    p: &'a MgParams,
    h: f64,
    delay_steps: f64,
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl<'a> Trajectory<'a> {
    fn new(p: &'a MgParams, capacity: usize) -> Self {
        let mut traj = Self {
            p,
            h: p.dt_int,
            delay_steps: p.tau / p.dt_int,
            xs: Vec::with_capacity(capacity),
            fs: Vec::with_capacity(capacity),
        };
        traj.xs.push(p.x0);
        let f0 = p.rhs(p.x0, traj.delayed(-traj.delay_steps));
        traj.fs.push(f0);
        traj
    }

    /// Value at grid position `pos` (time / h); the history before 0 is constant.
    fn at(&self, pos: f64) -> f64 {
        if pos <= 0.0 {
            return self.p.x0;
        }
        let i = pos.floor() as usize;
        let last = self.xs.len() - 1;
        if i >= last {
            return self.xs[last];
        }
        let theta = pos - i as f64;
        hermite(self.xs[i], self.fs[i], self.xs[i + 1], self.fs[i + 1], theta, self.h)
    }

    fn delayed(&self, pos: f64) -> f64 {
        self.at(pos)
    }

    fn step(&mut self) -> Result<()> {
        let n = self.xs.len() - 1;
        let (h, p) = (self.h, self.p);
        let x = self.xs[n];
        let base = n as f64 - self.delay_steps;
        let d_half = self.delayed(base + 0.5);
        let d_full = self.delayed(base + 1.0);
        let k1 = self.fs[n];
        let k2 = p.rhs(x + 0.5 * h * k1, d_half);
        let k3 = p.rhs(x + 0.5 * h * k2, d_half);
        let k4 = p.rhs(x + h * k3, d_full);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() || next.abs() > BLOW_UP {
            return Err(Error::Numerical(format!(
                "Mackey-Glass integration diverged at step {}",
                n + 1
            )));
        }
        self.xs.push(next);
        self.fs.push(p.rhs(next, d_full));
        Ok(())
    }
}

/// Integrates and samples `duration_lyapunov` Lyapunov times after the
/// default burn-in.
pub fn integrate_mg(params: &MgParams, duration_lyapunov: usize) -> Result<MgSeries> {
    integrate_mg_with_burn_in(params, duration_lyapunov, BURN_IN_LYAPUNOV)
}

pub fn integrate_mg_with_burn_in(
    params: &MgParams,
    duration_lyapunov: usize,
    burn_in_lyapunov: f64,
) -> Result<MgSeries> {
    params.validate()?;
    if !(burn_in_lyapunov >= 0.0) {
        return Err(Error::InvalidParameter("burn-in must be non-negative".into()));
    }
    let l = params.lyapunov_time;
    let burn = burn_in_lyapunov * l;
    let samples = duration_lyapunov * SAMPLES_PER_LYAPUNOV + 1;
    let dt = params.sample_interval();
    let end = burn + (samples - 1) as f64 * dt;
    let steps = (end / params.dt_int).ceil() as usize + 1;

    let mut traj = Trajectory::new(params, steps + 1);
    for _ in 0..steps {
        traj.step()?;
    }
    let values = (0..samples)
        .map(|k| traj.at((burn + k as f64 * dt) / params.dt_int))
        .collect();
    Ok(MgSeries {
        params: *params,
        burn_in_lyapunov,
        total_lyapunov_times: duration_lyapunov,
        values,
    })
}

/// File layout of a cached series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Csv,
    Binary,
}

const BINARY_MAGIC: &[u8; 4] = b"MGS1";

#[derive(Serialize, Deserialize)]
struct SeriesHeader {
    params: MgParams,
    burn_in_lyapunov: f64,
    total_lyapunov_times: usize,
    samples_per_lyapunov: usize,
}

impl MgSeries {
    fn header(&self) -> SeriesHeader {
        SeriesHeader {
            params: self.params,
            burn_in_lyapunov: self.burn_in_lyapunov,
            total_lyapunov_times: self.total_lyapunov_times,
            samples_per_lyapunov: SAMPLES_PER_LYAPUNOV,
        }
    }

    /// CSV: `#`-prefixed `key=value` header line, then `t,x` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(w);
        let p = &self.params;
        writeln!(
            w,
            "# mackey_glass n={} beta={} gamma={} tau={} x0={} dt_int={} lyapunov_time={} \
             burn_in_lyapunov={} total_lyapunov_times={} samples_per_lyapunov={}",
            p.n,
            p.beta,
            p.gamma,
            p.tau,
            p.x0,
            p.dt_int,
            p.lyapunov_time,
            self.burn_in_lyapunov,
            self.total_lyapunov_times,
            SAMPLES_PER_LYAPUNOV
        )?;
        writeln!(w, "t,x")?;
        for (t, x) in self.times().zip(&self.values) {
            writeln!(w, "{t},{x}")?;
        }
        w.flush()
    }

    /// Binary: magic `MGS1`, little-endian u32 header length, JSON header,
    /// then `(t, x)` pairs as little-endian f64.
    pub fn write_binary<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(w);
        let header = serde_json::to_vec(&self.header()).expect("header serializes");
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for (t, x) in self.times().zip(&self.values) {
            w.write_all(&t.to_le_bytes())?;
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>, format: SeriesFormat) -> Result<()> {
        let file = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        match format {
            SeriesFormat::Csv => self.write_csv(file),
            SeriesFormat::Binary => self.write_binary(file),
        }
        .map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::read_binary(&bytes[..])
        } else {
            Self::read_csv(&bytes[..])
        }
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        let mut len = [0u8; 4];
        let io = |e: std::io::Error| Error::parse("series", e);
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::parse("series", "bad magic"));
        }
        r.read_exact(&mut len).map_err(io)?;
        let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
        r.read_exact(&mut header).map_err(io)?;
        let header: SeriesHeader =
            serde_json::from_slice(&header).map_err(|e| Error::parse("series header", e))?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest).map_err(io)?;
        if rest.len() % 16 != 0 {
            return Err(Error::parse("series", "truncated sample data"));
        }
        let values = rest
            .chunks_exact(16)
            .map(|c| f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            params: header.params,
            burn_in_lyapunov: header.burn_in_lyapunov,
            total_lyapunov_times: header.total_lyapunov_times,
            values,
        })
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::parse("series header", "empty file"))?
            .map_err(|e| Error::parse("series header", e))?;
        let fields: std::collections::HashMap<&str, &str> = first
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|kv| kv.split_once('='))
            .collect();
        let get = |k: &str| -> Result<f64> {
            fields
                .get(k)
                .ok_or_else(|| Error::parse(k, "missing from series header"))?
                .parse::<f64>()
                .map_err(|e| Error::parse(k, e))
        };
        let params = MgParams {
            n: get("n")?,
            beta: get("beta")?,
            gamma: get("gamma")?,
            tau: get("tau")?,
            x0: get("x0")?,
            dt_int: get("dt_int")?,
            lyapunov_time: get("lyapunov_time")?,
        };
        let burn_in_lyapunov = get("burn_in_lyapunov")?;
        let total_lyapunov_times = get("total_lyapunov_times")? as usize;
        match lines.next() {
            Some(Ok(h)) if h.trim() == "t,x" => {}
            _ => return Err(Error::parse("series", "expected `t,x` column header")),
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::parse("series", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let x = line
                .split(',')
                .nth(1)
                .ok_or_else(|| Error::parse(format!("row {}", i + 1), "missing x column"))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("row {}", i + 1), e))?;
            values.push(x);
        }
        Ok(Self {
            params,
            burn_in_lyapunov,
            total_lyapunov_times,
            values,
        })
    }
}

/// One benchmark window: a teacher-forced training half and an
/// autoregressive evaluation half.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub index: usize,
    pub start: usize,
    /// `INSTANCE_LYAPUNOV/2 * 75 + 1` points; the last one seeds the forecast.
    pub train: Vec<f64>,
    /// The `INSTANCE_LYAPUNOV/2 * 75` points that follow.
    pub test: Vec<f64>,
}

/// Start index of instance `i` when shifting by `offset_lyapunov` each time:
/// `round(i * offset_lyapunov * 75)`, halves rounded away from zero.
pub fn instance_start(i: usize, offset_lyapunov: f64) -> usize {
    (i as f64 * offset_lyapunov * SAMPLES_PER_LYAPUNOV as f64).round() as usize
}

pub fn make_instances(
    series: &MgSeries,
    count: usize,
    offset_lyapunov: f64,
) -> Result<Vec<Instance>> {
    if !(offset_lyapunov >= 0.0) {
        return Err(Error::InvalidParameter("offset must be non-negative".into()));
    }
    let window = INSTANCE_LYAPUNOV * SAMPLES_PER_LYAPUNOV + 1;
    let half = window / 2;
    (0..count)
        .map(|i| {
            let start = instance_start(i, offset_lyapunov);
            if start + window > series.values.len() {
                return Err(Error::InvalidInput(format!(
                    "series of {} samples is too short for instance {i} (needs {})",
                    series.values.len(),
                    start + window
                )));
            }
            let w = &series.values[start..start + window];
            Ok(Instance {
                index: i,
                start,
                train: w[..=half].to_vec(),
                test: w[half + 1..].to_vec(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub values: Vec<f64>,
    /// A non-finite prediction occurred and was replaced before feedback.
    pub diverged: bool,
}

/// Sequence predictor under the chaotic benchmark protocol.
pub trait Forecaster {
    /// Teacher-forced training: inputs `train[..n-1]`, targets `train[1..]`.
    fn fit(&mut self, train: &[f64]) -> Result<()>;

    /// Autoregressive continuation from the last training value.
    fn forecast(&mut self, steps: usize) -> Result<Forecast>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub start: usize,
    pub smape: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaoticReport {
    pub tau: f64,
    pub instances: Vec<InstanceResult>,
    pub mean_smape: f64,
}

/// Trains a fresh forecaster per instance and scores its autoregressive
/// forecast with sMAPE. Instances run in parallel; results keep their order.
pub fn run_chaotic_benchmark<F>(
    factory: F,
    series: &MgSeries,
    instances: &[Instance],
) -> Result<ChaoticReport>
where
    F: Fn(usize) -> Result<Box<dyn Forecaster + Send>> + Sync,
{
    if instances.is_empty() {
        return Err(Error::InvalidInput("no benchmark instances".into()));
    }
    let results = instances
        .par_iter()
        .map(|inst| {
            let run = || -> Result<InstanceResult> {
                let mut model = factory(inst.index)?;
                model.fit(&inst.train)?;
                let forecast = model.forecast(inst.test.len())?;
                Ok(InstanceResult {
                    index: inst.index,
                    start: inst.start,
                    smape: smape(&forecast.values, &inst.test)?,
                    diverged: forecast.diverged,
                })
            };
            run().map_err(|e| Error::Instance {
                instance: inst.index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_smape = results.iter().map(|r| r.smape).sum::<f64>() / results.len() as f64;
    Ok(ChaoticReport {
        tau: series.params.tau,
        instances: results,
        mean_smape,
    })
}
