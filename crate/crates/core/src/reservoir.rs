//! Echo state network baseline for the chaotic forecasting task.
//!
//! Readout rows are `[1; f(t); r(t)]`: the constant bias is part of the
//! harvested state, so `W_out` is `d x (1 + d + D)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mackeyglass::{
    run_chaotic_benchmark, Forecast, Forecaster, Instance, MgSeries, SAMPLES_PER_LYAPUNOV,
};
use crate::model::{LayerDescription, ModelDescription, NeuronSpec};
use crate::neurons::{esn_step, EsnParams};
use crate::rng::Rng;
use crate::tensor::Matrix;

pub const POWER_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnConfig {
    pub reservoir_size: usize,
    pub connection_prob: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Target spectral radius of `W` before `gamma` is applied; `None` keeps
    /// the raw normal weights.
    pub spectral_radius: Option<f64>,
    pub beta_in: f64,
    pub lambda: f64,
    pub washout: usize,
    pub seed: u64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        Self {
            reservoir_size: 186,
            connection_prob: 0.11,
            alpha: 0.3,
            gamma: 1.0,
            spectral_radius: Some(0.9),
            beta_in: 0.5,
            lambda: 1e-6,
            washout: SAMPLES_PER_LYAPUNOV,
            seed: 0,
        }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.reservoir_size == 0 {
            return bad("reservoir size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.connection_prob) {
            return bad(format!(
                "connection probability must lie in [0, 1], got {}",
                self.connection_prob
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("leak rate must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("ridge lambda must be >= 0, got {}", self.lambda));
        }
        if let Some(rho) = self.spectral_radius {
            if !(rho >= 0.0) || !rho.is_finite() {
                return bad(format!("spectral radius must be >= 0, got {rho}"));
            }
        }
        if !self.gamma.is_finite() || !self.beta_in.is_finite() {
            return bad("gamma and beta_in must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnModel {
    pub params: EsnParams,
    /// `d x (1 + d + D)`; absent until trained.
    pub readout: Option<Matrix>,
    pub seed: u64,
    pub state: Vec<f64>,
}

/// Random ESN with `W_in` uniform on `[-1, 1]` (bias column included) and
/// `W` entries present with probability `p_conn`, drawn standard normal.
///
/// Draw order: `W_in` row-major, then `W` row-major with one Bernoulli draw
/// per entry followed by a normal draw when the entry is present.
pub fn init_esn(d: usize, size: usize, p_conn: f64, seed: u64) -> Result<EsnModel> {
    if size == 0 {
        return Err(Error::InvalidParameter("reservoir size must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p_conn) {
        return Err(Error::InvalidParameter(format!(
            "connection probability must lie in [0, 1], got {p_conn}"
        )));
    }
    let mut rng = Rng::new(seed);
    let w_in_data = (0..size * (d + 1))
        .map(|_| rng.uniform_in(-1.0, 1.0))
        .collect();
    let w_data = (0..size * size)
        .map(|_| {
            if rng.bernoulli(p_conn) {
                rng.normal()
            } else {
                0.0
            }
        })
        .collect();
    Ok(EsnModel {
        params: EsnParams {
            alpha: 1.0,
            gamma: 1.0,
            beta_in: 1.0,
            w: Matrix::new(size, size, w_data)?,
            w_in: Matrix::new(size, d + 1, w_in_data)?,
        },
        readout: None,
        seed,
        state: vec![0.0; size],
    })
}

/// Spectral radius estimate from the mean log growth rate of a power
/// iteration, which also behaves for complex dominant eigenvalue pairs.
pub fn spectral_radius(w: &Matrix, iterations: usize) -> f64 {
    let n = w.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut log_growth = 0.0;
    let mut counted = 0usize;
    let skip = iterations / 2;
    for k in 0..iterations {
        let next = w.matvec_unchecked(&v);
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        if k >= skip {
            log_growth += norm.ln();
            counted += 1;
        }
        v = next.into_iter().map(|x| x / norm).collect();
    }
    (log_growth / counted.max(1) as f64).exp()
}

impl EsnModel {
    /// Initializes, normalizes and configures an untrained ESN.
    pub fn from_config(d: usize, cfg: &EsnConfig) -> Result<Self> {
        cfg.validate()?;
        let mut m = init_esn(d, cfg.reservoir_size, cfg.connection_prob, cfg.seed)?;
        if let Some(target) = cfg.spectral_radius {
            let rho = spectral_radius(&m.params.w, POWER_ITERATIONS);
            if rho > 0.0 {
                m.params.w.scale(target / rho);
            }
        }
        m.params.alpha = cfg.alpha;
        m.params.gamma = cfg.gamma;
        m.params.beta_in = cfg.beta_in;
        Ok(m)
    }

    pub fn reservoir_size(&self) -> usize {
        self.params.reservoir_size()
    }

    pub fn input_dim(&self) -> usize {
        self.params.input_dim()
    }

    pub fn feature_dim(&self) -> usize {
        1 + self.input_dim() + self.reservoir_size()
    }

    pub fn reset_state(&mut self) {
        self.state.iter_mut().for_each(|v| *v = 0.0);
    }

    fn features(&self, f: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.feature_dim());
        row.push(1.0);
        row.extend_from_slice(f);
        row.extend_from_slice(&self.state);
        row
    }

    /// Advances the reservoir on `f` and returns the feature row `[1; f; r]`.
    pub fn advance(&mut self, f: &[f64]) -> Result<Vec<f64>> {
        self.state = esn_step(&self.state, &self.params, f)?;
        Ok(self.features(f))
    }

    /// Drives the reservoir through `inputs` from its current state and
    /// stacks the feature rows after the first `washout` steps.
    pub fn harvest_states(&mut self, inputs: &[Vec<f64>], washout: usize) -> Result<Matrix> {
        let kept = inputs.len().saturating_sub(washout);
        let mut data = Vec::with_capacity(kept * self.feature_dim());
        for (t, f) in inputs.iter().enumerate() {
            let row = self.advance(f)?;
            if t >= washout {
                data.extend(row);
            }
        }
        Matrix::new(kept, self.feature_dim(), data)
    }

    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        let readout = self
            .readout
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("ESN readout is not trained".into()))?;
        readout.matvec(features)
    }

    /// Teacher-forced training on `inputs[t] -> targets[t]`, starting from a
    /// reset reservoir. The state is left warmed for forecasting.
    pub fn fit_sequence(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        washout: usize,
        lambda: f64,
    ) -> Result<()> {
        if inputs.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} inputs for {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if washout >= inputs.len() {
            return Err(Error::InvalidInput(format!(
                "washout {washout} leaves no training rows out of {}",
                inputs.len()
            )));
        }
        self.reset_state();
        let h = self.harvest_states(inputs, washout)?;
        let y = Matrix::from_rows(&targets[washout..])?;
        self.readout = Some(train_readout(&h, &y, lambda)?);
        Ok(())
    }

    /// One-step predictions with ground truth fed at every step, from a
    /// reset reservoir.
    pub fn teacher_forced(&mut self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.reset_state();
        inputs
            .iter()
            .map(|f| {
                let row = self.advance(f)?;
                self.predict(&row)
            })
            .collect()
    }

    /// Export to the layered model format, bias handled as a constant first
    /// input: `[1; f] -> W_in -> (+ gamma W r) -> tanh unit -> [1; f; r] -> W_out`.
    pub fn to_model_description(&self) -> Result<ModelDescription> {
        let readout = self
            .readout
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("ESN readout is not trained".into()))?;
        let size = self.reservoir_size();
        let d = self.input_dim();
        let p = &self.params;
        Ok(ModelDescription {
            precision_bytes: 8,
            input_size: None,
            layers: vec![
                LayerDescription::Linear {
                    name: "input_weights".into(),
                    in_dim: d + 1,
                    out_dim: size,
                    weights: p.w_in.data().iter().map(|w| p.beta_in * w).collect(),
                    bias: None,
                },
                LayerDescription::Recurrent {
                    name: "recurrent_weights".into(),
                    size,
                    source: "reservoir".into(),
                    source_size: None,
                    weights: p.w.data().iter().map(|w| p.gamma * w).collect(),
                },
                LayerDescription::Neuron {
                    name: "reservoir".into(),
                    size,
                    neuron: NeuronSpec::EsnTanh { alpha: p.alpha },
                },
                LayerDescription::Concat {
                    name: "features".into(),
                    source: "input".into(),
                },
                LayerDescription::Linear {
                    name: "readout".into(),
                    in_dim: readout.cols(),
                    out_dim: readout.rows(),
                    weights: readout.data().to_vec(),
                    bias: None,
                },
            ],
            buffers: Vec::new(),
        })
    }
}

/// Ridge regression `W_out = Y^T H (H^T H + lambda I)^-1`, solved as the
/// linear system `(H^T H + lambda I) W_out^T = H^T Y`.
pub fn train_readout(h: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    if h.rows() != y.rows() {
        return Err(Error::Dimension(format!(
            "state matrix has {} rows, targets have {}",
            h.rows(),
            y.rows()
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ridge lambda must be >= 0, got {lambda}"
        )));
    }
    let hm = DMatrix::from_row_slice(h.rows(), h.cols(), h.data());
    let ym = DMatrix::from_row_slice(y.rows(), y.cols(), y.data());
    let mut gram = hm.transpose() * &hm;
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let rhs = hm.transpose() * ym;
    let solution = match gram.clone().cholesky() {
        Some(c) => Some(c.solve(&rhs)),
        None => gram.lu().solve(&rhs),
    };
    let wt = solution
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| {
            Error::Singular(format!(
                "readout system is singular with lambda = {lambda}; use lambda > 0"
            ))
        })?;
    // wt is (features x outputs); W_out is its transpose, row-major.
    let w_out = wt.transpose();
    let data = (0..w_out.nrows())
        .flat_map(|i| (0..w_out.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| w_out[(i, j)])
        .collect();
    Matrix::new(w_out.nrows(), w_out.ncols(), data)
}

/// Feeds each prediction back as the next input, starting from `start`.
///
/// Non-finite predictions are reported as produced, flag the forecast as
/// diverged, and are replaced by zero before being fed back.
pub fn autoregressive_forecast(model: &mut EsnModel, start: &[f64], steps: usize) -> Result<Forecast> {
    if steps > 0 && model.readout.is_none() {
        return Err(Error::InvalidInput("ESN readout is not trained".into()));
    }
    let mut input = start.to_vec();
    let mut values = Vec::with_capacity(steps * start.len());
    let mut diverged = false;
    for _ in 0..steps {
        let row = model.advance(&input)?;
        let y = model.predict(&row)?;
        if y.len() != input.len() {
            return Err(Error::Dimension(format!(
                "readout emits {} values for a {}-dimensional input",
                y.len(),
                input.len()
            )));
        }
        values.extend_from_slice(&y);
        input = y
            .into_iter()
            .map(|v| {
                if v.is_finite() {
                    v
                } else {
                    diverged = true;
                    0.0
                }
            })
            .collect();
    }
    Ok(Forecast { values, diverged })
}

/// Scalar ESN under the chaotic benchmark protocol.
pub struct EsnForecaster {
    pub model: EsnModel,
    pub config: EsnConfig,
    last: Option<f64>,
}

impl EsnForecaster {
    pub fn new(config: &EsnConfig) -> Result<Self> {
        Ok(Self {
            model: EsnModel::from_config(1, config)?,
            config: config.clone(),
            last: None,
        })
    }
}

impl Forecaster for EsnForecaster {
    fn fit(&mut self, train: &[f64]) -> Result<()> {
        if train.len() < 2 {
            return Err(Error::InvalidInput("training half needs at least two points".into()));
        }
        let n = train.len() - 1;
        let inputs: Vec<Vec<f64>> = train[..n].iter().map(|&v| vec![v]).collect();
        let targets: Vec<Vec<f64>> = train[1..].iter().map(|&v| vec![v]).collect();
        self.model
            .fit_sequence(&inputs, &targets, self.config.washout, self.config.lambda)?;
        self.last = Some(train[n]);
        Ok(())
    }

    fn forecast(&mut self, steps: usize) -> Result<Forecast> {
        let start = self
            .last
            .ok_or_else(|| Error::InvalidInput("forecast before fit".into()))?;
        autoregressive_forecast(&mut self.model, &[start], steps)
    }
}

/// Seed used for instance `index` so each instance gets a fresh reservoir.
pub fn instance_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

/// Runs the chaotic benchmark with one ESN per instance.
pub fn run_esn_benchmark(
    config: &EsnConfig,
    series: &MgSeries,
    instances: &[Instance],
) -> Result<crate::mackeyglass::ChaoticReport> {
    config.validate()?;
    run_chaotic_benchmark(
        |i| {
            let cfg = EsnConfig {
                seed: instance_seed(config.seed, i),
                ..config.clone()
            };
            Ok(Box::new(EsnForecaster::new(&cfg)?) as Box<dyn Forecaster + Send>)
        },
        series,
        instances,
    )
}

/// Hyperparameter values tried by [`grid_search`]; the Cartesian product is
/// evaluated in the listed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnGrid {
    pub alpha: Vec<f64>,
    pub spectral_radius: Vec<f64>,
    pub beta_in: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl Default for EsnGrid {
    fn default() -> Self {
        Self {
            alpha: vec![0.3, 0.6, 1.0],
            spectral_radius: vec![0.9, 1.1],
            beta_in: vec![0.1, 0.5],
            lambda: vec![1e-8, 1e-6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub config: EsnConfig,
    pub mean_smape: f64,
}

/// Evaluates every grid point and returns them sorted by mean sMAPE (stable,
/// so ties keep grid order).
pub fn grid_search(
    base: &EsnConfig,
    grid: &EsnGrid,
    series: &MgSeries,
    instances: &[Instance],
) -> Result<Vec<GridPoint>> {
    let mut points = Vec::new();
    for &alpha in &grid.alpha {
        for &rho in &grid.spectral_radius {
            for &beta_in in &grid.beta_in {
                for &lambda in &grid.lambda {
                    let config = EsnConfig {
                        alpha,
                        spectral_radius: Some(rho),
                        beta_in,
                        lambda,
                        ..base.clone()
                    };
                    let report = run_esn_benchmark(&config, series, instances)?;
                    points.push(GridPoint {
                        config,
                        mean_smape: report.mean_smape,
                    });
                }
            }
        }
    }
    points.sort_by(|a, b| a.mean_smape.total_cmp(&b.mean_smape));
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::connection_sparsity;
    use crate::model::build_model;
    use crate::tensor::Tensor;

    #[test]
    fn init_is_deterministic() {
        let a = init_esn(1, 30, 0.2, 9).unwrap();
        let b = init_esn(1, 30, 0.2, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_esn(1, 30, 0.2, 10).unwrap());
        assert!(a.params.w_in.data().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn connection_probability_extremes() {
        let empty = init_esn(1, 20, 0.0, 1).unwrap();
        assert_eq!(empty.params.w.count_zeros(), 400);
        let full = init_esn(1, 20, 1.0, 1).unwrap();
        assert_eq!(full.params.w.count_zeros(), 0);
        assert!(init_esn(1, 0, 0.1, 1).is_err());
        assert!(init_esn(1, 5, 1.5, 1).is_err());
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        let diag = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, -2.0]]).unwrap();
        assert!((spectral_radius(&diag, 100) - 2.0).abs() < 1e-9);
        // rotation by 90 degrees scaled by 1.5: complex pair of modulus 1.5
        let rot = Matrix::from_rows(&[vec![0.0, -1.5], vec![1.5, 0.0]]).unwrap();
        assert!((spectral_radius(&rot, 100) - 1.5).abs() < 1e-9);
        assert_eq!(spectral_radius(&Matrix::zeros(3, 3), 100), 0.0);
    }

    #[test]
    fn normalized_reservoir_has_target_radius() {
        let m = EsnModel::from_config(1, &EsnConfig::default()).unwrap();
        let rho = spectral_radius(&m.params.w, 400);
        assert!((rho - 0.9).abs() < 0.05, "{rho}");
    }

    #[test]
    fn ridge_exact_fit() {
        let h = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![2.0], vec![4.0]]).unwrap();
        let w = train_readout(&h, &y, 0.0).unwrap();
        assert!((w.get(0, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ridge_limits() {
        let h = Matrix::from_rows(&[vec![1.0, 0.5], vec![2.0, -1.0], vec![0.3, 0.3]]).unwrap();
        let y = Matrix::from_rows(&[vec![1.0], vec![-1.0], vec![2.0]]).unwrap();
        let w = train_readout(&h, &y, 1e12).unwrap();
        assert!(w.data().iter().all(|v| v.abs() < 1e-10));
        let zero = Matrix::zeros(3, 1);
        for lambda in [0.0, 1e-3, 10.0] {
            let w = train_readout(&h, &zero, lambda).unwrap();
            assert!(w.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn singular_system_suggests_lambda() {
        let h = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let y = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let err = train_readout(&h, &y, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda > 0"), "{err}");
        assert!(train_readout(&h, &y, 1e-6).is_ok());
    }

    fn scalar_model(alpha: f64) -> EsnModel {
        EsnModel {
            params: EsnParams {
                alpha,
                gamma: 0.0,
                beta_in: 1.0,
                w: Matrix::zeros(1, 1),
                w_in: Matrix::new(1, 2, vec![0.5, 1.0]).unwrap(),
            },
            readout: None,
            seed: 0,
            state: vec![0.0],
        }
    }

    #[test]
    fn harvest_shapes_and_rows() {
        let mut m = scalar_model(1.0);
        let h = m.harvest_states(&[vec![0.0]], 0).unwrap();
        assert_eq!((h.rows(), h.cols()), (1, 3));
        assert_eq!(h.get(0, 0), 1.0);
        assert_eq!(h.get(0, 1), 0.0);
        assert!((h.get(0, 2) - 0.46211716).abs() < 1e-8);

        m.reset_state();
        let inputs = vec![vec![0.1]; 10];
        assert_eq!(m.harvest_states(&inputs, 4).unwrap().rows(), 6);

        // no bias, no input: only the constant column survives
        let mut z = scalar_model(1.0);
        z.params.w_in = Matrix::zeros(1, 2);
        let h = z.harvest_states(&vec![vec![0.0]; 3], 0).unwrap();
        for t in 0..3 {
            assert_eq!(h.row(t), &[1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn forecast_trivia() {
        let mut m = scalar_model(1.0);
        m.readout = Some(Matrix::zeros(1, 3));
        let f = autoregressive_forecast(&mut m, &[0.7], 0).unwrap();
        assert!(f.values.is_empty());
        let f = autoregressive_forecast(&mut m, &[0.7], 5).unwrap();
        assert_eq!(f.values, vec![0.0; 5]);
        assert!(!f.diverged);
    }

    #[test]
    fn trained_linear_recurrence() {
        // alpha = 0 freezes the reservoir at zero, so the readout must learn
        // f(t+1) = 0.5 f(t) from the input column alone.
        let mut m = scalar_model(0.0);
        let seq: Vec<f64> = (0..40).map(|t| 0.5f64.powi(t)).collect();
        let inputs: Vec<Vec<f64>> = seq[..39].iter().map(|&v| vec![v]).collect();
        let targets: Vec<Vec<f64>> = seq[1..].iter().map(|&v| vec![v]).collect();
        m.fit_sequence(&inputs, &targets, 0, 1e-14).unwrap();
        let f = autoregressive_forecast(&mut m, &[1.0], 10).unwrap();
        for (t, v) in f.values.iter().enumerate() {
            assert!((v - 0.5f64.powi(t as i32 + 1)).abs() < 1e-8);
        }
    }

    #[test]
    fn non_finite_prediction_flags_divergence() {
        let mut m = scalar_model(1.0);
        m.readout = Some(Matrix::new(1, 3, vec![0.0, 1e300, 0.0]).unwrap());
        let f = autoregressive_forecast(&mut m, &[1e300], 3).unwrap();
        assert!(f.diverged);
        assert!(f.values[0].is_infinite());
        assert_eq!(f.values[1], 0.0);
    }

    #[test]
    fn netcore_export_reproduces_reservoir() {
        let cfg = EsnConfig {
            reservoir_size: 12,
            connection_prob: 0.3,
            ..EsnConfig::default()
        };
        let mut esn = EsnModel::from_config(1, &cfg).unwrap();
        esn.readout = Some(Matrix::new(1, 14, (0..14).map(|i| i as f64 * 0.01).collect()).unwrap());
        let mut graph = build_model(&esn.to_model_description().unwrap()).unwrap();
        assert_eq!(graph.precision_bytes(), 8);
        let inputs: Vec<f64> = (0..8).map(|t| (t as f64 * 0.4).sin()).collect();
        let tensors: Vec<Tensor> = inputs.iter().map(|&v| Tensor::vector(vec![1.0, v])).collect();
        let (out, _) = graph.forward(&tensors).unwrap();
        esn.reset_state();
        for (t, &v) in inputs.iter().enumerate() {
            let row = esn.advance(&[v]).unwrap();
            let y = esn.predict(&row).unwrap()[0];
            assert!((out[t].data()[0] - y).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_topology_counts() {
        let mut esn = EsnModel::from_config(1, &EsnConfig::default()).unwrap();
        esn.readout = Some(Matrix::new(1, 188, vec![0.1; 188]).unwrap());
        let graph = build_model(&esn.to_model_description().unwrap()).unwrap();
        assert_eq!(graph.parameter_count(), 372 + 186 * 186 + 188);
        let s = connection_sparsity(&graph).unwrap();
        assert!((0.80..=0.95).contains(&s), "{s}");
    }
}
