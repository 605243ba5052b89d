//! Static and workload complexity metrics, and correctness scores.
//!
//! Static metrics (footprint, connection sparsity) read the model only.
//! Workload metrics (activation sparsity, synaptic operations) read an
//! [`ExecutionTrace`]. Biases count toward the footprint but never toward
//! connection sparsity or synaptic operations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelGraph;
use crate::trace::{ExecutionTrace, LayerRole};

/// Synaptic operations per model execution (one forward pass of one timestep).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SynopsBreakdown {
    pub dense: f64,
    pub eff_mac: f64,
    pub eff_ac: f64,
}

impl SynopsBreakdown {
    pub fn effective(&self) -> f64 {
        self.eff_mac + self.eff_ac
    }
}

/// Bytes needed to store every parameter and state buffer.
pub fn footprint(model: &ModelGraph) -> u64 {
    ((model.parameter_count() + model.buffer_element_count()) * model.precision_bytes()) as u64
}

/// Zero weights over all weights, accumulated across connection layers.
pub fn connection_sparsity(model: &ModelGraph) -> Result<f64> {
    let (zeros, total) = model
        .layers()
        .iter()
        .filter_map(|l| l.weights())
        .fold((0usize, 0usize), |(z, n), w| {
            (z + w.count_zeros(), n + w.data().len())
        });
    if total == 0 {
        return Err(Error::InvalidInput("model has no synaptic weights".into()));
    }
    Ok(zeros as f64 / total as f64)
}

/// Fraction of zero outputs over all activation layers, timesteps and samples.
pub fn activation_sparsity(trace: &ExecutionTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::InvalidInput("empty execution trace".into()));
    }
    let mut zeros = 0usize;
    let mut total = 0usize;
    let mut any_layer = false;
    for (i, layer) in trace.layers().iter().enumerate() {
        if layer.role != LayerRole::Activation {
            continue;
        }
        any_layer = true;
        for rec in trace.layer_records(i) {
            let out = rec.output.data();
            zeros += out.iter().filter(|&&v| v == 0.0).count();
            total += out.len();
        }
    }
    if !any_layer {
        return Err(Error::InvalidInput(
            "trace contains no activation layer".into(),
        ));
    }
    if total == 0 {
        return Err(Error::InvalidInput("activation layers recorded no values".into()));
    }
    Ok(zeros as f64 / total as f64)
}

fn is_unit_valued(v: f64) -> bool {
    v == 0.0 || v == 1.0 || v == -1.0
}

/// Dense and effective synaptic operations averaged per model execution.
///
/// A layer's effective operations are accumulates when every input it saw
/// during the whole run lies in `{-1, 0, 1}`, multiply-accumulates otherwise.
pub fn synaptic_ops(model: &ModelGraph, trace: &ExecutionTrace) -> Result<SynopsBreakdown> {
    let traced = trace.layers();
    if traced.len() != model.layers().len()
        || traced
            .iter()
            .zip(model.layers())
            .any(|(t, l)| t.name != l.name || t.role != l.role())
    {
        return Err(Error::TraceMismatch(
            "trace layers differ from model layers".into(),
        ));
    }
    let executions = trace.executions();
    if executions == 0 {
        return Err(Error::InvalidInput("empty execution trace".into()));
    }

    let mut dense = 0u64;
    let mut mac = 0u64;
    let mut ac = 0u64;
    for (i, layer) in model.layers().iter().enumerate() {
        let Some(w) = layer.weights() else { continue };
        let (rows, cols) = (w.rows(), w.cols());
        // Nonzero weights per input column; effective ops of one step are the
        // sum of these counts over the nonzero inputs.
        let mut fanout = vec![0u64; cols];
        for r in 0..rows {
            for (c, &v) in w.row(r).iter().enumerate() {
                if v != 0.0 {
                    fanout[c] += 1;
                }
            }
        }
        let mut effective = 0u64;
        let mut binary = true;
        for rec in trace.layer_records(i) {
            let x = rec.input.data();
            if x.len() != cols {
                return Err(Error::TraceMismatch(format!(
                    "layer {} recorded {} inputs, weights take {cols}",
                    layer.name,
                    x.len()
                )));
            }
            for (c, &v) in x.iter().enumerate() {
                if v != 0.0 {
                    effective += fanout[c];
                }
                binary &= is_unit_valued(v);
            }
            dense += (rows * cols) as u64;
        }
        if binary {
            ac += effective;
        } else {
            mac += effective;
        }
    }
    let per = executions as f64;
    Ok(SynopsBreakdown {
        dense: dense as f64 / per,
        eff_mac: mac as f64 / per,
        eff_ac: ac as f64 / per,
    })
}

fn check_lengths(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::InvalidInput("no data points".into()));
    }
    Ok(())
}

/// Symmetric mean absolute percentage error in `[0, 200]`.
///
/// Terms where prediction and target are both zero contribute 0. A
/// non-finite prediction contributes the maximal term.
pub fn smape(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            if !p.is_finite() {
                return 1.0;
            }
            let denom = y.abs() + p.abs();
            if denom == 0.0 {
                0.0
            } else {
                (y - p).abs() / denom
            }
        })
        .sum();
    Ok(200.0 * sum / targets.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r_squared(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    if targets.len() < 2 {
        return Err(Error::InvalidInput("R² needs at least two points".into()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::InvalidInput(
            "R² is undefined for constant targets".into(),
        ));
    }
    let ss_res: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Model execution rate in Hz for a given input stride.
pub fn execution_rate(stride_seconds: f64) -> Result<f64> {
    if !(stride_seconds > 0.0) || !stride_seconds.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "stride must be positive, got {stride_seconds}"
        )));
    }
    Ok(1.0 / stride_seconds)
}

pub fn accuracy<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("no labels".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectnessName {
    Smape,
    RSquared,
    Accuracy,
}

/// Flat benchmark record. Workload fields are `None` in static-only mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub footprint_bytes: u64,
    pub connection_sparsity: f64,
    pub activation_sparsity: Option<f64>,
    pub synops_dense: Option<f64>,
    pub synops_eff_mac: Option<f64>,
    pub synops_eff_ac: Option<f64>,
    pub correctness_name: Option<CorrectnessName>,
    pub correctness_value: Option<f64>,
    pub execution_rate_hz: Option<f64>,
}

impl MetricsReport {
    /// Static metrics only.
    pub fn static_only(model: &ModelGraph) -> Result<Self> {
        Ok(Self {
            footprint_bytes: footprint(model),
            connection_sparsity: connection_sparsity(model)?,
            activation_sparsity: None,
            synops_dense: None,
            synops_eff_mac: None,
            synops_eff_ac: None,
            correctness_name: None,
            correctness_value: None,
            execution_rate_hz: None,
        })
    }

    /// Static metrics plus the workload metrics of `trace`. Activation sparsity
    /// stays `None` when the model has no activation layer.
    pub fn with_workload(model: &ModelGraph, trace: &ExecutionTrace) -> Result<Self> {
        let mut report = Self::static_only(model)?;
        let synops = synaptic_ops(model, trace)?;
        report.synops_dense = Some(synops.dense);
        report.synops_eff_mac = Some(synops.eff_mac);
        report.synops_eff_ac = Some(synops.eff_ac);
        report.activation_sparsity = if trace
            .layers()
            .iter()
            .any(|l| l.role == LayerRole::Activation)
        {
            Some(activation_sparsity(trace)?)
        } else {
            None
        };
        Ok(report)
    }

    pub fn synops(&self) -> Option<SynopsBreakdown> {
        Some(SynopsBreakdown {
            dense: self.synops_dense?,
            eff_mac: self.synops_eff_mac?,
            eff_ac: self.synops_eff_ac?,
        })
    }
}
