use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// How the metrics engine treats a layer's recorded activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRole {
    /// Multiplies its input by synaptic weights (counted for synaptic ops).
    Connection,
    /// Emits neuron activations (counted for activation sparsity).
    Activation,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedLayer {
    pub name: String,
    pub role: LayerRole,
}

/// Input and output of one layer at one timestep.
///
/// For connection layers `input` is exactly the vector multiplied by the
/// weights; for a recurrent connection that is the held previous-step output
/// of its source layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub input: Tensor,
    pub output: Tensor,
}

/// Per-layer, per-timestep, per-sample activity of a workload run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    layers: Vec<TracedLayer>,
    /// Indexed `[sample][timestep][layer]`.
    samples: Vec<Vec<Vec<LayerRecord>>>,
}

impl ExecutionTrace {
    pub fn new(layers: Vec<TracedLayer>) -> Self {
        Self {
            layers,
            samples: Vec::new(),
        }
    }

    pub fn layers(&self) -> &[TracedLayer] {
        &self.layers
    }

    pub fn samples(&self) -> &[Vec<Vec<LayerRecord>>] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Total number of model executions (timesteps summed over samples).
    pub fn executions(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.executions() == 0
    }

    /// Number of recorded (layer, timestep, sample) pairs.
    pub fn record_count(&self) -> usize {
        self.samples
            .iter()
            .flat_map(|s| s.iter())
            .map(Vec::len)
            .sum()
    }

    pub fn push_sample(&mut self, steps: Vec<Vec<LayerRecord>>) -> Result<()> {
        if steps.iter().any(|s| s.len() != self.layers.len()) {
            return Err(Error::TraceMismatch(format!(
                "sample does not record all {} layers at every step",
                self.layers.len()
            )));
        }
        self.samples.push(steps);
        Ok(())
    }

    /// Appends the samples of another trace taken over the same layers.
    pub fn merge(&mut self, other: ExecutionTrace) -> Result<()> {
        if other.layers != self.layers {
            return Err(Error::TraceMismatch(
                "cannot merge traces of different models".into(),
            ));
        }
        self.samples.extend(other.samples);
        Ok(())
    }

    /// Records of layer `index` across every sample and timestep.
    pub fn layer_records(&self, index: usize) -> impl Iterator<Item = &LayerRecord> {
        self.samples
            .iter()
            .flat_map(|s| s.iter())
            .map(move |step| &step[index])
    }
}
