//! Layered network representation and traced execution.
//!
//! A model is an ordered list of layers applied to a stream vector once per
//! timestep. Recurrence is expressed by a [`LayerKind::Recurrent`] layer that
//! adds `W * held` to the stream, where `held` is the previous-timestep
//! output of a named source layer (zeros on the first step). This keeps
//! recurrent weights visible to the same metric code as feed-forward ones.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neurons::{
    adlif_step, lif_decay_to_input_step, lif_delayed_reset_step, AdLifParams, AdLifState, Affine,
    LifDecayToInputParams, LifDelayedResetParams,
};
use crate::tensor::{Matrix, Tensor};
use crate::trace::{ExecutionTrace, LayerRecord, LayerRole, TracedLayer};

pub const DEFAULT_PRECISION_BYTES: usize = 4;

/// Reserved source name referring to the model input of the current step.
pub const INPUT_SOURCE: &str = "input";

fn default_precision() -> usize {
    DEFAULT_PRECISION_BYTES
}

/// Serialized model description (the JSON model file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescription {
    #[serde(default = "default_precision")]
    pub precision_bytes: usize,
    /// Required only when the first layer does not fix the input width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_size: Option<usize>,
    pub layers: Vec<LayerDescription>,
    /// Extra inference buffers (for example input bins) counted in the footprint.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub buffers: Vec<BufferDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferDescription {
    pub name: String,
    pub size: usize,
    #[serde(default)]
    pub init: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerDescription {
    Linear {
        name: String,
        in_dim: usize,
        out_dim: usize,
        /// Row-major `out_dim x in_dim`.
        weights: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias: Option<Vec<f64>>,
    },
    Recurrent {
        name: String,
        /// Width of the stream the contribution is added to.
        size: usize,
        source: String,
        /// Width of the source layer output; defaults to `size`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source_size: Option<usize>,
        /// Row-major `size x source_size`.
        weights: Vec<f64>,
    },
    Affine {
        name: String,
        scale: Vec<f64>,
        shift: Vec<f64>,
    },
    Relu {
        name: String,
    },
    Concat {
        name: String,
        source: String,
    },
    Neuron {
        name: String,
        size: usize,
        neuron: NeuronSpec,
    },
}

impl LayerDescription {
    pub fn name(&self) -> &str {
        match self {
            LayerDescription::Linear { name, .. }
            | LayerDescription::Recurrent { name, .. }
            | LayerDescription::Affine { name, .. }
            | LayerDescription::Relu { name }
            | LayerDescription::Concat { name, .. }
            | LayerDescription::Neuron { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NeuronSpec {
    LifDelayedReset(LifDelayedResetParams),
    LifDecayToInput(LifDecayToInputParams),
    Adlif(AdLifParams),
    LeakyReadout { beta: f64 },
    /// Leaky tanh reservoir unit: `r = (1-alpha) r + alpha tanh(input)`.
    EsnTanh { alpha: f64 },
}

impl NeuronSpec {
    fn buffer_names(&self) -> &'static [&'static str] {
        match self {
            NeuronSpec::LifDelayedReset(_) => &["u", "spike"],
            NeuronSpec::LifDecayToInput(_) | NeuronSpec::LeakyReadout { .. } => &["u"],
            NeuronSpec::Adlif(_) => &["u", "w", "spike"],
            NeuronSpec::EsnTanh { .. } => &["r"],
        }
    }

    fn role(&self) -> LayerRole {
        match self {
            NeuronSpec::LeakyReadout { .. } => LayerRole::Other,
            _ => LayerRole::Activation,
        }
    }

    /// Number of stored per-neuron coefficients counted as parameters.
    fn parameter_count(&self) -> usize {
        match self {
            NeuronSpec::Adlif(p) => 4 * p.len(),
            _ => 0,
        }
    }

    fn validate(&self, size: usize) -> Result<()> {
        match self {
            NeuronSpec::LifDelayedReset(p) => p.validate(),
            NeuronSpec::LifDecayToInput(p) => p.validate(),
            NeuronSpec::Adlif(p) => {
                p.validate()?;
                if p.len() != size {
                    return Err(Error::InvalidParameter(format!(
                        "adLIF coefficients cover {} neurons, layer has {size}",
                        p.len()
                    )));
                }
                Ok(())
            }
            NeuronSpec::LeakyReadout { beta } if !beta.is_finite() => Err(
                Error::InvalidParameter("leaky readout beta must be finite".into()),
            ),
            NeuronSpec::EsnTanh { alpha } if !(0.0..=1.0).contains(alpha) => Err(
                Error::InvalidParameter(format!("leak rate must lie in [0, 1], got {alpha}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Input,
    Layer(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind {
    Linear {
        weight: Matrix,
        bias: Option<Vec<f64>>,
    },
    Recurrent {
        weight: Matrix,
        source: String,
    },
    Affine(Affine),
    Relu,
    Concat {
        source: String,
    },
    Neuron {
        size: usize,
        spec: NeuronSpec,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    in_size: usize,
    out_size: usize,
    source: Option<Source>,
}

impl Layer {
    pub fn in_size(&self) -> usize {
        self.in_size
    }

    pub fn out_size(&self) -> usize {
        self.out_size
    }

    pub fn role(&self) -> LayerRole {
        match &self.kind {
            LayerKind::Linear { .. } | LayerKind::Recurrent { .. } => LayerRole::Connection,
            LayerKind::Relu => LayerRole::Activation,
            LayerKind::Neuron { spec, .. } => spec.role(),
            LayerKind::Affine(_) | LayerKind::Concat { .. } => LayerRole::Other,
        }
    }

    /// Synaptic weights of connection layers.
    pub fn weights(&self) -> Option<&Matrix> {
        match &self.kind {
            LayerKind::Linear { weight, .. } | LayerKind::Recurrent { weight, .. } => Some(weight),
            _ => None,
        }
    }

    pub fn parameter_count(&self) -> usize {
        match &self.kind {
            LayerKind::Linear { weight, bias } => {
                weight.data().len() + bias.as_ref().map_or(0, Vec::len)
            }
            LayerKind::Recurrent { weight, .. } => weight.data().len(),
            LayerKind::Affine(a) => a.scale.len() + a.shift.len(),
            LayerKind::Neuron { spec, .. } => spec.parameter_count(),
            LayerKind::Relu | LayerKind::Concat { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    pub values: Tensor,
    pub init: f64,
}

/// Validated network with its mutable inference state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph {
    layers: Vec<Layer>,
    buffers: BTreeMap<String, Buffer>,
    extra_buffers: Vec<String>,
    precision_bytes: usize,
    input_size: usize,
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteWeight {
            layer: name.to_string(),
        })
    }
}

/// Validates a description and builds the executable graph.
pub fn build_model(desc: &ModelDescription) -> Result<ModelGraph> {
    if desc.layers.is_empty() {
        return Err(Error::EmptyModel);
    }
    if desc.precision_bytes == 0 {
        return Err(Error::InvalidParameter("precision_bytes must be positive".into()));
    }

    let mut names: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, l) in desc.layers.iter().enumerate() {
        if l.name() == INPUT_SOURCE || names.insert(l.name(), i).is_some() {
            return Err(Error::LayerDimension {
                index: i + 1,
                layer: l.name().to_string(),
                detail: "layer names must be unique and not \"input\"".into(),
            });
        }
    }

    let mismatch = |i: usize, name: &str, detail: String| Error::LayerDimension {
        index: i + 1,
        layer: name.to_string(),
        detail,
    };

    let mut layers: Vec<Layer> = Vec::with_capacity(desc.layers.len());
    let mut buffers = BTreeMap::new();
    let mut stream: Option<usize> = desc.input_size;
    let input_size;
    {
        // Width of the model input is fixed by the first layer unless declared.
        let first = &desc.layers[0];
        let implied = match first {
            LayerDescription::Linear { in_dim, .. } => Some(*in_dim),
            LayerDescription::Recurrent { size, .. } | LayerDescription::Neuron { size, .. } => {
                Some(*size)
            }
            LayerDescription::Affine { scale, .. } => Some(scale.len()),
            LayerDescription::Relu { .. } | LayerDescription::Concat { .. } => None,
        };
        input_size = match (stream, implied) {
            (Some(a), Some(b)) if a != b => {
                return Err(mismatch(
                    0,
                    first.name(),
                    format!("declared input_size {a} but layer expects {b}"),
                ))
            }
            (Some(a), _) => a,
            (None, Some(b)) => b,
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "input_size is required when the first layer has no fixed width".into(),
                ))
            }
        };
        stream = Some(input_size);
    }

    for (i, l) in desc.layers.iter().enumerate() {
        let in_size = stream.expect("stream width known");
        let name = l.name().to_string();
        let expect_in = |need: usize| -> Result<()> {
            if need != in_size {
                Err(mismatch(
                    i,
                    &name,
                    format!("expects input of size {need}, previous layer produces {in_size}"),
                ))
            } else {
                Ok(())
            }
        };
        let (kind, out_size, source) = match l {
            LayerDescription::Linear {
                in_dim,
                out_dim,
                weights,
                bias,
                ..
            } => {
                expect_in(*in_dim)?;
                let weight = Matrix::new(*out_dim, *in_dim, weights.clone())
                    .map_err(|e| mismatch(i, &name, e.to_string()))?;
                check_finite(&name, weights)?;
                if let Some(b) = bias {
                    if b.len() != *out_dim {
                        return Err(mismatch(
                            i,
                            &name,
                            format!("bias has {} entries for {out_dim} outputs", b.len()),
                        ));
                    }
                    check_finite(&name, b)?;
                }
                (
                    LayerKind::Linear {
                        weight,
                        bias: bias.clone(),
                    },
                    *out_dim,
                    None,
                )
            }
            LayerDescription::Recurrent {
                size,
                source,
                source_size,
                weights,
                ..
            } => {
                expect_in(*size)?;
                let cols = source_size.unwrap_or(*size);
                let weight = Matrix::new(*size, cols, weights.clone())
                    .map_err(|e| mismatch(i, &name, e.to_string()))?;
                check_finite(&name, weights)?;
                let idx = *names.get(source.as_str()).ok_or_else(|| {
                    mismatch(i, &name, format!("unknown recurrent source {source:?}"))
                })?;
                buffers.insert(
                    format!("{name}.held"),
                    Buffer {
                        values: Tensor::zeros(cols),
                        init: 0.0,
                    },
                );
                (
                    LayerKind::Recurrent {
                        weight,
                        source: source.clone(),
                    },
                    *size,
                    Some(Source::Layer(idx)),
                )
            }
            LayerDescription::Affine { scale, shift, .. } => {
                expect_in(scale.len())?;
                if shift.len() != scale.len() {
                    return Err(mismatch(i, &name, "scale and shift differ in length".into()));
                }
                check_finite(&name, scale)?;
                check_finite(&name, shift)?;
                (
                    LayerKind::Affine(Affine {
                        scale: scale.clone(),
                        shift: shift.clone(),
                    }),
                    in_size,
                    None,
                )
            }
            LayerDescription::Relu { .. } => (LayerKind::Relu, in_size, None),
            LayerDescription::Concat { source, .. } => {
                let (src, width) = if source == INPUT_SOURCE {
                    (Source::Input, input_size)
                } else {
                    match names.get(source.as_str()) {
                        Some(&idx) if idx < i => (Source::Layer(idx), layers[idx].out_size),
                        _ => {
                            return Err(mismatch(
                                i,
                                &name,
                                format!("concat source {source:?} must be the input or an earlier layer"),
                            ))
                        }
                    }
                };
                (
                    LayerKind::Concat {
                        source: source.clone(),
                    },
                    width + in_size,
                    Some(src),
                )
            }
            LayerDescription::Neuron { size, neuron, .. } => {
                expect_in(*size)?;
                neuron.validate(*size)?;
                for b in neuron.buffer_names() {
                    buffers.insert(
                        format!("{name}.{b}"),
                        Buffer {
                            values: Tensor::zeros(*size),
                            init: 0.0,
                        },
                    );
                }
                (
                    LayerKind::Neuron {
                        size: *size,
                        spec: neuron.clone(),
                    },
                    *size,
                    None,
                )
            }
        };
        layers.push(Layer {
            name,
            kind,
            in_size,
            out_size,
            source,
        });
        stream = Some(out_size);
    }

    // Recurrent sources may refer forward; their widths are checked once known.
    for (i, layer) in layers.iter().enumerate() {
        if let (LayerKind::Recurrent { weight, .. }, Some(Source::Layer(src))) =
            (&layer.kind, &layer.source)
        {
            let width = layers[*src].out_size;
            if weight.cols() != width {
                return Err(mismatch(
                    i,
                    &layer.name,
                    format!(
                        "recurrent weights take {} inputs, source produces {width}",
                        weight.cols()
                    ),
                ));
            }
        }
    }

    let mut extra_buffers = Vec::new();
    for b in &desc.buffers {
        if !b.init.is_finite() || buffers.contains_key(&b.name) {
            return Err(Error::InvalidParameter(format!(
                "buffer {:?} is duplicated or has a non-finite initial value",
                b.name
            )));
        }
        buffers.insert(
            b.name.clone(),
            Buffer {
                values: Tensor::vector(vec![b.init; b.size]),
                init: b.init,
            },
        );
        extra_buffers.push(b.name.clone());
    }

    Ok(ModelGraph {
        layers,
        buffers,
        extra_buffers,
        precision_bytes: desc.precision_bytes,
        input_size,
    })
}

/// Parses a model description, naming the offending field on failure.
pub fn parse_model_description(text: &str) -> Result<ModelDescription> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::parse(
            if path == "." { "model".to_string() } else { path },
            e.into_inner(),
        )
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelGraph> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
    build_model(&parse_model_description(&text)?)
}

impl ModelGraph {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn buffers(&self) -> &BTreeMap<String, Buffer> {
        &self.buffers
    }

    pub fn buffer(&self, name: &str) -> Option<&Tensor> {
        self.buffers.get(name).map(|b| &b.values)
    }

    pub fn buffer_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.buffers.get_mut(name).map(|b| &mut b.values)
    }

    pub fn precision_bytes(&self) -> usize {
        self.precision_bytes
    }

    pub fn set_precision_bytes(&mut self, bytes: usize) {
        self.precision_bytes = bytes.max(1);
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_size)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    pub fn buffer_element_count(&self) -> usize {
        self.buffers.values().map(|b| b.values.len()).sum()
    }

    /// Sets every state buffer back to its declared initial value.
    pub fn reset_state(&mut self) {
        for b in self.buffers.values_mut() {
            let init = b.init;
            b.values.data_mut().iter_mut().for_each(|v| *v = init);
        }
    }

    pub fn traced_layers(&self) -> Vec<TracedLayer> {
        self.layers
            .iter()
            .map(|l| TracedLayer {
                name: l.name.clone(),
                role: l.role(),
            })
            .collect()
    }

    /// Description that rebuilds this graph (weights, not state).
    pub fn to_description(&self) -> ModelDescription {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let name = l.name.clone();
                match &l.kind {
                    LayerKind::Linear { weight, bias } => LayerDescription::Linear {
                        name,
                        in_dim: weight.cols(),
                        out_dim: weight.rows(),
                        weights: weight.data().to_vec(),
                        bias: bias.clone(),
                    },
                    LayerKind::Recurrent { weight, source } => LayerDescription::Recurrent {
                        name,
                        size: weight.rows(),
                        source: source.clone(),
                        source_size: (weight.cols() != weight.rows()).then_some(weight.cols()),
                        weights: weight.data().to_vec(),
                    },
                    LayerKind::Affine(a) => LayerDescription::Affine {
                        name,
                        scale: a.scale.clone(),
                        shift: a.shift.clone(),
                    },
                    LayerKind::Relu => LayerDescription::Relu { name },
                    LayerKind::Concat { source } => LayerDescription::Concat {
                        name,
                        source: source.clone(),
                    },
                    LayerKind::Neuron { size, spec } => LayerDescription::Neuron {
                        name,
                        size: *size,
                        neuron: spec.clone(),
                    },
                }
            })
            .collect();
        let first_fixes_width = !matches!(
            self.layers[0].kind,
            LayerKind::Relu | LayerKind::Concat { .. }
        );
        ModelDescription {
            precision_bytes: self.precision_bytes,
            input_size: (!first_fixes_width).then_some(self.input_size),
            layers,
            buffers: self
                .extra_buffers
                .iter()
                .map(|n| {
                    let b = &self.buffers[n];
                    BufferDescription {
                        name: n.clone(),
                        size: b.values.len(),
                        init: b.init,
                    }
                })
                .collect(),
        }
    }

    /// Runs one sample of `T` timesteps, carrying the current state.
    ///
    /// Returns the last layer's output at every step and a single-sample trace.
    pub fn forward(&mut self, inputs: &[Tensor]) -> Result<(Vec<Tensor>, ExecutionTrace)> {
        let mut trace = ExecutionTrace::new(self.traced_layers());
        let mut outputs = Vec::with_capacity(inputs.len());
        let mut steps = Vec::with_capacity(inputs.len());
        for (t, x) in inputs.iter().enumerate() {
            let (out, records) = self.step(x, t)?;
            outputs.push(out);
            steps.push(records);
        }
        trace.push_sample(steps)?;
        Ok((outputs, trace))
    }

    /// Resets the state before each sample and merges all traces.
    pub fn run_workload(
        &mut self,
        samples: &[Vec<Tensor>],
    ) -> Result<(Vec<Vec<Tensor>>, ExecutionTrace)> {
        let mut trace = ExecutionTrace::new(self.traced_layers());
        let mut outputs = Vec::with_capacity(samples.len());
        for sample in samples {
            self.reset_state();
            let (out, t) = self.forward(sample)?;
            trace.merge(t)?;
            outputs.push(out);
        }
        Ok((outputs, trace))
    }

    fn step(&mut self, x: &Tensor, t: usize) -> Result<(Tensor, Vec<LayerRecord>)> {
        if x.len() != self.input_size {
            return Err(Error::Dimension(format!(
                "input at timestep {t} has {} values, model expects {}",
                x.len(),
                self.input_size
            )));
        }
        let mut records: Vec<LayerRecord> = Vec::with_capacity(self.layers.len());
        let mut stream = x.data().to_vec();
        for li in 0..self.layers.len() {
            let layer = &self.layers[li];
            let cur = std::mem::take(&mut stream);
            let (synaptic_input, out) = match &layer.kind {
                LayerKind::Linear { weight, bias } => {
                    let mut y = weight.matvec_unchecked(&cur);
                    if let Some(b) = bias {
                        y.iter_mut().zip(b).for_each(|(v, b)| *v += b);
                    }
                    (cur, y)
                }
                LayerKind::Recurrent { weight, .. } => {
                    let held = self.buffers[&format!("{}.held", layer.name)]
                        .values
                        .data()
                        .to_vec();
                    let r = weight.matvec_unchecked(&held);
                    let y = cur.iter().zip(&r).map(|(a, b)| a + b).collect();
                    (held, y)
                }
                LayerKind::Affine(a) => {
                    let y = a.apply(&cur)?;
                    (cur, y)
                }
                LayerKind::Relu => {
                    let y = cur.iter().map(|v| v.max(0.0)).collect();
                    (cur, y)
                }
                LayerKind::Concat { .. } => {
                    let mut y = match layer.source {
                        Some(Source::Layer(idx)) => records[idx].output.data().to_vec(),
                        _ => x.data().to_vec(),
                    };
                    y.extend_from_slice(&cur);
                    (cur, y)
                }
                LayerKind::Neuron { spec, .. } => {
                    let name = layer.name.clone();
                    let spec = spec.clone();
                    let y = self.neuron_step(&name, &spec, &cur);
                    (cur, y)
                }
            };
            let layer = &self.layers[li];
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteActivation {
                    layer: layer.name.clone(),
                    timestep: t,
                });
            }
            stream = out.clone();
            records.push(LayerRecord {
                input: Tensor::vector(synaptic_input),
                output: Tensor::vector(out),
            });
        }

        for layer in &self.layers {
            if let (LayerKind::Recurrent { .. }, Some(Source::Layer(src))) =
                (&layer.kind, &layer.source)
            {
                let held = self
                    .buffers
                    .get_mut(&format!("{}.held", layer.name))
                    .expect("recurrent buffer registered");
                held.values
                    .data_mut()
                    .copy_from_slice(records[*src].output.data());
            }
        }
        let out = records.last().expect("non-empty model").output.clone();
        Ok((out, records))
    }

    fn neuron_step(&mut self, name: &str, spec: &NeuronSpec, input: &[f64]) -> Vec<f64> {
        let take = |var: &str| -> Vec<f64> {
            self.buffers[&format!("{name}.{var}")].values.data().to_vec()
        };
        let spike = |s: bool| if s { 1.0 } else { 0.0 };
        let (out, state): (Vec<f64>, Vec<(&str, Vec<f64>)>) = match spec {
            NeuronSpec::LifDelayedReset(p) => {
                let mut u = take("u");
                let mut s = take("spike");
                for i in 0..input.len() {
                    let (nu, ns) = lif_delayed_reset_step(u[i], s[i] != 0.0, p, input[i]);
                    u[i] = nu;
                    s[i] = spike(ns);
                }
                (s.clone(), vec![("u", u), ("spike", s)])
            }
            NeuronSpec::LifDecayToInput(p) => {
                let mut u = take("u");
                let mut s = vec![0.0; input.len()];
                for i in 0..input.len() {
                    let (nu, ns) = lif_decay_to_input_step(u[i], p, input[i]);
                    u[i] = nu;
                    s[i] = spike(ns);
                }
                (s, vec![("u", u)])
            }
            NeuronSpec::Adlif(p) => {
                let mut u = take("u");
                let mut w = take("w");
                let mut s = take("spike");
                for i in 0..input.len() {
                    let st = adlif_step(
                        AdLifState {
                            u: u[i],
                            w: w[i],
                            spike: s[i] != 0.0,
                        },
                        &p.neuron(i),
                        p.theta,
                        input[i],
                    );
                    u[i] = st.u;
                    w[i] = st.w;
                    s[i] = spike(st.spike);
                }
                (s.clone(), vec![("u", u), ("w", w), ("spike", s)])
            }
            NeuronSpec::LeakyReadout { beta } => {
                let mut u = take("u");
                for i in 0..input.len() {
                    u[i] = crate::neurons::leaky_readout_step(u[i], *beta, input[i]);
                }
                (u.clone(), vec![("u", u)])
            }
            NeuronSpec::EsnTanh { alpha } => {
                let mut r = take("r");
                for i in 0..input.len() {
                    r[i] = (1.0 - alpha) * r[i] + alpha * input[i].tanh();
                }
                (r.clone(), vec![("r", r)])
            }
        };
        for (var, values) in state {
            self.buffers
                .get_mut(&format!("{name}.{var}"))
                .expect("neuron buffer registered")
                .values
                .data_mut()
                .copy_from_slice(&values);
        }
        out
    }
}
