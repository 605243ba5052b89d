//! Neuron dynamics: two LIF variants, adaptive LIF, leaky readout
//! accumulators and the echo-state reservoir update.
//!
//! Every step function is pure: the caller owns the state and passes it in.
//! Spike conditions follow each model's own comparison: the delayed-reset LIF
//! fires on `u > v_th`, the decay-to-input LIF on `h >= v_th` and the
//! adaptive LIF on `u >= theta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// LIF neuron whose potential is reset in the step after a spike.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifDelayedResetParams {
    pub beta: f64,
    pub v_th: f64,
    #[serde(default)]
    pub v_reset: f64,
}

impl LifDelayedResetParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!(
                "LIF beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if self.v_th <= self.v_reset {
            return Err(Error::InvalidParameter(
                "LIF threshold must exceed the reset value".into(),
            ));
        }
        Ok(())
    }
}

/// `u(t) = v_reset` if the neuron spiked at `t-1`, else `beta*u(t-1) + x`.
/// Spikes when `u(t) > v_th`.
#[inline]
pub fn lif_delayed_reset_step(
    u: f64,
    prev_spike: bool,
    p: &LifDelayedResetParams,
    x: f64,
) -> (f64, bool) {
    let u = if prev_spike {
        p.v_reset
    } else {
        p.beta * u + x
    };
    (u, u > p.v_th)
}

/// LIF neuron that charges toward its input and resets in the same step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifDecayToInputParams {
    pub tau: f64,
    pub v_th: f64,
    #[serde(default)]
    pub v_reset: f64,
}

impl LifDecayToInputParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "LIF tau must be at least 1, got {}",
                self.tau
            )));
        }
        if self.v_th <= self.v_reset {
            return Err(Error::InvalidParameter(
                "LIF threshold must exceed the reset value".into(),
            ));
        }
        Ok(())
    }
}

/// `h = u + (x - u)/tau`; spikes when `h >= v_th`, in which case the returned
/// potential is `v_reset`, otherwise `h`.
#[inline]
pub fn lif_decay_to_input_step(u: f64, p: &LifDecayToInputParams, x: f64) -> (f64, bool) {
    let h = u + (x - u) / p.tau;
    if h >= p.v_th {
        (p.v_reset, true)
    } else {
        (h, false)
    }
}

/// Per-neuron adaptive LIF coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdLifNeuron {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

/// Adaptive LIF layer parameters. The four coefficient vectors are per neuron
/// and must have equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdLifParams {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub theta: f64,
}

impl AdLifParams {
    pub fn uniform(size: usize, neuron: AdLifNeuron, theta: f64) -> Self {
        Self {
            alpha: vec![neuron.alpha; size],
            beta: vec![neuron.beta; size],
            a: vec![neuron.a; size],
            b: vec![neuron.b; size],
            theta,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn neuron(&self, i: usize) -> AdLifNeuron {
        AdLifNeuron {
            alpha: self.alpha[i],
            beta: self.beta[i],
            a: self.a[i],
            b: self.b[i],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.alpha.len();
        if self.beta.len() != n || self.a.len() != n || self.b.len() != n {
            return Err(Error::InvalidParameter(
                "adLIF coefficient vectors differ in length".into(),
            ));
        }
        let in_unit = |v: &f64| (0.0..=1.0).contains(v);
        if !self.alpha.iter().all(in_unit) || !self.beta.iter().all(in_unit) {
            return Err(Error::InvalidParameter(
                "adLIF decay factors must lie in [0, 1]".into(),
            ));
        }
        if !(self.theta > 0.0) {
            return Err(Error::InvalidParameter(
                "adLIF threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdLifState {
    pub u: f64,
    pub w: f64,
    pub spike: bool,
}

/// One adaptive LIF update. Both `u(t)` and `w(t)` are computed from the
/// previous state; no clamping is applied to `w`.
#[inline]
pub fn adlif_step(state: AdLifState, p: &AdLifNeuron, theta: f64, current: f64) -> AdLifState {
    let s_prev = if state.spike { 1.0 } else { 0.0 };
    let u = p.alpha * state.u + (1.0 - p.alpha) * (current - state.w) - theta * s_prev;
    let w = p.beta * state.w + p.a * (1.0 - p.beta) * state.u + p.b * s_prev;
    AdLifState {
        u,
        w,
        spike: u >= theta,
    }
}

/// Frozen per-channel affine map standing in for batch-norm-through-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl Affine {
    pub fn identity(size: usize) -> Self {
        Self {
            scale: vec![1.0; size],
            shift: vec![0.0; size],
        }
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.scale.len() || self.shift.len() != self.scale.len() {
            return Err(Error::Dimension(format!(
                "affine of width {} applied to {} values",
                self.scale.len(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.scale.iter().zip(&self.shift))
            .map(|(v, (s, b))| s * v + b)
            .collect())
    }
}

/// Input current `affine(W_f x) + W_r s_prev` of an adaptive LIF layer.
pub fn adlif_current(
    w_f: &Matrix,
    w_r: &Matrix,
    affine: &Affine,
    x_in: &[f64],
    s_prev: &[f64],
) -> Result<Vec<f64>> {
    if w_r.rows() != w_f.rows() {
        return Err(Error::Dimension(format!(
            "forward weights produce {} currents, recurrent weights {}",
            w_f.rows(),
            w_r.rows()
        )));
    }
    let forward = affine.apply(&w_f.matvec(x_in)?)?;
    let recurrent = w_r.matvec(s_prev)?;
    Ok(forward.iter().zip(&recurrent).map(|(f, r)| f + r).collect())
}

/// Leaky accumulator without spiking: `u(t) = beta*u(t-1) + x`.
#[inline]
pub fn leaky_readout_step(u: f64, beta: f64, x: f64) -> f64 {
    beta * u + x
}

/// Echo-state reservoir parameters.
///
/// `w_in` has one more column than the input dimension; column 0 multiplies
/// the constant bias input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnParams {
    pub alpha: f64,
    pub gamma: f64,
    pub beta_in: f64,
    pub w: Matrix,
    pub w_in: Matrix,
}

impl EsnParams {
    pub fn reservoir_size(&self) -> usize {
        self.w.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.cols().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.rows() != self.w.cols() {
            return Err(Error::Dimension("reservoir matrix must be square".into()));
        }
        if self.w_in.rows() != self.w.rows() || self.w_in.cols() == 0 {
            return Err(Error::Dimension(format!(
                "input matrix is {}x{}, reservoir has {} units",
                self.w_in.rows(),
                self.w_in.cols(),
                self.w.rows()
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "leak rate must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// `r(t) = (1-alpha) r(t-1) + alpha tanh(gamma W r(t-1) + beta_in W_in [1; f])`
pub fn esn_step(r: &[f64], p: &EsnParams, f: &[f64]) -> Result<Vec<f64>> {
    let size = p.reservoir_size();
    if r.len() != size {
        return Err(Error::Dimension(format!(
            "reservoir state has {} entries, expected {size}",
            r.len()
        )));
    }
    if f.len() + 1 != p.w_in.cols() {
        return Err(Error::Dimension(format!(
            "input of length {} for an input matrix with {} columns",
            f.len(),
            p.w_in.cols()
        )));
    }
    let mut augmented = Vec::with_capacity(f.len() + 1);
    augmented.push(1.0);
    augmented.extend_from_slice(f);
    let drive = p.w_in.matvec_unchecked(&augmented);
    let recurrent = p.w.matvec_unchecked(r);
    Ok((0..size)
        .map(|i| {
            let pre = p.gamma * recurrent[i] + p.beta_in * drive[i];
            (1.0 - p.alpha) * r[i] + p.alpha * pre.tanh()
        })
        .collect())
}
