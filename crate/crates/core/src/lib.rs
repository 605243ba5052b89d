//! Neuromorphic benchmark harness.
//!
//! Hardware-independent complexity metrics (footprint, connection and
//! activation sparsity, synaptic operations) computed over a small layered
//! network substrate, plus three desk-scale benchmarks: chaotic Mackey-Glass
//! forecasting with an echo state network, prototypical few-shot
//! class-incremental learning, and maximum-independent-set QUBO solving.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod metrics;
pub mod mackeyglass;
pub mod model;
pub mod neurons;
pub mod qubo;
pub mod reservoir;
pub mod fscil;
pub mod rng;
pub mod tensor;
pub mod trace;

pub use error::{Error, ErrorKind, Result};
pub use model::{build_model, ModelDescription, ModelGraph};
pub use tensor::{Matrix, Tensor};
pub use trace::ExecutionTrace;
