//! Partial-AUC optimization: data handling, scoring models, empirical
//! partial-AUC metrics, the instance-wise minimax surrogate and its
//! accelerated stochastic gradient descent ascent solver, plus independent
//! oracles used to verify them.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision case.

// `!(x > 0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod scalar;

pub use data::{generate_synthetic, iter_batches, load_csv, BatchSpec, LabelColumn, SampleSet};
pub use error::{PaucError, Result};
pub use loss::{AuxState, GradBundle, HyperParams, Task};
pub use metrics::{empirical_auc, empirical_opauc, empirical_tpauc, pauc_report, PaucReport, RocRegion};
pub use model::{Layout, ModelKind, ModelParams};
pub use optim::{train, LearnParams, OptimState, TraceRecord, TrainOptions, TrainOutput};
pub use scalar::Scalar;

pub type SampleSet64 = SampleSet<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type HyperParams64 = HyperParams<f64>;
pub type AuxState64 = AuxState<f64>;
pub type LearnParams64 = LearnParams<f64>;
pub type SampleSet32 = SampleSet<f32>;
pub type ModelParams32 = ModelParams<f32>;
