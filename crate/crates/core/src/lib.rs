//! Offline evaluation harness for mobile GUI agents, plus reference kernels
//! for the vision-adapter math.
//!
//! The harness replays recorded GUI episodes against any model client (a
//! live HTTP endpoint or a scripted transcript), speaks the four-section
//! observation/reasoning/action/summary protocol, judges predicted actions
//! by type match and IoU, and aggregates whole-task / step / endpoint
//! success rates per business sector and task complexity. Alongside it sit
//! desk-scale numeric kernels: variable-resolution patch-grid selection,
//! learnable-query cross-attention pooling, branch fusion, and dense-to-MoE
//! expansion.
//!
//! Numeric code is generic over the scalar type through [`scalar::Scalar`];
//! the aliases below pin the `f64` instantiations the documented tolerances
//! assume.

pub mod action;
pub mod dataset;
pub mod evaluation;
pub mod geometry;
pub mod kernels;
pub mod patch_grid;
pub mod protocol;
pub mod runtime;
pub mod scalar;

pub use scalar::Scalar;

/// `f64` kernel matrix.
pub type Matrix = kernels::Matrix<f64>;
/// `f64` dense layer.
pub type Dense = kernels::Dense<f64>;
/// `f64` two-layer MLP.
pub type Mlp = kernels::Mlp<f64>;
/// `f64` adapter parameters.
pub type AdapterConfig = kernels::AdapterConfig<f64>;
/// `f64` mixture-of-experts layer.
pub type MoeLayer = kernels::MoeLayer<f64>;
