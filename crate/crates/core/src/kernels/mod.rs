//! Desk-scale reference kernels for the vision-adapter math: learnable-query
//! cross-attention pooling, branch fusion, and dense-to-MoE expansion.
//!
//! These are standalone numeric references with analytic test surfaces, not
//! a training stack. Everything runs on a plain row-major [`Matrix`] generic
//! over the scalar type; the crate root pins `f64` aliases, which is the
//! precision the documented tolerances assume.

mod adapter;
mod layers;
mod matrix;
mod moe;
pub mod params_io;
pub mod selfcheck;

pub use adapter::{cross_attention_pool, fuse_branches, AdapterConfig, DEFAULT_NUM_QUERIES};
pub use layers::{silu, Dense, Mlp};
pub use matrix::Matrix;
pub use moe::{expand_dense_to_moe, moe_forward, top_k_gates, MoeLayer};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("matrix entries must be finite")]
    NonFiniteData,
}
