//! Learnable-query cross-attention pooling and branch fusion.
//!
//! The pooling step condenses a variable-length feature sequence into a
//! fixed number of query slots (256 by default): single-head scaled
//! dot-product attention with the trainable queries attending over the
//! feature rows, no output projection. Fusion concatenates the pooled
//! outputs of parallel visual branches per row and projects them through one
//! dense layer into the model width.

use super::layers::Dense;
use super::matrix::{dot, softmax, Matrix};
use super::KernelError;
use crate::scalar::Scalar;

/// Fixed output length of the pooled representation under default config.
pub const DEFAULT_NUM_QUERIES: usize = 256;

/// Trainable parameters of the adapter: the query bank and the fusion layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterConfig<S> {
    /// `num_queries x feature_dim`.
    pub queries: Matrix<S>,
    /// Maps concatenated branch outputs to the model width.
    pub fusion: Dense<S>,
}

impl<S: Scalar> AdapterConfig<S> {
    pub fn new(queries: Matrix<S>, fusion: Dense<S>) -> Result<Self, KernelError> {
        if queries.rows() < 1 {
            return Err(KernelError::InvalidConfig(
                "adapter needs at least one query vector".to_string(),
            ));
        }
        Ok(AdapterConfig { queries, fusion })
    }

    pub fn num_queries(&self) -> usize {
        self.queries.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.queries.cols()
    }
}

/// Pools `T x d` features down to `num_queries x d`:
/// `out[q] = sum_t softmax_t(<query_q, feature_t> / sqrt(d)) * feature_t`.
///
/// The output row count depends only on the query bank, never on `T`, and
/// every output row is a convex combination of the feature rows.
pub fn cross_attention_pool<S: Scalar>(
    features: &Matrix<S>,
    cfg: &AdapterConfig<S>,
) -> Result<Matrix<S>, KernelError> {
    let d = cfg.feature_dim();
    if features.cols() != d {
        return Err(KernelError::DimensionMismatch(format!(
            "features have width {}, queries expect {}",
            features.cols(),
            d
        )));
    }
    if features.rows() < 1 {
        return Err(KernelError::DimensionMismatch(
            "need at least one feature row".to_string(),
        ));
    }
    let scale = S::one() / S::from_usize(d).unwrap().sqrt();
    let mut out = Vec::with_capacity(cfg.num_queries() * d);
    for q in 0..cfg.num_queries() {
        let query = cfg.queries.row(q);
        let logits: Vec<S> = features
            .row_iter()
            .map(|feat| dot(query, feat) * scale)
            .collect();
        let weights = softmax(&logits);
        let mut pooled = vec![S::zero(); d];
        for (w, feat) in weights.iter().zip(features.row_iter()) {
            for (acc, &v) in pooled.iter_mut().zip(feat) {
                *acc = *acc + *w * v;
            }
        }
        out.extend(pooled);
    }
    Matrix::new(cfg.num_queries(), d, out)
}

/// Concatenates branch outputs per row and applies the fusion layer.
/// All branches must share the row count, and the concatenated width must
/// match the fusion layer's input.
pub fn fuse_branches<S: Scalar>(
    branches: &[Matrix<S>],
    cfg: &AdapterConfig<S>,
) -> Result<Matrix<S>, KernelError> {
    let refs: Vec<&Matrix<S>> = branches.iter().collect();
    let concat = Matrix::hconcat(&refs)?;
    if concat.cols() != cfg.fusion.in_dim() {
        return Err(KernelError::DimensionMismatch(format!(
            "concatenated width {} does not match fusion input {}",
            concat.cols(),
            cfg.fusion.in_dim()
        )));
    }
    cfg.fusion.forward(&concat)
}
