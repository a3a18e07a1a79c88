//! Dense-to-MoE expansion and the routed forward pass.
//!
//! Expansion duplicates a trained MLP into `num_experts` identical experts
//! behind a fresh router. Because every expert starts as an exact copy, the
//! routed layer computes the same function as the original MLP at step 0 no
//! matter what the router does; tests and the self-check lean on that.
//!
//! Routing is top-k over the router logits (ties kept toward the lower
//! expert index), with softmax gating over the kept logits only.

use super::layers::{Dense, Mlp};
use super::matrix::{softmax, Matrix};
use super::KernelError;
use crate::scalar::Scalar;

/// A mixture-of-experts layer: router, experts, and the per-row top-k.
#[derive(Debug, Clone, PartialEq)]
pub struct MoeLayer<S> {
    /// `feature_dim -> num_experts`.
    pub router: Dense<S>,
    pub experts: Vec<Mlp<S>>,
    pub top_k: usize,
}

impl<S: Scalar> MoeLayer<S> {
    pub fn num_experts(&self) -> usize {
        self.experts.len()
    }
}

/// Builds a MoE layer whose every expert is a copy of `dense`.
pub fn expand_dense_to_moe<S: Scalar>(
    dense: &Mlp<S>,
    num_experts: usize,
    top_k: usize,
    router: Dense<S>,
) -> Result<MoeLayer<S>, KernelError> {
    if num_experts < 1 {
        return Err(KernelError::InvalidConfig(
            "need at least one expert".to_string(),
        ));
    }
    if top_k < 1 || top_k > num_experts {
        return Err(KernelError::InvalidConfig(format!(
            "top_k {top_k} must be in 1..={num_experts}"
        )));
    }
    if router.out_dim() != num_experts {
        return Err(KernelError::InvalidConfig(format!(
            "router emits {} logits for {} experts",
            router.out_dim(),
            num_experts
        )));
    }
    if router.in_dim() != dense.in_dim() {
        return Err(KernelError::InvalidConfig(format!(
            "router input {} does not match expert input {}",
            router.in_dim(),
            dense.in_dim()
        )));
    }
    Ok(MoeLayer {
        router,
        experts: vec![dense.clone(); num_experts],
        top_k,
    })
}

/// Kept expert indices and their gate weights for a single input row.
/// Gates are a softmax over the kept logits, so they sum to 1.
pub fn top_k_gates<S: Scalar>(
    layer: &MoeLayer<S>,
    row: &[S],
) -> Result<Vec<(usize, S)>, KernelError> {
    let x = Matrix::new(1, row.len(), row.to_vec())?;
    let logits = layer.router.forward(&x)?;
    let logits = logits.row(0);
    let mut order: Vec<usize> = (0..logits.len()).collect();
    // Stable sort by descending logit keeps ties on the lower expert index.
    order.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).expect("finite logits"));
    let kept = &order[..layer.top_k];
    let kept_logits: Vec<S> = kept.iter().map(|&e| logits[e]).collect();
    let gates = softmax(&kept_logits);
    Ok(kept.iter().copied().zip(gates).collect())
}

/// Routed forward pass over `N x d` inputs, one routing decision per row.
pub fn moe_forward<S: Scalar>(
    x: &Matrix<S>,
    layer: &MoeLayer<S>,
) -> Result<Matrix<S>, KernelError> {
    let d_out = layer
        .experts
        .first()
        .ok_or_else(|| KernelError::InvalidConfig("no experts".to_string()))?
        .out_dim();
    let mut out = Vec::with_capacity(x.rows() * d_out);
    for r in 0..x.rows() {
        let row = x.row(r);
        let row_matrix = Matrix::new(1, row.len(), row.to_vec())?;
        let mut acc = vec![S::zero(); d_out];
        for (expert_idx, gate) in top_k_gates(layer, row)? {
            let y = layer.experts[expert_idx].forward(&row_matrix)?;
            for (a, &v) in acc.iter_mut().zip(y.row(0)) {
                *a = *a + gate * v;
            }
        }
        out.extend(acc);
    }
    Matrix::new(x.rows(), d_out, out)
}
