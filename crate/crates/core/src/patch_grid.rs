//! Variable-resolution patch-grid selection.
//!
//! Given an image of `w x h` pixels, a token budget `L`, and a patch size
//! `p`, picks the patch counts `(n_w, n_h)` that use as much of the budget as
//! possible while staying close to the original aspect ratio. The ideal
//! fractional counts are `w*s/p` and `h*s/p` with `s = sqrt(L*p^2/(w*h))`,
//! which simplify to `sqrt(L*w/h)` and `sqrt(L*h/w)`; the search space is the
//! floor/ceil lattice around that point, each count clamped to at least 1.
//!
//! Selection: among the candidate pairs whose product fits the budget, take
//! the largest product; break ties by the smaller log-ratio aspect error
//! `|ln((n_w/n_h)*(h/w))|`, then by the larger `n_w`. If no candidate pair
//! fits (extreme aspect ratios where clamping kicks in), the smaller pixel
//! dimension keeps its clamped floor count and the other side takes
//! `floor(L / that)`.
//!
//! All comparisons are done in exact integer arithmetic, so results are
//! exactly scale-invariant and transpose-symmetric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Token budget and patch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGridSpec {
    pub budget_tokens: u32,
    pub patch_px: u32,
}

impl Default for PatchGridSpec {
    fn default() -> Self {
        PatchGridSpec {
            budget_tokens: 784,
            patch_px: 16,
        }
    }
}

/// A chosen grid: patch counts, budget usage, and the resize target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGrid {
    pub n_w: u32,
    pub n_h: u32,
    pub used_tokens: u32,
    pub padding_tokens: u32,
    pub resized_w: u32,
    pub resized_h: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatchGridError {
    #[error("token budget must be at least 1")]
    InfeasibleBudget,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

/// `floor(sqrt(num/den))` of an exact rational, plus whether the square root
/// is exact.
fn floor_sqrt_ratio(num: u128, den: u128) -> (u128, bool) {
    let floor = (num / den).isqrt();
    let exact = floor * floor * den == num;
    (floor, exact)
}

/// Aspect error of a candidate pair, as the exact rational
/// `max(x, 1/x) >= 1` where `x = (n_w * h) / (n_h * w)`. Comparing these
/// rationals is equivalent to comparing `|ln(x)|`.
#[derive(Debug, Clone, Copy)]
struct AspectError {
    num: u128,
    den: u128,
}

impl AspectError {
    fn of(n_w: u128, n_h: u128, w: u128, h: u128) -> Self {
        let x_num = n_w * h;
        let x_den = n_h * w;
        AspectError {
            num: x_num.max(x_den),
            den: x_num.min(x_den),
        }
    }

    fn cmp(&self, other: &AspectError) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Computes the patch grid for a `w x h` image under `spec`.
pub fn compute_grid(w: u32, h: u32, spec: &PatchGridSpec) -> Result<PatchGrid, PatchGridError> {
    if spec.budget_tokens < 1 {
        return Err(PatchGridError::InfeasibleBudget);
    }
    if w < 1 || h < 1 {
        return Err(PatchGridError::InvalidInput(
            "image dimensions must be at least 1 pixel",
        ));
    }
    if spec.patch_px < 1 {
        return Err(PatchGridError::InvalidInput(
            "patch size must be at least 1 pixel",
        ));
    }

    let budget = spec.budget_tokens as u128;
    let (w, h) = (w as u128, h as u128);

    // Ideal fractional counts are sqrt(L*w/h) and sqrt(L*h/w).
    let (floor_w, exact_w) = floor_sqrt_ratio(budget * w, h);
    let (floor_h, exact_h) = floor_sqrt_ratio(budget * h, w);
    let cand_w = candidates(floor_w, exact_w);
    let cand_h = candidates(floor_h, exact_h);

    let mut best: Option<(u128, u128)> = None;
    for &nw in &cand_w {
        for &nh in &cand_h {
            if nw * nh > budget {
                continue;
            }
            best = Some(match best {
                None => (nw, nh),
                Some(cur) => pick_better(cur, (nw, nh), w, h),
            });
        }
    }

    let (n_w, n_h) = best.unwrap_or_else(|| {
        // Clamping pushed every candidate pair over budget; pin the smaller
        // pixel dimension at its clamped floor and spend the rest.
        if w <= h {
            let nw = floor_w.max(1);
            (nw, budget / nw)
        } else {
            let nh = floor_h.max(1);
            (budget / nh, nh)
        }
    });

    let used = n_w * n_h;
    debug_assert!(used >= 1 && used <= budget);
    let n_w = n_w as u32;
    let n_h = n_h as u32;
    let resized_w = n_w
        .checked_mul(spec.patch_px)
        .ok_or(PatchGridError::InvalidInput("resize target overflows"))?;
    let resized_h = n_h
        .checked_mul(spec.patch_px)
        .ok_or(PatchGridError::InvalidInput("resize target overflows"))?;
    Ok(PatchGrid {
        n_w,
        n_h,
        used_tokens: used as u32,
        padding_tokens: spec.budget_tokens - used as u32,
        resized_w,
        resized_h,
    })
}

fn candidates(floor: u128, exact: bool) -> Vec<u128> {
    let ceil = if exact { floor } else { floor + 1 };
    let mut cands = vec![floor.max(1), ceil.max(1)];
    cands.dedup();
    cands
}

/// Larger product wins; then smaller aspect error; then larger `n_w`.
fn pick_better(a: (u128, u128), b: (u128, u128), w: u128, h: u128) -> (u128, u128) {
    use std::cmp::Ordering;
    match (b.0 * b.1).cmp(&(a.0 * a.1)) {
        Ordering::Greater => return b,
        Ordering::Less => return a,
        Ordering::Equal => {}
    }
    let err_a = AspectError::of(a.0, a.1, w, h);
    let err_b = AspectError::of(b.0, b.1, w, h);
    match err_b.cmp(&err_a) {
        Ordering::Less => b,
        Ordering::Greater => a,
        Ordering::Equal => {
            if b.0 > a.0 {
                b
            } else {
                a
            }
        }
    }
}
