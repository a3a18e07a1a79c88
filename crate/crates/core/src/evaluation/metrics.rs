//! Metric counts, the three replay rates, complexity buckets, and VQA
//! scoring.
//!
//! Rates:
//!
//! ```text
//! WTSR = success_intentions          / (all_intentions - timeout_intentions)
//! SSR  = success_steps               / all_steps
//! EDR  = success_terminal_intentions / (all_intentions - timeout_intentions)
//! ```
//!
//! Terminal successes are a subset of whole-task successes, so EDR <= WTSR
//! for any counts this harness produces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty denominator: {0}")]
    EmptyDenominator(&'static str),
    #[error("empty input")]
    EmptyInput,
}

/// Tallies feeding the three rates. Merging is commutative and associative,
/// so per-episode counts can be combined in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsCounts {
    pub all_intentions: u64,
    pub timeout_intentions: u64,
    pub success_intentions: u64,
    pub success_terminal_intentions: u64,
    pub all_steps: u64,
    pub success_steps: u64,
}

impl MetricsCounts {
    pub fn merge(&mut self, other: &MetricsCounts) {
        self.all_intentions += other.all_intentions;
        self.timeout_intentions += other.timeout_intentions;
        self.success_intentions += other.success_intentions;
        self.success_terminal_intentions += other.success_terminal_intentions;
        self.all_steps += other.all_steps;
        self.success_steps += other.success_steps;
    }

    pub fn merged(mut self, other: &MetricsCounts) -> MetricsCounts {
        self.merge(other);
        self
    }

    fn counted_intentions(&self) -> Result<u64, MetricsError> {
        let denom = self.all_intentions.saturating_sub(self.timeout_intentions);
        if denom == 0 {
            Err(MetricsError::EmptyDenominator(
                "no intentions outside the timeout exclusion",
            ))
        } else {
            Ok(denom)
        }
    }

    /// Whole Task Success Rate.
    pub fn wtsr(&self) -> Result<f64, MetricsError> {
        Ok(self.success_intentions as f64 / self.counted_intentions()? as f64)
    }

    /// Step Success Rate.
    pub fn ssr(&self) -> Result<f64, MetricsError> {
        if self.all_steps == 0 {
            return Err(MetricsError::EmptyDenominator("no steps recorded"));
        }
        Ok(self.success_steps as f64 / self.all_steps as f64)
    }

    /// Endpoint Determination Rate.
    pub fn edr(&self) -> Result<f64, MetricsError> {
        Ok(self.success_terminal_intentions as f64 / self.counted_intentions()? as f64)
    }
}

/// Task complexity by recorded step count: short is at most 4 steps, long is
/// more than 8, middle is everything between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComplexityBucket {
    Short,
    Middle,
    Long,
}

impl ComplexityBucket {
    pub const ALL: [ComplexityBucket; 3] = [
        ComplexityBucket::Short,
        ComplexityBucket::Middle,
        ComplexityBucket::Long,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ComplexityBucket::Short => "Short",
            ComplexityBucket::Middle => "Middle",
            ComplexityBucket::Long => "Long",
        }
    }
}

pub fn bucket(steps: usize) -> ComplexityBucket {
    if steps <= 4 {
        ComplexityBucket::Short
    } else if steps <= 8 {
        ComplexityBucket::Middle
    } else {
        ComplexityBucket::Long
    }
}

/// Trim, collapse internal whitespace runs to one space, and case-fold.
/// Shared by action text matching and VQA scoring.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// One scored VQA item: the model's answer and the reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaJudgment {
    pub predicted: String,
    pub reference: String,
}

/// Recall, accuracy, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqaMetrics {
    pub recall: f64,
    pub accuracy: f64,
    pub f_score: f64,
}

impl VqaMetrics {
    /// Builds the triple, deriving `f_score = 2ra/(r+a)` (0 when both are 0).
    pub fn from_recall_accuracy(recall: f64, accuracy: f64) -> Self {
        let f_score = if recall + accuracy == 0.0 {
            0.0
        } else {
            2.0 * recall * accuracy / (recall + accuracy)
        };
        VqaMetrics {
            recall,
            accuracy,
            f_score,
        }
    }
}

/// Scores VQA judgments. Accuracy is the fraction of normalized exact
/// matches; recall averages, per item, the fraction of reference tokens
/// (whitespace-split after normalization) that appear among the prediction's
/// tokens.
pub fn vqa_scores(judgments: &[VqaJudgment]) -> Result<VqaMetrics, MetricsError> {
    if judgments.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut exact = 0usize;
    let mut recall_sum = 0.0f64;
    for j in judgments {
        let pred = normalize_text(&j.predicted);
        let reference = normalize_text(&j.reference);
        if pred == reference {
            exact += 1;
        }
        let ref_tokens: Vec<&str> = reference.split_whitespace().collect();
        if ref_tokens.is_empty() {
            // Degenerate reference; count full recall only on an exact match.
            recall_sum += if pred == reference { 1.0 } else { 0.0 };
            continue;
        }
        let pred_tokens: std::collections::HashSet<&str> = pred.split_whitespace().collect();
        let present = ref_tokens
            .iter()
            .filter(|t| pred_tokens.contains(**t))
            .count();
        recall_sum += present as f64 / ref_tokens.len() as f64;
    }
    let accuracy = exact as f64 / judgments.len() as f64;
    let recall = recall_sum / judgments.len() as f64;
    Ok(VqaMetrics::from_recall_accuracy(recall, accuracy))
}
