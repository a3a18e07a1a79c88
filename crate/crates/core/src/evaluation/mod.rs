//! Judging predicted actions against ground truth and aggregating the
//! replay metrics: whole-task success (WTSR), step success (SSR), and
//! endpoint determination (EDR), broken out by business sector and task
//! complexity, plus the VQA recall/accuracy/F-score triple.

mod matching;
mod metrics;
mod report;

pub use matching::{match_step, Direction, GroundTruth, MatchConfig, StepVerdict, VerdictReason};
pub use metrics::{
    bucket, normalize_text, vqa_scores, ComplexityBucket, MetricsCounts, MetricsError, VqaJudgment,
    VqaMetrics,
};
pub use report::{EvaluationReport, ReportCell, ReportError, Sector};

pub use crate::geometry::iou;
