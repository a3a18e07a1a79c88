//! Per-step verdicts: does a predicted action match the recorded truth?
//!
//! The matching rules, by ground-truth kind:
//!
//! * Click / LongPress — the predicted point must land inside the target
//!   box (edges inclusive), or the point dilated to a small square must
//!   reach the IoU threshold against it.
//! * Scroll / Drag — the bounding box of the predicted path (zero-extent
//!   axes dilated so straight swipes have area) must reach the IoU threshold
//!   against the recorded path box, and the dominant axis of `last - first`
//!   must point in the recorded direction.
//! * Input / Answer — normalized text equality (trim, collapse internal
//!   whitespace, case-fold).
//! * Wait / TaskFinish — the type match alone suffices.
//!
//! A type mismatch dominates every other failure cause, and a response that
//! does not parse into any action at all is judged a type mismatch by the
//! replay loop.

use serde::{Deserialize, Serialize};

use super::metrics::normalize_text;
use crate::action::{Action, ActionKind};
use crate::geometry::{iou, BBox, Point};

/// Swipe direction on screen; y grows downward, so a scroll whose path moves
/// toward smaller y is `Up`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

/// Reference data for one recorded step, shaped by the action kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Click { target_box: BBox },
    LongPress { target_box: BBox },
    Input { text: String },
    Scroll { path_box: BBox, direction: Direction },
    Drag { path_box: BBox, direction: Direction },
    Wait,
    Answer { text: String },
    TaskFinish,
}

impl GroundTruth {
    pub fn kind(&self) -> ActionKind {
        match self {
            GroundTruth::Click { .. } => ActionKind::Click,
            GroundTruth::LongPress { .. } => ActionKind::LongPress,
            GroundTruth::Input { .. } => ActionKind::Input,
            GroundTruth::Scroll { .. } => ActionKind::Scroll,
            GroundTruth::Drag { .. } => ActionKind::Drag,
            GroundTruth::Wait => ActionKind::Wait,
            GroundTruth::Answer { .. } => ActionKind::Answer,
            GroundTruth::TaskFinish => ActionKind::TaskFinish,
        }
    }

    /// Synthesizes an action that this ground truth accepts; used for
    /// teacher-forced history lines and for oracle transcripts.
    ///
    /// Boxes become their center point; path boxes become a corner-touching
    /// path whose endpoints move in the recorded direction.
    pub fn to_reference_action(&self) -> Action {
        match self {
            GroundTruth::Click { target_box } => Action::Click {
                point: target_box.center(),
            },
            GroundTruth::LongPress { target_box } => Action::LongPress {
                point: target_box.center(),
            },
            GroundTruth::Input { text } => Action::Input { text: text.clone() },
            GroundTruth::Scroll { path_box, direction } => Action::Scroll {
                path: reference_path(path_box, *direction),
            },
            GroundTruth::Drag { path_box, direction } => Action::Drag {
                path: reference_path(path_box, *direction),
            },
            GroundTruth::Wait => Action::Wait { duration_ms: 1000 },
            GroundTruth::Answer { text } => Action::Answer { text: text.clone() },
            GroundTruth::TaskFinish => Action::TaskFinish,
        }
    }
}

/// Three points that span the whole path box while the first-to-last vector
/// points in `direction` regardless of the box's shape.
fn reference_path(path_box: &BBox, direction: Direction) -> Vec<Point> {
    let (l, t, r, b) = (
        path_box.left,
        path_box.top,
        path_box.right,
        path_box.bottom,
    );
    match direction {
        Direction::Up => vec![Point::new(l, b), Point::new(r, b), Point::new(l, t)],
        Direction::Down => vec![Point::new(l, t), Point::new(r, t), Point::new(l, b)],
        Direction::Left => vec![Point::new(r, t), Point::new(r, b), Point::new(l, t)],
        Direction::Right => vec![Point::new(l, t), Point::new(l, b), Point::new(r, t)],
    }
}

/// Why a step verdict came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictReason {
    Ok,
    TypeMismatch,
    IouBelowThreshold,
    TextMismatch,
    DirectionMismatch,
}

/// Outcome of judging one step. `matched` holds exactly when the reason is
/// [`VerdictReason::Ok`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub matched: bool,
    pub reason: VerdictReason,
}

impl StepVerdict {
    pub fn ok() -> Self {
        StepVerdict {
            matched: true,
            reason: VerdictReason::Ok,
        }
    }

    pub fn fail(reason: VerdictReason) -> Self {
        debug_assert!(reason != VerdictReason::Ok);
        StepVerdict {
            matched: false,
            reason,
        }
    }
}

/// Matching knobs; defaults follow the detection convention of IoU >= 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub iou_threshold: f64,
    /// Dilation radius that turns predicted points and degenerate path boxes
    /// into measurable areas.
    pub point_box_px: u32,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            iou_threshold: 0.5,
            point_box_px: 1,
        }
    }
}

/// Judges one predicted action against the recorded truth. Total and
/// deterministic; never errors.
pub fn match_step(pred: &Action, gt: &GroundTruth, cfg: &MatchConfig) -> StepVerdict {
    if pred.kind() != gt.kind() {
        return StepVerdict::fail(VerdictReason::TypeMismatch);
    }
    match (pred, gt) {
        (Action::Click { point }, GroundTruth::Click { target_box })
        | (Action::LongPress { point }, GroundTruth::LongPress { target_box }) => {
            if target_box.contains(*point) {
                return StepVerdict::ok();
            }
            let dilated = BBox::around_point(*point, cfg.point_box_px);
            if iou::<f64>(&dilated, target_box) >= cfg.iou_threshold {
                StepVerdict::ok()
            } else {
                StepVerdict::fail(VerdictReason::IouBelowThreshold)
            }
        }
        (Action::Scroll { path }, GroundTruth::Scroll { path_box, direction })
        | (Action::Drag { path }, GroundTruth::Drag { path_box, direction }) => {
            let Some(pred_box) = BBox::around_path(path, cfg.point_box_px) else {
                return StepVerdict::fail(VerdictReason::IouBelowThreshold);
            };
            if iou::<f64>(&pred_box, path_box) < cfg.iou_threshold {
                return StepVerdict::fail(VerdictReason::IouBelowThreshold);
            }
            match dominant_direction(path) {
                Some(d) if d == *direction => StepVerdict::ok(),
                _ => StepVerdict::fail(VerdictReason::DirectionMismatch),
            }
        }
        (Action::Input { text: pred_text }, GroundTruth::Input { text })
        | (Action::Answer { text: pred_text }, GroundTruth::Answer { text }) => {
            if normalize_text(pred_text) == normalize_text(text) {
                StepVerdict::ok()
            } else {
                StepVerdict::fail(VerdictReason::TextMismatch)
            }
        }
        (Action::Wait { .. }, GroundTruth::Wait)
        | (Action::TaskFinish, GroundTruth::TaskFinish) => StepVerdict::ok(),
        // Kinds agreed above, so every pairing is covered.
        _ => unreachable!("action kinds matched but variants diverged"),
    }
}

/// Sign of the dominant axis of `last - first`; vertical wins exact-magnitude
/// ties, and a zero displacement has no direction.
fn dominant_direction(path: &[Point]) -> Option<Direction> {
    let first = path.first()?;
    let last = path.last()?;
    let dx = last.x as i64 - first.x as i64;
    let dy = last.y as i64 - first.y as i64;
    if dx == 0 && dy == 0 {
        return None;
    }
    if dx.abs() > dy.abs() {
        Some(if dx > 0 {
            Direction::Right
        } else {
            Direction::Left
        })
    } else {
        Some(if dy > 0 { Direction::Down } else { Direction::Up })
    }
}
