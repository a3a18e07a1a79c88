//! The offline replay loop.
//!
//! For every recorded step the runtime builds the prompt from that step's
//! page, queries the model client, parses the four-section response, judges
//! the action, and moves on to the next recorded page — a mismatch never
//! derails the replay, it is just recorded. History is either chained from
//! the model's own summaries or teacher-forced from ground truth.
//!
//! Episodes are independent units of work: the suite runner executes them
//! under a bounded worker pool and aggregates counts in dataset order, so
//! reports are byte-identical for a deterministic client at any parallelism.

pub mod endpoint;
pub mod scripted;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

use crate::action::{render_action, ActionKind};
use crate::dataset::{Dataset, Episode, VqaItem};
use crate::evaluation::{
    match_step, vqa_scores, EvaluationReport, MatchConfig, MetricsCounts, Sector, StepVerdict,
    VerdictReason, VqaJudgment, VqaMetrics,
};
use crate::protocol::{build_prompt, parse_response, CotResponse, PromptInput};

/// Identifies one model call for transcript keying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepKey<'a> {
    pub episode_id: &'a str,
    pub step_index: usize,
}

/// Terminal failure of a model call, after the client's own retries.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClientError {
    #[error("model call timed out")]
    Timeout,
    #[error("transport failure: {0}")]
    Transport(String),
}

/// Anything that can answer a prompt about a screenshot. Implementations
/// must tolerate concurrent in-flight calls.
pub trait ModelClient: Send + Sync {
    fn complete(&self, key: StepKey<'_>, prompt: &str, image: &[u8])
        -> Result<String, ClientError>;
}

/// How the prompt's history block is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryMode {
    /// The model's own prior summaries, as parsed from its responses.
    Chained,
    /// Ground-truth reference actions rendered in the canonical grammar,
    /// which makes every step's verdict independent of the others.
    TeacherForced,
}

impl HistoryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            HistoryMode::Chained => "chained",
            HistoryMode::TeacherForced => "teacher-forced",
        }
    }
}

/// Replay configuration. `step_timeout` and `retries` are the budgets the
/// CLI hands to endpoint clients; the replay loop itself only reacts to the
/// client's terminal errors.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub history_mode: HistoryMode,
    pub step_timeout: Duration,
    pub retries: u32,
    pub max_parallel_episodes: usize,
    pub matcher: MatchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            history_mode: HistoryMode::Chained,
            step_timeout: Duration::from_secs(30),
            retries: 2,
            max_parallel_episodes: 4,
            matcher: MatchConfig::default(),
        }
    }
}

/// One step's exchange with the model.
#[derive(Debug, Clone)]
pub struct StepTranscript {
    pub prompt: String,
    /// `None` when the client call failed outright.
    pub raw_response: Option<String>,
    pub parsed: Option<CotResponse>,
    pub failure: Option<String>,
}

/// Everything recorded about replaying a single episode.
#[derive(Debug, Clone)]
pub struct IntentionOutcome {
    pub episode_id: String,
    pub step_verdicts: Vec<StepVerdict>,
    pub terminal_ok: bool,
    pub timed_out: bool,
    pub transcript: Vec<StepTranscript>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("empty dataset")]
    EmptyDataset,
}

/// Replays one episode. Never errors: timeouts, transport failures,
/// unparseable responses, and mismatches are all encoded in the outcome.
/// A response that fails to parse is judged a type mismatch.
pub fn run_episode(
    episode: &Episode,
    client: &dyn ModelClient,
    cfg: &RunConfig,
    screenshot_root: &Path,
) -> IntentionOutcome {
    let mut outcome = IntentionOutcome {
        episode_id: episode.id.clone(),
        step_verdicts: Vec::with_capacity(episode.steps.len()),
        terminal_ok: false,
        timed_out: false,
        transcript: Vec::with_capacity(episode.steps.len()),
    };
    let mut chained_history: Vec<String> = Vec::new();

    for (i, step) in episode.steps.iter().enumerate() {
        let history = match cfg.history_mode {
            HistoryMode::Chained => chained_history.clone(),
            HistoryMode::TeacherForced => episode.steps[..i]
                .iter()
                .map(|s| render_action(&s.ground_truth.to_reference_action()))
                .collect(),
        };
        let prompt = build_prompt(&PromptInput {
            image_ref: step.screenshot.clone(),
            task: episode.instruction.clone(),
            elements: step.elements.clone(),
            history,
        });
        let image = std::fs::read(screenshot_root.join(&step.screenshot)).unwrap_or_default();
        let key = StepKey {
            episode_id: &episode.id,
            step_index: i,
        };
        let raw = match client.complete(key, &prompt, &image) {
            Ok(raw) => raw,
            Err(e) => {
                outcome.timed_out = true;
                outcome.transcript.push(StepTranscript {
                    prompt,
                    raw_response: None,
                    parsed: None,
                    failure: Some(e.to_string()),
                });
                break;
            }
        };
        match parse_response(&raw) {
            Ok(response) => {
                let verdict = match_step(&response.action, &step.ground_truth, &cfg.matcher);
                outcome.step_verdicts.push(verdict);
                if cfg.history_mode == HistoryMode::Chained {
                    chained_history.push(response.summary.clone());
                }
                outcome.transcript.push(StepTranscript {
                    prompt,
                    raw_response: Some(raw),
                    parsed: Some(response),
                    failure: None,
                });
            }
            Err(e) => {
                outcome
                    .step_verdicts
                    .push(StepVerdict::fail(VerdictReason::TypeMismatch));
                outcome.transcript.push(StepTranscript {
                    prompt,
                    raw_response: Some(raw),
                    parsed: None,
                    failure: Some(e.to_string()),
                });
            }
        }
    }

    outcome.terminal_ok = !outcome.timed_out
        && outcome.step_verdicts.len() == episode.steps.len()
        && outcome.step_verdicts.iter().all(|v| v.matched)
        && outcome
            .transcript
            .last()
            .and_then(|t| t.parsed.as_ref())
            .map(|r| r.action.kind() == ActionKind::TaskFinish)
            .unwrap_or(false);
    outcome
}

/// Per-episode counts. A whole-task success needs every recorded step judged
/// and matched; timed-out episodes contribute only the steps they actually
/// reached to the SSR denominators.
pub fn outcome_counts(total_steps: usize, outcome: &IntentionOutcome) -> MetricsCounts {
    let matched = outcome.step_verdicts.iter().filter(|v| v.matched).count() as u64;
    let complete = !outcome.timed_out
        && outcome.step_verdicts.len() == total_steps
        && outcome.step_verdicts.iter().all(|v| v.matched);
    MetricsCounts {
        all_intentions: 1,
        timeout_intentions: outcome.timed_out as u64,
        success_intentions: complete as u64,
        success_terminal_intentions: (complete && outcome.terminal_ok) as u64,
        all_steps: outcome.step_verdicts.len() as u64,
        success_steps: matched,
    }
}

/// Folds outcomes into the sector-by-bucket report grid. Input order fixes
/// nothing but determinism of iteration; the merge itself is commutative.
pub fn aggregate_outcomes<'a>(
    items: impl IntoIterator<Item = (Sector, usize, &'a IntentionOutcome)>,
    history_mode: &str,
) -> Result<EvaluationReport, RunError> {
    let mut report = EvaluationReport::new(history_mode);
    let mut any = false;
    for (sector, total_steps, outcome) in items {
        any = true;
        let counts = outcome_counts(total_steps, outcome);
        report.add(sector, crate::evaluation::bucket(total_steps), &counts);
    }
    if !any {
        return Err(RunError::EmptyDataset);
    }
    Ok(report)
}

/// Replays every episode under bounded parallelism and aggregates the
/// report. Deterministic for a deterministic client regardless of
/// scheduling: outcomes land in dataset order before aggregation.
pub fn run_suite(
    dataset: &Dataset,
    client: &dyn ModelClient,
    cfg: &RunConfig,
) -> Result<EvaluationReport, RunError> {
    if dataset.episodes.is_empty() {
        return Err(RunError::EmptyDataset);
    }
    let outcomes = run_all_episodes(dataset, client, cfg);
    aggregate_outcomes(
        dataset
            .episodes
            .iter()
            .zip(&outcomes)
            .map(|(e, o)| (e.sector, e.steps.len(), o)),
        cfg.history_mode.as_str(),
    )
}

/// Replays all episodes and returns outcomes in dataset order.
pub fn run_all_episodes(
    dataset: &Dataset,
    client: &dyn ModelClient,
    cfg: &RunConfig,
) -> Vec<IntentionOutcome> {
    let episodes = &dataset.episodes;
    let workers = cfg.max_parallel_episodes.max(1).min(episodes.len().max(1));
    let slots: Mutex<Vec<Option<IntentionOutcome>>> =
        Mutex::new((0..episodes.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= episodes.len() {
                    break;
                }
                let outcome = run_episode(&episodes[i], client, cfg, &dataset.root);
                slots.lock().expect("no poisoned slots")[i] = Some(outcome);
            });
        }
    });

    slots
        .into_inner()
        .expect("no poisoned slots")
        .into_iter()
        .map(|o| o.expect("every episode ran"))
        .collect()
}

/// Runs the VQA items: the question becomes the prompt task, the parsed
/// `ANSWER` text becomes the prediction. Client failures, unparseable
/// responses, and non-answer actions score as empty predictions.
pub fn run_vqa_suite(
    items: &[VqaItem],
    client: &dyn ModelClient,
    cfg: &RunConfig,
    screenshot_root: &Path,
) -> Result<VqaMetrics, RunError> {
    if items.is_empty() {
        return Err(RunError::EmptyDataset);
    }
    let _ = cfg;
    let mut judgments = Vec::with_capacity(items.len());
    for item in items {
        let prompt = build_prompt(&PromptInput {
            image_ref: item.screenshot.clone(),
            task: item.question.clone(),
            elements: Vec::new(),
            history: Vec::new(),
        });
        let image = std::fs::read(screenshot_root.join(&item.screenshot)).unwrap_or_default();
        let key = StepKey {
            episode_id: &item.id,
            step_index: 0,
        };
        let predicted = match client.complete(key, &prompt, &image) {
            Ok(raw) => match parse_response(&raw) {
                Ok(CotResponse {
                    action: crate::action::Action::Answer { text },
                    ..
                }) => text,
                _ => String::new(),
            },
            Err(_) => String::new(),
        };
        judgments.push(VqaJudgment {
            predicted,
            reference: item.reference_answer.clone(),
        });
    }
    vqa_scores(&judgments).map_err(|_| RunError::EmptyDataset)
}
