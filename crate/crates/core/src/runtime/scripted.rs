//! The scripted model client: responses read from a transcript file keyed by
//! `(episode_id, step_index)`. This is the no-network client used in tests,
//! CI, and the bundled fixtures.
//!
//! A transcript is JSON lines, one record per call:
//!
//! ```text
//! {"episode_id":"ep1","step_index":0,"response":"<observation>: ..."}
//! ```
//!
//! VQA items are keyed by their item id with step index 0.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ClientError, ModelClient, StepKey};
use crate::action::render_action;
use crate::dataset::{Episode, VqaItem};
use crate::protocol::render_response;

/// One scripted exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptLine {
    pub episode_id: String,
    pub step_index: usize,
    pub response: String,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: bad transcript record: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("duplicate transcript key ({episode_id}, {step_index})")]
    DuplicateKey {
        episode_id: String,
        step_index: usize,
    },
}

/// Replays canned responses from a transcript; a missing key is a transport
/// error, which the replay loop records as a timeout outcome.
#[derive(Debug, Clone, Default)]
pub struct ScriptedClient {
    responses: HashMap<(String, usize), String>,
}

impl ScriptedClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lines(lines: impl IntoIterator<Item = ScriptLine>) -> Result<Self, ScriptError> {
        let mut client = Self::new();
        for line in lines {
            client.insert(line)?;
        }
        Ok(client)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScriptError> {
        let file_name = path.display().to_string();
        let text = std::fs::read_to_string(path)?;
        let mut client = Self::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ScriptLine =
                serde_json::from_str(line).map_err(|e| ScriptError::Parse {
                    file: file_name.clone(),
                    line: line_no + 1,
                    reason: e.to_string(),
                })?;
            client.insert(record)?;
        }
        Ok(client)
    }

    pub fn insert(&mut self, line: ScriptLine) -> Result<(), ScriptError> {
        let key = (line.episode_id.clone(), line.step_index);
        if self.responses.insert(key, line.response).is_some() {
            return Err(ScriptError::DuplicateKey {
                episode_id: line.episode_id,
                step_index: line.step_index,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl ModelClient for ScriptedClient {
    fn complete(
        &self,
        key: StepKey<'_>,
        _prompt: &str,
        _image: &[u8],
    ) -> Result<String, ClientError> {
        self.responses
            .get(&(key.episode_id.to_string(), key.step_index))
            .cloned()
            .ok_or_else(|| {
                ClientError::Transport(format!(
                    "no scripted response for ({}, {})",
                    key.episode_id, key.step_index
                ))
            })
    }
}

/// Writes script lines as a transcript file, one JSON record per line.
pub fn write_transcript(lines: &[ScriptLine], path: &Path) -> Result<(), ScriptError> {
    let mut out = String::new();
    for line in lines {
        out.push_str(&serde_json::to_string(line).expect("script line serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Perfect-play transcript: every step answers with the ground truth's
/// reference action wrapped in a well-formed four-section response.
pub fn oracle_transcript(episodes: &[Episode]) -> Vec<ScriptLine> {
    let mut lines = Vec::new();
    for episode in episodes {
        for (i, step) in episode.steps.iter().enumerate() {
            let action = step.ground_truth.to_reference_action();
            let action_text = render_action(&action);
            let response = render_response(&crate::protocol::CotResponse {
                observation: format!("Page {} of {} for this task.", i + 1, episode.steps.len()),
                reasoning: format!("The recorded flow continues with {action_text}."),
                action_text: action_text.clone(),
                summary: format!("Executed {action_text} toward the goal."),
                action,
            });
            lines.push(ScriptLine {
                episode_id: episode.id.clone(),
                step_index: i,
                response,
            });
        }
    }
    lines
}

/// Perfect-play VQA transcript: every item answers with its reference text.
pub fn oracle_vqa_transcript(items: &[VqaItem]) -> Vec<ScriptLine> {
    items
        .iter()
        .map(|item| {
            let action = crate::action::Action::Answer {
                text: item.reference_answer.clone(),
            };
            let action_text = render_action(&action);
            let response = render_response(&crate::protocol::CotResponse {
                observation: "The page answers the question directly.".to_string(),
                reasoning: "Reading the relevant text off the page.".to_string(),
                action_text: action_text.clone(),
                summary: "Answered the question.".to_string(),
                action,
            });
            ScriptLine {
                episode_id: item.id.clone(),
                step_index: 0,
                response,
            }
        })
        .collect()
}

/// Adversary that answers `WAIT(1000)` to everything, wrapped in a valid
/// response; useful as a floor for the metrics.
pub fn always_wait_transcript(episodes: &[Episode]) -> Vec<ScriptLine> {
    let mut lines = Vec::new();
    for episode in episodes {
        for i in 0..episode.steps.len() {
            let action = crate::action::Action::Wait { duration_ms: 1000 };
            let response = render_response(&crate::protocol::CotResponse {
                observation: "A page is on screen.".to_string(),
                reasoning: "Waiting to see what happens.".to_string(),
                action_text: render_action(&action),
                summary: "Waited without acting.".to_string(),
                action,
            });
            lines.push(ScriptLine {
                episode_id: episode.id.clone(),
                step_index: i,
                response,
            });
        }
    }
    lines
}
