//! Dataset ingestion, validation, and persistence.
//!
//! A dataset is one `.jsonl` file or a directory of them (loaded in name
//! order). Every file starts with a header record carrying the format
//! version; each following line is one episode or one VQA item:
//!
//! ```text
//! {"kind":"header","version":1}
//! {"kind":"episode","id":"...","sector":"...","instruction":"...","steps":[...]}
//! {"kind":"vqa","id":"...","screenshot":"...","question":"...","reference_answer":"..."}
//! ```
//!
//! Screenshot paths are relative to the dataset root (the directory given,
//! or the file's parent). Missing screenshots are warnings unless strict
//! mode is on; the harness never decodes pixels, it only forwards bytes.
//! The full field table lives in `docs/dataset-format.md`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionKind;
use crate::evaluation::{bucket, ComplexityBucket, GroundTruth, Sector};
use crate::geometry::UiElement;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{file}:{line}: parse error: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("episode {episode_id}: {detail}")]
    InvariantViolation { episode_id: String, detail: String },
    #[error("missing screenshot {path}")]
    MissingScreenshot { path: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One recorded step: the page as the agent saw it plus the recorded truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub index: usize,
    pub screenshot: String,
    pub width: u32,
    pub height: u32,
    pub elements: Vec<UiElement>,
    pub ground_truth: GroundTruth,
    pub is_final: bool,
}

/// One recorded trajectory for a single instruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub id: String,
    pub sector: Sector,
    pub instruction: String,
    pub steps: Vec<Step>,
}

impl Episode {
    pub fn bucket(&self) -> ComplexityBucket {
        bucket(self.steps.len())
    }
}

/// One screenshot question with its reference answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaItem {
    pub id: String,
    pub screenshot: String,
    pub question: String,
    pub reference_answer: String,
}

/// An immutable loaded dataset snapshot.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub episodes: Vec<Episode>,
    pub vqa_items: Vec<VqaItem>,
    /// Base directory for resolving screenshot paths.
    pub root: PathBuf,
    /// Non-fatal findings from loading (missing screenshots in lenient mode).
    pub warnings: Vec<String>,
}

impl Dataset {
    pub fn screenshot_path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Header {
        version: u32,
    },
    Episode {
        id: String,
        sector: Sector,
        instruction: String,
        steps: Vec<Step>,
    },
    Vqa {
        id: String,
        screenshot: String,
        question: String,
        reference_answer: String,
    },
}

fn dataset_files(path: &Path) -> Result<(PathBuf, Vec<PathBuf>), DatasetError> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().map(|x| x == "jsonl").unwrap_or(false))
            .collect();
        files.sort();
        Ok((path.to_path_buf(), files))
    } else {
        let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((root, vec![path.to_path_buf()]))
    }
}

/// Loads and fully validates a dataset. The first violated invariant or
/// parse failure aborts the load; missing screenshots abort only in strict
/// mode and are collected as warnings otherwise.
pub fn load_dataset(path: &Path, strict: bool) -> Result<Dataset, DatasetError> {
    let (root, files) = dataset_files(path)?;
    let mut dataset = Dataset {
        episodes: Vec::new(),
        vqa_items: Vec::new(),
        root,
        warnings: Vec::new(),
    };
    let mut episode_ids = HashSet::new();
    let mut vqa_ids = HashSet::new();

    for file in &files {
        let file_name = file.display().to_string();
        let text = std::fs::read_to_string(file)?;
        let mut saw_header = false;
        for (line_no, line) in text.lines().enumerate() {
            let line_no = line_no + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(line).map_err(|e| DatasetError::Parse {
                    file: file_name.clone(),
                    line: line_no,
                    reason: e.to_string(),
                })?;
            match record {
                Record::Header { version } => {
                    if version != FORMAT_VERSION {
                        return Err(DatasetError::Parse {
                            file: file_name.clone(),
                            line: line_no,
                            reason: format!(
                                "unsupported format version {version}, expected {FORMAT_VERSION}"
                            ),
                        });
                    }
                    saw_header = true;
                }
                Record::Episode {
                    id,
                    sector,
                    instruction,
                    steps,
                } => {
                    require_header(saw_header, &file_name, line_no)?;
                    let episode = Episode {
                        id,
                        sector,
                        instruction,
                        steps,
                    };
                    validate_episode(&episode)?;
                    if !episode_ids.insert(episode.id.clone()) {
                        return Err(DatasetError::InvariantViolation {
                            episode_id: episode.id,
                            detail: "duplicate episode id".to_string(),
                        });
                    }
                    check_screenshots(&dataset.root, &episode, strict, &mut dataset.warnings)?;
                    dataset.episodes.push(episode);
                }
                Record::Vqa {
                    id,
                    screenshot,
                    question,
                    reference_answer,
                } => {
                    require_header(saw_header, &file_name, line_no)?;
                    let item = VqaItem {
                        id,
                        screenshot,
                        question,
                        reference_answer,
                    };
                    validate_vqa_item(&item)?;
                    if !vqa_ids.insert(item.id.clone()) {
                        return Err(DatasetError::InvariantViolation {
                            episode_id: item.id,
                            detail: "duplicate vqa item id".to_string(),
                        });
                    }
                    check_vqa_screenshot(&dataset.root, &item, strict, &mut dataset.warnings)?;
                    dataset.vqa_items.push(item);
                }
            }
        }
        if !saw_header {
            return Err(DatasetError::Parse {
                file: file_name,
                line: 1,
                reason: "missing header record".to_string(),
            });
        }
    }
    Ok(dataset)
}

fn require_header(saw: bool, file: &str, line: usize) -> Result<(), DatasetError> {
    if saw {
        Ok(())
    } else {
        Err(DatasetError::Parse {
            file: file.to_string(),
            line,
            reason: "records before the header".to_string(),
        })
    }
}

fn validate_episode(episode: &Episode) -> Result<(), DatasetError> {
    let fail = |detail: String| {
        Err(DatasetError::InvariantViolation {
            episode_id: episode.id.clone(),
            detail,
        })
    };
    if episode.id.is_empty() {
        return fail("empty id".to_string());
    }
    if episode.steps.is_empty() {
        return fail("no steps".to_string());
    }
    for (i, step) in episode.steps.iter().enumerate() {
        if step.index != i {
            return fail(format!(
                "step indexes must be contiguous from 0; found {} at position {i}",
                step.index
            ));
        }
        if step.width < 1 || step.height < 1 {
            return fail(format!("step {i}: empty screenshot dimensions"));
        }
        for element in &step.elements {
            if element.bounds.right > step.width || element.bounds.bottom > step.height {
                return fail(format!(
                    "step {i}: element box [{},{},{},{}] exceeds the {}x{} screenshot",
                    element.bounds.left,
                    element.bounds.top,
                    element.bounds.right,
                    element.bounds.bottom,
                    step.width,
                    step.height
                ));
            }
        }
        let last = i == episode.steps.len() - 1;
        if step.is_final != last {
            return fail(format!(
                "exactly the last step must be final; step {i} has is_final={}",
                step.is_final
            ));
        }
    }
    let final_step = episode.steps.last().expect("nonempty");
    if final_step.ground_truth.kind() != ActionKind::TaskFinish {
        return fail("final step's ground truth must be task_finish".to_string());
    }
    Ok(())
}

fn validate_vqa_item(item: &VqaItem) -> Result<(), DatasetError> {
    if item.question.trim().is_empty() || item.reference_answer.trim().is_empty() {
        return Err(DatasetError::InvariantViolation {
            episode_id: item.id.clone(),
            detail: "vqa items need a nonempty question and reference answer".to_string(),
        });
    }
    Ok(())
}

fn check_screenshots(
    root: &Path,
    episode: &Episode,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<(), DatasetError> {
    for step in &episode.steps {
        check_screenshot(root, &step.screenshot, strict, warnings)?;
    }
    Ok(())
}

fn check_vqa_screenshot(
    root: &Path,
    item: &VqaItem,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<(), DatasetError> {
    check_screenshot(root, &item.screenshot, strict, warnings)
}

fn check_screenshot(
    root: &Path,
    relative: &str,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<(), DatasetError> {
    if root.join(relative).is_file() {
        return Ok(());
    }
    if strict {
        return Err(DatasetError::MissingScreenshot {
            path: relative.to_string(),
        });
    }
    warnings.push(format!("missing screenshot {relative}"));
    Ok(())
}

/// Writes a dataset in canonical form: header first, episodes, then VQA
/// items, one compact record per line. Byte-stable, and `load` of the output
/// reproduces the input.
pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut out = String::new();
    let header = Record::Header {
        version: FORMAT_VERSION,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for episode in &dataset.episodes {
        let record = Record::Episode {
            id: episode.id.clone(),
            sector: episode.sector,
            instruction: episode.instruction.clone(),
            steps: episode.steps.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("episode serializes"));
        out.push('\n');
    }
    for item in &dataset.vqa_items {
        let record = Record::Vqa {
            id: item.id.clone(),
            screenshot: item.screenshot.clone(),
            question: item.question.clone(),
            reference_answer: item.reference_answer.clone(),
        };
        out.push_str(&serde_json::to_string(&record).expect("vqa item serializes"));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Findings from a non-aborting validation pass.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub episodes: usize,
    pub vqa_items: usize,
    pub per_sector: Vec<(Sector, usize)>,
    pub per_bucket: Vec<(ComplexityBucket, usize)>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "episodes: {}", self.episodes);
        let _ = writeln!(out, "vqa items: {}", self.vqa_items);
        for (sector, n) in &self.per_sector {
            let _ = writeln!(out, "sector {}: {}", sector.token(), n);
        }
        for (bucket, n) in &self.per_bucket {
            let _ = writeln!(out, "bucket {}: {}", bucket.name(), n);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        out
    }
}

/// Validates a dataset without aborting on the first problem: every parse
/// error and invariant violation is collected into the report.
pub fn validate_dataset(path: &Path, strict: bool) -> Result<ValidationReport, DatasetError> {
    let (root, files) = dataset_files(path)?;
    let mut report = ValidationReport::default();
    let mut episode_ids = HashSet::new();
    let mut vqa_ids = HashSet::new();
    let mut sector_counts = vec![0usize; Sector::ALL.len()];
    let mut bucket_counts = vec![0usize; ComplexityBucket::ALL.len()];

    for file in &files {
        let file_name = file.display().to_string();
        let text = match std::fs::read_to_string(file) {
            Ok(t) => t,
            Err(e) => {
                report.errors.push(format!("{file_name}: {e}"));
                continue;
            }
        };
        let mut saw_header = false;
        for (line_no, line) in text.lines().enumerate() {
            let line_no = line_no + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = match serde_json::from_str(line) {
                Ok(r) => r,
                Err(e) => {
                    report
                        .errors
                        .push(format!("{file_name}:{line_no}: parse error: {e}"));
                    continue;
                }
            };
            match record {
                Record::Header { version } => {
                    if version != FORMAT_VERSION {
                        report.errors.push(format!(
                            "{file_name}:{line_no}: unsupported format version {version}"
                        ));
                    }
                    saw_header = true;
                }
                Record::Episode {
                    id,
                    sector,
                    instruction,
                    steps,
                } => {
                    if !saw_header {
                        report
                            .errors
                            .push(format!("{file_name}:{line_no}: records before the header"));
                    }
                    let episode = Episode {
                        id,
                        sector,
                        instruction,
                        steps,
                    };
                    if let Err(e) = validate_episode(&episode) {
                        report.errors.push(e.to_string());
                        continue;
                    }
                    if !episode_ids.insert(episode.id.clone()) {
                        report
                            .errors
                            .push(format!("episode {}: duplicate episode id", episode.id));
                        continue;
                    }
                    if let Err(e) =
                        check_screenshots(&root, &episode, strict, &mut report.warnings)
                    {
                        report.errors.push(e.to_string());
                    }
                    report.episodes += 1;
                    let sector_idx = Sector::ALL.iter().position(|s| *s == episode.sector);
                    sector_counts[sector_idx.expect("sector enumerated")] += 1;
                    let bucket_idx = ComplexityBucket::ALL
                        .iter()
                        .position(|b| *b == episode.bucket());
                    bucket_counts[bucket_idx.expect("bucket enumerated")] += 1;
                }
                Record::Vqa {
                    id,
                    screenshot,
                    question,
                    reference_answer,
                } => {
                    if !saw_header {
                        report
                            .errors
                            .push(format!("{file_name}:{line_no}: records before the header"));
                    }
                    let item = VqaItem {
                        id,
                        screenshot,
                        question,
                        reference_answer,
                    };
                    if let Err(e) = validate_vqa_item(&item) {
                        report.errors.push(e.to_string());
                        continue;
                    }
                    if !vqa_ids.insert(item.id.clone()) {
                        report
                            .errors
                            .push(format!("vqa item {}: duplicate id", item.id));
                        continue;
                    }
                    if let Err(e) =
                        check_vqa_screenshot(&root, &item, strict, &mut report.warnings)
                    {
                        report.errors.push(e.to_string());
                    }
                    report.vqa_items += 1;
                }
            }
        }
        if !saw_header && !text.trim().is_empty() {
            report
                .errors
                .push(format!("{file_name}: missing header record"));
        }
    }

    report.per_sector = Sector::ALL
        .iter()
        .copied()
        .zip(sector_counts)
        .collect();
    report.per_bucket = ComplexityBucket::ALL
        .iter()
        .copied()
        .zip(bucket_counts)
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BBox;

    fn finish_step(index: usize, is_final: bool) -> Step {
        Step {
            index,
            screenshot: "shots/blank.png".to_string(),
            width: 1080,
            height: 1920,
            elements: vec![UiElement::new(
                "Done",
                BBox::new(10, 10, 200, 80).unwrap(),
            )],
            ground_truth: GroundTruth::TaskFinish,
            is_final,
        }
    }

    fn click_step(index: usize) -> Step {
        Step {
            index,
            screenshot: "shots/blank.png".to_string(),
            width: 1080,
            height: 1920,
            elements: vec![],
            ground_truth: GroundTruth::Click {
                target_box: BBox::new(100, 100, 300, 200).unwrap(),
            },
            is_final: false,
        }
    }

    fn write_lines(dir: &Path, name: &str, lines: &[String]) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        path
    }

    fn header_line() -> String {
        format!("{{\"kind\":\"header\",\"version\":{FORMAT_VERSION}}}")
    }

    fn episode_line(id: &str, steps: &[Step]) -> String {
        let record = Record::Episode {
            id: id.to_string(),
            sector: Sector::Gaming,
            instruction: "do the thing".to_string(),
            steps: steps.to_vec(),
        };
        serde_json::to_string(&record).unwrap()
    }

    #[test]
    fn minimal_episode_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[header_line(), episode_line("ep1", &[finish_step(0, true)])],
        );
        let ds = load_dataset(&path, false).unwrap();
        assert_eq!(ds.episodes.len(), 1);
        assert_eq!(ds.episodes[0].steps.len(), 1);
        // Screenshot is absent, so lenient mode warns.
        assert!(!ds.warnings.is_empty());
    }

    #[test]
    fn non_final_last_step_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                header_line(),
                episode_line("ep1", &[click_step(0), finish_step(1, false)]),
            ],
        );
        let err = load_dataset(&path, false).unwrap_err();
        assert!(matches!(err, DatasetError::InvariantViolation { .. }), "{err}");
    }

    #[test]
    fn duplicate_episode_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let line = episode_line("ep1", &[finish_step(0, true)]);
        let path = write_lines(dir.path(), "d.jsonl", &[header_line(), line.clone(), line]);
        let err = load_dataset(&path, false).unwrap_err();
        assert!(err.to_string().contains("duplicate episode id"), "{err}");
    }

    #[test]
    fn corrupt_line_is_a_parse_error_with_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[header_line(), "{not json".to_string()],
        );
        let err = load_dataset(&path, false).unwrap_err();
        match err {
            DatasetError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn missing_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[episode_line("ep1", &[finish_step(0, true)])],
        );
        assert!(load_dataset(&path, false).is_err());
    }

    #[test]
    fn element_outside_screen_rejected() {
        let mut step = finish_step(0, true);
        step.elements = vec![UiElement::new(
            "wide",
            BBox::new(0, 0, 2000, 50).unwrap(),
        )];
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[header_line(), episode_line("ep1", &[step])],
        );
        let err = load_dataset(&path, false).unwrap_err();
        assert!(err.to_string().contains("exceeds"), "{err}");
    }

    #[test]
    fn strict_mode_fails_on_missing_screenshot() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[header_line(), episode_line("ep1", &[finish_step(0, true)])],
        );
        assert!(matches!(
            load_dataset(&path, true).unwrap_err(),
            DatasetError::MissingScreenshot { .. }
        ));

        // With the file present, strict mode passes.
        std::fs::create_dir(dir.path().join("shots")).unwrap();
        std::fs::write(dir.path().join("shots/blank.png"), b"png").unwrap();
        assert!(load_dataset(&path, true).is_ok());
    }

    #[test]
    fn validate_counts_buckets_and_lists_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut two = vec![click_step(0), finish_step(1, true)];
        two[1].index = 1;
        let five: Vec<Step> = (0..4)
            .map(click_step)
            .chain([finish_step(4, true)])
            .collect();
        let nine: Vec<Step> = (0..8)
            .map(click_step)
            .chain([finish_step(8, true)])
            .collect();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                header_line(),
                episode_line("short", &two),
                episode_line("middle", &five),
                episode_line("long", &nine),
                "{\"kind\":\"episode\",\"bad\":true}".to_string(),
            ],
        );
        let report = validate_dataset(&path, false).unwrap();
        assert_eq!(report.episodes, 3);
        assert_eq!(report.errors.len(), 1);
        let buckets: std::collections::HashMap<_, _> =
            report.per_bucket.iter().copied().collect();
        assert_eq!(buckets[&ComplexityBucket::Short], 1);
        assert_eq!(buckets[&ComplexityBucket::Middle], 1);
        assert_eq!(buckets[&ComplexityBucket::Long], 1);
    }

    #[test]
    fn validate_empty_dataset_is_clean() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(dir.path(), "d.jsonl", &[header_line()]);
        let report = validate_dataset(&path, false).unwrap();
        assert_eq!(report.episodes, 0);
        assert!(report.is_clean());
    }

    #[test]
    fn save_load_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_lines(
            dir.path(),
            "d.jsonl",
            &[
                header_line(),
                episode_line("ep1", &[click_step(0), finish_step(1, true)]),
                "{\"kind\":\"vqa\",\"id\":\"q1\",\"screenshot\":\"shots/blank.png\",\
                 \"question\":\"what is shown?\",\"reference_answer\":\"a menu\"}"
                    .to_string(),
            ],
        );
        let ds = load_dataset(&path, false).unwrap();
        let saved = dir.path().join("canonical.jsonl");
        save_dataset(&ds, &saved).unwrap();
        let back = load_dataset(&saved, false).unwrap();
        assert_eq!(back.episodes, ds.episodes);
        assert_eq!(back.vqa_items, ds.vqa_items);

        // Canonical form is a fixed point: saving again is byte-identical.
        let twice = dir.path().join("canonical2.jsonl");
        save_dataset(&back, &twice).unwrap();
        assert_eq!(
            std::fs::read(&saved).unwrap(),
            std::fs::read(&twice).unwrap()
        );
    }

    #[test]
    fn directory_loads_all_files_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        write_lines(
            dir.path(),
            "b.jsonl",
            &[header_line(), episode_line("ep2", &[finish_step(0, true)])],
        );
        write_lines(
            dir.path(),
            "a.jsonl",
            &[header_line(), episode_line("ep1", &[finish_step(0, true)])],
        );
        let ds = load_dataset(dir.path(), false).unwrap();
        let ids: Vec<&str> = ds.episodes.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["ep1", "ep2"]);
    }
}
