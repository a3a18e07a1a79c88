//! End-to-end replay behavior over the fixture set: oracle and adversary
//! clients, timeout handling, history modes, and scheduling determinism.

mod common;

use common::{fixture_dataset, fixtures_dir};
use uireplay_core::action::{render_action, Action};
use uireplay_core::evaluation::{ComplexityBucket, Sector, VerdictReason};
use uireplay_core::protocol::{render_response, CotResponse};
use uireplay_core::runtime::scripted::{
    always_wait_transcript, oracle_transcript, oracle_vqa_transcript, ScriptedClient, ScriptLine,
};
use uireplay_core::runtime::{
    run_all_episodes, run_episode, run_suite, run_vqa_suite, ClientError, HistoryMode,
    ModelClient, RunConfig, RunError, StepKey,
};

fn oracle_client(dataset: &uireplay_core::dataset::Dataset) -> ScriptedClient {
    let mut lines = oracle_transcript(&dataset.episodes);
    lines.extend(oracle_vqa_transcript(&dataset.vqa_items));
    ScriptedClient::from_lines(lines).unwrap()
}

fn wrap_action(action: Action) -> String {
    let action_text = render_action(&action);
    render_response(&CotResponse {
        observation: "A page.".to_string(),
        reasoning: "Following the script.".to_string(),
        action_text: action_text.clone(),
        summary: "Did the scripted move.".to_string(),
        action,
    })
}

struct AlwaysTimeout;

impl ModelClient for AlwaysTimeout {
    fn complete(&self, _: StepKey<'_>, _: &str, _: &[u8]) -> Result<String, ClientError> {
        Err(ClientError::Timeout)
    }
}

#[test]
fn oracle_replay_matches_every_step_and_terminates() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let cfg = RunConfig::default();
    for episode in &dataset.episodes {
        let outcome = run_episode(episode, &client, &cfg, &dataset.root);
        assert!(!outcome.timed_out);
        assert_eq!(outcome.step_verdicts.len(), episode.steps.len());
        assert!(outcome.step_verdicts.iter().all(|v| v.matched), "{}", episode.id);
        assert!(outcome.terminal_ok, "{}", episode.id);
    }
}

#[test]
fn oracle_suite_is_perfect_in_every_populated_cell() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let report = run_suite(&dataset, &client, &RunConfig::default()).unwrap();
    for cell in &report.cells {
        if cell.counts.all_intentions == 0 {
            continue;
        }
        assert_eq!(cell.counts.wtsr().unwrap(), 1.0, "{cell:?}");
        assert_eq!(cell.counts.ssr().unwrap(), 1.0, "{cell:?}");
        assert_eq!(cell.counts.edr().unwrap(), 1.0, "{cell:?}");
    }
    let overall = report.overall();
    assert_eq!(overall.all_intentions, 12);
    assert_eq!(overall.wtsr().unwrap(), 1.0);
}

#[test]
fn premature_finish_is_a_type_mismatch() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = dataset
        .episodes
        .iter()
        .find(|e| e.steps.len() == 3)
        .unwrap();
    let mut lines = oracle_transcript(std::slice::from_ref(episode));
    lines[0].response = wrap_action(Action::TaskFinish);
    let client = ScriptedClient::from_lines(lines).unwrap();
    let outcome = run_episode(episode, &client, &RunConfig::default(), &dataset.root);
    assert!(!outcome.step_verdicts[0].matched);
    assert_eq!(outcome.step_verdicts[0].reason, VerdictReason::TypeMismatch);
    assert!(outcome.step_verdicts[1..].iter().all(|v| v.matched));
    assert!(!outcome.terminal_ok);
}

#[test]
fn unparseable_response_is_judged_type_mismatch_and_replay_continues() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = &dataset.episodes[0];
    let mut lines = oracle_transcript(std::slice::from_ref(episode));
    lines[0].response = "no sections whatsoever".to_string();
    let client = ScriptedClient::from_lines(lines).unwrap();
    let outcome = run_episode(episode, &client, &RunConfig::default(), &dataset.root);
    assert_eq!(outcome.step_verdicts.len(), episode.steps.len());
    assert!(!outcome.step_verdicts[0].matched);
    assert!(outcome.step_verdicts[1..].iter().all(|v| v.matched));
    assert!(!outcome.timed_out);
}

#[test]
fn timeout_truncates_the_episode() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = &dataset.episodes[0];
    let outcome = run_episode(episode, &AlwaysTimeout, &RunConfig::default(), &dataset.root);
    assert!(outcome.timed_out);
    assert!(outcome.step_verdicts.is_empty());
    assert!(!outcome.terminal_ok);
    assert_eq!(outcome.transcript.len(), 1);
}

#[test]
fn all_timeout_suite_has_empty_denominators() {
    let dataset = fixture_dataset(fixtures_dir());
    let report = run_suite(&dataset, &AlwaysTimeout, &RunConfig::default()).unwrap();
    let overall = report.overall();
    assert_eq!(overall.timeout_intentions, 12);
    assert!(overall.wtsr().is_err());
    assert!(overall.ssr().is_err());
}

/// Missing transcript entries surface as transport errors, which the replay
/// loop records as timeout outcomes; the episode is excluded from WTSR/EDR
/// denominators without touching other episodes' counts.
#[test]
fn partial_transcript_counts_as_timeout_and_is_excluded() {
    let dataset = fixture_dataset(fixtures_dir());
    let full_client = oracle_client(&dataset);
    let full = run_suite(&dataset, &full_client, &RunConfig::default()).unwrap();

    // Drop one whole episode's responses.
    let victim = &dataset.episodes[3];
    let lines: Vec<ScriptLine> = oracle_transcript(&dataset.episodes)
        .into_iter()
        .filter(|l| l.episode_id != victim.id)
        .collect();
    let partial_client = ScriptedClient::from_lines(lines).unwrap();
    let partial = run_suite(&dataset, &partial_client, &RunConfig::default()).unwrap();

    let overall = partial.overall();
    assert_eq!(overall.timeout_intentions, 1);
    assert_eq!(overall.all_intentions, 12);
    // Eleven intentions remain in the denominator, all successful.
    assert_eq!(overall.wtsr().unwrap(), 1.0);
    assert_eq!(overall.edr().unwrap(), 1.0);
    // The timed-out episode had no judged steps, so SSR still counts only
    // the other episodes' steps.
    let full_steps = full.overall().all_steps;
    assert_eq!(overall.all_steps, full_steps - victim.steps.len() as u64);
}

#[test]
fn wait_adversary_zeroes_wtsr_and_edr() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = ScriptedClient::from_lines(always_wait_transcript(&dataset.episodes)).unwrap();
    let report = run_suite(&dataset, &client, &RunConfig::default()).unwrap();
    let overall = report.overall();
    assert_eq!(overall.wtsr().unwrap(), 0.0);
    assert_eq!(overall.edr().unwrap(), 0.0);
    // WAIT still matches the recorded wait steps, nothing else.
    let wait_steps: u64 = dataset
        .episodes
        .iter()
        .flat_map(|e| &e.steps)
        .filter(|s| {
            matches!(
                s.ground_truth,
                uireplay_core::evaluation::GroundTruth::Wait
            )
        })
        .count() as u64;
    assert!(wait_steps > 0);
    assert_eq!(overall.success_steps, wait_steps);
}

#[test]
fn teacher_forced_isolates_step_verdicts() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = dataset
        .episodes
        .iter()
        .find(|e| e.steps.len() >= 5)
        .unwrap();
    let cfg = RunConfig {
        history_mode: HistoryMode::TeacherForced,
        ..RunConfig::default()
    };

    let baseline = {
        let client =
            ScriptedClient::from_lines(oracle_transcript(std::slice::from_ref(episode))).unwrap();
        run_episode(episode, &client, &cfg, &dataset.root)
    };
    // Corrupt the answer at step 1; every other verdict must be unchanged.
    let corrupted = {
        let mut lines = oracle_transcript(std::slice::from_ref(episode));
        lines[1].response = wrap_action(Action::Wait { duration_ms: 7 });
        let client = ScriptedClient::from_lines(lines).unwrap();
        run_episode(episode, &client, &cfg, &dataset.root)
    };
    for (i, (a, b)) in baseline
        .step_verdicts
        .iter()
        .zip(&corrupted.step_verdicts)
        .enumerate()
    {
        if i == 1 {
            assert!(a.matched && !b.matched);
        } else {
            assert_eq!(a, b, "verdict at step {i} changed");
        }
    }
}

#[test]
fn chained_history_feeds_model_summaries_back() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = dataset
        .episodes
        .iter()
        .find(|e| e.steps.len() == 3)
        .unwrap();
    let client =
        ScriptedClient::from_lines(oracle_transcript(std::slice::from_ref(episode))).unwrap();
    let cfg = RunConfig {
        history_mode: HistoryMode::Chained,
        ..RunConfig::default()
    };
    let outcome = run_episode(episode, &client, &cfg, &dataset.root);
    // Step 0 has no history; later prompts carry the prior summaries.
    assert!(outcome.transcript[0].prompt.contains("<history> None "));
    let summary0 = &outcome.transcript[0].parsed.as_ref().unwrap().summary;
    assert!(outcome.transcript[1].prompt.contains(summary0.as_str()));
    let summary1 = &outcome.transcript[1].parsed.as_ref().unwrap().summary;
    assert!(outcome.transcript[2].prompt.contains(summary1.as_str()));
}

#[test]
fn teacher_forced_history_renders_ground_truth_actions() {
    let dataset = fixture_dataset(fixtures_dir());
    let episode = dataset
        .episodes
        .iter()
        .find(|e| e.steps.len() >= 3)
        .unwrap();
    let client =
        ScriptedClient::from_lines(oracle_transcript(std::slice::from_ref(episode))).unwrap();
    let cfg = RunConfig {
        history_mode: HistoryMode::TeacherForced,
        ..RunConfig::default()
    };
    let outcome = run_episode(episode, &client, &cfg, &dataset.root);
    let expected = render_action(&episode.steps[0].ground_truth.to_reference_action());
    assert!(outcome.transcript[1].prompt.contains(&expected));
}

#[test]
fn reports_are_identical_across_parallelism_levels() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let mut reports = Vec::new();
    for parallel in [1usize, 4, 12] {
        let cfg = RunConfig {
            max_parallel_episodes: parallel,
            ..RunConfig::default()
        };
        let report = run_suite(&dataset, &client, &cfg).unwrap();
        reports.push((report.to_csv(), report.to_json()));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[1], reports[2]);
}

#[test]
fn outcomes_come_back_in_dataset_order() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let cfg = RunConfig {
        max_parallel_episodes: 8,
        ..RunConfig::default()
    };
    let outcomes = run_all_episodes(&dataset, &client, &cfg);
    let ids: Vec<&str> = outcomes.iter().map(|o| o.episode_id.as_str()).collect();
    let want: Vec<&str> = dataset.episodes.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, want);
}

#[test]
fn empty_dataset_is_an_error() {
    let dataset = uireplay_core::dataset::Dataset {
        episodes: Vec::new(),
        vqa_items: Vec::new(),
        root: fixtures_dir(),
        warnings: Vec::new(),
    };
    let client = ScriptedClient::new();
    assert!(matches!(
        run_suite(&dataset, &client, &RunConfig::default()),
        Err(RunError::EmptyDataset)
    ));
    assert!(matches!(
        run_vqa_suite(&[], &client, &RunConfig::default(), &dataset.root),
        Err(RunError::EmptyDataset)
    ));
}

#[test]
fn vqa_echo_client_scores_perfectly() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = ScriptedClient::from_lines(oracle_vqa_transcript(&dataset.vqa_items)).unwrap();
    let metrics = run_vqa_suite(
        &dataset.vqa_items,
        &client,
        &RunConfig::default(),
        &dataset.root,
    )
    .unwrap();
    assert_eq!(
        (metrics.recall, metrics.accuracy, metrics.f_score),
        (1.0, 1.0, 1.0)
    );
}

#[test]
fn vqa_non_answer_scores_zero_accuracy() {
    let dataset = fixture_dataset(fixtures_dir());
    let lines: Vec<ScriptLine> = dataset
        .vqa_items
        .iter()
        .map(|item| ScriptLine {
            episode_id: item.id.clone(),
            step_index: 0,
            response: wrap_action(Action::Click {
                point: uireplay_core::geometry::Point::new(1, 1),
            }),
        })
        .collect();
    let client = ScriptedClient::from_lines(lines).unwrap();
    let metrics = run_vqa_suite(
        &dataset.vqa_items,
        &client,
        &RunConfig::default(),
        &dataset.root,
    )
    .unwrap();
    assert_eq!(metrics.accuracy, 0.0);
    assert_eq!(metrics.recall, 0.0);
    assert_eq!(metrics.f_score, 0.0);
}

/// A scripted client answering with a seeded mix of right and wrong actions:
/// the suite report must equal a brute-force recount over the raw outcomes.
#[test]
fn randomized_agent_report_equals_transcript_recount() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let dataset = fixture_dataset(fixtures_dir());
    let mut lines = Vec::new();
    for episode in &dataset.episodes {
        for (i, step) in episode.steps.iter().enumerate() {
            let action = if rng.gen_bool(0.6) {
                step.ground_truth.to_reference_action()
            } else {
                Action::Wait { duration_ms: 50 }
            };
            lines.push(ScriptLine {
                episode_id: episode.id.clone(),
                step_index: i,
                response: wrap_action(action),
            });
        }
    }
    let client = ScriptedClient::from_lines(lines).unwrap();
    let cfg = RunConfig::default();
    let report = run_suite(&dataset, &client, &cfg).unwrap();

    let outcomes = run_all_episodes(&dataset, &client, &cfg);
    let mut all = 0u64;
    let mut successes = 0u64;
    let mut terminals = 0u64;
    let mut steps = 0u64;
    let mut ok_steps = 0u64;
    for (episode, outcome) in dataset.episodes.iter().zip(&outcomes) {
        all += 1;
        let matched = outcome.step_verdicts.iter().filter(|v| v.matched).count() as u64;
        steps += outcome.step_verdicts.len() as u64;
        ok_steps += matched;
        if !outcome.timed_out && matched == episode.steps.len() as u64 {
            successes += 1;
            if outcome.terminal_ok {
                terminals += 1;
            }
        }
    }
    let overall = report.overall();
    assert_eq!(overall.all_intentions, all);
    assert_eq!(overall.success_intentions, successes);
    assert_eq!(overall.success_terminal_intentions, terminals);
    assert_eq!(overall.all_steps, steps);
    assert_eq!(overall.success_steps, ok_steps);
    assert_eq!(overall.wtsr().unwrap(), successes as f64 / all as f64);
    assert!(overall.edr().unwrap() <= overall.wtsr().unwrap());
}

#[test]
fn aggregation_is_order_independent() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let cfg = RunConfig::default();
    let outcomes = run_all_episodes(&dataset, &client, &cfg);
    let items: Vec<_> = dataset
        .episodes
        .iter()
        .zip(&outcomes)
        .map(|(e, o)| (e.sector, e.steps.len(), o))
        .collect();
    let forward =
        uireplay_core::runtime::aggregate_outcomes(items.iter().copied(), "chained").unwrap();
    let reversed =
        uireplay_core::runtime::aggregate_outcomes(items.iter().rev().copied(), "chained")
            .unwrap();
    assert_eq!(forward, reversed);
}

/// Four VQA items scored by hand: one exact match, one with half the
/// reference tokens present, one fully wrong, one answered with a click.
#[test]
fn mixed_vqa_clients_match_hand_scores() {
    let dataset = fixture_dataset(fixtures_dir());
    let items = &dataset.vqa_items;
    assert_eq!(items.len(), 4);
    // References: "3 yuan", "orders", "9:30 am", "six".
    let responses = [
        wrap_action(Action::Answer {
            text: "3 Yuan".to_string(), // exact after normalization
        }),
        wrap_action(Action::Answer {
            text: "the orders tab and more".to_string(), // 1/1 tokens present
        }),
        wrap_action(Action::Answer {
            text: "tomorrow".to_string(), // 0/2 tokens
        }),
        wrap_action(Action::Click {
            point: uireplay_core::geometry::Point::new(3, 3), // not an answer
        }),
    ];
    let lines: Vec<ScriptLine> = items
        .iter()
        .zip(responses)
        .map(|(item, response)| ScriptLine {
            episode_id: item.id.clone(),
            step_index: 0,
            response,
        })
        .collect();
    let client = ScriptedClient::from_lines(lines).unwrap();
    let metrics = run_vqa_suite(items, &client, &RunConfig::default(), &dataset.root).unwrap();

    // Hand arithmetic: recall = (1 + 1 + 0 + 0) / 4, accuracy = 1/4,
    // f = 2*r*a/(r+a).
    let recall = 0.5;
    let accuracy = 0.25;
    let f = 2.0 * recall * accuracy / (recall + accuracy);
    assert!((metrics.recall - recall).abs() < 1e-15);
    assert!((metrics.accuracy - accuracy).abs() < 1e-15);
    assert!((metrics.f_score - f).abs() < 1e-15);
}

#[test]
fn report_grid_places_episodes_by_sector_and_bucket() {
    let dataset = fixture_dataset(fixtures_dir());
    let client = oracle_client(&dataset);
    let report = run_suite(&dataset, &client, &RunConfig::default()).unwrap();
    // gaming-02 has 12 steps: Gaming x Long.
    assert_eq!(
        report
            .cell(Sector::Gaming, ComplexityBucket::Long)
            .all_intentions,
        1
    );
    assert_eq!(
        report
            .cell(Sector::FoodDelivery, ComplexityBucket::Short)
            .all_intentions,
        1
    );
    assert_eq!(report.cell(Sector::Other, ComplexityBucket::Short).all_intentions, 0);
    assert_eq!(report.history_mode, "chained");
}
