//! Deterministic construction of the bundled fixture set: twelve episodes
//! covering all six sectors and all three complexity buckets, plus a handful
//! of VQA items. The checked-in files under `fixtures/` are the canonical
//! serialization of exactly this dataset.
#![allow(dead_code)] // shared across test binaries; not every binary uses everything

use std::path::{Path, PathBuf};

use uireplay_core::dataset::{Dataset, Episode, Step, VqaItem};
use uireplay_core::evaluation::{Direction, GroundTruth, Sector};
use uireplay_core::geometry::{BBox, UiElement};

pub const SCREEN_W: u32 = 1080;
pub const SCREEN_H: u32 = 1920;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// A tiny but valid 1x1 PNG; the harness treats screenshots as opaque bytes.
pub const BLANK_PNG: [u8; 67] = [
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44,
    0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f,
    0x15, 0xc4, 0x89, 0x00, 0x00, 0x00, 0x0a, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x00,
    0x01, 0x00, 0x00, 0x05, 0x00, 0x01, 0x0d, 0x0a, 0x2d, 0xb4, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
];

fn ground_truth_for(step: usize) -> GroundTruth {
    // Cycle through the action vocabulary; coordinates shift per step so
    // every box is distinct but stays on the 1080x1920 screen.
    let offset = (step as u32 % 8) * 60;
    match step % 6 {
        0 => GroundTruth::Click {
            target_box: BBox::new(80 + offset, 300 + offset, 280 + offset, 400 + offset).unwrap(),
        },
        1 => GroundTruth::Input {
            text: format!("query {step}"),
        },
        2 => GroundTruth::Scroll {
            path_box: BBox::new(100, 400 + offset, 900, 1500 + offset).unwrap(),
            direction: if step % 4 == 2 {
                Direction::Up
            } else {
                Direction::Down
            },
        },
        3 => GroundTruth::LongPress {
            target_box: BBox::new(400 + offset, 800, 700 + offset, 950).unwrap(),
        },
        4 => GroundTruth::Wait,
        _ => GroundTruth::Drag {
            path_box: BBox::new(60 + offset, 1000, 860 + offset, 1200).unwrap(),
            direction: if step % 4 == 1 {
                Direction::Left
            } else {
                Direction::Right
            },
        },
    }
}

fn make_episode(id: &str, sector: Sector, instruction: &str, total_steps: usize) -> Episode {
    assert!(total_steps >= 1);
    let steps = (0..total_steps)
        .map(|i| {
            let last = i == total_steps - 1;
            Step {
                index: i,
                screenshot: "shots/blank.png".to_string(),
                width: SCREEN_W,
                height: SCREEN_H,
                elements: vec![
                    UiElement::new(
                        format!("Control {i}"),
                        BBox::new(40, 120, 520, 200).unwrap(),
                    ),
                    UiElement::new(
                        format!("Label {i}"),
                        BBox::new(560, 120, 1040, 200).unwrap(),
                    ),
                ],
                ground_truth: if last {
                    GroundTruth::TaskFinish
                } else {
                    ground_truth_for(i)
                },
                is_final: last,
            }
        })
        .collect();
    Episode {
        id: id.to_string(),
        sector,
        instruction: instruction.to_string(),
        steps,
    }
}

/// The twelve fixture episodes: two per sector, with step counts placing at
/// least one episode in each complexity bucket overall.
pub fn fixture_episodes() -> Vec<Episode> {
    let plan: [(&str, Sector, &str, usize); 12] = [
        ("food-delivery-01", Sector::FoodDelivery, "Order a bubble tea delivered to the office", 2),
        ("food-delivery-02", Sector::FoodDelivery, "Reorder last week's lunch set", 5),
        ("food-walkin-01", Sector::FoodWalkin, "Book a table for two tonight", 3),
        ("food-walkin-02", Sector::FoodWalkin, "Collect the self-service pickup coupon", 6),
        ("medical-01", Sector::MedicalService, "Register for the dermatology clinic", 4),
        ("medical-02", Sector::MedicalService, "Refill the standing prescription and pay", 9),
        ("fund-select-01", Sector::FundSelect, "Open the index fund detail page", 2),
        ("fund-select-02", Sector::FundSelect, "Set up a monthly purchase plan", 10),
        ("insurance-01", Sector::Insurance, "Check the claim progress", 3),
        ("insurance-02", Sector::Insurance, "Compare two health plans and save one", 7),
        ("gaming-01", Sector::Gaming, "Claim the daily login reward", 4),
        ("gaming-02", Sector::Gaming, "Finish the tutorial quest line", 12),
    ];
    plan.iter()
        .map(|(id, sector, instruction, steps)| make_episode(id, *sector, instruction, *steps))
        .collect()
}

pub fn fixture_vqa_items() -> Vec<VqaItem> {
    let plan = [
        ("vqa-01", "What is the delivery fee shown?", "3 yuan"),
        ("vqa-02", "Which tab is selected?", "orders"),
        ("vqa-03", "What time is the appointment?", "9:30 am"),
        ("vqa-04", "How many funds are listed?", "six"),
    ];
    plan.iter()
        .map(|(id, question, answer)| VqaItem {
            id: id.to_string(),
            screenshot: "shots/blank.png".to_string(),
            question: question.to_string(),
            reference_answer: answer.to_string(),
        })
        .collect()
}

pub fn fixture_dataset(root: PathBuf) -> Dataset {
    Dataset {
        episodes: fixture_episodes(),
        vqa_items: fixture_vqa_items(),
        root,
        warnings: Vec::new(),
    }
}
