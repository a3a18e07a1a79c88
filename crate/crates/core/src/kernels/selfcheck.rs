//! Seeded sanity battery over the kernel properties, exposed through the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    cross_attention_pool, expand_dense_to_moe, moe_forward, top_k_gates, AdapterConfig, Dense,
    Matrix, Mlp, DEFAULT_NUM_QUERIES,
};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every kernel property check with a deterministic RNG.
pub fn run_self_check(seed: u64) -> SelfCheckReport {
    let checks = vec![
        duplicate_expert_equivalence(seed),
        attention_convex_hull(seed),
        fixed_length_contract(seed),
        gate_normalization(seed),
    ];
    SelfCheckReport { seed, checks }
}

fn duplicate_expert_equivalence(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for &experts in &[1usize, 2, 4, 8] {
        for _ in 0..25 {
            let top_k = rng.gen_range(1..=experts);
            let d = rng.gen_range(2..6);
            let hidden = rng.gen_range(2..8);
            let dense = Mlp::<f64>::random(d, hidden, d, &mut rng);
            let router = Dense::random(d, experts, &mut rng);
            let layer = expand_dense_to_moe(&dense, experts, top_k, router).unwrap();
            let x = Matrix::random(4, d, &mut rng);
            let got = moe_forward(&x, &layer).unwrap();
            let want = dense.forward(&x).unwrap();
            for (g, w) in got.data().iter().zip(want.data()) {
                worst = worst.max((g - w).abs() / (1.0 + w.abs()));
            }
        }
    }
    CheckResult {
        name: "duplicate-expert equivalence",
        passed: worst <= 1e-9,
        detail: format!("max relative deviation {worst:.3e} (limit 1e-9)"),
    }
}

fn attention_convex_hull(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let t = rng.gen_range(1..40);
        let d = rng.gen_range(1..8);
        let q = rng.gen_range(1..16);
        let features = Matrix::<f64>::random(t, d, &mut rng);
        let cfg = AdapterConfig::new(
            Matrix::random(q, d, &mut rng),
            Dense::identity(d),
        )
        .unwrap();
        let pooled = cross_attention_pool(&features, &cfg).unwrap();
        for k in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in 0..t {
                lo = lo.min(features.get(r, k));
                hi = hi.max(features.get(r, k));
            }
            for row in 0..q {
                let v = pooled.get(row, k);
                worst = worst.max((lo - v).max(v - hi));
            }
        }
    }
    CheckResult {
        name: "attention convex hull",
        passed: worst <= 1e-12,
        detail: format!("max hull excursion {worst:.3e} (limit 1e-12)"),
    }
}

fn fixed_length_contract(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf1ed);
    let d = 8;
    let cfg = AdapterConfig::new(
        Matrix::<f64>::random(DEFAULT_NUM_QUERIES, d, &mut rng),
        Dense::identity(d),
    )
    .unwrap();
    let mut passed = true;
    let mut detail = String::new();
    for &t in &[1usize, 7, 256, 2000] {
        let features = Matrix::random(t, d, &mut rng);
        let pooled = cross_attention_pool(&features, &cfg).unwrap();
        if pooled.rows() != DEFAULT_NUM_QUERIES {
            passed = false;
            detail = format!("T={t} produced {} rows", pooled.rows());
            break;
        }
    }
    if passed {
        detail = format!("{DEFAULT_NUM_QUERIES} rows for T in {{1, 7, 256, 2000}}");
    }
    CheckResult {
        name: "fixed-length pooling contract",
        passed,
        detail,
    }
}

fn gate_normalization(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a7e);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.gen_range(2..6);
        let experts = rng.gen_range(1..9);
        let top_k = rng.gen_range(1..=experts);
        let dense = Mlp::<f64>::random(d, 4, d, &mut rng);
        let router = Dense::random(d, experts, &mut rng);
        let layer = expand_dense_to_moe(&dense, experts, top_k, router).unwrap();
        let x = Matrix::<f64>::random(1, d, &mut rng);
        let gates = top_k_gates(&layer, x.row(0)).unwrap();
        let total: f64 = gates.iter().map(|(_, g)| g).sum();
        worst = worst.max((total - 1.0).abs());
    }
    CheckResult {
        name: "gate normalization",
        passed: worst <= 1e-12,
        detail: format!("max |sum - 1| {worst:.3e} (limit 1e-12)"),
    }
}
