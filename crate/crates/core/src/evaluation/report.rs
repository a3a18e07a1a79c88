//! The sector-by-complexity report grid and its output formats.
//!
//! A report is the 7x3 grid of per-cell counts plus a label naming the
//! history mode the run used. Rates are derived on demand, so the canonical
//! JSON form (used by `save`/`load`) round-trips exactly and is byte-stable
//! for identical inputs. CSV and an aligned text table are rendered from the
//! same grid, with aggregate `All` rows included and `-` standing in for
//! rates whose denominator is empty.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::metrics::{ComplexityBucket, MetricsCounts};

/// Business sector of an episode: the six recorded categories plus a
/// catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    FoodDelivery,
    FoodWalkin,
    MedicalService,
    FundSelect,
    Insurance,
    Gaming,
    Other,
}

impl Sector {
    pub const ALL: [Sector; 7] = [
        Sector::FoodDelivery,
        Sector::FoodWalkin,
        Sector::MedicalService,
        Sector::FundSelect,
        Sector::Insurance,
        Sector::Gaming,
        Sector::Other,
    ];

    /// Stable machine token, also the serde form.
    pub fn token(&self) -> &'static str {
        match self {
            Sector::FoodDelivery => "FoodDelivery",
            Sector::FoodWalkin => "FoodWalkin",
            Sector::MedicalService => "MedicalService",
            Sector::FundSelect => "FundSelect",
            Sector::Insurance => "Insurance",
            Sector::Gaming => "Gaming",
            Sector::Other => "Other",
        }
    }

    /// Human-readable name for the text table.
    pub fn display_name(&self) -> &'static str {
        match self {
            Sector::FoodDelivery => "Food Delivery",
            Sector::FoodWalkin => "Food Walkin",
            Sector::MedicalService => "Medical Service",
            Sector::FundSelect => "Fund Select",
            Sector::Insurance => "Insurance",
            Sector::Gaming => "Gaming",
            Sector::Other => "Other",
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad report file: {0}")]
    Parse(String),
}

/// One grid cell: counts for a (sector, bucket) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportCell {
    pub sector: Sector,
    pub bucket: ComplexityBucket,
    pub counts: MetricsCounts,
}

/// The full evaluation report: every (sector, bucket) cell in canonical
/// order, sector-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub history_mode: String,
    pub cells: Vec<ReportCell>,
}

impl EvaluationReport {
    pub fn new(history_mode: impl Into<String>) -> Self {
        let cells = Sector::ALL
            .iter()
            .flat_map(|&sector| {
                ComplexityBucket::ALL.iter().map(move |&bucket| ReportCell {
                    sector,
                    bucket,
                    counts: MetricsCounts::default(),
                })
            })
            .collect();
        EvaluationReport {
            history_mode: history_mode.into(),
            cells,
        }
    }

    pub fn add(&mut self, sector: Sector, bucket: ComplexityBucket, counts: &MetricsCounts) {
        let cell = self
            .cells
            .iter_mut()
            .find(|c| c.sector == sector && c.bucket == bucket)
            .expect("canonical grid covers every sector and bucket");
        cell.counts.merge(counts);
    }

    pub fn cell(&self, sector: Sector, bucket: ComplexityBucket) -> &MetricsCounts {
        &self
            .cells
            .iter()
            .find(|c| c.sector == sector && c.bucket == bucket)
            .expect("canonical grid covers every sector and bucket")
            .counts
    }

    pub fn sector_totals(&self, sector: Sector) -> MetricsCounts {
        self.cells
            .iter()
            .filter(|c| c.sector == sector)
            .fold(MetricsCounts::default(), |acc, c| acc.merged(&c.counts))
    }

    pub fn bucket_totals(&self, bucket: ComplexityBucket) -> MetricsCounts {
        self.cells
            .iter()
            .filter(|c| c.bucket == bucket)
            .fold(MetricsCounts::default(), |acc, c| acc.merged(&c.counts))
    }

    pub fn overall(&self) -> MetricsCounts {
        self.cells
            .iter()
            .fold(MetricsCounts::default(), |acc, c| acc.merged(&c.counts))
    }

    /// Rows in the canonical emission order: per sector its three buckets
    /// plus an `All` row, then an `All` sector block.
    fn rows(&self) -> Vec<(String, String, MetricsCounts)> {
        let mut rows = Vec::new();
        for &sector in &Sector::ALL {
            for &bucket in &ComplexityBucket::ALL {
                rows.push((
                    sector.token().to_string(),
                    bucket.name().to_string(),
                    *self.cell(sector, bucket),
                ));
            }
            rows.push((
                sector.token().to_string(),
                "All".to_string(),
                self.sector_totals(sector),
            ));
        }
        for &bucket in &ComplexityBucket::ALL {
            rows.push((
                "All".to_string(),
                bucket.name().to_string(),
                self.bucket_totals(bucket),
            ));
        }
        rows.push(("All".to_string(), "All".to_string(), self.overall()));
        rows
    }

    /// Machine-readable table: `sector,bucket,wtsr,ssr,edr,n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sector,bucket,wtsr,ssr,edr,n\n");
        for (sector, bucket, counts) in self.rows() {
            let _ = writeln!(
                out,
                "{sector},{bucket},{},{},{},{}",
                fmt_rate(counts.wtsr()),
                fmt_rate(counts.ssr()),
                fmt_rate(counts.edr()),
                counts.all_intentions
            );
        }
        out
    }

    /// Aligned plain-text table of the same rows.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:<8} {:>8} {:>8} {:>8} {:>6}",
            "Sector", "Bucket", "WTSR", "SSR", "EDR", "N"
        );
        let _ = writeln!(out, "{}", "-".repeat(60));
        for (sector, bucket, counts) in self.rows() {
            let display = Sector::ALL
                .iter()
                .find(|s| s.token() == sector)
                .map(|s| s.display_name().to_string())
                .unwrap_or(sector);
            let _ = writeln!(
                out,
                "{:<16} {:<8} {:>8} {:>8} {:>8} {:>6}",
                display,
                bucket,
                fmt_rate(counts.wtsr()),
                fmt_rate(counts.ssr()),
                fmt_rate(counts.edr()),
                counts.all_intentions
            );
        }
        let _ = writeln!(out, "history mode: {}", self.history_mode);
        out
    }

    /// Canonical byte-stable form; `load` reads it back exactly.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), ReportError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

fn fmt_rate(rate: Result<f64, super::metrics::MetricsError>) -> String {
    match rate {
        Ok(r) => format!("{r:.4}"),
        Err(_) => "-".to_string(),
    }
}

impl std::fmt::Display for ComplexityBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
