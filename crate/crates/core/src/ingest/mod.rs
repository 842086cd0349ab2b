//! File formats: snapshot JSON, the nested prompt-format hierarchy,
//! tabular record loaders, and the rule-based compound-task splitter.

mod decompose;
mod prompt;
mod records;
mod snapshot_io;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::currency::Currency;
use crate::ontology::ValidationReport;

pub use decompose::{decompose_task, VerbObject};
pub use prompt::emit_prompt_ontology;
pub use records::{
    load_apps, load_robots, load_segment_mappings, load_segments, LoadReport, RecordKind,
    RowError, SegmentMapping,
};
pub use snapshot_io::{load_snapshot, load_snapshot_unvalidated, save_snapshot, SNAPSHOT_SCHEMA};

/// How an application bills its users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Billing {
    OneTime,
    Monthly,
    Yearly,
    FreeOnly,
    Unknown,
}

impl Billing {
    /// Unknown billing strings map to `Unknown` rather than erroring;
    /// the raw string is kept on the record.
    pub fn parse(s: &str) -> Billing {
        match s.trim().to_ascii_lowercase().as_str() {
            "one_time" | "one-time" | "onetime" => Billing::OneTime,
            "monthly" => Billing::Monthly,
            "yearly" | "annual" | "annually" => Billing::Yearly,
            "free_only" | "free-only" | "free" => Billing::FreeOnly,
            _ => Billing::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Billing::OneTime => "one_time",
            Billing::Monthly => "monthly",
            Billing::Yearly => "yearly",
            Billing::FreeOnly => "free_only",
            Billing::Unknown => "unknown",
        }
    }
}

/// One AI software application record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRecord {
    pub name: String,
    pub tagline: String,
    pub description: String,
    pub price: Currency,
    pub billing: Billing,
    /// The billing cell as written, preserved for audit.
    pub billing_raw: String,
    pub saves: u64,
    pub launch_date: NaiveDate,
    pub platform_tags: Vec<String>,
}

/// One robot-subclass record with its unit count, price range, industry
/// segments, and the activity node it is classified under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSubclass {
    pub name: String,
    pub units: u64,
    pub price_low: Currency,
    pub price_high: Currency,
    pub segments: Vec<String>,
    pub ontology_node: String,
}

impl RobotSubclass {
    pub fn price_midpoint(&self) -> Currency {
        self.price_low.midpoint(self.price_high)
    }
}

/// One industry segment's share of the robotics market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentShare {
    pub segment: String,
    pub share: f64,
}

/// Errors raised while parsing or emitting files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unsupported schema {found:?} (expected {expected:?})")]
    SchemaMismatch { expected: String, found: String },
    #[error("snapshot failed validation: {0}")]
    Invalid(ValidationReport),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("row errors:\n{}", format_rows(.0))]
    Rows(Vec<RowError>),
    #[error("shares sum to {0:.4}, expected 1 (±0.005)")]
    BadShareSum(f64),
}

fn format_rows(errors: &[RowError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}
