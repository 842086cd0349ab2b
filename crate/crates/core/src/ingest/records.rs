//! Tabular record loaders: UTF-8, first row header, RFC 4180 quoting.
//!
//! Rows are never dropped silently: row count in equals records out plus
//! reported row errors.

use std::collections::HashSet;
use std::fmt;

use chrono::NaiveDate;

use crate::currency::Currency;

use super::{AppRecord, Billing, IngestError, RobotSubclass, SegmentShare};

/// Which table layout to expect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Apps,
    Robots,
    Segments,
    SegmentMapping,
}

impl RecordKind {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            RecordKind::Apps => &[
                "name",
                "tagline",
                "description",
                "price",
                "billing",
                "saves",
                "launch_date",
                "tags",
            ],
            RecordKind::Robots => {
                &["name", "units", "price_low", "price_high", "segments", "ontology_node"]
            }
            RecordKind::Segments => &["segment", "share"],
            RecordKind::SegmentMapping => &["segment", "subclass"],
        }
    }
}

/// A cell or row that failed to parse; the row index is 1-based counting
/// data rows (the header is row 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub row: usize,
    pub column: String,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}, column {:?}: {}", self.row, self.column, self.message)
    }
}

/// Loader outcome: parsed records plus every row that failed.
#[derive(Debug, Clone)]
pub struct LoadReport<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

impl<T> LoadReport<T> {
    /// Treat any row error as fatal.
    pub fn into_result(self) -> Result<Vec<T>, IngestError> {
        if self.errors.is_empty() {
            Ok(self.records)
        } else {
            Err(IngestError::Rows(self.errors))
        }
    }
}

/// A (segment, subclass) membership row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMapping {
    pub segment: String,
    pub subclass: String,
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().flexible(false).from_reader(bytes)
}

fn check_header(headers: &csv::StringRecord, kind: RecordKind) -> Result<(), IngestError> {
    let expected = kind.columns();
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    for col in &got {
        if !expected.contains(col) {
            return Err(IngestError::UnknownColumn(col.to_string()));
        }
    }
    for col in expected {
        if !got.contains(col) {
            return Err(IngestError::MissingColumn(col.to_string()));
        }
    }
    Ok(())
}

struct RowCtx<'a> {
    row: usize,
    record: &'a csv::StringRecord,
    headers: &'a csv::StringRecord,
    errors: Vec<RowError>,
}

impl<'a> RowCtx<'a> {
    fn get(&self, column: &str) -> &'a str {
        self.headers
            .iter()
            .position(|h| h.trim() == column)
            .and_then(|i| self.record.get(i))
            .unwrap_or("")
            .trim()
    }

    fn parse<T, E: fmt::Display>(
        &mut self,
        column: &str,
        parse: impl FnOnce(&str) -> Result<T, E>,
    ) -> Option<T> {
        match parse(self.get(column)) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(RowError {
                    row: self.row,
                    column: column.to_string(),
                    message: e.to_string(),
                });
                None
            }
        }
    }
}

fn load_table<T>(
    bytes: &[u8],
    kind: RecordKind,
    mut parse_row: impl FnMut(&mut RowCtx<'_>) -> Option<T>,
) -> Result<LoadReport<T>, IngestError> {
    let mut rdr = reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Malformed(e.to_string()))?
        .clone();
    check_header(&headers, kind)?;

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row_no = i + 1;
        match row {
            Ok(record) => {
                let mut ctx = RowCtx {
                    row: row_no,
                    record: &record,
                    headers: &headers,
                    errors: Vec::new(),
                };
                let parsed = parse_row(&mut ctx);
                if ctx.errors.is_empty() {
                    if let Some(v) = parsed {
                        records.push(v);
                    }
                } else {
                    errors.extend(ctx.errors);
                }
            }
            Err(e) => errors.push(RowError {
                row: row_no,
                column: "*".to_string(),
                message: e.to_string(),
            }),
        }
    }
    Ok(LoadReport { records, errors })
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse::<u64>().map_err(|_| format!("expected a non-negative integer, got {s:?}"))
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| format!("expected YYYY-MM-DD date, got {s:?}"))
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Load application records. Duplicate names are row errors.
pub fn load_apps(bytes: &[u8]) -> Result<LoadReport<AppRecord>, IngestError> {
    let mut seen = HashSet::new();
    let report = load_table(bytes, RecordKind::Apps, |ctx| {
        let name = ctx.get("name").to_string();
        if name.is_empty() {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "name".into(),
                message: "name must not be empty".into(),
            });
            return None;
        }
        if !seen.insert(name.clone()) {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "name".into(),
                message: format!("duplicate record name {name:?}"),
            });
            return None;
        }
        let price = ctx.parse("price", str::parse::<Currency>)?;
        let billing_raw = ctx.get("billing").to_string();
        let billing = Billing::parse(&billing_raw);
        if billing == Billing::FreeOnly && price != Currency::ZERO {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "price".into(),
                message: "free_only records must have price 0".into(),
            });
            return None;
        }
        if price.is_negative() {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "price".into(),
                message: "price must be non-negative".into(),
            });
            return None;
        }
        Some(AppRecord {
            name,
            tagline: ctx.get("tagline").to_string(),
            description: ctx.get("description").to_string(),
            price,
            billing,
            billing_raw,
            saves: ctx.parse("saves", parse_u64)?,
            launch_date: ctx.parse("launch_date", parse_date)?,
            platform_tags: split_list(ctx.get("tags")),
        })
    })?;
    Ok(report)
}

/// Load robot subclasses. Segments are `;`-separated within one cell.
pub fn load_robots(bytes: &[u8]) -> Result<LoadReport<RobotSubclass>, IngestError> {
    let mut seen = HashSet::new();
    load_table(bytes, RecordKind::Robots, |ctx| {
        let name = ctx.get("name").to_string();
        if name.is_empty() || !seen.insert(name.clone()) {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "name".into(),
                message: if name.is_empty() {
                    "name must not be empty".into()
                } else {
                    format!("duplicate record name {name:?}")
                },
            });
            return None;
        }
        let units = ctx.parse("units", parse_u64)?;
        let price_low = ctx.parse("price_low", str::parse::<Currency>)?;
        let price_high = ctx.parse("price_high", str::parse::<Currency>)?;
        if price_low > price_high {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "price_low".into(),
                message: format!("price_low {price_low} exceeds price_high {price_high}"),
            });
            return None;
        }
        let segments = split_list(ctx.get("segments"));
        if segments.is_empty() {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: "segments".into(),
                message: "at least one segment is required".into(),
            });
            return None;
        }
        Some(RobotSubclass {
            name,
            units,
            price_low,
            price_high,
            segments,
            ontology_node: ctx.get("ontology_node").to_string(),
        })
    })
}

/// Load segment shares and check they sum to 1 (±0.005, to absorb tables
/// published in whole percents).
pub fn load_segments(bytes: &[u8]) -> Result<LoadReport<SegmentShare>, IngestError> {
    let report = load_table(bytes, RecordKind::Segments, |ctx| {
        let segment = ctx.get("segment").to_string();
        let share = ctx.parse("share", |s| {
            s.parse::<f64>()
                .map_err(|_| format!("expected a fraction, got {s:?}"))
                .and_then(|v| {
                    if (0.0..=1.0).contains(&v) {
                        Ok(v)
                    } else {
                        Err(format!("share {v} outside [0, 1]"))
                    }
                })
        })?;
        Some(SegmentShare { segment, share })
    })?;
    if report.errors.is_empty() && !report.records.is_empty() {
        let sum: f64 = report.records.iter().map(|s| s.share).sum();
        if (sum - 1.0).abs() > 0.005 {
            return Err(IngestError::BadShareSum(sum));
        }
    }
    Ok(report)
}

/// Load (segment, subclass) membership rows.
pub fn load_segment_mappings(bytes: &[u8]) -> Result<LoadReport<SegmentMapping>, IngestError> {
    load_table(bytes, RecordKind::SegmentMapping, |ctx| {
        let segment = ctx.get("segment").to_string();
        let subclass = ctx.get("subclass").to_string();
        if segment.is_empty() || subclass.is_empty() {
            ctx.errors.push(RowError {
                row: ctx.row,
                column: if segment.is_empty() { "segment" } else { "subclass" }.into(),
                message: "must not be empty".into(),
            });
            return None;
        }
        Some(SegmentMapping { segment, subclass })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const APPS: &str = "\
name,tagline,description,price,billing,saves,launch_date,tags
&facts,Analyze market signals for real-time consumer insights.,Market intelligence platform.,199,one_time,3,2023-06-10,web
";

    #[test]
    fn sample_app_row_parses() {
        let report = load_apps(APPS.as_bytes()).unwrap();
        assert!(report.errors.is_empty());
        let app = &report.records[0];
        assert_eq!(app.name, "&facts");
        assert_eq!(app.price, Currency::from_major(199));
        assert_eq!(app.billing, Billing::OneTime);
        assert_eq!(app.saves, 3);
        assert_eq!(app.launch_date, NaiveDate::from_ymd_opt(2023, 6, 10).unwrap());
    }

    #[test]
    fn empty_data_section_yields_empty_list() {
        let report =
            load_apps(b"name,tagline,description,price,billing,saves,launch_date,tags\n").unwrap();
        assert!(report.records.is_empty());
        assert!(report.errors.is_empty());
    }

    #[test]
    fn unknown_column_is_rejected() {
        let err = load_apps(b"name,tagline,description,price,billing,saves,launch_date,tags,extra\n")
            .unwrap_err();
        assert!(matches!(err, IngestError::UnknownColumn(c) if c == "extra"));
    }

    #[test]
    fn bad_cells_report_row_and_column() {
        let data = "\
name,tagline,description,price,billing,saves,launch_date,tags
good,t,d,10,monthly,5,2024-01-01,
bad,t,d,ten,monthly,5,2024-01-01,
";
        let report = load_apps(data.as_bytes()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].row, 2);
        assert_eq!(report.errors[0].column, "price");
        // rows in = records out + errors
        assert_eq!(2, report.records.len() + report.errors.len());
    }

    #[test]
    fn duplicate_names_are_row_errors() {
        let data = "\
name,tagline,description,price,billing,saves,launch_date,tags
a,t,d,1,monthly,1,2024-01-01,
a,t,d,1,monthly,1,2024-01-01,
";
        let report = load_apps(data.as_bytes()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0].message.contains("duplicate"));
    }

    #[test]
    fn surgical_robot_row_parses() {
        let data = "\
name,units,price_low,price_high,segments,ontology_node
Surgical,6612,600000,2500000,Medical,Perform Surgery
";
        let report = load_robots(data.as_bytes()).unwrap();
        let r = &report.records[0];
        assert_eq!(r.units, 6612);
        assert_eq!(r.price_low, Currency::from_major(600_000));
        assert_eq!(r.price_high, Currency::from_major(2_500_000));
        assert_eq!(r.segments, vec!["Medical"]);
        assert_eq!(r.ontology_node, "Perform Surgery");
        assert_eq!(r.price_midpoint(), Currency::from_major(1_550_000));
    }

    #[test]
    fn segment_shares_must_sum_to_one() {
        let good = "segment,share\nMedical,0.29\nRest,0.71\n";
        assert!(load_segments(good.as_bytes()).is_ok());
        let bad = "segment,share\nMedical,0.29\nRest,0.60\n";
        assert!(matches!(load_segments(bad.as_bytes()), Err(IngestError::BadShareSum(_))));
    }

    #[test]
    fn free_only_with_price_is_an_error() {
        let data = "\
name,tagline,description,price,billing,saves,launch_date,tags
a,t,d,5,free_only,1,2024-01-01,
";
        let report = load_apps(data.as_bytes()).unwrap();
        assert!(report.records.is_empty());
        assert_eq!(report.errors.len(), 1);
    }
}
