//! Market-value allocation: application shares scaled to the software
//! market, per-segment robot pricing via relative prices and an
//! adjustment factor, and the combined software + robot per-node view.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::currency::Currency;
use crate::ingest::{AppRecord, Billing, RobotSubclass, SegmentShare};
use crate::ontology::ActivitySnapshot;

/// Market sizes and billing annualization.
///
/// The software market is always the total minus robotics. The default
/// annualization map is monthly → 12, yearly → 1, one-time → 1,
/// free-only → 0, unknown → 1; it is recorded in run manifests because
/// it zeroes every free record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub total_ai_market: Currency,
    pub robotics_market: Currency,
    #[serde(default = "default_annualization")]
    pub annualization: BTreeMap<Billing, f64>,
}

fn default_annualization() -> BTreeMap<Billing, f64> {
    BTreeMap::from([
        (Billing::Monthly, 12.0),
        (Billing::Yearly, 1.0),
        (Billing::OneTime, 1.0),
        (Billing::FreeOnly, 0.0),
        (Billing::Unknown, 1.0),
    ])
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            total_ai_market: Currency::from_minor(18_640_000_000_000),
            robotics_market: Currency::from_minor(4_611_000_000_000),
            annualization: default_annualization(),
        }
    }
}

impl MarketConfig {
    pub fn software_market(&self) -> Currency {
        self.total_ai_market
            .checked_sub(self.robotics_market)
            .expect("market sizes fit in minor units")
    }

    pub fn annualization_for(&self, billing: Billing) -> f64 {
        self.annualization.get(&billing).copied().unwrap_or(1.0)
    }

    pub fn validate(&self) -> Result<(), MarketError> {
        if self.total_ai_market.is_negative() || self.robotics_market.is_negative() {
            return Err(MarketError::NegativeMarket);
        }
        if self.software_market().is_negative() {
            return Err(MarketError::RoboticsExceedsTotal);
        }
        if self.annualization.values().any(|m| *m < 0.0 || !m.is_finite()) {
            return Err(MarketError::BadMultiplier);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("market sizes must be non-negative")]
    NegativeMarket,
    #[error("robotics market exceeds the total AI market")]
    RoboticsExceedsTotal,
    #[error("annualization multipliers must be finite and non-negative")]
    BadMultiplier,
    #[error("all records have zero weight; shares are undefined")]
    AllZeroWeights,
    #[error("market must be positive")]
    NonPositiveMarketValue,
    #[error("segment {0:?} is empty")]
    EmptySegment(String),
    #[error("subclass {0:?} has a non-positive price midpoint")]
    NonPositiveMidpoint(String),
    #[error("adjustment denominator is zero (no units in segment)")]
    ZeroDenominator,
    #[error("subclass {subclass:?} references unknown segment {segment:?}")]
    UnknownSegment { subclass: String, segment: String },
    #[error("subclass {0:?} is not mapped to an ontology node")]
    UnmappedSubclass(String),
    #[error("node {0:?} in a value map is absent from the snapshot")]
    UnknownNode(String),
}

/// Engagement-and-pricing weight of one application: saves × price ×
/// annualization multiplier, in dollars.
pub fn app_weight(record: &AppRecord, config: &MarketConfig) -> f64 {
    record.saves as f64
        * record.price.as_major_f64()
        * config.annualization_for(record.billing)
}

/// Relative market share per application. Shares sum to 1; zero-weight
/// records (for example free apps) get share 0.
pub fn app_market_shares(
    records: &[AppRecord],
    config: &MarketConfig,
) -> Result<BTreeMap<String, f64>, MarketError> {
    config.validate()?;
    let weights: Vec<f64> = records.iter().map(|r| app_weight(r, config)).collect();
    let total: f64 = weights.iter().sum();
    let has_weight = total.is_finite() && total > 0.0;
    if !has_weight {
        return Err(MarketError::AllZeroWeights);
    }
    Ok(records
        .iter()
        .zip(weights)
        .map(|(r, w)| (r.name.clone(), w / total))
        .collect())
}

/// Scale shares to a market size. Values sum to the market up to cent
/// rounding.
pub fn scale_shares(
    shares: &BTreeMap<String, f64>,
    market: Currency,
) -> Result<BTreeMap<String, Currency>, MarketError> {
    if market.minor() <= 0 {
        return Err(MarketError::NonPositiveMarketValue);
    }
    Ok(shares
        .iter()
        .map(|(name, share)| {
            (
                name.clone(),
                Currency::from_minor((share * market.minor() as f64).round() as i64),
            )
        })
        .collect())
}

/// Relative unit prices within one segment: each subclass's price-range
/// midpoint divided by the smallest midpoint, so the cheapest row is
/// exactly 1.
pub fn relative_prices(
    subclasses: &[&RobotSubclass],
) -> Result<BTreeMap<String, f64>, MarketError> {
    if subclasses.is_empty() {
        return Err(MarketError::EmptySegment(String::new()));
    }
    let mut mids = Vec::with_capacity(subclasses.len());
    for sc in subclasses {
        let mid = sc.price_midpoint();
        if mid.minor() <= 0 {
            return Err(MarketError::NonPositiveMidpoint(sc.name.clone()));
        }
        mids.push(mid.minor() as f64);
    }
    let min = mids.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(subclasses
        .iter()
        .zip(mids)
        .map(|(sc, mid)| (sc.name.clone(), mid / min))
        .collect())
}

/// The price adjustment factor `x = r / Σ(p'ᵢ · uᵢ)` reconciling a
/// segment's revenue with its relative prices and unit volumes.
/// Returned in dollars per relative unit.
pub fn adjustment_factor(revenue: Currency, rows: &[(f64, f64)]) -> Result<f64, MarketError> {
    let denom: f64 = rows.iter().map(|(p, u)| p * u).sum();
    let usable = denom.is_finite() && denom > 0.0;
    if !usable {
        return Err(MarketError::ZeroDenominator);
    }
    Ok(revenue.as_major_f64() / denom)
}

/// One subclass row inside a segment computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub subclass: String,
    /// Units attributed to this segment (after even multi-segment split).
    pub units: f64,
    pub price_low: Currency,
    pub price_high: Currency,
    pub midpoint: Currency,
    pub relative_price: f64,
    pub adjusted_price: Currency,
    pub revenue: Currency,
}

/// A fully priced segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentComputation {
    pub segment: String,
    pub revenue: Currency,
    pub adjustment_factor: f64,
    pub rows: Vec<SegmentRow>,
}

impl SegmentComputation {
    pub fn total_row_revenue(&self) -> Currency {
        self.rows
            .iter()
            .fold(Currency::ZERO, |acc, r| acc.saturating_add(r.revenue))
    }
}

/// Price one segment given its revenue and its subclass rows
/// (subclass, units-in-segment). Exposed separately so tables published
/// with a stated segment revenue can be reproduced without going
/// through share × market.
pub fn compute_segment(
    segment: &str,
    revenue: Currency,
    members: &[(&RobotSubclass, f64)],
) -> Result<SegmentComputation, MarketError> {
    if members.is_empty() {
        return Err(MarketError::EmptySegment(segment.to_string()));
    }
    let subclasses: Vec<&RobotSubclass> = members.iter().map(|(sc, _)| *sc).collect();
    let relative = relative_prices(&subclasses)?;
    let rows_for_factor: Vec<(f64, f64)> = members
        .iter()
        .map(|(sc, units)| (relative[&sc.name], *units))
        .collect();
    let x = adjustment_factor(revenue, &rows_for_factor)?;

    let mut rows = Vec::with_capacity(members.len());
    for (sc, units) in members {
        let p_rel = relative[&sc.name];
        let adjusted = Currency::from_major_f64(x * p_rel);
        let revenue_row = Currency::from_major_f64(x * p_rel * units);
        rows.push(SegmentRow {
            subclass: sc.name.clone(),
            units: *units,
            price_low: sc.price_low,
            price_high: sc.price_high,
            midpoint: sc.price_midpoint(),
            relative_price: p_rel,
            adjusted_price: adjusted,
            revenue: revenue_row,
        });
    }
    rows.sort_by(|a, b| a.subclass.cmp(&b.subclass));
    Ok(SegmentComputation {
        segment: segment.to_string(),
        revenue,
        adjustment_factor: x,
        rows,
    })
}

/// A segment that carries revenue but no units; its revenue stays
/// unallocated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnallocatedSegment {
    pub segment: String,
    pub revenue: Currency,
}

/// The full robot revenue pipeline result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRevenueReport {
    pub segments: Vec<SegmentComputation>,
    pub per_subclass: BTreeMap<String, Currency>,
    /// Keyed by ontology node title.
    pub per_node: BTreeMap<String, Currency>,
    pub unallocated: Vec<UnallocatedSegment>,
}

impl RobotRevenueReport {
    pub fn allocated_total(&self) -> Currency {
        self.per_subclass
            .values()
            .fold(Currency::ZERO, |acc, v| acc.saturating_add(*v))
    }
}

/// Steps 1–5 of the robot pipeline: segment revenues from shares,
/// even unit split for multi-segment subclasses (with identical price
/// bounds in each), per-segment pricing, then per-subclass and
/// per-node revenue sums.
pub fn robot_revenue_pipeline(
    config: &MarketConfig,
    segment_shares: &[SegmentShare],
    subclasses: &[RobotSubclass],
) -> Result<RobotRevenueReport, MarketError> {
    config.validate()?;
    let known: BTreeMap<&str, f64> = segment_shares
        .iter()
        .map(|s| (s.segment.as_str(), s.share))
        .collect();
    for sc in subclasses {
        if sc.ontology_node.is_empty() {
            return Err(MarketError::UnmappedSubclass(sc.name.clone()));
        }
        for seg in &sc.segments {
            if !known.contains_key(seg.as_str()) {
                return Err(MarketError::UnknownSegment {
                    subclass: sc.name.clone(),
                    segment: seg.clone(),
                });
            }
        }
    }

    let mut segments = Vec::new();
    let mut unallocated = Vec::new();
    let mut per_subclass: BTreeMap<String, Currency> = BTreeMap::new();
    for share in segment_shares {
        let revenue =
            Currency::from_minor((share.share * config.robotics_market.minor() as f64).round() as i64);
        let members: Vec<(&RobotSubclass, f64)> = subclasses
            .iter()
            .filter(|sc| sc.segments.iter().any(|s| s == &share.segment))
            .map(|sc| (sc, sc.units as f64 / sc.segments.len() as f64))
            .collect();
        let total_units: f64 = members.iter().map(|(_, u)| u).sum();
        if members.is_empty() || total_units <= 0.0 {
            if revenue.minor() > 0 {
                unallocated.push(UnallocatedSegment {
                    segment: share.segment.clone(),
                    revenue,
                });
            }
            continue;
        }
        let computation = compute_segment(&share.segment, revenue, &members)?;
        for row in &computation.rows {
            let slot = per_subclass.entry(row.subclass.clone()).or_insert(Currency::ZERO);
            *slot = slot.saturating_add(row.revenue);
        }
        segments.push(computation);
    }

    let mut per_node: BTreeMap<String, Currency> = BTreeMap::new();
    for sc in subclasses {
        if let Some(value) = per_subclass.get(&sc.name) {
            let slot = per_node.entry(sc.ontology_node.clone()).or_insert(Currency::ZERO);
            *slot = slot.saturating_add(*value);
        }
    }

    Ok(RobotRevenueReport {
        segments,
        per_subclass,
        per_node,
        unallocated,
    })
}

/// Per-node combined view of software and robot value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeValue {
    pub software: Currency,
    pub robot: Currency,
    pub total: Currency,
    /// software / total; 0 when the node carries no value at all.
    pub software_fraction: f64,
}

/// The combined software + robot market view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedView {
    pub per_node: BTreeMap<String, NodeValue>,
    pub software_market: Currency,
    pub robotics_market: Currency,
    pub total_market: Currency,
    pub global_software_fraction: f64,
}

impl CombinedView {
    /// Whole-percent split, software then robotics.
    pub fn rounded_split(&self) -> (u32, u32) {
        let sw = (self.global_software_fraction * 100.0).round() as u32;
        (sw, 100 - sw)
    }
}

/// Pointwise combination of per-node value maps (keyed by node title).
/// Every key must name a snapshot node.
pub fn combine(
    snapshot: &ActivitySnapshot,
    software: &BTreeMap<String, Currency>,
    robot: &BTreeMap<String, Currency>,
    config: &MarketConfig,
) -> Result<CombinedView, MarketError> {
    config.validate()?;
    let mut titles: Vec<&String> = software.keys().chain(robot.keys()).collect();
    titles.sort();
    titles.dedup();
    let mut per_node = BTreeMap::new();
    for title in titles {
        if !snapshot.contains_title(title) {
            return Err(MarketError::UnknownNode(title.clone()));
        }
        let sw = software.get(title).copied().unwrap_or(Currency::ZERO);
        let rb = robot.get(title).copied().unwrap_or(Currency::ZERO);
        let total = sw.saturating_add(rb);
        let fraction = if total.minor() > 0 {
            sw.minor() as f64 / total.minor() as f64
        } else {
            0.0
        };
        per_node.insert(
            title.clone(),
            NodeValue {
                software: sw,
                robot: rb,
                total,
                software_fraction: fraction,
            },
        );
    }
    let software_market = config.software_market();
    let total_market = config.total_ai_market;
    Ok(CombinedView {
        per_node,
        software_market,
        robotics_market: config.robotics_market,
        total_market,
        global_software_fraction: software_market.minor() as f64 / total_market.minor() as f64,
    })
}

/// Export one segment as the golden-comparison table:
/// `subclass,units,price_low,price_high,midpoint,relative,adjusted,revenue`.
pub fn export_segment_csv(segment: &SegmentComputation) -> Vec<u8> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record([
        "subclass",
        "units",
        "price_low",
        "price_high",
        "midpoint",
        "relative",
        "adjusted",
        "revenue",
    ])
    .expect("in-memory write");
    for row in &segment.rows {
        wtr.write_record([
            row.subclass.as_str(),
            &format!("{}", row.units),
            &row.price_low.to_string(),
            &row.price_high.to_string(),
            &row.midpoint.to_string(),
            &format!("{:.4}", row.relative_price),
            &row.adjusted_price.to_string(),
            &row.revenue.to_string(),
        ])
        .expect("in-memory write");
    }
    wtr.into_inner().expect("in-memory flush")
}
