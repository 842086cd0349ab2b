//! Per-node tallies with double-count removal, percentages, coverage,
//! longitudinal slices, ranking, and tabular export.
//!
//! De-duplication is per item per ancestor: an item contributes its
//! weight once to every node in the union of its assigned nodes'
//! ancestor cones, no matter how many paths lead there.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ActivitySnapshot, NodeId};

/// One item placed at one node, with a weight (1.0 for unit counts,
/// currency for value mode) and an optional year for slicing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub item: String,
    pub node: NodeId,
    pub weight: f64,
    pub year: Option<i32>,
}

impl Assignment {
    pub fn unit(item: impl Into<String>, node: impl Into<NodeId>) -> Self {
        Assignment {
            item: item.into(),
            node: node.into(),
            weight: 1.0,
            year: None,
        }
    }

    pub fn weighted(item: impl Into<String>, node: impl Into<NodeId>, weight: f64) -> Self {
        Assignment {
            item: item.into(),
            node: node.into(),
            weight,
            year: None,
        }
    }

    pub fn in_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }
}

/// Direct and aggregated weight at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTally {
    pub direct: f64,
    pub aggregated: f64,
    /// Distinct items in this node's descendant cone.
    pub item_set_size: usize,
}

impl NodeTally {
    const EMPTY: NodeTally = NodeTally {
        direct: 0.0,
        aggregated: 0.0,
        item_set_size: 0,
    };
}

/// Tallies for every node in the snapshot (zeros included).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tallies {
    map: BTreeMap<NodeId, NodeTally>,
}

impl Tallies {
    pub fn get(&self, node: &NodeId) -> NodeTally {
        self.map.get(node).copied().unwrap_or(NodeTally::EMPTY)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &NodeTally)> {
        self.map.iter()
    }

    pub fn total_weight(&self, snapshot: &ActivitySnapshot) -> f64 {
        self.get(snapshot.root()).aggregated
    }
}

#[derive(Debug, Error)]
pub enum TallyError {
    #[error("assignment for item {item:?} references unknown node {node:?}")]
    UnknownNode { item: String, node: String },
    #[error("total must be positive, got {0}")]
    NonPositiveTotal(f64),
    #[error("assignment for item {item:?} has no year but year slicing was requested")]
    MissingYear { item: String },
}

/// Fold assignments into per-node tallies.
///
/// `direct(n)` sums weights assigned exactly at `n`. `aggregated(n)`
/// sums, over distinct items assigned at `n` or any descendant, each
/// item's total weight exactly once. Hallucinated classifications must
/// be excluded upstream.
pub fn tally(
    snapshot: &ActivitySnapshot,
    assignments: &[Assignment],
) -> Result<Tallies, TallyError> {
    // item -> (total weight, distinct assigned node indexes)
    let mut items: BTreeMap<&str, (f64, Vec<usize>)> = BTreeMap::new();
    let mut direct: HashMap<usize, f64> = HashMap::new();
    for a in assignments {
        let idx = snapshot.require(&a.node).map_err(|_| TallyError::UnknownNode {
            item: a.item.clone(),
            node: a.node.as_str().to_string(),
        })?;
        *direct.entry(idx).or_insert(0.0) += a.weight;
        let entry = items.entry(a.item.as_str()).or_insert((0.0, Vec::new()));
        entry.0 += a.weight;
        if !entry.1.contains(&idx) {
            entry.1.push(idx);
        }
    }

    // Memoized ancestor cones (self included), as sorted index lists.
    let mut cones: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut aggregated: HashMap<usize, (f64, usize)> = HashMap::new();
    for (weight, nodes) in items.values() {
        let mut union: HashSet<usize> = HashSet::new();
        for &idx in nodes {
            let cone = cones.entry(idx).or_insert_with(|| ancestor_cone(snapshot, idx));
            union.extend(cone.iter().copied());
        }
        for idx in union {
            let slot = aggregated.entry(idx).or_insert((0.0, 0));
            slot.0 += weight;
            slot.1 += 1;
        }
    }

    let mut map = BTreeMap::new();
    for node in snapshot.nodes() {
        let idx = snapshot.require(&node.id).expect("own node exists");
        let (agg, set_size) = aggregated.get(&idx).copied().unwrap_or((0.0, 0));
        map.insert(
            node.id.clone(),
            NodeTally {
                direct: direct.get(&idx).copied().unwrap_or(0.0),
                aggregated: agg,
                item_set_size: set_size,
            },
        );
    }
    Ok(Tallies { map })
}

fn ancestor_cone(snapshot: &ActivitySnapshot, start: usize) -> Vec<usize> {
    let mut seen = HashSet::new();
    seen.insert(start);
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for &p in snapshot.parents_idx(i) {
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    let mut v: Vec<usize> = seen.into_iter().collect();
    v.sort_unstable();
    v
}

/// Aggregated weight per node over a caller-chosen denominator.
pub fn percentages(
    tallies: &Tallies,
    total: f64,
) -> Result<BTreeMap<NodeId, f64>, TallyError> {
    let valid = total.is_finite() && total > 0.0;
    if !valid {
        return Err(TallyError::NonPositiveTotal(total));
    }
    Ok(tallies
        .iter()
        .map(|(id, t)| (id.clone(), t.aggregated / total))
        .collect())
}

/// Fraction of activity nodes (generic + atomic; collections are edge
/// labels and source tasks are provenance) that hold at least one
/// directly assigned item.
pub fn coverage(snapshot: &ActivitySnapshot, assignments: &[Assignment]) -> f64 {
    let mut covered: HashSet<&str> = HashSet::new();
    for a in assignments {
        if let Some(node) = snapshot.get(&a.node) {
            if node.kind.is_activity() {
                covered.insert(node.id.as_str());
            }
        }
    }
    let denominator = snapshot.nodes().filter(|n| n.kind.is_activity()).count();
    if denominator == 0 {
        return 0.0;
    }
    covered.len() as f64 / denominator as f64
}

/// Bucket assignments by year. Cumulative mode includes all prior
/// years in each bucket.
pub fn slice_by_year(
    assignments: &[Assignment],
    cumulative: bool,
) -> Result<BTreeMap<i32, Vec<Assignment>>, TallyError> {
    let mut years: BTreeMap<i32, Vec<Assignment>> = BTreeMap::new();
    for a in assignments {
        let year = a.year.ok_or_else(|| TallyError::MissingYear {
            item: a.item.clone(),
        })?;
        years.entry(year).or_default().push(a.clone());
    }
    if cumulative {
        let mut acc: Vec<Assignment> = Vec::new();
        let mut out = BTreeMap::new();
        for (year, batch) in years {
            acc.extend(batch);
            out.insert(year, acc.clone());
        }
        Ok(out)
    } else {
        Ok(years)
    }
}

/// Which measure a ranking is sorted by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TallyMeasure {
    Direct,
    Aggregated,
}

/// One row of a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedActivity {
    pub node: NodeId,
    pub title: String,
    pub value: f64,
}

/// Top activities by the chosen measure, descending, ties by title.
/// Zero-valued nodes never rank.
pub fn top_activities(
    snapshot: &ActivitySnapshot,
    tallies: &Tallies,
    n: usize,
    by: TallyMeasure,
) -> Vec<RankedActivity> {
    let mut rows: Vec<RankedActivity> = tallies
        .iter()
        .filter_map(|(id, t)| {
            let value = match by {
                TallyMeasure::Direct => t.direct,
                TallyMeasure::Aggregated => t.aggregated,
            };
            if value <= 0.0 {
                return None;
            }
            snapshot.get(id).map(|node| RankedActivity {
                node: id.clone(),
                title: node.title.clone(),
                value,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap()
            .then_with(|| a.title.cmp(&b.title))
    });
    rows.truncate(n);
    rows
}

/// Tabular tally export: `node_id,title,direct,aggregated,percent`,
/// sorted by node id. Percent is against the supplied total, as a
/// 0-100 value.
pub fn export_tally_csv(
    snapshot: &ActivitySnapshot,
    tallies: &Tallies,
    total: f64,
) -> Result<Vec<u8>, TallyError> {
    let valid = total.is_finite() && total > 0.0;
    if !valid {
        return Err(TallyError::NonPositiveTotal(total));
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["node_id", "title", "direct", "aggregated", "percent"])
        .expect("in-memory write");
    for (id, t) in tallies.iter() {
        let title = snapshot.get(id).map(|n| n.title.as_str()).unwrap_or("");
        wtr.write_record([
            id.as_str(),
            title,
            &format_num(t.direct),
            &format_num(t.aggregated),
            &format_num(t.aggregated / total * 100.0),
        ])
        .expect("in-memory write");
    }
    Ok(wtr.into_inner().expect("in-memory flush"))
}

/// Parse a tally export back into per-node aggregates (used by the
/// sunburst command).
pub fn parse_tally_csv(bytes: &[u8]) -> Result<BTreeMap<NodeId, NodeTally>, String> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| e.to_string())?;
        let id = row.get(0).ok_or("missing node_id")?.to_string();
        let direct: f64 = row.get(2).ok_or("missing direct")?.parse().map_err(|_| "bad direct")?;
        let aggregated: f64 =
            row.get(3).ok_or("missing aggregated")?.parse().map_err(|_| "bad aggregated")?;
        out.insert(
            NodeId::new(id),
            NodeTally {
                direct,
                aggregated,
                item_set_size: 0,
            },
        );
    }
    Ok(out)
}

impl Tallies {
    /// Rebuild a `Tallies` from parsed per-node rows.
    pub fn from_map(map: BTreeMap<NodeId, NodeTally>) -> Self {
        Tallies { map }
    }
}

// Shortest round-trip representation keeps exports byte-stable.
fn format_num(v: f64) -> String {
    format!("{v}")
}
