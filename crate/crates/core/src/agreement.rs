//! Hierarchy-aware inter-annotator agreement: Wu-Palmer similarity on
//! the activity DAG, similarity-weighted Cohen's kappa, and bootstrap
//! confidence intervals.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ActivitySnapshot, NodeId, OntologyError};

/// One annotator's labels: item id → node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub annotator: String,
    pub items: BTreeMap<String, NodeId>,
}

impl AnnotationSet {
    pub fn new(annotator: impl Into<String>) -> Self {
        AnnotationSet {
            annotator: annotator.into(),
            items: BTreeMap::new(),
        }
    }

    pub fn with_items<I, K, V>(annotator: impl Into<String>, items: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<NodeId>,
    {
        AnnotationSet {
            annotator: annotator.into(),
            items: items.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

/// The winning Wu-Palmer computation for a node pair.
///
/// `s = 2n / (n1 + n2)` where `n` is the depth of the chosen common
/// ancestor and `n1`, `n2` are the node depths measured through that
/// ancestor (its depth plus the shortest descent to each node). On a
/// DAG the ancestor maximizing `s` wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WupComputation {
    pub common_ancestor: NodeId,
    pub n: u32,
    pub n1: u32,
    pub n2: u32,
    pub s: f64,
}

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("need at least two annotation sets, got {0}")]
    TooFewSets(usize),
    #[error("no shared items between any pair of annotation sets")]
    DisjointItems,
    #[error("need at least two shared items, got {0}")]
    TooFewItems(usize),
    #[error("resamples must be at least 1")]
    NoResamples,
    #[error("confidence level {0} outside (0, 1)")]
    BadLevel(f64),
    #[error("every bootstrap resample failed")]
    AllResamplesFailed,
}

/// Wu-Palmer similarity between two nodes, maximizing over common
/// ancestors. Symmetric; `s = 1` exactly when the nodes are identical.
pub fn wup(
    snapshot: &ActivitySnapshot,
    a: &NodeId,
    b: &NodeId,
) -> Result<WupComputation, AgreementError> {
    let ia = snapshot.require(a).map_err(AgreementError::Ontology)?;
    let ib = snapshot.require(b).map_err(AgreementError::Ontology)?;
    let dist_a = snapshot.ascent_distances(ia);
    let dist_b = snapshot.ascent_distances(ib);

    let mut best: Option<WupComputation> = None;
    for (&c, &da) in &dist_a {
        let Some(&db) = dist_b.get(&c) else { continue };
        let Some(depth_c) = snapshot.depth_at(c) else { continue };
        let n1 = depth_c + da;
        let n2 = depth_c + db;
        let s = 2.0 * depth_c as f64 / (n1 + n2) as f64;
        let candidate = WupComputation {
            common_ancestor: snapshot.node_at(c).id.clone(),
            n: depth_c,
            n1,
            n2,
            s,
        };
        let replace = match &best {
            None => true,
            Some(cur) => {
                s > cur.s
                    || (s == cur.s
                        && (candidate.n > cur.n
                            || (candidate.n == cur.n
                                && snapshot.node_at(c).title
                                    < snapshot.get(&cur.common_ancestor).unwrap().title)))
            }
        };
        if replace {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| {
        AgreementError::Ontology(OntologyError::NoRootPath(a.as_str().to_string()))
    })
}

/// How pairs of annotation sets are formed for the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanWupMode {
    /// All unordered annotator pairs.
    PairwiseAll,
    /// The first set is the reference; pairs are (reference, other).
    VersusReference,
}

/// Mean Wu-Palmer similarity with a coverage note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanWup {
    pub mean: f64,
    /// (annotator pair, item) combinations actually scored.
    pub pairs_counted: usize,
    /// Combinations skipped because an item was missing from one side.
    pub missing_skipped: usize,
}

/// Mean Wu-Palmer similarity over annotator pairs and items. Items
/// missing from either side of a pair are excluded pairwise and counted
/// in the coverage note.
pub fn mean_wup(
    snapshot: &ActivitySnapshot,
    sets: &[AnnotationSet],
    mode: MeanWupMode,
) -> Result<MeanWup, AgreementError> {
    if sets.len() < 2 {
        return Err(AgreementError::TooFewSets(sets.len()));
    }
    let pairs: Vec<(usize, usize)> = match mode {
        MeanWupMode::PairwiseAll => (0..sets.len())
            .flat_map(|i| ((i + 1)..sets.len()).map(move |j| (i, j)))
            .collect(),
        MeanWupMode::VersusReference => (1..sets.len()).map(|j| (0, j)).collect(),
    };

    let mut cache: HashMap<(NodeId, NodeId), f64> = HashMap::new();
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut skipped = 0usize;
    for &(i, j) in &pairs {
        let universe: BTreeSet<&String> =
            sets[i].items.keys().chain(sets[j].items.keys()).collect();
        for item in universe {
            match (sets[i].items.get(item), sets[j].items.get(item)) {
                (Some(a), Some(b)) => {
                    total += cached_wup(snapshot, &mut cache, a, b)?;
                    counted += 1;
                }
                _ => skipped += 1,
            }
        }
    }
    if counted == 0 {
        return Err(AgreementError::DisjointItems);
    }
    Ok(MeanWup {
        mean: total / counted as f64,
        pairs_counted: counted,
        missing_skipped: skipped,
    })
}

fn cached_wup(
    snapshot: &ActivitySnapshot,
    cache: &mut HashMap<(NodeId, NodeId), f64>,
    a: &NodeId,
    b: &NodeId,
) -> Result<f64, AgreementError> {
    let key = if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    if let Some(&s) = cache.get(&key) {
        return Ok(s);
    }
    let s = wup(snapshot, a, b)?.s;
    cache.insert(key, s);
    Ok(s)
}

/// Similarity-weighted Cohen's kappa between two annotation sets over
/// their shared items.
///
/// With agreement weights `w(i, j) = s(i, j)`:
/// observed agreement is the mean item weight, expected agreement is
/// `Σ m_a(i) · m_b(j) · w(i, j)` over the two annotators' marginal label
/// distributions, and `κ = (p_o − p_e) / (1 − p_e)`. When `p_e = 1`
/// (both constant and equal) the result is 1.
pub fn weighted_kappa(
    snapshot: &ActivitySnapshot,
    set_a: &AnnotationSet,
    set_b: &AnnotationSet,
) -> Result<f64, AgreementError> {
    let shared: Vec<(&NodeId, &NodeId)> = set_a
        .items
        .iter()
        .filter_map(|(item, a)| set_b.items.get(item).map(|b| (a, b)))
        .collect();
    if shared.len() < 2 {
        return Err(AgreementError::TooFewItems(shared.len()));
    }
    let n = shared.len() as f64;

    let mut cache: HashMap<(NodeId, NodeId), f64> = HashMap::new();
    let mut p_o = 0.0;
    for (a, b) in &shared {
        p_o += cached_wup(snapshot, &mut cache, a, b)?;
    }
    p_o /= n;

    let mut marginal_a: BTreeMap<&NodeId, f64> = BTreeMap::new();
    let mut marginal_b: BTreeMap<&NodeId, f64> = BTreeMap::new();
    for (a, b) in &shared {
        *marginal_a.entry(a).or_insert(0.0) += 1.0 / n;
        *marginal_b.entry(b).or_insert(0.0) += 1.0 / n;
    }
    let mut p_e = 0.0;
    for (la, pa) in &marginal_a {
        for (lb, pb) in &marginal_b {
            p_e += pa * pb * cached_wup(snapshot, &mut cache, la, lb)?;
        }
    }

    if (1.0 - p_e).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Multi-annotator variant: mean of pairwise kappa over all unordered
/// pairs.
pub fn mean_weighted_kappa(
    snapshot: &ActivitySnapshot,
    sets: &[AnnotationSet],
) -> Result<f64, AgreementError> {
    if sets.len() < 2 {
        return Err(AgreementError::TooFewSets(sets.len()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            total += weighted_kappa(snapshot, &sets[i], &sets[j])?;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// A percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub low: f64,
    pub high: f64,
    pub resamples_used: usize,
    pub resamples_skipped: usize,
}

/// Nonparametric bootstrap over items: resample the item universe with
/// replacement (the same resampled index multiset applied to every
/// set), recompute the metric per resample, and take the symmetric
/// nearest-rank percentile interval. Deterministic under `seed`; each
/// resample derives its own RNG stream so evaluation order cannot
/// matter. Metric failures skip the resample and are counted.
pub fn bootstrap_ci<F>(
    metric: F,
    sets: &[AnnotationSet],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCi, AgreementError>
where
    F: Fn(&[AnnotationSet]) -> Result<f64, AgreementError>,
{
    if resamples == 0 {
        return Err(AgreementError::NoResamples);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AgreementError::BadLevel(level));
    }
    let universe: Vec<&String> = {
        let mut set = BTreeSet::new();
        for s in sets {
            set.extend(s.items.keys());
        }
        set.into_iter().collect()
    };
    if universe.is_empty() {
        return Err(AgreementError::DisjointItems);
    }

    let mut values = Vec::with_capacity(resamples);
    let mut skipped = 0usize;
    for r in 0..resamples {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(r as u64 + 1);
        let draw: Vec<&String> = (0..universe.len())
            .map(|_| universe[rng.random_range(0..universe.len())])
            .collect();
        let resampled: Vec<AnnotationSet> = sets
            .iter()
            .map(|s| {
                let items = draw
                    .iter()
                    .enumerate()
                    .filter_map(|(pos, item)| {
                        s.items.get(*item).map(|node| (pos.to_string(), node.clone()))
                    })
                    .collect();
                AnnotationSet {
                    annotator: s.annotator.clone(),
                    items,
                }
            })
            .collect();
        match metric(&resampled) {
            Ok(v) => values.push(v),
            Err(_) => skipped += 1,
        }
    }
    if values.is_empty() {
        return Err(AgreementError::AllResamplesFailed);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (low, high) = percentile_interval(&values, level);
    Ok(BootstrapCi {
        low,
        high,
        resamples_used: values.len(),
        resamples_skipped: skipped,
    })
}

/// Symmetric nearest-rank percentile bounds over sorted values: the
/// lower bound is the `ceil(α/2 · n)`-th order statistic (1-indexed)
/// and the upper bound the `(n + 1 − lower)`-th. At n = 1000 and 95%
/// these are ranks 25 and 976.
pub fn percentile_interval(sorted: &[f64], level: f64) -> (f64, f64) {
    let n = sorted.len();
    let alpha = 1.0 - level;
    // A hair of slack keeps exact ranks (0.025 * 1000 = 25) from being
    // pushed up by float noise.
    let lower_rank = (((alpha / 2.0 * n as f64) - 1e-9).ceil() as usize).max(1);
    let upper_rank = n + 1 - lower_rank;
    (sorted[lower_rank - 1], sorted[upper_rank - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ActivityNode, NodeKind, SpecializationEdge};

    fn gnode(id: &str, title: &str) -> ActivityNode {
        ActivityNode::new(id, title, NodeKind::Generic)
    }

    fn chain3() -> ActivitySnapshot {
        ActivitySnapshot::new(
            "t",
            "act",
            vec![gnode("act", "Act"), gnode("a", "A"), gnode("b", "B")],
            vec![SpecializationEdge::new("act", "a"), SpecializationEdge::new("a", "b")],
        )
    }

    fn siblings() -> ActivitySnapshot {
        ActivitySnapshot::new(
            "t",
            "act",
            vec![gnode("act", "Act"), gnode("a", "A"), gnode("b", "B"), gnode("c", "C")],
            vec![
                SpecializationEdge::new("act", "a"),
                SpecializationEdge::new("a", "b"),
                SpecializationEdge::new("a", "c"),
            ],
        )
    }

    #[test]
    fn identical_nodes_score_one() {
        let s = chain3();
        let w = wup(&s, &"b".into(), &"b".into()).unwrap();
        assert_eq!(w.s, 1.0);
        assert_eq!(w.n, 3);
    }

    #[test]
    fn chain_example() {
        let s = chain3();
        let w = wup(&s, &"a".into(), &"b".into()).unwrap();
        assert_eq!((w.n, w.n1, w.n2), (2, 2, 3));
        assert!((w.s - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sibling_example() {
        let s = siblings();
        let w = wup(&s, &"b".into(), &"c".into()).unwrap();
        assert!((w.s - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(w.common_ancestor.as_str(), "a");
    }

    #[test]
    fn wup_is_symmetric() {
        let s = siblings();
        let ab = wup(&s, &"b".into(), &"c".into()).unwrap().s;
        let ba = wup(&s, &"c".into(), &"b".into()).unwrap().s;
        assert_eq!(ab, ba);
    }

    #[test]
    fn mean_wup_two_sets() {
        let s = chain3();
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a")]);
        let two = AnnotationSet::with_items("y", [("i1", "b"), ("i2", "b")]);
        // i1 agrees (1.0); i2 is A-vs-B (0.8).
        let m = mean_wup(&s, &[one, two], MeanWupMode::PairwiseAll).unwrap();
        assert!((m.mean - 0.9).abs() < 1e-12);
        assert_eq!(m.pairs_counted, 2);
        assert_eq!(m.missing_skipped, 0);
    }

    #[test]
    fn identical_sets_mean_one() {
        let s = chain3();
        let mk = |name: &str| AnnotationSet::with_items(name, [("i1", "b"), ("i2", "a")]);
        let m = mean_wup(&s, &[mk("x"), mk("y"), mk("z")], MeanWupMode::PairwiseAll).unwrap();
        assert_eq!(m.mean, 1.0);
    }

    #[test]
    fn missing_items_are_counted() {
        let s = chain3();
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("only_x", "a")]);
        let two = AnnotationSet::with_items("y", [("i1", "b")]);
        let m = mean_wup(&s, &[one, two], MeanWupMode::PairwiseAll).unwrap();
        assert_eq!(m.pairs_counted, 1);
        assert_eq!(m.missing_skipped, 1);
    }

    #[test]
    fn kappa_perfect_agreement() {
        let s = chain3();
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a")]);
        let two = one.clone();
        assert_eq!(weighted_kappa(&s, &one, &two).unwrap(), 1.0);
    }

    #[test]
    fn kappa_zero_hand_case() {
        // Root with two children at depth 2: s(l1, l2) = 2·1/(2+2) = 0.5.
        // A uniform over {l1, l2}, B always l1, two items:
        // p_o = (1 + 0.5)/2 = 0.75 and p_e = 0.75, so κ = 0 exactly.
        let s = ActivitySnapshot::new(
            "t",
            "act",
            vec![gnode("act", "Act"), gnode("l1", "L1"), gnode("l2", "L2")],
            vec![SpecializationEdge::new("act", "l1"), SpecializationEdge::new("act", "l2")],
        );
        let a = AnnotationSet::with_items("a", [("i1", "l1"), ("i2", "l2")]);
        let b = AnnotationSet::with_items("b", [("i1", "l1"), ("i2", "l1")]);
        let k = weighted_kappa(&s, &a, &b).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn three_identical_sets_mean_kappa_one() {
        let s = chain3();
        let mk = |n: &str| AnnotationSet::with_items(n, [("i1", "b"), ("i2", "a")]);
        assert_eq!(mean_weighted_kappa(&s, &[mk("x"), mk("y"), mk("z")]).unwrap(), 1.0);
    }

    #[test]
    fn bootstrap_constant_metric_degenerate_interval() {
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a")]);
        let two = one.clone();
        let ci = bootstrap_ci(|_| Ok(0.7), &[one, two], 100, 0.95, 1).unwrap();
        assert_eq!((ci.low, ci.high), (0.7, 0.7));
    }

    #[test]
    fn bootstrap_same_seed_is_identical() {
        let s = chain3();
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a"), ("i3", "act")]);
        let two = AnnotationSet::with_items("y", [("i1", "a"), ("i2", "a"), ("i3", "b")]);
        let sets = vec![one, two];
        let metric = |sets: &[AnnotationSet]| {
            mean_wup(&s, sets, MeanWupMode::PairwiseAll).map(|m| m.mean)
        };
        let a = bootstrap_ci(metric, &sets, 200, 0.95, 42).unwrap();
        let b = bootstrap_ci(metric, &sets, 200, 0.95, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nearest_rank_bounds() {
        let values: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(percentile_interval(&values, 0.95), (25.0, 976.0));
        let one = vec![5.0];
        assert_eq!(percentile_interval(&one, 0.95), (5.0, 5.0));
    }

    #[test]
    fn failed_resamples_are_skipped_and_counted() {
        let one = AnnotationSet::with_items("x", [("i1", "b"), ("i2", "a")]);
        let two = one.clone();
        let calls = std::cell::Cell::new(0usize);
        let metric = |_: &[AnnotationSet]| {
            let n = calls.get();
            calls.set(n + 1);
            if n.is_multiple_of(2) {
                Err(AgreementError::DisjointItems)
            } else {
                Ok(1.0)
            }
        };
        let ci = bootstrap_ci(metric, &[one, two], 10, 0.9, 7).unwrap();
        assert_eq!(ci.resamples_skipped, 5);
        assert_eq!(ci.resamples_used, 5);
    }
}
