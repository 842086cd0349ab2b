//! Deterministic synthetic fixtures: random DAGs and trees for property
//! suites, layered large snapshots for scale runs, and matching record
//! batches with scripted replies. Everything is seeded; same seed, same
//! output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::classify::ScriptedModel;
use crate::currency::Currency;
use crate::ingest::{AppRecord, Billing};
use crate::ontology::{ActivityNode, ActivitySnapshot, NodeKind, SpecializationEdge};

/// The four-node diamond: one root, two mid nodes, one multiply
/// inherited child.
pub fn diamond() -> ActivitySnapshot {
    let g = |id: &str, title: &str| ActivityNode::new(id, title, NodeKind::Generic);
    ActivitySnapshot::new(
        "diamond",
        "act",
        vec![g("act", "Act"), g("b", "B"), g("c", "C"), g("d", "D")],
        vec![
            SpecializationEdge::new("act", "b"),
            SpecializationEdge::new("act", "c"),
            SpecializationEdge::new("b", "d"),
            SpecializationEdge::new("c", "d"),
        ],
    )
}

/// A random rooted DAG with multiple inheritance. Every non-root node
/// gets one parent among earlier nodes plus extra parents with
/// probability `extra_parent_p`, so the result is always acyclic,
/// rooted, and validate-clean.
pub fn random_dag(seed: u64, max_nodes: usize, extra_parent_p: f64) -> ActivitySnapshot {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_nodes.max(2));
    let mut nodes = vec![ActivityNode::new("n0", "N0", NodeKind::Generic)];
    let mut edges = Vec::new();
    for i in 1..n {
        let id = format!("n{i}");
        nodes.push(ActivityNode::new(id.clone(), format!("N{i}"), NodeKind::Generic));
        let parent = rng.random_range(0..i);
        edges.push(SpecializationEdge::new(format!("n{parent}"), id.clone()));
        if i > 1 && rng.random_bool(extra_parent_p) {
            let mut second = rng.random_range(0..i);
            if second == parent {
                second = (second + 1) % i;
            }
            if second != parent {
                edges.push(SpecializationEdge::new(format!("n{second}"), id.clone()));
            }
        }
    }
    ActivitySnapshot::new(format!("dag-{seed}"), "n0", nodes, edges)
}

/// A random single-inheritance tree.
pub fn random_tree(seed: u64, max_nodes: usize) -> ActivitySnapshot {
    random_dag(seed, max_nodes, 0.0)
}

/// Random unit assignments: `items` items placed uniformly at random
/// nodes, with years drawn from 2016..=2025.
pub fn random_assignments(
    snapshot: &ActivitySnapshot,
    items: usize,
    seed: u64,
) -> Vec<crate::aggregate::Assignment> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let ids: Vec<_> = snapshot.nodes().map(|n| n.id.clone()).collect();
    (0..items)
        .map(|i| {
            let node = ids[rng.random_range(0..ids.len())].clone();
            crate::aggregate::Assignment::unit(format!("item{i}"), node)
                .in_year(rng.random_range(2016..=2025))
        })
        .collect()
}

/// A layered snapshot of roughly `target_nodes` nodes shaped like the
/// production data: a generic trunk, an atomic layer, a source-task
/// fringe, and a sprinkle of multiple inheritance inside each layer's
/// parent generation.
pub fn layered_snapshot(target_nodes: usize, seed: u64) -> ActivitySnapshot {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut nodes: Vec<ActivityNode> = vec![ActivityNode::new("a0", "A0", NodeKind::Generic)];
    let mut edges = Vec::new();
    let mut previous_layer: Vec<usize> = vec![0];
    let mut next_id = 1usize;

    // Generic layers roughly triple until the budget for atomic and
    // source-task layers remains.
    let atomic_share = target_nodes / 3;
    let task_share = target_nodes / 4;
    let generic_budget = target_nodes.saturating_sub(atomic_share + task_share).max(2);
    while nodes.len() < generic_budget {
        let width = (previous_layer.len() * 3).min(generic_budget - nodes.len()).max(1);
        let mut layer = Vec::with_capacity(width);
        for _ in 0..width {
            let idx = next_id;
            next_id += 1;
            let id = format!("a{idx}");
            nodes.push(ActivityNode::new(id.clone(), format!("A{idx}"), NodeKind::Generic));
            let parent = previous_layer[rng.random_range(0..previous_layer.len())];
            edges.push(SpecializationEdge::new(format!("a{parent}"), id.clone()));
            if previous_layer.len() > 1 && rng.random_bool(0.01) {
                let second = previous_layer[rng.random_range(0..previous_layer.len())];
                if second != parent {
                    edges.push(SpecializationEdge::new(format!("a{second}"), id.clone()));
                }
            }
            layer.push(idx);
        }
        previous_layer = layer;
    }

    // Atomic layer under the last generic layer.
    let mut atomic_layer = Vec::with_capacity(atomic_share);
    for _ in 0..atomic_share {
        let idx = next_id;
        next_id += 1;
        let id = format!("a{idx}");
        nodes.push(ActivityNode::new(id.clone(), format!("A{idx}"), NodeKind::Atomic));
        let parent = previous_layer[rng.random_range(0..previous_layer.len())];
        edges.push(SpecializationEdge::new(format!("a{parent}"), id.clone()));
        atomic_layer.push(idx);
    }

    // Source tasks under atomic nodes.
    for _ in 0..task_share {
        let idx = next_id;
        next_id += 1;
        let id = format!("a{idx}");
        nodes.push(ActivityNode::new(id.clone(), format!("A{idx}"), NodeKind::SourceTask));
        let parent = atomic_layer[rng.random_range(0..atomic_layer.len())];
        edges.push(SpecializationEdge::new(format!("a{parent}"), id.clone()));
    }

    ActivitySnapshot::new(format!("layered-{seed}"), "a0", nodes, edges)
}

/// Synthetic application records named `app0001`, `app0002`, …
pub fn app_records(count: usize, seed: u64) -> Vec<AppRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let billings = [
        Billing::Monthly,
        Billing::Yearly,
        Billing::OneTime,
        Billing::FreeOnly,
        Billing::Unknown,
    ];
    (0..count)
        .map(|i| {
            let billing = billings[rng.random_range(0..billings.len())];
            let price = if billing == Billing::FreeOnly {
                Currency::ZERO
            } else {
                Currency::from_major(rng.random_range(1..500))
            };
            let year = rng.random_range(2016..=2025);
            let month = rng.random_range(1..=12);
            AppRecord {
                name: format!("app{i:04}"),
                tagline: format!("Synthetic tagline {i}"),
                description: format!("Synthetic description for record {i}."),
                price,
                billing,
                billing_raw: billing.as_str().to_string(),
                saves: rng.random_range(0..5000),
                launch_date: chrono::NaiveDate::from_ymd_opt(year, month, 1).unwrap(),
                platform_tags: vec!["synthetic".to_string()],
            }
        })
        .collect()
}

/// A scripted model answering every record with a deterministic,
/// seed-chosen activity title from the snapshot.
pub fn scripted_replies(
    snapshot: &ActivitySnapshot,
    records: &[AppRecord],
    seed: u64,
) -> ScriptedModel {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let titles: Vec<&str> = snapshot
        .nodes()
        .filter(|n| n.kind.is_activity())
        .map(|n| n.title.as_str())
        .collect();
    ScriptedModel::from_pairs(records.iter().map(|r| {
        let title = titles[rng.random_range(0..titles.len())];
        (
            r.name.clone(),
            ScriptedModel::reply_doc("perform activity", title),
        )
    }))
}
