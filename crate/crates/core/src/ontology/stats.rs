//! Whole-snapshot statistics: counts by kind and the distribution of
//! maximal root-to-sink path lengths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActivitySnapshot, NodeKind};

/// Aggregate statistics over a snapshot.
///
/// Path lengths count nodes, not edges, and are taken over all maximal
/// paths from the root to a sink. Sinks are the source-task nodes when
/// any exist, otherwise the childless nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthStats {
    pub generic_count: usize,
    pub atomic_count: usize,
    pub source_task_count: usize,
    pub multiple_inheritance_count: usize,
    pub path_count: u128,
    pub min_path_len: u32,
    pub max_path_len: u32,
    pub median_path_len: f64,
}

impl ActivitySnapshot {
    /// Exact statistics over all maximal root-to-sink paths, computed by
    /// counting paths per length in topological order rather than
    /// enumerating them.
    pub fn stats(&self) -> DepthStats {
        let n = self.len();
        let mut generic_count = 0;
        let mut atomic_count = 0;
        let mut source_task_count = 0;
        for node in self.nodes() {
            match node.kind {
                NodeKind::Generic => generic_count += 1,
                NodeKind::Atomic => atomic_count += 1,
                NodeKind::SourceTask => source_task_count += 1,
            }
        }
        let multiple_inheritance_count =
            (0..n).filter(|&i| self.parents_idx(i).len() >= 2).count();

        let has_source_tasks = self
            .nodes()
            .any(|node| node.kind == NodeKind::SourceTask);
        let is_sink = |i: usize| {
            if has_source_tasks {
                self.node_at(i).kind == NodeKind::SourceTask
            } else {
                self.children_idx(i).is_empty()
            }
        };

        // lengths[i]: how many distinct root-to-i paths exist per node
        // count. Only nodes in the topological order participate.
        let mut lengths: Vec<BTreeMap<u32, u128>> = vec![BTreeMap::new(); n];
        let root_idx = self.idx(self.root());
        if let Some(r) = root_idx {
            if self.depth_at(r).is_some() {
                lengths[r].insert(1, 1);
            }
        }
        for &i in self.topo_order() {
            if lengths[i].is_empty() {
                continue;
            }
            let current = lengths[i].clone();
            for &c in self.children_idx(i) {
                for (&len, &count) in &current {
                    let slot = lengths[c].entry(len + 1).or_insert(0);
                    *slot = slot.saturating_add(count);
                }
            }
        }

        let mut histogram: BTreeMap<u32, u128> = BTreeMap::new();
        for &i in self.topo_order() {
            if is_sink(i) {
                for (&len, &count) in &lengths[i] {
                    let slot = histogram.entry(len).or_insert(0);
                    *slot = slot.saturating_add(count);
                }
            }
        }

        let path_count: u128 = histogram.values().copied().sum();
        let (min_path_len, max_path_len, median_path_len) = if path_count == 0 {
            (0, 0, 0.0)
        } else {
            let min = *histogram.keys().next().unwrap();
            let max = *histogram.keys().next_back().unwrap();
            let median = if path_count % 2 == 1 {
                nth_length(&histogram, path_count / 2 + 1) as f64
            } else {
                let lo = nth_length(&histogram, path_count / 2);
                let hi = nth_length(&histogram, path_count / 2 + 1);
                (lo as f64 + hi as f64) / 2.0
            };
            (min, max, median)
        };

        DepthStats {
            generic_count,
            atomic_count,
            source_task_count,
            multiple_inheritance_count,
            path_count,
            min_path_len,
            max_path_len,
            median_path_len,
        }
    }
}

/// The `rank`-th smallest length (1-indexed) in a length → count histogram.
fn nth_length(histogram: &BTreeMap<u32, u128>, rank: u128) -> u32 {
    let mut seen = 0u128;
    for (&len, &count) in histogram {
        seen += count;
        if seen >= rank {
            return len;
        }
    }
    *histogram.keys().next_back().expect("non-empty histogram")
}
