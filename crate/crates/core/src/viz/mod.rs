//! Sunburst construction from tallies, plus deterministic SVG and
//! structured-document emission.

mod doc;
mod svg;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::Tallies;
use crate::ontology::{ActivitySnapshot, NodeId};

pub use doc::{emit_doc, parse_doc, SUNBURST_SCHEMA};
pub use svg::emit_svg;

/// One annular sector. Angles are degrees, ring 0 is the root disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstArc {
    pub node: NodeId,
    pub title: String,
    pub ring: u32,
    pub start_deg: f64,
    pub end_deg: f64,
    /// Aggregated share of the total, in [0, 1].
    pub percent: f64,
    /// Linear color intensity in [0, 1].
    pub intensity: f64,
    /// Multiply-inherited duplicate.
    pub dashed: bool,
    /// Zero aggregated value.
    pub gray: bool,
    /// Index of the parent arc within the model, pre-order.
    pub parent: Option<usize>,
}

impl SunburstArc {
    pub fn span_deg(&self) -> f64 {
        self.end_deg - self.start_deg
    }
}

/// A thin unlabeled band marking a collection group on its children's
/// ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionBand {
    pub label: String,
    pub ring: u32,
    pub start_deg: f64,
    pub end_deg: f64,
}

/// What angular width is proportional to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularWeighting {
    /// Count of descendant activity nodes, plus one for the node itself.
    DescendantActivities,
    /// Count of descendant leaf activity nodes (at least one).
    LeafActivities,
}

/// A fully laid-out sunburst.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunburstModel {
    pub arcs: Vec<SunburstArc>,
    pub separators: Vec<CollectionBand>,
    pub max_depth: u32,
    pub color_scale_max: f64,
    /// Labels are suppressed below this arc width, in degrees.
    pub label_threshold_deg: f64,
    /// Total weight the percents are against (the root aggregate).
    pub total: f64,
}

#[derive(Debug, Error)]
pub enum VizError {
    #[error("max_depth must be at least 1")]
    MaxDepthZero,
    #[error("color_scale_max must be a positive fraction")]
    BadColorScale(f64),
    #[error("snapshot has no root node")]
    NoRoot,
    #[error("malformed sunburst document: {0}")]
    Malformed(String),
}

/// Build the sunburst model.
///
/// The root spans 360 degrees. A child's angular width within its parent
/// is proportional to its weight under `weighting`; children are
/// ordered plain-first then collection groups, titles sorted, so the
/// layout is deterministic. A multiply-inherited node materializes one
/// arc per rendered parent and every such arc is dashed.
pub fn build_sunburst(
    snapshot: &ActivitySnapshot,
    tallies: &Tallies,
    max_depth: u32,
    color_scale_max: f64,
    weighting: AngularWeighting,
) -> Result<SunburstModel, VizError> {
    if max_depth < 1 {
        return Err(VizError::MaxDepthZero);
    }
    if !(color_scale_max > 0.0 && color_scale_max.is_finite()) {
        return Err(VizError::BadColorScale(color_scale_max));
    }
    let root = snapshot.root_node().ok_or(VizError::NoRoot)?;
    let total = tallies.get(&root.id).aggregated;
    let root_idx = snapshot.require(&root.id).expect("root resolves");

    let mut builder = Builder {
        snapshot,
        tallies,
        groups: snapshot.grouped_children(),
        max_depth,
        color_scale_max,
        total,
        weighting,
        weights: HashMap::new(),
        arcs: Vec::new(),
        separators: Vec::new(),
    };
    builder.place(root_idx, 0, 0.0, 360.0, None);

    // Dashed iff the node has two or more parents among rendered nodes.
    let rendered: HashSet<&NodeId> = builder.arcs.iter().map(|a| &a.node).collect();
    let dashed_nodes: HashSet<NodeId> = rendered
        .iter()
        .filter(|id| {
            let idx = snapshot.require(id).expect("rendered node exists");
            let rendered_parents = snapshot
                .parents_idx(idx)
                .iter()
                .filter(|&&p| rendered.contains(&snapshot.node_at(p).id))
                .count();
            rendered_parents >= 2
        })
        .map(|id| (*id).clone())
        .collect();
    for arc in &mut builder.arcs {
        arc.dashed = dashed_nodes.contains(&arc.node);
    }

    Ok(SunburstModel {
        arcs: builder.arcs,
        separators: builder.separators,
        max_depth,
        color_scale_max,
        label_threshold_deg: 3.0,
        total,
    })
}

struct Builder<'a> {
    snapshot: &'a ActivitySnapshot,
    tallies: &'a Tallies,
    groups: Vec<crate::ontology::ChildGroups>,
    max_depth: u32,
    color_scale_max: f64,
    total: f64,
    weighting: AngularWeighting,
    weights: HashMap<usize, f64>,
    arcs: Vec<SunburstArc>,
    separators: Vec<CollectionBand>,
}

impl<'a> Builder<'a> {
    fn place(&mut self, idx: usize, ring: u32, start: f64, end: f64, parent: Option<usize>) {
        let node = self.snapshot.node_at(idx);
        let aggregated = self.tallies.get(&node.id).aggregated;
        let percent = if self.total > 0.0 { aggregated / self.total } else { 0.0 };
        let intensity = (percent / self.color_scale_max).min(1.0);
        let arc_index = self.arcs.len();
        self.arcs.push(SunburstArc {
            node: node.id.clone(),
            title: node.title.clone(),
            ring,
            start_deg: start,
            end_deg: end,
            percent,
            intensity,
            dashed: false,
            gray: aggregated == 0.0,
            parent,
        });

        if ring + 1 >= self.max_depth {
            return;
        }

        // Ordered children: plain ones first, then collection groups;
        // `grouped_children` already sorted both by title.
        let mut ordered: Vec<(usize, Option<usize>)> =
            self.groups[idx].plain.iter().map(|&c| (c, None)).collect();
        let group_labels: Vec<String> =
            self.groups[idx].collections.iter().map(|(l, _)| l.clone()).collect();
        for (gi, (_, members)) in self.groups[idx].collections.iter().enumerate() {
            for &child in members {
                ordered.push((child, Some(gi)));
            }
        }
        if ordered.is_empty() {
            return;
        }

        let weights: Vec<f64> = ordered.iter().map(|(c, _)| self.weight_of(*c)).collect();
        let weight_sum: f64 = weights.iter().sum();
        let span = end - start;

        // Cumulative fractions keep children exactly partitioning the
        // parent span.
        let mut cumulative = 0.0;
        let mut group_ranges: Vec<(usize, f64, f64)> = Vec::new();
        for ((child, group), weight) in ordered.iter().zip(&weights) {
            let child_start = start + span * (cumulative / weight_sum);
            cumulative += weight;
            let child_end = start + span * (cumulative / weight_sum);
            if let Some(gi) = group {
                match group_ranges.iter_mut().find(|(g, _, _)| g == gi) {
                    Some((_, _, e)) => *e = child_end,
                    None => group_ranges.push((*gi, child_start, child_end)),
                }
            }
            self.place(*child, ring + 1, child_start, child_end, Some(arc_index));
        }
        for (gi, s, e) in group_ranges {
            self.separators.push(CollectionBand {
                label: group_labels[gi].clone(),
                ring: ring + 1,
                start_deg: s,
                end_deg: e,
            });
        }
    }

    /// Angular weight of a node: structural breadth, not usage.
    fn weight_of(&mut self, idx: usize) -> f64 {
        if let Some(&w) = self.weights.get(&idx) {
            return w;
        }
        let mut seen = HashSet::new();
        seen.insert(idx);
        let mut stack = vec![idx];
        let mut activity_descendants = 0usize;
        let mut leaf_descendants = 0usize;
        while let Some(i) = stack.pop() {
            for &c in self.snapshot.children_idx(i) {
                if seen.insert(c) {
                    let node = self.snapshot.node_at(c);
                    if node.kind.is_activity() {
                        activity_descendants += 1;
                        if self
                            .snapshot
                            .children_idx(c)
                            .iter()
                            .all(|&g| !self.snapshot.node_at(g).kind.is_activity())
                        {
                            leaf_descendants += 1;
                        }
                    }
                    stack.push(c);
                }
            }
        }
        let w = match self.weighting {
            AngularWeighting::DescendantActivities => (activity_descendants + 1) as f64,
            AngularWeighting::LeafActivities => leaf_descendants.max(1) as f64,
        };
        self.weights.insert(idx, w);
        w
    }
}
