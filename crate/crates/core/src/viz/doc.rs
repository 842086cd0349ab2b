//! The structured sunburst document, schema `workgraph-sunburst/1`: a
//! nested arc tree plus collection bands, re-parseable into the exact
//! same model.

use serde::{Deserialize, Serialize};

use crate::ontology::NodeId;

use super::{CollectionBand, SunburstArc, SunburstModel, VizError};

pub const SUNBURST_SCHEMA: &str = "workgraph-sunburst/1";

#[derive(Serialize, Deserialize)]
struct DocArc {
    node: String,
    title: String,
    ring: u32,
    start_deg: f64,
    end_deg: f64,
    percent: f64,
    intensity: f64,
    dashed: bool,
    gray: bool,
    #[serde(default)]
    children: Vec<DocArc>,
}

#[derive(Serialize, Deserialize)]
struct Doc {
    schema: String,
    max_depth: u32,
    color_scale_max: f64,
    label_threshold_deg: f64,
    total: f64,
    tree: Option<DocArc>,
    #[serde(default)]
    separators: Vec<CollectionBand>,
}

/// Emit the model as a nested JSON document.
pub fn emit_doc(model: &SunburstModel) -> Vec<u8> {
    let tree = build_tree(model, 0);
    let doc = Doc {
        schema: SUNBURST_SCHEMA.to_string(),
        max_depth: model.max_depth,
        color_scale_max: model.color_scale_max,
        label_threshold_deg: model.label_threshold_deg,
        total: model.total,
        tree,
        separators: model.separators.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("doc serialization cannot fail");
    out.push(b'\n');
    out
}

fn build_tree(model: &SunburstModel, index: usize) -> Option<DocArc> {
    let arc = model.arcs.get(index)?;
    let children = model
        .arcs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.parent == Some(index))
        .filter_map(|(i, _)| build_tree(model, i))
        .collect();
    Some(DocArc {
        node: arc.node.as_str().to_string(),
        title: arc.title.clone(),
        ring: arc.ring,
        start_deg: arc.start_deg,
        end_deg: arc.end_deg,
        percent: arc.percent,
        intensity: arc.intensity,
        dashed: arc.dashed,
        gray: arc.gray,
        children,
    })
}

/// Parse a sunburst document back into a model. Arcs come back in
/// pre-order, matching the builder's order exactly.
pub fn parse_doc(bytes: &[u8]) -> Result<SunburstModel, VizError> {
    let doc: Doc =
        serde_json::from_slice(bytes).map_err(|e| VizError::Malformed(e.to_string()))?;
    if doc.schema != SUNBURST_SCHEMA {
        return Err(VizError::Malformed(format!(
            "unsupported schema {:?} (expected {SUNBURST_SCHEMA:?})",
            doc.schema
        )));
    }
    let mut arcs = Vec::new();
    if let Some(tree) = doc.tree {
        flatten(tree, None, &mut arcs);
    }
    Ok(SunburstModel {
        arcs,
        separators: doc.separators,
        max_depth: doc.max_depth,
        color_scale_max: doc.color_scale_max,
        label_threshold_deg: doc.label_threshold_deg,
        total: doc.total,
    })
}

fn flatten(node: DocArc, parent: Option<usize>, out: &mut Vec<SunburstArc>) {
    let index = out.len();
    out.push(SunburstArc {
        node: NodeId::new(node.node),
        title: node.title,
        ring: node.ring,
        start_deg: node.start_deg,
        end_deg: node.end_deg,
        percent: node.percent,
        intensity: node.intensity,
        dashed: node.dashed,
        gray: node.gray,
        parent,
    });
    for child in node.children {
        flatten(child, Some(index), out);
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_sunburst, AngularWeighting};
    use super::*;
    use crate::aggregate::{tally, Assignment};
    use crate::ontology::{ActivityNode, ActivitySnapshot, NodeKind, SpecializationEdge};

    #[test]
    fn doc_round_trip_reproduces_arcs_exactly() {
        let g = |id: &str, t: &str| ActivityNode::new(id, t, NodeKind::Generic);
        let s = ActivitySnapshot::new(
            "t",
            "act",
            vec![g("act", "Act"), g("b", "B"), g("c", "C"), g("d", "D")],
            vec![
                SpecializationEdge::new("act", "b"),
                SpecializationEdge::new("act", "c").in_collection("Ways"),
                SpecializationEdge::new("b", "d"),
                SpecializationEdge::new("c", "d"),
            ],
        );
        let t = tally(&s, &[Assignment::unit("x", "d"), Assignment::unit("y", "b")]).unwrap();
        let model = build_sunburst(&s, &t, 4, 0.8, AngularWeighting::DescendantActivities).unwrap();
        let bytes = emit_doc(&model);
        let parsed = parse_doc(&bytes).unwrap();
        assert_eq!(parsed, model);
        // Emission itself is deterministic.
        assert_eq!(emit_doc(&parsed), bytes);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let doc = r#"{"schema": "nope/1", "max_depth": 1, "color_scale_max": 1.0,
                      "label_threshold_deg": 3.0, "total": 0.0, "tree": null}"#;
        assert!(parse_doc(doc.as_bytes()).is_err());
    }
}
