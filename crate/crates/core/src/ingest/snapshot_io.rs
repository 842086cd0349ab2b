//! Versioned JSON snapshots.
//!
//! The document layout is `workgraph-snapshot/1`:
//!
//! ```json
//! {
//!   "edges": [{"child": "...", "collection": "...", "parent": "..."}],
//!   "nodes": [{"definition": "...", "id": "...", "kind": "generic",
//!              "properties": {}, "synonyms": [], "title": "..."}],
//!   "root": "...",
//!   "schema": "workgraph-snapshot/1",
//!   "version": "..."
//! }
//! ```
//!
//! Saving canonicalizes: keys sorted, nodes sorted by id, edges sorted by
//! (parent, child, collection), two-space indentation, trailing newline.
//! `save(load(save(s)))` is byte-identical to `save(s)` and
//! `load(save(s))` equals `s` at the value level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ontology::{
    ActivityNode, ActivitySnapshot, NodeId, NodeKind, PropertyScalar, SpecializationEdge,
};

use super::IngestError;

pub const SNAPSHOT_SCHEMA: &str = "workgraph-snapshot/1";

// Fields are declared in alphabetical order so that serde emits sorted keys.
#[derive(Serialize, Deserialize)]
struct NodeDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    definition: Option<String>,
    id: String,
    kind: NodeKind,
    #[serde(default)]
    properties: BTreeMap<String, PropertyScalar>,
    #[serde(default)]
    synonyms: Vec<String>,
    title: String,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    child: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    collection: Option<String>,
    parent: String,
}

#[derive(Serialize, Deserialize)]
struct SnapshotDoc {
    edges: Vec<EdgeDoc>,
    nodes: Vec<NodeDoc>,
    root: String,
    schema: String,
    version: String,
}

/// Parse a snapshot document and require it to validate cleanly.
pub fn load_snapshot(bytes: &[u8]) -> Result<ActivitySnapshot, IngestError> {
    let snapshot = load_snapshot_unvalidated(bytes)?;
    let report = snapshot.validate();
    if !report.is_clean() {
        return Err(IngestError::Invalid(report));
    }
    Ok(snapshot)
}

/// Parse a snapshot document without running validation, so that broken
/// snapshots can still be inspected and reported on.
pub fn load_snapshot_unvalidated(bytes: &[u8]) -> Result<ActivitySnapshot, IngestError> {
    let doc: SnapshotDoc =
        serde_json::from_slice(bytes).map_err(|e| IngestError::Malformed(e.to_string()))?;
    if doc.schema != SNAPSHOT_SCHEMA {
        return Err(IngestError::SchemaMismatch {
            expected: SNAPSHOT_SCHEMA.to_string(),
            found: doc.schema,
        });
    }
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| ActivityNode {
            id: NodeId::new(n.id),
            title: n.title,
            kind: n.kind,
            definition: n.definition,
            synonyms: n.synonyms,
            properties: n.properties,
        })
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| SpecializationEdge {
            parent: NodeId::new(e.parent),
            child: NodeId::new(e.child),
            collection: e.collection,
        })
        .collect();
    Ok(ActivitySnapshot::new(doc.version, doc.root, nodes, edges))
}

/// Serialize a snapshot in canonical form.
pub fn save_snapshot(snapshot: &ActivitySnapshot) -> Vec<u8> {
    let mut nodes: Vec<NodeDoc> = snapshot
        .nodes()
        .map(|n| NodeDoc {
            definition: n.definition.clone(),
            id: n.id.as_str().to_string(),
            kind: n.kind,
            properties: n.properties.clone(),
            synonyms: n.synonyms.clone(),
            title: n.title.clone(),
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));

    let mut edges: Vec<EdgeDoc> = snapshot
        .edges()
        .iter()
        .map(|e| EdgeDoc {
            child: e.child.as_str().to_string(),
            collection: e.collection.clone(),
            parent: e.parent.as_str().to_string(),
        })
        .collect();
    edges.sort_by(|a, b| {
        (&a.parent, &a.child, &a.collection).cmp(&(&b.parent, &b.child, &b.collection))
    });

    let doc = SnapshotDoc {
        edges,
        nodes,
        root: snapshot.root().as_str().to_string(),
        schema: SNAPSHOT_SCHEMA.to_string(),
        version: snapshot.version().to_string(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("snapshot serialization cannot fail");
    out.push(b'\n');
    out
}
