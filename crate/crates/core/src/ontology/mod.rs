//! The activity hierarchy: a rooted, multiple-inheritance DAG of work
//! activities with collection-labeled specialization edges.
//!
//! Snapshots are immutable values. Every query is pure; mutation means
//! building a new snapshot from parts.

mod query;
mod stats;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use query::{Direction, PropertyCandidate, PropertyOrigin, PropertyValue, ResolvedProperty};
pub use stats::DepthStats;
pub use validate::{ValidationReport, Violation, ViolationRule};

/// Opaque stable identifier of an activity node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// What level of the hierarchy a node belongs to.
///
/// Source tasks are provenance records attached beneath the atomic
/// activities they contain; they are not specializations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Generic,
    Atomic,
    SourceTask,
}

impl NodeKind {
    /// Generic and atomic nodes are activities; source tasks are not.
    pub fn is_activity(self) -> bool {
        matches!(self, NodeKind::Generic | NodeKind::Atomic)
    }
}

/// A primitive property value carried by a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyScalar {
    Number(f64),
    Tag(String),
}

impl fmt::Display for PropertyScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyScalar::Number(n) => write!(f, "{n}"),
            PropertyScalar::Tag(t) => f.write_str(t),
        }
    }
}

/// One activity in the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityNode {
    pub id: NodeId,
    pub title: String,
    pub kind: NodeKind,
    pub definition: Option<String>,
    pub synonyms: Vec<String>,
    pub properties: BTreeMap<String, PropertyScalar>,
}

impl ActivityNode {
    pub fn new(id: impl Into<NodeId>, title: impl Into<String>, kind: NodeKind) -> Self {
        ActivityNode {
            id: id.into(),
            title: title.into(),
            kind,
            definition: None,
            synonyms: Vec::new(),
            properties: BTreeMap::new(),
        }
    }

    pub fn with_definition(mut self, definition: impl Into<String>) -> Self {
        self.definition = Some(definition.into());
        self
    }

    pub fn with_synonyms<I, S>(mut self, synonyms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.synonyms = synonyms.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_property(mut self, key: impl Into<String>, value: PropertyScalar) -> Self {
        self.properties.insert(key.into(), value);
        self
    }
}

/// A parent → child specialization link, optionally grouped under a
/// collection label among its siblings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecializationEdge {
    pub parent: NodeId,
    pub child: NodeId,
    pub collection: Option<String>,
}

impl SpecializationEdge {
    pub fn new(parent: impl Into<NodeId>, child: impl Into<NodeId>) -> Self {
        SpecializationEdge {
            parent: parent.into(),
            child: child.into(),
            collection: None,
        }
    }

    pub fn in_collection(mut self, label: impl Into<String>) -> Self {
        self.collection = Some(label.into());
        self
    }
}

/// Errors raised by snapshot queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("unknown node id {0:?}")]
    UnknownNode(String),
    #[error("unknown node title {0:?}")]
    UnknownTitle(String),
    #[error("empty property key")]
    EmptyPropertyKey,
    #[error("node {0:?} has no path from the root (snapshot is not a valid rooted DAG)")]
    NoRootPath(String),
}

/// An immutable, versioned snapshot of the activity hierarchy.
///
/// Construction never fails: structural problems are surfaced as data by
/// [`ActivitySnapshot::validate`], so that broken inputs can still be
/// loaded and reported on. Queries that require structure (depth,
/// closures) return errors on the affected nodes instead.
#[derive(Debug, Clone)]
pub struct ActivitySnapshot {
    version: String,
    root: NodeId,
    nodes: Vec<ActivityNode>,
    edges: Vec<SpecializationEdge>,

    // Derived indexes, built once at construction.
    index: HashMap<String, usize>,
    title_index: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    duplicate_ids: Vec<String>,
    duplicate_titles: Vec<String>,
    dangling_edges: Vec<usize>,
    reachable: Vec<bool>,
    /// Reachable nodes in topological order; excludes nodes caught in cycles.
    topo: Vec<usize>,
    /// Longest root-to-node path length in nodes; `None` when the node is
    /// unreachable or sits in/behind a cycle.
    depths: Vec<Option<u32>>,
}

impl ActivitySnapshot {
    pub fn new(
        version: impl Into<String>,
        root: impl Into<NodeId>,
        nodes: Vec<ActivityNode>,
        edges: Vec<SpecializationEdge>,
    ) -> Self {
        let root = root.into();
        let n = nodes.len();

        let mut index = HashMap::with_capacity(n);
        let mut title_index = HashMap::with_capacity(n);
        let mut duplicate_ids = Vec::new();
        let mut duplicate_titles = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.as_str().to_string(), i).is_some() {
                duplicate_ids.push(node.id.as_str().to_string());
            }
            if !node.title.is_empty()
                && title_index.insert(node.title.clone(), i).is_some()
            {
                duplicate_titles.push(node.title.clone());
            }
        }

        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut dangling_edges = Vec::new();
        for (ei, edge) in edges.iter().enumerate() {
            match (index.get(edge.parent.as_str()), index.get(edge.child.as_str())) {
                (Some(&p), Some(&c)) => {
                    if !children[p].contains(&c) {
                        children[p].push(c);
                        parents[c].push(p);
                    }
                }
                _ => dangling_edges.push(ei),
            }
        }
        for list in children.iter_mut().chain(parents.iter_mut()) {
            list.sort_unstable();
        }

        // Reachability from the root.
        let mut reachable = vec![false; n];
        if let Some(&r) = index.get(root.as_str()) {
            let mut stack = vec![r];
            reachable[r] = true;
            while let Some(i) = stack.pop() {
                for &c in &children[i] {
                    if !reachable[c] {
                        reachable[c] = true;
                        stack.push(c);
                    }
                }
            }
        }

        // Longest-path depths over the reachable subgraph via Kahn's
        // algorithm; nodes in or behind cycles never get a depth.
        let mut depths: Vec<Option<u32>> = vec![None; n];
        let mut topo = Vec::new();
        if let Some(&r) = index.get(root.as_str()) {
            let mut indeg = vec![0usize; n];
            for i in 0..n {
                if !reachable[i] {
                    continue;
                }
                for &c in &children[i] {
                    indeg[c] += 1;
                }
            }
            let mut queue = std::collections::VecDeque::new();
            if indeg[r] == 0 {
                depths[r] = Some(1);
                queue.push_back(r);
            }
            while let Some(i) = queue.pop_front() {
                topo.push(i);
                for &c in &children[i] {
                    let d = depths[i].unwrap() + 1;
                    depths[c] = Some(depths[c].map_or(d, |cur| cur.max(d)));
                    indeg[c] -= 1;
                    if indeg[c] == 0 {
                        queue.push_back(c);
                    }
                }
            }
            // A node dequeued late may have had its depth set before all
            // parents resolved only if a parent is cyclic; wipe depths of
            // nodes that never made it into the topological order.
            let in_topo: std::collections::HashSet<usize> = topo.iter().copied().collect();
            for (i, depth) in depths.iter_mut().enumerate() {
                if depth.is_some() && !in_topo.contains(&i) {
                    *depth = None;
                }
            }
        }

        ActivitySnapshot {
            version: version.into(),
            root,
            nodes,
            edges,
            index,
            title_index,
            children,
            parents,
            duplicate_ids,
            duplicate_titles,
            dangling_edges,
            reachable,
            topo,
            depths,
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn root(&self) -> &NodeId {
        &self.root
    }

    pub fn root_node(&self) -> Option<&ActivityNode> {
        self.idx(&self.root).map(|i| &self.nodes[i])
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ActivityNode> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> &[SpecializationEdge] {
        &self.edges
    }

    pub fn get(&self, id: &NodeId) -> Option<&ActivityNode> {
        self.idx(id).map(|i| &self.nodes[i])
    }

    pub fn by_title(&self, title: &str) -> Option<&ActivityNode> {
        self.title_index.get(title).map(|&i| &self.nodes[i])
    }

    /// Exact, case-sensitive title membership.
    pub fn contains_title(&self, title: &str) -> bool {
        self.title_index.contains_key(title)
    }

    pub fn children_of(&self, id: &NodeId) -> Result<Vec<&ActivityNode>, OntologyError> {
        let i = self.require(id)?;
        Ok(self.children[i].iter().map(|&c| &self.nodes[c]).collect())
    }

    pub fn parents_of(&self, id: &NodeId) -> Result<Vec<&ActivityNode>, OntologyError> {
        let i = self.require(id)?;
        Ok(self.parents[i].iter().map(|&p| &self.nodes[p]).collect())
    }

    pub fn parent_count(&self, id: &NodeId) -> Result<usize, OntologyError> {
        Ok(self.parents[self.require(id)?].len())
    }

    pub(crate) fn idx(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id.as_str()).copied()
    }

    pub(crate) fn require(&self, id: &NodeId) -> Result<usize, OntologyError> {
        self.idx(id)
            .ok_or_else(|| OntologyError::UnknownNode(id.as_str().to_string()))
    }

    pub(crate) fn node_at(&self, i: usize) -> &ActivityNode {
        &self.nodes[i]
    }

    pub(crate) fn children_idx(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub(crate) fn parents_idx(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub(crate) fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub(crate) fn is_reachable(&self, i: usize) -> bool {
        self.reachable[i]
    }

    pub(crate) fn depth_at(&self, i: usize) -> Option<u32> {
        self.depths[i]
    }

    pub(crate) fn duplicate_ids(&self) -> &[String] {
        &self.duplicate_ids
    }

    pub(crate) fn duplicate_titles(&self) -> &[String] {
        &self.duplicate_titles
    }

    pub(crate) fn dangling_edges(&self) -> &[usize] {
        &self.dangling_edges
    }

    /// Child edges of every node grouped by collection label, plain
    /// children first, everything title-sorted and deduplicated. One
    /// pass over the edge list; used by prompt emission and layout.
    pub(crate) fn grouped_children(&self) -> Vec<ChildGroups> {
        let mut groups: Vec<ChildGroups> = vec![ChildGroups::default(); self.len()];
        for edge in &self.edges {
            let (Some(p), Some(c)) = (self.idx(&edge.parent), self.idx(&edge.child)) else {
                continue;
            };
            match edge.collection.as_deref() {
                None | Some("") => groups[p].plain.push(c),
                Some(label) => {
                    match groups[p].collections.iter_mut().find(|(l, _)| l == label) {
                        Some((_, members)) => members.push(c),
                        None => groups[p].collections.push((label.to_string(), vec![c])),
                    }
                }
            }
        }
        for group in &mut groups {
            group.plain.sort_by(|a, b| self.nodes[*a].title.cmp(&self.nodes[*b].title));
            group.plain.dedup();
            group.collections.sort_by(|a, b| a.0.cmp(&b.0));
            for (_, members) in &mut group.collections {
                members.sort_by(|a, b| self.nodes[*a].title.cmp(&self.nodes[*b].title));
                members.dedup();
            }
        }
        groups
    }
}

/// One node's children split into plain edges and collection groups,
/// holding node indexes.
#[derive(Debug, Clone, Default)]
pub(crate) struct ChildGroups {
    pub(crate) plain: Vec<usize>,
    pub(crate) collections: Vec<(String, Vec<usize>)>,
}

impl PartialEq for ActivitySnapshot {
    /// Value equality over the declared content; derived indexes are
    /// ignored and edge/node order is not significant.
    fn eq(&self, other: &Self) -> bool {
        if self.version != other.version || self.root != other.root {
            return false;
        }
        let mut a: Vec<&ActivityNode> = self.nodes.iter().collect();
        let mut b: Vec<&ActivityNode> = other.nodes.iter().collect();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        if a != b {
            return false;
        }
        let key = |e: &SpecializationEdge| {
            (e.parent.clone(), e.child.clone(), e.collection.clone())
        };
        let mut ea: Vec<_> = self.edges.iter().map(key).collect();
        let mut eb: Vec<_> = other.edges.iter().map(key).collect();
        ea.sort();
        eb.sort();
        ea == eb
    }
}
