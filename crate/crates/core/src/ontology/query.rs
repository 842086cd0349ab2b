//! Closure, depth, and property-resolution queries over a snapshot.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{ActivitySnapshot, NodeId, OntologyError, PropertyScalar};

/// Which way a closure walks the specialization edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ancestors,
    Descendants,
}

/// Whether a resolved property value sits on the node or flowed down
/// from an ancestor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyOrigin {
    Assigned,
    Inherited,
}

/// A resolved property value with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyValue {
    pub key: String,
    pub value: PropertyScalar,
    pub origin: PropertyOrigin,
}

/// One of several equally-near ancestors competing to supply a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCandidate {
    pub node: NodeId,
    pub title: String,
    pub value: PropertyScalar,
}

/// Outcome of property resolution: either a single winning value or a
/// conflict between equidistant ancestors that assign different values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResolvedProperty {
    Value(PropertyValue),
    Conflict {
        key: String,
        candidates: Vec<PropertyCandidate>,
    },
}

impl ActivitySnapshot {
    /// Transitive ancestors or descendants of `node`, excluding the node
    /// itself. Under multiple inheritance the result is the union over
    /// all paths, each node once.
    pub fn closure(
        &self,
        node: &NodeId,
        direction: Direction,
    ) -> Result<BTreeSet<NodeId>, OntologyError> {
        let start = self.require(node)?;
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut out = BTreeSet::new();
        while let Some(i) = queue.pop_front() {
            let next = match direction {
                Direction::Ancestors => self.parents_idx(i),
                Direction::Descendants => self.children_idx(i),
            };
            for &j in next {
                if !seen[j] {
                    seen[j] = true;
                    out.insert(self.node_at(j).id.clone());
                    queue.push_back(j);
                }
            }
        }
        Ok(out)
    }

    /// Number of nodes on the longest root-to-node path. Collections are
    /// edge labels, not nodes, so they never count. The root has depth 1.
    pub fn depth(&self, node: &NodeId) -> Result<u32, OntologyError> {
        let i = self.require(node)?;
        self.depth_at(i)
            .ok_or_else(|| OntologyError::NoRootPath(node.as_str().to_string()))
    }

    /// The node's assigned value for `key` if present, otherwise the
    /// assigned value of the nearest ancestor by minimum ancestor
    /// distance. Equidistant ancestors assigning different values
    /// surface as a conflict rather than being silently resolved.
    pub fn resolve_property(
        &self,
        node: &NodeId,
        key: &str,
    ) -> Result<Option<ResolvedProperty>, OntologyError> {
        if key.is_empty() {
            return Err(OntologyError::EmptyPropertyKey);
        }
        let start = self.require(node)?;
        if let Some(value) = self.node_at(start).properties.get(key) {
            return Ok(Some(ResolvedProperty::Value(PropertyValue {
                key: key.to_string(),
                value: value.clone(),
                origin: PropertyOrigin::Assigned,
            })));
        }

        // Breadth-first by ancestor distance; stop at the first level
        // where at least one ancestor assigns the key.
        let mut seen = vec![false; self.len()];
        seen[start] = true;
        let mut level: Vec<usize> = self.parents_idx(start).to_vec();
        for &p in &level {
            seen[p] = true;
        }
        while !level.is_empty() {
            let mut candidates: Vec<PropertyCandidate> = level
                .iter()
                .filter_map(|&i| {
                    let n = self.node_at(i);
                    n.properties.get(key).map(|v| PropertyCandidate {
                        node: n.id.clone(),
                        title: n.title.clone(),
                        value: v.clone(),
                    })
                })
                .collect();
            if !candidates.is_empty() {
                candidates.sort_by(|a, b| a.title.cmp(&b.title));
                let all_equal = candidates.windows(2).all(|w| w[0].value == w[1].value);
                if all_equal {
                    return Ok(Some(ResolvedProperty::Value(PropertyValue {
                        key: key.to_string(),
                        value: candidates[0].value.clone(),
                        origin: PropertyOrigin::Inherited,
                    })));
                }
                return Ok(Some(ResolvedProperty::Conflict {
                    key: key.to_string(),
                    candidates,
                }));
            }
            let mut next = Vec::new();
            for &i in &level {
                for &p in self.parents_idx(i) {
                    if !seen[p] {
                        seen[p] = true;
                        next.push(p);
                    }
                }
            }
            level = next;
        }
        Ok(None)
    }

    /// Shortest downward edge-distance from every ancestor-or-self of
    /// `node`, keyed by node index. Used by agreement metrics.
    pub(crate) fn ascent_distances(&self, start: usize) -> HashMap<usize, u32> {
        let mut dist = HashMap::new();
        dist.insert(start, 0u32);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let d = dist[&i];
            for &p in self.parents_idx(i) {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(p) {
                    slot.insert(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }
}
