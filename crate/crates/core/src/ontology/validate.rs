//! Structural validation of snapshots.
//!
//! Violations are data, not failures: a broken snapshot still loads and
//! reports everything wrong with it in one pass.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ActivitySnapshot, NodeKind};

/// The rule a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationRule {
    MissingRoot,
    EmptyTitle,
    DuplicateTitle,
    DuplicateId,
    DanglingEdge,
    Cycle,
    Orphan,
    Unreachable,
    AtomicChild,
    SourceTaskChild,
    EmptyCollection,
}

impl ViolationRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationRule::MissingRoot => "missing_root",
            ViolationRule::EmptyTitle => "empty_title",
            ViolationRule::DuplicateTitle => "duplicate_title",
            ViolationRule::DuplicateId => "duplicate_id",
            ViolationRule::DanglingEdge => "dangling_edge",
            ViolationRule::Cycle => "cycle",
            ViolationRule::Orphan => "orphan",
            ViolationRule::Unreachable => "unreachable",
            ViolationRule::AtomicChild => "atomic_child",
            ViolationRule::SourceTaskChild => "source_task_child",
            ViolationRule::EmptyCollection => "empty_collection",
        }
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One broken rule, naming the node or edge that breaks it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: ViolationRule,
    pub subject: String,
    pub detail: String,
}

impl Violation {
    fn new(rule: ViolationRule, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Violation {
            rule,
            subject: subject.into(),
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.subject)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Everything wrong with a snapshot, in deterministic order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: ViolationRule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "0 violations");
        }
        writeln!(f, "{} violations", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl ActivitySnapshot {
    /// Checks every structural invariant and returns the full list of
    /// violations. An empty report means the snapshot is a valid rooted
    /// DAG with unique non-empty titles and legal kind layering.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let n = self.len();
        let root_idx = self.idx(self.root());

        if root_idx.is_none() {
            out.push(Violation::new(
                ViolationRule::MissingRoot,
                self.root().as_str(),
                "declared root id is not among the nodes",
            ));
        }

        for node in self.nodes() {
            if node.title.is_empty() {
                out.push(Violation::new(ViolationRule::EmptyTitle, node.id.as_str(), ""));
            }
        }
        for t in self.duplicate_titles() {
            out.push(Violation::new(ViolationRule::DuplicateTitle, t.clone(), ""));
        }
        for id in self.duplicate_ids() {
            out.push(Violation::new(ViolationRule::DuplicateId, id.clone(), ""));
        }

        for &ei in self.dangling_edges() {
            let e = &self.edges()[ei];
            out.push(Violation::new(
                ViolationRule::DanglingEdge,
                format!("{} -> {}", e.parent, e.child),
                "edge endpoint is not among the nodes",
            ));
        }
        for e in self.edges() {
            if matches!(e.collection.as_deref(), Some("")) {
                out.push(Violation::new(
                    ViolationRule::EmptyCollection,
                    format!("{} -> {}", e.parent, e.child),
                    "collection label is empty",
                ));
            }
        }

        // Cycles: every strongly connected component with more than one
        // node, plus self-loops.
        for scc in self.cyclic_components() {
            let mut names: Vec<&str> = scc.iter().map(|&i| self.node_at(i).title.as_str()).collect();
            names.sort_unstable();
            out.push(Violation::new(ViolationRule::Cycle, names.join(" -> "), ""));
        }

        for i in 0..n {
            let node = self.node_at(i);
            let is_root = root_idx == Some(i);
            if !is_root && self.parents_idx(i).is_empty() {
                out.push(Violation::new(ViolationRule::Orphan, node.title.clone(), ""));
            } else if !is_root && !self.is_reachable(i) {
                out.push(Violation::new(
                    ViolationRule::Unreachable,
                    node.title.clone(),
                    "has parents but no path from the root",
                ));
            }
        }

        for i in 0..n {
            let parent = self.node_at(i);
            for &c in self.children_idx(i) {
                let child = self.node_at(c);
                match parent.kind {
                    NodeKind::Atomic if child.kind.is_activity() => {
                        out.push(Violation::new(
                            ViolationRule::AtomicChild,
                            parent.title.clone(),
                            format!("atomic node has {:?} child {}", child.kind, child.title),
                        ));
                    }
                    NodeKind::SourceTask => {
                        out.push(Violation::new(
                            ViolationRule::SourceTaskChild,
                            parent.title.clone(),
                            format!("source task has child {}", child.title),
                        ));
                    }
                    _ => {}
                }
            }
        }

        out.sort_by(|a, b| (a.rule, &a.subject, &a.detail).cmp(&(b.rule, &b.subject, &b.detail)));
        ValidationReport { violations: out }
    }

    /// Strongly connected components that contain a cycle (size > 1 or a
    /// self-loop), via iterative Tarjan.
    fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut result = Vec::new();

        // Explicit DFS frames: (node, child cursor).
        let mut frames: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if index[start] != usize::MAX {
                continue;
            }
            frames.push((start, 0));
            index[start] = next_index;
            low[start] = next_index;
            next_index += 1;
            stack.push(start);
            on_stack[start] = true;

            while let Some(&(v, cursor)) = frames.last() {
                if cursor < self.children_idx(v).len() {
                    frames.last_mut().unwrap().1 += 1;
                    let w = self.children_idx(v)[cursor];
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(&(parent, _)) = frames.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut component = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            component.push(w);
                            if w == v {
                                break;
                            }
                        }
                        let has_self_loop =
                            component.len() == 1 && self.children_idx(v).contains(&v);
                        if component.len() > 1 || has_self_loop {
                            result.push(component);
                        }
                    }
                }
            }
        }
        result
    }
}
