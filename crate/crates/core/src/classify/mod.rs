//! Classification of usage records into the activity hierarchy via an
//! abstract model client, with hallucination detection and specificity
//! scoring.

mod batch;
mod pipeline;
pub mod prompts;
mod stub;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ActivitySnapshot, NodeId, NodeKind, OntologyError};

pub use batch::{batch_classify, BatchOutcome, ClassifyFailure};
pub use pipeline::{classify, Classifier};
pub use stub::ScriptedModel;

/// Text-completion interface: two text fields in, one completion out,
/// within the caller-set deadline. Implementations must either tolerate
/// concurrent calls or declare themselves serial-only.
pub trait ModelClient: Send + Sync {
    fn complete(
        &self,
        system_prompt: &str,
        user_prompt: &str,
        deadline: Duration,
    ) -> Result<String, ModelError>;

    /// When true, the batcher never issues concurrent calls.
    fn serial_only(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model call timed out")]
    Timeout,
    #[error("model transport error: {0}")]
    Transport(String),
}

/// The three pipeline variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    /// One call; retrieval shortlist from the application text.
    Sppo,
    /// Two calls; retrieval from an extracted verb-object phrase.
    Mppo,
    /// One call over the full cached hierarchy, no retrieval.
    Spfo,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Sppo => "SPPO",
            Strategy::Mppo => "MPPO",
            Strategy::Spfo => "SPFO",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s.to_ascii_lowercase().as_str() {
            "sppo" => Some(Strategy::Sppo),
            "mppo" => Some(Strategy::Mppo),
            "spfo" => Some(Strategy::Spfo),
            _ => None,
        }
    }

    pub fn uses_retrieval(self) -> bool {
        matches!(self, Strategy::Sppo | Strategy::Mppo)
    }
}

/// How specific a predicted node is: a leaf has no specializations, a
/// near-leaf has only leaf children. Source-task children are provenance
/// and never count as specializations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Specificity {
    Leaf,
    NearLeaf,
    Internal,
}

impl Specificity {
    pub fn as_str(self) -> &'static str {
        match self {
            Specificity::Leaf => "leaf",
            Specificity::NearLeaf => "near_leaf",
            Specificity::Internal => "internal",
        }
    }
}

/// One classified record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub record: String,
    pub main_activity: String,
    pub main_activity_rationale: String,
    pub node_title: String,
    pub node_rationale: String,
    pub strategy: Strategy,
    pub k: Option<usize>,
    pub hallucinated: bool,
    /// Resolved node id; absent exactly when hallucinated.
    pub node_id: Option<NodeId>,
    /// Absent exactly when hallucinated.
    pub specificity: Option<Specificity>,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("k must be one of 20, 50, 100 for SPPO/MPPO; got {0}")]
    InvalidK(usize),
    #[error("retrieval returned zero candidates")]
    NoCandidates,
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("unparseable model reply after re-ask; raw reply: {raw:?}")]
    UnparseableReply { raw: String },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("search error: {0}")]
    Search(#[from] crate::search::SearchError),
}

/// True iff `node_title` has no exact, case-sensitive match among the
/// snapshot titles. The empty string is always a hallucination.
pub fn detect_hallucination(snapshot: &ActivitySnapshot, node_title: &str) -> bool {
    !snapshot.contains_title(node_title)
}

/// Specificity of a node, ignoring source-task children.
pub fn specificity(
    snapshot: &ActivitySnapshot,
    node: &NodeId,
) -> Result<Specificity, OntologyError> {
    let children = snapshot.children_of(node)?;
    let activity_children: Vec<_> = children
        .into_iter()
        .filter(|c| c.kind != NodeKind::SourceTask)
        .collect();
    if activity_children.is_empty() {
        return Ok(Specificity::Leaf);
    }
    let all_leaves = activity_children.iter().try_fold(true, |acc, child| {
        let grandchildren = snapshot.children_of(&child.id)?;
        let has_activity_child = grandchildren.iter().any(|g| g.kind != NodeKind::SourceTask);
        Ok::<bool, OntologyError>(acc && !has_activity_child)
    })?;
    Ok(if all_leaves {
        Specificity::NearLeaf
    } else {
        Specificity::Internal
    })
}
