//! File-scripted model stub for tests and offline runs.
//!
//! Scripts are tab-separated lines: record name, then the canned reply
//! document (one line of JSON). The stub finds which record a call is
//! about by reading the `### Application Title:` section of the user
//! prompt. A reply of `!timeout` makes the call report a timeout.

use std::collections::HashMap;
use std::time::Duration;

use super::{ModelClient, ModelError};

pub const TIMEOUT_SENTINEL: &str = "!timeout";

/// Deterministic scripted model: record name → canned reply.
#[derive(Debug, Clone, Default)]
pub struct ScriptedModel {
    replies: HashMap<String, String>,
}

impl ScriptedModel {
    pub fn new(replies: HashMap<String, String>) -> Self {
        ScriptedModel { replies }
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        ScriptedModel {
            replies: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }

    /// Parse a tab-separated script. Blank lines and lines starting with
    /// `#` are skipped.
    pub fn from_tsv(bytes: &[u8]) -> Result<Self, String> {
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        let mut replies = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, reply) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected <name>\\t<reply>", no + 1))?;
            replies.insert(name.to_string(), reply.to_string());
        }
        Ok(ScriptedModel { replies })
    }

    /// Build a canned full-reply document for convenience in tests.
    pub fn reply_doc(main_activity: &str, node_title: &str) -> String {
        serde_json::json!({
            "main_activity": main_activity,
            "reasoning_main_activity": "scripted",
            "most_appropriate_node": node_title,
            "most_appropriate_node_rationale": "scripted",
        })
        .to_string()
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl ModelClient for ScriptedModel {
    fn complete(
        &self,
        _system_prompt: &str,
        user_prompt: &str,
        _deadline: Duration,
    ) -> Result<String, ModelError> {
        let name = extract_title(user_prompt).ok_or_else(|| {
            ModelError::Transport("user prompt has no Application Title section".into())
        })?;
        match self.replies.get(name) {
            Some(reply) if reply.trim() == TIMEOUT_SENTINEL => Err(ModelError::Timeout),
            Some(reply) => Ok(reply.clone()),
            None => Err(ModelError::Transport(format!("no scripted reply for {name:?}"))),
        }
    }

    fn serial_only(&self) -> bool {
        false
    }
}

fn extract_title(user_prompt: &str) -> Option<&str> {
    let marker = "### Application Title:";
    let after = &user_prompt[user_prompt.find(marker)? + marker.len()..];
    after.lines().map(str::trim).find(|l| !l.is_empty())
}
