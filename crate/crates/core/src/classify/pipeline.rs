//! The three classification pipelines over one model-call core.

use std::time::Duration;

use serde_json::Value;

use crate::ingest::{emit_prompt_ontology, AppRecord};
use crate::ontology::ActivitySnapshot;
use crate::search::{semantic_search, Embedder, SearchIndex};

use super::prompts;
use super::{
    detect_hallucination, specificity, ClassificationResult, ClassifyError, ModelClient, Strategy,
};

const ALLOWED_K: [usize; 3] = [20, 50, 100];

/// Classification options beyond the strategy itself.
#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub strategy: Strategy,
    /// Retrieval depth for SPPO/MPPO; ignored by SPFO.
    pub k: Option<usize>,
    pub deadline: Duration,
}

impl ClassifyOptions {
    pub fn new(strategy: Strategy) -> Self {
        ClassifyOptions {
            strategy,
            k: None,
            deadline: Duration::from_secs(120),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }
}

/// A prepared classifier: the per-batch context (cached full-hierarchy
/// prompt or semantic index) is built once and shared across records.
pub struct Classifier<'a> {
    snapshot: &'a ActivitySnapshot,
    model: &'a dyn ModelClient,
    embedder: &'a dyn Embedder,
    options: ClassifyOptions,
    k: usize,
    /// SPFO: full system prompt with the cached hierarchy.
    spfo_system: Option<String>,
    /// SPPO/MPPO: prebuilt node index.
    index: Option<SearchIndex>,
}

impl<'a> Classifier<'a> {
    pub fn new(
        snapshot: &'a ActivitySnapshot,
        model: &'a dyn ModelClient,
        embedder: &'a dyn Embedder,
        options: ClassifyOptions,
    ) -> Result<Self, ClassifyError> {
        let k = match (options.strategy, options.k) {
            (Strategy::Spfo, _) => 0,
            (_, Some(k)) if ALLOWED_K.contains(&k) => k,
            (_, Some(k)) => return Err(ClassifyError::InvalidK(k)),
            (_, None) => 100,
        };
        let spfo_system = match options.strategy {
            Strategy::Spfo => {
                let nested = String::from_utf8(emit_prompt_ontology(snapshot))
                    .expect("prompt emission is valid UTF-8");
                Some(format!(
                    "{}\n## Ontology Nodes:\n\n{}\n",
                    prompts::BASE_CLASSIFY,
                    nested
                ))
            }
            _ => None,
        };
        let index = match options.strategy {
            Strategy::Spfo => None,
            _ => Some(SearchIndex::build(snapshot, embedder)),
        };
        Ok(Classifier {
            snapshot,
            model,
            embedder,
            options,
            k,
            spfo_system,
            index,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.options.strategy
    }

    pub fn classify(&self, record: &AppRecord) -> Result<ClassificationResult, ClassifyError> {
        match self.options.strategy {
            Strategy::Spfo => self.classify_spfo(record),
            Strategy::Sppo => self.classify_sppo(record),
            Strategy::Mppo => self.classify_mppo(record),
        }
    }

    fn classify_spfo(&self, record: &AppRecord) -> Result<ClassificationResult, ClassifyError> {
        let system = self.spfo_system.as_deref().expect("built for SPFO");
        let user = prompts::input_sections(&record.name, &record.tagline, &record.description);
        let reply = self.ask_parsed(system, &user, FULL_KEYS)?;
        self.finish(record, reply, None)
    }

    fn classify_sppo(&self, record: &AppRecord) -> Result<ClassificationResult, ClassifyError> {
        let query = format!("{} {} {}", record.name, record.tagline, record.description);
        let shortlist = self.retrieve(&query)?;
        let user = format!(
            "{}{}",
            prompts::ontology_section(&shortlist),
            prompts::input_sections(&record.name, &record.tagline, &record.description)
        );
        let reply = self.ask_parsed(prompts::BASE_CLASSIFY, &user, FULL_KEYS)?;
        self.finish(record, reply, Some(self.k))
    }

    fn classify_mppo(&self, record: &AppRecord) -> Result<ClassificationResult, ClassifyError> {
        // Call 1: extract a clean verb-object phrase.
        let user = prompts::input_sections(&record.name, &record.tagline, &record.description);
        let extracted = self.ask_parsed(prompts::MPPO_EXTRACT, &user, EXTRACT_KEYS)?;

        // Call 2: retrieve with the phrase, then select from the shortlist.
        let shortlist = self.retrieve(&extracted.main_activity)?;
        let system = format!(
            "{}\n{}",
            prompts::BASE_CLASSIFY,
            prompts::MPPO_SELECT_OVERRIDES
        );
        let user = format!(
            "{}{}{}",
            prompts::activity_section(&extracted.main_activity, &extracted.main_activity_rationale),
            prompts::ontology_section(&shortlist),
            prompts::input_sections(&record.name, &record.tagline, &record.description)
        );
        let selected = self.ask_parsed(&system, &user, SELECT_KEYS)?;
        let merged = ParsedReply {
            main_activity: extracted.main_activity,
            main_activity_rationale: extracted.main_activity_rationale,
            node_title: selected.node_title,
            node_rationale: selected.node_rationale,
        };
        self.finish(record, merged, Some(self.k))
    }

    /// Retrieve the top-k shortlist and render it as a JSON array of
    /// node records.
    fn retrieve(&self, query: &str) -> Result<String, ClassifyError> {
        let index = self.index.as_ref().expect("index built for retrieval strategies");
        let hits = semantic_search(index, query, self.embedder, self.k)?;
        if hits.is_empty() {
            return Err(ClassifyError::NoCandidates);
        }
        let entries: Vec<Value> = hits
            .iter()
            .filter_map(|h| self.snapshot.get(&h.node))
            .map(|n| {
                let mut obj = serde_json::Map::new();
                obj.insert("title".into(), Value::String(n.title.clone()));
                if let Some(def) = &n.definition {
                    obj.insert("definition".into(), Value::String(def.clone()));
                }
                if !n.synonyms.is_empty() {
                    obj.insert(
                        "synonyms".into(),
                        Value::Array(n.synonyms.iter().cloned().map(Value::String).collect()),
                    );
                }
                Value::Object(obj)
            })
            .collect();
        Ok(serde_json::to_string(&entries).expect("shortlist serialization cannot fail"))
    }

    /// One model call with a single structured re-ask on parse failure.
    fn ask_parsed(
        &self,
        system: &str,
        user: &str,
        keys: KeySet,
    ) -> Result<ParsedReply, ClassifyError> {
        let first = self.model.complete(system, user, self.options.deadline)?;
        match parse_reply(&first, keys) {
            Some(reply) => Ok(reply),
            None => {
                let reask_user = format!("{user}{}", prompts::REASK_SUFFIX);
                let second = self.model.complete(system, &reask_user, self.options.deadline)?;
                parse_reply(&second, keys)
                    .ok_or(ClassifyError::UnparseableReply { raw: second })
            }
        }
    }

    fn finish(
        &self,
        record: &AppRecord,
        reply: ParsedReply,
        k: Option<usize>,
    ) -> Result<ClassificationResult, ClassifyError> {
        let hallucinated = detect_hallucination(self.snapshot, &reply.node_title);
        let (node_id, spec) = if hallucinated {
            (None, None)
        } else {
            let node = self
                .snapshot
                .by_title(&reply.node_title)
                .expect("non-hallucinated title resolves");
            (Some(node.id.clone()), Some(specificity(self.snapshot, &node.id)?))
        };
        Ok(ClassificationResult {
            record: record.name.clone(),
            main_activity: reply.main_activity,
            main_activity_rationale: reply.main_activity_rationale,
            node_title: reply.node_title,
            node_rationale: reply.node_rationale,
            strategy: self.options.strategy,
            k,
            hallucinated,
            node_id,
            specificity: spec,
        })
    }
}

/// One-shot convenience wrapper over [`Classifier`].
pub fn classify(
    snapshot: &ActivitySnapshot,
    record: &AppRecord,
    strategy: Strategy,
    model: &dyn ModelClient,
    embedder: &dyn Embedder,
    k: Option<usize>,
) -> Result<ClassificationResult, ClassifyError> {
    let mut options = ClassifyOptions::new(strategy);
    options.k = k;
    Classifier::new(snapshot, model, embedder, options)?.classify(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeySet {
    Full,
    Extract,
    Select,
}

const FULL_KEYS: KeySet = KeySet::Full;
const EXTRACT_KEYS: KeySet = KeySet::Extract;
const SELECT_KEYS: KeySet = KeySet::Select;

struct ParsedReply {
    main_activity: String,
    main_activity_rationale: String,
    node_title: String,
    node_rationale: String,
}

/// Parse the strict single-object reply. Code fences are tolerated;
/// anything else non-JSON is a parse failure.
fn parse_reply(raw: &str, keys: KeySet) -> Option<ParsedReply> {
    let trimmed = strip_fences(raw.trim());
    let value: Value = serde_json::from_str(trimmed).ok()?;
    let obj = value.as_object()?;
    let get = |key: &str| obj.get(key).and_then(Value::as_str).map(str::to_string);
    let main_activity = get("main_activity");
    let main_rationale = get("reasoning_main_activity");
    let node_title = get("most_appropriate_node");
    let node_rationale = get("most_appropriate_node_rationale");
    match keys {
        KeySet::Full => Some(ParsedReply {
            main_activity: main_activity?,
            main_activity_rationale: main_rationale.unwrap_or_default(),
            node_title: node_title?,
            node_rationale: node_rationale.unwrap_or_default(),
        }),
        KeySet::Extract => Some(ParsedReply {
            main_activity: main_activity?,
            main_activity_rationale: main_rationale.unwrap_or_default(),
            node_title: String::new(),
            node_rationale: String::new(),
        }),
        KeySet::Select => Some(ParsedReply {
            main_activity: String::new(),
            main_activity_rationale: String::new(),
            node_title: node_title?,
            node_rationale: node_rationale.unwrap_or_default(),
        }),
    }
}

fn strip_fences(s: &str) -> &str {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("```") {
        let rest = rest.strip_prefix("json").unwrap_or(rest);
        if let Some(end) = rest.rfind("```") {
            return rest[..end].trim();
        }
    }
    s
}
