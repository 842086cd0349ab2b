//! Hybrid keyword + semantic retrieval over snapshot nodes, and lexical
//! near-duplicate flagging.
//!
//! The only external seam is [`Embedder`]: text in, fixed-dimension
//! finite vector out, no side channel. A deterministic hash
//! bag-of-words embedder ships so everything runs offline.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ActivitySnapshot, NodeId};

/// Text embedding interface. Implementations must be deterministic per
/// input and produce a non-zero vector for non-empty tokenizable text.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f32>;
}

/// Deterministic bag-of-words embedder that buckets FNV-1a token hashes
/// into a fixed number of dimensions. Good enough for tests and desk
/// runs; production embedders plug in behind the same trait.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        HashEmbedder { dimension }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(256)
    }
}

impl Embedder for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0.0f32; self.dimension];
        for token in tokens(text) {
            let bucket = (fnv1a(token.as_bytes()) % self.dimension as u64) as usize;
            v[bucket] += 1.0;
        }
        v
    }
}

// FNV-1a: stable across runs and platforms, unlike the std hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Which retrieval channel produced a hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchChannel {
    Keyword,
    Semantic,
}

/// One ranked search result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub node: NodeId,
    pub title: String,
    pub score: f64,
    pub channel: SearchChannel,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("empty query")]
    EmptyQuery,
    #[error("embedder dimension {embedder} does not match index dimension {index}")]
    DimensionMismatch { embedder: usize, index: usize },
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Precomputed node embeddings for semantic retrieval. Node text is the
/// concatenation of title, definition, and synonyms.
pub struct SearchIndex {
    dimension: usize,
    entries: Vec<(NodeId, String, Vec<f32>, f64)>,
}

impl SearchIndex {
    pub fn build(snapshot: &ActivitySnapshot, embedder: &dyn Embedder) -> SearchIndex {
        let mut entries: Vec<(NodeId, String, Vec<f32>, f64)> = snapshot
            .nodes()
            .map(|n| {
                let vector = embedder.embed(&node_text(n));
                let norm = norm(&vector);
                (n.id.clone(), n.title.clone(), vector, norm)
            })
            .collect();
        entries.sort_by(|a, b| a.1.cmp(&b.1));
        SearchIndex {
            dimension: embedder.dimension(),
            entries,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// The text a node is indexed under.
pub fn node_text(node: &crate::ontology::ActivityNode) -> String {
    let mut parts = vec![node.title.clone()];
    if let Some(def) = &node.definition {
        parts.push(def.clone());
    }
    parts.extend(node.synonyms.iter().cloned());
    parts.join(" ")
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|x| *x as f64 * *x as f64).sum::<f64>().sqrt()
}

fn cosine(a: &[f32], a_norm: f64, b: &[f32], b_norm: f64) -> f64 {
    if a_norm == 0.0 || b_norm == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    dot / (a_norm * b_norm)
}

/// Case-insensitive token match over title + synonyms. Exact full-title
/// matches rank first, then by matched-token count, ties by title.
pub fn keyword_search(
    snapshot: &ActivitySnapshot,
    query: &str,
    limit: usize,
) -> Result<Vec<SearchHit>, SearchError> {
    if query.trim().is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    let query_tokens: BTreeSet<String> = tokens(query).into_iter().collect();
    let query_lower = query.trim().to_lowercase();

    let mut scored: Vec<(bool, usize, &str, NodeId)> = Vec::new();
    for node in snapshot.nodes() {
        let mut node_tokens: HashSet<String> = tokens(&node.title).into_iter().collect();
        for syn in &node.synonyms {
            node_tokens.extend(tokens(syn));
        }
        let matched = query_tokens.iter().filter(|t| node_tokens.contains(*t)).count();
        if matched == 0 {
            continue;
        }
        let exact = node.title.to_lowercase() == query_lower
            || node.synonyms.iter().any(|s| s.to_lowercase() == query_lower);
        scored.push((exact, matched, node.title.as_str(), node.id.clone()));
    }
    scored.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(a.2.cmp(b.2))
    });
    Ok(scored
        .into_iter()
        .take(limit)
        .map(|(_, matched, title, node)| SearchHit {
            node,
            title: title.to_string(),
            score: matched as f64,
            channel: SearchChannel::Keyword,
        })
        .collect())
}

/// Cosine-similarity retrieval against the prebuilt index. Zero-score
/// entries are excluded only by `limit`, never by thresholding.
pub fn semantic_search(
    index: &SearchIndex,
    query: &str,
    embedder: &dyn Embedder,
    limit: usize,
) -> Result<Vec<SearchHit>, SearchError> {
    if query.trim().is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    if embedder.dimension() != index.dimension {
        return Err(SearchError::DimensionMismatch {
            embedder: embedder.dimension(),
            index: index.dimension,
        });
    }
    let qv = embedder.embed(query);
    let qn = norm(&qv);
    let mut scored: Vec<(f64, &NodeId, &str)> = index
        .entries
        .iter()
        .map(|(id, title, v, n)| (cosine(&qv, qn, v, *n), id, title.as_str()))
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.2.cmp(b.2)));
    Ok(scored
        .into_iter()
        .take(limit)
        .map(|(score, id, title)| SearchHit {
            node: id.clone(),
            title: title.to_string(),
            score,
            channel: SearchChannel::Semantic,
        })
        .collect())
}

/// Strict keyword/semantic alternation with dedup at first occurrence.
/// When one channel runs out, the other continues alone.
pub fn hybrid_search(
    snapshot: &ActivitySnapshot,
    index: &SearchIndex,
    query: &str,
    embedder: &dyn Embedder,
    limit: usize,
) -> Result<Vec<SearchHit>, SearchError> {
    let keyword = keyword_search(snapshot, query, limit)?;
    let semantic = semantic_search(index, query, embedder, limit)?;
    Ok(interleave(keyword, semantic, limit))
}

/// Alternation over two already-ranked lists, exposed separately so the
/// merge rule can be tested on its own.
pub fn interleave(
    keyword: Vec<SearchHit>,
    semantic: Vec<SearchHit>,
    limit: usize,
) -> Vec<SearchHit> {
    let mut out: Vec<SearchHit> = Vec::new();
    let mut seen: HashSet<NodeId> = HashSet::new();
    let mut iters = [keyword.into_iter(), semantic.into_iter()];
    let mut exhausted = [false, false];
    let mut turn = 0;
    while out.len() < limit && !(exhausted[0] && exhausted[1]) {
        // A channel skips already-seen nodes until it produces a fresh
        // hit or runs out, then yields the turn.
        loop {
            match iters[turn].next() {
                Some(hit) => {
                    if seen.insert(hit.node.clone()) {
                        out.push(hit);
                        break;
                    }
                }
                None => {
                    exhausted[turn] = true;
                    break;
                }
            }
        }
        turn = 1 - turn;
    }
    out
}

/// An unordered near-duplicate pair with its lexical score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub a: NodeId,
    pub b: NodeId,
    pub title_a: String,
    pub title_b: String,
    pub score: f64,
}

/// Optional embedding channel for duplicate flagging: cosine similarity
/// over the prebuilt index. Off unless explicitly invoked; the default
/// check is the lexical one below.
pub fn near_duplicates_embedding(
    index: &SearchIndex,
    threshold: f64,
) -> Result<Vec<DuplicatePair>, SearchError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SearchError::InvalidThreshold(threshold));
    }
    let mut out = Vec::new();
    for i in 0..index.entries.len() {
        for j in (i + 1)..index.entries.len() {
            let (ia, ta, va, na) = &index.entries[i];
            let (ib, tb, vb, nb) = &index.entries[j];
            let score = cosine(va, *na, vb, *nb);
            if score >= threshold {
                out.push(DuplicatePair {
                    a: ia.clone(),
                    b: ib.clone(),
                    title_a: ta.clone(),
                    title_b: tb.clone(),
                    score,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap()
            .then(x.title_a.cmp(&y.title_a))
            .then(x.title_b.cmp(&y.title_b))
    });
    Ok(out)
}

/// Flag node pairs whose token Jaccard over title + synonyms is at least
/// `threshold`. Each unordered pair appears once, sorted by score
/// descending then title.
pub fn near_duplicates(
    snapshot: &ActivitySnapshot,
    threshold: f64,
) -> Result<Vec<DuplicatePair>, SearchError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SearchError::InvalidThreshold(threshold));
    }
    let mut nodes: Vec<(&NodeId, &str, BTreeSet<String>)> = snapshot
        .nodes()
        .map(|n| {
            let mut set: BTreeSet<String> = tokens(&n.title).into_iter().collect();
            for syn in &n.synonyms {
                set.extend(tokens(syn));
            }
            (&n.id, n.title.as_str(), set)
        })
        .collect();
    nodes.sort_by(|a, b| a.1.cmp(b.1));

    let mut out = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let (ia, ta, sa) = &nodes[i];
            let (ib, tb, sb) = &nodes[j];
            if sa.is_empty() && sb.is_empty() {
                continue;
            }
            let inter = sa.intersection(sb).count();
            let union = sa.union(sb).count();
            let score = inter as f64 / union as f64;
            if score >= threshold {
                out.push(DuplicatePair {
                    a: (*ia).clone(),
                    b: (*ib).clone(),
                    title_a: ta.to_string(),
                    title_b: tb.to_string(),
                    score,
                });
            }
        }
    }
    out.sort_by(|x, y| {
        y.score
            .partial_cmp(&x.score)
            .unwrap()
            .then(x.title_a.cmp(&y.title_a))
            .then(x.title_b.cmp(&y.title_b))
    });
    Ok(out)
}
