//! Rule-based decomposition of compound task text into verb-object pairs.
//!
//! This is a deliberately mechanical stand-in for model-driven
//! decomposition. The rules, applied in order to the top-level segments
//! produced by splitting on commas and the word "and":
//!
//! 1. All leading segments are single words and the last has several:
//!    the single words are coordinated verbs sharing the trailing
//!    object ("Acquire, distribute and store supplies").
//! 2. Two or more segments, all multi-word: each segment is already a
//!    verb-object phrase of its own. This keeps the rule idempotent on
//!    its own re-joined output.
//! 3. Anything else: one pair, first token as verb, remainder as object.
//!
//! Output is lowercased.

use serde::{Deserialize, Serialize};

/// One decomposed activity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbObject {
    pub verb: String,
    pub object: String,
}

impl VerbObject {
    fn new(verb: &str, object: &str) -> Self {
        VerbObject {
            verb: verb.to_lowercase(),
            object: object.to_lowercase(),
        }
    }

    /// The phrase as "verb object".
    pub fn phrase(&self) -> String {
        if self.object.is_empty() {
            self.verb.clone()
        } else {
            format!("{} {}", self.verb, self.object)
        }
    }
}

/// Split compound task text into verb-object pairs. Never fails; the
/// worst case is a single pair.
pub fn decompose_task(text: &str) -> Vec<VerbObject> {
    let cleaned = text.trim().trim_end_matches('.').trim();
    if cleaned.is_empty() {
        return Vec::new();
    }

    let segments = top_level_segments(cleaned);

    // Rule 1: coordinated single-word verbs sharing one trailing object.
    if segments.len() >= 2 {
        let (last, leading) = segments.split_last().unwrap();
        let last_words: Vec<&str> = last.split_whitespace().collect();
        let leading_single = leading.iter().all(|s| s.split_whitespace().count() == 1);
        if leading_single && last_words.len() >= 2 {
            let object = last_words[1..].join(" ");
            let mut out: Vec<VerbObject> = leading
                .iter()
                .map(|verb| VerbObject::new(verb, &object))
                .collect();
            out.push(VerbObject::new(last_words[0], &object));
            return out;
        }
        // Rule 2: every segment is already a verb-object phrase.
        if segments.iter().all(|s| s.split_whitespace().count() >= 2) {
            return segments
                .iter()
                .map(|s| {
                    let mut words = s.split_whitespace();
                    let verb = words.next().unwrap();
                    let object = words.collect::<Vec<_>>().join(" ");
                    VerbObject::new(verb, &object)
                })
                .collect();
        }
    }

    // Rule 3: single conservative pair.
    let mut words = cleaned.split_whitespace();
    let verb = words.next().unwrap();
    let object = words.collect::<Vec<_>>().join(" ");
    vec![VerbObject::new(verb, &object)]
}

/// Split on ", and", ",", and the standalone word "and".
fn top_level_segments(text: &str) -> Vec<String> {
    let mut segments = Vec::new();
    let mut current = Vec::new();
    for token in text.split_whitespace() {
        let (token, comma) = match token.strip_suffix(',') {
            Some(t) => (t, true),
            None => (token, false),
        };
        if token.eq_ignore_ascii_case("and") {
            if !current.is_empty() {
                segments.push(current.join(" "));
                current = Vec::new();
            }
            continue;
        }
        if !token.is_empty() {
            current.push(token.to_string());
        }
        if comma && !current.is_empty() {
            segments.push(current.join(" "));
            current = Vec::new();
        }
    }
    if !current.is_empty() {
        segments.push(current.join(" "));
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phrases(text: &str) -> Vec<String> {
        decompose_task(text).iter().map(VerbObject::phrase).collect()
    }

    #[test]
    fn coordinated_verbs_share_the_object() {
        assert_eq!(
            phrases("Acquire, distribute and store supplies"),
            vec!["acquire supplies", "distribute supplies", "store supplies"]
        );
    }

    #[test]
    fn no_coordination_yields_one_pair() {
        assert_eq!(phrases("Weld metal"), vec!["weld metal"]);
    }

    #[test]
    fn two_verb_coordination() {
        assert_eq!(
            phrases("Plan and develop instructional methods"),
            vec!["plan instructional methods", "develop instructional methods"]
        );
    }

    #[test]
    fn single_word_is_a_verb_with_empty_object() {
        let pairs = decompose_task("Weld.");
        assert_eq!(pairs, vec![VerbObject { verb: "weld".into(), object: "".into() }]);
    }

    #[test]
    fn mixed_shapes_fall_back_to_one_pair() {
        assert_eq!(
            phrases("Mix flour and water"),
            vec!["mix flour and water"]
        );
    }

    #[test]
    fn rejoined_output_decomposes_to_the_same_pairs() {
        for text in [
            "Acquire, distribute and store supplies",
            "Plan and develop instructional methods",
            "Weld metal",
            "Analyze market signals for real-time consumer insights.",
        ] {
            let pairs = decompose_task(text);
            let rejoined = pairs.iter().map(VerbObject::phrase).collect::<Vec<_>>().join(", and ");
            assert_eq!(decompose_task(&rejoined), pairs, "rejoined: {rejoined}");
        }
    }
}
