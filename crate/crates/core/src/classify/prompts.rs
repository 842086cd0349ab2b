//! Prompt text assets, versioned as data.

pub const PROMPT_VERSION: &str = "v1";

pub const BASE_CLASSIFY: &str = include_str!("../../assets/prompts/v1/base_classify.txt");
pub const MPPO_EXTRACT: &str = include_str!("../../assets/prompts/v1/mppo_extract.txt");
pub const MPPO_SELECT_OVERRIDES: &str =
    include_str!("../../assets/prompts/v1/mppo_select_overrides.txt");

/// The corrective suffix appended to the user prompt on the single
/// re-ask after an unparseable reply.
pub const REASK_SUFFIX: &str = "\n\nYour previous reply was not the required JSON object. \
Reply again with exactly the specified JSON object and nothing else.";

/// Render the per-record input sections shared by every variant.
pub fn input_sections(title: &str, tagline: &str, description: &str) -> String {
    format!(
        "### Application Title:\n\n{title}\n\n### Application Tagline:\n\n{tagline}\n\n\
         ### Application Description:\n\n{description}\n"
    )
}

/// The ontology-nodes input section for prompts that carry one.
pub fn ontology_section(ontology_json: &str) -> String {
    format!("### Ontology Nodes:\n\n{ontology_json}\n\n")
}

/// The extracted-activity section MPPO's selection step adds.
pub fn activity_section(activity: &str, rationale: &str) -> String {
    format!("### Substantive Activity:\n\n{activity} because {rationale}\n\n")
}
