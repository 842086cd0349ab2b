//! Work-activity hierarchy engine and analysis toolkit.
//!
//! The pipeline, end to end: load a versioned snapshot of the activity
//! DAG ([`ingest`]), classify usage records into it over an abstract
//! model client ([`classify`]) with hybrid retrieval ([`search`]),
//! measure agreement between annotators with hierarchy-aware metrics
//! ([`agreement`]), roll counts or market value up the hierarchy
//! without double counting ([`aggregate`], [`market`]), and render
//! sunburst diagrams ([`viz`]).

pub mod aggregate;
pub mod agreement;
pub mod classify;
pub mod currency;
pub mod ingest;
pub mod market;
pub mod ontology;
pub mod search;
pub mod synth;
pub mod viz;

pub use currency::Currency;
pub use ontology::{
    ActivityNode, ActivitySnapshot, NodeId, NodeKind, PropertyScalar, SpecializationEdge,
    ValidationReport,
};
