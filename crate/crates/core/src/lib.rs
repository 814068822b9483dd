//! Fine-grained finding labels from radiology report text.
//!
//! The pipeline runs four stages per sentence:
//!
//! 1. [`matcher`] detects core findings and modifiers with prefix-tolerant,
//!    order-preserving phrase alignment against a [`lexicon::Lexicon`];
//! 2. [`parsegraph`] groups sentence tokens into phrasal groups from a
//!    dependency parse;
//! 3. [`negation`] decides the polarity of every core finding;
//! 4. [`labeler`] attaches modifiers to findings and renders slotted labels
//!    such as `anatomicalfinding|yes|streaky opacity|base||left;base|left`.
//!
//! [`corpus`] runs the pipeline over report collections and builds a
//! support-filtered label catalog. See the crate's `examples/` directory for
//! one runnable program per stage.

pub mod cli;
pub mod corpus;
pub mod labeler;
pub mod lexicon;
pub mod matcher;
pub mod negation;
pub mod parsegraph;
pub mod pipeline;
pub mod textprep;

pub use labeler::{FineGrainedLabel, LabelPattern, Polarity};
pub use lexicon::{load_lexicon, FindingType, Lexicon, ModifierCategory};
pub use matcher::{ConceptMention, MatchParams, VocabularyIndex};
pub use pipeline::{Extractor, PipelineConfig};
pub use textprep::{Report, Sentence};
