//! Toolkit for measuring and synthesizing code-switching in multilingual
//! pre-training corpora.
//!
//! The crate is organized as a pipeline:
//!
//! * [`corpus`] - documents, JSONL corpus I/O and embedding matrices.
//! * [`tagging`] - sentence splitting and script-based language tagging.
//! * [`detect`] - code-switching segment detection and classification.
//! * [`stats`] - per-type segment and document accounting.
//! * [`ablation`] - cs-free / control dataset construction by substitution.
//! * [`synth`] - synthetic code-switching under token budgets and mixes.
//! * [`align`] - mutual nearest-neighbour alignment score for parallel embeddings.

pub mod ablation;
pub mod align;
pub mod corpus;
pub mod detect;
mod error;
pub mod lexicon;
pub mod remote;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod tagging;

pub use corpus::{Document, EmbeddingMatrix, LanguagePair};
pub use detect::{Category, CsSegment, DetectorConfig, Level};
pub use error::{Error, Result};
pub use lexicon::Lexicon;
pub use stats::CorpusStats;
pub use tagging::{LanguageTag, ScriptProfile, Sentence};
