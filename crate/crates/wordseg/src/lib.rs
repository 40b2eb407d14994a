//! Online, unsupervised word segmentation for a continuous letter stream.
//!
//! The engine learns recurring letter sequences from a stream with no
//! spaces and no dictionary, then re-emits the stream segmented into
//! words. Sequences live in a trie-shaped sequence memory with frequency
//! counters; competing segmentations of the recent stream are scored in a
//! sawtooth Viterbi trellis (the event window) and committed words detach
//! from its left edge with a small latency.
//!
//! Typical use goes through [`experiment::run`] or the `wordseg` binary;
//! [`segmenter::Session`] is the lower-level per-letter API.

pub mod config;
pub mod eval;
pub mod experiment;
pub mod memory;
pub mod segmenter;
pub mod streamgen;
pub mod trellis;

pub use config::EngineConfig;
pub use segmenter::{Emission, Mode, Session};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("letter {0:?} is outside a-z; normalize input upstream")]
    InvalidLetter(char),
    #[error("corpus contains no letters")]
    EmptyCorpus,
    #[error("flush is only available in output mode")]
    NotInOutputMode,
    #[error("segmentations cover different letter streams")]
    StreamMismatch,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
