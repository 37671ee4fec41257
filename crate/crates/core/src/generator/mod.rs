//! Level generators: a character n-gram baseline and an adapter that drives
//! external generators over a line-delimited JSON protocol.

pub mod adapter;
pub mod ngram;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adapter::{
    AdapterBatch, AdapterError, AdapterMode, AdapterRequest, AdapterResponse, GeneratorAdapter,
    COMPLETIONS_FILE, PROMPTS_FILE,
};
pub use ngram::{NGramModel, END, START};

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("model was trained without annotations and cannot take an annotation prompt")]
    PromptVocabularyMismatch,
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    /// Softmax temperature; 0 means greedy argmax.
    pub temperature: f64,
    /// Nucleus mass in (0, 1].
    pub top_p: f64,
    /// Number of independent sampled sequences per call.
    pub beams: usize,
    pub max_chars: usize,
    pub seed: u64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 1.0,
            top_p: 1.0,
            beams: 1,
            max_chars: 512,
            seed: 0,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |m: &str| Err(GeneratorError::InvalidParams(m.to_string()));
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad("temperature must be finite and non-negative");
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad("top_p must be in (0, 1]");
        }
        if self.beams == 0 {
            return bad("beams must be positive");
        }
        if self.max_chars == 0 {
            return bad("max_chars must be positive");
        }
        Ok(())
    }
}
