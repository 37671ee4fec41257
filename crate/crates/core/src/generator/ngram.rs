//! Character n-gram model with backoff, sampled with temperature and top-p.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GenerationParams, GeneratorError};
use crate::corpus::Annotation;

/// Start-of-sequence padding character.
pub const START: char = '\u{2}';
/// End-of-sequence marker.
pub const END: char = '\u{3}';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextCounts {
    pub total: u64,
    pub next: BTreeMap<char, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGramModel {
    pub order: usize,
    /// Keyed by every context suffix of length `0..=order`.
    pub counts: BTreeMap<String, NextCounts>,
    pub vocabulary: BTreeSet<char>,
    /// True when every training text began with annotation lines.
    pub annotated: bool,
    pub annotation_pool: Vec<Annotation>,
}

impl NGramModel {
    /// Counts continuations over each text framed as `START^order text END`.
    pub fn train<S: AsRef<str>>(texts: &[S], order: usize) -> Result<NGramModel, GeneratorError> {
        if order == 0 {
            return Err(GeneratorError::ZeroOrder);
        }
        if texts.is_empty() {
            return Err(GeneratorError::EmptyCorpus);
        }
        let mut counts: BTreeMap<String, NextCounts> = BTreeMap::new();
        let mut vocabulary = BTreeSet::from([START, END]);
        let mut pool = Vec::new();
        let mut annotated = true;
        for text in texts {
            let text = text.as_ref();
            match Annotation::split_prefix(text) {
                Ok((a, _)) if !a.is_empty() => pool.push(a),
                _ => annotated = false,
            }
            let seq: Vec<char> = std::iter::repeat_n(START, order)
                .chain(text.chars())
                .chain(std::iter::once(END))
                .collect();
            vocabulary.extend(text.chars());
            for i in order..seq.len() {
                let window = &seq[i - order..i];
                for len in 0..=order {
                    let ctx: String = window[order - len..].iter().collect();
                    let entry = counts.entry(ctx).or_insert_with(|| NextCounts {
                        total: 0,
                        next: BTreeMap::new(),
                    });
                    entry.total += 1;
                    *entry.next.entry(seq[i]).or_insert(0) += 1;
                }
            }
        }
        if !annotated {
            pool.clear();
        }
        Ok(NGramModel {
            order,
            counts,
            vocabulary,
            annotated,
            annotation_pool: pool,
        })
    }

    /// Counts for the longest known suffix of `history`.
    pub fn lookup(&self, history: &[char]) -> &NextCounts {
        for len in (0..=self.order.min(history.len())).rev() {
            let ctx: String = history[history.len() - len..].iter().collect();
            if let Some(c) = self.counts.get(&ctx) {
                return c;
            }
        }
        self.counts.get("").expect("unconditional counts exist")
    }

    /// One sampled continuation per beam, prompt excluded.
    pub fn generate(
        &self,
        prompt: &str,
        params: &GenerationParams,
    ) -> Result<Vec<String>, GeneratorError> {
        params.validate()?;
        Ok((0..params.beams)
            .map(|beam| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(beam as u64);
                self.sample_sequence(prompt, params, &mut rng)
            })
            .collect())
    }

    fn sample_sequence(
        &self,
        prompt: &str,
        params: &GenerationParams,
        rng: &mut ChaCha8Rng,
    ) -> String {
        let mut history: Vec<char> = std::iter::repeat_n(START, self.order)
            .chain(prompt.chars())
            .collect();
        let mut out = String::new();
        for _ in 0..params.max_chars {
            let dist = next_distribution(
                &self.lookup(&history).next,
                params.temperature,
                params.top_p,
            );
            let c = sample(&dist, rng);
            if c == END {
                break;
            }
            out.push(c);
            history.push(c);
        }
        out
    }

    /// Generation from annotation lines. Without an explicit annotation, one
    /// is drawn from the training pool using the parameter seed.
    pub fn generate_controlled(
        &self,
        annotation: Option<Annotation>,
        params: &GenerationParams,
    ) -> Result<(Annotation, Vec<String>), GeneratorError> {
        if !self.annotated || self.annotation_pool.is_empty() {
            return Err(GeneratorError::PromptVocabularyMismatch);
        }
        let annotation = match annotation {
            Some(a) => a,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(u64::MAX);
                self.annotation_pool[rng.random_range(0..self.annotation_pool.len())]
            }
        };
        let texts = self.generate(&annotation.render(), params)?;
        Ok((annotation, texts))
    }
}

/// Temperature-scaled, top-p truncated, renormalized distribution, sorted by
/// descending probability (ties by character). Temperature 0 puts all mass
/// on the most frequent character.
pub fn next_distribution(
    counts: &BTreeMap<char, u64>,
    temperature: f64,
    top_p: f64,
) -> Vec<(char, f64)> {
    let mut items: Vec<(char, u64)> = counts
        .iter()
        .map(|(&c, &n)| (c, n))
        .filter(|&(_, n)| n > 0)
        .collect();
    items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if items.is_empty() {
        return vec![(END, 1.0)];
    }
    if temperature == 0.0 {
        return vec![(items[0].0, 1.0)];
    }
    let logits: Vec<f64> = items
        .iter()
        .map(|&(_, n)| (n as f64).ln() / temperature)
        .collect();
    let max = logits[0];
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<(char, f64)> = items
        .iter()
        .zip(&weights)
        .map(|(&(c, _), w)| (c, w / total))
        .collect();
    truncate_top_p(probs, top_p)
}

/// Keeps the shortest prefix (of a descending-sorted distribution) whose mass
/// reaches `top_p`, boundary element included, then renormalizes.
pub fn truncate_top_p(probs: Vec<(char, f64)>, top_p: f64) -> Vec<(char, f64)> {
    let mut kept = Vec::new();
    let mut mass = 0.0;
    for (c, p) in probs {
        kept.push((c, p));
        mass += p;
        if mass >= top_p - 1e-12 {
            break;
        }
    }
    kept.iter().map(|&(c, p)| (c, p / mass)).collect()
}

fn sample(dist: &[(char, f64)], rng: &mut impl Rng) -> char {
    let mut x: f64 = rng.random();
    for &(c, p) in dist {
        if x < p {
            return c;
        }
        x -= p;
    }
    dist.last().expect("non-empty distribution").0
}
