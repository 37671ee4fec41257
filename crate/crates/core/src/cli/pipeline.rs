//! Sample production from a generator source.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CliError;
use crate::corpus::Annotation;
use crate::generator::{GenerationParams, GeneratorAdapter, NGramModel};
use crate::metrics::Sample;

pub enum GeneratorSource {
    NGram(NGramModel),
    Adapter(GeneratorAdapter),
}

/// Seed of the `call`-th generation call of a run seeded with `seed`.
fn call_seed(seed: u64, call: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(call)
}

/// Produces exactly `n` samples. With `annotation_pool`, every sample is
/// prompted with an annotation drawn from the pool.
pub fn produce_samples(
    source: &GeneratorSource,
    n: usize,
    params: &GenerationParams,
    annotation_pool: Option<&[Annotation]>,
) -> Result<Vec<Sample>, CliError> {
    let pool = annotation_pool.filter(|p| !p.is_empty());
    if annotation_pool.is_some() && pool.is_none() {
        return Err(CliError::Domain("annotation pool is empty".to_string()));
    }
    match source {
        GeneratorSource::NGram(model) => {
            let mut out = Vec::with_capacity(n);
            let mut call = 0;
            while out.len() < n {
                let p = GenerationParams {
                    seed: call_seed(params.seed, call),
                    ..*params
                };
                call += 1;
                let (prompt, texts) = match pool {
                    Some(pool) => {
                        let a = pick(pool, p.seed);
                        let (a, texts) = model
                            .generate_controlled(Some(a), &p)
                            .map_err(|e| CliError::Domain(e.to_string()))?;
                        (Some(a), texts)
                    }
                    None => (
                        None,
                        model
                            .generate("", &p)
                            .map_err(|e| CliError::Domain(e.to_string()))?,
                    ),
                };
                for text in texts.into_iter().take(n - out.len()) {
                    out.push(Sample { text, prompt });
                }
            }
            Ok(out)
        }
        GeneratorSource::Adapter(adapter) => {
            let prompts: Vec<Option<Annotation>> = (0..n as u64)
                .map(|i| pool.map(|pool| pick(pool, call_seed(params.seed, i))))
                .collect();
            let texts: Vec<String> = prompts
                .iter()
                .map(|p| p.map(|a| a.render()).unwrap_or_default())
                .collect();
            let batch = adapter
                .generate(&texts, params)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            if !batch.missing.is_empty() {
                warn!(
                    "adapter returned no completion for {} requests",
                    batch.missing.len()
                );
            }
            Ok(batch
                .completions
                .into_iter()
                .zip(prompts)
                .map(|(text, prompt)| Sample { text, prompt })
                .collect())
        }
    }
}

fn pick(pool: &[Annotation], seed: u64) -> Annotation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    pool[rng.random_range(0..pool.len())]
}
