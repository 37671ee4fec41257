//! Grid sweep over generation hyperparameters.

use serde::{Deserialize, Serialize};

use super::pipeline::{produce_samples, GeneratorSource};
use super::CliError;
use crate::corpus::{Annotation, SolutionCache};
use crate::generator::GenerationParams;
use crate::metrics::{evaluate, EvalConfig, MetricsReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub temperatures: Vec<f64>,
    pub top_ps: Vec<f64>,
    pub beam_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    pub samples_per_config: usize,
    pub max_chars: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            temperatures: vec![0.7, 1.0, 1.3],
            top_ps: vec![0.9, 1.0],
            beam_counts: vec![1, 5],
            seeds: (0..5).collect(),
            samples_per_config: 100,
            max_chars: 512,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.temperatures.is_empty()
            || self.top_ps.is_empty()
            || self.beam_counts.is_empty()
            || self.seeds.is_empty()
        {
            return Err(CliError::Domain(
                "sweep grid axes must be non-empty".to_string(),
            ));
        }
        if self.samples_per_config == 0 {
            return Err(CliError::Domain(
                "samples per config must be positive".to_string(),
            ));
        }
        Ok(())
    }

    /// Grid points in temperature, top-p, beams nesting order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &temperature in &self.temperatures {
            for &top_p in &self.top_ps {
                for &beams in &self.beam_counts {
                    out.push(GridPoint {
                        temperature,
                        top_p,
                        beams,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub temperature: f64,
    pub top_p: f64,
    pub beams: usize,
}

impl GridPoint {
    /// True when `self` wins a score tie against `other`: lower temperature,
    /// then higher top-p, then fewer beams.
    fn preferred_over(&self, other: &GridPoint) -> bool {
        self.temperature
            .total_cmp(&other.temperature)
            .then(other.top_p.total_cmp(&self.top_p))
            .then(self.beams.cmp(&other.beams))
            .is_lt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub config: GridPoint,
    /// Mean over the seeds that completed; `None` if none did.
    pub mean: Option<MetricsReport>,
    pub seeds: Vec<SeedOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub best_config: Option<GridPoint>,
    pub best_mean_score: Option<f64>,
}

/// Field-wise mean. Counters are summed and the cap flag is or-ed.
pub fn mean_report(reports: &[MetricsReport]) -> Option<MetricsReport> {
    if reports.is_empty() {
        return None;
    }
    let k = reports.len() as f64;
    let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    let mean_opt = |f: &dyn Fn(&MetricsReport) -> Option<f64>| {
        let vals: Vec<f64> = reports.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Some(MetricsReport {
        n_samples: reports[0].n_samples,
        novelty: mean(&|r| r.novelty),
        playability: mean(&|r| r.playability),
        diversity: mean(&|r| r.diversity),
        accuracy: mean_opt(&|r| r.accuracy),
        score: mean(&|r| r.score),
        control_score: mean_opt(&|r| r.control_score),
        clique_iterations_used: reports.iter().map(|r| r.clique_iterations_used).sum(),
        clique_capped: reports.iter().any(|r| r.clique_capped),
    })
}

/// Picks the grid point with the highest mean score, breaking ties by
/// [`GridPoint::preferred_over`].
pub fn best_config(cells: &[SweepCell]) -> Option<(GridPoint, f64)> {
    let mut best: Option<(GridPoint, f64)> = None;
    for cell in cells {
        let Some(mean) = &cell.mean else { continue };
        best = match best {
            None => Some((cell.config, mean.score)),
            Some((cfg, score)) => {
                if mean.score > score || (mean.score == score && cell.config.preferred_over(&cfg)) {
                    Some((cell.config, mean.score))
                } else {
                    Some((cfg, score))
                }
            }
        };
    }
    best
}

pub struct SweepInputs<'a> {
    pub source: &'a GeneratorSource,
    pub training: &'a [String],
    pub annotation_pool: Option<&'a [Annotation]>,
    pub config: &'a EvalConfig,
    pub cache: Option<&'a SolutionCache>,
}

/// Runs every grid point for every seed. A failing cell is recorded and the
/// sweep moves on.
pub fn run_sweep(spec: &SweepSpec, inputs: &SweepInputs<'_>) -> Result<SweepResult, CliError> {
    spec.validate()?;
    let mut cells = Vec::new();
    for point in spec.grid() {
        let mut seeds = Vec::new();
        for &seed in &spec.seeds {
            let params = GenerationParams {
                temperature: point.temperature,
                top_p: point.top_p,
                beams: point.beams,
                max_chars: spec.max_chars,
                seed,
            };
            let outcome = produce_samples(
                inputs.source,
                spec.samples_per_config,
                &params,
                inputs.annotation_pool,
            )
            .map(|samples| evaluate(&samples, inputs.training, inputs.config, inputs.cache).1);
            seeds.push(match outcome {
                Ok(report) => SeedOutcome {
                    seed,
                    report: Some(report),
                    error: None,
                },
                Err(e) => {
                    log::warn!("sweep cell {point:?} seed {seed}: {e}");
                    SeedOutcome {
                        seed,
                        report: None,
                        error: Some(e.to_string()),
                    }
                }
            });
        }
        let reports: Vec<MetricsReport> = seeds.iter().filter_map(|s| s.report.clone()).collect();
        cells.push(SweepCell {
            config: point,
            mean: mean_report(&reports),
            seeds,
        });
    }
    let best = best_config(&cells);
    Ok(SweepResult {
        cells,
        best_config: best.map(|b| b.0),
        best_mean_score: best.map(|b| b.1),
    })
}
