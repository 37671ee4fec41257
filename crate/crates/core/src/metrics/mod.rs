//! Novelty, playability, diversity and accuracy of generated levels, and the
//! aggregate score / control score built from them.
//!
//! Two levels are *distinct* when the edit distance between their canonical
//! texts is at least `k`. Diversity of a set is the size of the largest
//! mutually distinct subset (a maximum clique on the distinctness graph)
//! divided by the number of samples. The score is that quantity restricted to
//! samples that are both novel and playable; the control score further
//! restricts to prompt-accurate samples. Both keep the full sample count as
//! denominator.

pub mod clique;
pub mod distance;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Annotation, SolutionCache};
use crate::level::{validate_text, Level};
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig};

pub use clique::{max_clique, CliqueResult, Graph};
pub use distance::{edit_distance, edit_distance_within};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_CLIQUE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctnessConfig {
    /// Minimum edit distance for two levels to count as distinct.
    pub k: usize,
    pub clique_iteration_cap: u64,
}

impl Default for DistinctnessConfig {
    fn default() -> Self {
        DistinctnessConfig {
            k: DEFAULT_K,
            clique_iteration_cap: DEFAULT_CLIQUE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub prop_empty: f64,
    pub solution_len: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            prop_empty: 0.01,
            solution_len: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub distinct: DistinctnessConfig,
    pub solver: SolverConfig,
    pub tolerances: Tolerances,
}

/// A generated sample: raw text plus the prompt it was generated from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<Annotation>,
}

impl Sample {
    pub fn new(text: impl Into<String>) -> Self {
        Sample {
            text: text.into(),
            prompt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEvaluation {
    /// Canonical serialization when the sample parsed, otherwise the raw text.
    pub text: String,
    pub parsed: bool,
    pub valid: bool,
    pub playable: bool,
    pub novel: bool,
    /// Present only for prompted samples.
    pub accurate: Option<bool>,
    /// `None` when the training set is empty.
    pub min_train_distance: Option<usize>,
    pub solve_status: Option<SolveStatus>,
    pub solution_len: Option<usize>,
    pub prop_empty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_samples: usize,
    pub novelty: f64,
    pub playability: f64,
    pub diversity: f64,
    pub accuracy: Option<f64>,
    pub score: f64,
    pub control_score: Option<f64>,
    pub clique_iterations_used: u64,
    pub clique_capped: bool,
}

impl MetricsReport {
    pub fn empty() -> Self {
        MetricsReport {
            n_samples: 0,
            novelty: 0.0,
            playability: 0.0,
            diversity: 0.0,
            accuracy: None,
            score: 0.0,
            control_score: None,
            clique_iterations_used: 0,
            clique_capped: false,
        }
    }
}

/// Trims trailing line breaks and parses without padding: generated levels
/// must be rectangular on their own.
pub fn parse_sample(text: &str) -> Option<Level> {
    Level::parse(text.trim_end_matches(['\n', '\r']), false).ok()
}

fn canonical_text(text: &str) -> (String, Option<Level>) {
    match parse_sample(text) {
        Some(level) => (level.serialize(), Some(level)),
        None => (text.trim_end_matches(['\n', '\r']).to_string(), None),
    }
}

/// Novel iff the nearest training level is at least `k` edits away. Returns
/// the flag and that nearest distance (`None` for an empty training set).
pub fn is_novel(sample: &str, training: &[String], k: usize) -> (bool, Option<usize>) {
    let (text, _) = canonical_text(sample);
    let chars: Vec<char> = text.chars().collect();
    let training: Vec<Vec<char>> = training.iter().map(|t| t.chars().collect()).collect();
    let d = nearest_distance(&chars, &training);
    (d.is_none_or(|d| d >= k), d)
}

fn nearest_distance(sample: &[char], training: &[Vec<char>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for t in training {
        let limit = match best {
            Some(0) => return Some(0),
            Some(b) => b - 1,
            None => sample.len().max(t.len()),
        };
        if let Some(d) = distance::levenshtein_within(sample, t, limit) {
            best = Some(d);
        }
    }
    best
}

fn solve_with(level: &Level, config: &SolverConfig, cache: Option<&SolutionCache>) -> SolveResult {
    match cache {
        Some(cache) => cache.solve(level, config),
        None => solve(level, config),
    }
}

/// Parses, validates and solves within the budget.
pub fn is_playable(sample: &str, config: &SolverConfig, cache: Option<&SolutionCache>) -> bool {
    match parse_sample(sample) {
        Some(level) => level.validate().verdict && solve_with(&level, config, cache).is_solved(),
        None => false,
    }
}

/// Checks each condition the prompt carries; an empty prompt is trivially
/// met. Playability is the caller's concern.
pub fn is_accurate(
    prop_empty: f64,
    solution_len: usize,
    prompt: &Annotation,
    tolerances: &Tolerances,
) -> bool {
    let empty_ok = prompt
        .prop_empty
        .is_none_or(|p| (prop_empty - p).abs() <= tolerances.prop_empty + 1e-9);
    let len_ok = prompt
        .solution_len
        .is_none_or(|n| solution_len.abs_diff(n) <= tolerances.solution_len);
    empty_ok && len_ok
}

/// Distinctness graph: an edge joins two texts at edit distance `>= k`.
pub fn distinctness_graph(texts: &[String], k: usize) -> Graph {
    let chars: Vec<Vec<char>> = texts.iter().map(|t| t.chars().collect()).collect();
    let n = texts.len();
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let chars = &chars;
            (i + 1..n).filter_map(move |j| {
                let close =
                    k > 0 && distance::levenshtein_within(&chars[i], &chars[j], k - 1).is_some();
                (!close).then_some((i, j))
            })
        })
        .collect();
    Graph::from_edges(n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityResult {
    pub fraction: f64,
    pub clique_size: usize,
    pub capped: bool,
    pub iterations: u64,
}

pub fn diversity(samples: &[String], config: &DistinctnessConfig) -> DiversityResult {
    if samples.is_empty() {
        return DiversityResult {
            fraction: 0.0,
            clique_size: 0,
            capped: false,
            iterations: 0,
        };
    }
    let texts: Vec<String> = samples.iter().map(|s| canonical_text(s).0).collect();
    let graph = distinctness_graph(&texts, config.k);
    let r = max_clique(&graph, config.clique_iteration_cap);
    DiversityResult {
        fraction: r.size() as f64 / samples.len() as f64,
        clique_size: r.size(),
        capped: r.capped,
        iterations: r.iterations,
    }
}

/// Evaluates one sample against pre-split training texts.
fn evaluate_one(
    sample: &Sample,
    training: &[Vec<char>],
    config: &EvalConfig,
    cache: Option<&SolutionCache>,
) -> SampleEvaluation {
    let (text, level) = canonical_text(&sample.text);
    let chars: Vec<char> = text.chars().collect();
    let min_train_distance = nearest_distance(&chars, training);
    let novel = min_train_distance.is_none_or(|d| d >= config.distinct.k);

    let (valid, result) = match &level {
        Some(level) => {
            let valid = level.validate().verdict;
            let result = valid.then(|| solve_with(level, &config.solver, cache));
            (valid, result)
        }
        None => (validate_text(&text).verdict, None),
    };
    let playable = result.as_ref().is_some_and(SolveResult::is_solved);
    let solution_len = result.as_ref().and_then(|r| r.solution_len);
    let prop_empty = level.as_ref().map(Level::prop_empty);
    let accurate = sample.prompt.as_ref().map(|prompt| {
        playable
            && is_accurate(
                prop_empty.unwrap_or(0.0),
                solution_len.unwrap_or(0),
                prompt,
                &config.tolerances,
            )
    });
    SampleEvaluation {
        text,
        parsed: level.is_some(),
        valid,
        playable,
        novel,
        accurate,
        min_train_distance,
        solve_status: result.map(|r| r.status),
        solution_len,
        prop_empty,
    }
}

/// Per-sample evaluation. Samples are processed in parallel; output order
/// matches input order.
pub fn evaluate_samples(
    samples: &[Sample],
    training: &[String],
    config: &EvalConfig,
    cache: Option<&SolutionCache>,
) -> Vec<SampleEvaluation> {
    let training: Vec<Vec<char>> = training.iter().map(|t| t.chars().collect()).collect();
    samples
        .par_iter()
        .map(|s| evaluate_one(s, &training, config, cache))
        .collect()
}

fn fraction(count: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        count as f64 / n as f64
    }
}

/// Aggregates per-sample evaluations into a report.
pub fn score(evaluations: &[SampleEvaluation], config: &DistinctnessConfig) -> MetricsReport {
    let n = evaluations.len();
    if n == 0 {
        return MetricsReport::empty();
    }
    let texts: Vec<String> = evaluations.iter().map(|e| e.text.clone()).collect();
    let graph = distinctness_graph(&texts, config.k);
    let cap = config.clique_iteration_cap;

    let mut iterations = 0;
    let mut capped = false;
    let mut clique_on = |keep: &dyn Fn(&SampleEvaluation) -> bool| -> usize {
        let nodes: Vec<usize> = (0..n).filter(|&i| keep(&evaluations[i])).collect();
        if nodes.is_empty() {
            return 0;
        }
        let r = max_clique(&graph.subgraph(&nodes), cap);
        iterations += r.iterations;
        capped |= r.capped;
        r.size()
    };

    let all = clique_on(&|_| true);
    let good = clique_on(&|e| e.novel && e.playable);
    let prompted = evaluations.iter().any(|e| e.accurate.is_some());
    let control =
        prompted.then(|| clique_on(&|e| e.novel && e.playable && e.accurate == Some(true)));

    let count = |f: fn(&SampleEvaluation) -> bool| evaluations.iter().filter(|e| f(e)).count();
    MetricsReport {
        n_samples: n,
        novelty: fraction(count(|e| e.novel), n),
        playability: fraction(count(|e| e.playable), n),
        diversity: fraction(all, n),
        accuracy: prompted.then(|| fraction(count(|e| e.accurate == Some(true)), n)),
        score: fraction(good, n),
        control_score: control.map(|c| fraction(c, n)),
        clique_iterations_used: iterations,
        clique_capped: capped,
    }
}

/// Full pipeline: per-sample evaluation followed by aggregation.
pub fn evaluate(
    samples: &[Sample],
    training: &[String],
    config: &EvalConfig,
    cache: Option<&SolutionCache>,
) -> (Vec<SampleEvaluation>, MetricsReport) {
    let evaluations = evaluate_samples(samples, training, config, cache);
    let report = score(&evaluations, &config.distinct);
    (evaluations, report)
}
