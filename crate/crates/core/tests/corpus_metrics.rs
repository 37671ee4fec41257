mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::{boxoban_fixture, microban_fixture};
use sokoeval::corpus::{self, Annotation, AnnotationKind, AugmentScheme, Corpus, SolutionCache};
use sokoeval::metrics::{evaluate, EvalConfig, Sample};
use sokoeval::{solve, SolverConfig};

#[test]
fn fixtures_load() {
    let boxoban = boxoban_fixture();
    assert_eq!(boxoban.len(), 100);
    assert!(boxoban
        .levels
        .iter()
        .all(|l| l.width() == 10 && l.height() == 10));
    assert!(boxoban.levels.iter().all(|l| l.validate().verdict));
    let microban = microban_fixture();
    assert_eq!(microban.len(), 32);
    assert_eq!(microban.levels[0].serialize(), common::REF_LEFT);
}

#[test]
fn annotations_are_sound() {
    let config = SolverConfig::default();
    let outcome = corpus::annotate(&microban_fixture(), AnnotationKind::Both, &config, None);
    assert!(outcome.skipped.is_empty());
    for entry in &outcome.entries {
        let len = solve(&entry.level, &config).solution_len.unwrap();
        assert_eq!(
            entry.annotation,
            Annotation::for_level(&entry.level, len, AnnotationKind::Both)
        );
    }
    let text = corpus::render_corpus_file(
        outcome
            .entries
            .iter()
            .map(|e| e.render())
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str),
    );
    assert_eq!(corpus::parse_annotated(&text).unwrap(), outcome.entries);
}

#[test]
fn cache_gives_the_same_annotations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let config = SolverConfig::default();
    let corpus = microban_fixture();
    let fresh = corpus::annotate(&corpus, AnnotationKind::Both, &config, None);
    let cache = SolutionCache::open(&path).unwrap();
    let first = corpus::annotate(&corpus, AnnotationKind::Both, &config, Some(&cache));
    drop(cache);
    let reopened = SolutionCache::open(&path).unwrap();
    assert_eq!(reopened.len(), corpus.len());
    let second = corpus::annotate(&corpus, AnnotationKind::Both, &config, Some(&reopened));
    assert_eq!(fresh.entries, first.entries);
    assert_eq!(first.entries, second.entries);
}

fn subset(indices: &[usize]) -> Corpus {
    let micro = microban_fixture();
    Corpus::from_levels(
        "sub",
        indices
            .iter()
            .map(|&i| micro.levels[i % micro.len()].clone())
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn augmentation_never_duplicates(indices in prop::collection::vec(0usize..64, 0..12)) {
        let base = subset(&indices);
        for scheme in [AugmentScheme::None, AugmentScheme::Flip, AugmentScheme::FlipRotate] {
            let out = corpus::augment(&base, scheme);
            let texts = out.texts();
            let unique: HashSet<&String> = texts.iter().collect();
            prop_assert_eq!(unique.len(), texts.len());
        }
    }

    #[test]
    fn slices_are_deterministic(fraction in 0.0001f64..=1.0, seed in any::<u64>()) {
        let boxoban = boxoban_fixture();
        let a = corpus::slice(&boxoban, fraction, seed).unwrap();
        let b = corpus::slice(&boxoban, fraction, seed).unwrap();
        prop_assert_eq!(a.texts(), b.texts());
        prop_assert_eq!(a.len(), corpus::slice_len(100, fraction));
    }

    #[test]
    fn score_bounds(picks in prop::collection::vec((0usize..100, 0u8..4, 0usize..60), 1..40)) {
        let levels = boxoban_fixture().texts();
        let training = &levels[..40];
        let samples: Vec<Sample> = picks
            .iter()
            .map(|&(i, kind, len)| {
                let text = match kind {
                    0 => levels[i].clone(),
                    1 => levels[i].replacen('#', "-", 1),
                    2 => levels[i][..len.min(levels[i].len())].to_string(),
                    _ => levels[i].replace('$', "-"),
                };
                Sample {
                    text,
                    prompt: Some(Annotation { prop_empty: Some(0.3), solution_len: Some(len) }),
                }
            })
            .collect();
        let config = EvalConfig::default();
        let (_, report) = evaluate(&samples, training, &config, None);
        prop_assert!(report.score <= report.playability + 1e-12);
        prop_assert!(report.score <= report.novelty + 1e-12);
        prop_assert!(report.score <= report.diversity + 1e-12);
        prop_assert!(report.control_score.unwrap() <= report.score + 1e-12);
        prop_assert!(report.control_score.unwrap() <= report.accuracy.unwrap() + 1e-12);
        let (_, again) = evaluate(&samples, training, &config, None);
        prop_assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&report).unwrap());
    }
}
