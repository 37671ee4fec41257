//! Level corpora: ingestion, slicing, augmentation and annotation.

mod annotation;
mod cache;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::level::{Level, ParseError, Transform};
use crate::solver::{SolveStatus, SolverConfig};

pub use annotation::{Annotation, AnnotationKind};
pub use cache::{level_hash, CacheError, SolutionCache, SolutionCacheEntry};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("level {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("level {index} is {width}x{height}, expected 10x10")]
    Shape {
        index: usize,
        width: usize,
        height: usize,
    },
    #[error("level {index}: malformed annotation line {line:?}")]
    Annotation { index: usize, line: String },
    #[error("slice fraction {0} is outside (0, 1]")]
    Fraction(f64),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub levels: Vec<Level>,
    /// Source id per level, parallel to `levels`.
    pub provenance: Vec<String>,
}

impl Corpus {
    pub fn new(name: impl Into<String>) -> Self {
        Corpus {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn from_levels(name: impl Into<String>, levels: Vec<Level>) -> Self {
        let name = name.into();
        let provenance = (0..levels.len()).map(|i| format!("{name}:{i}")).collect();
        Corpus {
            name,
            levels,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn push(&mut self, level: Level, source: String) {
        self.levels.push(level);
        self.provenance.push(source);
    }

    /// Canonical serializations, in corpus order.
    pub fn texts(&self) -> Vec<String> {
        self.levels.iter().map(Level::serialize).collect()
    }
}

/// Splits text into blank-line separated blocks, dropping `;` comment lines.
/// Each block keeps the index of its first line.
fn blocks(text: &str) -> Vec<(usize, Vec<&str>)> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut start = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.push((start, std::mem::take(&mut current)));
            }
            continue;
        }
        if line.trim_start().starts_with(';') {
            continue;
        }
        if current.is_empty() {
            start = i;
        }
        current.push(line);
    }
    if !current.is_empty() {
        out.push((start, current));
    }
    out
}

fn normalize_row(row: &str) -> String {
    row.trim_end().replace(' ', "-")
}

/// Parses Microban-style text: levels separated by blank lines, `;` lines
/// ignored, spaces read as floor, ragged rows padded with walls.
pub fn parse_microban(name: &str, text: &str) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::new(name);
    for (index, (line, rows)) in blocks(text).into_iter().enumerate() {
        let body = rows
            .iter()
            .map(|r| normalize_row(r))
            .collect::<Vec<_>>()
            .join("\n");
        let level =
            Level::parse(&body, true).map_err(|source| CorpusError::Parse { index, source })?;
        corpus.push(level, format!("{name}:{}", line + 1));
    }
    Ok(corpus)
}

pub fn load_microban(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_microban(&file_name(path), &text)
}

fn file_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Parses one file of the public Boxoban layout: `; <id>` header lines, then
/// ten rows of ten characters with space as floor.
pub fn parse_boxoban(name: &str, text: &str) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::new(name);
    let mut id: Option<String> = None;
    let mut rows: Vec<String> = Vec::new();
    let mut index = 0;

    let mut flush = |id: &mut Option<String>,
                     rows: &mut Vec<String>,
                     corpus: &mut Corpus|
     -> Result<(), CorpusError> {
        if rows.is_empty() {
            return Ok(());
        }
        let level = Level::parse(&rows.join("\n"), false)
            .map_err(|source| CorpusError::Parse { index, source })?;
        if level.width() != 10 || level.height() != 10 {
            return Err(CorpusError::Shape {
                index,
                width: level.width(),
                height: level.height(),
            });
        }
        let source = match id.take() {
            Some(id) => format!("{name}:{id}"),
            None => format!("{name}:{index}"),
        };
        corpus.push(level, source);
        rows.clear();
        index += 1;
        Ok(())
    };

    for raw in text.lines() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if let Some(rest) = line.trim_start().strip_prefix(';') {
            flush(&mut id, &mut rows, &mut corpus)?;
            id = Some(rest.trim().to_string());
        } else if line.trim().is_empty() {
            flush(&mut id, &mut rows, &mut corpus)?;
        } else {
            rows.push(line.replace(' ', "-"));
        }
    }
    flush(&mut id, &mut rows, &mut corpus)?;
    Ok(corpus)
}

/// Loads a Boxoban file, or every `*.txt` file of a directory in file-name
/// order.
pub fn load_boxoban(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    if !path.is_dir() {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        return parse_boxoban(&file_name(path), &text);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err(path))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    let mut corpus = Corpus::new(file_name(path));
    if files.is_empty() {
        warn!("no Boxoban level files in {}", path.display());
    }
    for file in files {
        let text = fs::read_to_string(&file).map_err(io_err(&file))?;
        let part = parse_boxoban(&file_name(&file), &text).map_err(|e| match e {
            CorpusError::Parse { index, source } => CorpusError::Parse {
                index: corpus.len() + index,
                source,
            },
            CorpusError::Shape {
                index,
                width,
                height,
            } => CorpusError::Shape {
                index: corpus.len() + index,
                width,
                height,
            },
            other => other,
        })?;
        corpus.levels.extend(part.levels);
        corpus.provenance.extend(part.provenance);
    }
    Ok(corpus)
}

/// Uniform sample without replacement of `ceil(fraction * len)` levels,
/// kept in corpus order.
pub fn slice(corpus: &Corpus, fraction: f64, seed: u64) -> Result<Corpus, CorpusError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CorpusError::Fraction(fraction));
    }
    if fraction == 1.0 {
        return Ok(corpus.clone());
    }
    let n = slice_len(corpus.len(), fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, corpus.len(), n).into_vec();
    picked.sort_unstable();
    let mut out = Corpus::new(format!("{}@{fraction}", corpus.name));
    for i in picked {
        out.push(corpus.levels[i].clone(), corpus.provenance[i].clone());
    }
    Ok(out)
}

/// `ceil(fraction * len)`, immune to binary rounding of the fraction
/// (0.01 * 438000 is 4380, not 4381).
pub fn slice_len(len: usize, fraction: f64) -> usize {
    let exact = fraction * len as f64;
    let n = (exact - 1e-9 * exact.max(1.0)).ceil().max(0.0) as usize;
    n.min(len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AugmentScheme {
    None,
    Flip,
    FlipRotate,
}

impl AugmentScheme {
    fn transforms(self) -> &'static [Transform] {
        match self {
            AugmentScheme::None => &[],
            AugmentScheme::Flip => &[Transform::FlipX, Transform::FlipY],
            AugmentScheme::FlipRotate => &Transform::ALL,
        }
    }
}

/// Adds transformed copies of every level after all originals. Levels whose
/// canonical text is already present are dropped.
pub fn augment(corpus: &Corpus, scheme: AugmentScheme) -> Corpus {
    let mut seen = HashSet::new();
    let mut out = Corpus::new(match scheme {
        AugmentScheme::None => corpus.name.clone(),
        _ => format!("{}+{scheme:?}", corpus.name),
    });
    for (level, source) in corpus.levels.iter().zip(&corpus.provenance) {
        if seen.insert(level.serialize()) {
            out.push(level.clone(), source.clone());
        }
    }
    for (level, source) in corpus.levels.iter().zip(&corpus.provenance) {
        for &op in scheme.transforms() {
            let copy = level.transform(op);
            if seen.insert(copy.serialize()) {
                out.push(copy, format!("{source}#{op:?}"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedLevel {
    pub annotation: Annotation,
    pub level: Level,
}

impl AnnotatedLevel {
    pub fn render(&self) -> String {
        format!("{}{}", self.annotation.render(), self.level.serialize())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotateOutcome {
    pub entries: Vec<AnnotatedLevel>,
    /// Indices of levels left out, with the solver status that excluded them.
    pub skipped: Vec<(usize, SolveStatus)>,
}

/// Solves every level (through the cache when given) and attaches its
/// annotation. Levels without a solution are skipped and reported.
pub fn annotate(
    corpus: &Corpus,
    kind: AnnotationKind,
    config: &SolverConfig,
    cache: Option<&SolutionCache>,
) -> AnnotateOutcome {
    let solved: Vec<_> = corpus
        .levels
        .par_iter()
        .map(|level| match cache {
            Some(cache) => cache.solve(level, config),
            None => crate::solver::solve(level, config),
        })
        .collect();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, (level, result)) in corpus.levels.iter().zip(solved).enumerate() {
        match result.solution_len {
            Some(len) if result.status == SolveStatus::Solved => entries.push(AnnotatedLevel {
                annotation: Annotation::for_level(level, len, kind),
                level: level.clone(),
            }),
            _ => skipped.push((i, result.status)),
        }
    }
    if !skipped.is_empty() {
        warn!(
            "{} of {} levels skipped during annotation (no solution found)",
            skipped.len(),
            corpus.len()
        );
    }
    AnnotateOutcome { entries, skipped }
}

/// Entries separated by one blank line, with a trailing newline.
pub fn render_corpus_file<'a>(entries: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for (i, entry) in entries.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(entry);
        out.push('\n');
    }
    out
}

/// Parses each blank-line separated entry on its own, so one bad entry does
/// not hide the others. Entries may start with annotation lines.
pub fn parse_entries(text: &str) -> Vec<Result<AnnotatedLevel, CorpusError>> {
    blocks(text)
        .into_iter()
        .enumerate()
        .map(|(index, (_, rows))| {
            let joined = rows.join("\n");
            let (annotation, body) = Annotation::split_prefix(&joined)
                .map_err(|line| CorpusError::Annotation { index, line })?;
            let body: Vec<String> = body.lines().map(normalize_row).collect();
            let level = Level::parse(&body.join("\n"), true)
                .map_err(|source| CorpusError::Parse { index, source })?;
            Ok(AnnotatedLevel { annotation, level })
        })
        .collect()
}

/// Parses a corpus file whose entries may start with annotation lines.
pub fn parse_annotated(text: &str) -> Result<Vec<AnnotatedLevel>, CorpusError> {
    parse_entries(text).into_iter().collect()
}

pub fn load_annotated(path: impl AsRef<Path>) -> Result<Vec<AnnotatedLevel>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_annotated(&text)
}

/// Loads a plain or annotated corpus file; annotations are dropped.
pub fn load_corpus_file(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let entries = load_annotated(path)?;
    Ok(Corpus::from_levels(
        file_name(path),
        entries.into_iter().map(|e| e.level).collect(),
    ))
}
