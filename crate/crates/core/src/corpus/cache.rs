//! Persistent solution cache: one JSON record per line, append-only.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::level::Level;
use crate::solver::{solve, SolveResult, SolveStatus, SolverConfig};

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Hex SHA-256 of the canonical serialization.
pub fn level_hash(level: &Level) -> String {
    hex::encode(Sha256::digest(level.serialize().as_bytes()))
}

fn default_pruning() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCacheEntry {
    pub level_hash: String,
    pub status: SolveStatus,
    pub solution_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pushes: Option<usize>,
    pub nodes_expanded: u64,
    pub budget: u64,
    #[serde(default = "default_pruning")]
    pub deadlock_pruning: bool,
}

impl SolutionCacheEntry {
    pub fn from_result(level_hash: String, result: &SolveResult, config: &SolverConfig) -> Self {
        SolutionCacheEntry {
            level_hash,
            status: result.status,
            solution_len: result.solution_len,
            pushes: result.pushes,
            nodes_expanded: result.nodes_expanded,
            budget: config.budget,
            deadlock_pruning: config.deadlock_pruning,
        }
    }

    /// What `solve` would return under `budget`, if this entry determines it.
    ///
    /// Search is deterministic, so a stored terminal result that took more
    /// expansions than `budget` means the smaller run exhausts its budget.
    fn answer(&self, budget: u64) -> Option<SolutionCacheEntry> {
        let exhausted = || SolutionCacheEntry {
            status: SolveStatus::ExhaustedBudget,
            solution_len: None,
            pushes: None,
            nodes_expanded: budget,
            budget,
            ..self.clone()
        };
        match self.status {
            SolveStatus::Invalid => Some(self.clone()),
            SolveStatus::Solved | SolveStatus::ProvedUnsolvable => {
                if self.nodes_expanded <= budget {
                    Some(self.clone())
                } else {
                    Some(exhausted())
                }
            }
            SolveStatus::ExhaustedBudget => (self.budget >= budget).then(exhausted),
        }
    }

    /// Whether `self` determines at least as many outcomes as `other`.
    fn supersedes(&self, other: &SolutionCacheEntry) -> bool {
        match (self.status, other.status) {
            (SolveStatus::ExhaustedBudget, SolveStatus::ExhaustedBudget) => {
                self.budget >= other.budget
            }
            (SolveStatus::ExhaustedBudget, _) => false,
            _ => true,
        }
    }

    fn to_result(&self) -> SolveResult {
        SolveResult {
            status: self.status,
            moves: None,
            solution_len: self.solution_len,
            pushes: self.pushes,
            nodes_expanded: self.nodes_expanded,
            invalid_reason: None,
        }
    }
}

type Key = (String, bool);

/// Solution cache keyed by level hash and pruning mode. Readers run
/// concurrently; appends are serialized through a single writer.
pub struct SolutionCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<Key, SolutionCacheEntry>>,
    writer: Mutex<Option<File>>,
    skipped_lines: usize,
}

impl SolutionCache {
    pub fn in_memory() -> Self {
        SolutionCache {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
            skipped_lines: 0,
        }
    }

    /// Opens (creating if needed) a cache file. Lines that fail to parse are
    /// skipped with a warning.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| CacheError::Io {
            path: path.clone(),
            source,
        };
        let mut entries: HashMap<Key, SolutionCacheEntry> = HashMap::new();
        let mut skipped_lines = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<SolutionCacheEntry>(&line) {
                    Ok(entry) => insert(&mut entries, entry),
                    Err(e) => {
                        warn!(
                            "{}:{}: skipping corrupted cache line: {e}",
                            path.display(),
                            n + 1
                        );
                        skipped_lines += 1;
                    }
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io)?;
        Ok(SolutionCache {
            path: Some(path),
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(file)),
            skipped_lines,
        })
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, level_hash: &str, config: &SolverConfig) -> Option<SolutionCacheEntry> {
        let entries = self.entries.read().unwrap();
        entries
            .get(&(level_hash.to_string(), config.deadlock_pruning))
            .and_then(|e| e.answer(config.budget))
    }

    pub fn put(&self, entry: SolutionCacheEntry) -> Result<(), CacheError> {
        let line = serde_json::to_string(&entry).expect("entry serializes");
        insert(&mut self.entries.write().unwrap(), entry);
        let mut writer = self.writer.lock().unwrap();
        if let Some(file) = writer.as_mut() {
            writeln!(file, "{line}").map_err(|source| CacheError::Io {
                path: self.path.clone().unwrap_or_default(),
                source,
            })?;
        }
        Ok(())
    }

    /// Solves through the cache. Cached answers carry no move list. Write
    /// failures are logged and otherwise ignored.
    pub fn solve(&self, level: &Level, config: &SolverConfig) -> SolveResult {
        let hash = level_hash(level);
        if let Some(hit) = self.get(&hash, config) {
            return hit.to_result();
        }
        let result = solve(level, config);
        if let Err(e) = self.put(SolutionCacheEntry::from_result(hash, &result, config)) {
            warn!("{e}");
        }
        result
    }
}

fn insert(entries: &mut HashMap<Key, SolutionCacheEntry>, entry: SolutionCacheEntry) {
    let key = (entry.level_hash.clone(), entry.deadlock_pruning);
    match entries.get(&key) {
        Some(old) if !entry.supersedes(old) => {}
        _ => {
            entries.insert(key, entry);
        }
    }
}
