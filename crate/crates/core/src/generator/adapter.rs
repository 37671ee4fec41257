//! Driver for external generators.
//!
//! Requests and responses are JSON objects, one per line, UTF-8:
//!
//! ```text
//! {"id":0,"prompt":"...","temperature":1.0,"top_p":0.9,"beams":1,"max_chars":512,"seed":7}
//! {"id":0,"completion":"..."}
//! ```
//!
//! Request `i` carries `seed + i` so that repeated prompts differ. Responses
//! may arrive in any order; a missing id yields an empty completion.
//!
//! In subprocess mode the requests are written to the child's stdin, which is
//! then closed, and responses are read from its stdout. In file-exchange mode
//! the requests go to `prompts.jsonl` in the exchange directory and the
//! adapter polls for `completions.jsonl`, which the worker must create
//! atomically (write then rename).

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::GenerationParams;

pub const PROMPTS_FILE: &str = "prompts.jsonl";
pub const COMPLETIONS_FILE: &str = "completions.jsonl";

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter did not answer within {0:?}")]
    Timeout(Duration),
    #[error("adapter protocol error on response line {line}: {reason}")]
    Protocol { line: usize, reason: String },
    #[error("adapter io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterMode {
    Subprocess { command: Vec<String> },
    FileExchange { dir: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorAdapter {
    pub mode: AdapterMode,
    pub timeout: Duration,
    pub poll_interval: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub id: u64,
    pub prompt: String,
    pub temperature: f64,
    pub top_p: f64,
    pub beams: usize,
    pub max_chars: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub id: u64,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdapterBatch {
    /// One completion per prompt, in prompt order.
    pub completions: Vec<String>,
    /// Request ids that got no response.
    pub missing: Vec<u64>,
}

impl GeneratorAdapter {
    pub fn subprocess(command: Vec<String>) -> Self {
        GeneratorAdapter {
            mode: AdapterMode::Subprocess { command },
            timeout: Duration::from_secs(600),
            poll_interval: Duration::from_millis(50),
        }
    }

    pub fn file_exchange(dir: impl Into<PathBuf>) -> Self {
        GeneratorAdapter {
            mode: AdapterMode::FileExchange { dir: dir.into() },
            timeout: Duration::from_secs(600),
            poll_interval: Duration::from_millis(50),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn generate(
        &self,
        prompts: &[String],
        params: &GenerationParams,
    ) -> Result<AdapterBatch, AdapterError> {
        let requests = build_requests(prompts, params);
        let responses = match &self.mode {
            AdapterMode::Subprocess { command } => self.run_subprocess(command, &requests)?,
            AdapterMode::FileExchange { dir } => self.run_file_exchange(dir, &requests)?,
        };
        Ok(collate(prompts.len(), responses))
    }

    fn run_subprocess(
        &self,
        command: &[String],
        requests: &[AdapterRequest],
    ) -> Result<HashMap<u64, String>, AdapterError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| AdapterError::Protocol {
                line: 0,
                reason: "empty adapter command".to_string(),
            })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let payload = encode_requests(requests);
        let writer = thread::spawn(move || {
            // a child that exits early closes the pipe; that surfaces as missing ids
            let _ = stdin.write_all(payload.as_bytes());
        });

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let deadline = Instant::now() + self.timeout;
        let mut responses = HashMap::new();
        let mut line_no = 0;
        let outcome = loop {
            if responses.len() == requests.len() {
                break Ok(());
            }
            let remaining = deadline.saturating_duration_since(Instant::now());
            match rx.recv_timeout(remaining) {
                Ok(Ok(line)) => {
                    line_no += 1;
                    if let Err(e) = accept(&line, line_no, requests.len(), &mut responses) {
                        break Err(e);
                    }
                }
                Ok(Err(e)) => break Err(AdapterError::Io(e)),
                Err(mpsc::RecvTimeoutError::Disconnected) => break Ok(()),
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    break Err(AdapterError::Timeout(self.timeout))
                }
            }
        };
        if outcome.is_err() || responses.len() == requests.len() {
            let _ = child.kill();
        }
        let _ = child.wait();
        let _ = writer.join();
        outcome.map(|()| responses)
    }

    fn run_file_exchange(
        &self,
        dir: &PathBuf,
        requests: &[AdapterRequest],
    ) -> Result<HashMap<u64, String>, AdapterError> {
        fs::create_dir_all(dir)?;
        let completions = dir.join(COMPLETIONS_FILE);
        if completions.exists() {
            fs::remove_file(&completions)?;
        }
        let tmp = dir.join(format!("{PROMPTS_FILE}.tmp"));
        fs::write(&tmp, encode_requests(requests))?;
        fs::rename(&tmp, dir.join(PROMPTS_FILE))?;

        let deadline = Instant::now() + self.timeout;
        while !completions.exists() {
            if Instant::now() >= deadline {
                return Err(AdapterError::Timeout(self.timeout));
            }
            thread::sleep(self.poll_interval);
        }
        let text = fs::read_to_string(&completions)?;
        let mut responses = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            accept(line, i + 1, requests.len(), &mut responses)?;
        }
        Ok(responses)
    }
}

pub fn build_requests(prompts: &[String], params: &GenerationParams) -> Vec<AdapterRequest> {
    prompts
        .iter()
        .enumerate()
        .map(|(i, prompt)| AdapterRequest {
            id: i as u64,
            prompt: prompt.clone(),
            temperature: params.temperature,
            top_p: params.top_p,
            beams: params.beams,
            max_chars: params.max_chars,
            seed: params.seed.wrapping_add(i as u64),
        })
        .collect()
}

pub fn encode_requests(requests: &[AdapterRequest]) -> String {
    let mut out = String::new();
    for r in requests {
        out.push_str(&serde_json::to_string(r).expect("request serializes"));
        out.push('\n');
    }
    out
}

fn accept(
    line: &str,
    line_no: usize,
    expected: usize,
    responses: &mut HashMap<u64, String>,
) -> Result<(), AdapterError> {
    if line.trim().is_empty() {
        return Ok(());
    }
    let protocol = |reason: String| AdapterError::Protocol {
        line: line_no,
        reason,
    };
    let r: AdapterResponse = serde_json::from_str(line).map_err(|e| protocol(e.to_string()))?;
    if r.id as usize >= expected {
        return Err(protocol(format!("unknown id {}", r.id)));
    }
    if responses.insert(r.id, r.completion).is_some() {
        return Err(protocol(format!("duplicate id {}", r.id)));
    }
    Ok(())
}

fn collate(n: usize, mut responses: HashMap<u64, String>) -> AdapterBatch {
    let mut completions = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for id in 0..n as u64 {
        match responses.remove(&id) {
            Some(c) => completions.push(c),
            None => {
                missing.push(id);
                completions.push(String::new());
            }
        }
    }
    AdapterBatch {
        completions,
        missing,
    }
}
