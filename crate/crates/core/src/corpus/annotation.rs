use serde::{Deserialize, Serialize};

use crate::level::{render_fraction, Level};

const PROP_EMPTY: &str = "prop_empty:";
const SOLUTION_LEN: &str = "solution_len:";

/// Which statistics an annotation carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnotationKind {
    PropEmpty,
    SolutionLen,
    Both,
}

/// Controllability prompt. Either field may be absent for single-condition
/// prompts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub prop_empty: Option<f64>,
    pub solution_len: Option<usize>,
}

impl Annotation {
    /// Annotation describing `level`. `prop_empty` is truncated to three
    /// decimals, matching its rendered form.
    pub fn for_level(level: &Level, solution_len: usize, kind: AnnotationKind) -> Annotation {
        let millis = level.empty_count() * 1000 / level.cells().len();
        let prop = millis as f64 / 1000.0;
        match kind {
            AnnotationKind::PropEmpty => Annotation {
                prop_empty: Some(prop),
                solution_len: None,
            },
            AnnotationKind::SolutionLen => Annotation {
                prop_empty: None,
                solution_len: Some(solution_len),
            },
            AnnotationKind::Both => Annotation {
                prop_empty: Some(prop),
                solution_len: Some(solution_len),
            },
        }
    }

    pub fn is_empty(&self) -> bool {
        self.prop_empty.is_none() && self.solution_len.is_none()
    }

    pub fn render_prop_empty(value: f64) -> String {
        let millis = (value * 1000.0 + 1e-6).floor().max(0.0) as usize;
        render_fraction(millis, 1000)
    }

    /// The annotation lines, each terminated by a newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(p) = self.prop_empty {
            out.push_str(&format!("{PROP_EMPTY} {}\n", Self::render_prop_empty(p)));
        }
        if let Some(n) = self.solution_len {
            out.push_str(&format!("{SOLUTION_LEN} {n}\n"));
        }
        out
    }

    /// Splits leading annotation lines off `text`. A line that starts with an
    /// annotation key but has an unreadable value is returned as the error.
    pub fn split_prefix(text: &str) -> Result<(Annotation, &str), String> {
        let mut annotation = Annotation::default();
        let mut rest = text;
        loop {
            let (line, tail) = match rest.find('\n') {
                Some(i) => (&rest[..i], &rest[i + 1..]),
                None => (rest, ""),
            };
            let line = line.trim_end_matches('\r');
            if let Some(v) = line.strip_prefix(PROP_EMPTY) {
                let v: f64 = v.trim().parse().map_err(|_| line.to_string())?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(line.to_string());
                }
                annotation.prop_empty = Some(v);
            } else if let Some(v) = line.strip_prefix(SOLUTION_LEN) {
                annotation.solution_len = Some(v.trim().parse().map_err(|_| line.to_string())?);
            } else {
                return Ok((annotation, rest));
            }
            rest = tail;
        }
    }
}
