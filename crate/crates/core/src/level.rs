//! Sokoban level grid, its ASCII grammar, validity rules and symmetries.
//!
//! The canonical text form uses one character per tile:
//!
//! | tile           | char |
//! |----------------|------|
//! | wall           | `#`  |
//! | floor          | `-`  |
//! | player         | `@`  |
//! | box            | `$`  |
//! | goal           | `.`  |
//! | box on goal    | `*`  |
//! | player on goal | `+`  |
//!
//! Rows are joined with `\n` and there is no trailing newline.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tile {
    Wall,
    Floor,
    Player,
    Box,
    Goal,
    BoxOnGoal,
    PlayerOnGoal,
}

impl Tile {
    pub const ALL: [Tile; 7] = [
        Tile::Wall,
        Tile::Floor,
        Tile::Player,
        Tile::Box,
        Tile::Goal,
        Tile::BoxOnGoal,
        Tile::PlayerOnGoal,
    ];

    pub fn from_char(c: char) -> Option<Tile> {
        Some(match c {
            '#' => Tile::Wall,
            '-' => Tile::Floor,
            '@' => Tile::Player,
            '$' => Tile::Box,
            '.' => Tile::Goal,
            '*' => Tile::BoxOnGoal,
            '+' => Tile::PlayerOnGoal,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            Tile::Wall => '#',
            Tile::Floor => '-',
            Tile::Player => '@',
            Tile::Box => '$',
            Tile::Goal => '.',
            Tile::BoxOnGoal => '*',
            Tile::PlayerOnGoal => '+',
        }
    }

    /// Plain floor only. Goals count as occupied.
    pub fn is_empty(self) -> bool {
        self == Tile::Floor
    }

    pub fn is_wall(self) -> bool {
        self == Tile::Wall
    }

    pub fn has_box(self) -> bool {
        matches!(self, Tile::Box | Tile::BoxOnGoal)
    }

    pub fn has_goal(self) -> bool {
        matches!(self, Tile::Goal | Tile::BoxOnGoal | Tile::PlayerOnGoal)
    }

    pub fn has_player(self) -> bool {
        matches!(self, Tile::Player | Tile::PlayerOnGoal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty level text")]
    EmptyInput,
    #[error("unknown character {ch:?} at row {row}, column {col}")]
    UnknownCharacter { row: usize, col: usize, ch: char },
    #[error("row {row} has width {found}, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    /// Mirror across the horizontal axis (rows reversed).
    FlipX,
    /// Mirror across the vertical axis (columns reversed).
    FlipY,
    Rot90Cw,
    Rot90Ccw,
}

impl Transform {
    pub const ALL: [Transform; 4] = [
        Transform::FlipX,
        Transform::FlipY,
        Transform::Rot90Cw,
        Transform::Rot90Ccw,
    ];

    pub fn inverse(self) -> Transform {
        match self {
            Transform::FlipX => Transform::FlipX,
            Transform::FlipY => Transform::FlipY,
            Transform::Rot90Cw => Transform::Rot90Ccw,
            Transform::Rot90Ccw => Transform::Rot90Cw,
        }
    }
}

/// Structural checks a level must pass before solvability is considered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub rectangular: bool,
    pub chars_valid: bool,
    pub player_count: usize,
    pub box_count: usize,
    pub goal_count: usize,
    pub verdict: bool,
}

impl ValidityReport {
    fn from_counts(
        rectangular: bool,
        chars_valid: bool,
        player_count: usize,
        box_count: usize,
        goal_count: usize,
    ) -> Self {
        let verdict = rectangular
            && chars_valid
            && player_count == 1
            && box_count == goal_count
            && box_count > 0;
        ValidityReport {
            rectangular,
            chars_valid,
            player_count,
            box_count,
            goal_count,
            verdict,
        }
    }
}

/// A rectangular grid of tiles, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Level {
    width: usize,
    height: usize,
    cells: Vec<Tile>,
}

impl Level {
    /// Builds a level from row-major cells. Returns `None` if the dimensions
    /// are zero or do not match the cell count.
    pub fn from_cells(width: usize, height: usize, cells: Vec<Tile>) -> Option<Level> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return None;
        }
        Some(Level {
            width,
            height,
            cells,
        })
    }

    /// Parses canonical level text. Lines are split on `\n` (a trailing `\r`
    /// is stripped); trailing empty lines are ignored.
    ///
    /// With `pad_with_walls`, rows shorter than the widest row are extended on
    /// the right with walls. Without it, unequal rows are an error.
    pub fn parse(text: &str, pad_with_walls: bool) -> Result<Level, ParseError> {
        let mut rows: Vec<&str> = text
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        while rows.last().is_some_and(|r| r.is_empty()) {
            rows.pop();
        }
        if rows.is_empty() {
            return Err(ParseError::EmptyInput);
        }

        let mut grid: Vec<Vec<Tile>> = Vec::with_capacity(rows.len());
        for (r, line) in rows.iter().enumerate() {
            let mut row = Vec::with_capacity(line.len());
            for (c, ch) in line.chars().enumerate() {
                let tile = Tile::from_char(ch).ok_or(ParseError::UnknownCharacter {
                    row: r,
                    col: c,
                    ch,
                })?;
                row.push(tile);
            }
            grid.push(row);
        }

        let width = grid.iter().map(Vec::len).max().unwrap_or(0);
        if width == 0 {
            return Err(ParseError::EmptyInput);
        }
        let height = grid.len();
        let mut cells = Vec::with_capacity(width * height);
        for (r, mut row) in grid.into_iter().enumerate() {
            if row.len() != width {
                if !pad_with_walls {
                    return Err(ParseError::RaggedRows {
                        row: r,
                        expected: width,
                        found: row.len(),
                    });
                }
                row.resize(width, Tile::Wall);
            }
            cells.extend(row);
        }
        Ok(Level {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[Tile] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Tile {
        self.cells[row * self.width + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Tile]> {
        self.cells.chunks(self.width)
    }

    /// Canonical text: rows joined by `\n`, no trailing newline.
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for (r, row) in self.rows().enumerate() {
            if r > 0 {
                out.push('\n');
            }
            out.extend(row.iter().map(|t| t.to_char()));
        }
        out
    }

    pub fn validate(&self) -> ValidityReport {
        let player_count = self.cells.iter().filter(|t| t.has_player()).count();
        let box_count = self.cells.iter().filter(|t| t.has_box()).count();
        let goal_count = self.cells.iter().filter(|t| t.has_goal()).count();
        ValidityReport::from_counts(true, true, player_count, box_count, goal_count)
    }

    pub fn empty_count(&self) -> usize {
        self.cells.iter().filter(|t| t.is_empty()).count()
    }

    /// Fraction of tiles that are plain floor.
    pub fn prop_empty(&self) -> f64 {
        self.empty_count() as f64 / self.cells.len() as f64
    }

    pub fn transform(&self, op: Transform) -> Level {
        let (w, h) = (self.width, self.height);
        match op {
            Transform::FlipX => {
                let cells = self.cells.chunks(w).rev().flatten().copied().collect();
                Level {
                    width: w,
                    height: h,
                    cells,
                }
            }
            Transform::FlipY => {
                let cells = self
                    .cells
                    .chunks(w)
                    .flat_map(|row| row.iter().rev().copied())
                    .collect();
                Level {
                    width: w,
                    height: h,
                    cells,
                }
            }
            Transform::Rot90Cw => {
                // new(r, c) = old(h - 1 - c, r), new dims h x w
                let mut cells = Vec::with_capacity(w * h);
                for r in 0..w {
                    for c in 0..h {
                        cells.push(self.get(h - 1 - c, r));
                    }
                }
                Level {
                    width: h,
                    height: w,
                    cells,
                }
            }
            Transform::Rot90Ccw => {
                // new(r, c) = old(c, w - 1 - r)
                let mut cells = Vec::with_capacity(w * h);
                for r in 0..w {
                    for c in 0..h {
                        cells.push(self.get(c, w - 1 - r));
                    }
                }
                Level {
                    width: h,
                    height: w,
                    cells,
                }
            }
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl std::str::FromStr for Level {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Level::parse(s, false)
    }
}

/// Structural validity of raw text, without requiring it to parse.
///
/// Unlike [`Level::validate`], this reports non-rectangular rows and stray
/// characters instead of failing.
pub fn validate_text(text: &str) -> ValidityReport {
    let rows: Vec<&str> = text.trim_end_matches(['\n', '\r']).split('\n').collect();
    let lens: Vec<usize> = rows.iter().map(|r| r.chars().count()).collect();
    let rectangular = !text.is_empty() && lens[0] > 0 && lens.iter().all(|&l| l == lens[0]);
    let mut chars_valid = !text.is_empty();
    let (mut player, mut boxes, mut goals) = (0, 0, 0);
    for ch in rows.iter().flat_map(|r| r.chars()) {
        match Tile::from_char(ch) {
            Some(t) => {
                player += t.has_player() as usize;
                boxes += t.has_box() as usize;
                goals += t.has_goal() as usize;
            }
            None => chars_valid = false,
        }
    }
    ValidityReport::from_counts(rectangular, chars_valid, player, boxes, goals)
}

/// Renders a fraction truncated (not rounded) to three decimals, with trailing
/// zeros trimmed but at least one decimal digit kept: `0.25`, `0.269`, `0.0`.
pub fn render_fraction(numerator: usize, denominator: usize) -> String {
    let millis = (numerator as u128 * 1000 / denominator as u128) as u64;
    let int_part = millis / 1000;
    let mut frac = format!("{:03}", millis % 1000);
    while frac.len() > 1 && frac.ends_with('0') {
        frac.pop();
    }
    format!("{int_part}.{frac}")
}
