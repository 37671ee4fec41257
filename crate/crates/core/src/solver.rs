//! Budgeted A* playability solver.
//!
//! Search runs over `(player, boxes)` states with unit cost per player move.
//! The heuristic is the sum over boxes of the Manhattan distance to the nearest
//! goal, which is consistent, so the first goal state popped is move-optimal.
//! Equal `f` values are popped in insertion order.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::level::{Level, Tile};

pub const DEFAULT_BUDGET: u64 = 150_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    /// Successor order used by the search.
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Direction::Up => 'u',
            Direction::Down => 'd',
            Direction::Left => 'l',
            Direction::Right => 'r',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Solved,
    ExhaustedBudget,
    ProvedUnsolvable,
    Invalid,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Solved => "solved",
            SolveStatus::ExhaustedBudget => "exhausted-budget",
            SolveStatus::ProvedUnsolvable => "proved-unsolvable",
            SolveStatus::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Maximum number of node expansions.
    pub budget: u64,
    /// Prune pushes that put a box into a non-goal corner.
    pub deadlock_pruning: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: DEFAULT_BUDGET,
            deadlock_pruning: true,
        }
    }
}

impl SolverConfig {
    pub fn with_budget(budget: u64) -> Self {
        SolverConfig {
            budget: budget.max(1),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub moves: Option<Vec<Direction>>,
    pub solution_len: Option<usize>,
    pub pushes: Option<usize>,
    pub nodes_expanded: u64,
    /// Why validation failed, for `Invalid` results.
    pub invalid_reason: Option<String>,
}

impl SolveResult {
    fn unsolved(status: SolveStatus, nodes_expanded: u64) -> Self {
        SolveResult {
            status,
            moves: None,
            solution_len: None,
            pushes: None,
            nodes_expanded,
            invalid_reason: None,
        }
    }

    pub fn is_solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }
}

/// Player position and box positions, `(row, col)`, boxes sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SearchState {
    pub player: (usize, usize),
    pub boxes: Vec<(usize, usize)>,
}

impl SearchState {
    /// Starting state of a level. Returns `None` when the level has no player
    /// or more than one.
    pub fn initial(level: &Level) -> Option<SearchState> {
        let mut player = None;
        let mut boxes = Vec::new();
        for r in 0..level.height() {
            for c in 0..level.width() {
                let t = level.get(r, c);
                if t.has_player() {
                    if player.is_some() {
                        return None;
                    }
                    player = Some((r, c));
                }
                if t.has_box() {
                    boxes.push((r, c));
                }
            }
        }
        Some(SearchState {
            player: player?,
            boxes,
        })
    }
}

/// Static part of a level: walls, goals and per-cell precomputations.
struct Board {
    width: usize,
    height: usize,
    wall: Vec<bool>,
    goal: Vec<bool>,
    /// Manhattan distance to the nearest goal.
    goal_dist: Vec<u32>,
    /// Non-goal cell with a wall both vertically and horizontally adjacent.
    corner: Vec<bool>,
}

impl Board {
    fn new(level: &Level) -> Board {
        let (width, height) = (level.width(), level.height());
        let wall: Vec<bool> = level.cells().iter().map(|t| t.is_wall()).collect();
        let goal: Vec<bool> = level.cells().iter().map(|t| t.has_goal()).collect();
        let goals: Vec<(usize, usize)> = (0..width * height)
            .filter(|&i| goal[i])
            .map(|i| (i / width, i % width))
            .collect();
        let goal_dist = (0..width * height)
            .map(|i| {
                let (r, c) = (i / width, i % width);
                goals
                    .iter()
                    .map(|&(gr, gc)| (r.abs_diff(gr) + c.abs_diff(gc)) as u32)
                    .min()
                    .unwrap_or(0)
            })
            .collect();
        let mut board = Board {
            width,
            height,
            wall,
            goal,
            goal_dist,
            corner: Vec::new(),
        };
        board.corner = (0..width * height)
            .map(|i| {
                if board.wall[i] || board.goal[i] {
                    return false;
                }
                let blocked = |d: Direction| board.step(i, d).is_none_or(|j| board.wall[j]);
                let vertical = blocked(Direction::Up) || blocked(Direction::Down);
                let horizontal = blocked(Direction::Left) || blocked(Direction::Right);
                vertical && horizontal
            })
            .collect();
        board
    }

    fn step(&self, cell: usize, dir: Direction) -> Option<usize> {
        let (dr, dc) = dir.delta();
        let r = (cell / self.width).checked_add_signed(dr)?;
        let c = (cell % self.width).checked_add_signed(dc)?;
        (r < self.height && c < self.width).then_some(r * self.width + c)
    }

    fn index(&self, (r, c): (usize, usize)) -> usize {
        r * self.width + c
    }

    fn heuristic(&self, boxes: &[u16]) -> u32 {
        boxes.iter().map(|&b| self.goal_dist[b as usize]).sum()
    }

    fn is_dead(&self, boxes: &[u16]) -> bool {
        boxes.iter().any(|&b| self.corner[b as usize])
    }

    fn is_goal(&self, boxes: &[u16]) -> bool {
        boxes.iter().all(|&b| self.goal[b as usize])
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Packed {
    player: u16,
    boxes: Box<[u16]>,
}

struct Node {
    parent: u32,
    dir: Direction,
    pushed: bool,
    g: u32,
    h: u32,
    closed: bool,
}

const NO_PARENT: u32 = u32::MAX;

/// Sum over boxes of the Manhattan distance to the nearest goal.
pub fn heuristic(state: &SearchState, level: &Level) -> u32 {
    let board = Board::new(level);
    state
        .boxes
        .iter()
        .map(|&b| board.goal_dist[board.index(b)])
        .sum()
}

/// True when some box sits in a non-goal corner. Never true for a state from
/// which the level can still be solved.
pub fn is_dead(state: &SearchState, level: &Level) -> bool {
    let board = Board::new(level);
    state.boxes.iter().any(|&b| board.corner[board.index(b)])
}

pub fn solve(level: &Level, config: &SolverConfig) -> SolveResult {
    let report = level.validate();
    if !report.verdict {
        let reason = if report.player_count != 1 {
            format!("expected one player, found {}", report.player_count)
        } else if report.box_count == 0 {
            "level has no boxes".to_string()
        } else {
            format!("{} boxes but {} goals", report.box_count, report.goal_count)
        };
        let mut result = SolveResult::unsolved(SolveStatus::Invalid, 0);
        result.invalid_reason = Some(reason);
        return result;
    }
    if level.cells().len() > u16::MAX as usize {
        let mut result = SolveResult::unsolved(SolveStatus::Invalid, 0);
        result.invalid_reason = Some("level too large".to_string());
        return result;
    }

    let board = Board::new(level);
    let init = SearchState::initial(level).expect("validated level has one player");
    let start = Packed {
        player: board.index(init.player) as u16,
        boxes: init.boxes.iter().map(|&b| board.index(b) as u16).collect(),
    };
    if config.deadlock_pruning && board.is_dead(&start.boxes) {
        return SolveResult::unsolved(SolveStatus::ProvedUnsolvable, 0);
    }

    let mut nodes: Vec<Node> = Vec::new();
    let mut states: Vec<Packed> = Vec::new();
    let mut index: HashMap<Packed, u32> = HashMap::new();
    // (f, insertion sequence, node, g at insertion)
    let mut open: BinaryHeap<Reverse<(u32, u64, u32, u32)>> = BinaryHeap::new();
    let mut seq: u64 = 0;

    let h0 = board.heuristic(&start.boxes);
    nodes.push(Node {
        parent: NO_PARENT,
        dir: Direction::Up,
        pushed: false,
        g: 0,
        h: h0,
        closed: false,
    });
    states.push(start.clone());
    index.insert(start, 0);
    open.push(Reverse((h0, seq, 0, 0)));
    seq += 1;

    let mut expanded: u64 = 0;
    let mut scratch: Vec<u16> = Vec::new();
    loop {
        let current = loop {
            match open.pop() {
                None => break None,
                Some(Reverse((_, _, id, g))) => {
                    let node = &nodes[id as usize];
                    if node.closed || node.g != g {
                        continue;
                    }
                    break Some(id);
                }
            }
        };
        let Some(id) = current else {
            return SolveResult::unsolved(SolveStatus::ProvedUnsolvable, expanded);
        };
        if expanded >= config.budget {
            return SolveResult::unsolved(SolveStatus::ExhaustedBudget, expanded);
        }
        expanded += 1;
        nodes[id as usize].closed = true;

        let state = states[id as usize].clone();
        if board.is_goal(&state.boxes) {
            return reconstruct(&nodes, id, expanded);
        }
        let g = nodes[id as usize].g;

        for dir in Direction::ALL {
            let Some(next) = board.step(state.player as usize, dir) else {
                continue;
            };
            if board.wall[next] {
                continue;
            }
            let next16 = next as u16;
            let mut pushed = false;
            scratch.clear();
            scratch.extend_from_slice(&state.boxes);
            if let Ok(pos) = state.boxes.binary_search(&next16) {
                let Some(beyond) = board.step(next, dir) else {
                    continue;
                };
                let beyond16 = beyond as u16;
                if board.wall[beyond] || state.boxes.binary_search(&beyond16).is_ok() {
                    continue;
                }
                if config.deadlock_pruning && board.corner[beyond] {
                    continue;
                }
                scratch[pos] = beyond16;
                scratch.sort_unstable();
                pushed = true;
            }
            let succ = Packed {
                player: next16,
                boxes: scratch.as_slice().into(),
            };
            let g_new = g + 1;
            match index.entry(succ) {
                Entry::Vacant(slot) => {
                    let h = board.heuristic(&slot.key().boxes);
                    let nid = nodes.len() as u32;
                    nodes.push(Node {
                        parent: id,
                        dir,
                        pushed,
                        g: g_new,
                        h,
                        closed: false,
                    });
                    states.push(slot.key().clone());
                    slot.insert(nid);
                    open.push(Reverse((g_new + h, seq, nid, g_new)));
                    seq += 1;
                }
                Entry::Occupied(slot) => {
                    let nid = *slot.get();
                    let node = &mut nodes[nid as usize];
                    if !node.closed && g_new < node.g {
                        node.g = g_new;
                        node.parent = id;
                        node.dir = dir;
                        node.pushed = pushed;
                        open.push(Reverse((g_new + node.h, seq, nid, g_new)));
                        seq += 1;
                    }
                }
            }
        }
    }
}

fn reconstruct(nodes: &[Node], goal: u32, expanded: u64) -> SolveResult {
    let mut moves = Vec::new();
    let mut pushes = 0;
    let mut id = goal;
    while nodes[id as usize].parent != NO_PARENT {
        let node = &nodes[id as usize];
        moves.push(node.dir);
        pushes += node.pushed as usize;
        id = node.parent;
    }
    moves.reverse();
    SolveResult {
        status: SolveStatus::Solved,
        solution_len: Some(moves.len()),
        pushes: Some(pushes),
        moves: Some(moves),
        nodes_expanded: expanded,
        invalid_reason: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("level has no single player")]
    NoPlayer,
    #[error("move {index} ({dir:?}) is blocked")]
    Blocked { index: usize, dir: Direction },
}

/// Plays `moves` from the level's initial position and returns the final
/// position as a level.
pub fn apply_moves(level: &Level, moves: &[Direction]) -> Result<Level, ReplayError> {
    let board = Board::new(level);
    let init = SearchState::initial(level).ok_or(ReplayError::NoPlayer)?;
    let mut player = board.index(init.player);
    let mut boxes: Vec<usize> = init.boxes.iter().map(|&b| board.index(b)).collect();
    for (index, &dir) in moves.iter().enumerate() {
        let blocked = ReplayError::Blocked { index, dir };
        let next = board.step(player, dir).ok_or(blocked.clone())?;
        if board.wall[next] {
            return Err(blocked);
        }
        if let Some(k) = boxes.iter().position(|&b| b == next) {
            let beyond = board.step(next, dir).ok_or(blocked.clone())?;
            if board.wall[beyond] || boxes.contains(&beyond) {
                return Err(blocked);
            }
            boxes[k] = beyond;
        }
        player = next;
    }
    let cells = (0..level.cells().len())
        .map(|i| {
            let has_box = boxes.contains(&i);
            match (board.wall[i], board.goal[i], has_box, i == player) {
                (true, ..) => Tile::Wall,
                (false, true, true, _) => Tile::BoxOnGoal,
                (false, false, true, _) => Tile::Box,
                (false, true, false, true) => Tile::PlayerOnGoal,
                (false, false, false, true) => Tile::Player,
                (false, true, false, false) => Tile::Goal,
                (false, false, false, false) => Tile::Floor,
            }
        })
        .collect();
    Ok(Level::from_cells(level.width(), level.height(), cells).expect("same shape"))
}

/// True when every box of the level is on a goal.
pub fn is_solved_position(level: &Level) -> bool {
    !level.cells().contains(&Tile::Box)
}
