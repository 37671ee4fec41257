//! Evaluation toolkit for generated Sokoban levels.
//!
//! - [`level`]: grid type, ASCII grammar, validity and symmetries
//! - [`solver`]: budgeted A* playability and solution length
//! - [`corpus`]: Microban/Boxoban ingestion, slicing, augmentation, annotation
//! - [`metrics`]: novelty, playability, diversity, accuracy and scores
//! - [`generator`]: n-gram baseline generator and external generator adapter
//! - [`cli`]: pipeline commands behind the `sokoeval` binary

pub mod cli;
pub mod corpus;
pub mod generator;
pub mod level;
pub mod metrics;
pub mod solver;

pub use level::{Level, ParseError, Tile, Transform, ValidityReport};
pub use solver::{solve, Direction, SearchState, SolveResult, SolveStatus, SolverConfig};
