mod common;

use proptest::prelude::*;

use common::{bfs_moves, microban_fixture, random_level, REF_LEFT, REF_RIGHT};
use sokoeval::solver::{apply_moves, heuristic, is_dead, is_solved_position};
use sokoeval::{solve, Level, SearchState, SolveStatus, SolverConfig, Transform};

fn level(seed: u64, w: usize, h: usize, boxes: usize) -> Level {
    Level::parse(&random_level(seed, w, h, boxes), false).unwrap()
}

fn arb_level() -> impl Strategy<Value = Level> {
    (any::<u64>(), 4usize..8, 4usize..8, 1usize..3).prop_map(|(s, w, h, b)| level(s, w, h, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_bfs(level in arb_level()) {
        let oracle = bfs_moves(&level);
        let r = solve(&level, &SolverConfig::default());
        match r.status {
            SolveStatus::Solved => prop_assert_eq!(r.solution_len, oracle),
            SolveStatus::ProvedUnsolvable => prop_assert_eq!(oracle, None),
            other => prop_assert!(false, "unexpected {other:?}"),
        }
    }

    #[test]
    fn pruning_does_not_change_lengths(level in arb_level()) {
        let on = solve(&level, &SolverConfig::default());
        let off = solve(&level, &SolverConfig { deadlock_pruning: false, ..SolverConfig::default() });
        prop_assert_eq!(on.solution_len, off.solution_len);
        prop_assert!(on.nodes_expanded <= off.nodes_expanded);
    }

    #[test]
    fn heuristic_is_admissible(level in arb_level()) {
        if let Some(opt) = bfs_moves(&level) {
            let state = SearchState::initial(&level).unwrap();
            prop_assert!(heuristic(&state, &level) as usize <= opt);
        }
    }

    #[test]
    fn solutions_replay_and_never_pass_a_dead_state(level in arb_level()) {
        let r = solve(&level, &SolverConfig::default());
        if let Some(moves) = &r.moves {
            for i in 0..=moves.len() {
                let mid = apply_moves(&level, &moves[..i]).unwrap();
                prop_assert!(!is_dead(&SearchState::initial(&mid).unwrap(), &mid));
            }
            prop_assert!(is_solved_position(&apply_moves(&level, moves).unwrap()));
            prop_assert_eq!(Some(moves.len()), r.solution_len);
        }
    }

    #[test]
    fn deterministic(level in arb_level()) {
        let config = SolverConfig::default();
        prop_assert_eq!(solve(&level, &config), solve(&level, &config));
    }

    #[test]
    fn larger_budget_keeps_the_answer(level in arb_level(), extra in 1u64..1000) {
        let r = solve(&level, &SolverConfig::default());
        if r.is_solved() {
            let tight = solve(&level, &SolverConfig::with_budget(r.nodes_expanded));
            let loose = solve(&level, &SolverConfig::with_budget(r.nodes_expanded + extra));
            prop_assert_eq!(tight.solution_len, r.solution_len);
            prop_assert_eq!(loose.solution_len, r.solution_len);
        }
    }

    #[test]
    fn transforms_preserve_answers(level in arb_level()) {
        let config = SolverConfig::default();
        let base = solve(&level, &config);
        for op in Transform::ALL {
            let r = solve(&level.transform(op), &config);
            prop_assert_eq!(r.status, base.status);
            prop_assert_eq!(r.solution_len, base.solution_len);
        }
    }
}

#[test]
fn reference_lengths() {
    let config = SolverConfig::default();
    let left = solve(&Level::parse(REF_LEFT, false).unwrap(), &config);
    let right = solve(&Level::parse(REF_RIGHT, false).unwrap(), &config);
    assert_eq!(left.solution_len, Some(65));
    assert_eq!(right.solution_len, Some(42));
}

#[test]
fn starved_budget_is_exhausted_not_unsolvable() {
    let fig = Level::parse(REF_LEFT, false).unwrap();
    for budget in [1, 10, 100] {
        assert_eq!(
            solve(&fig, &SolverConfig::with_budget(budget)).status,
            SolveStatus::ExhaustedBudget
        );
    }
}

#[test]
fn microban_fixture_matches_bfs() {
    let config = SolverConfig::default();
    for level in microban_fixture().levels.iter().skip(2) {
        assert_eq!(solve(level, &config).solution_len, bfs_moves(level));
    }
}
