//! Writes the synthetic level fixtures used by the test suites.
//!
//! Levels are built by reverse play: boxes start on their goals and the
//! player walks and pulls them away, so every emitted level is solvable.
//! Only levels the solver finishes within the default budget are kept.
//!
//! ```text
//! cargo run --release --example synth_fixtures -- crates/core/tests/data
//! ```

use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sokoeval::{solve, Level, SolverConfig};

const REF_LEFT: &str = "########\n##----##\n##.-..##\n###$-@-#\n#-$--$-#\n#---####\n########";
const REF_RIGHT: &str =
    "#########\n#---#####\n#---#---#\n##-$*@--#\n##-*.--##\n##--#####\n#########";

const DIRS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

struct Spec {
    width: usize,
    height: usize,
    floor: usize,
    boxes: usize,
    min_len: usize,
}

fn carve(rng: &mut ChaCha8Rng, spec: &Spec) -> Vec<Vec<char>> {
    let mut grid = vec![vec!['#'; spec.width]; spec.height];
    let (mut r, mut c) = (
        rng.random_range(1..spec.height - 1),
        rng.random_range(1..spec.width - 1),
    );
    grid[r][c] = '-';
    let mut open = 1;
    while open < spec.floor {
        let (dr, dc) = DIRS[rng.random_range(0..4)];
        let (nr, nc) = ((r as isize + dr) as usize, (c as isize + dc) as usize);
        if nr == 0 || nc == 0 || nr + 1 >= spec.height || nc + 1 >= spec.width {
            continue;
        }
        if grid[nr][nc] == '#' {
            grid[nr][nc] = '-';
            open += 1;
        }
        (r, c) = (nr, nc);
    }
    grid
}

fn reverse_play(rng: &mut ChaCha8Rng, spec: &Spec) -> Option<String> {
    let grid = carve(rng, spec);
    let floor: Vec<(usize, usize)> = (0..spec.height)
        .flat_map(|r| (0..spec.width).map(move |c| (r, c)))
        .filter(|&(r, c)| grid[r][c] == '-')
        .collect();
    if floor.len() < spec.boxes + 2 {
        return None;
    }
    let picks = rand::seq::index::sample(rng, floor.len(), spec.boxes + 1).into_vec();
    let goals: Vec<(usize, usize)> = picks[..spec.boxes].iter().map(|&i| floor[i]).collect();
    let mut boxes = goals.clone();
    let mut player = floor[picks[spec.boxes]];

    for _ in 0..rng.random_range(100..400) {
        let (dr, dc) = DIRS[rng.random_range(0..4)];
        let step = |(r, c): (usize, usize), k: isize| {
            (
                (r as isize + dr * k) as usize,
                (c as isize + dc * k) as usize,
            )
        };
        let next = step(player, 1);
        if grid[next.0][next.1] == '#' || boxes.contains(&next) {
            continue;
        }
        let behind = step(player, -1);
        if let Some(b) = boxes.iter_mut().find(|b| **b == behind) {
            if rng.random_bool(0.7) {
                *b = player;
            }
        }
        player = next;
    }
    if boxes.iter().filter(|b| !goals.contains(b)).count() < spec.boxes.div_ceil(2) {
        return None;
    }

    let mut out = grid;
    for &(r, c) in &goals {
        out[r][c] = '.';
    }
    for &(r, c) in &boxes {
        out[r][c] = if out[r][c] == '.' { '*' } else { '$' };
    }
    let (r, c) = player;
    out[r][c] = if out[r][c] == '.' { '+' } else { '@' };
    Some(
        out.iter()
            .map(|row| row.iter().collect::<String>())
            .collect::<Vec<_>>()
            .join("\n"),
    )
}

fn generate(
    rng: &mut ChaCha8Rng,
    spec: &Spec,
    count: usize,
    seen: &mut Vec<String>,
) -> Vec<String> {
    let config = SolverConfig::default();
    let mut out = Vec::new();
    while out.len() < count {
        let Some(text) = reverse_play(rng, spec) else {
            continue;
        };
        if seen.contains(&text) {
            continue;
        }
        let level = Level::parse(&text, false).expect("synthesized level parses");
        let result = solve(&level, &config);
        if result.solution_len.is_some_and(|n| n >= spec.min_len) {
            seen.push(text.clone());
            out.push(text);
        }
    }
    out
}

/// Floor tiles as spaces, the way the public files are written.
fn spaced(text: &str) -> String {
    text.replace('-', " ")
}

fn main() {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "tests/data".into()),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(20_220_601);
    let mut seen = Vec::new();

    let boxoban = generate(
        &mut rng,
        &Spec {
            width: 10,
            height: 10,
            floor: 36,
            boxes: 4,
            min_len: 20,
        },
        100,
        &mut seen,
    );
    let mut text = String::new();
    for (i, level) in boxoban.iter().enumerate() {
        text.push_str(&format!("; {i}\n{}\n\n", spaced(level)));
    }
    fs::create_dir_all(dir.join("boxoban")).unwrap();
    fs::write(dir.join("boxoban").join("000.txt"), text).unwrap();

    let mut micro = vec![REF_LEFT.to_string(), REF_RIGHT.to_string()];
    for (i, (w, h, boxes)) in [(6, 6, 1), (7, 6, 2), (8, 7, 2), (7, 8, 3), (9, 8, 3)]
        .into_iter()
        .enumerate()
    {
        micro.extend(generate(
            &mut rng,
            &Spec {
                width: w,
                height: h,
                floor: (w - 2) * (h - 2) * 3 / 5,
                boxes,
                min_len: 6 + 2 * i,
            },
            6,
            &mut seen,
        ));
    }
    let mut text = String::new();
    for (i, level) in micro.iter().enumerate() {
        text.push_str(&format!("; {}\n\n{}\n\n", i + 1, spaced(level)));
    }
    fs::write(dir.join("microban.txt"), text).unwrap();
    println!(
        "wrote {} boxoban and {} microban-style levels",
        boxoban.len(),
        micro.len()
    );
}
