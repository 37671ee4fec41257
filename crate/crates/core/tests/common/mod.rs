//! Independent oracles and fixtures shared by the integration suites.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};
use std::path::PathBuf;

use sokoeval::corpus::{self, Corpus};
use sokoeval::Level;

pub const REF_LEFT: &str = "########\n##----##\n##.-..##\n###$-@-#\n#-$--$-#\n#---####\n########";
pub const REF_RIGHT: &str =
    "#########\n#---#####\n#---#---#\n##-$*@--#\n##-*.--##\n##--#####\n#########";

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
}

pub fn boxoban_fixture() -> Corpus {
    corpus::load_boxoban(data_dir().join("boxoban")).expect("boxoban fixture loads")
}

pub fn microban_fixture() -> Corpus {
    corpus::load_microban(data_dir().join("microban.txt")).expect("microban fixture loads")
}

/// Breadth-first search over (player, box set) states. Returns the minimum
/// number of moves, or `None` when no position with every box on a goal is
/// reachable.
pub fn bfs_moves(level: &Level) -> Option<usize> {
    let (w, h) = (level.width(), level.height());
    let mut player = None;
    let mut boxes = Vec::new();
    let mut goals = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let t = level.get(r, c);
            let i = r * w + c;
            if t.has_player() {
                player = Some(i);
            }
            if t.has_box() {
                boxes.push(i);
            }
            if t.has_goal() {
                goals.push(i);
            }
        }
    }
    let player = player?;
    goals.sort_unstable();
    let open = |i: usize| !level.cells()[i].is_wall();
    let step = |i: usize, d: usize| -> Option<usize> {
        let (r, c) = (i / w, i % w);
        match d {
            0 if r > 0 => Some(i - w),
            1 if r + 1 < h => Some(i + w),
            2 if c > 0 => Some(i - 1),
            3 if c + 1 < w => Some(i + 1),
            _ => None,
        }
    };

    let start = (player, boxes);
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((p, bs), dist)) = queue.pop_front() {
        if bs == goals {
            return Some(dist);
        }
        for d in 0..4 {
            let Some(n) = step(p, d).filter(|&n| open(n)) else {
                continue;
            };
            let mut nb = bs.clone();
            if let Some(k) = bs.iter().position(|&b| b == n) {
                let Some(beyond) = step(n, d).filter(|&b| open(b) && !bs.contains(&b)) else {
                    continue;
                };
                nb[k] = beyond;
                nb.sort_unstable();
            }
            let next = (n, nb);
            if seen.insert(next.clone()) {
                queue.push_back((next, dist + 1));
            }
        }
    }
    None
}

fn connected(mask: u32, rows: usize, cols: usize) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        let (r, c) = (i / cols, i % cols);
        let mut nbrs = Vec::new();
        if r > 0 {
            nbrs.push(i - cols);
        }
        if r + 1 < rows {
            nbrs.push(i + cols);
        }
        if c > 0 {
            nbrs.push(i - 1);
        }
        if c + 1 < cols {
            nbrs.push(i + 1);
        }
        for n in nbrs {
            if mask & (1 << n) != 0 && seen & (1 << n) == 0 {
                seen |= 1 << n;
                stack.push(n);
            }
        }
    }
    seen == mask
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn render(
    rows: usize,
    cols: usize,
    floor: &[usize],
    player: usize,
    boxes: &[usize],
    goals: &[usize],
) -> String {
    let (w, h) = (cols + 2, rows + 2);
    let mut grid = vec![vec!['#'; w]; h];
    let at = |i: usize| (i / cols + 1, i % cols + 1);
    for &i in floor {
        let (r, c) = at(i);
        grid[r][c] = '-';
    }
    for &i in goals {
        let (r, c) = at(i);
        grid[r][c] = '.';
    }
    for &i in boxes {
        let (r, c) = at(i);
        grid[r][c] = if grid[r][c] == '.' { '*' } else { '$' };
    }
    let (r, c) = at(player);
    grid[r][c] = if grid[r][c] == '.' { '+' } else { '@' };
    grid.iter()
        .map(|row| row.iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}

fn placements(rows: usize, cols: usize, floor: &[usize], max_boxes: usize, out: &mut Vec<String>) {
    for b in 1..=max_boxes.min(floor.len().saturating_sub(1)) {
        let sets = subsets(floor, b);
        for boxes in &sets {
            for goals in &sets {
                for &p in floor.iter().filter(|p| !boxes.contains(p)) {
                    out.push(render(rows, cols, floor, p, boxes, goals));
                }
            }
        }
    }
}

/// The exhaustive solver fixture: every connected floor mask of every
/// interior up to 3x3 (levels up to 5x5) and the open 4x4 interior (a 6x6
/// level), each with every placement of the player and one or two boxes and
/// goals.
pub fn exhaustive_family() -> Vec<String> {
    let mut out = Vec::new();
    for rows in 1..=3 {
        for cols in 1..=3 {
            let n = rows * cols;
            for mask in 1u32..(1 << n) {
                if !connected(mask, rows, cols) {
                    continue;
                }
                let floor: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                placements(rows, cols, &floor, 2, &mut out);
            }
        }
    }
    let open: Vec<usize> = (0..16).collect();
    placements(4, 4, &open, 2, &mut out);
    out
}

/// Textbook recursive Levenshtein; exponential, for short strings only.
pub fn naive_levenshtein(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = naive_levenshtein(ra, rb) + usize::from(x != y);
            sub.min(naive_levenshtein(ra, b) + 1)
                .min(naive_levenshtein(a, rb) + 1)
        }
    }
}

/// Largest clique by enumerating every vertex subset.
pub fn brute_force_clique(n: usize, adjacent: &dyn Fn(usize, usize) -> bool) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let clique = members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| adjacent(a, b)));
        if clique {
            best = size;
        }
    }
    best
}

/// Plain dynamic-programming Levenshtein, used where the recursive oracle
/// would be too slow.
pub fn dp_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    table[0] = (0..=b.len()).collect();
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = (table[i - 1][j] + 1)
                .min(table[i][j - 1] + 1)
                .min(table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]));
        }
    }
    table[a.len()][b.len()]
}

/// A walled level with random inner walls, `boxes` boxes and as many goals.
/// Goals are drawn independently of boxes and the player, so they may
/// overlap. Not necessarily solvable.
pub fn random_level(seed: u64, width: usize, height: usize, boxes: usize) -> String {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut grid = vec![vec!['#'; width]; height];
    let mut inner: Vec<(usize, usize)> = (1..height - 1)
        .flat_map(|r| (1..width - 1).map(move |c| (r, c)))
        .filter(|_| rng.random_bool(0.8))
        .collect();
    if inner.len() < boxes + 1 {
        inner = (1..height - 1)
            .flat_map(|r| (1..width - 1).map(move |c| (r, c)))
            .collect();
    }
    for &(r, c) in &inner {
        grid[r][c] = '-';
    }
    let occupants = rand::seq::index::sample(&mut rng, inner.len(), boxes + 1).into_vec();
    let goals = rand::seq::index::sample(&mut rng, inner.len(), boxes).into_vec();
    for &i in &goals {
        let (r, c) = inner[i];
        grid[r][c] = '.';
    }
    for (n, &i) in occupants.iter().enumerate() {
        let (r, c) = inner[i];
        let goal = grid[r][c] == '.';
        grid[r][c] = match (n < boxes, goal) {
            (true, false) => '$',
            (true, true) => '*',
            (false, false) => '@',
            (false, true) => '+',
        };
    }
    grid.iter()
        .map(|row| row.iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}
