//! Maximum clique by branch and bound over Bron–Kerbosch with pivoting.
//!
//! Every call of the recursion counts as one iteration. When the iteration
//! cap is reached the search stops and the best clique found so far is
//! returned, which is a lower bound on the maximum.

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Bits {
        let mut b = Bits::empty(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }
}

/// Undirected simple graph on `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Bits>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph {
            adj: (0..n).map(|_| Bits::empty(n)).collect(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Graph {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    /// Induced subgraph on `nodes`, relabelled `0..nodes.len()`.
    pub fn subgraph(&self, nodes: &[usize]) -> Graph {
        let mut g = Graph::new(nodes.len());
        for (i, &u) in nodes.iter().enumerate() {
            for (j, &v) in nodes.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueResult {
    /// Members of the best clique found, ascending.
    pub members: Vec<usize>,
    pub iterations: u64,
    /// True when the search stopped at the cap before proving optimality.
    pub capped: bool,
}

impl CliqueResult {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

struct Search<'a> {
    graph: &'a Graph,
    cap: u64,
    iterations: u64,
    capped: bool,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl Search<'_> {
    fn expand(&mut self, mut p: Bits, mut x: Bits) {
        // `current` is always a clique
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if self.iterations >= self.cap {
            self.capped = true;
            return;
        }
        self.iterations += 1;

        if p.is_empty() || self.current.len() + p.count() <= self.best.len() {
            return;
        }

        // pivot maximizing |P ∩ N(u)| over P ∪ X, lowest index on ties
        let mut pivot = usize::MAX;
        let mut pivot_deg = 0;
        for u in p.iter().chain(x.iter()) {
            let d = p.and_count(&self.graph.adj[u]);
            if pivot == usize::MAX || d > pivot_deg || (d == pivot_deg && u < pivot) {
                pivot = u;
                pivot_deg = d;
            }
        }
        let candidates: Vec<usize> = p
            .iter()
            .filter(|&v| !self.graph.adj[pivot].contains(v))
            .collect();

        for v in candidates {
            if self.capped {
                return;
            }
            if self.current.len() + p.count() <= self.best.len() {
                return;
            }
            let nv = &self.graph.adj[v];
            self.current.push(v);
            self.expand(p.and(nv), x.and(nv));
            self.current.pop();
            p.remove(v);
            x.insert(v);
        }
    }
}

/// Largest clique found within `cap` iterations.
pub fn max_clique(graph: &Graph, cap: u64) -> CliqueResult {
    let n = graph.len();
    if n == 0 {
        return CliqueResult {
            members: Vec::new(),
            iterations: 0,
            capped: false,
        };
    }
    let mut search = Search {
        graph,
        cap: cap.max(1),
        iterations: 0,
        capped: false,
        best: Vec::new(),
        current: Vec::new(),
    };
    search.expand(Bits::full(n), Bits::empty(n));
    let mut members = search.best;
    if members.is_empty() {
        // a single vertex is always a clique
        members.push(0);
    }
    members.sort_unstable();
    CliqueResult {
        members,
        iterations: search.iterations,
        capped: search.capped,
    }
}
