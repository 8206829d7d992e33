//! Regular multigraphs stored as rotation maps, with generators and
//! combinatorial diagnostics.
//!
//! `rot(v, i) = (w, j)` means port `i` of `v` leads to port `j` of `w`; `rot` is
//! an involution. A fixed point `rot(v, i) = (v, i)` is a self-loop occupying a
//! single port and contributes 1 to the diagonal of the adjacency matrix.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::metric::WeightedGraph;

mod poincare;
mod spectrum;

pub use poincare::{
    extrapolation_checks, line_grid, poincare_estimate, poincare_ratio, ExtrapolationItem,
    ExtrapolationReport, PoincareBudget, PoincareEstimate, PoincareKind, PoincareMode, Target,
    Witness,
};
pub use spectrum::{fiedler_vector, normalized_eigenvalues, normalized_spectrum, Spectrum};

/// Largest vertex count any generator or operation will produce.
pub const VERTEX_CAP: usize = 10_000_000;

/// Attempts of the configuration model before giving up.
pub const REJECTION_ATTEMPTS: usize = 1000;

/// Default size limit for exact conductance by subset enumeration.
pub const EXACT_CONDUCTANCE_THRESHOLD: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    rot: Vec<(u32, u32)>,
}

impl RegularGraph {
    /// Wraps a rotation table indexed by `v·d + i`, checking the involution.
    pub fn new(n: usize, d: usize, rot: Vec<(usize, usize)>) -> Result<Self> {
        if n > VERTEX_CAP {
            return Err(Error::TooLarge(format!("{n} vertices exceeds the cap of {VERTEX_CAP}")));
        }
        if rot.len() != n * d {
            return Err(invalid(format!("rotation table has {} entries, expected {}", rot.len(), n * d)));
        }
        if d > u32::MAX as usize || n > u32::MAX as usize {
            return Err(Error::TooLarge("index does not fit in 32 bits".into()));
        }
        for (k, &(w, j)) in rot.iter().enumerate() {
            if w >= n || j >= d {
                return Err(invalid(format!("port ({}, {}) maps out of range", k / d, k % d)));
            }
            if rot[w * d + j] != (k / d, k % d) {
                return Err(invalid(format!("rotation map is not an involution at ({}, {})", k / d, k % d)));
            }
        }
        Ok(RegularGraph { n, d, rot: rot.into_iter().map(|(w, j)| (w as u32, j as u32)).collect() })
    }

    /// Builds a graph from an undirected edge list; `(v, v)` is a one-port
    /// self-loop. Ports are numbered in edge order.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut next = vec![0usize; n];
        let mut rot = vec![(usize::MAX, usize::MAX); n * d];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range")));
            }
            let pu = next[u];
            if pu >= d {
                return Err(invalid(format!("vertex {u} has more than {d} ports")));
            }
            next[u] += 1;
            if u == v {
                rot[u * d + pu] = (u, pu);
                continue;
            }
            let pv = next[v];
            if pv >= d {
                return Err(invalid(format!("vertex {v} has more than {d} ports")));
            }
            next[v] += 1;
            rot[u * d + pu] = (v, pv);
            rot[v * d + pv] = (u, pu);
        }
        if let Some(v) = next.iter().position(|&c| c != d) {
            return Err(invalid(format!("vertex {v} has degree {} instead of {d}", next[v])));
        }
        Self::new(n, d, rot)
    }

    /// Builds a graph from per-vertex neighbor multiplicities. Row `u` lists
    /// `(v, count)`; the matrix must be symmetric and `(u, u)` entries become
    /// one-port self-loops.
    pub fn from_multiplicities(n: usize, d: usize, rows: &[Vec<(usize, u64)>]) -> Result<Self> {
        let mut edges = Vec::new();
        for (u, row) in rows.iter().enumerate() {
            for &(v, c) in row {
                if v >= u {
                    for _ in 0..c {
                        edges.push((u, v));
                    }
                }
            }
        }
        Self::from_edges(n, d, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn rot(&self, v: usize, i: usize) -> (usize, usize) {
        let (w, j) = self.rot[v * self.d + i];
        (w as usize, j as usize)
    }

    #[inline]
    pub fn neighbor(&self, v: usize, i: usize) -> usize {
        self.rot[v * self.d + i].0 as usize
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.rot[v * self.d..(v + 1) * self.d].iter().map(|&(w, _)| w as usize)
    }

    /// Each undirected edge once, self-loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n * self.d / 2);
        for v in 0..self.n {
            for i in 0..self.d {
                let (w, j) = self.rot(v, i);
                if (v, i) <= (w, j) {
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn to_weighted(&self) -> WeightedGraph {
        WeightedGraph {
            n: self.n,
            edges: self.edges().into_iter().map(|(u, v)| (u, v, 1.0)).collect(),
        }
    }

    /// Dense unnormalized adjacency (row-major); a one-port loop adds 1 and a
    /// two-port loop adds 2 to the diagonal.
    pub fn adjacency_counts(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for v in 0..n {
            for w in self.neighbors(v) {
                a[v * n + w] += 1.0;
            }
        }
        a
    }

    /// `y = (A/d)·x`.
    pub fn apply_normalized(&self, x: &[f64], y: &mut [f64]) {
        let inv = 1.0 / self.d as f64;
        for (v, out) in y.iter_mut().enumerate() {
            *out = self.neighbors(v).map(|w| x[w]).sum::<f64>() * inv;
        }
    }

    /// Checks the involution again (used after every structural operation).
    pub fn is_involution(&self) -> bool {
        (0..self.n * self.d).all(|k| {
            let (w, j) = self.rot[k];
            let back = self.rot[w as usize * self.d + j as usize];
            back == ((k / self.d) as u32, (k % self.d) as u32)
        })
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n).any(|v| self.neighbors(v).any(|w| w == v))
    }

    /// No self-loops and no parallel edges.
    pub fn is_simple(&self) -> bool {
        (0..self.n).all(|v| {
            let mut seen = HashSet::new();
            self.neighbors(v).all(|w| w != v && seen.insert(w))
        })
    }

    pub fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// A proper 2-coloring if one exists. Any self-loop rules it out.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let c = color[v].unwrap();
                for w in self.neighbors(v) {
                    match color[w] {
                        None => {
                            color[w] = Some(!c);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == c => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.unwrap()).collect())
    }

    /// The cycle `C_n` (2-regular); `n ≥ 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(invalid("a simple cycle needs at least 3 vertices"));
        }
        let edges: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Self::from_edges(n, 2, &edges)
    }

    /// The complete graph `K_n` ((n−1)-regular).
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, n.saturating_sub(1), &edges)
    }

    /// `K_n` with one self-loop per vertex (n-regular), whose normalized
    /// adjacency is `J/n`.
    pub fn complete_with_loops(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            edges.push((u, u));
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, n, &edges)
    }
}

/// A uniformly paired simple `d`-regular graph from the configuration model,
/// deterministic in `seed`.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<RegularGraph> {
    if (n * d) % 2 != 0 {
        return Err(invalid(format!("n·d = {} is odd", n * d)));
    }
    if d >= n {
        return Err(invalid(format!("degree {d} must be below n = {n}")));
    }
    if n > VERTEX_CAP {
        return Err(Error::TooLarge(format!("{n} vertices exceeds the cap")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    'attempt: for _ in 0..REJECTION_ATTEMPTS {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let edges: Vec<(usize, usize)> = stubs.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        return RegularGraph::from_edges(n, d, &edges);
    }
    Err(Error::Invalid(format!(
        "no simple {d}-regular graph on {n} vertices after {REJECTION_ATTEMPTS} attempts"
    )))
}

/// Shortest simple cycle length of a multigraph given as an edge list; a
/// self-loop has length 1 and a parallel pair length 2. `None` for forests.
pub fn girth_of_edges(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let mut best = usize::MAX;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut seen_pairs = HashSet::new();
    for (id, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            return Some(1);
        }
        if !seen_pairs.insert((u.min(v), u.max(v))) {
            best = 2;
        }
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    if best == 2 {
        return Some(2);
    }
    let mut dist = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        parent_edge[s] = usize::MAX;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            if 2 * dist[v] + 1 >= best {
                break;
            }
            for &(w, id) in &adj[v] {
                if id == parent_edge[v] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent_edge[w] = id;
                    queue.push_back(w);
                } else {
                    best = best.min(dist[v] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

pub fn girth(g: &RegularGraph) -> Option<usize> {
    girth_of_edges(g.n(), &g.edges())
}

/// Largest BFS distance.
pub fn diameter(g: &RegularGraph) -> Result<usize> {
    let mut best = 0;
    for s in 0..g.n() {
        let dist = g.bfs(s);
        let far = *dist.iter().max().unwrap_or(&0);
        if far == usize::MAX {
            return Err(Error::Disconnected);
        }
        best = best.max(far);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conductance {
    /// `min_S n·|E(S, S̄)| / (d·|S|·|S̄|)`, or an upper bound on it.
    pub value: f64,
    /// True when every cut was enumerated.
    pub exact: bool,
    /// Membership vector of the best cut found.
    pub set: Vec<bool>,
}

fn cut_ratio(g: &RegularGraph, set: &[bool]) -> f64 {
    let n = g.n();
    let s = set.iter().filter(|&&b| b).count();
    let mut cut = 0usize;
    for v in 0..n {
        if set[v] {
            cut += g.neighbors(v).filter(|&w| !set[w]).count();
        }
    }
    (n * cut) as f64 / (g.degree() * s * (n - s)) as f64
}

/// Conductance by Gray-code enumeration of all cuts when `n ≤ exact_threshold`,
/// otherwise the best spectral sweep cut (an upper bound).
pub fn conductance(g: &RegularGraph, exact_threshold: usize) -> Result<Conductance> {
    let n = g.n();
    if n < 2 {
        return Err(invalid("conductance needs at least two vertices"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if n <= exact_threshold.min(40) {
        return Ok(exact_conductance(g));
    }
    let vec = fiedler_vector(g)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vec[a].total_cmp(&vec[b]));
    let mut set = vec![false; n];
    let mut best = f64::INFINITY;
    let mut best_len = 1;
    let mut cut: i64 = 0;
    for (k, &v) in order.iter().take(n - 1).enumerate() {
        for w in g.neighbors(v) {
            if w != v {
                cut += if set[w] { -1 } else { 1 };
            }
        }
        set[v] = true;
        let s = k + 1;
        let r = (n as f64 * cut as f64) / (g.degree() * s * (n - s)) as f64;
        if r < best {
            best = r;
            best_len = s;
        }
    }
    let mut set = vec![false; n];
    for &v in order.iter().take(best_len) {
        set[v] = true;
    }
    Ok(Conductance { value: cut_ratio(g, &set), exact: false, set })
}

fn exact_conductance(g: &RegularGraph) -> Conductance {
    let n = g.n();
    let d = g.degree();
    let mut set = vec![false; n];
    let mut size = 0usize;
    let mut cut: i64 = 0;
    let mut best = f64::INFINITY;
    let mut best_code: u64 = 0;
    let mut code: u64 = 0;
    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        for w in g.neighbors(v) {
            if w != v {
                cut += if set[w] == set[v] { 1 } else { -1 };
            }
        }
        set[v] = !set[v];
        code ^= 1 << v;
        if set[v] {
            size += 1;
        } else {
            size -= 1;
        }
        let r = (n as f64 * cut as f64) / (d * size * (n - size)) as f64;
        if r < best {
            best = r;
            best_code = code;
        }
    }
    let set: Vec<bool> = (0..n).map(|v| best_code >> v & 1 == 1).collect();
    Conductance { value: best, exact: true, set }
}
