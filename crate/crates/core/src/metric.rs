//! Finite metric spaces and weighted graphs.
//!
//! A [`FiniteMetric`] is a dense row-major `n × n` matrix. Construction only
//! checks shape and finiteness; [`validate_metric`] checks the axioms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Relative tolerance for the triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// A map from source indices to indices of a target [`FiniteMetric`].
pub type EmbeddingMap = Vec<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    d: Vec<f64>,
}

impl FiniteMetric {
    /// Wraps a row-major matrix. Entries must be finite.
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(invalid(format!("expected {} entries, got {}", n * n, d.len())));
        }
        if let Some(pos) = d.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite entry at ({}, {})", pos / n, pos % n)));
        }
        Ok(FiniteMetric { n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("matrix is not square"));
        }
        Self::new(n, rows.concat())
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        FiniteMetric { n, d }
    }

    /// Every off-diagonal distance equal to `value`.
    pub fn uniform(n: usize, value: f64) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    /// Points of the real line with the absolute-difference metric.
    pub fn line(coords: &[f64]) -> Self {
        Self::from_fn(coords.len(), |i, j| (coords[i] - coords[j]).abs())
    }

    /// Points of `ℓ_2^k` with the Euclidean metric.
    pub fn euclidean(points: &[Vec<f64>]) -> Self {
        Self::from_fn(points.len(), |i, j| euclid(&points[i], &points[j]))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.d
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive entry, if any.
    pub fn min_positive(&self) -> Option<f64> {
        self.d
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Entrywise `s · d`.
    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Entrywise `f(d)` on off-diagonal entries; the diagonal stays zero.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let n = self.n;
        let mut d: Vec<f64> = self.d.iter().map(|&v| f(v)).collect();
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        FiniteMetric { n, d }
    }

    /// The metric restricted to `points` (in that order, repeats allowed).
    pub fn restrict(&self, points: &[usize]) -> Self {
        let k = points.len();
        let mut d = vec![0.0; k * k];
        for (a, &i) in points.iter().enumerate() {
            for (b, &j) in points.iter().enumerate() {
                d[a * k + b] = self.get(i, j);
            }
        }
        FiniteMetric { n: k, d }
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A failed metric axiom with its witnessing indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    Diagonal { i: usize },
    Negative { i: usize, j: usize },
    Symmetry { i: usize, j: usize },
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Triangle { i: usize, j: usize, k: usize },
}

/// At most this many violations are collected.
pub const MAX_REPORTED_VIOLATIONS: usize = 100;

/// Checks zero diagonal, nonnegativity, symmetry and the triangle inequality.
///
/// Returns witnesses of the violated axioms (capped at
/// [`MAX_REPORTED_VIOLATIONS`]); empty means the matrix is a metric.
pub fn validate_metric(m: &FiniteMetric) -> Vec<Violation> {
    let n = m.len();
    let mut out = Vec::new();
    for i in 0..n {
        if m.get(i, i) != 0.0 {
            out.push(Violation::Diagonal { i });
        }
        for j in 0..n {
            if m.get(i, j) < 0.0 {
                out.push(Violation::Negative { i, j });
            }
            if j > i && m.get(i, j) != m.get(j, i) {
                out.push(Violation::Symmetry { i, j });
            }
        }
    }
    if out.len() >= MAX_REPORTED_VIOLATIONS {
        out.truncate(MAX_REPORTED_VIOLATIONS);
        return out;
    }
    let budget = MAX_REPORTED_VIOLATIONS - out.len();
    let triangles: Vec<Violation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local = Vec::new();
            let ri = m.row(i);
            for j in 0..n {
                let dij = ri[j];
                let rj = m.row(j);
                for k in 0..n {
                    let lhs = ri[k];
                    let rhs = dij + rj[k];
                    if lhs > rhs && lhs - rhs > TRIANGLE_TOL * lhs.max(rhs).max(f64::MIN_POSITIVE) {
                        local.push(Violation::Triangle { i, j, k });
                        if local.len() >= budget {
                            return local;
                        }
                    }
                }
            }
            local
        })
        .collect();
    out.extend(triangles.into_iter().take(budget));
    out
}

/// A graph with nonnegative edge weights; self-loops are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(invalid(format!("edge ({u}, {v}) has invalid weight {w}")));
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(u, v)| (u, v, 1.0)).collect())
    }

    /// The complete graph whose edge weights are the entries of `m`.
    pub fn complete(m: &FiniteMetric) -> Self {
        let n = m.len();
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, m.get(i, j)));
            }
        }
        WeightedGraph { n, edges }
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            if u != v {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        adj
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path distances (Dijkstra); unreachable is `∞`.
pub fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(HeapItem(0.0, src));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapItem(nd, v));
            }
        }
    }
    dist
}

/// All-pairs shortest path metric, optionally capped: entries are
/// `min{d_G, cap}`, and pairs in different components get `cap`.
pub fn shortest_path_metric(g: &WeightedGraph, cap: Option<f64>) -> Result<FiniteMetric> {
    let n = g.n;
    let adj = g.adjacency();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s)).collect();
    let mut d = Vec::with_capacity(n * n);
    for row in rows {
        for v in row {
            match cap {
                Some(c) => d.push(v.min(c)),
                None if v.is_infinite() => return Err(Error::Disconnected),
                None => d.push(v),
            }
        }
    }
    // Sums accumulated from opposite ends can differ in the last bit.
    for i in 0..n {
        for j in i + 1..n {
            let v = d[i * n + j].min(d[j * n + i]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    FiniteMetric::new(n, d)
}

/// `(1/|P|²) Σ_{a,b ∈ P} d(a, b)` over ordered pairs of the multiset `points`,
/// diagonal included.
pub fn average_distance(m: &FiniteMetric, points: &[usize]) -> f64 {
    let k = points.len();
    if k == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for &a in points {
        let row = m.row(a);
        total += points.iter().map(|&b| row[b]).sum::<f64>();
    }
    total / (k * k) as f64
}

/// Average over all points of `m`.
pub fn average_all(m: &FiniteMetric) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    m.as_slice().iter().sum::<f64>() / (n * n) as f64
}

/// The result of a distortion computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distortion {
    /// `max ratio · max inverse ratio`, always at least 1.
    pub distortion: f64,
    /// A scale `s` with `d_src ≤ s · d_dst ≤ D · d_src`.
    pub scale: f64,
    /// `max d_dst / d_src`.
    pub expansion: f64,
    /// `min d_dst / d_src`.
    pub contraction: f64,
}

/// Distortion of the pairing `i ↦ i` between two distance functions on `n`
/// points. Pairs at source distance 0 must also be at target distance 0.
pub fn distortion_by(
    n: usize,
    src: impl Fn(usize, usize) -> f64,
    dst: impl Fn(usize, usize) -> f64,
) -> Result<Distortion> {
    let mut expansion: f64 = 0.0;
    let mut contraction = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let a = src(i, j);
            let b = dst(i, j);
            if a == 0.0 {
                if b == 0.0 {
                    continue;
                }
                return Err(Error::InfiniteDistortion(i, j));
            }
            if b == 0.0 {
                return Err(Error::InfiniteDistortion(i, j));
            }
            let r = b / a;
            expansion = expansion.max(r);
            contraction = contraction.min(r);
        }
    }
    if !contraction.is_finite() {
        return Err(invalid("distortion needs two points at positive distance"));
    }
    Ok(Distortion {
        distortion: (expansion / contraction).max(1.0),
        scale: 1.0 / contraction,
        expansion,
        contraction,
    })
}

/// Distortion of `f: src → dst`.
pub fn distortion(src: &FiniteMetric, dst: &FiniteMetric, f: &[usize]) -> Result<Distortion> {
    if f.len() != src.len() {
        return Err(invalid("embedding map is not total on the source"));
    }
    if let Some(&bad) = f.iter().find(|&&t| t >= dst.len()) {
        return Err(invalid(format!("embedding target {bad} out of range")));
    }
    distortion_by(src.len(), |i, j| src.get(i, j), |i, j| dst.get(f[i], f[j]))
}

/// Distortion of a map into Euclidean space given by coordinates.
pub fn coordinate_distortion(src: &FiniteMetric, coords: &[Vec<f64>]) -> Result<Distortion> {
    if coords.len() != src.len() {
        return Err(invalid("embedding map is not total on the source"));
    }
    distortion_by(src.len(), |i, j| src.get(i, j), |i, j| euclid(&coords[i], &coords[j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_cap() {
        let g = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let m = shortest_path_metric(&g, None).unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        let iso = WeightedGraph::new(2, vec![]).unwrap();
        assert!(matches!(shortest_path_metric(&iso, None), Err(Error::Disconnected)));
        assert_eq!(shortest_path_metric(&iso, Some(5.0)).unwrap().get(0, 1), 5.0);
    }

    #[test]
    fn validation_finds_witnesses() {
        let ok = FiniteMetric::uniform(4, 1.0);
        assert!(validate_metric(&ok).is_empty());
        let bad = FiniteMetric::from_rows(&[
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 1.0],
            vec![10.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(validate_metric(&bad).contains(&Violation::Triangle { i: 0, j: 1, k: 2 }));
        let asym = FiniteMetric::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(validate_metric(&asym).contains(&Violation::Symmetry { i: 0, j: 1 }));
    }

    #[test]
    fn averages() {
        let m = FiniteMetric::uniform(2, 1.0);
        assert_eq!(average_distance(&m, &[0, 1]), 0.5);
        assert_eq!(average_distance(&m, &[1, 1, 1]), 0.0);
        let u = FiniteMetric::uniform(7, 1.0);
        assert!((average_all(&u) - 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn distortion_basics() {
        let src = FiniteMetric::line(&[0.0, 1.0, 2.0]);
        let doubled = src.scaled(2.0);
        let d = distortion(&src, &doubled, &[0, 1, 2]).unwrap();
        assert!((d.distortion - 1.0).abs() < 1e-15);
        let collapsed = FiniteMetric::line(&[0.0, 0.0, 1.0]);
        assert!(matches!(
            distortion(&src, &collapsed, &[0, 1, 2]),
            Err(Error::InfiniteDistortion(0, 1))
        ));
    }
}
