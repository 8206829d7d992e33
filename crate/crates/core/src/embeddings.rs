//! Constructive embeddings: finite metrics into 3-regular graphs, 3-regular
//! into `d`-regular graphs, and outer extensions of Euclidean embeddings of a
//! graph to its one-dimensional complex.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graphs::{RegularGraph, VERTEX_CAP};
use crate::metric::{distortion_by, euclid, shortest_path_metric, Distortion, EmbeddingMap, FiniteMetric, WeightedGraph};

/// Largest number of vertices `metric_to_3regular` may build.
pub const EMBED_VERTEX_CAP: usize = VERTEX_CAP;

#[derive(Debug, Clone)]
pub struct ThreeRegularEmbedding {
    pub graph: RegularGraph,
    /// Vertex of the graph assigned to each input point.
    pub map: EmbeddingMap,
    pub distortion: Distortion,
    /// True when the input had fewer than three points and was padded.
    pub padded: bool,
    /// Integer edge lengths after closure and scaling.
    pub scaled_weights: FiniteMetric,
}

/// Embeds a finite metric into the shortest-path metric of a simple
/// unweighted 3-regular graph with distortion at most `1 + ε`.
///
/// Distances are integerized to `⌈3d/(εδ)⌉` (δ the smallest distance),
/// closed under shortest paths, multiplied by `⌈3n/ε⌉`, and every edge of the
/// complete graph is subdivided into unit edges. Points of degree above 3
/// become cycles over their incident paths in lexicographic order, and a
/// tagged copy is attached to every degree-2 vertex.
pub fn metric_to_3regular(m: &FiniteMetric, eps: f64) -> Result<ThreeRegularEmbedding> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    let original = m.len();
    if original < 2 {
        return Err(invalid("need at least two points"));
    }
    let delta = m.min_positive().ok_or_else(|| invalid("all distances are zero"))?;
    for i in 0..original {
        for j in i + 1..original {
            if m.get(i, j) == 0.0 {
                return Err(invalid(format!("points {i} and {j} coincide")));
            }
        }
    }
    let padded = original < 3;
    let x = if padded { FiniteMetric::uniform(3, m.get(0, 1)) } else { m.clone() };
    let n = x.len();

    let mut w: Vec<u64> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if i == j { 0 } else { (3.0 * x.get(i, j) / (eps * delta)).ceil() as u64 }
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = w[i * n + k] + w[k * n + j];
                if via < w[i * n + j] {
                    w[i * n + j] = via;
                }
            }
        }
    }
    let scale = (3.0 * n as f64 / eps).ceil() as u64;
    w.iter_mut().for_each(|v| *v *= scale);

    let mut interior: u64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            interior += w[i * n + j] - 1;
        }
    }
    let deg = n - 1;
    let cycle_len = if deg > 3 { deg } else { 1 };
    let core = n as u64 * cycle_len as u64 + interior;
    let total = 2 * core;
    if total > EMBED_VERTEX_CAP as u64 {
        return Err(Error::TooLarge(format!(
            "3-regular embedding needs {total} vertices (cap {EMBED_VERTEX_CAP})"
        )));
    }
    let core = core as usize;

    // Point i owns vertices i·L..(i+1)·L; its incident edge to the t-th other
    // point (lexicographic) leaves from vertex i·L + t when L > 1.
    let attach = |i: usize, j: usize| -> usize {
        if cycle_len == 1 {
            i
        } else {
            let t = if j < i { j } else { j - 1 };
            i * cycle_len + t
        }
    };
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(core * 3);
    if cycle_len > 1 {
        for i in 0..n {
            for t in 0..cycle_len {
                edges.push((i * cycle_len + t, i * cycle_len + (t + 1) % cycle_len));
            }
        }
    }
    let mut next = n * cycle_len;
    for i in 0..n {
        for j in i + 1..n {
            let len = w[i * n + j] as usize;
            let mut prev = attach(i, j);
            for _ in 1..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, attach(j, i)));
        }
    }
    debug_assert_eq!(next, core);
    let mut degree = vec![0usize; core];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let base_edges = edges.len();
    for i in 0..base_edges {
        let (a, b) = edges[i];
        edges.push((a + core, b + core));
    }
    for (v, &d) in degree.iter().enumerate() {
        if d == 2 {
            edges.push((v, v + core));
        } else if d != 3 {
            return Err(Error::Internal(format!("vertex {v} has degree {d} before tagging")));
        }
    }
    let graph = RegularGraph::from_edges(2 * core, 3, &edges)?;
    let map: EmbeddingMap = (0..original).map(|i| attach(i, if i == 0 { 1 } else { 0 })).collect();
    let bfs: Vec<Vec<usize>> = map.par_iter().map(|&v| graph.bfs(v)).collect();
    let distortion = distortion_by(original, |i, j| m.get(i, j), |i, j| bfs[i][map[j]] as f64)?;
    let scaled_weights = FiniteMetric::new(n, w.iter().map(|&v| v as f64).collect())?;
    Ok(ThreeRegularEmbedding { graph, map, distortion, padded, scaled_weights })
}

/// `d − 2` copies of a simple 3-regular graph, with the copies of each
/// vertex joined into a clique; copy `i` of `u` is `i·n + u`.
pub fn extend_to_dregular(g: &RegularGraph, d: usize) -> Result<RegularGraph> {
    if g.degree() != 3 || !g.is_simple() {
        return Err(invalid("input must be a simple 3-regular graph"));
    }
    if d < 4 {
        return Err(invalid(format!("target degree must be at least 4, got {d}")));
    }
    let n = g.n();
    let copies = d - 2;
    let base = g.edges();
    let mut edges = Vec::with_capacity(n * d / 2);
    for c in 0..copies {
        edges.extend(base.iter().map(|&(u, v)| (c * n + u, c * n + v)));
    }
    for u in 0..n {
        for a in 0..copies {
            for b in a + 1..copies {
                edges.push((a * n + u, b * n + u));
            }
        }
    }
    RegularGraph::from_edges(n * copies, d, &edges)
}

/// A point of the complex: vertex, or the `j`-th of `r` subdivision points
/// along an edge (measured from its first endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ComplexPoint {
    Vertex(usize),
    Interior { edge: usize, j: usize },
}

#[derive(Debug, Clone)]
pub struct SubdividedComplex {
    pub base: WeightedGraph,
    pub resolution: usize,
    pub points: Vec<ComplexPoint>,
    pub metric: FiniteMetric,
}

/// Splits every edge of weight `w` into `r` segments of length `w/r`; the
/// metric is the shortest-path metric of the subdivision.
pub fn subdivide(g: &WeightedGraph, r: usize) -> Result<SubdividedComplex> {
    if r == 0 {
        return Err(invalid("resolution must be at least 1"));
    }
    let mut points: Vec<ComplexPoint> = (0..g.n).map(ComplexPoint::Vertex).collect();
    let mut edges = Vec::new();
    for (e, &(u, v, w)) in g.edges.iter().enumerate() {
        if u == v {
            continue;
        }
        let seg = w / r as f64;
        let mut prev = u;
        for j in 1..r {
            let id = points.len();
            points.push(ComplexPoint::Interior { edge: e, j });
            edges.push((prev, id, seg));
            prev = id;
        }
        edges.push((prev, v, seg));
    }
    let sub = WeightedGraph::new(points.len(), edges)?;
    let metric = shortest_path_metric(&sub, None)?;
    Ok(SubdividedComplex { base: g.clone(), resolution: r, points, metric })
}

/// A point of `Σ(W)`: position `t ∈ [0, w(e)]` along edge `e`, measured from
/// its first endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaPoint {
    pub edge: usize,
    pub t: f64,
}

/// Image of a point: the interpolated base coordinates plus one tent
/// coordinate on the point's own edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedPoint {
    pub base: Vec<f64>,
    pub edge: usize,
    pub tent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OuterExtension {
    pub points: Vec<ExtendedPoint>,
    /// Largest `‖Φx − Φy‖ / d_Σ(x, y)` over sampled pairs.
    pub expansion: f64,
    /// Smallest `‖Φx − Φy‖ / d_Σ(x, y)` over sampled pairs.
    pub contraction: f64,
    pub distortion: f64,
    /// `√(L² + α²(L+1)²)`.
    pub expansion_bound: f64,
    /// `α / √(2 + α²)`.
    pub contraction_bound: f64,
    /// Set when `α = 0`, where contraction is unbounded.
    pub degenerate: bool,
}

/// `√(√2·L/(L+1))`, which gives distortion at most `(1+√2)L + √2`.
pub fn default_alpha(l: f64) -> f64 {
    (std::f64::consts::SQRT_2 * l / (l + 1.0)).sqrt()
}

/// `√(L² + α²(L+1)²)` and `α/√(2+α²)`.
pub fn extension_bounds(l: f64, alpha: f64) -> (f64, f64) {
    ((l * l + alpha * alpha * (l + 1.0).powi(2)).sqrt(), alpha / (2.0 + alpha * alpha).sqrt())
}

/// Extends `φ: W → ℝ^D` (with `d_G ≤ ‖φx − φy‖ ≤ L·d_G` on `W`) to the edges
/// of `G` inside `W`: linear interpolation along each edge, plus a tent
/// coordinate `α(L+1)·min{t, w − t}` private to that edge.
pub fn outer_extension(
    g: &WeightedGraph,
    w_set: &[usize],
    phi: &[Vec<f64>],
    l: f64,
    alpha: f64,
    samples: &[SigmaPoint],
) -> Result<OuterExtension> {
    if w_set.len() != phi.len() {
        return Err(invalid("φ must give one vector per vertex of W"));
    }
    if !(l >= 1.0) || !(alpha >= 0.0) {
        return Err(invalid("need L ≥ 1 and α ≥ 0"));
    }
    let dg = shortest_path_metric(g, None)?;
    let mut slot = vec![usize::MAX; g.n];
    for (i, &u) in w_set.iter().enumerate() {
        if u >= g.n {
            return Err(invalid(format!("vertex {u} out of range")));
        }
        slot[u] = i;
    }
    for i in 0..w_set.len() {
        for j in i + 1..w_set.len() {
            let d = dg.get(w_set[i], w_set[j]);
            let e = euclid(&phi[i], &phi[j]);
            if e < d * (1.0 - 1e-9) || e > l * d * (1.0 + 1e-9) {
                return Err(invalid(format!(
                    "φ violates d_G ≤ ‖φx − φy‖ ≤ L·d_G at ({}, {}): {e} vs {d}",
                    w_set[i], w_set[j]
                )));
            }
        }
    }
    let weight = alpha * (l + 1.0);
    let mut points = Vec::with_capacity(samples.len());
    for s in samples {
        let &(u, v, w) = g.edges.get(s.edge).ok_or_else(|| invalid("edge index out of range"))?;
        if slot[u] == usize::MAX || slot[v] == usize::MAX {
            return Err(invalid(format!("edge {} is not inside W", s.edge)));
        }
        if !(0.0..=w).contains(&s.t) || w <= 0.0 {
            return Err(invalid(format!("position {} outside edge of length {w}", s.t)));
        }
        let (pu, pv) = (&phi[slot[u]], &phi[slot[v]]);
        let base = pu.iter().zip(pv).map(|(a, b)| ((w - s.t) * a + s.t * b) / w).collect();
        points.push(ExtendedPoint { base, edge: s.edge, tent: weight * s.t.min(w - s.t) });
    }
    let sigma = |a: &SigmaPoint, b: &SigmaPoint| -> f64 {
        let (u, v, wa) = g.edges[a.edge];
        let (r, s, wb) = g.edges[b.edge];
        let ends_a = [(u, a.t), (v, wa - a.t)];
        let ends_b = [(r, b.t), (s, wb - b.t)];
        let mut best = f64::INFINITY;
        if a.edge == b.edge {
            best = (a.t - b.t).abs();
        }
        for &(p, da) in &ends_a {
            for &(q, db) in &ends_b {
                best = best.min(da + dg.get(p, q) + db);
            }
        }
        best
    };
    let image = |i: usize, j: usize| -> f64 {
        let (a, b) = (&points[i], &points[j]);
        let base: f64 = if a.edge == b.edge {
            // Exact along one edge, where nearby samples would cancel.
            let (u, v, w) = g.edges[a.edge];
            let shift = (samples[i].t - samples[j].t) / w;
            let (pu, pv) = (&phi[slot[u]], &phi[slot[v]]);
            pu.iter().zip(pv).map(|(x, y)| ((y - x) * shift).powi(2)).sum()
        } else {
            a.base.iter().zip(&b.base).map(|(x, y)| (x - y) * (x - y)).sum()
        };
        let tent = if a.edge == b.edge { (a.tent - b.tent).powi(2) } else { a.tent * a.tent + b.tent * b.tent };
        (base + tent).sqrt()
    };
    let (expansion, contraction) = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let mut hi: f64 = 0.0;
            let mut lo = f64::INFINITY;
            for j in i + 1..samples.len() {
                let d = sigma(&samples[i], &samples[j]);
                if d <= 1e-12 {
                    continue;
                }
                let ratio = image(i, j) / d;
                hi = hi.max(ratio);
                lo = lo.min(ratio);
            }
            (hi, lo)
        })
        .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));
    let (expansion_bound, contraction_bound) = extension_bounds(l, alpha);
    Ok(OuterExtension {
        points,
        expansion,
        contraction,
        distortion: expansion / contraction,
        expansion_bound,
        contraction_bound,
        degenerate: alpha == 0.0,
    })
}
