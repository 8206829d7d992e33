//! Degree-controlled graph operations and the basic zigzag iteration
//! `G_{j+1} = C_{n₀}(A_{m₀}(G_j ⓩ H))` starting from the complete graph with
//! self-loops.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graphs::{normalized_spectrum, RegularGraph, VERTEX_CAP};

/// Largest degree a Cesàro average may produce.
pub const DEGREE_CAP: usize = 1 << 16;

/// Largest `n·d` (rotation-table size) an operation may produce.
pub const PORT_CAP: usize = 200_000_000;

fn check_size(n: usize, d: usize) -> Result<()> {
    if n > VERTEX_CAP {
        return Err(Error::TooLarge(format!("{n} vertices exceeds the cap of {VERTEX_CAP}")));
    }
    if n.saturating_mul(d) > PORT_CAP {
        return Err(Error::TooLarge(format!("{n}·{d} ports exceeds the cap of {PORT_CAP}")));
    }
    Ok(())
}

/// The rotation-map zigzag product: vertex `(v, a)` is `v·|V_H| + a`, label
/// `(i, j)` is `i·d_H + j`.
///
/// Steps: `(a', i') = Rot_H(a, i)`, `(w, b') = Rot_G(v, a')`,
/// `(b, j') = Rot_H(b', j)`; the result is `((w, b), (j', i'))`.
pub fn zigzag_product(g: &RegularGraph, h: &RegularGraph) -> Result<RegularGraph> {
    let d1 = g.degree();
    if d1 < 3 {
        return Err(invalid(format!("zigzag needs outer degree at least 3, got {d1}")));
    }
    if h.n() != d1 {
        return Err(invalid(format!(
            "inner graph has {} vertices but outer degree is {d1}",
            h.n()
        )));
    }
    let d2 = h.degree();
    let n = g.n() * d1;
    let deg = d2 * d2;
    check_size(n, deg)?;
    let mut rot = Vec::with_capacity(n * deg);
    for v in 0..g.n() {
        for a in 0..d1 {
            for i in 0..d2 {
                let (a1, i1) = h.rot(a, i);
                let (w, b1) = g.rot(v, a1);
                for j in 0..d2 {
                    let (b, j1) = h.rot(b1, j);
                    rot.push((w * d1 + b, j1 * d2 + i1));
                }
            }
        }
    }
    RegularGraph::new(n, deg, rot)
}

/// The Cesàro average `A_m(G)`: edge multiplicities
/// `Σ_{t<m} d^{m−1−t}·(A^t)_{uv}` (walk counts), degree `m·d^{m−1}`, and
/// normalized adjacency `(1/m)·Σ_{t<m} (A/d)^t`.
pub fn cesaro_average(g: &RegularGraph, m: usize) -> Result<RegularGraph> {
    if m == 0 {
        return Err(invalid("Cesàro average needs m ≥ 1"));
    }
    let d = g.degree() as u64;
    let degree = (m as u64)
        .checked_mul(d.checked_pow(m as u32 - 1).ok_or_else(|| Error::TooLarge("degree overflow".into()))?)
        .filter(|&v| v <= DEGREE_CAP as u64)
        .ok_or_else(|| Error::TooLarge(format!("Cesàro degree exceeds {DEGREE_CAP}")))?
        as usize;
    check_size(g.n(), degree)?;
    let mut rows = Vec::with_capacity(g.n());
    for u in 0..g.n() {
        let mut walk: BTreeMap<usize, u64> = BTreeMap::from([(u, 1)]);
        let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
        for t in 0..m {
            let weight = d.pow((m - 1 - t) as u32);
            for (&v, &c) in &walk {
                *acc.entry(v).or_insert(0) += weight * c;
            }
            if t + 1 < m {
                let mut next = BTreeMap::new();
                for (&v, &c) in &walk {
                    for w in g.neighbors(v) {
                        *next.entry(w).or_insert(0) += c;
                    }
                }
                walk = next;
            }
        }
        rows.push(acc.into_iter().collect::<Vec<_>>());
    }
    RegularGraph::from_multiplicities(g.n(), degree, &rows)
}

/// Edge completion `C_D(G)`: every port is copied `⌊D/d⌋` times and the
/// remaining `D − d·⌊D/d⌋` ports of each vertex become self-loops.
pub fn edge_completion(g: &RegularGraph, target: usize) -> Result<RegularGraph> {
    let d = g.degree();
    if target < d || d == 0 {
        return Err(invalid(format!("completion degree {target} is below the degree {d}")));
    }
    check_size(g.n(), target)?;
    let copies = target / d;
    let mut rot = Vec::with_capacity(g.n() * target);
    for v in 0..g.n() {
        for p in 0..target {
            if p < copies * d {
                let (c, i) = (p / d, p % d);
                let (w, j) = g.rot(v, i);
                rot.push((w, c * d + j));
            } else {
                rot.push((v, p));
            }
        }
    }
    RegularGraph::new(g.n(), target, rot)
}

/// Replaces every vertex by a cycle over its ports, giving a 3-regular graph.
///
/// For odd `d` the gadget is a `d`-cycle. For even `d` it is a `(d+1)`-cycle
/// whose extra vertex carries a self-loop, so the output is never bipartite.
/// Gadget vertex `k` of `v` is `v·L + k` and its port 2 carries port `k` of `v`.
pub fn three_regularize(g: &RegularGraph) -> Result<RegularGraph> {
    let d = g.degree();
    if d < 3 {
        return Err(invalid(format!("three_regularize needs degree ≥ 3, got {d}")));
    }
    let len = if d % 2 == 1 { d } else { d + 1 };
    let n = g.n() * len;
    check_size(n, 3)?;
    let mut rot = Vec::with_capacity(n * 3);
    for v in 0..g.n() {
        for k in 0..len {
            let prev = v * len + (k + len - 1) % len;
            let next = v * len + (k + 1) % len;
            rot.push((prev, 1));
            rot.push((next, 0));
            if k < d {
                let (w, j) = g.rot(v, k);
                rot.push((w * len + j, 2));
            } else {
                rot.push((v * len + k, 2));
            }
        }
    }
    RegularGraph::new(n, 3, rot)
}

/// Parameters of the zigzag iteration.
#[derive(Debug, Clone)]
pub struct IterationConfig {
    /// `d₀`-regular graph on `n₀` vertices.
    pub h: RegularGraph,
    pub m0: usize,
    pub j_max: usize,
    /// Accept `m₀·d₀^{2(m₀−1)} ≤ n₀` in place of `n₀ ≥ d₀³` and
    /// `m₀ ≤ ⌊log n₀ / (3 log d₀)⌋`.
    pub relaxed: bool,
}

impl IterationConfig {
    /// `⌊log n₀ / (3 log d₀)⌋`.
    pub fn max_m0(&self) -> usize {
        let (n0, d0) = (self.h.n() as f64, self.h.degree() as f64);
        ((n0.ln() / (3.0 * d0.ln())) + 1e-12).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let (n0, d0) = (self.h.n(), self.h.degree());
        if d0 < 2 || self.m0 == 0 {
            return Err(invalid("need d₀ ≥ 2 and m₀ ≥ 1"));
        }
        let cesaro_degree = (self.m0 as f64) * (d0 as f64).powi(2 * (self.m0 as i32 - 1));
        if cesaro_degree > n0 as f64 {
            return Err(invalid(format!(
                "Cesàro degree {cesaro_degree} exceeds n₀ = {n0}; completion impossible"
            )));
        }
        if !self.relaxed {
            if n0 < d0.pow(3) {
                return Err(invalid(format!("n₀ = {n0} is below d₀³ = {}", d0.pow(3))));
            }
            if self.m0 > self.max_m0() {
                return Err(invalid(format!("m₀ = {} exceeds {}", self.m0, self.max_m0())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageReport {
    pub j: usize,
    pub vertices: usize,
    pub degree: usize,
    pub lambda: f64,
    pub gamma2_plus: f64,
    pub connected: bool,
}

#[derive(Debug, Clone)]
pub struct Iteration {
    pub stages: Vec<RegularGraph>,
    pub reports: Vec<StageReport>,
    /// True when the size cap stopped the sequence before `j_max`.
    pub truncated: bool,
}

/// Spectral summary of one graph; disconnected graphs get `γ₂⁺ = ∞`.
pub fn stage_report(j: usize, g: &RegularGraph) -> StageReport {
    let connected = g.is_connected();
    let (lambda, gamma2_plus) = match normalized_spectrum(g) {
        Ok(s) => (s.lambda2.max(-s.lambda_n), s.gamma2_plus),
        Err(_) => (1.0, f64::INFINITY),
    };
    StageReport { j, vertices: g.n(), degree: g.degree(), lambda, gamma2_plus, connected }
}

/// Runs the iteration for `j = 1..=j_max`, stopping early (with a warning)
/// once the next stage would exceed the size caps.
pub fn zigzag_iterate(cfg: &IterationConfig) -> Result<Iteration> {
    cfg.validate()?;
    let n0 = cfg.h.n();
    let mut stages = vec![RegularGraph::complete_with_loops(n0)?];
    let mut truncated = false;
    while stages.len() < cfg.j_max {
        let cur = stages.last().expect("nonempty");
        let next_n = cur.n().saturating_mul(n0);
        if next_n > VERTEX_CAP || next_n.saturating_mul(n0) > PORT_CAP {
            log::warn!("zigzag iteration stopped at j = {}: next stage has {next_n} vertices", stages.len());
            truncated = true;
            break;
        }
        let z = zigzag_product(cur, &cfg.h)?;
        let a = cesaro_average(&z, cfg.m0)?;
        stages.push(edge_completion(&a, n0)?);
    }
    let reports = stages.iter().enumerate().map(|(i, g)| stage_report(i + 1, g)).collect();
    Ok(Iteration { stages, reports, truncated })
}
