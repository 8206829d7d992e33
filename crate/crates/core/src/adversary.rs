//! Lower-bound adversaries for average-distance estimation.
//!
//! The adaptive adversary answers every query with an integer weight in
//! `[k]` while keeping two metrics consistent with all answers: the capped
//! shortest-path metric (`upper`, mostly `k+1`) and an LP-minimal metric
//! (`lower`, mostly `1/2`). Their average distances differ by a factor close
//! to `2(k+1)` when the number of queries is `o(n^{1+1/k})`.

use std::collections::HashMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::game::{run_game, Oracle, StrategyKind, Transcript};
use crate::metric::{average_all, shortest_path_metric, FiniteMetric, WeightedGraph};

/// Largest `n` accepted by the adaptive adversary (its distance cache is `n²` bytes).
pub const MAX_POINTS: usize = 16_384;

/// Largest `k` (weights and doubled distances are stored in bytes).
pub const MAX_K: usize = 100;

/// Largest `n` for which the exact LP is attempted.
pub const EXACT_LP_LIMIT: usize = 24;

const TOL: f64 = 1e-9;

/// `θ = m / n^{(k+1)/k}`.
pub fn theta_from_budget(n: usize, m: usize, k: usize) -> f64 {
    m as f64 / (n as f64).powf((k as f64 + 1.0) / k as f64)
}

fn key(a: usize, b: usize) -> (u32, u32) {
    (a.min(b) as u32, a.max(b) as u32)
}

/// State of the adaptive adversary after some queries.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    n: usize,
    k: usize,
    theta: f64,
    /// `√θ·(n^{h/k} − 1)` for `h = 0..k`.
    thresholds: Vec<f64>,
    queried: Vec<(usize, usize)>,
    weights: HashMap<(u32, u32), u8>,
    adj: Vec<Vec<(u32, u8)>>,
    /// Shortest-path distances of the queried graph, capped at `k+1`.
    dist: Vec<u8>,
    answered: usize,
}

impl AdversaryState {
    pub fn new(n: usize, k: usize, theta: f64) -> Result<Self> {
        if n < 2 || n > MAX_POINTS {
            return Err(invalid(format!("need 2 ≤ n ≤ {MAX_POINTS}, got {n}")));
        }
        if k == 0 || k > MAX_K {
            return Err(invalid(format!("need 1 ≤ k ≤ {MAX_K}, got {k}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid(format!("θ must be positive, got {theta}")));
        }
        let cap = (k + 1) as u8;
        let mut dist = vec![cap; n * n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        let thresholds = (0..k)
            .map(|h| theta.sqrt() * ((n as f64).powf(h as f64 / k as f64) - 1.0))
            .collect();
        Ok(AdversaryState {
            n,
            k,
            theta,
            thresholds,
            queried: Vec::new(),
            weights: HashMap::new(),
            adj: vec![Vec::new(); n],
            dist,
            answered: 0,
        })
    }

    /// State with `θ` derived from a budget of `m` queries.
    pub fn for_budget(n: usize, k: usize, m: usize) -> Result<Self> {
        Self::new(n, k, theta_from_budget(n, m.max(1), k))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Distinct queried pairs in order of first appearance.
    pub fn queried(&self) -> &[(usize, usize)] {
        &self.queried
    }

    /// Number of queries answered, repeats included.
    pub fn answered(&self) -> usize {
        self.answered
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adj[x].len()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<usize> {
        self.weights.get(&key(a, b)).map(|&w| w as usize)
    }

    /// Shortest-path distance in the queried graph, capped at `k+1`.
    pub fn capped_distance(&self, a: usize, b: usize) -> usize {
        self.dist[a * self.n + b] as usize
    }

    /// Largest `h ∈ {0,…,k−1}` with `deg(x) ≥ √θ·(n^{h/k} − 1)`.
    pub fn h_value(&self, x: usize) -> usize {
        let deg = self.degree(x) as f64;
        self.thresholds.iter().rposition(|&t| deg >= t).unwrap_or(0)
    }

    /// Answers the query `{x, y}` and records it.
    pub fn answer_query(&mut self, x: usize, y: usize) -> Result<usize> {
        if x == y || x >= self.n || y >= self.n {
            return Err(invalid(format!("invalid query ({x}, {y})")));
        }
        self.answered += 1;
        if let Some(w) = self.weight(x, y) {
            return Ok(w);
        }
        let n = self.n;
        let k = self.k;
        let dxy = self.dist[x * n + y] as usize;
        let mut w = (self.h_value(x).max(self.h_value(y)) + 1).min(dxy);
        // w(u,v) − d(u,x) − d(v,y) can only exceed the first term when
        // d(u,x) + d(v,y) ≤ k − 2.
        if k >= 3 {
            let (rx, ry) = (&self.dist[x * n..(x + 1) * n], &self.dist[y * n..(y + 1) * n]);
            for u in 0..n {
                let dux = rx[u] as usize;
                if dux + 2 > k {
                    continue;
                }
                for &(v, wuv) in &self.adj[u] {
                    let dvy = ry[v as usize] as usize;
                    let wuv = wuv as usize;
                    if wuv > dux + dvy {
                        w = w.max(wuv - dux - dvy);
                    }
                }
            }
        }
        debug_assert!((1..=k).contains(&w));
        self.insert_edge(x, y, w as u8);
        Ok(w)
    }

    fn insert_edge(&mut self, x: usize, y: usize, w: u8) {
        let n = self.n;
        let cap = self.k as u8 + 1;
        self.queried.push((x, y));
        self.weights.insert(key(x, y), w);
        self.adj[x].push((y as u32, w));
        self.adj[y].push((x as u32, w));
        let rx = self.dist[x * n..(x + 1) * n].to_vec();
        let ry = self.dist[y * n..(y + 1) * n].to_vec();
        for (near, far) in [(&rx, &ry), (&ry, &rx)] {
            for a in 0..n {
                let base = near[a] + w;
                if base >= cap {
                    continue;
                }
                for b in 0..n {
                    let cand = base + far[b];
                    if cand < self.dist[a * n + b] {
                        self.dist[a * n + b] = cand;
                        self.dist[b * n + a] = cand;
                    }
                }
            }
        }
    }

    /// `d(x, y) = w(x, y)` on every queried pair.
    pub fn is_consistent(&self) -> bool {
        self.weights
            .iter()
            .all(|(&(a, b), &w)| self.dist[a as usize * self.n + b as usize] == w)
    }

    /// `min{d_G, k+1}`.
    pub fn finalize_upper(&self) -> FiniteMetric {
        FiniteMetric::new(self.n, self.dist.iter().map(|&d| d as f64).collect())
            .expect("capped distances are finite")
    }

    fn edge_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n * self.n];
        for &(a, b) in self.weights.keys() {
            mask[a as usize * self.n + b as usize] = true;
            mask[b as usize * self.n + a as usize] = true;
        }
        mask
    }

    /// Doubled lower bound `2·min{upper, max{h(x), h(y)} + 1/2}` per pair.
    fn doubled_lower_bound(&self, h: &[usize], x: usize, y: usize) -> u8 {
        let up = 2 * self.dist[x * self.n + y];
        up.min(2 * h[x].max(h[y]) as u8 + 1)
    }

    /// Lower metric by coordinate descent from the upper metric, in units of `1/2`.
    fn lower_halves(&self) -> Vec<u8> {
        let n = self.n;
        let h: Vec<usize> = (0..n).map(|x| self.h_value(x)).collect();
        let edge = self.edge_mask();
        let mut l: Vec<u8> = self.dist.iter().map(|&d| 2 * d).collect();
        loop {
            let mut changed = false;
            for x in 0..n {
                for y in x + 1..n {
                    if edge[x * n + y] {
                        continue;
                    }
                    let cur = l[x * n + y];
                    let low = self.doubled_lower_bound(&h, x, y);
                    if cur == low {
                        continue;
                    }
                    l[x * n + y] = 0;
                    l[y * n + x] = 0;
                    let t = max_abs_diff(&l[x * n..(x + 1) * n], &l[y * n..(y + 1) * n], cur);
                    let new = low.max(t);
                    l[x * n + y] = new;
                    l[y * n + x] = new;
                    changed |= new != cur;
                }
            }
            if !changed {
                return l;
            }
        }
    }

    /// LP-minimal lower metric computed by coordinate descent: every
    /// unqueried pair is lowered to the largest of its explicit lower bound
    /// and the triangle bounds `|d(x,z) − d(z,y)|`, until nothing moves.
    pub fn finalize_lower(&self) -> FiniteMetric {
        let l = self.lower_halves();
        let m = FiniteMetric::new(self.n, l.iter().map(|&v| v as f64 / 2.0).collect())
            .expect("finite");
        debug_assert!(self.lower_is_feasible(&m));
        m
    }

    /// Exact LP optimum; only for `n ≤ EXACT_LP_LIMIT`.
    pub fn exact_lower_lp(&self) -> Result<FiniteMetric> {
        let n = self.n;
        if n > EXACT_LP_LIMIT {
            return Err(Error::TooLarge(format!("exact LP limited to n ≤ {EXACT_LP_LIMIT}")));
        }
        let h: Vec<usize> = (0..n).map(|x| self.h_value(x)).collect();
        let edge = self.edge_mask();
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let mut var = vec![None; n * n];
        let mut fixed = vec![0.0; n * n];
        for x in 0..n {
            for y in x + 1..n {
                let up = self.dist[x * n + y] as f64;
                if edge[x * n + y] {
                    fixed[x * n + y] = up;
                    fixed[y * n + x] = up;
                } else {
                    let lb = self.doubled_lower_bound(&h, x, y) as f64 / 2.0;
                    let v = problem.add_var(1.0, (lb, up));
                    var[x * n + y] = Some(v);
                    var[y * n + x] = Some(v);
                }
            }
        }
        // d(a,b) − d(a,c) − d(c,b) ≤ 0 for every long side {a,b} and apex c.
        for a in 0..n {
            for b in a + 1..n {
                for c in 0..n {
                    if c == a || c == b {
                        continue;
                    }
                    let mut expr = Vec::new();
                    let mut rhs = 0.0;
                    for (idx, coeff) in [(a * n + b, 1.0), (a * n + c, -1.0), (c * n + b, -1.0)] {
                        match var[idx] {
                            Some(v) => expr.push((v, coeff)),
                            None => rhs -= coeff * fixed[idx],
                        }
                    }
                    if expr.is_empty() {
                        continue;
                    }
                    problem.add_constraint(expr.as_slice(), ComparisonOp::Le, rhs);
                }
            }
        }
        let solution = problem.solve().map_err(|e| Error::Internal(format!("lower LP: {e}")))?;
        let m = FiniteMetric::from_fn(n, |x, y| match var[x * n + y] {
            Some(v) => *solution.var_value(v),
            None => fixed[x * n + y],
        });
        Ok(m)
    }

    /// Checks every LP constraint on a candidate lower metric.
    pub fn lower_is_feasible(&self, lower: &FiniteMetric) -> bool {
        let n = self.n;
        if lower.len() != n || !crate::metric::validate_metric(lower).is_empty() {
            return false;
        }
        let h: Vec<usize> = (0..n).map(|x| self.h_value(x)).collect();
        for x in 0..n {
            for y in x + 1..n {
                let v = lower.get(x, y);
                let up = self.dist[x * n + y] as f64;
                if let Some(w) = self.weight(x, y) {
                    if (v - w as f64).abs() > TOL {
                        return false;
                    }
                }
                let lb = self.doubled_lower_bound(&h, x, y) as f64 / 2.0;
                if v < lb - TOL || v > up + TOL {
                    return false;
                }
            }
        }
        true
    }

    /// The exception set `Y` outside of which the lower metric must be `1/2`,
    /// as an `n×n` mask.
    pub fn exception_set(&self, lower: &FiniteMetric) -> Vec<bool> {
        let n = self.n;
        let h: Vec<usize> = (0..n).map(|x| self.h_value(x)).collect();
        let mut in_u = vec![false; n];
        for x in 0..n {
            if h[x] >= 1 {
                let r = (h[x] - 1) as f64;
                for y in 0..n {
                    if lower.get(x, y) <= r + TOL {
                        in_u[y] = true;
                    }
                }
            }
        }
        let mut y_set = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                y_set[a * n + b] = a == b || in_u[a] || in_u[b];
            }
        }
        for &(a, b) in &self.queried {
            y_set[a * n + b] = true;
            y_set[b * n + a] = true;
        }
        for u in 0..n {
            let top: Vec<usize> = self.adj[u]
                .iter()
                .filter(|&&(_, w)| w as usize == h[u] + 1)
                .map(|&(v, _)| v as usize)
                .collect();
            if top.is_empty() {
                continue;
            }
            for x in 0..n {
                if lower.get(u, x) <= h[u] as f64 + TOL {
                    for &v in &top {
                        y_set[x * n + v] = true;
                        y_set[v * n + x] = true;
                    }
                }
            }
        }
        y_set
    }

    /// Runs the separation analysis on the current game.
    pub fn verify_separation(&self) -> SeparationReport {
        let upper = self.finalize_upper();
        let (lower, solver) = if self.n <= EXACT_LP_LIMIT {
            match self.exact_lower_lp() {
                Ok(m) => (m, LowerSolver::ExactLp),
                Err(_) => (self.finalize_lower(), LowerSolver::CoordinateDescent),
            }
        } else {
            (self.finalize_lower(), LowerSolver::CoordinateDescent)
        };
        self.report_for(&upper, &lower, solver)
    }

    /// Separation analysis for a given pair of metrics.
    pub fn report_for(&self, upper: &FiniteMetric, lower: &FiniteMetric, solver: LowerSolver) -> SeparationReport {
        let n = self.n;
        let kp1 = (self.k + 1) as f64;
        let pairs = (n * (n - 1) / 2) as f64;
        let (mut at_top, mut at_half) = (0usize, 0usize);
        for x in 0..n {
            for y in x + 1..n {
                at_top += usize::from((upper.get(x, y) - kp1).abs() < TOL);
                at_half += usize::from((lower.get(x, y) - 0.5).abs() < TOL);
            }
        }
        let agreement = self.weights.iter().all(|(&(a, b), &w)| {
            let (a, b) = (a as usize, b as usize);
            (upper.get(a, b) - w as f64).abs() < TOL && (lower.get(a, b) - w as f64).abs() < TOL
        });
        let y_set = self.exception_set(lower);
        let mut y_size = 0usize;
        let mut y_violations = 0usize;
        for x in 0..n {
            for y in 0..n {
                if y_set[x * n + y] {
                    y_size += 1;
                } else if (lower.get(x, y) - 0.5).abs() > TOL {
                    y_violations += 1;
                }
            }
        }
        let avg_upper = average_all(upper);
        let avg_lower = average_all(lower);
        SeparationReport {
            n,
            k: self.k,
            queries: self.queried.len(),
            avg_upper,
            avg_lower,
            ratio: avg_upper / avg_lower,
            target: 2.0 * kp1,
            fraction_upper_at_k_plus_1: at_top as f64 / pairs,
            fraction_lower_at_half: at_half as f64 / pairs,
            agreement_on_e: agreement,
            y_fraction: y_size as f64 / (n * n) as f64,
            y_violations,
            solver,
        }
    }
}

impl Oracle for AdversaryState {
    fn n(&self) -> usize {
        self.n
    }

    fn query(&mut self, a: usize, b: usize) -> Result<f64> {
        self.answer_query(a, b).map(|w| w as f64)
    }
}

/// `max_z |a[z] − b[z]|`, stopping early once `stop` is reached.
fn max_abs_diff(a: &[u8], b: &[u8], stop: u8) -> u8 {
    let mut best = 0u8;
    for (ca, cb) in a.chunks(256).zip(b.chunks(256)) {
        let m = ca.iter().zip(cb).fold(0u8, |m, (&x, &y)| m.max(x.abs_diff(y)));
        best = best.max(m);
        if best >= stop {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerSolver {
    CoordinateDescent,
    ExactLp,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub n: usize,
    pub k: usize,
    /// Distinct queried pairs.
    pub queries: usize,
    pub avg_upper: f64,
    pub avg_lower: f64,
    pub ratio: f64,
    /// `2(k+1)`.
    pub target: f64,
    pub fraction_upper_at_k_plus_1: f64,
    pub fraction_lower_at_half: f64,
    #[serde(rename = "agreement_on_E")]
    pub agreement_on_e: bool,
    /// `|Y| / n²`.
    pub y_fraction: f64,
    /// Ordered pairs outside `Y` whose lower distance is not `1/2`.
    pub y_violations: usize,
    pub solver: LowerSolver,
}

/// Plays a built-in strategy for `m` rounds against the adaptive adversary
/// with `θ` taken from the budget.
pub fn play(n: usize, k: usize, m: usize, strategy: StrategyKind, seed: u64) -> Result<(AdversaryState, Transcript)> {
    let mut state = AdversaryState::for_budget(n, k, m)?;
    let mut s = strategy.build(n, seed);
    let transcript = run_game(s.as_mut(), &mut state, m)?;
    Ok((state, transcript))
}

/// `avg(upper^p) / avg(lower^p)`.
pub fn power_p_report(upper: &FiniteMetric, lower: &FiniteMetric, p: f64) -> f64 {
    average_all(&upper.map(|d| d.powf(p))) / average_all(&lower.map(|d| d.powf(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGrowthRow {
    pub r: usize,
    pub max_ball: usize,
    /// `2^{k−1}·√θ·n^{r/k}`.
    pub bound: f64,
    /// `max_ball / bound`.
    pub constant: f64,
}

/// Largest ball `B_G(u, r)` over centers outside the high-degree set
/// `H = {deg ≥ √θ(n−1)}`, for `r = 0..k−1`, against the growth bound.
pub fn ball_growth_report(state: &AdversaryState) -> Vec<BallGrowthRow> {
    let n = state.n;
    let k = state.k;
    let high = state.theta.sqrt() * (n as f64 - 1.0);
    let centers: Vec<usize> = (0..n).filter(|&u| (state.degree(u) as f64) < high).collect();
    (0..k)
        .map(|r| {
            let max_ball = centers
                .iter()
                .map(|&u| state.dist[u * n..(u + 1) * n].iter().filter(|&&d| d as usize <= r).count())
                .max()
                .unwrap_or(0);
            let bound = 2f64.powi(k as i32 - 1) * state.theta.sqrt() * (n as f64).powf(r as f64 / k as f64);
            BallGrowthRow { r, max_ball, bound, constant: max_ball as f64 / bound }
        })
        .collect()
}

fn plain_report(
    n: usize,
    k: usize,
    edges: &[(usize, usize, f64)],
    upper: &FiniteMetric,
    lower: &FiniteMetric,
) -> SeparationReport {
    let kp1 = (k + 1) as f64;
    let pairs = (n * (n - 1) / 2) as f64;
    let (mut at_top, mut at_half) = (0usize, 0usize);
    for x in 0..n {
        for y in x + 1..n {
            at_top += usize::from((upper.get(x, y) - kp1).abs() < TOL);
            at_half += usize::from((lower.get(x, y) - 0.5).abs() < TOL);
        }
    }
    let agreement = edges.iter().all(|&(a, b, w)| {
        (upper.get(a, b) - w).abs() < TOL && (lower.get(a, b) - w).abs() < TOL
    });
    let (avg_upper, avg_lower) = (average_all(upper), average_all(lower));
    SeparationReport {
        n,
        k,
        queries: edges.len(),
        avg_upper,
        avg_lower,
        ratio: avg_upper / avg_lower,
        target: 2.0 * kp1,
        fraction_upper_at_k_plus_1: at_top as f64 / pairs,
        fraction_lower_at_half: at_half as f64 / pairs,
        agreement_on_e: agreement,
        y_fraction: 0.0,
        y_violations: 0,
        solver: LowerSolver::Explicit,
    }
}

fn distinct_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &(a, b) in pairs {
        if a == b || a >= n || b >= n {
            return Err(invalid(format!("invalid query pair ({a}, {b})")));
        }
        if seen.insert((a.min(b), a.max(b))) {
            out.push((a.min(b), a.max(b)));
        }
    }
    Ok(out)
}

/// Two metrics far apart in average distance but both compatible with the
/// answers, for graphs too sparse to use the high-degree construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fallback {
    pub m_low: f64,
    pub m_high: f64,
    pub avg_low: f64,
    pub avg_high: f64,
}

#[derive(Debug, Clone)]
pub struct NonadaptiveOutcome {
    pub upper: FiniteMetric,
    pub lower: FiniteMetric,
    pub report: SeparationReport,
    /// `√θ·n^{1/k}`.
    pub eta: f64,
    pub high_degree: Vec<usize>,
    pub fallback: Option<Fallback>,
}

/// Adversary for a fixed query set: pairs inside the low-degree set get 1,
/// pairs touching `S = {deg ≥ η}` get `k+1`.
pub fn nonadaptive_adversary(n: usize, pairs: &[(usize, usize)], k: usize, theta: f64) -> Result<NonadaptiveOutcome> {
    if n < 2 || k == 0 || !(theta > 0.0) {
        return Err(invalid("need n ≥ 2, k ≥ 1, θ > 0"));
    }
    let pairs = distinct_pairs(n, pairs)?;
    let eta = theta.sqrt() * (n as f64).powf(1.0 / k as f64);
    let mut deg = vec![0usize; n];
    for &(a, b) in &pairs {
        deg[a] += 1;
        deg[b] += 1;
    }
    let in_s: Vec<bool> = deg.iter().map(|&d| d as f64 >= eta).collect();
    let kp1 = (k + 1) as f64;
    let edges: Vec<(usize, usize, f64)> = pairs
        .iter()
        .map(|&(a, b)| (a, b, if in_s[a] || in_s[b] { kp1 } else { 1.0 }))
        .collect();
    let graph = WeightedGraph::new(n, edges.clone())?;
    let high_degree: Vec<usize> = (0..n).filter(|&v| in_s[v]).collect();
    if eta < 3.0 {
        let m_low = n as f64 * kp1;
        let m_high = (n as f64 * k as f64).powi(10);
        let lower = shortest_path_metric(&graph, Some(m_low))?;
        let upper = shortest_path_metric(&graph, Some(m_high))?;
        let fallback = Fallback { m_low, m_high, avg_low: average_all(&lower), avg_high: average_all(&upper) };
        let report = plain_report(n, k, &edges, &upper, &lower);
        return Ok(NonadaptiveOutcome { upper, lower, report, eta, high_degree, fallback: Some(fallback) });
    }
    let upper = shortest_path_metric(&graph, Some(kp1))?;
    let mut is_edge = vec![false; n * n];
    for &(a, b) in &pairs {
        is_edge[a * n + b] = true;
        is_edge[b * n + a] = true;
    }
    let lower = FiniteMetric::from_fn(n, |x, y| {
        if in_s[x] || in_s[y] {
            kp1
        } else if is_edge[x * n + y] {
            1.0
        } else {
            0.5
        }
    });
    let report = plain_report(n, k, &edges, &upper, &lower);
    Ok(NonadaptiveOutcome { upper, lower, report, eta, high_degree, fallback: None })
}

/// `4(1 − ε/2)/(1 + ε)`.
pub fn small_alpha_bound(eps: f64) -> f64 {
    4.0 * (1.0 - eps / 2.0) / (1.0 + eps)
}

/// Answers 1 to every query; upper is 2 and lower is 1/2 off the queries.
/// The report's target is [`small_alpha_bound`]`(eps)`, the ratio reached
/// when exactly an `eps` fraction of the pairs is queried.
pub fn small_alpha_adversary(
    n: usize,
    pairs: &[(usize, usize)],
    eps: f64,
) -> Result<(FiniteMetric, FiniteMetric, SeparationReport)> {
    if n < 2 {
        return Err(invalid("need n ≥ 2"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("ε must lie in (0, 1], got {eps}")));
    }
    let pairs = distinct_pairs(n, pairs)?;
    let mut is_edge = vec![false; n * n];
    for &(a, b) in &pairs {
        is_edge[a * n + b] = true;
        is_edge[b * n + a] = true;
    }
    let upper = FiniteMetric::from_fn(n, |x, y| if is_edge[x * n + y] { 1.0 } else { 2.0 });
    let lower = FiniteMetric::from_fn(n, |x, y| if is_edge[x * n + y] { 1.0 } else { 0.5 });
    let edges: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    let mut report = plain_report(n, 1, &edges, &upper, &lower);
    report.target = small_alpha_bound(eps);
    Ok((upper, lower, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_and_first_answer() {
        let s = AdversaryState::new(10_000, 2, 0.01).unwrap();
        assert_eq!(s.h_value(0), 0);
        let mut s = AdversaryState::new(10, 3, 0.5).unwrap();
        assert_eq!(s.answer_query(0, 1).unwrap(), 1);
        assert_eq!(s.answer_query(1, 0).unwrap(), 1);
        assert_eq!(s.queried().len(), 1);
        assert!(s.answer_query(2, 2).is_err());
    }

    #[test]
    fn hand_countable_separation() {
        let mut s = AdversaryState::new(4, 1, 0.5).unwrap();
        s.answer_query(0, 1).unwrap();
        let r = s.verify_separation();
        assert!((r.avg_upper - 22.0 / 16.0).abs() < 1e-12);
        assert!((r.avg_lower - 7.0 / 16.0).abs() < 1e-9);
        assert!(r.agreement_on_e);
        let cd = s.finalize_lower();
        assert!((average_all(&cd) - 7.0 / 16.0).abs() < 1e-12);
        let p2 = power_p_report(&s.finalize_upper(), &cd, 2.0);
        assert!((p2 - 42.0 / 4.5).abs() < 1e-9);
    }

    #[test]
    fn empty_game_ratio() {
        for k in 1..4 {
            let s = AdversaryState::new(9, k, 0.3).unwrap();
            let r = s.verify_separation();
            assert!((r.ratio - 2.0 * (k + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn nonadaptive_and_small_alpha() {
        let out = nonadaptive_adversary(6, &[], 1, 1.0).unwrap();
        assert!((out.report.ratio - 4.0).abs() < 1e-12);
        let all: Vec<_> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let (_, _, r) = small_alpha_adversary(5, &all, 1.0).unwrap();
        assert!((r.target - 1.0).abs() < 1e-12);
        assert!((r.ratio - 1.0).abs() < 1e-12);
        assert!((small_alpha_bound(1.0) - 1.0).abs() < 1e-12);
    }
}
