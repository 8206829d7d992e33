//! Poincaré constants of regular graphs against finite targets.
//!
//! For `f: V → X`,
//! `γ_p(G, X) = sup_f [(1/n²) Σ_{u,v} d(f(u), f(v))^p] / [(1/|E|) Σ_{(u,v)} d(f(u), f(v))^p]`
//! where the edge sum runs over ordered port pairs and `|E| = n·d`. The `γ⁺`
//! variant uses two functions `f, g` in place of `f` on the two sides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{conductance, normalized_spectrum, RegularGraph, EXACT_CONDUCTANCE_THRESHOLD};
use crate::error::{invalid, Error, Result};
use crate::metric::FiniteMetric;

/// Grid size used when a real-line target has to be searched.
pub const DEFAULT_LINE_POINTS: usize = 401;

#[derive(Debug, Clone)]
pub enum Target {
    Reals,
    Finite(FiniteMetric),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoincareMode {
    Gamma,
    GammaPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoincareKind {
    ExactSpectral,
    Enumerated,
    SearchLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    /// Target indices of `f` (and `g` for `γ⁺`).
    Indices { f: Vec<usize>, g: Option<Vec<usize>> },
    /// A real-valued eigenfunction.
    Real { f: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareEstimate {
    pub value: f64,
    pub kind: PoincareKind,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy)]
pub struct PoincareBudget {
    pub restarts: usize,
    pub max_passes: usize,
    /// Exhaustive search when the number of candidate functions is at most this.
    pub exhaustive_limit: u64,
    pub seed: u64,
}

impl Default for PoincareBudget {
    fn default() -> Self {
        PoincareBudget { restarts: 32, max_passes: 500, exhaustive_limit: 1_000_000, seed: 0 }
    }
}

/// `points` equally spaced reals in `[-1, 1]` as a line metric.
pub fn line_grid(points: usize) -> FiniteMetric {
    let coords: Vec<f64> = (0..points)
        .map(|i| if points == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (points - 1) as f64 })
        .collect();
    FiniteMetric::line(&coords)
}

struct Powered {
    t: usize,
    p: Vec<f64>,
}

impl Powered {
    fn new(m: &FiniteMetric, p: f64) -> Self {
        let t = m.len();
        let pw = m.as_slice().iter().map(|&v| if v == 0.0 { 0.0 } else { v.powf(p) }).collect();
        Powered { t, p: pw }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.t + b]
    }
}

/// Evaluates the Poincaré ratio of `(f, g)` (`g = f` for `γ`). Returns
/// `(numerator, denominator)` as normalized averages.
pub fn poincare_ratio(
    graph: &RegularGraph,
    target: &FiniteMetric,
    p: f64,
    f: &[usize],
    g: Option<&[usize]>,
) -> (f64, f64) {
    let pw = Powered::new(target, p);
    ratio_parts(graph, &pw, f, g.unwrap_or(f))
}

fn ratio_parts(graph: &RegularGraph, pw: &Powered, f: &[usize], g: &[usize]) -> (f64, f64) {
    let n = graph.n();
    let mut hist = vec![0usize; pw.t];
    for &b in g {
        hist[b] += 1;
    }
    let mut num = 0.0;
    for &a in f {
        num += hist.iter().enumerate().map(|(b, &c)| c as f64 * pw.at(a, b)).sum::<f64>();
    }
    let mut den = 0.0;
    for v in 0..n {
        den += graph.neighbors(v).map(|w| pw.at(f[v], g[w])).sum::<f64>();
    }
    (num / (n * n) as f64, den / (n * graph.degree()) as f64)
}

fn quotient(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Estimates `γ_p` or `γ_p⁺` of `graph` against `target`.
///
/// Reals with `p = 2` are exact via the spectrum. Finite targets are
/// enumerated when small enough and otherwise searched by coordinate-wise best
/// response from seeded restarts, which gives a lower bound. Reals with
/// `p ≠ 2` are searched on [`line_grid`].
pub fn poincare_estimate(
    graph: &RegularGraph,
    target: &Target,
    p: f64,
    mode: PoincareMode,
    budget: &PoincareBudget,
) -> Result<PoincareEstimate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("p must be positive, got {p}")));
    }
    if !graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let metric = match target {
        Target::Reals if p == 2.0 => {
            let s = normalized_spectrum(graph)?;
            let value = match mode {
                PoincareMode::Gamma => s.gamma2,
                PoincareMode::GammaPlus => s.gamma2_plus,
            };
            let witness = match mode {
                PoincareMode::Gamma => Some(Witness::Real { f: super::fiedler_vector(graph)? }),
                PoincareMode::GammaPlus => None,
            };
            return Ok(PoincareEstimate { value, kind: PoincareKind::ExactSpectral, witness });
        }
        Target::Reals => line_grid(DEFAULT_LINE_POINTS),
        Target::Finite(m) => m.clone(),
    };
    let t = metric.len();
    if t < 2 {
        return Ok(PoincareEstimate { value: 0.0, kind: PoincareKind::Enumerated, witness: None });
    }
    let pw = Powered::new(&metric, p);
    let n = graph.n();
    let slots = match mode {
        PoincareMode::Gamma => n,
        PoincareMode::GammaPlus => 2 * n,
    };
    let count = (t as f64).powi(slots as i32);
    if count <= budget.exhaustive_limit as f64 {
        return Ok(enumerate(graph, &pw, mode));
    }
    Ok(search(graph, &pw, mode, budget))
}

fn enumerate(graph: &RegularGraph, pw: &Powered, mode: PoincareMode) -> PoincareEstimate {
    let n = graph.n();
    let slots = if mode == PoincareMode::Gamma { n } else { 2 * n };
    let mut digits = vec![0usize; slots];
    let mut best = 0.0;
    let mut best_digits: Option<Vec<usize>> = None;
    loop {
        let (f, g) = digits.split_at(n);
        let g = if mode == PoincareMode::Gamma { f } else { g };
        let (num, den) = ratio_parts(graph, pw, f, g);
        if let Some(r) = quotient(num, den) {
            if r > best {
                best = r;
                best_digits = Some(digits.clone());
            }
        }
        let mut k = 0;
        loop {
            if k == slots {
                let witness = best_digits.map(|d| split_witness(d, n, mode));
                return PoincareEstimate { value: best, kind: PoincareKind::Enumerated, witness };
            }
            digits[k] += 1;
            if digits[k] < pw.t {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

fn split_witness(mut digits: Vec<usize>, n: usize, mode: PoincareMode) -> Witness {
    let g = (mode == PoincareMode::GammaPlus).then(|| digits.split_off(n));
    Witness::Indices { f: digits, g }
}

struct SearchState<'a> {
    graph: &'a RegularGraph,
    pw: &'a Powered,
    f: Vec<usize>,
    g: Vec<usize>,
    hist_f: Vec<usize>,
    hist_g: Vec<usize>,
    num: f64,
    den: f64,
}

impl<'a> SearchState<'a> {
    fn new(graph: &'a RegularGraph, pw: &'a Powered, f: Vec<usize>, g: Vec<usize>) -> Self {
        let n = graph.n();
        let (num, den) = ratio_parts(graph, pw, &f, &g);
        let mut hist_f = vec![0; pw.t];
        let mut hist_g = vec![0; pw.t];
        f.iter().for_each(|&a| hist_f[a] += 1);
        g.iter().for_each(|&a| hist_g[a] += 1);
        let nn = (n * n) as f64;
        let nd = (n * graph.degree()) as f64;
        SearchState { graph, pw, f, g, hist_f, hist_g, num: num * nn, den: den * nd }
    }

    fn ratio(&self) -> f64 {
        quotient(self.num, self.den).unwrap_or(0.0)
    }

    /// One best-response move for coordinate `v` of `f` (tied to `g` when
    /// `tied`). Returns true when the ratio strictly improved.
    fn improve_f(&mut self, v: usize, tied: bool) -> bool {
        let pw = self.pw;
        let cur = self.f[v];
        let row_num = |t: usize, hist: &[usize]| -> f64 {
            hist.iter().enumerate().map(|(b, &c)| c as f64 * pw.at(t, b)).sum::<f64>()
        };
        let row_den = |t: usize, other: &[usize]| -> f64 {
            self.graph.neighbors(v).map(|w| pw.at(t, other[w])).sum::<f64>()
        };
        let mut best = (self.ratio(), cur, 0.0, 0.0);
        let (base_num, base_den) = if tied {
            (
                self.num - 2.0 * (row_num(cur, &self.hist_f) - pw.at(cur, cur)),
                self.den - 2.0 * row_den(cur, &self.f),
            )
        } else {
            (self.num - row_num(cur, &self.hist_g), self.den - row_den(cur, &self.g))
        };
        for t in 0..pw.t {
            if t == cur {
                continue;
            }
            let (num, den) = if tied {
                let hn = row_num(t, &self.hist_f) - pw.at(t, cur);
                let mut hd = 0.0;
                for w in self.graph.neighbors(v) {
                    hd += if w == v { 0.0 } else { pw.at(t, self.f[w]) };
                }
                (base_num + 2.0 * hn, base_den + 2.0 * hd)
            } else {
                (base_num + row_num(t, &self.hist_g), base_den + row_den(t, &self.g))
            };
            if let Some(r) = quotient(num, den) {
                if r > best.0 * (1.0 + 1e-12) {
                    best = (r, t, num, den);
                }
            }
        }
        if best.1 == cur {
            return false;
        }
        let t = best.1;
        self.f[v] = t;
        self.hist_f[cur] -= 1;
        self.hist_f[t] += 1;
        if tied {
            self.g[v] = t;
            self.hist_g = self.hist_f.clone();
        }
        self.num = best.2;
        self.den = best.3;
        true
    }

    /// Best response for coordinate `v` of `g` with `f` fixed.
    fn improve_g(&mut self, v: usize) -> bool {
        std::mem::swap(&mut self.f, &mut self.g);
        std::mem::swap(&mut self.hist_f, &mut self.hist_g);
        let changed = self.improve_f(v, false);
        std::mem::swap(&mut self.f, &mut self.g);
        std::mem::swap(&mut self.hist_f, &mut self.hist_g);
        changed
    }
}

fn search(
    graph: &RegularGraph,
    pw: &Powered,
    mode: PoincareMode,
    budget: &PoincareBudget,
) -> PoincareEstimate {
    let n = graph.n();
    let results: Vec<(f64, Vec<usize>, Vec<usize>)> = (0..budget.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed.wrapping_add(r as u64));
            let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..pw.t)).collect();
            let g: Vec<usize> = match mode {
                PoincareMode::Gamma => f.clone(),
                PoincareMode::GammaPlus => (0..n).map(|_| rng.gen_range(0..pw.t)).collect(),
            };
            let mut st = SearchState::new(graph, pw, f, g);
            for _ in 0..budget.max_passes {
                let mut changed = false;
                for v in 0..n {
                    match mode {
                        PoincareMode::Gamma => changed |= st.improve_f(v, true),
                        PoincareMode::GammaPlus => {
                            changed |= st.improve_f(v, false);
                            changed |= st.improve_g(v);
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let (num, den) = ratio_parts(graph, pw, &st.f, &st.g);
            (quotient(num, den).unwrap_or(0.0), st.f, st.g)
        })
        .collect();
    let (value, f, g) = results
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");
    let g = (mode == PoincareMode::GammaPlus).then_some(g);
    PoincareEstimate {
        value,
        kind: PoincareKind::SearchLowerBound,
        witness: Some(Witness::Indices { f, g }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationItem {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Whether the inequality has an explicit constant and can be flagged.
    pub checked: bool,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolationReport {
    pub items: Vec<ExtrapolationItem>,
}

impl ExtrapolationReport {
    pub fn flagged(&self) -> bool {
        self.items.iter().any(|i| i.violated)
    }
}

/// Evaluates the Cheeger sandwich `γ₂ ≥ γ_p({0,1}) ≥ √(γ₂/8)` and reports the
/// extrapolation ratio `γ_p(R) / γ_q(R)^{max{1, p/q}}`, whose constant is
/// implicit and therefore never flagged.
pub fn extrapolation_checks(
    graph: &RegularGraph,
    p: f64,
    q: f64,
    budget: &PoincareBudget,
) -> Result<ExtrapolationReport> {
    let spec = normalized_spectrum(graph)?;
    let cut = conductance(graph, EXACT_CONDUCTANCE_THRESHOLD)?;
    let binary = 1.0 / cut.value;
    let slack = 1e-9 * spec.gamma2.max(1.0);
    let mut items = vec![
        ExtrapolationItem {
            name: "cheeger-upper: gamma2 >= gamma_p({0,1})".into(),
            lhs: spec.gamma2,
            rhs: binary,
            checked: cut.exact,
            violated: cut.exact && spec.gamma2 + slack < binary,
        },
        ExtrapolationItem {
            name: "cheeger-lower: gamma_p({0,1}) >= sqrt(gamma2/8)".into(),
            lhs: binary,
            rhs: (spec.gamma2 / 8.0).sqrt(),
            checked: true,
            violated: binary + slack < (spec.gamma2 / 8.0).sqrt(),
        },
    ];
    let gp = poincare_estimate(graph, &Target::Reals, p, PoincareMode::Gamma, budget)?.value;
    let gq = poincare_estimate(graph, &Target::Reals, q, PoincareMode::Gamma, budget)?.value;
    items.push(ExtrapolationItem {
        name: "extrapolation: gamma_p(R) vs gamma_q(R)^max(1,p/q)".into(),
        lhs: gp,
        rhs: gq.powf((p / q).max(1.0)),
        checked: false,
        violated: false,
    });
    Ok(ExtrapolationReport { items })
}
