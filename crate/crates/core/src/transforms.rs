//! Concave metric transforms and their truncation decompositions.
//!
//! A decomposition writes `φ̂(t) = α₀·t + Σ_k min{α_k·t, β_k}`. It is built from
//! the piecewise-linear interpolant of `φ` at geometric breakpoints
//! `t_min·2^j` (plus any known kinks of `φ`), so on `[t_min, t_max]` it satisfies
//! `φ/2 ≤ φ̂ ≤ φ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric::{validate_metric, FiniteMetric};

/// Number of points in envelope and transform-check grids.
pub const GRID_POINTS: usize = 1024;

const CHECK_TOL: f64 = 1e-9;
const SLOPE_EPS: f64 = 1e-12;

/// A nondecreasing concave function with `φ(0) = 0`.
///
/// JSON form: `{"kind": "truncation", "params": {"tau": 3.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum MetricTransform {
    Identity,
    /// `min{t, τ}`.
    Truncation { tau: f64 },
    /// `t^θ` for `θ ∈ (0, 1]`.
    Snowflake { theta: f64 },
    /// `ln(1 + t)`.
    Log1p,
    /// Linear interpolation through `(0, 0)` and `breakpoints`, continued with
    /// `tail_slope` past the last breakpoint.
    PiecewiseLinearConcave {
        breakpoints: Vec<(f64, f64)>,
        #[serde(default)]
        tail_slope: f64,
    },
}

impl MetricTransform {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            MetricTransform::Identity => t,
            MetricTransform::Truncation { tau } => t.min(*tau),
            MetricTransform::Snowflake { theta } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*theta)
                }
            }
            MetricTransform::Log1p => t.ln_1p(),
            MetricTransform::PiecewiseLinearConcave { breakpoints, tail_slope } => {
                let (mut x0, mut y0) = (0.0, 0.0);
                for &(x1, y1) in breakpoints {
                    if t <= x1 {
                        return if x1 == x0 { y1 } else { y0 + (y1 - y0) * (t - x0) / (x1 - x0) };
                    }
                    x0 = x1;
                    y0 = y1;
                }
                y0 + tail_slope * (t - x0)
            }
        }
    }

    /// Points where `φ` is not differentiable.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            MetricTransform::Truncation { tau } => vec![*tau],
            MetricTransform::PiecewiseLinearConcave { breakpoints, .. } => {
                breakpoints.iter().map(|b| b.0).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Where a transform check failed.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformViolation {
    NonzeroAtZero(f64),
    Decreasing { t0: f64, t1: f64 },
    NotConcave { t0: f64, t1: f64 },
    NotFinite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformCheck {
    pub ok: bool,
    pub violation: Option<TransformViolation>,
}

/// Checks `φ(0) = 0`, monotonicity, midpoint concavity and nonincreasing
/// secant slopes on a sorted positive grid.
pub fn check_fn(f: impl Fn(f64) -> f64, grid: &[f64]) -> TransformCheck {
    let fail = |v| TransformCheck { ok: false, violation: Some(v) };
    let f0 = f(0.0);
    if f0.abs() > CHECK_TOL {
        return fail(TransformViolation::NonzeroAtZero(f0));
    }
    let mut prev_t = 0.0f64;
    let mut prev_v = 0.0f64;
    let mut prev_slope = f64::INFINITY;
    for &t in grid {
        let v = f(t);
        if !v.is_finite() {
            return fail(TransformViolation::NotFinite(t));
        }
        // Points a few ulps apart give meaningless secant slopes.
        if t > prev_t && t - prev_t <= CHECK_TOL * t {
            continue;
        }
        let scale = v.abs().max(prev_v.abs()).max(1e-300);
        if v < prev_v - CHECK_TOL * scale {
            return fail(TransformViolation::Decreasing { t0: prev_t, t1: t });
        }
        if t > prev_t {
            let slope = (v - prev_v) / (t - prev_t);
            if slope > prev_slope + CHECK_TOL * prev_slope.abs().max(slope.abs()).max(1e-300) {
                return fail(TransformViolation::NotConcave { t0: prev_t, t1: t });
            }
            let mid = f(0.5 * (prev_t + t));
            if mid < 0.5 * (prev_v + v) - CHECK_TOL * scale {
                return fail(TransformViolation::NotConcave { t0: prev_t, t1: t });
            }
            prev_slope = slope;
        }
        prev_t = t;
        prev_v = v;
    }
    TransformCheck { ok: true, violation: None }
}

pub fn check_transform(phi: &MetricTransform, grid: &[f64]) -> TransformCheck {
    check_fn(|t| phi.eval(t), grid)
}

/// `points` logarithmically spaced values spanning `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// `φ ∘ d` entrywise, after checking `φ` on the distances of `m`.
pub fn apply_transform(m: &FiniteMetric, phi: &MetricTransform) -> Result<FiniteMetric> {
    let mut grid: Vec<f64> = m.as_slice().iter().copied().filter(|&v| v > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if let (Some(&lo), Some(&hi)) = (grid.first(), grid.last()) {
        grid.extend(log_grid(lo, hi, 64));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    let check = check_transform(phi, &grid);
    if !check.ok {
        return Err(Error::NotTransform(format!("{:?}", check.violation)));
    }
    let out = m.map(|t| phi.eval(t));
    let violations = validate_metric(&out);
    if !violations.is_empty() {
        return Err(Error::NotTransform(format!("image is not a metric: {:?}", violations[0])));
    }
    Ok(out)
}

/// `φ̂(t) = α₀·t + Σ min{α_k·t, β_k}` on the domain `[t_min, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationDecomposition {
    pub alpha0: f64,
    pub terms: Vec<(f64, f64)>,
    pub t_min: f64,
    pub t_max: f64,
}

impl TruncationDecomposition {
    pub fn eval(&self, t: f64) -> f64 {
        self.alpha0 * t + self.terms.iter().map(|&(a, b)| (a * t).min(b)).sum::<f64>()
    }

    /// Extreme values of `φ̂/φ` on a log grid of the domain.
    pub fn envelope(&self, f: impl Fn(f64) -> f64, points: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for t in log_grid(self.t_min, self.t_max, points) {
            let r = self.eval(t) / f(t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// CSV: an `alpha0` line, then one `alpha_k,beta_k` row per term.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", self.alpha0);
        for (a, b) in &self.terms {
            s.push_str(&format!("{a},{b}\n"));
        }
        s
    }
}

/// Decomposes a concave `f` with `f(0) = 0` on `[t_min, t_max]` given extra
/// breakpoints `kinks`.
pub fn decompose_fn(
    f: impl Fn(f64) -> f64,
    kinks: &[f64],
    t_min: f64,
    t_max: f64,
    budget: usize,
) -> Result<TruncationDecomposition> {
    if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
        return Err(invalid(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let mut knots = Vec::new();
    let mut t = t_min;
    while t < t_max {
        knots.push(t);
        t *= 2.0;
    }
    knots.push(t_max);
    knots.extend(kinks.iter().copied().filter(|&k| k > t_min && k < t_max));
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let values: Vec<f64> = knots.iter().map(|&t| f(t)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotTransform("non-finite value on the domain".into()));
    }
    let mut slopes = Vec::with_capacity(knots.len());
    let (mut x0, mut y0) = (0.0, 0.0);
    for (&x, &y) in knots.iter().zip(&values) {
        slopes.push((y - y0) / (x - x0));
        x0 = x;
        y0 = y;
    }
    let alpha0 = slopes.last().copied().unwrap_or(0.0).max(0.0);
    let mut terms = Vec::new();
    for j in 0..knots.len() {
        let next = if j + 1 < slopes.len() { slopes[j + 1] } else { alpha0 };
        let a = slopes[j] - next;
        if a < -SLOPE_EPS * slopes[j].abs().max(1.0) {
            return Err(Error::NotTransform(format!(
                "secant slope increases near t = {}",
                knots[j]
            )));
        }
        if a > SLOPE_EPS * slopes[0].abs().max(1e-300) {
            terms.push((a, a * knots[j]));
        }
    }
    let alpha0 = if alpha0 > SLOPE_EPS * slopes[0].abs() { alpha0 } else { 0.0 };
    if terms.len() > budget {
        return Err(Error::InsufficientTerms { needed: terms.len(), budget });
    }
    let dec = TruncationDecomposition { alpha0, terms, t_min, t_max };
    let (lo, hi) = dec.envelope(&f, GRID_POINTS);
    if lo < 0.5 - CHECK_TOL || hi > 3.0 + CHECK_TOL {
        return Err(Error::NotTransform(format!("envelope [{lo}, {hi}] outside [1/2, 3]")));
    }
    Ok(dec)
}

/// Decomposes `φ` on `[t_min, t_max]` with at most `terms` truncations.
pub fn decompose(
    phi: &MetricTransform,
    t_min: f64,
    t_max: f64,
    terms: usize,
) -> Result<TruncationDecomposition> {
    decompose_fn(|t| phi.eval(t), &phi.kinks(), t_min, t_max, terms)
}

/// Decomposes `ω(t) = φ(t^{1/q})^q` on `[t_min^q, t_max^q]`, so that
/// `(1/3)·φ̂_q(t) ≤ φ(t)^q ≤ 2·φ̂_q(t)` with `φ̂_q(t) = α₀t^q + Σ min{α_k t^q, β_k}`.
pub fn decompose_power(
    phi: &MetricTransform,
    q: f64,
    t_min: f64,
    t_max: f64,
    terms: usize,
) -> Result<TruncationDecomposition> {
    if q < 1.0 {
        return Err(invalid(format!("q must be at least 1, got {q}")));
    }
    let kinks: Vec<f64> = phi.kinks().iter().map(|k| k.powf(q)).collect();
    decompose_fn(
        |t| phi.eval(t.powf(1.0 / q)).powf(q),
        &kinks,
        t_min.powf(q),
        t_max.powf(q),
        terms,
    )
}
