//! Numeric checks of the comparison and barycentric inequalities on
//! instances where geodesics and barycenters are computable: Euclidean
//! configurations, tree metrics built as `ℓ₁` unions, and cone-valued
//! functions under Mazur maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cones::{lp_cone_distance, lp_radius_norm, lp_union, mazur_map, ConePoint, PointedSpace};
use crate::error::{invalid, Error, Result};
use crate::metric::{euclid, FiniteMetric};

/// Absolute tolerance on margins.
pub const MARGIN_TOL: f64 = 1e-9;

/// `(1−t)d(x,y)² + t·d(x,z)² − t(1−t)d(y,z)² − d(x,γ(t))²`.
fn cat0_margin(dxy: f64, dxz: f64, dyz: f64, dxg: f64, t: f64) -> f64 {
    (1.0 - t) * dxy * dxy + t * dxz * dxz - t * (1.0 - t) * dyz * dyz - dxg * dxg
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cat0Check {
    pub holds: bool,
    pub min_margin: f64,
    pub max_margin: f64,
}

/// Comparison inequality for `x` against the segment from `y` to `z`.
pub fn cat0_comparison_check(x: &[f64], y: &[f64], z: &[f64], t_grid: &[f64]) -> Cat0Check {
    let (dxy, dxz, dyz) = (euclid(x, y), euclid(x, z), euclid(y, z));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in t_grid {
        let g: Vec<f64> = y.iter().zip(z).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        let m = cat0_margin(dxy, dxz, dyz, euclid(x, &g), t);
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Cat0Check { holds: lo >= -MARGIN_TOL, min_margin: lo, max_margin: hi }
}

/// Comparison margins in a finite metric along a materialized geodesic
/// `path` from `path[0]` to its last point; `t` is the arclength fraction.
pub fn cat0_metric_margins(m: &FiniteMetric, x: usize, path: &[usize]) -> Result<Vec<(f64, f64)>> {
    let (&y, &z) = match (path.first(), path.last()) {
        (Some(y), Some(z)) => (y, z),
        _ => return Err(invalid("empty path")),
    };
    let dyz = m.get(y, z);
    if dyz == 0.0 {
        return Err(invalid("path endpoints coincide"));
    }
    let mut along = 0.0;
    for w in path.windows(2) {
        along += m.get(w[0], w[1]);
    }
    if (along - dyz).abs() > 1e-9 * dyz.max(1.0) {
        return Err(invalid("path is not a geodesic"));
    }
    Ok(path
        .iter()
        .map(|&g| {
            let t = m.get(y, g) / dyz;
            (t, cat0_margin(m.get(x, y), m.get(x, z), dyz, m.get(x, g), t))
        })
        .collect())
}

/// A tripod with legs of the given lengths, each cut into `steps` equal
/// pieces, built as the `ℓ₁` union of three segments at their origins.
///
/// Returns the metric, the three leg ends, and the geodesic from the end of
/// leg 0 to the end of leg 1.
pub fn tripod(legs: [f64; 3], steps: usize) -> Result<(FiniteMetric, [usize; 3], Vec<usize>)> {
    if steps == 0 || legs.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("legs must be positive and steps at least 1"));
    }
    let spaces: Vec<PointedSpace> = legs
        .iter()
        .map(|&l| {
            let coords: Vec<f64> = (0..=steps).map(|i| l * i as f64 / steps as f64).collect();
            PointedSpace::new(FiniteMetric::line(&coords), 0)
        })
        .collect::<Result<_>>()?;
    let (m, index) = lp_union(&spaces, 1.0)?;
    let row = |leg: usize, i: usize| -> usize {
        if i == 0 {
            0
        } else {
            index.iter().position(|&(s, x)| s == leg && x == i).expect("present")
        }
    };
    let ends = [row(0, steps), row(1, steps), row(2, steps)];
    let mut path: Vec<usize> = (0..=steps).rev().map(|i| row(0, i)).collect();
    path.extend((1..=steps).map(|i| row(1, i)));
    Ok((m, ends, path))
}

fn check_weights(points: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(invalid("need one weight per point"));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(invalid("weights must form a probability vector"));
    }
    Ok(())
}

/// Weighted mean.
pub fn barycenter(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let dim = points[0].len();
    let mut b = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        for (bi, pi) in b.iter_mut().zip(p) {
            *bi += w * pi;
        }
    }
    b
}

/// `∫d(z,x)² dμ − d(z,B)² − ∫d(B,x)² dμ`.
pub fn two_barycentric_check(points: &[Vec<f64>], weights: &[f64], z: &[f64]) -> Result<f64> {
    p_barycentric_check(points, weights, z, 2.0)
}

/// `∫d(z,x)^p dμ − d(z,B)^p − (2^{p−1} − 1)^{−1}·∫d(B,x)^p dμ` for `p ≥ 2`.
pub fn p_barycentric_check(points: &[Vec<f64>], weights: &[f64], z: &[f64], p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(invalid(format!("p must be at least 2, got {p}")));
    }
    check_weights(points, weights)?;
    let b = barycenter(points, weights);
    let c = 1.0 / (2f64.powf(p - 1.0) - 1.0);
    let mut lhs = 0.0;
    let mut spread = 0.0;
    for (x, &w) in points.iter().zip(weights) {
        lhs += w * euclid(z, x).powf(p);
        spread += w * euclid(&b, x).powf(p);
    }
    Ok(lhs - euclid(z, &b).powf(p) - c * spread)
}

/// A violation of `∫|z−x|^p dμ ≥ |z−B|^p + ε∫|B−x|^p dμ` on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Counterexample {
    pub p: f64,
    pub eps: f64,
    /// `μ = (δ_{−η} + δ_η)/2`.
    pub eta: f64,
    pub z: f64,
    pub barycenter: f64,
    pub lhs: f64,
    pub rhs: f64,
}

fn two_atom_sides(p: f64, eps: f64, eta: f64, z: f64) -> (f64, f64) {
    let lhs = 0.5 * ((z + eta).abs().powf(p) + (z - eta).abs().powf(p));
    let rhs = z.abs().powf(p) + eps * eta.powf(p);
    (lhs, rhs)
}

/// For `p < 2` the inequality with any `ε ∈ (0, 1]` fails on two symmetric
/// atoms: `η = 1` when `p ≤ 1`, otherwise the largest `η = 2^{−j}` that works.
pub fn p_barycentric_counterexample(p: f64, eps: f64) -> Result<Counterexample> {
    if p >= 2.0 {
        return Err(Error::NoCounterexample(p));
    }
    if !(p > 0.0) || !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("need p ∈ (0, 2) and ε ∈ (0, 1], got p = {p}, ε = {eps}")));
    }
    let z = 1.0;
    let mut eta: f64 = 1.0;
    for _ in 0..200 {
        let (lhs, rhs) = two_atom_sides(p, eps, eta, z);
        if lhs < rhs {
            return Ok(Counterexample { p, eps, eta, z, barycenter: 0.0, lhs, rhs });
        }
        if p <= 1.0 {
            break;
        }
        eta *= 0.5;
    }
    Err(Error::Internal(format!("no violating η found for p = {p}, ε = {eps}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MazurCheck {
    /// `|‖ψ(f)‖_q − ‖f‖_p|`, worst of the two functions.
    pub norm_error: f64,
    /// `d_q(ψf₁, ψf₂) / d_p(f₁, f₂)`.
    pub ratio: f64,
    /// `p/q + 1`.
    pub bound: f64,
    pub ok: bool,
}

/// Norm preservation and the `(p/q + 1)`-Lipschitz bound of the cone Mazur
/// map, for `p ≥ q`.
pub fn mazur_check(
    base: &FiniteMetric,
    weights: &[f64],
    f1: &[ConePoint],
    f2: &[ConePoint],
    p: f64,
    q: f64,
) -> Result<MazurCheck> {
    if p < q {
        return Err(invalid("the Lipschitz bound needs p ≥ q"));
    }
    let g1 = mazur_map(weights, f1, p, q)?;
    let g2 = mazur_map(weights, f2, p, q)?;
    let norm_error = (lp_radius_norm(weights, &g1, q) - lp_radius_norm(weights, f1, p))
        .abs()
        .max((lp_radius_norm(weights, &g2, q) - lp_radius_norm(weights, f2, p)).abs());
    let d_in = lp_cone_distance(base, weights, f1, f2, p);
    let d_out = lp_cone_distance(base, weights, &g1, &g2, q);
    let bound = p / q + 1.0;
    let ratio = if d_in > 0.0 { d_out / d_in } else if d_out > 1e-12 { f64::INFINITY } else { 0.0 };
    Ok(MazurCheck { norm_error, ratio, bound, ok: norm_error <= 1e-9 && ratio <= bound * (1.0 + 1e-12) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteItem {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    /// Smallest margin (or largest normalized error) seen.
    pub worst: f64,
}

impl SuiteItem {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub items: Vec<SuiteItem>,
    pub all_ok: bool,
}

fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Runs every check on `trials` random instances per item.
pub fn inequality_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();

    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut item = SuiteItem { name: "cat0-euclidean".into(), trials, passed: 0, worst: f64::INFINITY };
    for _ in 0..trials {
        let pts = random_points(&mut rng, 3, 3);
        let c = cat0_comparison_check(&pts[0], &pts[1], &pts[2], &grid);
        item.passed += usize::from(c.holds && c.max_margin.abs() <= MARGIN_TOL);
        item.worst = item.worst.min(c.min_margin);
    }
    items.push(item);

    let mut item = SuiteItem { name: "cat0-tripod".into(), trials: 1, passed: 0, worst: f64::INFINITY };
    if let Ok((m, ends, path)) = tripod([1.0, 1.5, 2.0], 8) {
        if let Ok(margins) = cat0_metric_margins(&m, ends[2], &path) {
            let worst = margins.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
            let strict = margins.iter().filter(|&&(t, _)| t > 0.0 && t < 1.0).all(|&(_, v)| v > MARGIN_TOL);
            item.worst = worst;
            item.passed = usize::from(worst >= -MARGIN_TOL && strict);
        }
    }
    items.push(item);

    for p in [2.0, 2.5, 3.0, 4.0] {
        let mut item = SuiteItem { name: format!("p-barycentric-{p}"), trials, passed: 0, worst: f64::INFINITY };
        for _ in 0..trials {
            let count = rng.gen_range(2..12);
            let pts = random_points(&mut rng, count, 3);
            let w = random_weights(&mut rng, count);
            let z = random_points(&mut rng, 1, 3).pop().expect("one point");
            if let Ok(margin) = p_barycentric_check(&pts, &w, &z, p) {
                item.passed += usize::from(margin >= -MARGIN_TOL);
                item.worst = item.worst.min(margin);
            }
        }
        items.push(item);
    }

    for p in [1.0, 1.5] {
        let mut item = SuiteItem { name: format!("counterexample-{p}"), trials: 1, passed: 0, worst: 0.0 };
        if let Ok(c) = p_barycentric_counterexample(p, 1.0) {
            item.passed = usize::from(c.lhs < c.rhs);
            item.worst = c.rhs - c.lhs;
        }
        items.push(item);
    }

    let mut item = SuiteItem { name: "mazur".into(), trials, passed: 0, worst: 0.0 };
    for _ in 0..trials {
        let size = rng.gen_range(2..7);
        let coords: Vec<f64> = (0..size).map(|_| rng.gen_range(0.0..4.0)).collect();
        let base = FiniteMetric::line(&coords);
        let omega = rng.gen_range(1..8);
        let weights = random_weights(&mut rng, omega);
        let mut f = || -> Vec<ConePoint> {
            (0..omega).map(|_| ConePoint::new(rng.gen_range(0.0..3.0), rng.gen_range(0..size))).collect()
        };
        let (f1, f2) = (f(), f());
        let (p, q) = *[(2.0, 1.0), (3.0, 2.0), (4.0, 2.0), (3.0, 1.0), (2.5, 1.5)]
            .get(rng.gen_range(0..5))
            .expect("in range");
        if let Ok(c) = mazur_check(&base, &weights, &f1, &f2, p, q) {
            item.passed += usize::from(c.ok);
            item.worst = item.worst.max(c.ratio / c.bound);
        }
    }
    items.push(item);

    let all_ok = items.iter().all(SuiteItem::ok);
    SuiteReport { items, all_ok }
}
