//! Euclidean cones over finite metrics, pointed `ℓ_p` products and unions,
//! and Mazur maps on cone-valued functions.
//!
//! The cone over `(X, d)` has points `(s, x)` with `s ≥ 0` and distance
//! `√(s² + t² − 2st·cos(min{π, d(x, y)}))`. All points with `s = 0` are the cusp.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::metric::{distortion_by, validate_metric, Distortion, EmbeddingMap, FiniteMetric};
use crate::transforms::{decompose_power, MetricTransform, TruncationDecomposition};

/// Largest number of points a materialized product or union may have.
pub const PRODUCT_CAP: usize = 1_000_000;

/// Dense storage bound: a materialized space never exceeds this many entries.
pub const DENSE_ENTRY_CAP: usize = 400_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    /// Radius; zero denotes the cusp.
    pub s: f64,
    /// Index into the base metric; ignored at the cusp.
    pub x: usize,
}

impl ConePoint {
    pub fn new(s: f64, x: usize) -> Self {
        ConePoint { s, x }
    }

    pub const CUSP: ConePoint = ConePoint { s: 0.0, x: 0 };

    pub fn is_cusp(&self) -> bool {
        self.s == 0.0
    }
}

/// Cone distance between two points over `base`.
pub fn cone_distance(base: &FiniteMetric, a: ConePoint, b: ConePoint) -> f64 {
    if a.is_cusp() {
        return b.s;
    }
    if b.is_cusp() {
        return a.s;
    }
    cone_distance_at_angle(a.s, b.s, base.get(a.x, b.x))
}

/// `√(s² + t² − 2st·cos(min{π, θ}))`, evaluated in a cancellation-free form.
pub fn cone_distance_at_angle(s: f64, t: f64, theta: f64) -> f64 {
    let half = 0.5 * theta.min(PI);
    let sin_half = half.sin();
    ((s - t) * (s - t) + 4.0 * s * t * sin_half * sin_half).max(0.0).sqrt()
}

/// Row layout of a materialized cone: the point each row represents.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeIndex {
    pub points: Vec<ConePoint>,
}

impl ConeIndex {
    /// Row of `(s, x)`, or of the cusp when `s = 0`.
    pub fn row_of(&self, s: f64, x: usize) -> Option<usize> {
        if s == 0.0 {
            return self.points.iter().position(|p| p.is_cusp());
        }
        self.points.iter().position(|p| p.s == s && p.x == x)
    }

    /// JSON map from `"radius,index"` (or `"cusp"`) to row.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (row, p) in self.points.iter().enumerate() {
            let key = if p.is_cusp() { "cusp".to_string() } else { format!("{},{}", p.s, p.x) };
            map.insert(key, serde_json::Value::from(row));
        }
        serde_json::Value::Object(map)
    }
}

/// Materializes `{radii} × base` (plus the cusp, placed last) as a metric.
pub fn cone_space(
    base: &FiniteMetric,
    radii: &[f64],
    include_cusp: bool,
) -> Result<(FiniteMetric, ConeIndex)> {
    if radii.is_empty() {
        return Err(invalid("radius set is empty"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(invalid(format!("radius {r} is not positive")));
    }
    if !validate_metric(base).is_empty() {
        return Err(invalid("cone base is not a metric"));
    }
    let mut points: Vec<ConePoint> = radii
        .iter()
        .flat_map(|&s| (0..base.len()).map(move |x| ConePoint::new(s, x)))
        .collect();
    if include_cusp {
        points.push(ConePoint::CUSP);
    }
    check_dense(points.len())?;
    let m = FiniteMetric::from_fn(points.len(), |i, j| cone_distance(base, points[i], points[j]));
    let violations = validate_metric(&m);
    if !violations.is_empty() {
        return Err(Error::Internal(format!("cone metric fails axioms: {:?}", violations[0])));
    }
    Ok((m, ConeIndex { points }))
}

fn check_dense(points: usize) -> Result<()> {
    if points > PRODUCT_CAP || points.saturating_mul(points) > DENSE_ENTRY_CAP {
        return Err(Error::ProductTooLarge(points));
    }
    Ok(())
}

/// The map `x ↦ (1, x)` from `(base, min{d, π})` into the cone over `base`.
///
/// Its distortion is at most `π/2`; the map is the identity on indices since
/// the cone is materialized at radius 1 without a cusp.
pub fn cone_truncation_embedding(base: &FiniteMetric) -> Result<(EmbeddingMap, Distortion)> {
    let (cone, _) = cone_space(base, &[1.0], false)?;
    let map: EmbeddingMap = (0..base.len()).collect();
    let dist = distortion_by(base.len(), |i, j| base.get(i, j).min(PI), |i, j| cone.get(i, j))?;
    Ok((map, dist))
}

/// A metric space with a distinguished point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointedSpace {
    pub metric: FiniteMetric,
    pub basepoint: usize,
}

impl PointedSpace {
    pub fn new(metric: FiniteMetric, basepoint: usize) -> Result<Self> {
        if basepoint >= metric.len() {
            return Err(invalid(format!("basepoint {basepoint} out of range")));
        }
        Ok(PointedSpace { metric, basepoint })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be a finite value ≥ 1, got {p}")));
    }
    Ok(())
}

/// `ℓ_p` combination of nonnegative parts.
fn lp_norm(parts: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        parts.sum()
    } else {
        parts.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// The `ℓ_p` product of finitely many spaces on the full Cartesian product.
///
/// Row `r` corresponds to the coordinate tuple `index[r]` (last factor varies
/// fastest).
pub fn lp_product(spaces: &[PointedSpace], p: f64) -> Result<(FiniteMetric, Vec<Vec<usize>>)> {
    check_p(p)?;
    let mut size: usize = 1;
    for s in spaces {
        size = size.checked_mul(s.metric.len()).ok_or(Error::ProductTooLarge(usize::MAX))?;
    }
    check_dense(size)?;
    let mut index = Vec::with_capacity(size);
    let mut tuple = vec![0usize; spaces.len()];
    for _ in 0..size {
        index.push(tuple.clone());
        for f in (0..spaces.len()).rev() {
            tuple[f] += 1;
            if tuple[f] < spaces[f].metric.len() {
                break;
            }
            tuple[f] = 0;
        }
    }
    let m = FiniteMetric::from_fn(size, |a, b| {
        lp_norm(
            spaces.iter().enumerate().map(|(f, s)| s.metric.get(index[a][f], index[b][f])),
            p,
        )
    });
    Ok((m, index))
}

/// The `ℓ_p` union: disjoint union with all basepoints identified.
///
/// Row 0 is the shared basepoint; row `r > 0` is `(space, index)` in `index[r]`.
pub fn lp_union(spaces: &[PointedSpace], p: f64) -> Result<(FiniteMetric, Vec<(usize, usize)>)> {
    check_p(p)?;
    if spaces.is_empty() {
        return Err(invalid("union of no spaces"));
    }
    let mut index = vec![(0, spaces[0].basepoint)];
    for (k, s) in spaces.iter().enumerate() {
        index.extend((0..s.metric.len()).filter(|&x| x != s.basepoint).map(|x| (k, x)));
    }
    check_dense(index.len())?;
    let m = FiniteMetric::from_fn(index.len(), |a, b| {
        let (sa, xa) = index[a];
        let (sb, xb) = index[b];
        let da = spaces[sa].metric.get(xa, spaces[sa].basepoint);
        let db = spaces[sb].metric.get(xb, spaces[sb].basepoint);
        if a == 0 {
            db
        } else if b == 0 {
            da
        } else if sa == sb {
            spaces[sa].metric.get(xa, xb)
        } else {
            lp_norm([da, db].into_iter(), p)
        }
    });
    Ok((m, index))
}

/// One factor of the product built by [`transform_cone_embedding`].
#[derive(Debug, Clone, PartialEq)]
pub enum ConeFactor {
    /// The base scaled by `scale`.
    Linear { scale: f64 },
    /// The cone over `base · angle_scale`, at radius 1, scaled by `scale`.
    Cone { angle_scale: f64, scale: f64 },
}

#[derive(Debug, Clone)]
pub struct ConeEmbedding {
    /// The product metric restricted to the image of the base.
    pub target: FiniteMetric,
    pub map: EmbeddingMap,
    pub factors: Vec<ConeFactor>,
    pub decomposition: TruncationDecomposition,
    /// Distortion of the map from `(base, φ∘d)`.
    pub distortion: Distortion,
}

/// Embeds `(base, φ∘d)` into an `ℓ_q` product of a scaled copy of the base and
/// one cone per truncation term of `φ(t^{1/q})^q`.
///
/// Every base point `x` goes to `(x, (1, x), (1, x), …)`. Only the image is
/// materialized, which is where the distortion is measured.
pub fn transform_cone_embedding(
    base: &FiniteMetric,
    phi: &MetricTransform,
    q: f64,
    terms: usize,
) -> Result<ConeEmbedding> {
    if q < 2.0 {
        return Err(invalid(format!("q must be at least 2, got {q}")));
    }
    let t_min = base.min_positive().ok_or_else(|| invalid("base has no positive distance"))?;
    let t_max = base.max_distance().max(2.0 * t_min);
    let dec = decompose_power(phi, q, t_min, t_max, terms)?;
    let mut factors = Vec::new();
    if dec.alpha0 > 0.0 {
        factors.push(ConeFactor::Linear { scale: dec.alpha0.powf(1.0 / q) });
    }
    for &(a, b) in &dec.terms {
        factors.push(ConeFactor::Cone {
            angle_scale: (a / b).powf(1.0 / q) * PI,
            scale: b.powf(1.0 / q) / PI,
        });
    }
    let n = base.len();
    let target = FiniteMetric::from_fn(n, |i, j| {
        let d = base.get(i, j);
        let parts = factors.iter().map(|f| match *f {
            ConeFactor::Linear { scale } => (scale * d).powf(q),
            ConeFactor::Cone { angle_scale, scale } => {
                (scale * cone_distance_at_angle(1.0, 1.0, angle_scale * d)).powf(q)
            }
        });
        parts.sum::<f64>().powf(1.0 / q)
    });
    let distortion = distortion_by(n, |i, j| phi.eval(base.get(i, j)), |i, j| target.get(i, j))?;
    Ok(ConeEmbedding { target, map: (0..n).collect(), factors, decomposition: dec, distortion })
}

/// `(Σ_ω w(ω)·|f(ω)|^p)^{1/p}`.
pub fn lp_radius_norm(weights: &[f64], f: &[ConePoint], p: f64) -> f64 {
    weights.iter().zip(f).map(|(w, a)| w * a.s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `L_p` distance between two cone-valued functions.
pub fn lp_cone_distance(
    base: &FiniteMetric,
    weights: &[f64],
    f: &[ConePoint],
    g: &[ConePoint],
    p: f64,
) -> f64 {
    weights
        .iter()
        .zip(f.iter().zip(g))
        .map(|(w, (a, b))| w * cone_distance(base, *a, *b).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// The Mazur map `ψ_{p,q}`: radii become `‖f‖_p^{1−p/q}·|f(ω)|^{p/q}`,
/// arguments are kept.
pub fn mazur_map(weights: &[f64], f: &[ConePoint], p: f64, q: f64) -> Result<Vec<ConePoint>> {
    if weights.len() != f.len() {
        return Err(invalid("weights and function have different lengths"));
    }
    if !(p >= 1.0 && q >= 1.0) {
        return Err(invalid(format!("exponents must be at least 1, got p = {p}, q = {q}")));
    }
    if p == q {
        return Ok(f.to_vec());
    }
    let norm = lp_radius_norm(weights, f, p);
    if norm == 0.0 {
        return Err(Error::UndefinedMazur);
    }
    let r = p / q;
    let c = norm.powf(1.0 - r);
    Ok(f.iter()
        .map(|a| if a.is_cusp() { ConePoint::CUSP } else { ConePoint::new(c * a.s.powf(r), a.x) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_distance_examples() {
        let base = FiniteMetric::line(&[0.0, PI, PI / 2.0]);
        assert!((cone_distance(&base, ConePoint::new(1.0, 0), ConePoint::new(1.0, 1)) - 2.0).abs() < 1e-12);
        assert!((cone_distance(&base, ConePoint::new(3.0, 0), ConePoint::new(4.0, 2)) - 5.0).abs() < 1e-12);
        assert_eq!(cone_distance(&base, ConePoint::CUSP, ConePoint::new(2.5, 1)), 2.5);
    }

    #[test]
    fn single_point_cone_is_a_line() {
        let base = FiniteMetric::uniform(1, 0.0);
        let (m, idx) = cone_space(&base, &[1.0, 2.0], true).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 2), 2.0);
        assert_eq!(idx.row_of(0.0, 0), Some(2));
    }

    #[test]
    fn products_and_unions() {
        let unit = PointedSpace::new(FiniteMetric::line(&[0.0, 1.0]), 0).unwrap();
        let (sq, _) = lp_product(&[unit.clone(), unit.clone()], 2.0).unwrap();
        assert!((sq.get(0, 3) - 2f64.sqrt()).abs() < 1e-15);
        let (u1, _) = lp_union(&[unit.clone(), unit.clone()], 1.0).unwrap();
        assert_eq!(u1.len(), 3);
        assert_eq!(u1.get(1, 2), 2.0);
    }

    #[test]
    fn mazur_identity_and_zero() {
        let f = vec![ConePoint::new(1.0, 0), ConePoint::new(2.0, 1)];
        assert_eq!(mazur_map(&[0.5, 0.5], &f, 2.0, 2.0).unwrap(), f);
        let zero = vec![ConePoint::CUSP; 2];
        assert!(matches!(mazur_map(&[0.5, 0.5], &zero, 2.0, 4.0), Err(Error::UndefinedMazur)));
    }
}
