//! Fixed query sets for average-distance estimation: expander-derived
//! universal sets, random sampling baselines, and the two-sided sandwich check.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::game::{Round, Strategy};
use crate::graphs::{normalized_spectrum, random_regular, RegularGraph, Spectrum};
use crate::metric::{average_distance, FiniteMetric};

/// Upper constant used for `σ = C/m` on expander query sets. The largest
/// `average / mean-over-pairs` seen on the calibration corpus (subsets of
/// random 3-regular graphs on 512 vertices) was about 1.06.
pub const UNIVERSAL_CONSTANT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySet {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub sigma: f64,
    /// Factor turning `σ·Σ` into an estimate of the ordered-pair average
    /// (1 when `σ` already targets it).
    pub correction: f64,
    /// Expander edges whose endpoints collapsed under the surjection.
    pub dropped_loops: usize,
}

impl QuerySet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Pushes the expander's edges through the balanced surjection `v ↦ v mod n`,
/// dropping collapsed edges, with `σ = c/m`.
pub fn universal_query_set(expander: &RegularGraph, n: usize, c: f64) -> Result<QuerySet> {
    let big_n = expander.n();
    if n > big_n {
        return Err(Error::ExpanderTooSmall { expander: big_n, n });
    }
    if n < 2 {
        return Err(invalid("need at least two points"));
    }
    if !expander.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut pairs = Vec::new();
    let mut dropped = 0;
    for (u, v) in expander.edges() {
        let (a, b) = (u % n, v % n);
        if a == b {
            dropped += 1;
        } else {
            pairs.push((a, b));
        }
    }
    if pairs.is_empty() {
        return Err(invalid("every expander edge collapsed"));
    }
    let sigma = c / pairs.len() as f64;
    Ok(QuerySet { n, pairs, sigma, correction: 1.0, dropped_loops: dropped })
}

/// `σ·Σ oracle(a, b)` over the query pairs.
pub fn estimate_average(q: &QuerySet, mut oracle: impl FnMut(usize, usize) -> f64) -> f64 {
    q.sigma * q.pairs.iter().map(|&(a, b)| oracle(a, b)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub mean_over_pairs: f64,
    pub average: f64,
    /// `mean_over_pairs / 2 ≤ average`.
    pub lower_ok: bool,
    /// `average / mean_over_pairs`.
    pub upper_ratio: f64,
}

/// Compares the query-pair mean with the true average on `points[0..n]`.
pub fn sandwich_check(q: &QuerySet, m: &FiniteMetric, points: &[usize]) -> Result<SandwichReport> {
    if points.len() != q.n {
        return Err(invalid(format!("query set is on {} points but {} given", q.n, points.len())));
    }
    if q.pairs.is_empty() {
        return Err(invalid("empty query set"));
    }
    let mean = q.pairs.iter().map(|&(a, b)| m.get(points[a], points[b])).sum::<f64>()
        / q.pairs.len() as f64;
    let average = average_distance(m, points);
    let upper_ratio = if mean > 0.0 {
        average / mean
    } else if average > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(SandwichReport {
        mean_over_pairs: mean,
        average,
        lower_ok: mean / 2.0 <= average * (1.0 + 1e-12) + 1e-12,
        upper_ratio,
    })
}

/// `m` distinct unordered pairs drawn uniformly without replacement.
/// `σ = 1/m` estimates the mean over distinct pairs; `correction = (n−1)/n`
/// converts that to the ordered average with the diagonal.
pub fn sample_baseline(n: usize, m: usize, seed: u64) -> Result<QuerySet> {
    let total = n * n.saturating_sub(1) / 2;
    if m == 0 || m > total {
        return Err(invalid(format!("need 1 ≤ m ≤ {total}, got {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = sample(&mut rng, total, m)
        .into_iter()
        .map(|idx| unrank_pair(n, idx))
        .collect();
    Ok(QuerySet {
        n,
        pairs,
        sigma: 1.0 / m as f64,
        correction: (n as f64 - 1.0) / n as f64,
        dropped_loops: 0,
    })
}

/// Maps `0..C(n,2)` onto pairs `a < b` in lexicographic order.
fn unrank_pair(n: usize, mut idx: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = n - 1 - a;
        if idx < row {
            return (a, a + 1 + idx);
        }
        idx -= row;
        a += 1;
    }
}

/// Replays a fixed query set; the estimate is `σ·Σ`.
pub struct NonAdaptive {
    q: QuerySet,
    next: usize,
}

impl NonAdaptive {
    pub fn new(q: QuerySet) -> Self {
        NonAdaptive { q, next: 0 }
    }
}

impl Strategy for NonAdaptive {
    fn next_pair(&mut self, _: &[Round]) -> (usize, usize) {
        let p = self.q.pairs[self.next % self.q.pairs.len()];
        self.next += 1;
        p
    }

    fn estimate(&self, history: &[Round]) -> f64 {
        self.q.sigma * history.iter().map(|r| r.response).sum::<f64>()
    }
}

/// Smallest member of the family of random 3-regular graphs on `12·2^j`
/// vertices that has at least `n` vertices, with its spectral certificate.
pub fn certified_expander(n: usize, seed: u64) -> Result<(RegularGraph, Spectrum)> {
    let mut size = 12;
    while size < n {
        size *= 2;
    }
    for attempt in 0..16u64 {
        let g = random_regular(size, 3, seed.wrapping_add(attempt))?;
        if let Ok(s) = normalized_spectrum(&g) {
            if s.gamma2_plus.is_finite() {
                return Ok((g, s));
            }
        }
    }
    Err(Error::Internal(format!("no certified expander on {size} vertices")))
}
