use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RegularGraph;
use crate::error::{Error, Result};

/// Above this size the spectrum is computed iteratively.
pub const DENSE_LIMIT: usize = 2000;

const POWER_ITERS: usize = 20_000;
const POWER_TOL: f64 = 1e-12;

/// Extreme nontrivial eigenvalues of the normalized adjacency `A/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    pub lambda2: f64,
    pub lambda_n: f64,
    /// `1/(1 − λ₂)`.
    pub gamma2: f64,
    /// `1/(1 − max{λ₂, −λ_n})`; infinite for bipartite graphs.
    pub gamma2_plus: f64,
    pub bipartite: bool,
    /// False when computed by power iteration.
    pub exact: bool,
}

fn dense_normalized(g: &RegularGraph) -> DMatrix<f64> {
    let n = g.n();
    let inv = 1.0 / g.degree() as f64;
    DMatrix::from_row_slice(n, n, &g.adjacency_counts()).scale(inv)
}

/// All eigenvalues of `A/d`, in decreasing order (dense solver).
pub fn normalized_eigenvalues(g: &RegularGraph) -> Vec<f64> {
    let eig = SymmetricEigen::new(dense_normalized(g));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

fn gamma(lambda: f64) -> f64 {
    let gap = 1.0 - lambda;
    if gap <= 1e-12 {
        f64::INFINITY
    } else {
        1.0 / gap
    }
}

/// `λ₂`, `λ_n`, `γ₂` and `γ₂⁺` of a connected regular graph.
pub fn normalized_spectrum(g: &RegularGraph) -> Result<Spectrum> {
    if g.n() < 2 {
        return Err(Error::Invalid("spectrum needs at least two vertices".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let bipartite = g.bipartition().is_some();
    let (lambda2, mut lambda_n, exact) = if g.n() <= DENSE_LIMIT {
        let vals = normalized_eigenvalues(g);
        (vals[1], vals[vals.len() - 1], true)
    } else {
        let (l2, _) = power_extreme(g, true);
        let (ln, _) = power_extreme(g, false);
        (l2, ln, false)
    };
    if bipartite {
        lambda_n = -1.0;
    }
    Ok(Spectrum {
        lambda2,
        lambda_n,
        gamma2: gamma(lambda2),
        gamma2_plus: if bipartite { f64::INFINITY } else { gamma(lambda2.max(-lambda_n)) },
        bipartite,
        exact,
    })
}

/// An eigenvector for `λ₂`.
pub fn fiedler_vector(g: &RegularGraph) -> Result<Vec<f64>> {
    if g.n() <= DENSE_LIMIT {
        let eig = SymmetricEigen::new(dense_normalized(g));
        let mut idx: Vec<usize> = (0..g.n()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let col = idx.get(1).copied().ok_or(Error::Invalid("graph too small".into()))?;
        Ok(eig.eigenvectors.column(col).iter().copied().collect())
    } else {
        Ok(power_extreme(g, true).1)
    }
}

/// Power iteration on `(I ± A/d)/2` restricted to the complement of the
/// constant vector. Returns `λ₂` (`upper`) or `λ_n` (`!upper`).
fn power_extreme(g: &RegularGraph, upper: bool) -> (f64, Vec<f64>) {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut y = vec![0.0; n];
    let sign = if upper { 1.0 } else { -1.0 };
    let mut mu = 0.0;
    let deflate_normalize = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    };
    deflate_normalize(&mut x);
    for _ in 0..POWER_ITERS {
        g.apply_normalized(&x, &mut y);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = 0.5 * (xi + sign * *yi);
        }
        let next_mu: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut x, &mut y);
        deflate_normalize(&mut x);
        if (next_mu - mu).abs() < POWER_TOL {
            mu = next_mu;
            break;
        }
        mu = next_mu;
    }
    (sign * (2.0 * mu - 1.0), x)
}
