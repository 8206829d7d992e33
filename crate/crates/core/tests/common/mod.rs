#![allow(dead_code)]

use avgdist::adversary::AdversaryState;
use avgdist::FiniteMetric;

/// Exhaustive search for the smallest half-integral feasible lower metric,
/// in units of 1/2. Returns the doubled objective over unordered pairs.
pub fn brute_force_lower_objective(state: &AdversaryState) -> u32 {
    let n = state.n();
    let k = state.k();
    let h: Vec<usize> = (0..n).map(|x| state.h_value(x)).collect();
    let mut val = vec![0u8; n * n];
    let mut free = Vec::new();
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            let up = 2 * state.capped_distance(x, y) as u8;
            match state.weight(x, y) {
                Some(w) => {
                    val[x * n + y] = 2 * w as u8;
                    val[y * n + x] = 2 * w as u8;
                }
                None => {
                    free.push((x, y));
                    lo.push(up.min(2 * h[x].max(h[y]) as u8 + 1));
                    hi.push(up);
                }
            }
        }
    }
    let _ = k;
    let fixed_sum: u32 = (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .filter(|&(x, y)| state.weight(x, y).is_some())
        .map(|(x, y)| val[x * n + y] as u32)
        .sum();
    let mut suffix_lo = vec![0u32; free.len() + 1];
    for i in (0..free.len()).rev() {
        suffix_lo[i] = suffix_lo[i + 1] + lo[i] as u32;
    }
    let mut assigned = vec![false; n * n];
    for x in 0..n {
        assigned[x * n + x] = true;
        for y in 0..n {
            if x != y && state.weight(x, y).is_some() {
                assigned[x * n + y] = true;
            }
        }
    }
    let mut best = hi.iter().map(|&v| v as u32).sum::<u32>() + 1;
    let mut ctx = Ctx { n, free: &free, lo: &lo, hi: &hi, suffix_lo: &suffix_lo, val, assigned };
    // Triangles among fixed pairs are consistent because the upper metric is.
    dfs(&mut ctx, 0, 0, &mut best);
    fixed_sum + best
}

struct Ctx<'a> {
    n: usize,
    free: &'a [(usize, usize)],
    lo: &'a [u8],
    hi: &'a [u8],
    suffix_lo: &'a [u32],
    val: Vec<u8>,
    assigned: Vec<bool>,
}

fn consistent(ctx: &Ctx, x: usize, y: usize, v: u8) -> bool {
    let n = ctx.n;
    for z in 0..n {
        if z == x || z == y || !ctx.assigned[x * n + z] || !ctx.assigned[y * n + z] {
            continue;
        }
        let (a, b) = (ctx.val[x * n + z], ctx.val[y * n + z]);
        if v > a + b || a > v + b || b > v + a {
            return false;
        }
    }
    true
}

fn dfs(ctx: &mut Ctx, i: usize, sum: u32, best: &mut u32) {
    if sum + ctx.suffix_lo[i] >= *best {
        return;
    }
    if i == ctx.free.len() {
        *best = sum;
        return;
    }
    let (x, y) = ctx.free[i];
    let n = ctx.n;
    for v in ctx.lo[i]..=ctx.hi[i] {
        if sum + v as u32 + ctx.suffix_lo[i + 1] >= *best {
            break;
        }
        if !consistent(ctx, x, y, v) {
            continue;
        }
        ctx.val[x * n + y] = v;
        ctx.val[y * n + x] = v;
        ctx.assigned[x * n + y] = true;
        ctx.assigned[y * n + x] = true;
        dfs(ctx, i + 1, sum + v as u32, best);
        ctx.assigned[x * n + y] = false;
        ctx.assigned[y * n + x] = false;
    }
}

/// Doubled sum over unordered pairs.
pub fn doubled_objective(m: &FiniteMetric) -> f64 {
    let n = m.len();
    let mut s = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            s += 2.0 * m.get(x, y);
        }
    }
    s
}

/// Floyd–Warshall oracle.
pub fn floyd(n: usize, edges: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for &(u, v, w) in edges {
        if w < d[u * n + v] {
            d[u * n + v] = w;
            d[v * n + u] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}
