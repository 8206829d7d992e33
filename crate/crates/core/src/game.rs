//! The adaptive query game: a strategy picks pairs one at a time, an oracle
//! answers with distances, and the strategy finally outputs an estimate.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::FiniteMetric;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub a: usize,
    pub b: usize,
    pub response: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub n: usize,
    pub rounds: Vec<Round>,
    pub estimate: f64,
}

impl Transcript {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.rounds.iter().map(|r| (r.a, r.b)).collect()
    }
}

/// Answers distance queries on `[n]`.
pub trait Oracle {
    fn n(&self) -> usize;
    fn query(&mut self, a: usize, b: usize) -> Result<f64>;
}

/// A deterministic chooser: the next pair depends only on the history (and
/// on the strategy's own seed).
pub trait Strategy {
    fn next_pair(&mut self, history: &[Round]) -> (usize, usize);

    /// Defaults to the mean response.
    fn estimate(&self, history: &[Round]) -> f64 {
        if history.is_empty() {
            return 0.0;
        }
        history.iter().map(|r| r.response).sum::<f64>() / history.len() as f64
    }
}

/// Oracle reading from a metric on a multiset of points.
pub struct MetricOracle<'a> {
    pub metric: &'a FiniteMetric,
    pub points: &'a [usize],
}

impl Oracle for MetricOracle<'_> {
    fn n(&self) -> usize {
        self.points.len()
    }

    fn query(&mut self, a: usize, b: usize) -> Result<f64> {
        Ok(self.metric.get(self.points[a], self.points[b]))
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Plays `rounds` rounds. A repeated pair is answered from the transcript
/// without consulting the oracle again.
pub fn run_game(
    strategy: &mut dyn Strategy,
    oracle: &mut dyn Oracle,
    rounds: usize,
) -> Result<Transcript> {
    let n = oracle.n();
    let mut history = Vec::with_capacity(rounds);
    let mut seen: HashMap<(usize, usize), f64> = HashMap::new();
    for _ in 0..rounds {
        let (a, b) = strategy.next_pair(&history);
        if a >= n || b >= n {
            return Err(invalid(format!("strategy queried ({a}, {b}) outside [0, {n})")));
        }
        let response = match seen.get(&key(a, b)) {
            Some(&r) => r,
            None => {
                let r = oracle.query(a, b)?;
                seen.insert(key(a, b), r);
                r
            }
        };
        history.push(Round { a, b, response });
    }
    let estimate = strategy.estimate(&history);
    Ok(Transcript { n, rounds: history, estimate })
}

/// Which built-in strategy to play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Random,
    Greedy,
    Bfs,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Random, StrategyKind::Greedy, StrategyKind::Bfs];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Greedy => "greedy",
            StrategyKind::Bfs => "bfs",
        }
    }

    pub fn build(self, n: usize, seed: u64) -> Box<dyn Strategy + Send> {
        match self {
            StrategyKind::Random => Box::new(RandomPairs::new(n, seed)),
            StrategyKind::Greedy => Box::new(GreedyLowDegree::new(n)),
            StrategyKind::Bfs => Box::new(BfsFrontier::new(n, seed)),
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(StrategyKind::Random),
            "greedy" => Ok(StrategyKind::Greedy),
            "bfs" => Ok(StrategyKind::Bfs),
            other => Err(invalid(format!("unknown strategy {other:?}"))),
        }
    }
}

fn random_distinct(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Uniform random pairs of distinct points (repeats allowed).
pub struct RandomPairs {
    n: usize,
    rng: ChaCha8Rng,
}

impl RandomPairs {
    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 2, "need two points");
        RandomPairs { n, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Strategy for RandomPairs {
    fn next_pair(&mut self, _: &[Round]) -> (usize, usize) {
        random_distinct(&mut self.rng, self.n)
    }
}

/// Pairs the two lowest-degree points that have not been queried together,
/// keeping the query graph as regular as possible.
pub struct GreedyLowDegree {
    n: usize,
    degree: Vec<usize>,
    queried: HashSet<(usize, usize)>,
    seen_rounds: usize,
}

impl GreedyLowDegree {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "need two points");
        GreedyLowDegree { n, degree: vec![0; n], queried: HashSet::new(), seen_rounds: 0 }
    }
}

impl Strategy for GreedyLowDegree {
    fn next_pair(&mut self, history: &[Round]) -> (usize, usize) {
        for r in &history[self.seen_rounds..] {
            if self.queried.insert(key(r.a, r.b)) {
                self.degree[r.a] += 1;
                self.degree[r.b] += 1;
            }
        }
        self.seen_rounds = history.len();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| (self.degree[v], v));
        for (i, &a) in order.iter().enumerate() {
            if let Some(&b) = order[i + 1..].iter().find(|&&b| !self.queried.contains(&key(a, b))) {
                return (a, b);
            }
        }
        (order[0], order[1])
    }
}

/// Grows a query tree breadth-first from point 0, attaching each new point
/// to the oldest frontier point, then closes cycles between frontier points
/// at random once every point has been reached.
pub struct BfsFrontier {
    n: usize,
    rng: ChaCha8Rng,
    frontier: VecDeque<usize>,
    next_new: usize,
    fanout: usize,
    used: usize,
}

impl BfsFrontier {
    const FANOUT: usize = 3;

    pub fn new(n: usize, seed: u64) -> Self {
        assert!(n >= 2, "need two points");
        BfsFrontier {
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
            frontier: VecDeque::from([0]),
            next_new: 1,
            fanout: Self::FANOUT,
            used: 0,
        }
    }
}

impl Strategy for BfsFrontier {
    fn next_pair(&mut self, history: &[Round]) -> (usize, usize) {
        if self.next_new < self.n {
            let u = *self.frontier.front().expect("frontier never empties while points remain");
            let v = self.next_new;
            self.next_new += 1;
            self.frontier.push_back(v);
            self.used += 1;
            if self.used == self.fanout {
                self.frontier.pop_front();
                self.used = 0;
            }
            return (u, v);
        }
        // Prefer pairs whose last answer was small, probing for short cycles.
        if let Some(last) = history.last() {
            if last.response <= 1.0 && self.rng.gen_bool(0.5) {
                let c = self.rng.gen_range(0..self.n);
                if c != last.b {
                    return (last.b, c);
                }
            }
        }
        random_distinct(&mut self.rng, self.n)
    }
}
