//! The Poisson-weighted infinite tree, branching random walks and the sparse regime.
//!
//! In the tree every particle gives birth at the points of an independent
//! unit-rate Poisson process, its children sitting one generation deeper. The
//! population alive at time `t` is a Yule process, so `E|V_t| = e^t` and the
//! expected number of generation-`ℓ` particles is `t^ℓ/ℓ!`.
//!
//! The connected component of the first vertex of a sparse graph embeds into the
//! tree: its vertices, ordered by their longest distance from the root, receive
//! red birth clocks at rates `1, q, q², ...` in rank order. [`coupled_tree`]
//! runs this clockwork and reports the generation of every embedded vertex,
//! which is its longest path length from the root.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::error::{check_prob, invalid, LppError, Result};
use crate::graph::{longest_path_profile, sample_window, EdgeLaw, GraphWindow};
use crate::harness::{geometric_unchecked, replicate, RngStream};

/// Birth record of one tree particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Birth {
    /// Birth time.
    pub time: f64,
    /// Generation (root is 0).
    pub generation: u32,
}

/// All births of a tree up to a horizon, in time order (the root first).
#[derive(Debug, Clone, PartialEq)]
pub struct PwitTrajectory {
    /// Births sorted by time.
    pub births: Vec<Birth>,
    /// Horizon of the simulation.
    pub t_max: f64,
}

impl PwitTrajectory {
    /// Number of particles born by time `t`.
    pub fn population(&self, t: f64) -> usize {
        self.births.partition_point(|b| b.time <= t)
    }

    /// `Z_t(ℓ)`: particles of generation `ℓ` born by time `t`.
    pub fn generation_count(&self, t: f64, l: u32) -> usize {
        self.births.iter().take_while(|b| b.time <= t).filter(|b| b.generation == l).count()
    }

    /// `F_t`: deepest generation born by time `t`.
    pub fn front(&self, t: f64) -> u32 {
        self.births.iter().take_while(|b| b.time <= t).map(|b| b.generation).max().unwrap_or(0)
    }

    /// `M_ℓ`: first birth time in generation `ℓ`, if it happened before the horizon.
    pub fn first_birth(&self, l: u32) -> Option<f64> {
        self.births.iter().find(|b| b.generation == l).map(|b| b.time)
    }
}

/// Largest population [`simulate_pwit`] will grow.
pub const POPULATION_CAP: usize = 10_000_000;

/// Grows the tree until `t_max`.
///
/// With `N` particles alive the next birth comes after an exponential time of
/// rate `N` and the parent is uniform among them.
pub fn simulate_pwit(t_max: f64, rng: &mut RngStream) -> Result<PwitTrajectory> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(invalid(format!("horizon {t_max} must be finite and nonnegative")));
    }
    let mut births = vec![Birth { time: 0.0, generation: 0 }];
    let mut t = 0.0;
    loop {
        t += rng.exponential(births.len() as f64);
        if t > t_max {
            break;
        }
        if births.len() >= POPULATION_CAP {
            return Err(LppError::Resource(format!("population exceeded {POPULATION_CAP} before t = {t_max}")));
        }
        let parent = births[rng.below(births.len() as u64) as usize];
        births.push(Birth { time: t, generation: parent.generation + 1 });
    }
    Ok(PwitTrajectory { births, t_max })
}

/// Position of the leftmost generation-`n` particle of the branching random walk
/// with selection of the `beam` leftmost particles per generation.
///
/// Each kept particle contributes its children at its position plus the points
/// of a unit-rate Poisson process. The `beam` smallest children overall are
/// found by merging the per-parent increasing sequences through a heap.
/// Selection only removes particles, so the result is at least the unselected
/// minimum `M_n`.
pub fn brw_min_displacement(n: usize, beam: usize, rng: &mut RngStream) -> Result<f64> {
    if n == 0 || beam == 0 {
        return Err(invalid("need n ≥ 1 and a positive beam width"));
    }
    let mut parents = vec![0.0f64];
    for _ in 0..n {
        // (Reverse(position), parent index); children of a parent are generated lazily in order.
        let mut heap: BinaryHeap<(Reverse<OrdF64>, usize)> = BinaryHeap::with_capacity(parents.len());
        for (k, &x) in parents.iter().enumerate() {
            heap.push((Reverse(OrdF64(x + rng.exponential(1.0))), k));
        }
        let mut next = Vec::with_capacity(beam);
        while next.len() < beam {
            let (Reverse(OrdF64(x)), k) = heap.pop().expect("every parent has infinitely many children");
            next.push(x);
            heap.push((Reverse(OrdF64(x + rng.exponential(1.0))), k));
        }
        parents = next;
    }
    Ok(parents[0])
}

/// Total order on finite floats for heap keys.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// One embedded vertex of the coupled construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedVertex {
    /// Graph vertex `κ_i`, counted from the root at 0.
    pub kappa: u64,
    /// Embedding time `T(κ_i)`.
    pub time: f64,
    /// Longest path length from the root, equal to the tree generation of its particle.
    pub length: u32,
    /// Index of the parent among earlier embedded vertices.
    pub parent: usize,
    /// Rank of the parent at the time of the birth (1 = longest).
    pub parent_rank: usize,
    /// `max_{j ≤ i} L_{κ_j}`, the red front at time `T(κ_i)`.
    pub front: u32,
}

/// Runs the clockwork embedding of the root component for `steps` vertices after the root.
///
/// With `i` vertices embedded, the next one arrives after an exponential time
/// of rate `1 + q + ... + q^{i-1}`, lies a geometric(`1 - q^i`) number of
/// graph vertices further, and attaches to the vertex of rank `r` with
/// probability `q^{r-1}(1-q)/(1-q^i)`. Ranks order vertices by decreasing
/// length, later vertices first among equal lengths, so a newborn vertex ranks
/// above every vertex of its length and below every strictly longer one.
pub fn coupled_tree(p: f64, steps: usize, rng: &mut RngStream) -> Result<Vec<RedVertex>> {
    check_prob(p, "edge probability")?;
    if p == 0.0 {
        return Err(invalid("edge probability must be positive"));
    }
    let q = 1.0 - p;
    let mut out = vec![RedVertex { kappa: 0, time: 0.0, length: 0, parent: 0, parent_rank: 0, front: 0 }];
    // Ranking key: (Reverse(length), Reverse(index)); iteration order is rank order.
    let mut ranking: BTreeSet<(Reverse<u32>, Reverse<usize>)> = BTreeSet::new();
    ranking.insert((Reverse(0), Reverse(0)));
    let mut kappa = 0u64;
    let mut time = 0.0;
    let mut front = 0u32;
    for i in 1..=steps {
        let qi = q.powi(i as i32);
        kappa += geometric_unchecked(1.0 - qi, rng);
        let rate = if q == 0.0 { 1.0 } else { (1.0 - qi) / (1.0 - q) };
        time += rng.exponential(rate);
        let rank = if q == 0.0 {
            1
        } else {
            // Truncated geometric on {1..i} by inversion.
            let u = rng.uniform();
            let r = 1 + ((-u * (1.0 - qi)).ln_1p() / q.ln()).floor() as usize;
            r.clamp(1, i)
        };
        let &(Reverse(parent_len), Reverse(parent)) = ranking.iter().nth(rank - 1).expect("rank ≤ population");
        let length = parent_len + 1;
        front = front.max(length);
        ranking.insert((Reverse(length), Reverse(i)));
        out.push(RedVertex { kappa, time, length, parent, parent_rank: rank, front });
    }
    Ok(out)
}

/// Empirical law of a nonnegative integer statistic, with a separate count for `∞`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntegerLaw {
    /// Counts per finite value.
    pub counts: BTreeMap<u32, usize>,
    /// Count of infinite outcomes.
    pub infinite: usize,
    /// Number of samples.
    pub total: usize,
}

impl IntegerLaw {
    fn from_samples(samples: impl IntoIterator<Item = Option<u32>>) -> Self {
        let mut law = IntegerLaw::default();
        for s in samples {
            match s {
                Some(k) => *law.counts.entry(k).or_default() += 1,
                None => law.infinite += 1,
            }
            law.total += 1;
        }
        law
    }

    /// Empirical probability of `k`.
    pub fn prob(&self, k: u32) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Empirical probability of `∞`.
    pub fn prob_infinite(&self) -> f64 {
        self.infinite as f64 / self.total as f64
    }

    /// Binomial standard error of an empirical probability.
    pub fn std_error(&self, prob: f64) -> f64 {
        (prob * (1.0 - prob) / self.total as f64).sqrt()
    }
}

/// `max{k ≥ 0 : binom(n, k) p^k ≥ 1}`, the first-moment length threshold.
pub fn first_moment_length(n: u64, p: f64) -> Result<u64> {
    check_prob(p, "edge probability")?;
    if p == 0.0 {
        return Ok(0);
    }
    let lp = p.ln();
    let mut log_term = 0.0f64;
    let mut k = 0u64;
    while k < n {
        let next = log_term + (((n - k) as f64) / ((k + 1) as f64)).ln() + lp;
        if next < 0.0 {
            break;
        }
        log_term = next;
        k += 1;
    }
    Ok(k)
}

/// The root larger than 1 of `x ln x = 1/(eγ)`, by bisection to `1e-14` relative width.
pub fn sparse_constant(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("γ = {gamma} must be positive")));
    }
    let target = 1.0 / (std::f64::consts::E * gamma);
    let f = |x: f64| x * x.ln() - target;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Longest paths in sparse graphs together with the deterministic comparison values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseReport {
    /// Empirical law of the longest path length on `n` vertices.
    pub law: IntegerLaw,
    /// First-moment threshold `max{k : binom(n,k) p^k ≥ 1}`.
    pub first_moment: u64,
    /// `γ = n p / ln n`.
    pub gamma: f64,
    /// `e A(γ) n p`, the predicted length when `γ < 1`.
    pub log_regime_prediction: Option<f64>,
}

/// Monte Carlo of the longest path on `n` vertices with edge probability `p`.
pub fn sparse_longest(n: usize, p: f64, reps: usize, seed: u64) -> Result<SparseReport> {
    check_prob(p, "edge probability")?;
    if n < 2 || reps == 0 {
        return Err(invalid("need at least 2 vertices and one replica"));
    }
    let law = EdgeLaw::Bernoulli(p);
    let samples = replicate(reps, seed, |rng| {
        let w = sample_window(n - 1, &law, rng).expect("validated");
        longest_path_profile(&w).into_iter().max().map(Some).unwrap_or(Some(0))
    });
    let gamma = n as f64 * p / (n as f64).ln();
    let log_regime_prediction = if gamma > 0.0 && gamma < 1.0 {
        Some(std::f64::consts::E * sparse_constant(gamma)? * n as f64 * p)
    } else {
        None
    };
    Ok(SparseReport { law: IntegerLaw::from_samples(samples), first_moment: first_moment_length(n as u64, p)?, gamma, log_regime_prediction })
}

/// Fewest edges on a path from vertex 0 to vertex `n` of a window, `None` if there is none.
pub fn shortest_path_length(w: &GraphWindow) -> Option<u32> {
    let n = w.n();
    let mut dist = vec![u32::MAX; n + 1];
    dist[0] = 0;
    // Vertices are in topological order, so one forward sweep is a BFS.
    for j in 1..=n {
        let mut best = u32::MAX;
        for i in 0..j {
            if dist[i] != u32::MAX && w.present(i, j) {
                best = best.min(dist[i] + 1);
            }
        }
        dist[j] = best;
    }
    (dist[n] != u32::MAX).then_some(dist[n])
}

/// Empirical law of the shortest path between the first and last of `n` vertices.
pub fn shortest_path(n: usize, p: f64, reps: usize, seed: u64) -> Result<IntegerLaw> {
    check_prob(p, "edge probability")?;
    if n < 2 || reps == 0 {
        return Err(invalid("need at least 2 vertices and one replica"));
    }
    let law = EdgeLaw::Bernoulli(p);
    let samples = replicate(reps, seed, |rng| shortest_path_length(&sample_window(n - 1, &law, rng).expect("validated")));
    Ok(IntegerLaw::from_samples(samples))
}
