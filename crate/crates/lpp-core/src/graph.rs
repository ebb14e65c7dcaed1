//! Random directed graphs on `{0, ..., n}`: sampling, path dynamic programs and skeleton points.
//!
//! Every pair `i < j` carries an independent charge. Under the Bernoulli law the
//! charge is 1 for a present edge and `-∞` for an absent one, so maximal charges
//! are longest path lengths. Under the two-atom law absent edges carry a finite
//! charge `x` instead. Continuous and heavy-tailed laws put a real weight on
//! every pair.
//!
//! A skeleton point is a vertex reachable from every earlier vertex that also
//! reaches every later one. In a window this is decided in linear time from the
//! nearest predecessor and nearest successor of each vertex: `v` reaches all of
//! `(v, n]` iff every `k > v` has a predecessor in `[v, k)`, and symmetrically.
//!
//! Windows of size `n` store `n(n+1)/2` charges, so the large-`n` experiments
//! (heavy tails, central limit theorem) stream columns or use the bin model
//! instead of materializing a window.

use std::collections::HashMap;

use rand::RngCore;

use crate::error::{check_prob, invalid, LppError, Result};
use crate::euler::skeleton_rate;
use crate::harness::{geometric_unchecked, ks_one_sample, normal_cdf, replicate, MonteCarloSummary, RngStream};
#[cfg(test)]
use crate::harness::{ks_two_sample, run_replicas};
use crate::ibm::{Configuration, LetterLaw};

/// Real-valued charge laws with essential supremum 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuousLaw {
    /// Density `e^{x-1}` on `(-∞, 1]`, i.e. `1 - E` with `E` standard exponential.
    ExpBelowOne,
    /// Uniform on `[0, 1]`.
    Uniform,
}

impl ContinuousLaw {
    /// Draws one charge.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            ContinuousLaw::ExpBelowOne => 1.0 + rng.uniform_pos().ln(),
            ContinuousLaw::Uniform => rng.uniform(),
        }
    }
}

/// Presence probability of an edge as a function of its length `d = j - i ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceProfile {
    /// `p_d = p` for all `d`.
    Constant(f64),
    /// `p_d = probs[d - 1]`, and 0 beyond the table.
    Table(Vec<f64>),
    /// `p_d = min(cap, c d^{-exponent})`.
    Capped {
        /// Scale.
        c: f64,
        /// Decay exponent.
        exponent: f64,
        /// Upper cap.
        cap: f64,
    },
}

impl DistanceProfile {
    /// `p_d` for `d ≥ 1`.
    pub fn prob(&self, d: u64) -> f64 {
        match self {
            DistanceProfile::Constant(p) => *p,
            DistanceProfile::Table(t) => t.get(d as usize - 1).copied().unwrap_or(0.0),
            DistanceProfile::Capped { c, exponent, cap } => cap.min(c * (d as f64).powf(-exponent)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        let bad = match self {
            DistanceProfile::Constant(p) => !ok(*p),
            DistanceProfile::Table(t) => t.is_empty() || !t.iter().all(|&p| ok(p)),
            DistanceProfile::Capped { c, exponent, cap } => !(*c >= 0.0 && exponent.is_finite() && ok(*cap)),
        };
        if bad {
            return Err(invalid(format!("distance profile {self:?} has a value outside [0, 1]")));
        }
        Ok(())
    }

    /// `Q_d = ∏_{e ≤ d} (1 - p_e)` for `d = 1..=d_max`.
    pub fn survival(&self, d_max: usize) -> Vec<f64> {
        let mut q = 1.0;
        (1..=d_max as u64)
            .map(|d| {
                q *= 1.0 - self.prob(d);
                q
            })
            .collect()
    }
}

/// Law of the charge on a pair `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeLaw {
    /// Present with probability `p` (charge 1), otherwise absent (charge `-∞`).
    Bernoulli(f64),
    /// Charge 1 with probability `p`, otherwise `x`.
    TwoAtom {
        /// Probability of the unit charge.
        p: f64,
        /// The other charge.
        x: f64,
    },
    /// Real charges from a law with essential supremum 1.
    Continuous(ContinuousLaw),
    /// Present with probability `p_{j-i}`.
    DistanceDependent(DistanceProfile),
    /// Pareto weights `P(u > t) = t^{-s}`, `t ≥ 1`, on every pair.
    Pareto(f64),
}

impl EdgeLaw {
    /// Checks parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            EdgeLaw::Bernoulli(p) => check_prob(*p, "edge probability"),
            EdgeLaw::TwoAtom { p, x } => {
                check_prob(*p, "edge probability")?;
                if x.is_nan() || *x > 1.0 {
                    return Err(invalid(format!("second charge {x} must be at most 1")));
                }
                Ok(())
            }
            EdgeLaw::Continuous(_) => Ok(()),
            EdgeLaw::DistanceDependent(profile) => profile.validate(),
            EdgeLaw::Pareto(s) => {
                if *s > 0.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(format!("tail index {s} must be positive")))
                }
            }
        }
    }
}

/// How a window stores its charges.
#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Presence bits; absent pairs carry `absent`.
    Bits { words: Vec<u64>, absent: f64 },
    /// One real per pair.
    Real(Vec<f64>),
}

/// Charges on all pairs `0 ≤ i < j ≤ n`, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphWindow {
    n: usize,
    storage: Storage,
}

#[inline]
fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

impl GraphWindow {
    /// Window whose present edges are exactly `edges`; absent pairs carry `-∞`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("window size must be at least 1"));
        }
        let pairs = n * (n + 1) / 2;
        let mut words = vec![0u64; pairs.div_ceil(64)];
        for &(i, j) in edges {
            if !(i < j && j <= n) {
                return Err(invalid(format!("pair ({i}, {j}) outside the window")));
            }
            let k = pair_index(i, j);
            words[k / 64] |= 1 << (k % 64);
        }
        Ok(Self { n, storage: Storage::Bits { words, absent: f64::NEG_INFINITY } })
    }

    /// Window with charge `f(i, j)` on each pair.
    pub fn from_charges(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("window size must be at least 1"));
        }
        let mut charges = Vec::with_capacity(n * (n + 1) / 2);
        for j in 1..=n {
            for i in 0..j {
                charges.push(f(i, j));
            }
        }
        Ok(Self { n, storage: Storage::Real(charges) })
    }

    /// Largest vertex.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Charge of the pair `(i, j)`, `i < j ≤ n`.
    pub fn charge(&self, i: usize, j: usize) -> f64 {
        let k = pair_index(i, j);
        match &self.storage {
            Storage::Bits { words, absent } => {
                if words[k / 64] >> (k % 64) & 1 == 1 {
                    1.0
                } else {
                    *absent
                }
            }
            Storage::Real(c) => c[k],
        }
    }

    /// Whether `(i, j)` is an edge: a unit charge under presence laws, a finite charge otherwise.
    pub fn present(&self, i: usize, j: usize) -> bool {
        let k = pair_index(i, j);
        match &self.storage {
            Storage::Bits { words, .. } => words[k / 64] >> (k % 64) & 1 == 1,
            Storage::Real(c) => c[k] > f64::NEG_INFINITY,
        }
    }

    /// Number of pairs with [`present`](Self::present) true.
    pub fn edge_count(&self) -> usize {
        match &self.storage {
            Storage::Bits { words, .. } => words.iter().map(|w| w.count_ones() as usize).sum(),
            Storage::Real(c) => c.iter().filter(|&&x| x > f64::NEG_INFINITY).count(),
        }
    }

    fn bits(&self) -> Option<&[u64]> {
        match &self.storage {
            Storage::Bits { words, .. } => Some(words),
            Storage::Real(_) => None,
        }
    }

    /// Calls `f(i)` for every present predecessor `i < j`, in increasing order.
    fn for_each_pred(&self, j: usize, mut f: impl FnMut(usize)) {
        match &self.storage {
            Storage::Bits { words, .. } => {
                let (start, end) = (pair_index(0, j.max(1)), pair_index(0, j.max(1)) + j);
                let mut k = start;
                while k < end {
                    let w = k / 64;
                    let lo = k % 64;
                    let span = (64 - lo).min(end - k);
                    let mask = if span == 64 { u64::MAX } else { ((1u64 << span) - 1) << lo };
                    let mut bits = words[w] & mask;
                    while bits != 0 {
                        let b = bits.trailing_zeros() as usize;
                        f(w * 64 + b - start);
                        bits &= bits - 1;
                    }
                    k += span;
                }
            }
            Storage::Real(c) => {
                let base = pair_index(0, j.max(1));
                for i in 0..j {
                    if c[base + i] > f64::NEG_INFINITY {
                        f(i);
                    }
                }
            }
        }
    }

    /// Adds the edge `(i, j)` with unit charge; a no-op for real-valued windows that already carry a finite charge.
    pub fn add_edge(&mut self, i: usize, j: usize) {
        let k = pair_index(i, j);
        match &mut self.storage {
            Storage::Bits { words, .. } => words[k / 64] |= 1 << (k % 64),
            Storage::Real(c) => {
                if c[k] == f64::NEG_INFINITY {
                    c[k] = 1.0;
                }
            }
        }
    }
}

/// Fills presence bits over `pairs` slots with independent Bernoulli(`p`) draws.
fn bernoulli_bits(pairs: usize, p: f64, rng: &mut RngStream) -> Vec<u64> {
    let mut words = vec![0u64; pairs.div_ceil(64)];
    if p <= 0.0 {
        return words;
    }
    if p >= 1.0 {
        for k in 0..pairs {
            words[k / 64] |= 1 << (k % 64);
        }
        return words;
    }
    if p == 0.5 {
        for w in words.iter_mut() {
            *w = rng.next_u64();
        }
        if pairs % 64 != 0 {
            let last = words.len() - 1;
            words[last] &= (1u64 << (pairs % 64)) - 1;
        }
        return words;
    }
    // Skip ahead by geometric gaps between successive present pairs.
    let mut k = geometric_unchecked(p, rng) - 1;
    while (k as usize) < pairs {
        words[k as usize / 64] |= 1 << (k % 64);
        k = k.saturating_add(geometric_unchecked(p, rng));
    }
    words
}

/// Samples a window of size `n` under `law`.
///
/// Real-valued charges are drawn column by column, `(0,j), (1,j), ..., (j-1,j)`
/// for `j = 1..=n`, the same order used by the streaming experiments.
pub fn sample_window(n: usize, law: &EdgeLaw, rng: &mut RngStream) -> Result<GraphWindow> {
    if n == 0 {
        return Err(invalid("window size must be at least 1"));
    }
    law.validate()?;
    let pairs = n * (n + 1) / 2;
    let storage = match law {
        EdgeLaw::Bernoulli(p) => Storage::Bits { words: bernoulli_bits(pairs, *p, rng), absent: f64::NEG_INFINITY },
        EdgeLaw::TwoAtom { p, x } => Storage::Bits { words: bernoulli_bits(pairs, *p, rng), absent: *x },
        EdgeLaw::DistanceDependent(profile) => {
            let mut words = vec![0u64; pairs.div_ceil(64)];
            for j in 1..=n {
                for i in 0..j {
                    if rng.bernoulli(profile.prob((j - i) as u64)) {
                        let k = pair_index(i, j);
                        words[k / 64] |= 1 << (k % 64);
                    }
                }
            }
            Storage::Bits { words, absent: f64::NEG_INFINITY }
        }
        EdgeLaw::Continuous(c) => Storage::Real((0..pairs).map(|_| c.sample(rng)).collect()),
        EdgeLaw::Pareto(s) => Storage::Real((0..pairs).map(|_| pareto(*s, rng)).collect()),
    };
    Ok(GraphWindow { n, storage })
}

#[inline]
fn pareto(s: f64, rng: &mut RngStream) -> f64 {
    rng.uniform_pos().powf(-1.0 / s)
}

/// `L_j` for `j = 0..=n`: the most edges on a path that ends at `j` and starts anywhere in the window.
pub fn longest_path_profile(w: &GraphWindow) -> Vec<u32> {
    let mut l = vec![0u32; w.n + 1];
    for j in 1..=w.n {
        let mut best = 0u32;
        w.for_each_pred(j, |i| best = best.max(l[i] + 1));
        l[j] = best;
    }
    l
}

/// `W_{start,j}` for `j = start..=n`: the largest total charge of a path from `start` to `j`.
///
/// Entry 0 is the empty path with charge 0. Unreachable vertices get `-∞`,
/// which absorbs under addition.
pub fn max_charge_profile_from(w: &GraphWindow, start: usize) -> Vec<f64> {
    let n = w.n;
    if start > n {
        return Vec::new();
    }
    let mut out = vec![f64::NEG_INFINITY; n + 1 - start];
    out[0] = 0.0;
    for j in start + 1..=n {
        let mut best = f64::NEG_INFINITY;
        match &w.storage {
            Storage::Bits { absent, .. } if *absent == f64::NEG_INFINITY => {
                w.for_each_pred(j, |i| {
                    if i >= start {
                        best = best.max(out[i - start] + 1.0);
                    }
                });
            }
            _ => {
                for i in start..j {
                    best = best.max(out[i - start] + w.charge(i, j));
                }
            }
        }
        out[j - start] = best;
    }
    out
}

/// `W_{0,j}` for `j = 0..=n`.
pub fn max_charge_profile(w: &GraphWindow) -> Vec<f64> {
    max_charge_profile_from(w, 0)
}

/// Skeleton points of a window and the gaps between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonReport {
    /// Increasing list of window-skeleton vertices.
    pub points: Vec<usize>,
    /// Successive differences of `points`.
    pub gaps: Vec<usize>,
}

/// Vertices reachable from every smaller vertex of the window and reaching every larger one.
///
/// Only reachability inside the window is used, so near the boundaries the set
/// can contain vertices that are not skeleton points of the infinite graph.
/// Real-valued windows are rejected because they have no edge structure.
pub fn skeleton_points(w: &GraphWindow) -> Result<SkeletonReport> {
    if w.bits().is_none() {
        return Err(invalid("skeleton points need a presence-type window"));
    }
    let n = w.n;
    // nearest predecessor (largest i) and nearest successor (smallest k).
    let mut near_pred: Vec<Option<usize>> = vec![None; n + 1];
    let mut near_succ: Vec<Option<usize>> = vec![None; n + 1];
    for j in 1..=n {
        w.for_each_pred(j, |i| {
            near_pred[j] = Some(i);
            if near_succ[i].is_none() {
                near_succ[i] = Some(j);
            }
        });
    }
    // forward_ok[v]: every k > v has a nearest predecessor at or after v.
    let mut forward_ok = vec![false; n + 1];
    let mut min_pred = i64::MAX;
    for v in (0..=n).rev() {
        forward_ok[v] = min_pred >= v as i64;
        if v > 0 {
            min_pred = min_pred.min(near_pred[v].map_or(-1, |i| i as i64));
        }
    }
    // backward_ok[v]: every i < v has a nearest successor at or before v.
    let mut backward_ok = vec![false; n + 1];
    let mut max_succ = 0usize;
    for v in 0..=n {
        backward_ok[v] = max_succ <= v;
        if v < n {
            max_succ = max_succ.max(near_succ[v].unwrap_or(usize::MAX));
        }
    }
    let points: Vec<usize> = (0..=n).filter(|&v| forward_ok[v] && backward_ok[v]).collect();
    let gaps = points.windows(2).map(|p| p[1] - p[0]).collect();
    Ok(SkeletonReport { points, gaps })
}

/// Descendant sets of a small window as bitmasks (`n ≤ 63`).
fn reach_masks(w: &GraphWindow) -> Vec<u64> {
    let n = w.n;
    let mut desc = vec![0u64; n + 1];
    for i in (0..n).rev() {
        let mut m = 0u64;
        for j in i + 1..=n {
            if w.present(i, j) {
                m |= (1 << j) | desc[j];
            }
        }
        desc[i] = m;
    }
    desc
}

/// Whether `0` and `n` are the only skeleton points of `[0, n]` seen from inside the window.
///
/// This is the event that 0 reaches every vertex, every vertex reaches `n`, and
/// each interior vertex is incomparable with some other interior vertex.
pub fn h_event(w: &GraphWindow) -> Result<bool> {
    let n = w.n;
    if n > 63 {
        return Err(invalid(format!("window size {n} too large for the bitmask test")));
    }
    let desc = reach_masks(w);
    let all_after = |i: usize| -> u64 {
        if n == 63 && i == 0 {
            !1u64
        } else {
            ((1u64 << (n + 1)) - 1) & !((1u64 << (i + 1)) - 1)
        }
    };
    if desc[0] & all_after(0) != all_after(0) {
        return Ok(false);
    }
    if !(0..n).all(|i| desc[i] >> n & 1 == 1) {
        return Ok(false);
    }
    for j in 1..n {
        let comparable = (1..n).all(|i| i == j || (i < j && desc[i] >> j & 1 == 1) || (i > j && desc[j] >> i & 1 == 1));
        if comparable {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Estimate of the probability that two successive skeleton points are `n` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    /// Gap length.
    pub n: usize,
    /// Monte Carlo estimate.
    pub estimate: f64,
    /// Normal-approximation 95% half-width.
    pub ci95: f64,
}

/// Monte Carlo estimate of the skeleton gap law for `n = 1..=n_max` from fresh windows.
pub fn skeleton_gap_pmf(p: f64, n_max: usize, reps: usize, seed: u64) -> Result<Vec<GapEstimate>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("edge probability {p} outside (0, 1)")));
    }
    if n_max == 0 || n_max > 63 {
        return Err(invalid(format!("n_max = {n_max} must lie in 1..=63")));
    }
    if reps < 2 {
        return Err(invalid("need at least 2 replicas"));
    }
    let law = EdgeLaw::Bernoulli(p);
    (1..=n_max)
        .map(|n| {
            let hits = replicate(reps, seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), |rng| {
                let w = sample_window(n, &law, rng).expect("validated");
                h_event(&w).expect("n ≤ 63") as u8
            });
            let k: usize = hits.iter().map(|&h| h as usize).sum();
            let est = k as f64 / reps as f64;
            Ok(GapEstimate { n, estimate: est, ci95: 1.96 * (est * (1.0 - est) / reps as f64).sqrt() })
        })
        .collect()
}

/// An infinite graph on `{0, 1, ...}` whose edges are drawn on first use.
///
/// Column `j` (the edges into `j`) is summarized by its nearest predecessor
/// distance, drawn as soon as any edge into `j` is queried; edges farther away
/// than that are drawn individually and memoized. In Palm mode every column is
/// conditioned to have a predecessor in `[0, j)`, which is the law of the graph
/// to the right of a skeleton point at 0.
#[derive(Debug)]
pub struct LazyGraph {
    profile: DistanceProfile,
    palm: bool,
    horizon: u64,
    /// Nearest predecessor distance of column `j`; `u64::MAX` if none within `[0, j)`, 0 if not yet drawn.
    near: Vec<u64>,
    far: HashMap<(u64, u64), bool>,
    rng: RngStream,
}

impl LazyGraph {
    /// A graph with edge probabilities `profile`, conditioned on a skeleton point at 0 if `palm`.
    pub fn new(profile: DistanceProfile, palm: bool, horizon: u64, rng: RngStream) -> Result<Self> {
        profile.validate()?;
        if !(profile.prob(1) > 0.0) {
            return Err(invalid("p_1 must be positive"));
        }
        Ok(Self { profile, palm, horizon, near: vec![u64::MAX], far: HashMap::new(), rng })
    }

    fn check(&self, j: u64) -> Result<()> {
        if j > self.horizon {
            return Err(LppError::Resource(format!("vertex {j} beyond the horizon {}", self.horizon)));
        }
        Ok(())
    }

    fn draw_near(&mut self, j: u64) -> u64 {
        loop {
            let d = match &self.profile {
                DistanceProfile::Constant(p) => {
                    if self.palm && *p < 1.0 {
                        // Truncated geometric on {1..j} by inversion.
                        let q = 1.0 - p;
                        let u = self.rng.uniform();
                        let mass = -(j as f64 * q.ln()).exp_m1();
                        let d = 1 + ((-u * mass).ln_1p() / q.ln()).floor() as u64;
                        return d.clamp(1, j);
                    }
                    geometric_unchecked(*p, &mut self.rng)
                }
                profile => {
                    let mut d = 1;
                    loop {
                        if d > j {
                            break u64::MAX;
                        }
                        let pd = profile.prob(d);
                        if self.rng.bernoulli(pd) {
                            break d;
                        }
                        d += 1;
                    }
                }
            };
            if d <= j {
                return d;
            }
            if !self.palm {
                return u64::MAX;
            }
        }
    }

    /// Nearest predecessor distance of `j`, or `None` if `j` has no predecessor in `[0, j)`.
    pub fn nearest_pred(&mut self, j: u64) -> Result<Option<u64>> {
        self.check(j)?;
        if j == 0 {
            return Ok(None);
        }
        let idx = j as usize;
        if self.near.len() <= idx {
            self.near.resize(idx + 1, 0);
        }
        if self.near[idx] == 0 {
            self.near[idx] = self.draw_near(j);
        }
        Ok((self.near[idx] != u64::MAX).then_some(self.near[idx]))
    }

    /// Whether `(i, j)` is an edge.
    pub fn edge(&mut self, i: u64, j: u64) -> Result<bool> {
        debug_assert!(i < j);
        let d = j - i;
        match self.nearest_pred(j)? {
            None => Ok(false),
            Some(near) if d < near => Ok(false),
            Some(near) if d == near => Ok(true),
            Some(_) => {
                if let Some(&b) = self.far.get(&(i, j)) {
                    return Ok(b);
                }
                let b = self.rng.bernoulli(self.profile.prob(d));
                self.far.insert((i, j), b);
                Ok(b)
            }
        }
    }

    /// Distance from `i` to its nearest successor.
    pub fn nearest_succ(&mut self, i: u64) -> Result<u64> {
        let mut k = i + 1;
        loop {
            if self.edge(i, k)? {
                return Ok(k - i);
            }
            k += 1;
        }
    }

    /// Longest path length from `a` to `b` through vertices of `[a, b]`, `-1` if none.
    pub fn longest_between(&mut self, a: u64, b: u64) -> Result<i64> {
        let len = (b - a) as usize;
        let mut l = vec![-1i64; len + 1];
        l[0] = 0;
        for j in 1..=len {
            let mut best = -1;
            for i in 0..j {
                if l[i] >= 0 && self.edge(a + i as u64, a + j as u64)? {
                    best = best.max(l[i] + 1);
                }
            }
            l[j] = best;
        }
        Ok(l[len])
    }
}

/// Settings for [`next_skeleton_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonSearch {
    /// Largest vertex the search may touch.
    pub horizon: u64,
    /// How far past a candidate its forward reachability is checked.
    pub forward_window: u64,
}

impl SkeletonSearch {
    /// Forward window chosen so that `Σ_{d=w+1}^{8w} Q_d ≤ tol`.
    pub fn for_profile(profile: &DistanceProfile, tol: f64, horizon: u64) -> Self {
        let cap = horizon.min(1 << 16) as usize;
        let q = profile.survival(8 * cap.max(1));
        let mut w = 1usize;
        while w < cap && q[w..8 * w].iter().sum::<f64>() > tol {
            w = (w * 5 / 4).max(w + 1);
        }
        Self { horizon, forward_window: w.min(cap) as u64 }
    }
}

/// Result of one renewal search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonStep {
    /// The least `j ≥ 1` with `[0, j-1] ⇝ j ⇝ (j, ∞)`.
    pub point: u64,
    /// Number of candidates tried.
    pub attempts: u32,
}

/// Finds the least `j ≥ 1` reached from all of `[0, j)` and reaching everything after it.
///
/// Candidates alternate between two searches. From a base `b` the next candidate
/// is the first `j` past the last failure with `i + r(i) ≤ j` for all `i ∈ [b, j)`,
/// `r(i)` the nearest-successor distance. A candidate `v` is accepted when every
/// `k ∈ (v, v + forward_window]` has its nearest predecessor at or after `v`;
/// otherwise the first failing `k` is recorded and `v` becomes the next base.
/// In Palm mode the returned vertex is the gap to the next skeleton point.
pub fn next_skeleton_point(g: &mut LazyGraph, search: &SkeletonSearch) -> Result<SkeletonStep> {
    let mut failure = 0u64;
    let mut attempts = 0u32;
    // reach = max_{i ∈ [base, j)} (i + r(i)); a candidate j needs reach ≤ j.
    let mut j = 1u64;
    let mut reach = g.nearest_succ(0)?;
    loop {
        if j > failure && reach <= j {
            attempts += 1;
            let mut failed = None;
            for k in j + 1..=j + search.forward_window {
                match g.nearest_pred(k)? {
                    Some(d) if k - d >= j => {}
                    _ => {
                        failed = Some(k);
                        break;
                    }
                }
            }
            match failed {
                None => return Ok(SkeletonStep { point: j, attempts }),
                Some(k) => {
                    failure = k;
                    reach = j + g.nearest_succ(j)?;
                    j += 1;
                    continue;
                }
            }
        }
        reach = reach.max(j + g.nearest_succ(j)?);
        j += 1;
        if j > search.horizon {
            return Err(LppError::Resource(format!(
                "no skeleton point found before the horizon {} ({attempts} candidates rejected)",
                search.horizon
            )));
        }
    }
}

/// Outcome of the central limit experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CltReport {
    /// Plug-in speed from the same run, mean of `L_n / n`.
    pub c_hat: f64,
    /// Variance of `L - Ĉ·(gap)` over independent skeleton cycles.
    pub sigma2: f64,
    /// Kolmogorov-Smirnov distance of the standardized lengths to the standard normal.
    pub ks: f64,
    /// `sqrt(reps) * ks`, to compare with the asymptotic critical values.
    pub ks_scaled: f64,
    /// Number of skeleton cycles used for `sigma2`.
    pub cycles: usize,
    /// `p = 1`: lengths are deterministic and no normal limit exists.
    pub degenerate: bool,
}

/// Standardizes longest path lengths of `n`-vertex graphs and measures their distance to normality.
///
/// Lengths come from the bin model started from one saturated ball, whose front
/// after `n - 1` geometric letters has the law of the longest path among `n`
/// vertices. The variance comes from `cycles` independent skeleton cycles of the
/// Palm graph, and `λ` is the exact skeleton density.
pub fn clt_experiment(p: f64, n: usize, reps: usize, cycles: usize, seed: u64) -> Result<CltReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("edge probability {p} outside (0, 1]")));
    }
    if n < 2 || reps < 2 || cycles < 2 {
        return Err(invalid("need n, reps and cycles of at least 2"));
    }
    if p == 1.0 {
        return Ok(CltReport { c_hat: 1.0, sigma2: 0.0, ks: 0.0, ks_scaled: 0.0, cycles: 0, degenerate: true });
    }
    let law = LetterLaw::Geometric(p);
    let x0 = Configuration::saturated_single();
    let lengths: Vec<f64> = replicate(reps, seed, |rng| {
        let mut x = x0.clone();
        for _ in 1..n {
            x.apply(law.sample(rng));
        }
        x.front() as f64
    });
    let c_hat = lengths.iter().sum::<f64>() / (reps as f64 * n as f64);

    let profile = DistanceProfile::Constant(p);
    let search = SkeletonSearch::for_profile(&profile, 1e-12, u64::MAX / 4);
    let cycle_stream = seed.wrapping_add(0xC1C1_E5);
    let pieces: Vec<Result<(f64, f64)>> = replicate(cycles, cycle_stream, |rng| {
        let mut g = LazyGraph::new(profile.clone(), true, search.horizon, rng.clone())?;
        let step = next_skeleton_point(&mut g, &search)?;
        let l = g.longest_between(0, step.point)?;
        Ok((l as f64, step.point as f64))
    });
    let pieces: Vec<(f64, f64)> = pieces.into_iter().collect::<Result<_>>()?;
    let centered: Vec<f64> = pieces.iter().map(|(l, gap)| l - c_hat * gap).collect();
    let sigma2 = MonteCarloSummary::from_samples(&centered)?.variance;
    let lambda = skeleton_rate(p)?.lambda;
    let scale = (sigma2 * lambda * n as f64).sqrt();
    let z: Vec<f64> = lengths.iter().map(|l| (l - c_hat * n as f64) / scale).collect();
    let ks = ks_one_sample(&z, normal_cdf);
    Ok(CltReport { c_hat, sigma2, ks, ks_scaled: (reps as f64).sqrt() * ks, cycles, degenerate: false })
}

/// Maximum-weight path from 0 to `n` in a complete graph with streamed weights.
///
/// Returns the largest edge weight on the geodesic and its total weight. Ties
/// between candidate predecessors on the geodesic are an error.
fn stream_geodesic(n: usize, mut weight: impl FnMut() -> f64) -> Result<(f64, f64)> {
    let mut w = vec![0.0f64; n + 1];
    let mut pred = vec![0usize; n + 1];
    let mut pred_weight = vec![0.0f64; n + 1];
    let mut tied = vec![false; n + 1];
    for j in 1..=n {
        let (mut best, mut arg, mut arg_w, mut tie) = (f64::NEG_INFINITY, 0, 0.0, false);
        for (i, &wi) in w.iter().enumerate().take(j) {
            let u = weight();
            let v = wi + u;
            if v > best {
                (best, arg, arg_w, tie) = (v, i, u, false);
            } else if v == best {
                tie = true;
            }
        }
        w[j] = best;
        pred[j] = arg;
        pred_weight[j] = arg_w;
        tied[j] = tie;
    }
    let mut v = n;
    let mut heaviest = f64::NEG_INFINITY;
    while v > 0 {
        if tied[v] {
            return Err(LppError::GeodesicNotUnique(format!("two maximal predecessors of vertex {v}")));
        }
        heaviest = heaviest.max(pred_weight[v]);
        v = pred[v];
    }
    Ok((heaviest, w[n]))
}

/// Largest edge charge on the unique maximum-charge path from 0 to `n`.
pub fn heaviest_geodesic_edge(w: &GraphWindow) -> Result<f64> {
    let mut cursor = (1usize, 0usize);
    stream_geodesic(w.n, || {
        let (j, i) = cursor;
        let c = w.charge(i, j);
        cursor = if i + 1 == j { (j + 1, 0) } else { (j, i + 1) };
        c
    })
    .map(|(h, _)| h)
}

/// Regression of `log h_n` on `log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyEdgeReport {
    /// Least-squares slope.
    pub slope: f64,
    /// `(n, mean log h_n)` per grid point.
    pub points: Vec<(usize, f64)>,
}

/// Estimates the growth exponent of the heaviest geodesic edge under Pareto(`s`) weights on the complete graph.
pub fn heavy_edge_exponent(s: f64, n_grid: &[usize], reps: usize, seed: u64) -> Result<HeavyEdgeReport> {
    if !(s > 2.0 && s.is_finite()) {
        return Err(invalid(format!("tail index {s} must exceed 2")));
    }
    if n_grid.len() < 2 || n_grid.contains(&0) || reps == 0 {
        return Err(invalid("need at least two positive grid sizes and one replica"));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for (g, &n) in n_grid.iter().enumerate() {
        let logs: Vec<Result<f64>> = replicate(reps, seed.wrapping_add(g as u64 * 0x1_0000), |rng| {
            stream_geodesic(n, || pareto(s, rng)).map(|(h, _)| h.ln())
        });
        let logs: Vec<f64> = logs.into_iter().collect::<Result<_>>()?;
        points.push((n, logs.iter().sum::<f64>() / reps as f64));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / xs.len() as f64;
    let sxy: f64 = xs.iter().zip(&points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(HeavyEdgeReport { slope: sxy / sxx, points })
}

/// `b_n = N^{1/s}` with `N = n(n+1)/2`, the `1 - 1/N` quantile of Pareto(`s`).
pub fn heavy_tail_scale(s: f64, n: usize) -> f64 {
    ((n * (n + 1) / 2) as f64).powf(1.0 / s)
}

/// Samples of `W_{0,n} / b_n` under Pareto(`s`) weights, `0 < s < 2`, on the complete graph.
///
/// Replica `r` uses stream `(seed, r)` and the column order of [`sample_window`].
pub fn heavy_tail_scaling(s: f64, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 2.0) {
        return Err(invalid(format!("tail index {s} must lie in (0, 2)")));
    }
    if n == 0 || reps == 0 {
        return Err(invalid("need n and reps positive"));
    }
    let b = heavy_tail_scale(s, n);
    let out: Vec<Result<f64>> = replicate(reps, seed, |rng| {
        let mut w = vec![0.0f64; n + 1];
        for j in 1..=n {
            let mut best = f64::NEG_INFINITY;
            for &wi in w.iter().take(j) {
                best = best.max(wi + pareto(s, rng));
            }
            w[j] = best;
        }
        Ok(w[n] / b)
    });
    out.into_iter().collect()
}

/// Report of [`gap_moment_diagnostic`].
#[derive(Debug, Clone, PartialEq)]
pub struct GapMomentReport {
    /// Partial sums of `Σ k^m Q_k` at doubling cutoffs.
    pub partial_sums: Vec<(usize, f64)>,
    /// Whether the series looks summable: the last block ratio is below 0.9.
    pub series_finite: bool,
    /// Whether `Σ Q_k` itself is summable (a skeleton exists).
    pub skeleton_exists: bool,
    /// Empirical `m`-th moment of gaps from `samples` and `4·samples` cycles, when a skeleton exists.
    pub moments: Option<(f64, f64)>,
    /// Relative change between the two moments.
    pub relative_change: Option<f64>,
    /// Set when the series diverges or the empirical moment moved by more than 10%.
    pub instability: bool,
}

/// Partial sums of `Σ k^m Q_k` at `k = 1, 2, 4, ...` and whether the last dyadic block shrank.
///
/// A term behaving like `k^{-a}` gives blocks scaling like `2^{(1-a)t}`, so a
/// ratio of successive blocks below 0.9 is read as convergence. Exponents
/// within a few percent of the boundary are misread; the laws used here are far from it.
fn block_sums(q: &[f64], m: i32) -> (Vec<(usize, f64)>, bool) {
    let mut sums: Vec<(usize, f64)> = Vec::new();
    let mut acc = 0.0;
    let mut next = 1usize;
    for (idx, &qk) in q.iter().enumerate() {
        let k = idx + 1;
        acc += (k as f64).powi(m) * qk;
        if k == next {
            sums.push((k, acc));
            next *= 2;
        }
    }
    let t = sums.len();
    if t < 3 {
        return (sums, true);
    }
    let last = sums[t - 1].1 - sums[t - 2].1;
    let prev = sums[t - 2].1 - sums[t - 3].1;
    let finite = last <= 1e-15 * acc || last < 0.9 * prev;
    (sums, finite)
}

/// Checks that the series `Σ k^m Q_k` and the empirical `m`-th gap moment tell the same story.
///
/// Gaps are sampled as Palm cycles through [`next_skeleton_point`]. With a
/// finite series the empirical moment should be stable when the sample grows
/// fourfold; a divergent series flags instability.
pub fn gap_moment_diagnostic(
    profile: &DistanceProfile,
    m: u32,
    samples: usize,
    seed: u64,
) -> Result<GapMomentReport> {
    profile.validate()?;
    if m == 0 || samples < 2 {
        return Err(invalid("need a positive moment order and at least 2 samples"));
    }
    const K_MAX: usize = 1 << 22;
    let q = profile.survival(K_MAX);
    let (partial_sums, series_finite) = block_sums(&q, m as i32);
    let (_, skeleton_exists) = block_sums(&q, 0);
    if profile.prob(1) >= 1.0 {
        return Ok(GapMomentReport {
            partial_sums,
            series_finite: true,
            skeleton_exists: true,
            moments: Some((1.0, 1.0)),
            relative_change: Some(0.0),
            instability: false,
        });
    }
    if !skeleton_exists {
        return Ok(GapMomentReport {
            partial_sums,
            series_finite,
            skeleton_exists,
            moments: None,
            relative_change: None,
            instability: true,
        });
    }
    let search = SkeletonSearch::for_profile(profile, 1e-5, 1 << 26);
    let moment = |count: usize, stream: u64| -> Result<f64> {
        let gaps: Vec<Result<f64>> = replicate(count, stream, |rng| {
            let mut g = LazyGraph::new(profile.clone(), true, search.horizon, rng.clone())?;
            Ok(next_skeleton_point(&mut g, &search)?.point as f64)
        });
        let gaps: Vec<f64> = gaps.into_iter().collect::<Result<_>>()?;
        Ok(gaps.iter().map(|g| g.powi(m as i32)).sum::<f64>() / count as f64)
    };
    let small = moment(samples, seed)?;
    let large = moment(4 * samples, seed.wrapping_add(0x5EED))?;
    let rel = (large - small).abs() / small.max(f64::MIN_POSITIVE);
    Ok(GapMomentReport {
        partial_sums,
        series_finite,
        skeleton_exists,
        moments: Some((small, large)),
        relative_change: Some(rel),
        instability: !series_finite || rel > 0.1,
    })
}
