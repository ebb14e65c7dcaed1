//! Exact front speeds of finite-support infinite bin models.
//!
//! When every letter is at most `k`, the contents of the bins strictly above
//! `B(X, k)` evolve as an autonomous Markov chain on compositions of integers
//! `< k`, which has exactly `2^(k-1)` states. Its stationary law gives the
//! front speed in closed form, and truncating a geometric letter law at `k`
//! from below (`ξ > k` becomes `∞`) and from above (`ξ > k` becomes `k`)
//! brackets the growth constant `C(p)` between two computable speeds.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, LppError, Result};

/// Largest supported projection order.
pub const MAX_ORDER: usize = 20;

/// Up to this order the stationary law comes from a dense LU solve; above it,
/// from power iteration on the sparse transition lists.
pub const DENSE_MAX_ORDER: usize = 8;

const RESIDUAL_TOL: f64 = 1e-12;

/// A letter of a finite-support selection law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Shift the configuration: the front moves, contents are unchanged.
    Zero,
    /// Select the `j`-th ball from the right.
    Finite(u32),
    /// Select nothing; the configuration is unchanged.
    Infinite,
}

/// Top-of-configuration summary: bin contents above `B(X, k)`, deepest first.
///
/// The last entry is the front bin. The empty state means the front bin alone
/// holds at least `k` balls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectedState {
    /// Bin contents, deepest first; all positive with total at most `k - 1`.
    pub bins: Vec<u32>,
    /// Projection order.
    pub k: u32,
}

impl ProjectedState {
    /// The empty state of order `k`.
    pub fn empty(k: u32) -> Self {
        Self { bins: Vec::new(), k }
    }

    /// Total number of balls recorded.
    pub fn total(&self) -> u32 {
        self.bins.iter().sum()
    }

    /// Content of the front bin, or `k` for the empty state (where it is at least `k`).
    pub fn front_content(&self) -> u32 {
        self.bins.last().copied().unwrap_or(self.k)
    }

    /// Applies a letter, returning the new state and whether the front advanced.
    pub fn transition(&self, letter: Letter) -> (ProjectedState, bool) {
        match letter {
            Letter::Zero => (self.clone(), true),
            Letter::Infinite => (self.clone(), false),
            Letter::Finite(xi) => {
                debug_assert!(xi >= 1 && xi <= self.k);
                let moved = xi <= self.front_content();
                let mut bins = self.bins.clone();
                push_ball(&mut bins, xi);
                normalize(&mut bins, self.k);
                (ProjectedState { bins, k: self.k }, moved)
            }
        }
    }
}

/// Adds the ball selected by letter `xi` to a deepest-first bin list.
///
/// If the `xi`-th ball from the right is recorded, the ball goes one bin to its
/// right (a new front bin if it sat in the front). Otherwise it lies in the
/// unrecorded region, which ends exactly one bin below the first recorded bin.
pub(crate) fn push_ball(bins: &mut Vec<u32>, xi: u32) {
    let mut seen = 0;
    for b in (0..bins.len()).rev() {
        seen += bins[b];
        if seen >= xi {
            if b + 1 == bins.len() {
                bins.push(1);
            } else {
                bins[b + 1] += 1;
            }
            return;
        }
    }
    match bins.first_mut() {
        Some(first) => *first += 1,
        None => bins.push(1),
    }
}

/// Keeps the longest suffix of bins whose total is below `k`.
pub(crate) fn normalize(bins: &mut Vec<u32>, k: u32) {
    let mut total = 0;
    let mut keep_from = bins.len();
    for b in (0..bins.len()).rev() {
        if total + bins[b] > k - 1 {
            break;
        }
        total += bins[b];
        keep_from = b;
    }
    bins.drain(..keep_from);
}

/// All `2^(k-1)` projected states of order `k`, ordered by total and then lexicographically.
pub fn enumerate_states(k: usize) -> Result<Vec<ProjectedState>> {
    if !(2..=MAX_ORDER).contains(&k) {
        return Err(invalid(format!("projection order {k} outside 2..={MAX_ORDER}")));
    }
    Ok(enumerate_states_unchecked(k as u32))
}

/// As [`enumerate_states`] but also accepts `k = 1` (the single empty state).
pub(crate) fn enumerate_states_unchecked(k: u32) -> Vec<ProjectedState> {
    let mut out = vec![ProjectedState::empty(k)];
    for total in 1..k {
        let mut comps = Vec::new();
        compositions(total, &mut Vec::new(), &mut comps);
        comps.sort();
        out.extend(comps.into_iter().map(|bins| ProjectedState { bins, k }));
    }
    out
}

fn compositions(rest: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if rest == 0 {
        out.push(prefix.clone());
        return;
    }
    for first in 1..=rest {
        prefix.push(first);
        compositions(rest - first, prefix, out);
        prefix.pop();
    }
}

/// Applies a letter to a state; see [`ProjectedState::transition`].
pub fn transition(s: &ProjectedState, xi: Letter) -> (ProjectedState, bool) {
    s.transition(xi)
}

/// A selection law supported on `{0} ∪ {1..k} ∪ {∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMu {
    /// Mass of the shift letter 0.
    pub zero: f64,
    /// `masses[j - 1]` is the mass of letter `j`, for `j = 1..=k`.
    pub masses: Vec<f64>,
    /// Mass of the identity letter ∞.
    pub infinite: f64,
}

impl FiniteMu {
    /// Builds a law and checks that it is a probability vector.
    pub fn new(zero: f64, masses: Vec<f64>, infinite: f64) -> Result<Self> {
        let all = std::iter::once(zero).chain(masses.iter().copied()).chain(std::iter::once(infinite));
        let mut total = 0.0;
        for m in all {
            if !(0.0..=1.0).contains(&m) {
                return Err(invalid(format!("mass {m} is not a probability")));
            }
            total += m;
        }
        if (total - 1.0).abs() > 1e-12 || masses.is_empty() {
            return Err(invalid(format!("masses sum to {total}, expected 1")));
        }
        Ok(Self { zero, masses, infinite })
    }

    /// Largest finite letter `k`.
    pub fn k(&self) -> usize {
        self.masses.len()
    }

    /// Geometric(p) letters truncated at `k`, with the overflow mass sent to `∞`.
    pub fn geometric_lower(p: f64, k: usize) -> Result<Self> {
        let (masses, tail) = geometric_head(p, k)?;
        Self::new(0.0, masses, tail)
    }

    /// Geometric(p) letters truncated at `k`, with the overflow mass sent to `k`.
    pub fn geometric_upper(p: f64, k: usize) -> Result<Self> {
        let (mut masses, tail) = geometric_head(p, k)?;
        masses[k - 1] += tail;
        Self::new(0.0, masses, 0.0)
    }

    /// Geometric(p) letters truncated at `k`, with the overflow mass sent to `0`.
    pub fn geometric_shift(p: f64, k: usize) -> Result<Self> {
        let (masses, tail) = geometric_head(p, k)?;
        Self::new(tail, masses, 0.0)
    }

    /// Mass of `{0} ∪ {1..=l}`: the probability that the front advances
    /// when its bin holds `l` balls (or at least `k` for `l = k`).
    fn moving_mass(&self, l: usize) -> f64 {
        self.zero + self.masses[..l.min(self.k())].iter().sum::<f64>()
    }
}

fn geometric_head(p: f64, k: usize) -> Result<(Vec<f64>, f64)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("geometric parameter {p} outside (0, 1)")));
    }
    if k == 0 {
        return Err(invalid("truncation level must be positive"));
    }
    let q = 1.0 - p;
    let masses = (0..k).map(|j| p * q.powi(j as i32)).collect();
    Ok((masses, q.powi(k as i32)))
}

/// Transition structure of the projected chain for a given law.
#[derive(Debug, Clone)]
pub struct ProjectedChain {
    /// States in [`enumerate_states`] order.
    pub states: Vec<ProjectedState>,
    /// `edges[s]` lists `(target, probability)` pairs, merged per target.
    pub edges: Vec<Vec<(usize, f64)>>,
}

impl ProjectedChain {
    /// Assembles the chain of order `mu.k()`.
    pub fn new(mu: &FiniteMu) -> Result<Self> {
        let k = mu.k();
        if k == 1 {
            return Err(invalid("order 1 has a single state; use order 2 with zero mass on 2"));
        }
        let states = enumerate_states(k)?;
        let index: HashMap<&ProjectedState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut edges = Vec::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
            let stay = mu.zero + mu.infinite;
            if stay > 0.0 {
                row.push((i, stay));
            }
            for (j, &m) in mu.masses.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let (t, _) = s.transition(Letter::Finite(j as u32 + 1));
                let ti = index[&t];
                match row.iter_mut().find(|e| e.0 == ti) {
                    Some(e) => e.1 += m,
                    None => row.push((ti, m)),
                }
            }
            edges.push(row);
        }
        Ok(Self { states, edges })
    }

    /// `‖πP - π‖_∞`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let next = self.step(pi);
        next.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn step(&self, pi: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; pi.len()];
        for (s, row) in self.edges.iter().enumerate() {
            for &(t, w) in row {
                next[t] += pi[s] * w;
            }
        }
        next
    }

    /// Stationary distribution, by dense LU for small orders and power iteration otherwise.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        let k = self.states[0].k as usize;
        let pi = if k <= DENSE_MAX_ORDER { self.stationary_dense()? } else { self.stationary_power()? };
        let residual = self.residual(&pi);
        if residual >= RESIDUAL_TOL || pi.iter().any(|&x| x < -1e-15) {
            return Err(LppError::Numeric { message: format!("stationary solve at order {k}"), residual });
        }
        Ok(pi)
    }

    fn stationary_dense(&self) -> Result<Vec<f64>> {
        let n = self.states.len();
        // Rows of (P^T - I) with the last row replaced by the normalization Σπ = 1.
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (s, row) in self.edges.iter().enumerate() {
            for &(t, w) in row {
                a[(t, s)] += w;
            }
        }
        for i in 0..n {
            a[(i, i)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        let sol = a.lu().solve(&b).ok_or_else(|| LppError::Numeric {
            message: "singular stationary system".into(),
            residual: f64::INFINITY,
        })?;
        Ok(sol.iter().map(|&x| x.max(0.0)).collect())
    }

    fn stationary_power(&self) -> Result<Vec<f64>> {
        let n = self.states.len();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..1_000_000 {
            let next = self.step(&pi);
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-15 {
                let s: f64 = pi.iter().sum();
                pi.iter_mut().for_each(|x| *x /= s);
                return Ok(pi);
            }
        }
        Err(LppError::Numeric { message: "power iteration did not converge".into(), residual: self.residual(&pi) })
    }
}

/// Front speed `v_μ = Σ_s π(s) μ({0} ∪ {1..L(s)})` of the infinite bin model with law `mu`.
pub fn exact_speed(mu: &FiniteMu) -> Result<f64> {
    let k = mu.k();
    if mu.masses[k - 1] <= 0.0 {
        return Err(invalid(format!("the largest letter {k} must carry positive mass")));
    }
    let chain = ProjectedChain::new(mu)?;
    let pi = chain.stationary()?;
    Ok(chain.states.iter().zip(&pi).map(|(s, w)| w * mu.moving_mass(s.front_content() as usize)).sum())
}

/// Lower and upper bounds on `C(p)` from the order-`k` truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Speed with overflow letters mapped to `∞`.
    pub lower: f64,
    /// Speed with overflow letters mapped to `k`.
    pub upper: f64,
}

impl Bounds {
    /// Width of the bracket.
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// The bracket `lower ≤ C(p) ≤ upper` from the order-`k` chains.
///
/// Also checks that the chain with overflow sent to `0` is faster than the
/// lower chain by exactly the overflow mass, and that the gap is at most `(1-p)^k`.
pub fn bounds_c(p: f64, k: usize) -> Result<Bounds> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("edge probability {p} outside (0, 1)")));
    }
    if k < 2 {
        return Err(invalid(format!("order {k} below 2")));
    }
    let tail = (1.0 - p).powi(k as i32);
    let lower = exact_speed(&FiniteMu::geometric_lower(p, k)?)?;
    let upper = exact_speed(&FiniteMu::geometric_upper(p, k)?)?;
    let shifted = exact_speed(&FiniteMu::geometric_shift(p, k)?)?;
    if (shifted - lower - tail).abs() > 1e-10 {
        return Err(LppError::Internal(format!(
            "shift identity fails at p={p}, k={k}: {shifted} != {lower} + {tail}"
        )));
    }
    let b = Bounds { lower, upper };
    if b.gap() > tail + 1e-12 || b.gap() < -1e-12 {
        return Err(LppError::Internal(format!("gap {} exceeds (1-p)^k = {tail}", b.gap())));
    }
    Ok(b)
}
