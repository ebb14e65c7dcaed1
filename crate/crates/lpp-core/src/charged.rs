//! The two-weights model: present edges carry charge 1 and absent ones charge `x`.
//!
//! Its speed `C(p, x)` is increasing and convex in `x`. The kinks are exactly at
//! the critical values of `x`, those for which some finite graph has two
//! maximal paths with different numbers of absent ("red") edges. This module
//! estimates `C(p, x)`, builds the explicit critical witnesses and verifies
//! criticality of a given graph exactly with a dynamic program over
//! (vertex, red count).

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, LppError, Result};
use crate::graph::{longest_path_profile, max_charge_profile, sample_window, EdgeLaw, GraphWindow};
use crate::harness::{run_replicas, MonteCarloSummary};

/// Monte Carlo estimate of `C(p, x)` from `W^x_{0,n}/n`.
///
/// At `x = -∞` the model is the plain random graph and the longest path in the
/// window is used, since `W_{0,n}` itself is `-∞` whenever `0` does not reach `n`.
pub fn estimate_cpx(p: f64, x: f64, n: usize, reps: usize, seed: u64) -> Result<MonteCarloSummary> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("edge probability {p} must lie in (0, 1)")));
    }
    if x.is_nan() || x == f64::INFINITY {
        return Err(invalid(format!("charge {x} must be a real number or -∞")));
    }
    if n == 0 || reps < 2 {
        return Err(invalid("need a positive window and at least two replicas"));
    }
    if x == f64::NEG_INFINITY {
        let law = EdgeLaw::Bernoulli(p);
        return run_replicas(
            |rng| {
                let w = sample_window(n, &law, rng).expect("validated");
                longest_path_profile(&w).into_iter().max().unwrap_or(0) as f64 / n as f64
            },
            reps,
            seed,
        );
    }
    if x <= 1.0 {
        let law = EdgeLaw::TwoAtom { p, x };
        return run_replicas(|rng| max_charge_profile(&sample_window(n, &law, rng).expect("validated"))[n] / n as f64, reps, seed);
    }
    // Charges above 1 fall outside the two-atom law; the same edge draws are recharged.
    let law = EdgeLaw::Bernoulli(p);
    run_replicas(
        |rng| {
            let bits = sample_window(n, &law, rng).expect("validated");
            let w = GraphWindow::from_charges(n, |i, j| if bits.present(i, j) { 1.0 } else { x }).expect("finite charges");
            max_charge_profile(&w)[n] / n as f64
        },
        reps,
        seed,
    )
}

/// `C(q, 0) = (Σ_{n≥1} (1-q)^{n(n-1)/2})^{-1}`.
///
/// The terms decay faster than geometrically, so the sum stops once the next
/// term drops below `1e-18` of the running sum; the remaining tail is then at
/// most a geometric series with the same ratio.
pub fn c_at_zero(q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(invalid(format!("edge probability {q} must lie in (0, 1]")));
    }
    let r = 1.0 - q;
    let (mut sum, mut term, mut k) = (0.0f64, 1.0f64, 1u32);
    while term > 1e-18 * sum.max(1.0) {
        sum += term;
        // term_{k+1} = term_k · r^k
        term *= r.powi(k as i32);
        k += 1;
    }
    Ok(1.0 / sum)
}

/// The three estimates compared by [`scaling_check`], all carrying Monte Carlo errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    /// `Ĉ(p, x)`.
    pub direct: MonteCarloSummary,
    /// `x · Ĉ(1-p, 1/x)`.
    pub reciprocal: MonteCarloSummary,
    /// `x · Ĉ(1-p, x)`.
    pub same_charge: MonteCarloSummary,
}

fn scaled(s: MonteCarloSummary, x: f64) -> MonteCarloSummary {
    MonteCarloSummary { mean: s.mean * x, variance: s.variance * x * x, ci95_halfwidth: s.ci95_halfwidth * x, ..s }
}

/// Estimates both forms of the scaling relation without asserting either.
pub fn scaling_check(p: f64, x: f64, n: usize, reps: usize, seed: u64) -> Result<ScalingReport> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("scaling needs a positive finite charge, got {x}")));
    }
    Ok(ScalingReport {
        direct: estimate_cpx(p, x, n, reps, seed)?,
        reciprocal: scaled(estimate_cpx(1.0 - p, 1.0 / x, n, reps, seed ^ 0x5151)?, x),
        same_charge: scaled(estimate_cpx(1.0 - p, x, n, reps, seed ^ 0xA2A2)?, x),
    })
}

/// The `(N, n)`-balanced 0/1 sequence: `n` ones spread over `N` slots as evenly as possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedSeq {
    /// `v_1..v_N`.
    pub bits: Vec<u8>,
    /// Length `N`.
    pub len: usize,
    /// Number of ones.
    pub ones: usize,
}

impl BalancedSeq {
    /// Whether the window sums, suffix sums and first entry satisfy the defining conditions.
    pub fn is_valid(&self) -> bool {
        let (big, n) = (self.len, self.ones);
        if self.bits.len() != big || self.bits.first() != Some(&1) {
            return false;
        }
        let mut prefix = vec![0usize; big + 1];
        for k in 0..big {
            prefix[k + 1] = prefix[k] + self.bits[k] as usize;
        }
        for i in 0..big {
            for j in i + 1..=big {
                let s = prefix[j] - prefix[i];
                let (lo, hi) = ((j - i) * n / big, ((j - i) * n).div_ceil(big));
                if s != lo && s != hi {
                    return false;
                }
            }
            if prefix[big] - prefix[i] != (big - i) * n / big {
                return false;
            }
        }
        true
    }
}

/// Builds the `(N, n)`-balanced sequence as a rotated mechanical word.
///
/// `v_k = ⌊kn/N + θ⌋ - ⌊(k-1)n/N + θ⌋` for the first offset `θ` on the grid
/// `{0, 1/(2N), 2/(2N), ...}` whose word passes the exhaustive check.
pub fn balanced_sequence(big_n: usize, n: usize) -> Result<BalancedSeq> {
    if n == 0 || n > big_n {
        return Err(invalid(format!("need 1 ≤ n ≤ N, got N = {big_n}, n = {n}")));
    }
    let den = 2 * big_n;
    for a in 0..den {
        // ⌊(2kn + a) / 2N⌋ is ⌊kn/N + a/(2N)⌋ in integers.
        let floor_at = |k: usize| (2 * k * n + a) / den;
        let bits = (1..=big_n).map(|k| (floor_at(k) - floor_at(k - 1)) as u8).collect();
        let seq = BalancedSeq { bits, len: big_n, ones: n };
        if seq.is_valid() {
            return Ok(seq);
        }
    }
    Err(LppError::Internal(format!("no offset produced a ({big_n}, {n})-balanced sequence")))
}

/// A rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Rational {
    /// `num/den` reduced.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("zero denominator"));
        }
        let g = gcd(num, den).max(1) * den.signum();
        Ok(Rational { num: num / g, den: den / g })
    }

    /// Parses `a`, `a/b` or `-a/b`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || invalid(format!("cannot parse rational '{s}'"));
        match s.trim().split_once('/') {
            Some((a, b)) => Self::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => Self::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }

    /// Numerator.
    pub fn num(&self) -> i64 {
        self.num
    }

    /// Denominator, always positive.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Nearest float.
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A graph on `0..=n` whose edges are blue; every other increasing pair is red.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessGraph {
    /// Last vertex.
    pub n: usize,
    /// Blue edges `(i, j)` with `i < j ≤ n`.
    pub blue_edges: BTreeSet<(usize, usize)>,
}

impl WitnessGraph {
    /// A graph from an edge list; rejects pairs that are not increasing or leave `0..=n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let blue_edges: BTreeSet<_> = edges.into_iter().collect();
        if let Some(&(i, j)) = blue_edges.iter().find(|&&(i, j)| i >= j || j > n) {
            return Err(invalid(format!("edge ({i}, {j}) is not an increasing pair in 0..={n}")));
        }
        Ok(WitnessGraph { n, blue_edges })
    }

    /// Whether `(i, j)` is blue.
    pub fn is_blue(&self, i: usize, j: usize) -> bool {
        self.blue_edges.contains(&(i, j))
    }

    /// `reach[i][j]`: a blue path from `i` to `j` exists (reflexive).
    fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut reach = vec![vec![false; n + 1]; n + 1];
        for i in (0..=n).rev() {
            reach[i][i] = true;
            for &(_, j) in self.blue_edges.range((i, 0)..(i + 1, 0)) {
                for k in j..=n {
                    if reach[j][k] {
                        reach[i][k] = true;
                    }
                }
            }
        }
        reach
    }

    /// Membership in the admissible class: every interior vertex lies on a path
    /// from `0` to `n` and is incomparable with some other vertex.
    pub fn is_admissible(&self) -> bool {
        let n = self.n;
        let reach = self.reachability();
        (1..n).all(|j| reach[0][j] && reach[j][n] && (0..=n).any(|i| i != j && !reach[i.min(j)][i.max(j)]))
    }

    /// Blue and red edge counts of a path given by its vertices.
    pub fn counts(&self, path: &[usize]) -> (usize, usize) {
        let blue = path.windows(2).filter(|e| self.is_blue(e[0], e[1])).count();
        (blue, path.len().saturating_sub(1) - blue)
    }
}

/// Builds the explicit graph certifying that `x` is critical.
///
/// Supported values are `0`, `1/k` for `k ≥ 2`, the negative integers and the
/// negative non-integer rationals.
pub fn build_witness(x: Rational) -> Result<WitnessGraph> {
    let (num, den) = (x.num(), x.den());
    if num == 0 {
        return WitnessGraph::new(3, [(0, 1), (0, 2), (1, 3), (2, 3)]);
    }
    if num == 1 && den >= 2 {
        // Tie between 0 → 1 → K → K+1 and the all-short path, which has k red edges; K = k + 1.
        let big = den as usize + 1;
        let mut edges = vec![(0, 1), (big, big + 1), (1, big)];
        edges.extend((2..=big).map(|j| (0, j)));
        edges.extend((1..big).map(|j| (j, big + 1)));
        return WitnessGraph::new(big + 1, edges);
    }
    if num < 0 && den == 1 {
        let l = (-num) as usize;
        let n = 2 * l + 3;
        let mut edges: Vec<_> = (0..=l).map(|i| (i, i + 1)).collect();
        edges.extend((l + 2..n).map(|i| (i, i + 1)));
        edges.push((0, l + 2));
        edges.push((l + 1, n));
        return WitnessGraph::new(n, edges);
    }
    if num < 0 {
        // x = -l + s/t with 0 < s < t.
        let t = den as usize;
        let l = ((-num) as usize).div_ceil(t);
        let s = (l * t) - (-num) as usize;
        let v = balanced_sequence(t, t - s)?;
        let m = t * (l + 3) - (s + 1);
        let n = 3 * m;
        let mut a = vec![m, m + l + 1 + v.bits[0] as usize];
        for j in 2..=t {
            a.push(a[j - 1] + l + 2 + v.bits[j - 1] as usize);
        }
        if a[t] != 2 * m {
            return Err(LppError::Internal(format!("middle section ends at {} instead of {}", a[t], 2 * m)));
        }
        let mut edges: Vec<_> = (0..m).chain(2 * m..n).map(|i| (i, i + 1)).collect();
        edges.extend(a.windows(2).map(|w| (w[0], w[1])));
        for j in 0..t {
            let (lo, hi) = (a[j], a[j + 1]);
            // The block's first vertex is entered from the previous block and exits to n.
            let start = if j == 0 { lo + 1 } else { lo + 2 };
            if j > 0 {
                edges.push((lo + 1, n));
            }
            edges.push((0, start));
            edges.extend((start..hi - 1).map(|i| (i, i + 1)));
            edges.push(if j + 1 < t { (hi - 1, hi + 1) } else { (hi - 1, hi) });
        }
        return WitnessGraph::new(n, edges);
    }
    Err(invalid(format!("no witness construction for x = {x}")))
}

/// Outcome of [`verify_critical`].
#[derive(Debug, Clone, PartialEq)]
pub struct Criticality {
    /// Whether the graph lies in the admissible class.
    pub admissible: bool,
    /// `max_π (N(π) + x N̄(π))` over paths from 0 to n.
    pub max_charge: f64,
    /// Red counts achieved by maximal paths, increasing.
    pub maximal_red_counts: Vec<usize>,
    /// Two maximal paths with the smallest and largest red count, when they differ.
    pub certificate: Option<(Vec<usize>, Vec<usize>)>,
}

impl Criticality {
    /// The graph is admissible and its maximal paths disagree on the red count.
    pub fn is_critical(&self) -> bool {
        self.admissible && self.certificate.is_some()
    }
}

/// Absolute tolerance for ties between path charges.
const TIE_TOL: f64 = 1e-9;

/// Decides whether `g` witnesses criticality of `x`.
///
/// `best[j][r]` is the largest blue count of a path from 0 to `j` with exactly
/// `r` red edges, so the maximal charge is `max_r best[n][r] + x r` and the
/// maximal red counts are the maximizing `r`. Cost is `O(n³)`.
pub fn verify_critical(g: &WitnessGraph, x: f64) -> Result<Criticality> {
    if !x.is_finite() {
        return Err(invalid(format!("charge {x} must be finite")));
    }
    let n = g.n;
    const NONE: i64 = -1;
    let mut best = vec![vec![NONE; n + 1]; n + 1];
    let mut parent = vec![vec![usize::MAX; n + 1]; n + 1];
    best[0][0] = 0;
    for j in 1..=n {
        for i in 0..j {
            let blue = g.is_blue(i, j);
            for r in 0..=i {
                if best[i][r] == NONE {
                    continue;
                }
                let (nr, nb) = if blue { (r, best[i][r] + 1) } else { (r + 1, best[i][r]) };
                if nb > best[j][nr] {
                    best[j][nr] = nb;
                    parent[j][nr] = i;
                }
            }
        }
    }
    let value = |r: usize| best[n][r] as f64 + x * r as f64;
    let feasible: Vec<usize> = (0..=n).filter(|&r| best[n][r] != NONE).collect();
    let max_charge = feasible.iter().map(|&r| value(r)).fold(f64::NEG_INFINITY, f64::max);
    let maximal_red_counts: Vec<usize> = feasible.into_iter().filter(|&r| (value(r) - max_charge).abs() <= TIE_TOL).collect();
    let trace = |mut r: usize| {
        let mut path = vec![n];
        let mut j = n;
        while j > 0 {
            let i = parent[j][r];
            if !g.is_blue(i, j) {
                r -= 1;
            }
            path.push(i);
            j = i;
        }
        path.reverse();
        path
    };
    let certificate = match (maximal_red_counts.first(), maximal_red_counts.last()) {
        (Some(&lo), Some(&hi)) if lo != hi => Some((trace(lo), trace(hi))),
        _ => None,
    };
    Ok(Criticality { admissible: g.is_admissible(), max_charge, maximal_red_counts, certificate })
}

/// Every maximal path from 0 to n by brute force over all `2^{n-1}` paths.
pub fn maximal_paths_brute(g: &WitnessGraph, x: f64) -> Result<Vec<Vec<usize>>> {
    let n = g.n;
    if n == 0 || n > 24 {
        return Err(LppError::Resource(format!("brute-force enumeration limited to 1 ≤ n ≤ 24, got {n}")));
    }
    let mut best = f64::NEG_INFINITY;
    let mut out: Vec<Vec<usize>> = Vec::new();
    for mask in 0u32..(1 << (n - 1)) {
        let path: Vec<usize> = std::iter::once(0).chain((1..n).filter(|&v| mask >> (v - 1) & 1 == 1)).chain([n]).collect();
        let (b, r) = g.counts(&path);
        let w = b as f64 + x * r as f64;
        if w > best + TIE_TOL {
            best = w;
            out.clear();
        }
        if (w - best).abs() <= TIE_TOL {
            out.push(path);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainbounds::bounds_c;
    use crate::harness::RngStream;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    #[test]
    fn rationals() {
        assert_eq!(r("-22/14"), Rational::new(-11, 7).unwrap());
        assert_eq!(r("3/-6").to_string(), "-1/2");
        assert_eq!(r("4").den(), 1);
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("x").is_err());
    }

    #[test]
    fn zero_charge_series() {
        assert_eq!(c_at_zero(1.0).unwrap(), 1.0);
        let half = c_at_zero(0.5).unwrap();
        assert!((half - 0.609_149_711_066_228_6).abs() < 1e-15);
        assert_eq!((half * 1e6).floor(), 609_149.0);
        let partial: f64 = (1..60).map(|n| 0.7f64.powi(n * (n - 1) / 2)).sum();
        assert!((c_at_zero(0.3).unwrap() - 1.0 / partial).abs() < 1e-15);
        assert!(c_at_zero(0.0).is_err());
    }

    #[test]
    fn unit_charge_is_exact() {
        let s = estimate_cpx(0.3, 1.0, 200, 5, 1).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn limit_charge_matches_random_graph() {
        let b = bounds_c(0.5, 3).unwrap();
        let s = estimate_cpx(0.5, f64::NEG_INFINITY, 2000, 40, 2).unwrap();
        assert!(s.mean > b.lower && s.mean < b.upper, "{s:?} {b:?}");
    }

    #[test]
    fn zero_charge_estimate() {
        let s = estimate_cpx(0.5, 0.0, 2000, 60, 3).unwrap();
        let exact = c_at_zero(0.5).unwrap();
        assert!(s.within_sigmas(exact, 3.0), "{s:?} vs {exact}");
    }

    #[test]
    fn scaling_at_symmetric_point() {
        let rep = scaling_check(0.5, 2.0, 1000, 40, 4).unwrap();
        assert!(crate::harness::agree_within(&rep.direct, &rep.reciprocal, 3.0), "{rep:?}");
        assert!(scaling_check(0.3, 2.0, 100, 4, 5).is_ok());
        assert!(scaling_check(0.3, -1.0, 100, 4, 5).is_err());
    }

    #[test]
    fn estimate_is_monotone_in_charge() {
        let xs = [-3.0, -1.0, -0.2, 0.0, 0.4, 0.9, 1.0];
        let est: Vec<f64> = xs.iter().map(|&x| estimate_cpx(0.4, x, 300, 8, 6).unwrap().mean).collect();
        assert!(est.windows(2).all(|w| w[0] <= w[1]), "{est:?}");
    }

    #[test]
    fn balanced_examples() {
        assert_eq!(balanced_sequence(7, 4).unwrap().bits, vec![1, 1, 0, 1, 0, 1, 0]);
        assert_eq!(balanced_sequence(5, 5).unwrap().bits, vec![1; 5]);
        assert_eq!(balanced_sequence(6, 1).unwrap().bits, vec![1, 0, 0, 0, 0, 0]);
        assert!(balanced_sequence(3, 4).is_err());
        assert!(balanced_sequence(3, 0).is_err());
    }

    #[test]
    fn balanced_sequences_are_unique() {
        for big in 1..=12usize {
            for n in 1..=big {
                let valid: Vec<Vec<u8>> = (0u32..1 << big)
                    .map(|mask| (0..big).map(|k| (mask >> k & 1) as u8).collect::<Vec<u8>>())
                    .filter(|bits| BalancedSeq { bits: bits.clone(), len: big, ones: n }.is_valid())
                    .collect();
                assert_eq!(valid, vec![balanced_sequence(big, n).unwrap().bits], "N={big} n={n}");
            }
        }
    }

    #[test]
    fn witness_zero() {
        let g = build_witness(r("0")).unwrap();
        assert_eq!(g.blue_edges, BTreeSet::from([(0, 1), (0, 2), (1, 3), (2, 3)]));
        let c = verify_critical(&g, 0.0).unwrap();
        assert!(c.is_critical());
        assert_eq!(c.max_charge, 2.0);
        let (a, b) = c.certificate.unwrap();
        assert_eq!(g.counts(&a).1, 0);
        assert_eq!(b, vec![0, 1, 2, 3]);
        assert!(!verify_critical(&g, 0.3).unwrap().is_critical());
    }

    #[test]
    fn negative_rational_witness_layout() {
        let g = build_witness(r("-11/7")).unwrap();
        assert_eq!(g.n, 93);
        let mut a = vec![31usize];
        while let Some(&(_, j)) = g.blue_edges.iter().find(|&&(i, j)| i == *a.last().unwrap() && j > i + 1 && j <= 62) {
            a.push(j);
        }
        let gaps: Vec<usize> = a.windows(2).map(|w| w[1] - w[0]).collect();
        assert_eq!(gaps, vec![4, 5, 4, 5, 4, 5, 4]);
    }

    #[test]
    fn witnesses_are_critical() {
        let mut xs: Vec<String> = vec!["0".into()];
        xs.extend((2..=9).map(|k| format!("1/{k}")));
        xs.extend((1..=6).map(|l| format!("-{l}")));
        for t in 2..=7i64 {
            for s in 1..t {
                if gcd(s, t) == 1 {
                    for l in 1..=3i64 {
                        xs.push(format!("{}/{t}", -l * t + s));
                    }
                }
            }
        }
        for x in &xs {
            let q = r(x);
            let g = build_witness(q).unwrap();
            assert!(g.is_admissible(), "x = {x}");
            let c = verify_critical(&g, q.to_f64()).unwrap();
            assert!(c.is_critical(), "x = {x}: {c:?}");
            let (a, b) = c.certificate.clone().unwrap();
            let charge = |p: &[usize]| {
                let (bl, rd) = g.counts(p);
                bl as f64 + q.to_f64() * rd as f64
            };
            assert!((charge(&a) - c.max_charge).abs() < 1e-9 && (charge(&b) - c.max_charge).abs() < 1e-9);
            assert_ne!(g.counts(&a).1, g.counts(&b).1);
            // Nudging x off the critical value leaves a single red count.
            for eps in [1e-3, -1e-3] {
                assert!(!verify_critical(&g, q.to_f64() + eps).unwrap().is_critical(), "x = {x} + {eps}");
            }
        }
    }

    #[test]
    fn unsupported_witness_values() {
        for x in ["1", "2", "3/4", "2/3"] {
            assert!(build_witness(r(x)).is_err(), "{x}");
        }
    }

    #[test]
    fn small_witness_certificates() {
        let g = build_witness(r("-1")).unwrap();
        assert_eq!(g.n, 5);
        assert!(verify_critical(&g, -1.0).unwrap().is_critical());
        // The same graph with charge -1/ℓ = -1 coincides here; at ℓ = 2 only -2 is critical.
        let g2 = build_witness(r("-2")).unwrap();
        assert!(verify_critical(&g2, -2.0).unwrap().is_critical());
        assert!(!verify_critical(&g2, -0.5).unwrap().is_critical());
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> WitnessGraph {
        let mut rng = RngStream::new(seed, 0);
        let mut edges = Vec::new();
        for j in 1..=n {
            for i in 0..j {
                if rng.bernoulli(p) {
                    edges.push((i, j));
                }
            }
        }
        WitnessGraph::new(n, edges).unwrap()
    }

    #[test]
    fn dp_matches_brute_force() {
        for seed in 0..150u64 {
            let n = 2 + (seed % 10) as usize;
            let g = random_graph(n, 0.45, seed);
            for x in [-2.0, -1.5, -0.5, 0.0, 1.0 / 3.0, 0.5, 0.7, 1.5] {
                let c = verify_critical(&g, x).unwrap();
                let paths = maximal_paths_brute(&g, x).unwrap();
                let reds: BTreeSet<usize> = paths.iter().map(|p| g.counts(p).1).collect();
                assert_eq!(reds.into_iter().collect::<Vec<_>>(), c.maximal_red_counts, "seed {seed} x {x}");
                let (b, r) = g.counts(&paths[0]);
                assert!((b as f64 + x * r as f64 - c.max_charge).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn maximal_paths_use_short_blue_and_no_long_red() {
        let mut graphs: Vec<(WitnessGraph, Vec<f64>)> = (2..=6).map(|k| (build_witness(r(&format!("1/{k}"))).unwrap(), vec![1.0 / k as f64])).collect();
        graphs.extend((0..100u64).map(|s| (random_graph(3 + (s % 9) as usize, 0.5, 1000 + s), vec![0.25, 0.5, 0.9, 1.0, 1.7])));
        for (g, xs) in &graphs {
            for &x in xs {
                for path in maximal_paths_brute(g, x).unwrap() {
                    for i in 0..g.n {
                        if g.is_blue(i, i + 1) {
                            assert!(path.windows(2).any(|e| e == [i, i + 1]), "{path:?} misses short blue ({i},{})", i + 1);
                        }
                    }
                    assert!(path.windows(2).all(|e| e[1] == e[0] + 1 || g.is_blue(e[0], e[1])), "{path:?} has a long red edge");
                }
            }
        }
    }

    #[test]
    fn admissibility() {
        assert!(!WitnessGraph::new(2, [(0, 1), (1, 2)]).unwrap().is_admissible());
        assert!(!WitnessGraph::new(3, [(0, 1), (1, 3)]).unwrap().is_admissible());
        assert!(WitnessGraph::new(3, [(2, 1)]).is_err());
        assert!(WitnessGraph::new(1, []).unwrap().is_admissible());
    }

    proptest! {
        #[test]
        fn charge_is_convex_in_x(seed in 0u64..10_000, n in 2usize..40, x0 in -3.0f64..1.0, h in 0.01f64..1.0) {
            let bits = sample_window(n, &EdgeLaw::Bernoulli(0.4), &mut RngStream::new(seed, 0)).unwrap();
            let w_at = |x: f64| {
                let w = GraphWindow::from_charges(n, |i, j| if bits.present(i, j) { 1.0 } else { x }).unwrap();
                max_charge_profile(&w)[n]
            };
            let (a, b, c) = (w_at(x0 - h), w_at(x0), w_at(x0 + h));
            prop_assert!(b <= 0.5 * (a + c) + 1e-9);
            prop_assert!(a <= b + 1e-12 && b <= c + 1e-12);
        }
    }
}
