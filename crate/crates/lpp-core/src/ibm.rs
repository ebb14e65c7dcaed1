//! The infinite bin model.
//!
//! A configuration places balls in bins indexed by the integers; every bin at or
//! below the front is nonempty and every bin above it is empty. A letter `ξ`
//! locates the bin `B(X, ξ)` holding the `ξ`-th ball counted from the right and
//! adds one ball to the bin immediately to its right. The front therefore
//! advances exactly when `ξ` does not exceed the content of the front bin.
//! With geometric(p) letters the front speed is the growth constant `C(p)` of the
//! Barak-Erdős graph.

use std::collections::VecDeque;

use crate::chainbounds::FiniteMu;
use crate::error::{invalid, Result};
use crate::harness::{geometric_unchecked, replicate, MonteCarloSummary, RngStream};

pub use crate::chainbounds::Letter;

/// Content of the bins below the stored region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Below {
    /// Every deeper bin holds infinitely many balls.
    Saturated,
    /// Every deeper bin holds exactly one ball.
    Unit,
}

/// A configuration of the infinite bin model.
///
/// Stored bins run from `front - len + 1` (index 0) up to the front (last
/// index); deeper bins follow the [`Below`] rule. A stored content of
/// `u64::MAX` stands for an infinite bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    front: i64,
    bins: VecDeque<u64>,
    below: Below,
}

/// Stored content meaning "infinitely many balls".
pub const INFINITE_BIN: u64 = u64::MAX;

impl Configuration {
    /// Builds a configuration from contents listed front first.
    pub fn new(front: i64, counts_front_first: &[u64], below: Below) -> Result<Self> {
        if counts_front_first.is_empty() {
            return Err(invalid("a configuration needs at least the front bin"));
        }
        if counts_front_first.contains(&0) {
            return Err(invalid("bins at or below the front must be nonempty"));
        }
        let bins = counts_front_first.iter().rev().copied().collect();
        Ok(Self { front, bins, below })
    }

    /// One ball in the front bin at 0 and one ball in every bin below it.
    pub fn unit_staircase() -> Self {
        Self { front: 0, bins: VecDeque::from(vec![1]), below: Below::Unit }
    }

    /// Front bin at 0 holding one ball, every deeper bin infinitely full.
    pub fn saturated_single() -> Self {
        Self { front: 0, bins: VecDeque::from(vec![1]), below: Below::Saturated }
    }

    /// Index of the front bin.
    pub fn front(&self) -> i64 {
        self.front
    }

    /// Number of balls in the front bin.
    pub fn front_content(&self) -> u64 {
        *self.bins.back().expect("front bin is always stored")
    }

    /// Rule for the bins below the stored region.
    pub fn below(&self) -> Below {
        self.below
    }

    /// Number of stored bins.
    pub fn depth(&self) -> usize {
        self.bins.len()
    }

    /// Content of bin `k` (`INFINITE_BIN` for an infinite bin).
    pub fn content(&self, k: i64) -> u64 {
        if k > self.front {
            return 0;
        }
        let from_front = (self.front - k) as usize;
        if from_front < self.bins.len() {
            self.bins[self.bins.len() - 1 - from_front]
        } else {
            match self.below {
                Below::Saturated => INFINITE_BIN,
                Below::Unit => 1,
            }
        }
    }

    /// Contents of the `k` rightmost bins, front first.
    pub fn top_profile(&self, k: usize) -> Vec<u64> {
        (0..k as i64).map(|d| self.content(self.front - d)).collect()
    }

    /// Contents of the stored bins, front first.
    pub fn view_front_first(&self) -> Vec<u64> {
        self.bins.iter().rev().copied().collect()
    }

    /// The bin `B(X, ξ)`; `None` stands for `-∞` (letter `∞`, or too few balls).
    pub fn select_bin(&self, xi: Letter) -> Option<i64> {
        match xi {
            Letter::Infinite => None,
            Letter::Zero => Some(self.front),
            Letter::Finite(x) => {
                let x = x as u64;
                let mut seen: u64 = 0;
                for (d, &c) in self.bins.iter().rev().enumerate() {
                    seen = seen.saturating_add(c);
                    if seen >= x {
                        return Some(self.front - d as i64);
                    }
                }
                let deepest = self.front - self.bins.len() as i64 + 1;
                match self.below {
                    Below::Saturated => Some(deepest - 1),
                    Below::Unit => Some(deepest - (x - seen) as i64),
                }
            }
        }
    }

    /// Applies `Φ_ξ` in place and reports whether the front advanced.
    pub fn apply(&mut self, xi: Letter) -> bool {
        match xi {
            Letter::Infinite => false,
            Letter::Zero => {
                self.front += 1;
                true
            }
            Letter::Finite(x) => {
                let x = x as u64;
                let n = self.bins.len();
                let mut seen: u64 = 0;
                for i in (0..n).rev() {
                    seen = seen.saturating_add(self.bins[i]);
                    if seen >= x {
                        if i + 1 == n {
                            self.bins.push_back(1);
                            self.front += 1;
                            return true;
                        }
                        self.bins[i + 1] = self.bins[i + 1].saturating_add(1);
                        return false;
                    }
                }
                if self.below == Below::Unit {
                    // The selected ball sits `x - seen` unit bins below the stored region.
                    for _ in 1..(x - seen) {
                        self.bins.push_front(1);
                    }
                }
                self.bins[0] = self.bins[0].saturating_add(1);
                false
            }
        }
    }

    /// Applies a word given in application order.
    pub fn apply_word(&mut self, letters: &[Letter]) -> Vec<bool> {
        letters.iter().map(|&l| self.apply(l)).collect()
    }

    /// Partial order: `self ⪯ other` iff every tail count `Σ_{j≥l} X(j)` is dominated.
    pub fn precedes(&self, other: &Configuration) -> bool {
        let top = self.front.max(other.front);
        let deep = (self.front - self.bins.len() as i64).min(other.front - other.bins.len() as i64);
        let (mut a, mut b) = (0u64, 0u64);
        let mut l = top;
        while l >= deep {
            a = a.saturating_add(self.content(l));
            b = b.saturating_add(other.content(l));
            if a > b {
                return false;
            }
            l -= 1;
        }
        // Below both stored regions, unit tails add equally and saturated tails dominate.
        !(self.below == Below::Saturated && other.below == Below::Unit)
    }
}

/// Law of the letters driving the model.
#[derive(Debug, Clone, PartialEq)]
pub enum LetterLaw {
    /// Geometric(p) letters on `{1, 2, ...}`.
    Geometric(f64),
    /// A law supported on `{0} ∪ {1..k} ∪ {∞}`.
    Finite(FiniteMu),
}

impl LetterLaw {
    /// Checks parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            LetterLaw::Geometric(p) if !(*p > 0.0 && *p <= 1.0) => {
                Err(invalid(format!("geometric parameter {p} outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Draws one letter.
    pub fn sample(&self, rng: &mut RngStream) -> Letter {
        match self {
            LetterLaw::Geometric(p) => Letter::Finite(geometric_unchecked(*p, rng).min(u32::MAX as u64) as u32),
            LetterLaw::Finite(mu) => {
                let mut u = rng.uniform();
                if u < mu.zero {
                    return Letter::Zero;
                }
                u -= mu.zero;
                for (j, &m) in mu.masses.iter().enumerate() {
                    if u < m {
                        return Letter::Finite(j as u32 + 1);
                    }
                    u -= m;
                }
                Letter::Infinite
            }
        }
    }

    /// Mass `μ(1)`, which must be positive for the renewal constructions.
    pub fn mass_of_one(&self) -> f64 {
        match self {
            LetterLaw::Geometric(p) => *p,
            LetterLaw::Finite(mu) => mu.masses[0],
        }
    }
}

/// Runs the model for `steps` letters from `x0` and returns the front displacement.
pub fn run_front(mu: &LetterLaw, steps: usize, x0: &Configuration, rng: &mut RngStream) -> i64 {
    let mut x = x0.clone();
    for _ in 0..steps {
        x.apply(mu.sample(rng));
    }
    x.front() - x0.front()
}

/// Estimates the front speed `v_μ` from `replicas` independent runs of length `steps`.
pub fn simulate_speed(
    mu: &LetterLaw,
    steps: usize,
    x0: &Configuration,
    replicas: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    mu.validate()?;
    if steps == 0 {
        return Err(invalid("steps must be positive"));
    }
    let samples = replicate(replicas, seed, |rng| run_front(mu, steps, x0, rng) as f64 / steps as f64);
    MonteCarloSummary::from_samples(&samples)
}

/// Estimates `C(p) = 1 - E[(1-p)^{R}]`, `R` the stationary front content.
///
/// Each replica averages `(1-p)^{X_t(F)}` over `steps` letters after `burnin`
/// letters, starting from a single ball above a saturated region.
pub fn estimate_c_via_front(
    p: f64,
    steps: usize,
    burnin: usize,
    replicas: usize,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("edge probability {p} outside (0, 1)")));
    }
    if steps == 0 {
        return Err(invalid("steps must be positive"));
    }
    let q = 1.0 - p;
    let law = LetterLaw::Geometric(p);
    let samples = replicate(replicas, seed, |rng| {
        let mut x = Configuration::saturated_single();
        for _ in 0..burnin {
            x.apply(law.sample(rng));
        }
        let mut acc = 0.0;
        for _ in 0..steps {
            x.apply(law.sample(rng));
            acc += q.powf(x.front_content() as f64);
        }
        1.0 - acc / steps as f64
    });
    MonteCarloSummary::from_samples(&samples)
}

/// Indices `k` such that `ξ_{k+i} ≤ i + 1` for `i = 0..=horizon`.
///
/// A letter `ξ_m = v` rules out the starts `k ∈ (m - v + 1, m]` within reach of
/// the horizon, so one pass with a difference array finds all certified starts
/// in linear time.
/// Starts too close to the end of the stream to be certified are omitted.
pub fn detect_renewals(xi: &[u64], horizon: usize) -> Vec<usize> {
    let len = xi.len();
    if len <= horizon {
        return Vec::new();
    }
    let mut blocked = vec![0i64; len + 1];
    for (m, &v) in xi.iter().enumerate() {
        if v <= 1 {
            continue;
        }
        // Blocked starts: max(0, m - v + 2, m - horizon) ..= m.
        let lo = (m as i64 - v.min(horizon as u64 + 2) as i64 + 2).max(0) as usize;
        blocked[lo] += 1;
        blocked[m + 1] -= 1;
    }
    let mut out = Vec::new();
    let mut run = 0i64;
    for k in 0..(len - horizon) {
        run += blocked[k];
        if run == 0 {
            out.push(k);
        }
    }
    out
}

/// Outcome of running two configurations on a shared letter stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingReport {
    /// `first_meet[k - 1]`: first step at which the top-`k` profiles agreed.
    pub first_meet: Vec<Option<usize>>,
    /// `settled_from[k - 1]`: step from which the top-`k` profiles agreed until the end.
    pub settled_from: Vec<Option<usize>>,
    /// `rediverged[k - 1]`: profiles agreed at some step and differed later.
    pub rediverged: Vec<bool>,
}

/// Runs `x0` and `y0` on the same letters and tracks agreement of their top-`k` profiles.
pub fn coupling_check(
    mu: &LetterLaw,
    x0: &Configuration,
    y0: &Configuration,
    steps: usize,
    k_max: usize,
    seed: u64,
) -> Result<CouplingReport> {
    mu.validate()?;
    if mu.mass_of_one() <= 0.0 {
        return Err(invalid("coupling needs positive mass on the letter 1"));
    }
    let mut rng = RngStream::new(seed, 0);
    let letters: Vec<Letter> = (0..steps).map(|_| mu.sample(&mut rng)).collect();
    Ok(coupling_on_word(x0, y0, &letters, k_max))
}

/// As [`coupling_check`] on an explicit word (application order).
pub fn coupling_on_word(x0: &Configuration, y0: &Configuration, letters: &[Letter], k_max: usize) -> CouplingReport {
    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut first_meet = vec![None; k_max];
    let mut settled_from = vec![None; k_max];
    let mut rediverged = vec![false; k_max];
    let mut observe = |t: usize, x: &Configuration, y: &Configuration| {
        for k in 1..=k_max {
            let same = x.top_profile(k) == y.top_profile(k);
            if same {
                first_meet[k - 1].get_or_insert(t);
                settled_from[k - 1].get_or_insert(t);
            } else {
                if first_meet[k - 1].is_some() {
                    rediverged[k - 1] = true;
                }
                settled_from[k - 1] = None;
            }
        }
    };
    observe(0, &x, &y);
    for (t, &l) in letters.iter().enumerate() {
        x.apply(l);
        y.apply(l);
        observe(t + 1, &x, &y);
    }
    CouplingReport { first_meet, settled_from, rediverged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(x: u32) -> Letter {
        Letter::Finite(x)
    }

    #[test]
    fn select_bin_example() {
        // Contents front first 2, 4, 1, 2 with the front at 0.
        let x = Configuration::new(0, &[2, 4, 1, 2], Below::Unit).unwrap();
        assert_eq!(x.select_bin(f(1)), Some(0));
        assert_eq!(x.select_bin(f(3)), Some(-1));
        assert_eq!(x.select_bin(Letter::Infinite), None);
        for xi in 1..=30u32 {
            let b = x.select_bin(f(xi)).unwrap();
            assert!(b <= x.front() && b >= x.front() - xi as i64 + 1);
        }
    }

    #[test]
    fn single_ball_advances() {
        let mut x = Configuration::saturated_single();
        assert!(x.apply(f(1)));
        assert_eq!(x.front(), 1);
        assert_eq!(x.front_content(), 1);
    }

    #[test]
    fn word_example_adds_expected_balls() {
        // Front bin 0 holds 2, then 1, 2, 3, 5 below; applied letters 1, 5, 4, 2.
        let x0 = Configuration::new(0, &[2, 1, 2, 3, 5], Below::Unit).unwrap();
        let mut x = x0.clone();
        let moved = x.apply_word(&[f(1), f(5), f(4), f(2)]);
        assert_eq!(moved, vec![true, false, false, false]);
        assert_eq!(x.front(), 1);
        let added = |k: i64| match k {
            1 => 2,
            0 | -1 => 1,
            _ => 0,
        };
        for k in -8..=2 {
            assert_eq!(x.content(k), x0.content(k) + added(k), "bin {k}");
        }
    }

    #[test]
    fn shift_commutes_with_letters() {
        let base = Configuration::new(0, &[2, 1, 3, 1], Below::Unit).unwrap();
        for k in 1..=9 {
            let mut a = base.clone();
            a.apply(Letter::Zero);
            a.apply(f(k));
            let mut b = base.clone();
            b.apply(f(k));
            b.apply(Letter::Zero);
            assert_eq!(a.top_profile(12), b.top_profile(12));
            assert_eq!(a.front(), b.front());
        }
    }

    #[test]
    fn identity_letter_changes_nothing() {
        let mut x = Configuration::new(3, &[1, 2], Below::Saturated).unwrap();
        let y = x.clone();
        assert!(!x.apply(Letter::Infinite));
        assert_eq!(x, y);
    }

    #[test]
    fn dirac_one_has_unit_speed() {
        let mu = LetterLaw::Finite(FiniteMu::new(0.0, vec![1.0], 0.0).unwrap());
        let s = simulate_speed(&mu, 1000, &Configuration::unit_staircase(), 4, 1).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn half_identity_law_has_half_speed() {
        let mu = LetterLaw::Finite(FiniteMu::new(0.0, vec![0.5], 0.5).unwrap());
        let s = simulate_speed(&mu, 10_000, &Configuration::unit_staircase(), 50, 2).unwrap();
        assert!(s.within_sigmas(0.5, 3.0), "{s:?}");
    }

    #[test]
    fn renewals_on_ones_and_blockers() {
        assert_eq!(detect_renewals(&[1; 10], 3), (0..7).collect::<Vec<_>>());
        let xi = [1, 1, 2, 1, 1, 1];
        // ξ_2 = 2 blocks the start k = 2 only.
        assert_eq!(detect_renewals(&xi, 2), vec![0, 1, 3]);
        let xi = [1, 1, 3, 1, 1, 1, 1];
        // ξ_2 = 3 blocks k = 1 (needs ξ_2 ≤ 2) and k = 2.
        assert_eq!(detect_renewals(&xi, 2), vec![0, 3, 4]);
    }

    /// Direct check of the definition, quadratic time.
    fn renewals_naive(xi: &[u64], horizon: usize) -> Vec<usize> {
        (0..xi.len().saturating_sub(horizon)).filter(|&k| (0..=horizon).all(|i| xi[k + i] <= i as u64 + 1)).collect()
    }

    #[test]
    fn renewals_match_definition() {
        let mut rng = RngStream::new(76, 0);
        let xi: Vec<u64> = (0..5000).map(|_| geometric_unchecked(0.4, &mut rng)).collect();
        for h in [0, 1, 5, 50] {
            assert_eq!(detect_renewals(&xi, h), renewals_naive(&xi, h));
        }
    }

    #[test]
    fn renewal_density_for_geometric_letters() {
        // Batch means over 100 blocks of 1000 starts give an honest standard error.
        let horizon = 50;
        let mut rng = RngStream::new(77, 0);
        let n = 100_000 + horizon;
        let xi: Vec<u64> = (0..n).map(|_| geometric_unchecked(0.5, &mut rng)).collect();
        let hits = detect_renewals(&xi, horizon);
        let mut blocks = vec![0.0; 100];
        for k in hits {
            blocks[k / 1000] += 1.0 / 1000.0;
        }
        let s = MonteCarloSummary::from_samples(&blocks).unwrap();
        let expect: f64 = (1..=horizon as i32 + 1).map(|j| 1.0 - 0.5f64.powi(j)).product();
        assert!(s.within_sigmas(expect, 3.0), "density {}, expected {expect}", s.mean);
    }

    #[test]
    fn coupling_of_identical_starts_is_immediate() {
        let x = Configuration::new(0, &[2, 1, 1], Below::Unit).unwrap();
        let r = coupling_check(&LetterLaw::Geometric(0.5), &x, &x, 100, 4, 3).unwrap();
        assert!(r.first_meet.iter().all(|&t| t == Some(0)));
        assert!(r.rediverged.iter().all(|&d| !d));
    }

    #[test]
    fn ones_couple_top_profiles() {
        let x = Configuration::new(0, &[3, 1, 2], Below::Unit).unwrap();
        let y = Configuration::new(5, &[1, 4], Below::Saturated).unwrap();
        for l in 1..=6 {
            let r = coupling_on_word(&x, &y, &vec![f(1); l], l);
            assert!(r.settled_from[l - 1].is_some(), "l = {l}");
        }
    }

    #[test]
    fn c_via_front_sits_in_the_bracket() {
        let b = crate::chainbounds::bounds_c(0.5, 3).unwrap();
        let s = estimate_c_via_front(0.5, 20_000, 2_000, 40, 5).unwrap();
        assert!(s.overlaps(b.lower, b.upper, 3.0), "{s:?}");
    }

    fn arb_config() -> impl Strategy<Value = Configuration> {
        (prop::collection::vec(1u64..4, 1..6), -3i64..3, any::<bool>()).prop_map(|(c, f, sat)| {
            Configuration::new(f, &c, if sat { Below::Saturated } else { Below::Unit }).unwrap()
        })
    }

    proptest! {
        #[test]
        fn front_moves_iff_letter_fits(x in arb_config(), xi in 0u32..8) {
            let letter = if xi == 0 { Letter::Zero } else { f(xi) };
            let before = x.clone();
            let mut after = x;
            let moved = after.apply(letter);
            let expect = xi == 0 || xi as u64 <= before.front_content();
            prop_assert_eq!(moved, expect);
            prop_assert_eq!(after.front() - before.front(), moved as i64);
        }

        #[test]
        fn order_is_preserved(x in arb_config(), extra in prop::collection::vec(1u32..5, 0..6),
                              word in prop::collection::vec((1u32..7, 0u32..3), 1..20)) {
            // Build y ⪰ x by adding balls to x.
            let mut y = x.clone();
            for e in extra { y.apply(f(e)); }
            prop_assume!(x.precedes(&y));
            let (mut a, mut b) = (x, y);
            for (big, dec) in word {
                let small = big.saturating_sub(dec).max(1);
                a.apply(f(big));
                b.apply(f(small));
                prop_assert!(a.precedes(&b));
            }
        }

        #[test]
        fn ball_count_grows_by_one(x in arb_config(), word in prop::collection::vec(1u32..6, 1..20)) {
            // Count balls in a fixed window reaching well below every selectable bin.
            let bottom = x.front() - 40;
            let count = |c: &Configuration| (bottom..=c.front()).map(|k| c.content(k).min(1000)).sum::<u64>();
            let mut y = x.clone();
            for &l in &word { y.apply(f(l)); }
            prop_assert_eq!(count(&y) - count(&x), word.len() as u64);
        }

        #[test]
        fn truncations_sandwich(x in arb_config(), word in prop::collection::vec(1u32..9, 1..30), k in 1u32..5) {
            let mut lo = x.clone();
            let mut mid = x.clone();
            let mut hi = x.clone();
            let mut top = x;
            for &l in &word {
                mid.apply(f(l));
                if l <= k {
                    lo.apply(f(l)); hi.apply(f(l)); top.apply(f(l));
                } else {
                    lo.apply(Letter::Infinite); hi.apply(f(k)); top.apply(Letter::Zero);
                }
                prop_assert!(lo.precedes(&mid));
                prop_assert!(mid.precedes(&hi));
                prop_assert!(hi.precedes(&top));
            }
        }
    }
}
