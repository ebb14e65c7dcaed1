//! The max growth system and perfect simulation of its stationary increment.
//!
//! A state is a finite point measure on `ℝ ∪ {-∞}`. A driving column `w` with
//! entries at most 1 adds one particle at `m(ν, w) = sup_k (ν_k + w_k)`, where
//! `ν_1 ≥ ν_2 ≥ ...` are the particle locations. Driven by i.i.d. columns of
//! charges this reproduces the heaviest paths `W_{0,n}` of a charged graph, and
//! the recentered increment `m(σν(t-1), w(t))` has a stationary version whose
//! positive part has mean `C(F)`.
//!
//! [`perfect_sample`] draws that stationary variable exactly. Going back in
//! time it looks for the latest row `T*` from which every later row decouples
//! the system from its past, then runs the system forward from a single
//! particle.

use crate::error::{invalid, LppError, Result};
use crate::harness::{replicate, MonteCarloSummary, RngStream};

/// Finite point measure on `ℝ ∪ {-∞}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMeasure {
    finite: Vec<f64>,
    neg_inf: usize,
}

impl PointMeasure {
    /// The measure with one particle at each listed location.
    pub fn new(locations: &[f64]) -> Result<Self> {
        if locations.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(invalid("particle locations must be real or -∞"));
        }
        let mut finite: Vec<f64> = locations.iter().copied().filter(|x| x.is_finite()).collect();
        finite.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { neg_inf: locations.len() - finite.len(), finite })
    }

    /// One particle at `x`.
    pub fn dirac(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            Self { finite: Vec::new(), neg_inf: 1 }
        } else {
            Self { finite: vec![x], neg_inf: 0 }
        }
    }

    /// `‖ν‖`, the number of particles.
    pub fn len(&self) -> usize {
        self.finite.len() + self.neg_inf
    }

    /// Whether the measure has no particles.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Finite locations in decreasing order.
    pub fn finite_locations(&self) -> &[f64] {
        &self.finite
    }

    /// Number of particles at `-∞`.
    pub fn neg_inf_count(&self) -> usize {
        self.neg_inf
    }

    /// `ν_k` for `k ≥ 1`; `-∞` past the finite particles.
    pub fn location(&self, k: usize) -> f64 {
        self.finite.get(k - 1).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Adds a particle at `x`.
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            self.neg_inf += 1;
        } else {
            let at = self.finite.partition_point(|&y| y >= x);
            self.finite.insert(at, x);
        }
    }

    /// `σν`: the measure shifted so that its top particle sits at 0.
    ///
    /// A measure with no finite particle is returned unchanged.
    pub fn recentered(&self) -> Self {
        let top = match self.finite.first() {
            Some(&t) => t,
            None => return self.clone(),
        };
        Self { finite: self.finite.iter().map(|x| x - top).collect(), neg_inf: self.neg_inf }
    }
}

/// `m(ν, w) = sup_k (ν_k + w_k)` with the column drawn lazily by `w(k)`, `k = 1, 2, ...`.
///
/// Entries are requested in order and only while `ν_k + 1 > best`: since
/// `w_k ≤ 1` no later entry can improve the supremum afterwards.
pub fn m_value(nu: &PointMeasure, mut w: impl FnMut(usize) -> f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (idx, &x) in nu.finite.iter().enumerate() {
        if x + 1.0 <= best {
            break;
        }
        best = best.max(x + w(idx + 1));
    }
    best
}

/// `Ψ_w ν = ν + δ_{m(ν, w)}`.
pub fn mgs_step(nu: &PointMeasure, w: impl FnMut(usize) -> f64) -> Result<PointMeasure> {
    if nu.is_empty() {
        return Err(invalid("the growth map needs a nonempty measure"));
    }
    let mut next = nu.clone();
    next.add(m_value(nu, w));
    Ok(next)
}

/// Charge law with essential supremum 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargeLaw1 {
    /// Density `e^{x-1}` on `x ≤ 1`, i.e. `1 - Exp(1)`.
    ShiftedExp,
    /// 1 with probability `p`, otherwise `x < 1` (`x = -∞` gives the plain random graph).
    TwoAtom {
        /// Mass of the unit charge.
        p: f64,
        /// The other charge.
        x: f64,
    },
    /// `min(E - shift, level) / level` with `E ~ Exp(1)`: a charge with an exponential
    /// upper tail, capped at `level` and rescaled to supremum 1.
    Truncated {
        /// Shift of the exponential.
        shift: f64,
        /// Truncation level.
        level: f64,
    },
}

impl ChargeLaw1 {
    /// Checks parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChargeLaw1::ShiftedExp => Ok(()),
            ChargeLaw1::TwoAtom { p, x } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(invalid(format!("unit-charge mass {p} must lie in (0, 1]")));
                }
                if x.is_nan() || x >= 1.0 {
                    return Err(invalid(format!("second charge {x} must be below 1")));
                }
                Ok(())
            }
            ChargeLaw1::Truncated { shift, level } => {
                if !(level > 0.0 && level.is_finite() && shift.is_finite()) {
                    return Err(invalid("truncation needs a positive level and a finite shift"));
                }
                Ok(())
            }
        }
    }

    /// Draws one charge from a single uniform, so different laws driven by the same stream are coupled.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ChargeLaw1::ShiftedExp => 1.0 + rng.uniform_pos().ln(),
            ChargeLaw1::TwoAtom { p, x } => {
                if rng.uniform() < p {
                    1.0
                } else {
                    x
                }
            }
            ChargeLaw1::Truncated { shift, level } => ((-rng.uniform_pos().ln() - shift).min(level)) / level,
        }
    }

    /// `F([z, 1])`.
    pub fn mass_at_least(&self, z: f64) -> f64 {
        if z > 1.0 {
            return 0.0;
        }
        match *self {
            ChargeLaw1::ShiftedExp => 1.0 - (z - 1.0).exp(),
            ChargeLaw1::TwoAtom { p, x } => p + if x >= z { 1.0 - p } else { 0.0 },
            ChargeLaw1::Truncated { shift, level } => (-(z * level + shift)).exp().min(1.0),
        }
    }

    /// 0 when the law has an atom at 1, otherwise 0.7.
    pub fn default_ell(&self) -> f64 {
        match self {
            ChargeLaw1::ShiftedExp => 0.7,
            _ => 0.0,
        }
    }
}

/// One exact draw of the stationary increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfectSample {
    /// `m̄(0)`; its positive part has mean `C(F)`.
    pub m_bar: f64,
    /// The decoupling row `T* ≤ -1`.
    pub t_star: i64,
    /// Particles in the system before the last column is applied, always `|T*|`.
    pub final_size: usize,
}

/// Rows explored before [`perfect_sample`] gives up.
pub const ROW_BUDGET: u64 = 1 << 22;
/// Charges drawn in one row before [`perfect_sample`] gives up.
pub const ENTRY_BUDGET: u64 = 1 << 24;

/// Row `t ≤ 0` of the driving array, regenerable from `(seed, -t)`.
fn row(seed: u64, t: i64) -> RngStream {
    RngStream::new(seed, t.unsigned_abs())
}

fn check_ell(law: &ChargeLaw1, ell: f64) -> Result<()> {
    law.validate()?;
    if !(0.0..1.0).contains(&ell) {
        return Err(invalid(format!("ℓ = {ell} must lie in [0, 1)")));
    }
    if law.mass_at_least(1.0 - ell) <= 0.0 || law.mass_at_least(ell) <= 0.0 {
        return Err(invalid(format!("ℓ = {ell} leaves F([1-ℓ,1]) or F([ℓ,1]) empty")));
    }
    Ok(())
}

/// Exact sample of `m̄(0)` by backward search and forward reconstruction.
///
/// Row `s` hits at `h(s) = min{k : w_k(s) ≥ 1-ℓ}`. The decoupling row is the
/// largest `t ≤ -1` with `w_1(t) ≥ ℓ` and `t ≤ s - h(s)` for every `t < s ≤ 0`.
/// Only `h` and `w_1` are kept during the search; the forward phase replays the
/// rows from their streams, so memory stays `O(|T*|)`.
pub fn perfect_sample(law: &ChargeLaw1, ell: f64, rng: &mut RngStream) -> Result<PerfectSample> {
    check_ell(law, ell)?;
    let seed = rand::RngCore::next_u64(rng);
    perfect_sample_seeded(law, ell, seed)
}

fn perfect_sample_seeded(law: &ChargeLaw1, ell: f64, seed: u64) -> Result<PerfectSample> {
    let hit = |t: i64, first: f64, r: &mut RngStream| -> Result<i64> {
        let mut k = 1i64;
        let mut w = first;
        while w < 1.0 - ell {
            k += 1;
            if k as u64 > ENTRY_BUDGET {
                return Err(LppError::Resource(format!("row {t} did not reach 1-ℓ within {ENTRY_BUDGET} entries")));
            }
            w = law.sample(r);
        }
        Ok(k)
    };
    let mut r0 = row(seed, 0);
    let first = law.sample(&mut r0);
    // bound = min over scanned rows s of s - h(s)
    let mut bound = -hit(0, first, &mut r0)?;
    let mut t = -1i64;
    let t_star = loop {
        let mut r = row(seed, t);
        let w1 = law.sample(&mut r);
        if w1 >= ell && t <= bound {
            break t;
        }
        bound = bound.min(t - hit(t, w1, &mut r)?);
        t -= 1;
        if t.unsigned_abs() > ROW_BUDGET {
            return Err(LppError::Resource(format!("no decoupling row within {ROW_BUDGET} rows")));
        }
    };
    let mut nu = PointMeasure::dirac(0.0);
    for s in t_star + 1..=-1 {
        let mut r = row(seed, s);
        let m = m_value(&nu, |_| law.sample(&mut r));
        nu.add(m);
    }
    let mut r = row(seed, 0);
    let m = m_value(&nu, |_| law.sample(&mut r));
    Ok(PerfectSample { m_bar: m - nu.location(1), t_star, final_size: nu.len() })
}

/// Average of perfect samples together with the cost statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CfEstimate {
    /// Summary of `m̄⁺` over the samples.
    pub summary: MonteCarloSummary,
    /// Sample mean of `(T*)²`, the cost of one draw.
    pub mean_t_star_sq: f64,
    /// `|T*|` of every sample, in replica order.
    pub t_star_abs: Vec<u64>,
}

/// `N` independent perfect samples on streams `(seed, 0..N)`.
pub fn estimate_cf(law: &ChargeLaw1, ell: f64, n: usize, seed: u64) -> Result<CfEstimate> {
    check_ell(law, ell)?;
    let draws = replicate(n, seed, |rng| perfect_sample(law, ell, rng));
    let draws: Vec<PerfectSample> = draws.into_iter().collect::<Result<_>>()?;
    let pos: Vec<f64> = draws.iter().map(|d| d.m_bar.max(0.0)).collect();
    let t_star_abs: Vec<u64> = draws.iter().map(|d| d.t_star.unsigned_abs()).collect();
    let mean_t_star_sq = t_star_abs.iter().map(|&t| (t * t) as f64).sum::<f64>() / n.max(1) as f64;
    Ok(CfEstimate { summary: MonteCarloSummary::from_samples(&pos)?, mean_t_star_sq, t_star_abs })
}

/// `(ℓ, mean (T*)²)` over a grid of `ℓ` values, for tuning.
pub fn complexity_profile(law: &ChargeLaw1, ell_grid: &[f64], n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    ell_grid.iter().map(|&ell| Ok((ell, estimate_cf(law, ell, n, seed)?.mean_t_star_sq))).collect()
}

/// A charge law given through truncations `F_n` with essential supremum `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChargeFamily {
    /// A law already bounded by 1 with its `ℓ`; every truncation equals it.
    Bounded(ChargeLaw1, f64),
    /// `E - shift` with `E ~ Exp(1)`, unbounded above; `F_n` caps it at `n`.
    ExpTail {
        /// Shift of the exponential.
        shift: f64,
    },
}

impl ChargeFamily {
    /// `F_n` rescaled to supremum 1, the scale to undo, and the `ℓ` to sample it with.
    ///
    /// For the exponential tail `ℓ_n = 1 - c/n` keeps `F_n([1-ℓ_n, 1]) = 1/2`
    /// at every level. A fixed `ℓ` would let that mass decay like `e^{-n/2}`,
    /// and the search cost grows like `exp(π²/(6 F([1-ℓ,1])))`. The sampled
    /// value does not depend on `ℓ`, only the cost does.
    pub fn level(&self, n: u32) -> (ChargeLaw1, f64, f64) {
        match *self {
            ChargeFamily::Bounded(law, ell) => (law, 1.0, ell),
            ChargeFamily::ExpTail { shift } => {
                let c = std::f64::consts::LN_2 - shift;
                let ell = (1.0 - c / n as f64).clamp(0.0, 1.0 - 1e-12);
                (ChargeLaw1::Truncated { shift, level: n as f64 }, n as f64, ell)
            }
        }
    }
}

/// Debiased draw `Y = (X_ν - X_{ν-1}) / P(ν)` with `X_n` the positive stationary
/// increment under `F_n`, `X_0 = 0` and `P(ν = n) = (1-r) r^{n-1}`.
///
/// Both levels read the same driving array, so the difference is small when
/// the truncations agree. `E Y = C(F)`.
pub fn glynn_rhee_sample(family: &ChargeFamily, ratio: f64, rng: &mut RngStream) -> Result<f64> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(invalid(format!("level ratio {ratio} must lie in [0, 1)")));
    }
    let mut nu = 1u32;
    while rng.uniform() < ratio {
        nu += 1;
    }
    let p_nu = (1.0 - ratio) * ratio.powi(nu as i32 - 1);
    let seed = rand::RngCore::next_u64(rng);
    let x_at = |n: u32| -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let (law, scale, ell) = family.level(n);
        check_ell(&law, ell)?;
        Ok(scale * perfect_sample_seeded(&law, ell, seed)?.m_bar.max(0.0))
    };
    Ok((x_at(nu)? - x_at(nu - 1)?) / p_nu)
}

/// Summary of `n` debiased draws; the variance is always reported since it may be large.
pub fn glynn_rhee_estimate(family: &ChargeFamily, ratio: f64, n: usize, seed: u64) -> Result<MonteCarloSummary> {
    let ys: Vec<f64> = replicate(n, seed, |rng| glynn_rhee_sample(family, ratio, rng)).into_iter().collect::<Result<_>>()?;
    MonteCarloSummary::from_samples(&ys)
}
