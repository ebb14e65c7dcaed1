//! Euler's function, the skeleton rate and partition numbers.
//!
//! `φ(q) = ∏_{k≥1} (1 - q^k)` is evaluated through the pentagonal-number series
//! `Σ_n (-1)^n q^{n(3n-1)/2}`, which needs only `O(sqrt(log tol / log q))` terms.
//! Close to `q = 1` the series suffers catastrophic cancellation (the value is
//! tiny while individual terms are of order one), so there the product is
//! accumulated in log space instead.

use crate::error::{invalid, LppError, Result};

/// Above this `q` the pentagonal series loses relative accuracy; use the log-product.
const PRODUCT_SWITCH: f64 = 0.9;

/// A truncated series or product together with an explicit bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    /// Truncated value.
    pub value: f64,
    /// Number of terms or factors actually combined.
    pub terms_used: usize,
    /// Upper bound on the absolute error due to truncation.
    pub truncation_bound: f64,
}

/// Euler's function `φ(q)` for `0 ≤ q < 1`.
pub fn euler_phi(q: f64, tol: f64) -> Result<SeriesValue> {
    if !(0.0..1.0).contains(&q) {
        return Err(invalid(format!("euler_phi needs 0 <= q < 1, got {q}")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    if q > PRODUCT_SWITCH {
        Ok(euler_phi_log_product(q, tol))
    } else {
        Ok(euler_phi_pentagonal(q, tol))
    }
}

/// Pentagonal-number series for `φ(q)`.
///
/// Terms come in pairs `q^{n(3n-1)/2}`, `q^{n(3n+1)/2}` with sign `(-1)^n`; the
/// loop stops once the next generalized pentagonal power is below `tol`.
pub fn euler_phi_pentagonal(q: f64, tol: f64) -> SeriesValue {
    if q == 0.0 {
        return SeriesValue { value: 1.0, terms_used: 1, truncation_bound: 0.0 };
    }
    let mut value = 1.0;
    let mut terms = 1;
    let mut n: u64 = 1;
    loop {
        let e1 = n * (3 * n - 1) / 2;
        let t1 = q.powf(e1 as f64);
        if t1 < tol {
            // Remaining magnitudes are bounded by a geometric tail starting at t1.
            return SeriesValue { value, terms_used: terms, truncation_bound: 2.0 * t1 / (1.0 - q) };
        }
        let t2 = q.powf((e1 + n) as f64);
        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
        value += sign * (t1 + t2);
        terms += 2;
        n += 1;
    }
}

/// `φ(q)` as `exp(Σ_k ln(1 - q^k))`, stopping when `q^k` is below `tol`.
pub fn euler_phi_log_product(q: f64, tol: f64) -> SeriesValue {
    let mut log_sum = 0.0;
    let mut qk = q;
    let mut terms = 0;
    while qk >= tol.min(1e-18) {
        log_sum += (-qk).ln_1p();
        qk *= q;
        terms += 1;
    }
    let value = log_sum.exp();
    // Σ_{k>K} -ln(1-q^k) ≤ 2 q^{K+1}/(1-q) once q^{K+1} ≤ 1/2, and exp is 1-Lipschitz below 0.
    SeriesValue { value, terms_used: terms, truncation_bound: value * 2.0 * qk / (1.0 - q) }
}

/// Direct product `∏ (1 - q^k)` until the factors equal 1 in double precision.
pub fn euler_phi_product(q: f64) -> f64 {
    let mut prod = 1.0;
    let mut qk = q;
    while qk > f64::EPSILON * 1e-3 {
        prod *= 1.0 - qk;
        qk *= q;
    }
    prod
}

/// Asymptotic density of skeleton points, `λ(p) = φ(1-p)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonRate {
    /// The density `λ`.
    pub lambda: f64,
    /// Set when `p = 0`: there are no edges and hence no skeleton points.
    pub degenerate: bool,
}

impl SkeletonRate {
    /// Mean distance between consecutive skeleton points, `1/λ`.
    pub fn mean_gap(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// Skeleton density of the Barak-Erdős graph with edge probability `p`.
pub fn skeleton_rate(p: f64) -> Result<SkeletonRate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(SkeletonRate { lambda: 0.0, degenerate: true });
    }
    let phi = euler_phi(1.0 - p, 1e-17)?.value;
    Ok(SkeletonRate { lambda: phi * phi, degenerate: false })
}

/// Skeleton density when the edge `(i, j)` is present with probability `p_seq(j - i)`.
///
/// With `Q_j = ∏_{i≤j} (1 - p_i)` the density is `∏_j (1 - Q_j)^2`. If some
/// `p_k = 1` the product is finite and exact. Otherwise factors are accumulated
/// until `Q_j` is below `tol` and the partial sums of `Q` have stabilized; if that
/// does not happen within `max_terms` factors the series `Σ Q_j` is declared divergent.
pub fn skeleton_rate_general(p_seq: impl Fn(usize) -> f64, tol: f64) -> Result<SeriesValue> {
    skeleton_rate_general_with_budget(p_seq, tol, 10_000_000)
}

/// [`skeleton_rate_general`] with an explicit cap on the number of factors.
pub fn skeleton_rate_general_with_budget(
    p_seq: impl Fn(usize) -> f64,
    tol: f64,
    max_terms: usize,
) -> Result<SeriesValue> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let p1 = p_seq(1);
    if !(p1 > 0.0 && p1 <= 1.0) {
        return Err(invalid(format!("p_1 = {p1} must lie in (0, 1]")));
    }
    let mut log_lambda: f64 = 0.0;
    let mut q = 1.0;
    let mut q_sum = 0.0;
    let mut checkpoint = (1usize, 0.0f64);
    for j in 1..=max_terms {
        let pj = p_seq(j);
        if !(0.0..=1.0).contains(&pj) {
            return Err(invalid(format!("p_{j} = {pj} is not a probability")));
        }
        q *= 1.0 - pj;
        if q == 0.0 {
            // p_j = 1 (or underflow): every later factor is exactly 1.
            return Ok(SeriesValue { value: log_lambda.exp(), terms_used: j - 1, truncation_bound: 0.0 });
        }
        log_lambda += 2.0 * (-q).ln_1p();
        q_sum += q;
        if j == 2 * checkpoint.0 {
            // Stop only if the tail of Σ Q is negligible: small terms and a stalled partial sum.
            let growth = q_sum - checkpoint.1;
            if q < tol && growth < tol {
                let value = log_lambda.exp();
                return Ok(SeriesValue { value, terms_used: j, truncation_bound: value * 2.0 * growth.max(q) * 2.0 });
            }
            checkpoint = (j, q_sum);
        }
    }
    Err(LppError::Divergence(format!(
        "partial sums of Q_j still growing after {max_terms} terms (Q = {q:e}, sum = {q_sum:e})"
    )))
}

/// Coefficients `c_0..=c_n` of `φ(q)` as a power series (entries in {-1, 0, 1}).
pub fn phi_coefficients(n: usize) -> Vec<i8> {
    let mut c = vec![0i8; n + 1];
    c[0] = 1;
    let mut k: usize = 1;
    loop {
        let e1 = k * (3 * k - 1) / 2;
        if e1 > n {
            break;
        }
        let sign = if k % 2 == 1 { -1 } else { 1 };
        c[e1] = sign;
        if e1 + k <= n {
            c[e1 + k] = sign;
        }
        k += 1;
    }
    c
}

/// Partition numbers `p(1)..=p(n_max)`, the coefficients of `1/φ(q)`.
///
/// Computed by inverting the pentagonal series with exact checked integer
/// arithmetic; `p(n)` fits in `u128` up to `n` a little beyond 1400.
pub fn partition_numbers(n_max: usize) -> Result<Vec<u128>> {
    let phi = phi_coefficients(n_max);
    let mut p: Vec<i128> = vec![0; n_max + 1];
    p[0] = 1;
    for n in 1..=n_max {
        // Σ_{k=0}^{n} c_k p(n-k) = 0 for n ≥ 1, with c_0 = 1.
        let mut acc: i128 = 0;
        for k in 1..=n {
            let ck = phi[k] as i128;
            if ck != 0 {
                acc = acc
                    .checked_sub(ck * p[n - k])
                    .ok_or_else(|| LppError::Resource(format!("partition number p({n}) overflows 128 bits")))?;
            }
        }
        p[n] = acc;
    }
    Ok(p[1..].iter().map(|&v| v as u128).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts partitions of n by brute-force recursion over largest parts.
    fn brute_partitions(n: u32, max_part: u32) -> u64 {
        if n == 0 {
            return 1;
        }
        (1..=max_part.min(n)).map(|k| brute_partitions(n - k, k)).sum()
    }

    #[test]
    fn phi_at_zero_is_one() {
        assert_eq!(euler_phi(0.0, 1e-15).unwrap().value, 1.0);
    }

    #[test]
    fn phi_at_half() {
        let v = euler_phi(0.5, 1e-17).unwrap();
        assert!((v.value - 0.288_788_095_1).abs() < 1e-9);
        assert!((v.value - euler_phi_product(0.5)).abs() < 1e-12);
        assert!(v.truncation_bound >= 0.0);
    }

    #[test]
    fn pentagonal_matches_product_on_grid() {
        for i in 1..=9 {
            let q = i as f64 / 10.0;
            let s = euler_phi_pentagonal(q, 1e-18).value;
            assert!((s - euler_phi_product(q)).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn log_product_is_used_near_one() {
        let v = euler_phi(0.97, 1e-17).unwrap();
        let direct = euler_phi_product(0.97);
        assert!((v.value / direct - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_rejects_q_at_least_one() {
        assert!(euler_phi(1.0, 1e-10).is_err());
        assert!(euler_phi(-0.1, 1e-10).is_err());
    }

    #[test]
    fn skeleton_rate_values() {
        assert_eq!(skeleton_rate(1.0).unwrap().lambda, 1.0);
        let zero = skeleton_rate(0.0).unwrap();
        assert!(zero.degenerate && zero.lambda == 0.0);
        let r = skeleton_rate(0.5).unwrap();
        assert!((r.mean_gap() - 11.99).abs() < 0.005);
        assert!((skeleton_rate(0.3).unwrap().mean_gap() - 558.46).abs() < 0.005);
    }

    #[test]
    fn skeleton_rate_is_increasing() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let l = skeleton_rate(i as f64 / 100.0).unwrap().lambda;
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn general_rate_reduces_to_constant_case() {
        for &p in &[0.2, 0.5, 0.8] {
            let g = skeleton_rate_general(|_| p, 1e-16).unwrap().value;
            assert!((g - skeleton_rate(p).unwrap().lambda).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn general_rate_with_certain_first_edge() {
        let v = skeleton_rate_general(|_| 1.0, 1e-12).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.terms_used, 0);
    }

    #[test]
    fn general_rate_matches_long_product() {
        let p = |j: usize| 1.0 - 0.5f64.powi(j as i32);
        let v = skeleton_rate_general(p, 1e-16).unwrap().value;
        let mut q = 1.0;
        let mut prod = 1.0;
        for j in 1..=1_000_000usize {
            q *= 1.0 - p(j);
            prod *= (1.0 - q) * (1.0 - q);
        }
        assert!((v - prod).abs() < 1e-9);
    }

    #[test]
    fn general_rate_detects_divergence() {
        // Q_k tends to a positive constant when p_k = c/k^2.
        let r = skeleton_rate_general_with_budget(|k| (0.5 / (k * k) as f64).min(1.0), 1e-12, 100_000);
        assert!(matches!(r, Err(LppError::Divergence(_))));
    }

    #[test]
    fn partitions_match_brute_force() {
        let p = partition_numbers(30).unwrap();
        assert_eq!(&p[..5], &[1, 2, 3, 5, 7]);
        assert_eq!(p[9], 42);
        for n in 1..=30u32 {
            assert_eq!(p[n as usize - 1], brute_partitions(n, n) as u128);
        }
        assert!(partition_numbers(0).unwrap().is_empty());
    }

    #[test]
    fn generating_function_identity() {
        let n = 50;
        let mut p = vec![1i128];
        p.extend(partition_numbers(n).unwrap().iter().map(|&v| v as i128));
        let c = phi_coefficients(n);
        for m in 0..=n {
            let conv: i128 = (0..=m).map(|k| c[k] as i128 * p[m - k]).sum();
            assert_eq!(conv, if m == 0 { 1 } else { 0 }, "m = {m}");
        }
    }

    #[test]
    fn partitions_overflow_is_reported() {
        assert!(partition_numbers(3000).is_err());
    }
}
