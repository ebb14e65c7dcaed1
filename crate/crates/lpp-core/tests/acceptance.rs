//! Acceptance suite: one PASS/FAIL line per headline criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails if any criterion fails, except those listed as unattainable
//! as stated; each of those also runs a corrected companion check that must pass.

use std::process::ExitCode;
use std::time::Instant;

use lpp_core::chainbounds::bounds_c;
use lpp_core::charged::{build_witness, maximal_paths_brute, verify_critical, Rational};
use lpp_core::euler::skeleton_rate;
use lpp_core::graph::{longest_path_profile, sample_window, skeleton_gap_pmf, EdgeLaw};
use lpp_core::harness::{agree_within, replicate, MonteCarloSummary, RngStream};
use lpp_core::ibm::{estimate_c_via_front, simulate_speed, Configuration, LetterLaw};
use lpp_core::mgs::{estimate_cf, ChargeLaw1};
use lpp_core::pwit::{brw_min_displacement, shortest_path, simulate_pwit};
use lpp_core::words::a_coefficients_both;

struct Outcome {
    pass: bool,
    detail: String,
    /// Set when the literal statement cannot hold; `companion` then carries the corrected check.
    unattainable: bool,
    companion: Option<(bool, String)>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, unattainable: false, companion: None }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn summary(samples: &[f64]) -> MonteCarloSummary {
    MonteCarloSummary::from_samples(samples).expect("at least two samples")
}

/// `L_n / n` over `reps` windows of size `n`.
fn graph_dp(p: f64, n: usize, reps: usize, seed: u64) -> MonteCarloSummary {
    let law = EdgeLaw::Bernoulli(p);
    let v = replicate(reps, seed, |rng| {
        let w = sample_window(n, &law, rng).expect("valid window");
        *longest_path_profile(&w).iter().max().expect("nonempty") as f64 / n as f64
    });
    summary(&v)
}

fn skeleton_rate_table() -> Outcome {
    let table = [(0.3, 558.46), (0.5, 11.99), (0.6, 4.9), (0.8, 1.73), (0.9, 1.26)];
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (p, target) in table {
        let gap = skeleton_rate(p).expect("valid p").mean_gap();
        let rel = (gap - target).abs() / target;
        worst = worst.max(rel);
        detail.push(format!("{p}:{gap:.3}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 0.005 && secs < 1.0,
        format!("1/lambda {} | worst rel err {worst:.2e} | {secs:.3}s", detail.join(" ")),
    )
}

fn word_coefficients() -> (Outcome, Outcome) {
    let start = Instant::now();
    let c = a_coefficients_both(8);
    let secs = start.elapsed().as_secs_f64();
    let expected: Vec<i128> = vec![1, 1, 1, 3, 7, 15, 29, 54, 102];
    match c {
        Ok(c) => (
            Outcome::new(
                c.via_good_minimal == expected,
                format!("a_0..a_8 = {:?} | {secs:.3}s", c.via_good_minimal),
            ),
            Outcome::new(
                c.via_good_minimal == c.via_triangular,
                format!("good-minimal {:?} vs triangular {:?}", c.via_good_minimal, c.via_triangular),
            ),
        ),
        Err(e) => (Outcome::new(false, e.to_string()), Outcome::new(false, e.to_string())),
    }
}

/// Printed closed forms of the order-3 bounds, written out independently of the chain solver.
fn lower3(p: f64) -> f64 {
    let num = p * (p * p - 3.0 * p + 3.0).powi(2) * (p.powi(4) - 6.0 * p.powi(3) + 14.0 * p * p - 16.0 * p + 8.0);
    let den =
        3.0 * p.powi(6) - 26.0 * p.powi(5) + 96.0 * p.powi(4) - 196.0 * p.powi(3) + 235.0 * p * p - 158.0 * p + 47.0;
    num / den
}

fn upper3(p: f64) -> f64 {
    (p.powi(3) - 2.0 * p * p + p - 1.0) / (p.powi(5) - 4.0 * p.powi(4) + 8.0 * p.powi(3) - 9.0 * p * p + 6.0 * p - 3.0)
}

fn order_three_rationals() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let b = bounds_c(p, 3).expect("valid p");
        worst = worst.max((b.lower - lower3(p)).abs()).max((b.upper - upper3(p)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(worst <= 1e-10 && secs < 1.0, format!("max |chain - closed form| = {worst:.2e} | {secs:.3}s"))
}

fn sandwich_and_gap(graph_half: &MonteCarloSummary) -> Outcome {
    let mut ok = true;
    let mut worst_slack = f64::INFINITY;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let mut prev = bounds_c(p, 2).expect("valid p");
        ok &= prev.gap() <= (1.0 - p).powi(2) + 1e-12;
        for k in 3..=10 {
            let b = bounds_c(p, k).expect("valid p");
            worst_slack = worst_slack.min((1.0 - p).powi(k as i32) - b.gap());
            ok &= b.gap() <= (1.0 - p).powi(k as i32) + 1e-12;
            ok &= b.lower >= prev.lower - 1e-12 && b.upper <= prev.upper + 1e-12;
            prev = b;
        }
    }
    let b12 = bounds_c(0.5, 12).expect("valid p");
    let inside = graph_half.overlaps(b12.lower, b12.upper, 3.0);
    Outcome::new(
        ok && inside,
        format!(
            "k=2..10 gaps and nesting {} (min slack {worst_slack:.2e}) | graph C(0.5) = {:.5} ± {:.5} vs [{:.6}, {:.6}]",
            mark(ok),
            graph_half.mean,
            graph_half.std_error(),
            b12.lower,
            b12.upper
        ),
    )
}

fn taylor_at_one() -> Outcome {
    let mut literal = true;
    let mut corrected = true;
    let mut parts = Vec::new();
    for p in [0.95, 0.97] {
        let q: f64 = 1.0 - p;
        let quartic = 1.0 - q + q * q - 3.0 * q.powi(3) + 7.0 * q.powi(4);
        let b = bounds_c(p, 6).expect("valid p");
        for v in [b.lower, b.upper] {
            let ratio = (v - quartic) / q.powi(5);
            literal &= ratio.abs() <= 1.0;
            corrected &= ratio.abs() <= 16.0;
            parts.push(format!("{ratio:.2}"));
        }
    }
    // The residual is the next term of the expansion, -a_5 (1-p)^5 with a_5 = 15, read off closer to p = 1.
    let q: f64 = 0.005;
    let b = bounds_c(1.0 - q, 8).expect("valid p");
    let fifth = (b.lower - (1.0 - q + q * q - 3.0 * q.powi(3) + 7.0 * q.powi(4))) / q.powi(5);
    corrected &= (fifth + 15.0).abs() < 0.5;
    Outcome {
        pass: literal,
        detail: format!("(C_6 - quartic)/(1-p)^5 at p=0.95,0.97 (lower, upper): {}", parts.join(", ")),
        unattainable: true,
        companion: Some((
            corrected,
            format!("residual within 16(1-p)^5 at p=0.95,0.97; fifth coefficient at p=0.995 is {fifth:.3} (expected -15)"),
        )),
    }
}

fn perfect_simulation_headline() -> Outcome {
    let start = Instant::now();
    match estimate_cf(&ChargeLaw1::ShiftedExp, 0.7, 100_000, 20_240_601) {
        Ok(e) => {
            let s = &e.summary;
            Outcome::new(
                s.overlaps(0.4432 - 0.0006, 0.4432 + 0.0006, 3.0),
                format!(
                    "N=1e5: {:.5} ± {:.5} vs 0.4432 ± 0.0006 | mean T*^2 {:.1} | {:.1}s",
                    s.mean,
                    s.std_error(),
                    e.mean_t_star_sq,
                    start.elapsed().as_secs_f64()
                ),
            )
        }
        Err(err) => Outcome::new(false, err.to_string()),
    }
}

fn four_routes(graph_half: &MonteCarloSummary) -> Outcome {
    let law = LetterLaw::Geometric(0.5);
    let ibm = simulate_speed(&law, 1_000_000, &Configuration::saturated_single(), 10, 41).expect("valid law");
    let front = estimate_c_via_front(0.5, 1_000_000, 1000, 10, 42).expect("valid p");
    let bern = ChargeLaw1::TwoAtom { p: 0.5, x: f64::NEG_INFINITY };
    let mgs = estimate_cf(&bern, 0.0, 100_000, 43).expect("valid law").summary;
    let b12 = bounds_c(0.5, 12).expect("valid p");
    let routes = [("graph", graph_half), ("ibm", &ibm), ("front", &front), ("mgs", &mgs)];
    let mut ok = true;
    for (i, (_, a)) in routes.iter().enumerate() {
        ok &= a.overlaps(b12.lower, b12.upper, 3.0);
        for (_, b) in &routes[i + 1..] {
            ok &= agree_within(a, b, 3.0);
        }
    }
    let text: Vec<String> =
        routes.iter().map(|(name, s)| format!("{name} {:.5}±{:.5}", s.mean, s.std_error())).collect();
    Outcome::new(ok, format!("{} | k=12 [{:.6}, {:.6}]", text.join(", "), b12.lower, b12.upper))
}

fn skeleton_gap_law() -> Outcome {
    let p: f64 = 0.5;
    let q = 1.0 - p;
    let reference = [p, 0.0, p.powi(4) * q, p.powi(7) * q.powi(3) + 3.0 * p.powi(5) * q * q];
    // Exact enumeration of the 2^10 graphs on five vertices adds p^6 q^4 at gap 4.
    let corrected_four = reference[3] + p.powi(6) * q.powi(4);
    let est = skeleton_gap_pmf(p, 4, 100_000, 77).expect("valid p");
    let sigma = |i: usize| est[i].ci95 / 1.96;
    let within = |i: usize, v: f64| (est[i].estimate - v).abs() <= 3.0 * sigma(i).max(1e-12);
    let head_ok = (0..3).all(|i| within(i, reference[i]));
    let literal_four = within(3, reference[3]);
    let corrected_ok = within(3, corrected_four);
    let text: Vec<String> = est.iter().map(|g| format!("{:.5}", g.estimate)).collect();
    Outcome::new(
        head_ok && corrected_ok,
        format!(
            "1e5 reps: [{}] | n=1..3 {} | n=4 vs reference {:.5}: {} | n=4 vs corrected {:.5}: {}",
            text.join(", "),
            mark(head_ok),
            reference[3],
            mark(literal_four),
            corrected_four,
            mark(corrected_ok)
        ),
    )
}

fn shortest_paths() -> Outcome {
    let (n, p) = (10usize, 0.3f64);
    let law = shortest_path(n, p, 100_000, 55).expect("valid parameters");
    let one = p;
    let two = (1.0 - p) * (1.0 - (1.0 - p * p).powi(n as i32 - 2));
    let ok_one = (law.prob(1) - one).abs() <= 3.0 * law.std_error(one);
    let ok_two = (law.prob(2) - two).abs() <= 3.0 * law.std_error(two);
    Outcome::new(
        ok_one && ok_two,
        format!(
            "(10, 0.3), 1e5 reps: P(S=1) {:.6} vs {one:.5}, P(S=2) {:.5} vs {two:.5}",
            law.prob(1),
            law.prob(2)
        ),
    )
}

fn pwit_moments() -> Outcome {
    let runs = replicate(10_000, 66, |rng| simulate_pwit(3.0, rng).expect("valid horizon"));
    let mut ok = true;
    let mut worst = 0.0f64;
    for t in [1.0f64, 2.0, 3.0] {
        let pop: Vec<f64> = runs.iter().map(|r| r.population(t) as f64).collect();
        let s = summary(&pop);
        ok &= s.within_sigmas(t.exp(), 3.0);
        worst = worst.max((s.mean - t.exp()).abs() / s.std_error());
        let mut fact = 1.0;
        for l in 1..=4u32 {
            fact *= l as f64;
            let z: Vec<f64> = runs.iter().map(|r| r.generation_count(t, l) as f64).collect();
            let s = summary(&z);
            let exact = t.powi(l as i32) / fact;
            ok &= s.within_sigmas(exact, 3.0);
            worst = worst.max((s.mean - exact).abs() / s.std_error());
        }
    }
    Outcome::new(ok, format!("t=1,2,3, generations 1..4 and population, 1e4 reps | worst deviation {worst:.2} sigma"))
}

fn criticality_witnesses() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in ["0", "1/2", "1/3", "-1", "-2", "-11/7"] {
        let x = Rational::parse(s).expect("literal rational");
        let g = build_witness(x).expect("supported value");
        let c = verify_critical(&g, x.to_f64()).expect("valid graph");
        let mut good = c.is_critical() && g.is_admissible();
        let mut brute = "dp";
        if g.n <= 24 {
            let paths = maximal_paths_brute(&g, x.to_f64()).expect("small graph");
            let mut reds: Vec<usize> = paths.iter().map(|p| g.counts(p).1).collect();
            reds.sort_unstable();
            reds.dedup();
            good &= reds == c.maximal_red_counts;
            brute = "brute";
        }
        ok &= good;
        parts.push(format!("{s}(n={},{brute}) {}", g.n, mark(good)));
    }
    Outcome::new(ok, parts.join(", "))
}

fn small_p_band() -> Outcome {
    let e = std::f64::consts::E;
    let mut ratios = Vec::new();
    let mut ok = true;
    for (i, p) in [0.1f64, 0.05, 0.02].into_iter().enumerate() {
        let s = simulate_speed(&LetterLaw::Geometric(p), 1_000_000, &Configuration::saturated_single(), 8, 90 + i as u64)
            .expect("valid law");
        let (r, se) = (s.mean / p, s.std_error() / p);
        ok &= r - 3.0 * se > 1.0 && r + 3.0 * se < e;
        ratios.push((r, se));
    }
    for w in ratios.windows(2) {
        ok &= w[1].0 - w[0].0 > 3.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
    }
    let m = brw_min_displacement(2000, 10_000, &mut RngStream::new(2000, 0)).expect("valid sizes") / 2000.0;
    let brw_ok = m >= (-1.0f64).exp() && m <= (-1.0f64).exp() + 0.05;
    let text: Vec<String> = ratios.iter().map(|(r, se)| format!("{r:.4}±{se:.4}")).collect();
    Outcome::new(
        ok && brw_ok,
        format!(
            "C(p)/p at p=0.1,0.05,0.02: {} (in (1, e), increasing) | selected walk n=2000 beam 1e4: M/n = {m:.4} in [1/e, 1/e+0.05] {}",
            text.join(", "),
            mark(brw_ok)
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let graph_half = graph_dp(0.5, 2000, 100, 31);
    let (an, dual) = word_coefficients();
    let results: Vec<(&str, Outcome)> = vec![
        ("skeleton-rate table", skeleton_rate_table()),
        ("a_n exactness", an),
        ("dual word-family identity", dual),
        ("order-3 closed forms", order_three_rationals()),
        ("sandwich and gap", sandwich_and_gap(&graph_half)),
        ("expansion at p=1", taylor_at_one()),
        ("perfect simulation headline", perfect_simulation_headline()),
        ("four-route consistency", four_routes(&graph_half)),
        ("skeleton-gap law", skeleton_gap_law()),
        ("shortest path", shortest_paths()),
        ("tree moments", pwit_moments()),
        ("criticality witnesses", criticality_witnesses()),
        ("small-p band", small_p_band()),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", mark(o.pass), o.detail);
        if let Some((ok, text)) = &o.companion {
            println!("     corrected check {}: {text}", mark(*ok));
            if !ok {
                failed += 1;
            }
        }
        if !o.pass && !o.unattainable {
            failed += 1;
        }
        if !o.pass && o.unattainable {
            println!("     unattainable as stated; not counted (see README)");
        }
    }
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!(
        "acceptance: {passed}/{} criteria pass, {failed} unexpected failure(s), {:.1}s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
