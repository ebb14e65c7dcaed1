//! Selection words: classification, coupling numbers and the power-series coefficients.
//!
//! A word is a finite sequence of letters applied one after the other to a
//! configuration. It is *good* if its last letter advances the front whatever
//! the input configuration, *bad* if it never does, and *ambivalent* otherwise.
//!
//! All letters of a word are at most its largest letter `M`, and the bin a
//! letter `ξ ≤ M` selects depends on a configuration only through its top
//! region above `B(X, M)`. That region evolves autonomously under such letters
//! and takes exactly `2^(M-1)` values, so running a word from every one of them
//! decides its class exactly. The same sweep, run without truncating the
//! region, decides how many top bins of the output are independent of the input.
//!
//! Words are stored in application order: `letters[0]` acts first. The usual
//! display writes them the other way round, so [`Word::from_display`] reverses.

use std::collections::HashMap;
use std::fmt;

use crate::chainbounds::{enumerate_states_unchecked, push_ball, Letter, ProjectedState};
use crate::error::{invalid, LppError, Result};

/// Largest `n` for which [`a_coefficients`] will run.
pub const AN_CEILING: usize = 14;

/// A nonempty word of positive letters, first-applied letter first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<u32>,
}

impl Word {
    /// Builds a word from letters in application order.
    pub fn new(letters: Vec<u32>) -> Result<Self> {
        if letters.is_empty() {
            return Err(invalid("a word needs at least one letter"));
        }
        if letters.contains(&0) {
            return Err(invalid("letters must be positive"));
        }
        Ok(Self { letters })
    }

    /// Builds a word from its display form, where the last-applied letter is written first.
    pub fn from_display(display: &[u32]) -> Result<Self> {
        Self::new(display.iter().rev().copied().collect())
    }

    /// Letters in application order.
    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    /// Letters in display order (last-applied first).
    pub fn display_letters(&self) -> Vec<u32> {
        self.letters.iter().rev().copied().collect()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Words are never empty; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Height `Σ (α_i - 1)`.
    pub fn height(&self) -> u32 {
        self.letters.iter().map(|a| a - 1).sum()
    }

    /// Largest letter.
    pub fn max_letter(&self) -> u32 {
        *self.letters.iter().max().expect("nonempty")
    }

    /// Number of letters equal to 1.
    pub fn ones(&self) -> usize {
        self.letters.iter().filter(|&&a| a == 1).count()
    }

    /// Strict suffixes in the sense of the last-applied letters: drop the first `i` letters, `i ≥ 1`.
    pub fn strict_suffixes(&self) -> impl Iterator<Item = Word> + '_ {
        (1..self.letters.len()).map(move |i| Word { letters: self.letters[i..].to_vec() })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.display_letters().iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Whether the last letter of a word advances the front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordClass {
    /// For every input configuration.
    Good,
    /// For no input configuration.
    Bad,
    /// For some inputs but not others.
    Ambivalent,
}

/// `α_i ≤ i` for every position `i` (1-based, application order).
pub fn is_triangular(a: &Word) -> bool {
    a.letters.iter().enumerate().all(|(i, &x)| x as usize <= i + 1)
}

/// `a ∈ V` and no strict suffix of `a` is in `V`.
pub fn is_minimal(a: &Word, in_class: impl Fn(&Word) -> bool) -> bool {
    in_class(a) && a.strict_suffixes().all(|s| !in_class(&s))
}

/// Transition table of the truncated top region for one maximal letter.
#[derive(Debug, Clone)]
struct SweepTable {
    states: usize,
    max_letter: usize,
    /// `next[s * M + (ξ - 1)]` is `(target, front_moved)`.
    next: Vec<(u32, bool)>,
}

impl SweepTable {
    fn new(m: u32) -> Self {
        let states = enumerate_states_unchecked(m);
        let index: HashMap<&ProjectedState, u32> = states.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
        let mut next = Vec::with_capacity(states.len() * m as usize);
        for s in &states {
            for xi in 1..=m {
                let (t, moved) = s.transition(Letter::Finite(xi));
                next.push((index[&t], moved));
            }
        }
        Self { states: states.len(), max_letter: m as usize, next }
    }

    fn classify(&self, letters: &[u32]) -> WordClass {
        let (mut any_moved, mut any_stuck) = (false, false);
        let last = letters.len() - 1;
        for start in 0..self.states {
            let mut s = start as u32;
            for (i, &x) in letters.iter().enumerate() {
                let (t, moved) = self.next[s as usize * self.max_letter + (x as usize - 1)];
                if i == last {
                    if moved {
                        any_moved = true;
                    } else {
                        any_stuck = true;
                    }
                }
                s = t;
            }
            if any_moved && any_stuck {
                return WordClass::Ambivalent;
            }
        }
        if any_moved {
            WordClass::Good
        } else {
            WordClass::Bad
        }
    }
}

/// Classifier with cached sweep tables and a memo of classified words.
#[derive(Debug, Default)]
pub struct Classifier {
    tables: Vec<Option<SweepTable>>,
    memo: HashMap<Vec<u32>, WordClass>,
}

impl Classifier {
    /// An empty classifier.
    pub fn new() -> Self {
        Self::default()
    }

    fn table(&mut self, m: u32) -> &SweepTable {
        let m = m as usize;
        if self.tables.len() <= m {
            self.tables.resize(m + 1, None);
        }
        self.tables[m].get_or_insert_with(|| SweepTable::new(m as u32))
    }

    /// Class of `a`, memoized.
    pub fn classify(&mut self, a: &Word) -> WordClass {
        if let Some(&c) = self.memo.get(&a.letters) {
            return c;
        }
        let c = self.table(a.max_letter()).classify(&a.letters);
        self.memo.insert(a.letters.clone(), c);
        c
    }

    /// `a` is good and no strict suffix is good.
    pub fn is_good_minimal(&mut self, a: &Word) -> bool {
        self.classify(a) == WordClass::Good && a.strict_suffixes().all(|s| self.classify(&s) != WordClass::Good)
    }
}

/// Class of `a` by the exact sweep over all top regions.
pub fn classify(a: &Word) -> WordClass {
    SweepTable::new(a.max_letter()).classify(&a.letters)
}

/// Largest `k` such that the `k` top bins of the output do not depend on the input.
///
/// Each top region is run without truncation; bins at or above the first
/// recorded one are then known exactly while deeper bins still carry arbitrary
/// input contents, so `k` cannot exceed the smallest recorded depth.
pub fn coupling_number(a: &Word) -> usize {
    let m = a.max_letter();
    let mut finals: Vec<Vec<u32>> = Vec::new();
    for s in enumerate_states_unchecked(m) {
        let mut bins = s.bins;
        for &x in &a.letters {
            push_ball(&mut bins, x);
        }
        bins.reverse();
        finals.push(bins);
    }
    let depth = finals.iter().map(Vec::len).min().unwrap_or(0);
    let first = &finals[0];
    (0..depth).take_while(|&i| finals.iter().all(|f| f[i] == first[i])).count()
}

/// Number of leading letters equal to 1 in application order counted over the whole word.
pub fn ones_count(a: &Word) -> usize {
    a.ones()
}

/// All words with exactly `len` letters and height `h`, in lexicographic order.
pub fn words_with(len: usize, h: u32) -> Vec<Word> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(len: usize, rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Word>) {
        if cur.len() == len {
            if rest == 0 {
                out.push(Word { letters: cur.clone() });
            }
            return;
        }
        for extra in 0..=rest {
            cur.push(extra + 1);
            rec(len, rest - extra, cur, out);
            cur.pop();
        }
    }
    if len > 0 {
        rec(len, h, &mut cur, &mut out);
    }
    out
}

/// Minimal good words with height at most `h_max`.
///
/// Words are grown from their last-applied letter by prepending earlier
/// letters. A node that is good or bad is never extended: any longer word
/// with a good suffix fails minimality, and a bad suffix makes the whole word
/// bad. Lengths are capped at `h_max + 1`, the largest length a minimal good
/// word of height at most `h_max` can have.
pub fn good_minimal_words(h_max: u32, classifier: &mut Classifier) -> Vec<Word> {
    let mut out = Vec::new();
    let max_len = h_max as usize + 1;
    // Stack holds suffixes (application order) that are ambivalent so far.
    let mut stack: Vec<Vec<u32>> = Vec::new();
    for last in 1..=h_max + 1 {
        let w = Word { letters: vec![last] };
        match classifier.classify(&w) {
            WordClass::Good => out.push(w),
            WordClass::Ambivalent => stack.push(w.letters),
            WordClass::Bad => {}
        }
    }
    while let Some(suffix) = stack.pop() {
        if suffix.len() >= max_len {
            continue;
        }
        let h: u32 = suffix.iter().map(|a| a - 1).sum();
        for first in 1..=(h_max - h + 1) {
            let mut letters = Vec::with_capacity(suffix.len() + 1);
            letters.push(first);
            letters.extend_from_slice(&suffix);
            let w = Word { letters };
            match classifier.classify(&w) {
                WordClass::Good => out.push(w),
                WordClass::Ambivalent => stack.push(w.letters),
                WordClass::Bad => {}
            }
        }
    }
    out.sort();
    out
}

/// Triangular words with no triangular strict suffix, height at most `h_max`
/// and length at most `h_max + 1`, that are good.
pub fn triangular_minimal_good_words(h_max: u32, classifier: &mut Classifier) -> Vec<Word> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    fn rec(h_left: u32, max_len: usize, cur: &mut Vec<u32>, out: &mut Vec<Word>) {
        if !cur.is_empty() {
            let w = Word { letters: cur.clone() };
            if is_minimal(&w, is_triangular) {
                out.push(w);
            }
        }
        if cur.len() == max_len {
            return;
        }
        let pos = cur.len() as u32 + 1;
        for x in 1..=pos.min(h_left + 1) {
            cur.push(x);
            rec(h_left - (x - 1), max_len, cur, out);
            cur.pop();
        }
    }
    rec(h_max, h_max as usize + 1, &mut cur, &mut out);
    out.retain(|w| classifier.classify(w) == WordClass::Good);
    out.sort();
    out
}

/// Binomial coefficients `c[n][k]` for `n ≤ n_max` by Pascal's rule.
fn pascal(n_max: usize) -> Vec<Vec<i128>> {
    let mut c = vec![vec![0i128; n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
        }
    }
    c
}

/// `a_n = Σ_α (-1)^{H(α)} binom(|α|, n - H(α))` over a word family with `H(α) ≤ n`.
fn coefficients_from(words: &[Word], n_max: usize) -> Vec<i128> {
    let binom = pascal(n_max + 2);
    // counts[h][l] = |family ∩ U_l^h|
    let mut counts = vec![vec![0i128; n_max + 3]; n_max + 1];
    for w in words {
        let h = w.height() as usize;
        if h <= n_max {
            counts[h][w.len()] += 1;
        }
    }
    (0..=n_max)
        .map(|n| {
            let mut a = 0i128;
            for (h, row) in counts.iter().enumerate().take(n + 1) {
                let sign = if h % 2 == 0 { 1 } else { -1 };
                for (l, &cnt) in row.iter().enumerate() {
                    if cnt != 0 && n - h <= l {
                        a += sign * binom[l][n - h] * cnt;
                    }
                }
            }
            a
        })
        .collect()
}

/// Both routes to the coefficients, for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coefficients {
    /// Via minimal good words.
    pub via_good_minimal: Vec<i128>,
    /// Via triangular minimal words that are good.
    pub via_triangular: Vec<i128>,
}

/// Computes `a_0..=a_{n_max}` through both word families.
pub fn a_coefficients_both(n_max: usize) -> Result<Coefficients> {
    if n_max > AN_CEILING {
        return Err(LppError::Resource(format!("n_max = {n_max} exceeds the enumeration ceiling {AN_CEILING}")));
    }
    let mut classifier = Classifier::new();
    let good = good_minimal_words(n_max as u32, &mut classifier);
    let tri = triangular_minimal_good_words(n_max as u32, &mut classifier);
    Ok(Coefficients { via_good_minimal: coefficients_from(&good, n_max), via_triangular: coefficients_from(&tri, n_max) })
}

/// Coefficients `a_0..=a_{n_max}` of `C(1-q) = Σ (-1)^n a_n q^n`.
///
/// Both word families are enumerated and the results must agree exactly.
pub fn a_coefficients(n_max: usize) -> Result<Vec<i128>> {
    let c = a_coefficients_both(n_max)?;
    if c.via_good_minimal != c.via_triangular {
        return Err(LppError::Internal(format!(
            "coefficient routes disagree: {:?} vs {:?}",
            c.via_good_minimal, c.via_triangular
        )));
    }
    Ok(c.via_good_minimal)
}

/// Partial sum of `p^{|α|} (1-p)^{H(α)}` over triangular minimal good words with `H(α) ≤ h_max`.
pub fn speed_series_lower(p: f64, h_max: u32) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("edge probability {p} outside (0, 1]")));
    }
    if h_max as usize > AN_CEILING {
        return Err(LppError::Resource(format!("h_max = {h_max} exceeds the enumeration ceiling {AN_CEILING}")));
    }
    let mut classifier = Classifier::new();
    let words = triangular_minimal_good_words(h_max, &mut classifier);
    Ok(words.iter().map(|w| p.powi(w.len() as i32) * (1.0 - p).powi(w.height() as i32)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RngStream;
    use crate::ibm::{Below, Configuration};

    fn d(display: &[u32]) -> Word {
        Word::from_display(display).unwrap()
    }

    /// All words whose letters sum to at most `total`.
    fn corpus(total: u32) -> Vec<Word> {
        let mut out = Vec::new();
        for len in 1..=total as usize {
            for h in 0..=(total - len as u32) {
                out.extend(words_with(len, h));
            }
        }
        out
    }

    /// A full configuration whose top region is the projected state `s`.
    fn representative(s: &ProjectedState, deep: &[u64], rng_bins: bool) -> Configuration {
        let mut front_first: Vec<u64> = s.bins.iter().rev().map(|&b| b as u64).collect();
        if front_first.is_empty() {
            front_first.push(s.k as u64 + deep.first().copied().unwrap_or(0));
        } else {
            // The bin just below the region must complete the count to at least k.
            let total: u64 = front_first.iter().sum();
            front_first.push(s.k as u64 - total + deep.first().copied().unwrap_or(0));
        }
        front_first.extend(deep.iter().skip(1).map(|&x| x.max(1)));
        Configuration::new(0, &front_first, if rng_bins { Below::Saturated } else { Below::Unit }).unwrap()
    }

    #[test]
    fn triangular_examples() {
        assert!(is_triangular(&d(&[1])));
        assert!(is_triangular(&d(&[2, 2, 1])));
        assert!(!is_triangular(&d(&[2, 2])));
        let w = d(&[2, 2, 1, 3, 2, 1]);
        assert!(is_triangular(&w));
        assert!(!is_minimal(&w, is_triangular));
        assert!(is_minimal(&d(&[2, 2, 1]), is_triangular));
    }

    #[test]
    fn class_examples() {
        for w in [d(&[1]), d(&[1, 3, 2]), d(&[1, 1]), d(&[1, 5, 5, 5])] {
            assert_eq!(classify(&w), WordClass::Good, "{w}");
        }
        assert_eq!(classify(&d(&[2, 1])), WordClass::Bad);
        assert_eq!(classify(&d(&[2])), WordClass::Ambivalent);
        assert_eq!(classify(&d(&[3, 2, 1])), WordClass::Bad);
        assert_eq!(classify(&d(&[3])), WordClass::Ambivalent);
    }

    #[test]
    fn three_two_is_already_bad() {
        // After the letter 2 the front bin holds at most two balls, so 3 cannot move it.
        assert_eq!(classify(&d(&[3, 2])), WordClass::Bad);
        assert!(!is_minimal(&d(&[3, 2, 1]), |w| classify(w) == WordClass::Bad));
        assert!(is_minimal(&d(&[3, 2]), |w| classify(w) == WordClass::Bad));
    }

    #[test]
    fn minimal_good_examples() {
        let good = |w: &Word| classify(w) == WordClass::Good;
        assert!(is_minimal(&d(&[1]), good));
        assert!(!is_minimal(&d(&[1, 1]), good));
        let w = d(&[2, 4, 2, 1]);
        assert!(is_minimal(&w, good));
        assert!(!(is_minimal(&w, is_triangular) && good(&w)));
        let v = d(&[2, 4, 2, 1, 1]);
        assert!(is_minimal(&v, is_triangular) && good(&v));
        assert!(!is_minimal(&v, good));
    }

    #[test]
    fn coupling_numbers() {
        for l in 1..=6 {
            assert_eq!(coupling_number(&Word::new(vec![1; l]).unwrap()), l);
        }
        assert_eq!(coupling_number(&d(&[2, 2, 1])), 2);
        assert_eq!(coupling_number(&d(&[2, 2])), 0);
    }

    #[test]
    fn composition_counts() {
        let binom = pascal(20);
        for h in 0..=8u32 {
            for l in 1..=8usize {
                let expect = binom[h as usize + l - 1][l - 1];
                assert_eq!(words_with(l, h).len() as i128, expect, "h={h} l={l}");
            }
        }
    }

    #[test]
    fn coefficients_up_to_six() {
        let c = a_coefficients_both(6).unwrap();
        assert_eq!(c.via_good_minimal, vec![1, 1, 1, 3, 7, 15, 29]);
        assert_eq!(c.via_triangular, c.via_good_minimal);
    }

    #[test]
    fn enumeration_ceiling() {
        assert!(matches!(a_coefficients(AN_CEILING + 1), Err(LppError::Resource(_))));
    }

    #[test]
    fn pruned_enumeration_matches_brute_force() {
        // Brute force: every word with height ≤ 5 and length ≤ height + 1.
        let mut cl = Classifier::new();
        let mut brute = Vec::new();
        for h in 0..=5u32 {
            for l in 1..=(h as usize + 1) {
                for w in words_with(l, h) {
                    if cl.is_good_minimal(&w) {
                        brute.push(w);
                    }
                }
            }
        }
        brute.sort();
        assert_eq!(good_minimal_words(5, &mut cl), brute);
    }

    #[test]
    fn suffix_closure_and_coupling_words() {
        let mut cl = Classifier::new();
        for w in corpus(8) {
            let c = cl.classify(&w);
            for s in w.strict_suffixes() {
                let cs = cl.classify(&s);
                if c == WordClass::Good {
                    assert_ne!(cs, WordClass::Bad, "{w} / {s}");
                }
                if c == WordClass::Bad {
                    assert_ne!(cs, WordClass::Good, "{w} / {s}");
                }
            }
            if coupling_number(&w) >= 1 {
                for x in 1..=4 {
                    let mut letters = w.letters().to_vec();
                    letters.push(x);
                    let ext = Word::new(letters).unwrap();
                    assert_ne!(cl.classify(&ext), WordClass::Ambivalent, "{ext}");
                }
            }
            if is_triangular(&w) {
                assert!(coupling_number(&w) >= w.ones(), "{w}");
                assert_ne!(c, WordClass::Ambivalent);
            }
        }
    }

    #[test]
    fn sweep_agrees_with_full_configurations() {
        let mut rng = RngStream::new(31, 0);
        for w in corpus(8) {
            let m = w.max_letter();
            let class = classify(&w);
            let (mut saw_move, mut saw_stuck) = (false, false);
            let states = enumerate_states_unchecked(m);
            for trial in 0..200 {
                let s = &states[trial % states.len()];
                let deep: Vec<u64> = (0..6).map(|_| rng.below(4)).collect();
                let mut x = representative(s, &deep, rng.bernoulli(0.5));
                let letters: Vec<Letter> = w.letters().iter().map(|&a| Letter::Finite(a)).collect();
                let moved = *x.apply_word(&letters).last().unwrap();
                if moved {
                    saw_move = true;
                } else {
                    saw_stuck = true;
                }
            }
            match class {
                WordClass::Good => assert!(!saw_stuck, "{w}"),
                WordClass::Bad => assert!(!saw_move, "{w}"),
                WordClass::Ambivalent => assert!(saw_move && saw_stuck, "{w}"),
            }
        }
    }

    #[test]
    fn series_lower_bound_is_monotone() {
        assert!((speed_series_lower(1.0, 4).unwrap() - 1.0).abs() < 1e-15);
        let upper = crate::chainbounds::bounds_c(0.5, 12).unwrap().upper;
        let mut prev = 0.0;
        for h in 0..=8 {
            let v = speed_series_lower(0.5, h).unwrap();
            assert!(v >= prev && v <= upper, "h={h} v={v}");
            prev = v;
        }
    }
}
