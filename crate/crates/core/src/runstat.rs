//! Run-length statistics of cyclic binary words.
//!
//! A word of length `L` is a mask whose bit `i - 1` is position `i` on the
//! circle. Runs wrap around: position `L` is adjacent to position `1`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitfam::low_bits;
use crate::error::{Error, Result};
use crate::exec;

/// Longest circle supported.
pub const MAX_LENGTH: usize = 63;

/// Longest circle the exact distribution will enumerate.
pub const MAX_EXACT_LENGTH: usize = 25;

/// Descending run lengths of both symbols of a cyclic word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunProfile {
    pub ones: Vec<usize>,
    pub zeros: Vec<usize>,
    pub length: usize,
    pub weight: usize,
}

/// `rho` together with the membership verdict `u > z`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoSample {
    pub rho: usize,
    /// `None` for even lengths, where ties are possible.
    pub in_t: Option<bool>,
}

/// Stack-resident run lists; at most 31 runs of either symbol fit in 63 bits.
#[derive(Clone, Copy)]
pub(crate) struct Runs {
    ones: [u8; 32],
    n_ones: usize,
    zeros: [u8; 32],
    n_zeros: usize,
}

impl Runs {
    pub(crate) fn of(word: u64, len: usize) -> Runs {
        let mut runs = Runs { ones: [0; 32], n_ones: 0, zeros: [0; 32], n_zeros: 0 };
        let full = low_bits(len);
        if word == 0 {
            runs.zeros[0] = len as u8;
            runs.n_zeros = 1;
            return runs;
        }
        if word == full {
            runs.ones[0] = len as u8;
            runs.n_ones = 1;
            return runs;
        }
        // rotate so that position 0 starts a run
        let prev = ((word << 1) | (word >> (len - 1))) & full;
        let start = ((word ^ prev) & full).trailing_zeros() as usize;
        let mut x = if start == 0 { word } else { ((word >> start) | (word << (len - start))) & full };
        let mut remaining = len;
        while remaining > 0 {
            if x & 1 == 1 {
                let r = (x.trailing_ones() as usize).min(remaining);
                runs.ones[runs.n_ones] = r as u8;
                runs.n_ones += 1;
                x = if r == 64 { 0 } else { x >> r };
                remaining -= r;
            } else {
                let r = (x.trailing_zeros() as usize).min(remaining);
                runs.zeros[runs.n_zeros] = r as u8;
                runs.n_zeros += 1;
                x = if r >= 64 { 0 } else { x >> r };
                remaining -= r;
            }
        }
        runs.ones[..runs.n_ones].sort_unstable_by(|a, b| b.cmp(a));
        runs.zeros[..runs.n_zeros].sort_unstable_by(|a, b| b.cmp(a));
        runs
    }

    #[inline]
    pub(crate) fn ones(&self) -> &[u8] {
        &self.ones[..self.n_ones]
    }

    #[inline]
    pub(crate) fn zeros(&self) -> &[u8] {
        &self.zeros[..self.n_zeros]
    }

    /// Zero-padded lexicographic comparison of the ones list against the zeros list.
    #[inline]
    pub(crate) fn compare(&self) -> Ordering {
        padded_compare(self.ones(), self.zeros())
    }

    /// Length of the common prefix of the zero-padded lists.
    #[inline]
    pub(crate) fn rho(&self) -> usize {
        let (u, z) = (self.ones(), self.zeros());
        let longest = u.len().max(z.len());
        (0..longest).take_while(|&i| u.get(i).copied().unwrap_or(0) == z.get(i).copied().unwrap_or(0)).count()
    }
}

fn padded_compare<T: Copy + Ord + Default>(u: &[T], z: &[T]) -> Ordering {
    let longest = u.len().max(z.len());
    for i in 0..longest {
        let a = u.get(i).copied().unwrap_or_default();
        let b = z.get(i).copied().unwrap_or_default();
        match a.cmp(&b) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

fn check_word(word: u64, len: usize) -> Result<()> {
    if len == 0 || len > MAX_LENGTH {
        return Err(Error::Parameter("circle length must lie in 1..=63"));
    }
    if word & !low_bits(len) != 0 {
        return Err(Error::Parameter("word has bits at or beyond its length"));
    }
    Ok(())
}

/// Membership in the cyclic-run family: ones runs beat zeros runs.
///
/// Callers guarantee `word < 2^len` and `1 <= len <= 63`.
#[inline]
pub fn in_t(word: u64, len: usize) -> bool {
    Runs::of(word, len).compare() == Ordering::Greater
}

pub fn run_profile(word: u64, len: usize) -> Result<RunProfile> {
    check_word(word, len)?;
    let runs = Runs::of(word, len);
    Ok(RunProfile {
        ones: runs.ones().iter().map(|&r| r as usize).collect(),
        zeros: runs.zeros().iter().map(|&r| r as usize).collect(),
        length: len,
        weight: word.count_ones() as usize,
    })
}

/// Lexicographic comparison of descending run lists, shorter list padded with zeros.
pub fn runseq_compare(u: &[usize], z: &[usize]) -> Result<Ordering> {
    let descending = |s: &[usize]| s.windows(2).all(|w| w[0] >= w[1]);
    if !descending(u) || !descending(z) {
        return Err(Error::NotDescending);
    }
    Ok(padded_compare(u, z))
}

pub fn rho(word: u64, len: usize) -> Result<RhoSample> {
    check_word(word, len)?;
    let runs = Runs::of(word, len);
    let in_t = (len % 2 == 1).then(|| runs.compare() == Ordering::Greater);
    Ok(RhoSample { rho: runs.rho(), in_t })
}

/// Number of maximal runs of either symbol with length at least `t`.
pub fn count_long_runs(word: u64, len: usize, t: usize) -> Result<usize> {
    check_word(word, len)?;
    if t == 0 {
        return Err(Error::Parameter("run threshold t must be at least 1"));
    }
    let runs = Runs::of(word, len);
    Ok(runs.ones().iter().chain(runs.zeros()).filter(|&&r| r as usize >= t).count())
}

/// How a distribution was obtained.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RhoMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// One row of the tail table `Pr[rho >= k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: usize,
    /// Number of words (or samples) with `rho >= k`.
    pub count: u64,
    pub prob: f64,
    /// Standard error of `prob`; zero for exact enumeration.
    pub stderr: f64,
}

/// One row of the `E[N(t)]` table, with the two candidate closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRunRow {
    pub t: usize,
    /// Sum of `N(t)` over all words (or samples).
    pub total: u64,
    pub expected_runs: f64,
    /// `L * 2^-t`, i.e. `(2r + 1) 2^-t`.
    pub circle_formula: f64,
    /// `r * 2^-t` with `r = (L - 1) / 2`.
    pub half_formula: f64,
}

/// Which candidate closed form for `E[N(t)]` tracks the data.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunFormula {
    Circle,
    Half,
}

/// Distribution of `rho` and of long-run counts on a circle of length `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoDistribution {
    pub length: usize,
    pub mode: RhoMode,
    /// Number of words enumerated or sampled.
    pub population: u64,
    /// `rho_counts[k]` words have `rho == k`.
    pub rho_counts: Vec<u64>,
    pub tail: Vec<TailRow>,
    /// Words with `u > z`; only for odd lengths.
    pub in_t_count: Option<u64>,
    pub long_runs: Vec<LongRunRow>,
    /// Formula with the smaller total log-ratio over `1 <= t < L`.
    pub closer_formula: RunFormula,
    /// Mean of `E[N(t)] / (r 2^-t)` over `1 <= t < L`.
    pub half_formula_ratio: f64,
    /// Least-squares `alpha` in `Pr[rho >= k] ~ exp(-alpha log2(k)^2)`, `k >= 2`.
    pub alpha_fit: Option<f64>,
}

#[derive(Clone)]
struct Tally {
    rho: Vec<u64>,
    run_lengths: Vec<u64>,
    in_t: u64,
}

impl Tally {
    fn new(len: usize) -> Tally {
        Tally { rho: alloc::vec![0; len / 2 + 1], run_lengths: alloc::vec![0; len + 1], in_t: 0 }
    }

    #[inline]
    fn record(&mut self, word: u64, len: usize) {
        let runs = Runs::of(word, len);
        self.rho[runs.rho()] += 1;
        for &r in runs.ones().iter().chain(runs.zeros()) {
            self.run_lengths[r as usize] += 1;
        }
        if runs.compare() == Ordering::Greater {
            self.in_t += 1;
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        if self.rho.is_empty() {
            return other;
        }
        self.rho = exec::add_counts(self.rho, other.rho);
        self.run_lengths = exec::add_counts(self.run_lengths, other.run_lengths);
        self.in_t += other.in_t;
        self
    }
}

/// `Pr[rho >= k]` and `E[N(t)]` by full enumeration or seeded sampling.
///
/// Sampling is counter-based: sample `i` is the `i`-th 64-bit output of a
/// ChaCha8 stream keyed by `seed`, so the result does not depend on how
/// samples are split across workers.
pub fn rho_distribution(len: usize, mode: RhoMode) -> Result<RhoDistribution> {
    if len == 0 || len > MAX_LENGTH {
        return Err(Error::Parameter("circle length must lie in 1..=63"));
    }
    let empty = Tally { rho: Vec::new(), run_lengths: Vec::new(), in_t: 0 };
    let (tally, population) = match mode {
        RhoMode::Exact => {
            if len > MAX_EXACT_LENGTH {
                return Err(Error::Cap {
                    what: "exact circle length",
                    value: len as u128,
                    cap: MAX_EXACT_LENGTH as u128,
                });
            }
            let total = 1u64 << len;
            let tally = exec::fold_blocks(
                total,
                exec::BLOCK,
                empty,
                |range| {
                    let mut t = Tally::new(len);
                    for w in range {
                        t.record(w, len);
                    }
                    t
                },
                Tally::merge,
            );
            (tally, total)
        }
        RhoMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Parameter("sample count must be positive"));
            }
            let mask = low_bits(len);
            let tally = exec::fold_blocks(
                samples,
                exec::BLOCK,
                empty,
                |range| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_word_pos(2 * range.start as u128);
                    let mut t = Tally::new(len);
                    for _ in range {
                        t.record(rng.next_u64() & mask, len);
                    }
                    t
                },
                Tally::merge,
            );
            (tally, samples)
        }
    };
    Ok(summarize(len, mode, population, tally))
}

fn summarize(len: usize, mode: RhoMode, population: u64, tally: Tally) -> RhoDistribution {
    let pop = population as f64;
    let exact = matches!(mode, RhoMode::Exact);
    let mut tail = Vec::with_capacity(tally.rho.len());
    let mut acc = 0u64;
    for k in (0..tally.rho.len()).rev() {
        acc += tally.rho[k];
        let prob = acc as f64 / pop;
        let stderr = if exact { 0.0 } else { libm::sqrt(prob * (1.0 - prob) / pop) };
        tail.push(TailRow { k, count: acc, prob, stderr });
    }
    tail.reverse();

    // N(t) totals: a run of length l counts for every t <= l
    let mut long_runs = Vec::with_capacity(len);
    let mut acc = 0u64;
    let half = (len as f64 - 1.0) / 2.0;
    for t in (1..=len).rev() {
        acc += tally.run_lengths[t];
        let scale = libm::exp2(-(t as f64));
        long_runs.push(LongRunRow {
            t,
            total: acc,
            expected_runs: acc as f64 / pop,
            circle_formula: len as f64 * scale,
            half_formula: half * scale,
        });
    }
    long_runs.reverse();

    let mut circle_err = 0.0;
    let mut half_err = 0.0;
    let mut ratio_sum = 0.0;
    let mut rows = 0usize;
    for row in long_runs.iter().filter(|r| r.t < len && r.expected_runs > 0.0) {
        circle_err += libm::fabs(libm::log(row.expected_runs / row.circle_formula));
        if row.half_formula > 0.0 {
            half_err += libm::fabs(libm::log(row.expected_runs / row.half_formula));
            ratio_sum += row.expected_runs / row.half_formula;
            rows += 1;
        } else {
            half_err = f64::INFINITY;
        }
    }
    let closer_formula = if circle_err <= half_err { RunFormula::Circle } else { RunFormula::Half };
    let half_formula_ratio = if rows > 0 { ratio_sum / rows as f64 } else { f64::NAN };

    RhoDistribution {
        length: len,
        mode,
        population,
        rho_counts: tally.rho,
        alpha_fit: fit_alpha(&tail),
        tail,
        in_t_count: (len % 2 == 1).then_some(tally.in_t),
        long_runs,
        closer_formula,
        half_formula_ratio,
    }
}

/// Least-squares fit of `-ln Pr[rho >= k] = alpha * log2(k)^2` through the origin.
pub fn fit_alpha(tail: &[TailRow]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for row in tail.iter().filter(|r| r.k >= 2 && r.prob > 0.0) {
        let x = libm::log2(row.k as f64);
        let x = x * x;
        num += -libm::log(row.prob) * x;
        den += x * x;
    }
    (den > 0.0).then(|| num / den)
}

/// Parses a binary literal where the first character is position 1.
pub fn parse_word(literal: &str) -> Result<(u64, usize)> {
    let len = literal.len();
    if len == 0 || len > MAX_LENGTH {
        return Err(Error::Parameter("word literal must have 1..=63 binary digits"));
    }
    let mut word = 0u64;
    for (i, c) in literal.chars().enumerate() {
        match c {
            '1' => word |= 1 << i,
            '0' => {}
            _ => return Err(Error::Parameter("word literal may contain only 0 and 1")),
        }
    }
    Ok((word, len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn word(s: &str) -> u64 {
        parse_word(s).unwrap().0
    }

    #[test]
    fn wraparound_profile() {
        let p = run_profile(word("1011011"), 7).unwrap();
        assert_eq!(p.ones, vec![3, 2]);
        assert_eq!(p.zeros, vec![1, 1]);
        assert_eq!(p.weight, 5);
    }

    #[test]
    fn constant_profiles() {
        let p = run_profile(0b11111, 5).unwrap();
        assert_eq!((p.ones, p.zeros), (vec![5], vec![]));
        let p = run_profile(0, 5).unwrap();
        assert_eq!((p.ones, p.zeros), (vec![], vec![5]));
    }

    #[test]
    fn eleven_bit_witness() {
        let p = run_profile(word("11110001000"), 11).unwrap();
        assert_eq!(p.ones, vec![4, 1]);
        assert_eq!(p.zeros, vec![3, 3]);
        let s = rho(word("11110001000"), 11).unwrap();
        assert_eq!(s, RhoSample { rho: 0, in_t: Some(true) });
    }

    #[test]
    fn sequence_comparisons() {
        assert_eq!(runseq_compare(&[4, 1], &[3, 3]).unwrap(), Ordering::Greater);
        assert_eq!(runseq_compare(&[2, 1], &[2, 2]).unwrap(), Ordering::Less);
        assert_eq!(runseq_compare(&[5], &[]).unwrap(), Ordering::Greater);
        assert_eq!(runseq_compare(&[1, 2], &[3]).unwrap_err(), Error::NotDescending);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(word("1100100"), 7).unwrap(), RhoSample { rho: 1, in_t: Some(false) });
        assert_eq!(rho(0b1111111, 7).unwrap(), RhoSample { rho: 0, in_t: Some(true) });
        // even length: rho defined, membership not
        assert_eq!(rho(word("1010"), 4).unwrap(), RhoSample { rho: 2, in_t: None });
    }

    #[test]
    fn long_run_counts() {
        assert_eq!(count_long_runs(word("1011011"), 7, 2).unwrap(), 2);
        assert_eq!(count_long_runs(0b11111, 5, 5).unwrap(), 1);
        assert_eq!(count_long_runs(0, 5, 5).unwrap(), 1);
        assert_eq!(count_long_runs(word("1011011"), 7, 1).unwrap(), 4);
        assert!(count_long_runs(1, 5, 0).is_err());
    }

    #[test]
    fn invalid_words() {
        assert!(run_profile(0b100000, 5).is_err());
        assert!(run_profile(0, 0).is_err());
        assert!(run_profile(0, 64).is_err());
        assert!(parse_word("10a").is_err());
    }

    #[test]
    fn exact_small_distribution() {
        let d = rho_distribution(11, RhoMode::Exact).unwrap();
        assert_eq!(d.tail[0].prob, 1.0);
        assert_eq!(d.tail.len(), 6);
        assert_eq!(d.in_t_count, Some(1 << 10));
        assert_eq!(d.rho_counts.iter().sum::<u64>(), 1 << 11);
    }

    #[test]
    fn exact_length_cap() {
        assert!(rho_distribution(26, RhoMode::Exact).unwrap_err().is_cap());
    }

    #[test]
    fn sampling_is_reproducible() {
        let mode = RhoMode::MonteCarlo { samples: 50_000, seed: 7 };
        let a = rho_distribution(15, mode).unwrap();
        let b = rho_distribution(15, mode).unwrap();
        assert_eq!(a, b);
        let mut total = 0;
        for row in &a.tail {
            assert!(row.stderr >= 0.0);
            total += row.count;
        }
        assert!(total > 0);
    }
}
