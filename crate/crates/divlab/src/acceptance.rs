//! The acceptance suite: twelve exact or statistical checks with time limits.
//!
//! Each criterion returns an [`Outcome`]; a criterion passes only when its
//! check succeeds and it finishes inside its time limit. Oracles used here
//! (brute-force run counting, closed forms, the maximal-clique enumeration)
//! are computed independently of the code path being checked.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use anyhow::Result;
use divlab_core::bitfam::{are_cross_intersecting, is_intersecting, is_t_intersecting, stats, Family, SubsetMask};
use divlab_core::booleanlab::{russo_check, Analysis, Bias, InfluenceMode};
use divlab_core::bounds::{binom, binom_signed, verify_lemma_key, verify_triangle_chain};
use divlab_core::constructions::{build_a_u, build_t_defining, fano_plane, lift_junta, random_intersecting, JuntaSpec};
use divlab_core::extremal::{enumerate_maximal_intersecting, max_diversity_search, SearchOptions};
use divlab_core::runstat::{rho_distribution, RhoMode};
use divlab_core::shiftlex::{is_shifted, lex_segment, max_cross_partner, shift_closure, LexOrder};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Relative gap allowed between the Russo finite difference and the influence.
pub const RUSSO_TOLERANCE: f64 = 1e-6;
pub const RUSSO_STEP: f64 = 1e-4;
pub const RUSSO_POINT: f64 = 0.45;
/// Monte Carlo cells must fall within this many standard errors.
pub const MC_SIGMAS: f64 = 3.5;
pub const MC_SAMPLES: u64 = 1_000_000;
pub const EXTREMAL_BUDGET_SECONDS: f64 = 600.0;

#[derive(Clone, Debug)]
pub struct Options {
    pub seed: u64,
    /// Smaller parameter ranges; outcomes are labelled as quick runs.
    pub quick: bool,
    pub extremal_budget_seconds: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: DEFAULT_SEED, quick: false, extremal_budget_seconds: EXTREMAL_BUDGET_SECONDS }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed_seconds: f64,
    pub limit_seconds: f64,
    pub quick: bool,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} [{:.2}s / {:.0}s]{} {}: {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed_seconds,
            self.limit_seconds,
            if self.quick { " (quick)" } else { "" },
            self.title,
            self.detail
        )
    }
}

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: impl Into<String>) -> Check {
        Check { pass, detail: detail.into() }
    }
}

type Runner = fn(&Options) -> Result<Check>;

const CRITERIA: [(u8, &str, f64, Runner); 12] = [
    (1, "diversity of A_2 equals C(n-3, k-2)", 10.0, diversity_of_a2),
    (2, "size of A_3 matches both closed forms", 10.0, size_of_a3),
    (3, "cyclic-run junta size and structure", 300.0, t_junta_structure),
    (4, "lemma sweep has no violations", 120.0, lemma_sweep),
    (5, "lex segments of cross-intersecting pairs cross-intersect", 60.0, kruskal_katona),
    (6, "exact biased-measure identities", 300.0, boolean_identities),
    (7, "majority influence closed form and ratio trend", 300.0, majority_influence),
    (8, "Russo finite difference matches total influence", 60.0, russo),
    (9, "run statistics: exact, Monte Carlo and long runs", 180.0, rho_statistics),
    (10, "extremal search agrees with the clique oracle", 600.0, extremal),
    (11, "triangle decomposition chain", 60.0, triangle_chain),
    (12, "shift closure structure", 60.0, shifting),
];

pub fn ids() -> impl Iterator<Item = u8> {
    CRITERIA.iter().map(|c| c.0)
}

pub fn run_one(id: u8, opts: &Options) -> Option<Outcome> {
    let &(id, title, limit, runner) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let check = runner(opts).unwrap_or_else(|e| Check::new(false, format!("error: {e:#}")));
    let elapsed = start.elapsed();
    let within = elapsed <= Duration::from_secs_f64(limit);
    let mut detail = check.detail;
    if !within {
        let _ = write!(detail, "; exceeded the {limit:.0}s limit");
    }
    Some(Outcome {
        id,
        title,
        pass: check.pass && within,
        detail,
        elapsed_seconds: elapsed.as_secs_f64(),
        limit_seconds: limit,
        quick: opts.quick,
    })
}

pub fn run_all(opts: &Options) -> Vec<Outcome> {
    ids().filter_map(|id| run_one(id, opts)).collect()
}

fn a_grid() -> impl Iterator<Item = (usize, usize)> {
    (5..=20usize).flat_map(|n| (2..=6.min((n - 1) / 2)).map(move |k| (n, k)))
}

fn diversity_of_a2(_: &Options) -> Result<Check> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for (n, k) in a_grid() {
        let got = stats(&build_a_u(n, k, 2)?).diversity;
        let want = binom(n as u64 - 3, k as u64 - 2);
        cases += 1;
        if BigUint::from(got) != want {
            bad.push(format!("({n},{k}): {got} vs {want}"));
        }
    }
    Ok(Check::new(bad.is_empty(), format!("{cases} cases, mismatches {bad:?}")))
}

fn size_of_a3(_: &Options) -> Result<Check> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for (n, k) in a_grid() {
        // the builder wants u <= k; for k = 2 lift the same defining family directly
        let fam = if k >= 3 { build_a_u(n, k, 3)? } else { lift_junta(&JuntaSpec::a_u(3)?, n, k)? };
        let (n, k) = (n as i64, k as i64);
        let first = BigInt::from(binom_signed(n - 1, k - 1)) + BigInt::from(binom_signed(n - 4, k - 3))
            - BigInt::from(binom_signed(n - 4, k - 1));
        let second =
            BigInt::from(3u32) * BigInt::from(binom_signed(n - 3, k - 2)) + BigInt::from(binom_signed(n - 3, k - 3));
        cases += 1;
        let size = BigInt::from(fam.len());
        if size != first || size != second {
            bad.push(format!("({n},{k}): {size} vs {first} / {second}"));
        }
    }
    Ok(Check::new(bad.is_empty(), format!("{cases} cases, mismatches {bad:?}")))
}

fn t_junta_structure(opts: &Options) -> Result<Check> {
    let top = if opts.quick { 10 } else { 12 };
    let mut pass = true;
    let mut detail = String::new();
    for r in 1..=top {
        let spec = build_t_defining(r)?;
        let count = spec.count();
        let size_ok = count == 1u64 << (2 * r);
        let structure_ok = r > 8 || (spec.is_intersecting() && spec.is_up_closed());
        pass &= size_ok && structure_ok;
        if !size_ok || !structure_ok {
            let _ = write!(detail, "r={r}: count {count}, structure {structure_ok}; ");
        }
    }
    if pass {
        let _ = write!(detail, "|T_r| = 4^r for r <= {top}; intersecting and up-closed for r <= 8");
    }
    Ok(Check::new(pass, detail))
}

fn lemma_sweep(_: &Options) -> Result<Check> {
    let mut tuples = 0;
    let mut violations = Vec::new();
    let mut worst = i128::MAX;
    for m in 1..=14usize {
        for a in 1..=4usize {
            for b in 1..=4usize {
                for cprime in [2usize, 3] {
                    if m <= (cprime + 1) * a.max(b) {
                        continue;
                    }
                    let r = verify_lemma_key(m, a, b, cprime)?;
                    tuples += 1;
                    worst = worst.min(r.worst_slack);
                    if !r.violations.is_empty() {
                        violations.push((m, a, b, cprime, r.violations.len()));
                    }
                }
            }
        }
    }
    Ok(Check::new(
        violations.is_empty() && tuples > 0,
        format!("{tuples} admissible tuples, smallest slack {worst}, violating tuples {violations:?}"),
    ))
}

fn kruskal_katona(opts: &Options) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let trials = if opts.quick { 200 } else { 1000 };
    let mut ok = 0;
    let mut nontrivial = 0;
    for _ in 0..trials {
        let n = rng.random_range(6..=12usize);
        let a = rng.random_range(1..=4usize);
        let b = rng.random_range(1..=4usize);
        // draw A from the sets meeting a small kernel so its partner is usually nonempty
        let kernel_size = rng.random_range(1..=3usize);
        let kernel: Vec<usize> = (1..=n).collect::<Vec<_>>().choose_multiple(&mut rng, kernel_size).copied().collect();
        let kernel = SubsetMask::from_elements(n, &kernel)?;
        let pool: Vec<SubsetMask> = LexOrder::new(n, a).filter(|s| s.intersects(kernel)).collect();
        let size = rng.random_range(1..=pool.len().min(40));
        let picks: Vec<SubsetMask> = pool.choose_multiple(&mut rng, size).copied().collect();
        let fam_a = Family::from_masks(n, Some(a), picks)?;
        let fam_b = max_cross_partner(&fam_a, b)?;
        if !fam_b.is_empty() {
            nontrivial += 1;
        }
        let la = lex_segment(fam_a.len(), a, n)?.realized;
        let lb = lex_segment(fam_b.len(), b, n)?.realized;
        if are_cross_intersecting(&la, &lb)? {
            ok += 1;
        }
    }
    Ok(Check::new(ok == trials, format!("{ok}/{trials} pairs, {nontrivial} with a nonempty partner")))
}

fn exact(m: &divlab_core::BiasedMeasure) -> Result<BigRational> {
    m.exact.clone().ok_or_else(|| anyhow::anyhow!("expected an exact value"))
}

fn boolean_identities(opts: &Options) -> Result<Check> {
    let top = if opts.quick { 6 } else { 8 };
    let biases = [Bias::ratio(1, 4)?, Bias::ratio(2, 5)?, Bias::ratio(1, 2)?];
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut failures = Vec::new();
    let mut checks = 0usize;
    for r in 1..=top {
        for (name, spec) in [("T", build_t_defining(r)?), ("majority", JuntaSpec::majority(2 * r + 1)?)] {
            let a = Analysis::new(&spec);
            if exact(&a.mu(biases[2]))? != half {
                failures.push(format!("{name}_{r}: mu_1/2"));
            }
            for &p in &biases {
                for i in 1..=spec.center_size() {
                    let general = exact(&a.influence(i, p, InfluenceMode::General)?)?;
                    let monotone = exact(&a.influence(i, p, InfluenceMode::Monotone)?)?;
                    let (lhs, rhs) = a.symmetric_identity(i, p)?;
                    checks += 2;
                    if general != monotone {
                        failures.push(format!("{name}_{r}: modes at i={i}, p={p}"));
                    }
                    if exact(&lhs)? != exact(&rhs)? {
                        failures.push(format!("{name}_{r}: identity at i={i}, p={p}"));
                    }
                }
            }
        }
    }
    Ok(Check::new(failures.is_empty(), format!("r <= {top}, {checks} exact coordinate checks, failures {failures:?}")))
}

fn majority_influence(opts: &Options) -> Result<Check> {
    let top = if opts.quick { 8 } else { 10 };
    let half = Bias::ratio(1, 2)?;
    let mut closed_ok = true;
    let mut ratios = Vec::new();
    for r in 1..=top {
        let j = 2 * r + 1;
        let maj = Analysis::new(&JuntaSpec::majority(j)?).influences(half, InfluenceMode::General).total;
        let maj = exact(&maj)?;
        let closed =
            BigRational::new(BigInt::from(binom(2 * r as u64, r as u64) * BigUint::from(j)), BigInt::one() << (2 * r));
        closed_ok &= maj == closed;
        if r >= 3 {
            let t = exact(&Analysis::new(&build_t_defining(r)?).influences(half, InfluenceMode::General).total)?;
            ratios.push((r, t / maj));
        }
    }
    let strict = ratios.windows(2).all(|w| w[1].1 < w[0].1);
    let stalls: Vec<usize> = ratios.windows(2).filter(|w| w[1].1 >= w[0].1).map(|w| w[1].0).collect();
    let shown: Vec<String> = ratios.iter().map(|(r, q)| format!("{r}:{:.6}", q.to_f64().unwrap_or(f64::NAN))).collect();
    let mut detail = format!("closed form r <= {top}: {closed_ok}; ratios {}", shown.join(" "));
    if !strict {
        let _ = write!(detail, "; not strictly decreasing at r = {stalls:?} (T_r coincides with majority for r <= 4)");
    }
    Ok(Check::new(closed_ok && strict, detail))
}

fn russo(_: &Options) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut record = |name: String, gap: f64| {
        worst = worst.max(gap);
        if gap.is_nan() || gap > RUSSO_TOLERANCE {
            failures.push(format!("{name}: {gap:.2e}"));
        }
    };
    let p0 = RUSSO_POINT;
    let h = RUSSO_STEP;

    let dictator = JuntaSpec::dictator(1, 1)?;
    let d = russo_check(&dictator, p0, h)?;
    record("dictator".into(), d.rel_gap);
    record("dictator influence is 1".into(), (d.total_influence - 1.0).abs());

    // majority on three points: mu_p = 3p^2 - 2p^3, derivative 6p - 6p^2
    let maj3 = JuntaSpec::majority(3)?;
    let m = russo_check(&maj3, p0, h)?;
    record("majority-3".into(), m.rel_gap);
    let analytic_derivative = 6.0 * p0 - 6.0 * p0 * p0;
    record(
        "majority-3 influence vs analytic".into(),
        (m.total_influence - analytic_derivative).abs() / analytic_derivative,
    );
    let mu = Analysis::new(&maj3).mu(Bias::real(p0)?).approx;
    record("majority-3 mu vs analytic".into(), (mu - (3.0 * p0 * p0 - 2.0 * p0.powi(3))).abs());

    for r in 1..=6 {
        let spec = JuntaSpec::majority(2 * r + 1)?;
        record(format!("D_{r}"), russo_check(&spec, p0, h)?.rel_gap);
    }
    Ok(Check::new(
        failures.is_empty(),
        format!("p0 = {p0}, h = {h:e}, worst relative gap {worst:.2e} (tolerance {RUSSO_TOLERANCE:e}); failures {failures:?}"),
    ))
}

/// Runs of a cyclic word counted by walking the circle one position at a time.
fn naive_runs(word: u64, len: usize) -> Vec<(bool, usize)> {
    let bit = |i: usize| word >> (i % len) & 1 == 1;
    let Some(start) = (0..len).find(|&i| bit(i) != bit(i + len - 1)) else {
        return vec![(bit(0), len)];
    };
    let mut runs = Vec::new();
    let mut i = start;
    while i < start + len {
        let symbol = bit(i);
        let mut length = 0;
        while i < start + len && bit(i) == symbol {
            length += 1;
            i += 1;
        }
        runs.push((symbol, length));
    }
    runs
}

fn naive_rho(word: u64, len: usize) -> usize {
    let runs = naive_runs(word, len);
    let mut ones: Vec<usize> = runs.iter().filter(|r| r.0).map(|r| r.1).collect();
    let mut zeros: Vec<usize> = runs.iter().filter(|r| !r.0).map(|r| r.1).collect();
    ones.sort_unstable_by(|a, b| b.cmp(a));
    zeros.sort_unstable_by(|a, b| b.cmp(a));
    let longest = ones.len().max(zeros.len());
    (0..longest).take_while(|&i| ones.get(i).unwrap_or(&0) == zeros.get(i).unwrap_or(&0)).count()
}

fn rho_statistics(opts: &Options) -> Result<Check> {
    let lengths: &[usize] = if opts.quick { &[11, 15] } else { &[11, 15, 19] };
    let samples = if opts.quick { MC_SAMPLES / 10 } else { MC_SAMPLES };
    let mut pass = true;
    let mut notes = Vec::new();
    for &len in lengths {
        let exact_dist = rho_distribution(len, RhoMode::Exact)?;
        let total = 1u64 << len;

        // independent oracle: walk every word
        let mut rho_oracle = vec![0u64; len / 2 + 1];
        let mut runs_oracle = vec![0u64; len + 1];
        for w in 0..total {
            rho_oracle[naive_rho(w, len)] += 1;
            for (_, l) in naive_runs(w, len) {
                for slot in &mut runs_oracle[1..=l] {
                    *slot += 1;
                }
            }
        }
        let rho_match = exact_dist.rho_counts == rho_oracle;
        let runs_match = exact_dist.long_runs.iter().all(|row| row.total == runs_oracle[row.t]);
        // closed form: L 2^-t + 2^(1-L) below t = L, and 2^(1-L) at t = L
        let formula_match = exact_dist.long_runs.iter().all(|row| {
            let expect =
                if row.t < len { len as f64 * 0.5f64.powi(row.t as i32) } else { 0.0 } + 0.5f64.powi(len as i32 - 1);
            (row.expected_runs - expect).abs() <= 1e-12 * expect.max(1.0)
        });
        let in_t_ok = exact_dist.in_t_count == Some(total / 2);
        let tail_ok = exact_dist.tail.windows(2).all(|w| w[0].prob >= w[1].prob);

        let mc = rho_distribution(len, RhoMode::MonteCarlo { samples, seed: opts.seed })?;
        let mut worst_z: f64 = 0.0;
        let mut mc_ok = true;
        for (k, &count) in exact_dist.rho_counts.iter().enumerate() {
            let p = count as f64 / total as f64;
            let observed = mc.rho_counts.get(k).copied().unwrap_or(0) as f64 / samples as f64;
            let se = (p * (1.0 - p) / samples as f64).sqrt();
            if se == 0.0 {
                mc_ok &= observed == p;
            } else {
                let z = (observed - p).abs() / se;
                worst_z = worst_z.max(z);
                mc_ok &= z <= MC_SIGMAS;
            }
        }
        let ok = rho_match && runs_match && formula_match && in_t_ok && tail_ok && mc_ok;
        pass &= ok;
        notes.push(format!(
            "L={len}: oracle {}, runs {}, closed form {}, |in_T| {}, tail {}, MC worst z {worst_z:.2}, closer formula {:?}, E[N]/(r 2^-t) mean {:.3}",
            rho_match, runs_match, formula_match, in_t_ok, tail_ok, exact_dist.closer_formula, exact_dist.half_formula_ratio
        ));
    }
    Ok(Check::new(pass, notes.join("; ")))
}

fn extremal(opts: &Options) -> Result<Check> {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, k) in [(4, 2), (5, 2), (6, 3), (7, 3)] {
        let oracle = enumerate_maximal_intersecting(n, k, 10_000_000)?;
        let search = max_diversity_search(n, k, SearchOptions::default(), &|| false)?;
        let ok = oracle.complete && search.complete && Some(search.best_diversity) == oracle.max_diversity();
        pass &= ok;
        notes.push(format!("({n},{k}) search {} oracle {:?}", search.best_diversity, oracle.max_diversity()));
    }
    if !opts.quick {
        let budget = opts.extremal_budget_seconds;
        let start = Instant::now();
        let deadline = Duration::from_secs_f64(budget);
        let stop = move || start.elapsed() >= deadline;
        let options = SearchOptions { budget_seconds: Some(budget), symmetry_break: true };
        let r = max_diversity_search(10, 3, options, &stop)?;
        let witness_ok = is_intersecting(&r.witness)? && stats(&r.witness).diversity == r.best_diversity;
        let ok = r.complete && r.best_diversity >= 7 && witness_ok;
        pass &= ok;
        let mut note = format!(
            "(10,3) best {} (seed {} from {}), complete {}, {:.2}s",
            r.best_diversity,
            r.seed_diversity,
            r.seed_family,
            r.complete,
            start.elapsed().as_secs_f64()
        );
        if r.best_diversity > 7 {
            note.push_str(" !!! EXCEEDS C(n-3, k-2) = 7 !!!");
        }
        notes.push(note);
    }
    Ok(Check::new(pass, notes.join("; ")))
}

fn triangle_chain(opts: &Options) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x11);
    let mut families = vec![("A_2(12,3)".to_string(), build_a_u(12, 3, 2)?), ("Fano".to_string(), fano_plane())];
    for i in 0..50 {
        let target = if i % 2 == 0 { usize::MAX } else { rng.random_range(3..=60) };
        families.push((format!("random #{i}"), random_intersecting(12, 3, target, &mut rng)?));
    }
    let mut failures = Vec::new();
    for (name, fam) in &families {
        let r = verify_triangle_chain(fam)?;
        if !(r.chain_holds && r.cross_intersecting && r.diversity <= r.decomposition.chain_bound) {
            failures.push(name.clone());
        }
    }
    Ok(Check::new(failures.is_empty(), format!("{} families, failures {failures:?}", families.len())))
}

fn shifting(opts: &Options) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x12);
    let mut failures = Vec::new();
    for i in 0..200 {
        let target = rng.random_range(2..=80);
        let fam = random_intersecting(10, 4, target, &mut rng)?;
        let c = shift_closure(&fam);
        let rest = c.filter(|s| !s.contains(1));
        let ok = is_shifted(&c) && c.len() == fam.len() && is_intersecting(&c)? && is_t_intersecting(&rest, 2)?;
        if !ok {
            failures.push(i);
        }
    }
    Ok(Check::new(failures.is_empty(), format!("200 families at (10,4), failures {failures:?}")))
}
