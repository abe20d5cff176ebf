//! Command-line front end.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use divlab_core::bitfam::{is_intersecting, is_t_intersecting, stats, Family};
use divlab_core::booleanlab::{
    counterexample_table, gamma_p, mu_p, russo_check, total_influence, Bias, BiasRule, CounterexampleRow,
};
use divlab_core::bounds::{binom_u128, diversity_bound, verify_lemma_key, verify_triangle_chain};
use divlab_core::constructions::{
    build_a_u, build_d_r, build_t_defining, complete_uniform, fano_plane, lift_junta, random_intersecting, star,
    JuntaSpec, LIFT_CAP, MAX_T_RADIUS,
};
use divlab_core::extremal::{max_diversity_search, SearchOptions, MAX_VERTICES};
use divlab_core::runstat::{parse_word, rho, rho_distribution, run_profile, RhoMode, MAX_EXACT_LENGTH};
use divlab_core::shiftlex::{is_shifted, lex_partner_max, lex_segment, shift_closure, shift_family};
use divlab_core::{BiasedMeasure, Error as CoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::acceptance;
use crate::format;
use crate::report::{write_csv, Assertion, Relation, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "divlab", version, about = "Exact experiments on the diversity of intersecting families")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "DIVLAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = acceptance::DEFAULT_SEED)]
    pub seed: u64,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Also write the results table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Wall-clock budget in seconds for searches.
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Use the reduced parameter ranges.
    #[arg(long, global = true)]
    pub quick: bool,
    /// Validate parameters and stop before computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build, summarize or check a family.
    #[command(subcommand)]
    Family(FamilyCommand),
    /// Triangle decomposition of an intersecting family and its inequalities.
    Decompose { path: PathBuf },
    /// Sweep the cross-intersecting lemma for one parameter tuple.
    LemmaSweep {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 2)]
        cprime: usize,
    },
    /// Lex segments and their largest cross-intersecting partners.
    #[command(subcommand)]
    Lex(LexCommand),
    /// Apply one (i, j)-shift, or shift until fixed.
    Shift {
        path: PathBuf,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Biased measures of junta families.
    #[command(subcommand)]
    Boolean(BooleanCommand),
    /// Run statistics on cyclic words.
    #[command(subcommand)]
    Rho(RhoCommand),
    /// Exhaustive maximum-diversity search.
    Extremal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        emit_witness: Option<PathBuf>,
        /// Search without fixing {1..k} as a member.
        #[arg(long)]
        no_symmetry_break: bool,
    },
    /// Run the acceptance suite.
    VerifyAll {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Star,
    #[value(name = "a-u")]
    AU,
    #[value(name = "d-r")]
    DR,
    Fano,
    Complete,
    Random,
    TLift,
}

#[derive(Subcommand, Debug)]
pub enum FamilyCommand {
    Build {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// `u` for A_u.
        #[arg(long, default_value_t = 2)]
        u: usize,
        /// `r` for D_r and the cyclic-run junta.
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Center of the star.
        #[arg(long, default_value_t = 1)]
        element: usize,
        /// Member count for random families (default: maximal).
        #[arg(long)]
        target: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Stats {
        path: PathBuf,
    },
    Check {
        path: PathBuf,
        /// Also test t-intersection for this t.
        #[arg(long, default_value_t = 1)]
        t: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum LexCommand {
    /// The first m k-subsets of [n] in lex order.
    Segment {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Longest lex prefix of a-sets cross-intersecting L(b_size, b).
    Partner {
        #[arg(long)]
        b_size: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum JuntaKind {
    Majority,
    T,
    Dictator,
    Threshold,
    #[value(name = "a-u")]
    AU,
}

#[derive(Args, Debug, Clone)]
pub struct JuntaArgs {
    #[arg(long, value_enum, default_value = "majority")]
    pub family: JuntaKind,
    /// Radius: the center is [2r + 1] for majority and T.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Center size for dictator and threshold.
    #[arg(long, default_value_t = 3)]
    pub j: usize,
    /// Threshold for `threshold`, `u` for `a-u`.
    #[arg(long, default_value_t = 2)]
    pub t: usize,
}

#[derive(Subcommand, Debug)]
pub enum BooleanCommand {
    Mu {
        #[command(flatten)]
        junta: JuntaArgs,
        #[arg(long, default_value = "1/2")]
        p: Bias,
    },
    Influence {
        #[command(flatten)]
        junta: JuntaArgs,
        #[arg(long, default_value = "1/2")]
        p: Bias,
    },
    Gammap {
        #[command(flatten)]
        junta: JuntaArgs,
        #[arg(long, default_value = "1/2")]
        p: Bias,
    },
    Russo {
        #[command(flatten)]
        junta: JuntaArgs,
        #[arg(long, default_value_t = 0.45)]
        p0: f64,
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
    },
    CounterexampleTable {
        /// Inclusive range `lo..hi`.
        #[arg(long, default_value = "2..10")]
        r: String,
        /// Fixed bias; the default is max(1/4, 1/2 - 1/r).
        #[arg(long)]
        p: Option<Bias>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Subcommand, Debug)]
pub enum RhoCommand {
    Dist {
        #[arg(long = "L", alias = "length")]
        length: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    Profile {
        /// Binary word, first character is position 1.
        #[arg(long)]
        word: String,
    },
}

/// Parses argv, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("divlab: {e:#}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.chain().find_map(|c| c.downcast_ref::<CoreError>()) {
        Some(core) if core.is_cap() => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

fn cap_error(what: &'static str, value: u128, cap: u128) -> anyhow::Error {
    CoreError::Cap { what, value, cap }.into()
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    if g.threads > 0 {
        // a second call fails harmlessly when the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(g.threads).build_global();
    }
    let start = Instant::now();
    let mut report = dispatch(&cli.command, g)?;
    report.finish(start.elapsed());
    report.param("threads", g.threads);
    match &g.json {
        Some(path) => report.write(path)?,
        None => println!("{}", report.to_json()?),
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_ASSERTION })
}

fn dry_run(mut report: Report) -> Result<Report> {
    report.set_results(json!({ "dry_run": true }))?;
    Ok(report)
}

fn dispatch(command: &Command, g: &Global) -> Result<Report> {
    match command {
        Command::Family(cmd) => family(cmd, g),
        Command::Decompose { path } => decompose(path, g),
        Command::LemmaSweep { m, a, b, cprime } => lemma(*m, *a, *b, *cprime, g),
        Command::Lex(cmd) => lex(cmd, g),
        Command::Shift { path, i, j, out } => shift(path, *i, *j, out.as_deref(), g),
        Command::Boolean(cmd) => boolean(cmd, g),
        Command::Rho(cmd) => rho_cmd(cmd, g),
        Command::Extremal { n, k, emit_witness, no_symmetry_break } => {
            extremal(*n, *k, emit_witness.as_deref(), !no_symmetry_break, g)
        }
        Command::VerifyAll { only } => verify_all(only, g),
    }
}

#[derive(Serialize)]
struct FamilySummary {
    n: usize,
    k: Option<usize>,
    size: usize,
    degrees: Vec<usize>,
    max_degree: usize,
    max_degree_element: Option<usize>,
    diversity: usize,
}

fn summary(fam: &Family) -> FamilySummary {
    let s = stats(fam);
    FamilySummary {
        n: fam.n(),
        k: fam.k(),
        size: s.size,
        degrees: s.degrees,
        max_degree: s.max_degree,
        max_degree_element: s.max_degree_element,
        diversity: s.diversity,
    }
}

fn check_lift_size(n: usize, k: usize) -> Result<()> {
    let count = binom_u128(n as u64, k as u64);
    if count > LIFT_CAP {
        return Err(cap_error("C(n, k)", count, LIFT_CAP));
    }
    Ok(())
}

fn family(cmd: &FamilyCommand, g: &Global) -> Result<Report> {
    match cmd {
        FamilyCommand::Build { kind, n, k, u, r, element, target, out } => {
            let mut report = Report::new("family build");
            report.param("kind", format!("{kind:?}")).param("n", n).param("k", k);
            match kind {
                Kind::AU => {
                    report.param("u", u);
                }
                Kind::DR | Kind::TLift => {
                    report.param("r", r);
                }
                Kind::Star => {
                    report.param("element", element);
                }
                Kind::Random => {
                    report.param("target", target);
                    report.seed = Some(g.seed);
                }
                _ => {}
            }
            if *kind != Kind::Fano {
                check_lift_size(*n, *k)?;
            }
            if *kind == Kind::TLift && *r > MAX_T_RADIUS {
                return Err(cap_error("r", *r as u128, MAX_T_RADIUS as u128));
            }
            if g.dry_run {
                return dry_run(report);
            }
            let fam = match kind {
                Kind::Star => star(*n, *k, *element)?,
                Kind::AU => build_a_u(*n, *k, *u)?,
                Kind::DR => build_d_r(*n, *k, *r)?,
                Kind::Fano => fano_plane(),
                Kind::Complete => complete_uniform(*n, *k)?,
                Kind::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                    random_intersecting(*n, *k, target.unwrap_or(usize::MAX), &mut rng)?
                }
                Kind::TLift => lift_junta(&build_t_defining(*r)?, *n, *k)?,
            };
            if let Some(path) = out {
                format::save(&fam, path)?;
            }
            report.set_results(json!({ "stats": summary(&fam), "members": fam.to_sets() }))?;
            Ok(report)
        }
        FamilyCommand::Stats { path } => {
            let fam = format::load(path)?;
            let mut report = Report::new("family stats");
            report.param("path", path);
            if g.dry_run {
                return dry_run(report);
            }
            report.set_results(summary(&fam))?;
            Ok(report)
        }
        FamilyCommand::Check { path, t } => {
            let fam = format::load(path)?;
            let mut report = Report::new("family check");
            report.param("path", path).param("t", t);
            if g.dry_run {
                return dry_run(report);
            }
            let intersecting = is_intersecting(&fam)?;
            let t_intersecting = is_t_intersecting(&fam, *t)?;
            let shifted = is_shifted(&fam);
            report.set_results(json!({
                "intersecting": intersecting,
                "t_intersecting": t_intersecting,
                "shifted": shifted,
                "stats": summary(&fam),
            }))?;
            Ok(report)
        }
    }
}

fn decompose(path: &Path, g: &Global) -> Result<Report> {
    let fam = format::load(path)?;
    let mut report = Report::new("decompose");
    report.param("path", path);
    if g.dry_run {
        return dry_run(report);
    }
    let r = verify_triangle_chain(&fam)?;
    report.check(Assertion::new("chain: diversity <= |G| + 2|H1| + |H2|", Relation::Le, r.chain_bound, r.diversity));
    report.check(Assertion::eq("G and H1, G and H2 cross-intersecting", true, r.cross_intersecting));
    let d = &r.decomposition;
    report.set_results(json!({
        "n": r.n, "k": r.k, "diversity": r.diversity, "bound": r.bound.to_string(),
        "g": r.g, "h1": r.h1, "h2": r.h2,
        "f_sizes": [d.f1.len(), d.f2.len(), d.f3.len()],
        "largest_fi_index": d.largest_fi_index,
        "first_lhs": r.first_lhs, "first_holds": r.first_holds,
        "second_lhs": r.second_lhs, "second_holds": r.second_holds,
        "chain_bound": r.chain_bound, "chain_holds": r.chain_holds,
        "diversity_within_bound": r.diversity_within_bound,
    }))?;
    Ok(report)
}

fn lemma(m: usize, a: usize, b: usize, cprime: usize, g: &Global) -> Result<Report> {
    let mut report = Report::new("lemma-sweep");
    report.param("m", m).param("a", a).param("b", b).param("cprime", cprime);
    if g.dry_run {
        // runs the parameter checks only
        divlab_core::bounds::lemma_key_point(m, a, b, cprime, 0)?;
        return dry_run(report);
    }
    let r = verify_lemma_key(m, a, b, cprime)?;
    report.check(Assertion::eq("violations", 0, r.violations.len()));
    report.set_results(&r)?;
    Ok(report)
}

fn lex(cmd: &LexCommand, g: &Global) -> Result<Report> {
    match cmd {
        LexCommand::Segment { m, k, n } => {
            let mut report = Report::new("lex segment");
            report.param("m", m).param("k", k).param("n", n);
            if g.dry_run {
                return dry_run(report);
            }
            let seg = lex_segment(*m, *k, *n)?;
            let mut ordered = seg.realized.members().to_vec();
            ordered.sort_by(|x, y| divlab_core::shiftlex::lex_compare(*x, *y).unwrap_or(std::cmp::Ordering::Equal));
            let sets: Vec<Vec<usize>> = ordered.iter().map(|s| s.elements().collect()).collect();
            report.set_results(json!({ "m": m, "k": k, "n": n, "sets": sets }))?;
            Ok(report)
        }
        LexCommand::Partner { b_size, a, b, m } => {
            let mut report = Report::new("lex partner");
            report.param("b_size", b_size).param("a", a).param("b", b).param("m", m);
            if g.dry_run {
                return dry_run(report);
            }
            let max = lex_partner_max(*b_size, *a, *b, *m)?;
            report.set_results(json!({ "partner_max": max }))?;
            Ok(report)
        }
    }
}

fn shift(path: &Path, i: Option<usize>, j: Option<usize>, out: Option<&Path>, g: &Global) -> Result<Report> {
    let fam = format::load(path)?;
    let mut report = Report::new("shift");
    report.param("path", path).param("i", i).param("j", j);
    if let (Some(i), Some(j)) = (i, j) {
        if !(1 <= i && i < j && j <= fam.n()) {
            bail!("shift needs 1 <= i < j <= n");
        }
    }
    if g.dry_run {
        return dry_run(report);
    }
    let shifted = match (i, j) {
        (Some(i), Some(j)) => shift_family(&fam, i, j)?,
        _ => shift_closure(&fam),
    };
    if let Some(out) = out {
        format::save(&shifted, out)?;
    }
    let was_intersecting = is_intersecting(&fam)?;
    report.check(Assertion::eq("size preserved", fam.len(), shifted.len()));
    if was_intersecting {
        report.check(Assertion::eq("intersecting preserved", true, is_intersecting(&shifted)?));
    }
    report.set_results(json!({
        "shifted": is_shifted(&shifted),
        "stats": summary(&shifted),
        "members": shifted.to_sets(),
    }))?;
    Ok(report)
}

fn junta(args: &JuntaArgs) -> Result<JuntaSpec> {
    Ok(match args.family {
        JuntaKind::Majority => JuntaSpec::majority(center(2 * args.r + 1)?)?,
        JuntaKind::T => {
            if args.r > MAX_T_RADIUS {
                return Err(cap_error("r", args.r as u128, MAX_T_RADIUS as u128));
            }
            build_t_defining(args.r)?
        }
        JuntaKind::Dictator => JuntaSpec::dictator(center(args.j)?, 1)?,
        JuntaKind::Threshold => JuntaSpec::threshold(center(args.j)?, args.t)?,
        JuntaKind::AU => JuntaSpec::a_u(center(args.t + 1)? - 1)?,
    })
}

const MAX_CENTER: usize = 25;

fn center(j: usize) -> Result<usize> {
    if j > MAX_CENTER {
        return Err(cap_error("junta center size", j as u128, MAX_CENTER as u128));
    }
    Ok(j)
}

fn junta_params(report: &mut Report, args: &JuntaArgs) {
    report.param("family", format!("{:?}", args.family).to_lowercase());
    match args.family {
        JuntaKind::Majority | JuntaKind::T => report.param("r", args.r),
        JuntaKind::Dictator => report.param("j", args.j),
        JuntaKind::Threshold => report.param("j", args.j).param("t", args.t),
        JuntaKind::AU => report.param("u", args.t),
    };
}

/// Checks that a junta request fits the caps without building it.
fn validate_junta(args: &JuntaArgs) -> Result<()> {
    match args.family {
        JuntaKind::Majority => center(2 * args.r + 1).map(|_| ()),
        JuntaKind::T if args.r > MAX_T_RADIUS => Err(cap_error("r", args.r as u128, MAX_T_RADIUS as u128)),
        JuntaKind::T if args.r == 0 => bail!("T needs r >= 1"),
        JuntaKind::T => Ok(()),
        JuntaKind::Dictator | JuntaKind::Threshold => center(args.j).map(|_| ()),
        JuntaKind::AU => center(args.t + 1).map(|_| ()),
    }
}

#[derive(Serialize)]
struct MeasureOut {
    exact: Option<String>,
    approx: f64,
}

fn measure(m: &BiasedMeasure) -> MeasureOut {
    MeasureOut { exact: m.exact_string(), approx: m.approx }
}

fn boolean(cmd: &BooleanCommand, g: &Global) -> Result<Report> {
    match cmd {
        BooleanCommand::Mu { junta: args, p }
        | BooleanCommand::Influence { junta: args, p }
        | BooleanCommand::Gammap { junta: args, p } => {
            let name = match cmd {
                BooleanCommand::Mu { .. } => "mu",
                BooleanCommand::Influence { .. } => "influence",
                _ => "gammap",
            };
            let mut report = Report::new(format!("boolean {name}"));
            junta_params(&mut report, args);
            report.param("p", p.to_string());
            validate_junta(args)?;
            if g.dry_run {
                return dry_run(report);
            }
            let spec = junta(args)?;
            let results = match cmd {
                BooleanCommand::Mu { .. } => json!({ "mu": measure(&mu_p(&spec, *p)?) }),
                BooleanCommand::Influence { .. } => {
                    let prof = total_influence(&spec, *p)?;
                    let per: Vec<MeasureOut> = prof.per_coordinate.iter().map(measure).collect();
                    json!({ "per_coordinate": per, "total": measure(&prof.total) })
                }
                _ => json!({ "gamma_p": measure(&gamma_p(&spec, *p)?) }),
            };
            report.set_results(results)?;
            Ok(report)
        }
        BooleanCommand::Russo { junta: args, p0, h } => {
            let mut report = Report::new("boolean russo");
            junta_params(&mut report, args);
            report.param("p0", p0).param("h", h);
            validate_junta(args)?;
            if g.dry_run {
                return dry_run(report);
            }
            let r = russo_check(&junta(args)?, *p0, *h)?;
            report.check(Assertion::new("relative gap", Relation::Le, acceptance::RUSSO_TOLERANCE, r.rel_gap));
            report.set_results(&r)?;
            Ok(report)
        }
        BooleanCommand::CounterexampleTable { r, p } => {
            let range = parse_range(r)?;
            let mut report = Report::new("boolean counterexample-table");
            report.param("r", r);
            let rule = match p {
                Some(p) => {
                    report.param("p", p.to_string());
                    BiasRule::Fixed(*p)
                }
                None => {
                    report.param("p", "max(1/4, 1/2 - 1/r)");
                    BiasRule::HalfMinusInverse
                }
            };
            if *range.end() > MAX_T_RADIUS {
                return Err(cap_error("r", *range.end() as u128, MAX_T_RADIUS as u128));
            }
            if *range.start() < 2 || range.is_empty() {
                bail!("counterexample table needs 2 <= lo <= hi");
            }
            if g.dry_run {
                return dry_run(report);
            }
            let rows = counterexample_table(range, rule)?;
            let flat: Vec<CounterexampleCsv> = rows.iter().map(CounterexampleCsv::from).collect();
            if let Some(path) = &g.csv {
                write_csv(path, &flat)?;
            }
            report.set_results(&flat)?;
            Ok(report)
        }
    }
}

/// `"lo..hi"` or `"lo..=hi"`, both inclusive, or a single value.
pub fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad range bound `{s}`"));
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        Ok(parse(lo)?..=parse(hi)?)
    } else {
        let v = parse(text)?;
        Ok(v..=v)
    }
}

#[derive(Serialize)]
struct CounterexampleCsv {
    r: usize,
    p: String,
    family: &'static str,
    mu: String,
    gamma_p: String,
    deficit: String,
    total_influence: String,
    ratio: String,
}

fn cell(m: &BiasedMeasure) -> String {
    m.exact_string().unwrap_or_else(|| format!("{:e}", m.approx))
}

impl From<&CounterexampleRow> for CounterexampleCsv {
    fn from(row: &CounterexampleRow) -> Self {
        CounterexampleCsv {
            r: row.r,
            p: row.p.to_string(),
            family: row.family,
            mu: cell(&row.mu),
            gamma_p: cell(&row.gamma_p),
            deficit: cell(&row.deficit),
            total_influence: cell(&row.total_influence),
            ratio: cell(&row.ratio),
        }
    }
}

#[derive(Serialize)]
struct TailCsv {
    k: usize,
    prob: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct RunsCsv {
    t: usize,
    expected_runs: f64,
    circle_formula: f64,
    half_formula: f64,
}

fn rho_cmd(cmd: &RhoCommand, g: &Global) -> Result<Report> {
    match cmd {
        RhoCommand::Dist { length, mode, samples } => {
            let mut report = Report::new("rho dist");
            report.param("L", length).param("mode", format!("{mode:?}").to_lowercase());
            let mode = match mode {
                ModeArg::Exact => {
                    if *length > MAX_EXACT_LENGTH {
                        return Err(cap_error("exact circle length", *length as u128, MAX_EXACT_LENGTH as u128));
                    }
                    RhoMode::Exact
                }
                ModeArg::Mc => {
                    report.param("samples", samples);
                    report.seed = Some(g.seed);
                    RhoMode::MonteCarlo { samples: *samples, seed: g.seed }
                }
            };
            if *length == 0 || *length > divlab_core::runstat::MAX_LENGTH {
                bail!("L must lie in 1..=63");
            }
            if g.dry_run {
                return dry_run(report);
            }
            let d = rho_distribution(*length, mode)?;
            if let Some(path) = &g.csv {
                let tail: Vec<TailCsv> =
                    d.tail.iter().map(|t| TailCsv { k: t.k, prob: t.prob, stderr: t.stderr }).collect();
                write_csv(path, &tail)?;
                let runs: Vec<RunsCsv> = d
                    .long_runs
                    .iter()
                    .map(|r| RunsCsv {
                        t: r.t,
                        expected_runs: r.expected_runs,
                        circle_formula: r.circle_formula,
                        half_formula: r.half_formula,
                    })
                    .collect();
                write_csv(&path.with_extension("runs.csv"), &runs)?;
            }
            if let (Some(count), RhoMode::Exact) = (d.in_t_count, d.mode) {
                report.check(Assertion::eq("in_T count is half of all words", d.population / 2, count));
            }
            let tail_ok = d.tail.windows(2).all(|w| w[0].prob >= w[1].prob);
            report.check(Assertion::eq("tail nonincreasing", true, tail_ok));
            report.set_results(&d)?;
            Ok(report)
        }
        RhoCommand::Profile { word } => {
            let mut report = Report::new("rho profile");
            report.param("word", word);
            let (bits, len) = parse_word(word)?;
            if g.dry_run {
                return dry_run(report);
            }
            let profile = run_profile(bits, len)?;
            let sample = rho(bits, len)?;
            report.set_results(json!({ "profile": profile, "rho": sample.rho, "in_t": sample.in_t }))?;
            Ok(report)
        }
    }
}

fn extremal(n: usize, k: usize, witness: Option<&Path>, symmetry_break: bool, g: &Global) -> Result<Report> {
    let mut report = Report::new("extremal");
    report.param("n", n).param("k", k).param("budget", g.budget).param("symmetry_break", symmetry_break);
    let vertices = binom_u128(n as u64, k as u64);
    if vertices > MAX_VERTICES as u128 {
        return Err(cap_error("C(n, k) for extremal search", vertices, MAX_VERTICES as u128));
    }
    if k < 2 || n < 2 * k {
        bail!("extremal search needs k >= 2 and n >= 2k");
    }
    if g.dry_run {
        return dry_run(report);
    }
    let start = Instant::now();
    let deadline = g.budget.map(Duration::from_secs_f64);
    let stop = move || deadline.is_some_and(|d| start.elapsed() >= d);
    let options = SearchOptions { budget_seconds: g.budget, symmetry_break };
    let r = max_diversity_search(n, k, options, &stop)?;
    if let Some(path) = witness {
        format::save(&r.witness, path)?;
    }
    let bound = diversity_bound(n as u64, k as u64)?;
    let bound: u128 = bound.try_into().unwrap_or(u128::MAX);
    if r.best_diversity as u128 > bound {
        eprintln!("divlab: !!! best diversity {} at ({n},{k}) exceeds C(n-3, k-2) = {bound} !!!", r.best_diversity);
    }
    report.diagnostic("node_count", r.node_count).diagnostic("search_seconds", start.elapsed().as_secs_f64());
    report.check(Assertion::new("at least the seed", Relation::Ge, r.seed_diversity, r.best_diversity));
    report.check(Assertion::eq("witness diversity", r.best_diversity, stats(&r.witness).diversity));
    report.set_results(json!({
        "best_diversity": r.best_diversity,
        "complete": r.complete,
        "improved_on_seed": r.improved,
        "seed_family": r.seed_family,
        "seed_diversity": r.seed_diversity,
        "diversity_bound": bound.to_string(),
        "exceeds_bound": r.best_diversity as u128 > bound,
        "conjecture_r": r.conjecture_r,
        "conjecture_value": r.conjecture_value,
        "witness": r.witness.to_sets(),
    }))?;
    Ok(report)
}

fn verify_all(only: &[u8], g: &Global) -> Result<Report> {
    let mut report = Report::new("verify-all");
    report.param("quick", g.quick).param("only", only);
    report.seed = Some(g.seed);
    let ids: Vec<u8> = if only.is_empty() { acceptance::ids().collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !acceptance::ids().any(|x| x == **id)) {
        bail!("no criterion {bad}");
    }
    if g.dry_run {
        return dry_run(report);
    }
    let opts = acceptance::Options {
        seed: g.seed,
        quick: g.quick,
        extremal_budget_seconds: g.budget.unwrap_or(acceptance::EXTREMAL_BUDGET_SECONDS),
    };
    let mut outcomes = Vec::new();
    for id in ids {
        if let Some(o) = acceptance::run_one(id, &opts) {
            eprintln!("{}", o.line());
            report.check(Assertion::eq(format!("criterion {id}: {}", o.title), true, o.pass));
            report.diagnostic(&format!("criterion_{id}_seconds"), o.elapsed_seconds);
            outcomes.push(json!({ "id": o.id, "title": o.title, "pass": o.pass, "detail": o.detail }));
        }
    }
    report.set_results(outcomes)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..10").unwrap(), 2..=10);
        assert_eq!(parse_range("2..=10").unwrap(), 2..=10);
        assert_eq!(parse_range("4").unwrap(), 4..=4);
        assert!(parse_range("a..3").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&cap_error("x", 2, 1)), EXIT_CAP);
        assert_eq!(exit_code_for(&anyhow::anyhow!("plain")), EXIT_USAGE);
        let wrapped = anyhow::Error::from(CoreError::Parameter("p")).context("outer");
        assert_eq!(exit_code_for(&wrapped), EXIT_USAGE);
        let wrapped = cap_error("x", 2, 1).context("outer");
        assert_eq!(exit_code_for(&wrapped), EXIT_CAP);
    }
}
