//! `p`-biased measures, influences and biased diversity over a junta center.
//!
//! Everything is computed from per-weight member counts: a family over
//! `2^[j]` has `mu_p = sum_s c_s p^s (1-p)^(j-s)`, so one pass over the cube
//! per coordinate gives every quantity exactly. With a rational bias the sums
//! are exact rationals; with a real bias they are compensated float sums.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::RangeInclusive;
use core::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::constructions::{build_t_defining, JuntaSpec, MAX_T_RADIUS};
use crate::cube::CoordinateCounts;
use crate::error::{Error, Result};

/// Bias `p` of the product measure, rational when exactness is wanted.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Bias {
    Rational { num: u64, den: u64 },
    Real(f64),
}

impl Bias {
    pub fn ratio(num: u64, den: u64) -> Result<Bias> {
        if num == 0 || num >= den {
            return Err(Error::Bias);
        }
        Ok(Bias::Rational { num, den })
    }

    pub fn real(p: f64) -> Result<Bias> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Bias);
        }
        Ok(Bias::Real(p))
    }

    pub fn value(self) -> f64 {
        match self {
            Bias::Rational { num, den } => num as f64 / den as f64,
            Bias::Real(p) => p,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Bias::Rational { .. })
    }

    fn exact(self) -> Option<BigRational> {
        match self {
            Bias::Rational { num, den } => Some(BigRational::new(num.into(), den.into())),
            Bias::Real(_) => None,
        }
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bias::Rational { num, den } => write!(f, "{num}/{den}"),
            Bias::Real(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Bias {
    type Err = Error;

    /// `"2/5"` gives an exact bias, `"0.45"` a real one.
    fn from_str(s: &str) -> Result<Bias> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num = num.trim().parse().map_err(|_| Error::Bias)?;
            let den = den.trim().parse().map_err(|_| Error::Bias)?;
            Bias::ratio(num, den)
        } else {
            Bias::real(s.parse().map_err(|_| Error::Bias)?)
        }
    }
}

/// A measure value: exact rational when the bias was rational, always a float.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasedMeasure {
    pub exact: Option<BigRational>,
    pub approx: f64,
}

impl BiasedMeasure {
    fn from_exact(q: BigRational) -> Self {
        let approx = q.to_f64().unwrap_or(f64::NAN);
        BiasedMeasure { exact: Some(q), approx }
    }

    fn from_real(x: f64) -> Self {
        BiasedMeasure { exact: None, approx: x }
    }

    /// `"num/den"` for exact values.
    pub fn exact_string(&self) -> Option<String> {
        self.exact.as_ref().map(|q| alloc::format!("{}/{}", q.numer(), q.denom()))
    }

    fn combine(
        &self,
        other: &BiasedMeasure,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        real: impl Fn(f64, f64) -> f64,
    ) -> BiasedMeasure {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Self::from_exact(exact(a, b)),
            _ => Self::from_real(real(self.approx, other.approx)),
        }
    }

    fn add(&self, other: &BiasedMeasure) -> BiasedMeasure {
        self.combine(other, |a, b| a + b, |a, b| a + b)
    }

    fn sub(&self, other: &BiasedMeasure) -> BiasedMeasure {
        self.combine(other, |a, b| a - b, |a, b| a - b)
    }

    fn mul(&self, other: &BiasedMeasure) -> BiasedMeasure {
        self.combine(other, |a, b| a * b, |a, b| a * b)
    }

    fn div(&self, other: &BiasedMeasure) -> BiasedMeasure {
        self.combine(other, |a, b| a / b, |a, b| a / b)
    }

    fn of_bias(p: Bias) -> BiasedMeasure {
        match p.exact() {
            Some(q) => Self::from_exact(q),
            None => Self::from_real(p.value()),
        }
    }

    fn one(exact: bool) -> BiasedMeasure {
        if exact {
            Self::from_exact(BigRational::one())
        } else {
            Self::from_real(1.0)
        }
    }

    /// Exact comparison when both sides are exact, float otherwise.
    pub fn compare(&self, other: &BiasedMeasure) -> Ordering {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a.cmp(b),
            _ => self.approx.partial_cmp(&other.approx).unwrap_or(Ordering::Equal),
        }
    }

    /// Exact equality when both sides are exact; otherwise `|a - b| <= tol * max(1, |a|)`.
    pub fn agrees(&self, other: &BiasedMeasure, tol: f64) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => libm::fabs(self.approx - other.approx) <= tol * libm::fabs(self.approx).max(1.0),
        }
    }
}

impl Serialize for BiasedMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("BiasedMeasure", 2)?;
        st.serialize_field("exact", &self.exact_string())?;
        st.serialize_field("approx", &self.approx)?;
        st.end()
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for t in terms {
        let s = sum + t;
        if libm::fabs(sum) >= libm::fabs(t) {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

/// `sum_s counts[s] p^s (1-p)^(dim-s)`.
fn weigh(counts: &[u64], dim: usize, p: Bias) -> BiasedMeasure {
    match p {
        Bias::Rational { num, den } => {
            let a = BigInt::from(num);
            let b = BigInt::from(den - num);
            let mut numer = BigInt::zero();
            let mut a_pow = BigInt::one();
            for (s, &c) in counts.iter().enumerate().take(dim + 1) {
                if c != 0 {
                    numer += BigInt::from(c) * &a_pow * num_traits::pow(b.clone(), dim - s);
                }
                a_pow *= &a;
            }
            let denom = num_traits::pow(BigInt::from(den), dim);
            BiasedMeasure::from_exact(BigRational::new(numer, denom))
        }
        Bias::Real(p) => {
            let q = 1.0 - p;
            let mut p_pow = alloc::vec![1.0f64; dim + 1];
            let mut q_pow = alloc::vec![1.0f64; dim + 1];
            for s in 1..=dim {
                p_pow[s] = p_pow[s - 1] * p;
                q_pow[s] = q_pow[s - 1] * q;
            }
            let terms = counts.iter().enumerate().take(dim + 1).map(|(s, &c)| c as f64 * p_pow[s] * q_pow[dim - s]);
            BiasedMeasure::from_real(compensated_sum(terms))
        }
    }
}

/// Which formula to use for a single-coordinate influence.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InfluenceMode {
    /// Measure of points whose membership flips with the coordinate.
    General,
    /// `p^-1 mu(F ∋ i) - (1-p)^-1 mu(F ∌ i)`; only valid for up-sets.
    Monotone,
}

/// Influences of every center coordinate at one bias.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfluenceProfile {
    pub per_coordinate: Vec<BiasedMeasure>,
    pub total: BiasedMeasure,
    #[serde(serialize_with = "serialize_display")]
    pub p: Bias,
}

fn serialize_display<S: Serializer, T: fmt::Display>(v: &T, s: S) -> core::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn check_coordinate(spec: &JuntaSpec, i: usize) -> Result<()> {
    if i == 0 || i > spec.center_size() {
        Err(Error::ElementOutOfRange { element: i, n: spec.center_size() })
    } else {
        Ok(())
    }
}

pub fn mu_p(spec: &JuntaSpec, p: Bias) -> Result<BiasedMeasure> {
    let p = Bias::checked(p)?;
    Ok(weigh(&spec.cube().weight_counts(), spec.center_size(), p))
}

impl Bias {
    fn checked(self) -> Result<Bias> {
        match self {
            Bias::Rational { num, den } => Bias::ratio(num, den),
            Bias::Real(p) => Bias::real(p),
        }
    }
}

fn influence_from_counts(counts: &CoordinateCounts, dim: usize, p: Bias, mode: InfluenceMode) -> BiasedMeasure {
    match mode {
        InfluenceMode::General => weigh(&counts.boundary, dim, p),
        InfluenceMode::Monotone => {
            let with = weigh(&counts.with, dim, p);
            let without = weigh(&counts.without, dim, p);
            let bias = BiasedMeasure::of_bias(p);
            let rest = BiasedMeasure::one(p.is_exact()).sub(&bias);
            with.div(&bias).sub(&without.div(&rest))
        }
    }
}

/// Influence of coordinate `i` (1-based) at bias `p`.
pub fn influence_coord(spec: &JuntaSpec, i: usize, p: Bias, mode: InfluenceMode) -> Result<BiasedMeasure> {
    let p = p.checked()?;
    check_coordinate(spec, i)?;
    if mode == InfluenceMode::Monotone && !spec.is_up_closed() {
        return Err(Error::NotUpSet);
    }
    let counts = spec.cube().coordinate_counts(i - 1);
    Ok(influence_from_counts(&counts, spec.center_size(), p, mode))
}

/// All per-coordinate influences (boundary definition) and their sum.
pub fn total_influence(spec: &JuntaSpec, p: Bias) -> Result<InfluenceProfile> {
    let p = p.checked()?;
    let analysis = Analysis::new(spec);
    Ok(analysis.influences(p, InfluenceMode::General))
}

/// `min_i mu_p({F : i ∉ F})` over center coordinates.
pub fn gamma_p(spec: &JuntaSpec, p: Bias) -> Result<BiasedMeasure> {
    let p = p.checked()?;
    Ok(Analysis::new(spec).gamma(p))
}

/// Per-coordinate counts computed once and reused across biases.
pub struct Analysis {
    dim: usize,
    weights: Vec<u64>,
    coords: Vec<CoordinateCounts>,
    up_closed: bool,
}

impl Analysis {
    pub fn new(spec: &JuntaSpec) -> Analysis {
        let cube = spec.cube();
        Analysis {
            dim: cube.dim(),
            weights: cube.weight_counts(),
            coords: (0..cube.dim()).map(|i| cube.coordinate_counts(i)).collect(),
            up_closed: cube.is_up_closed(),
        }
    }

    pub fn is_up_closed(&self) -> bool {
        self.up_closed
    }

    pub fn mu(&self, p: Bias) -> BiasedMeasure {
        weigh(&self.weights, self.dim, p)
    }

    /// Influence of coordinate `i` (1-based). Monotone mode on a non-up-set is refused.
    pub fn influence(&self, i: usize, p: Bias, mode: InfluenceMode) -> Result<BiasedMeasure> {
        if i == 0 || i > self.dim {
            return Err(Error::ElementOutOfRange { element: i, n: self.dim });
        }
        if mode == InfluenceMode::Monotone && !self.up_closed {
            return Err(Error::NotUpSet);
        }
        Ok(influence_from_counts(&self.coords[i - 1], self.dim, p, mode))
    }

    pub fn influences(&self, p: Bias, mode: InfluenceMode) -> InfluenceProfile {
        let per_coordinate: Vec<BiasedMeasure> =
            self.coords.iter().map(|c| influence_from_counts(c, self.dim, p, mode)).collect();
        let total = per_coordinate
            .iter()
            .fold(BiasedMeasure::one(p.is_exact()).sub(&BiasedMeasure::one(p.is_exact())), |acc, x| acc.add(x));
        InfluenceProfile { per_coordinate, total, p }
    }

    /// `mu_p` of the members avoiding coordinate `i` (1-based).
    pub fn avoiding(&self, i: usize, p: Bias) -> BiasedMeasure {
        weigh(&self.coords[i - 1].without, self.dim, p)
    }

    pub fn gamma(&self, p: Bias) -> BiasedMeasure {
        (1..=self.dim)
            .map(|i| self.avoiding(i, p))
            .min_by(|a, b| a.compare(b))
            .unwrap_or_else(|| BiasedMeasure::one(p.is_exact()))
    }

    /// Both sides of `p I_i + gamma_p / (1 - p) = mu_p` for coordinate `i`.
    pub fn symmetric_identity(&self, i: usize, p: Bias) -> Result<(BiasedMeasure, BiasedMeasure)> {
        let inf = self.influence(i, p, InfluenceMode::General)?;
        let bias = BiasedMeasure::of_bias(p);
        let rest = BiasedMeasure::one(p.is_exact()).sub(&bias);
        let lhs = bias.mul(&inf).add(&self.gamma(p).div(&rest));
        Ok((lhs, self.mu(p)))
    }
}

/// Central finite difference of `mu_p` against the total influence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RussoReport {
    pub p0: f64,
    pub h: f64,
    pub finite_difference: f64,
    pub total_influence: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

pub fn russo_check(spec: &JuntaSpec, p0: f64, h: f64) -> Result<RussoReport> {
    if !(h > 0.0 && p0 - h > 0.0 && p0 + h < 1.0) {
        return Err(Error::Parameter("russo check needs 0 < p0 - h < p0 + h < 1"));
    }
    let analysis = Analysis::new(spec);
    if !analysis.is_up_closed() {
        return Err(Error::NotUpSet);
    }
    russo_from(&analysis, p0, h)
}

pub fn russo_from(analysis: &Analysis, p0: f64, h: f64) -> Result<RussoReport> {
    let plus = analysis.mu(Bias::real(p0 + h)?).approx;
    let minus = analysis.mu(Bias::real(p0 - h)?).approx;
    let finite_difference = (plus - minus) / (2.0 * h);
    let total_influence = analysis.influences(Bias::real(p0)?, InfluenceMode::General).total.approx;
    let abs_gap = libm::fabs(finite_difference - total_influence);
    let rel_gap = if total_influence != 0.0 { abs_gap / libm::fabs(total_influence) } else { abs_gap };
    Ok(RussoReport { p0, h, finite_difference, total_influence, abs_gap, rel_gap })
}

/// How the counterexample table picks `p` for each `r`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum BiasRule {
    /// `p = max(1/4, 1/2 - 1/r)`.
    HalfMinusInverse,
    Fixed(Bias),
}

impl BiasRule {
    pub fn bias_for(self, r: usize) -> Bias {
        match self {
            BiasRule::Fixed(p) => p,
            BiasRule::HalfMinusInverse => {
                let (num, den) = ((r as u64).saturating_sub(2), 2 * r as u64);
                if 4 * num >= den && num > 0 {
                    let g = gcd(num, den);
                    Bias::Rational { num: num / g, den: den / g }
                } else {
                    Bias::Rational { num: 1, den: 4 }
                }
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One family at one `r` in the counterexample table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub r: usize,
    #[serde(serialize_with = "serialize_display")]
    pub p: Bias,
    /// `"T"` for the cyclic-run junta, `"majority"` for the majority center.
    pub family: &'static str,
    pub mu: BiasedMeasure,
    pub gamma_p: BiasedMeasure,
    /// `(1 - p)/2 - gamma_p`.
    pub deficit: BiasedMeasure,
    pub total_influence: BiasedMeasure,
    /// `I^p(T_r) / I^p(majority)`, repeated on both rows of an `r`.
    pub ratio: BiasedMeasure,
    /// `gamma_p`, restated as the left side of the averaged display.
    pub display_lhs: f64,
    /// `(1-p) mu_{1/2} - (1-p) (p + (1/2 - p)|J|)/|J| * I^p`, the display without its `o(1)`.
    pub display_rhs: f64,
}

/// `gamma_p`, deficit and total influence of `T_r` and majority on `[2r+1]`.
pub fn counterexample_table(r_range: RangeInclusive<usize>, rule: BiasRule) -> Result<Vec<CounterexampleRow>> {
    if *r_range.start() < 2 || *r_range.end() > MAX_T_RADIUS || r_range.is_empty() {
        return Err(Error::Parameter("counterexample table needs 2 <= r <= 12"));
    }
    let mut rows = Vec::new();
    for r in r_range {
        let p = rule.bias_for(r).checked()?;
        let j = 2 * r + 1;
        let t = Analysis::new(&build_t_defining(r)?);
        let maj = Analysis::new(&JuntaSpec::majority(j)?);
        let half = Bias::Rational { num: 1, den: 2 };
        let t_inf = t.influences(p, InfluenceMode::General).total;
        let m_inf = maj.influences(p, InfluenceMode::General).total;
        let ratio = t_inf.div(&m_inf);
        let bias = BiasedMeasure::of_bias(p);
        let one = BiasedMeasure::one(p.is_exact());
        let two = one.add(&one);
        let ceiling = one.sub(&bias).div(&two);
        for (family, a, inf) in [("T", &t, t_inf.clone()), ("majority", &maj, m_inf.clone())] {
            let gamma = a.gamma(p);
            let pv = p.value();
            let jf = j as f64;
            let display_rhs = (1.0 - pv) * a.mu(half).approx - (1.0 - pv) * (pv + (0.5 - pv) * jf) / jf * inf.approx;
            rows.push(CounterexampleRow {
                r,
                p,
                family,
                mu: a.mu(p),
                deficit: ceiling.sub(&gamma),
                display_lhs: gamma.approx,
                gamma_p: gamma,
                total_influence: inf,
                ratio: ratio.clone(),
                display_rhs,
            });
        }
    }
    Ok(rows)
}

/// Whether a junta's defining family is intersecting (subset-closure sweep).
pub fn is_intersecting_junta(spec: &JuntaSpec) -> bool {
    spec.is_intersecting()
}

/// `|a - b| / |b|` for exact values, as a float.
pub fn relative_gap(a: &BiasedMeasure, b: &BiasedMeasure) -> f64 {
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) if !y.is_zero() => ((x - y) / y).abs().to_f64().unwrap_or(f64::NAN),
        _ => libm::fabs(a.approx - b.approx) / libm::fabs(b.approx),
    }
}
