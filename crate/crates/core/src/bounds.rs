//! Exact binomial arithmetic and the inequality checks built on it.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bitfam::{stats, Family};
use crate::constructions::{triangle_decompose, TriangleDecomposition};
use crate::error::{Error, Result};
use crate::shiftlex::lex_partner_max;

/// Arbitrary-precision count.
pub type BigCount = BigUint;

/// `C(n, k)` exactly; zero when `k > n`.
pub fn binom(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` for a possibly negative `k` (zero outside `0..=n`).
pub fn binom_signed(n: i64, k: i64) -> BigCount {
    if n < 0 || k < 0 || k > n {
        BigUint::zero()
    } else {
        binom(n as u64, k as u64)
    }
}

/// `C(n, k)` in 128 bits, saturating at `u128::MAX`.
pub fn binom_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul(n as u128 - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Right side of the Kupavskii–Zakharov size bound at integer `u`:
/// `C(n-1, k-1) + C(n-u-1, n-k-1) - C(n-u-1, k-1)`.
pub fn kz_bound(n: u64, k: u64, u: u64) -> Result<BigCount> {
    if u < 3 || u > k {
        return Err(Error::Parameter("size bound needs integer 3 <= u <= k"));
    }
    if n <= 2 * k {
        return Err(Error::Parameter("size bound needs n > 2k"));
    }
    Ok(binom(n - 1, k - 1) + binom(n - u - 1, n - k - 1) - binom(n - u - 1, k - 1))
}

/// `C(n-3, k-2)`, the diversity of the two-out-of-three family.
pub fn diversity_bound(n: u64, k: u64) -> Result<BigCount> {
    if n < 3 || k < 2 {
        return Err(Error::Parameter("diversity bound needs n >= 3 and k >= 2"));
    }
    Ok(binom(n - 3, k - 2))
}

/// One segment size where the inequality failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub b_size: usize,
    pub a_max: usize,
    /// `a_max + cprime * b_size`.
    pub lhs: u128,
}

/// Outcome of sweeping `|A| + C'|B| <= C(m, a)` over all admissible `|B|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaKeyReport {
    pub m: usize,
    pub a: usize,
    pub b: usize,
    pub cprime: usize,
    /// `C(m, a)`.
    pub total: u128,
    /// `C(m - (b - a + 1), a - 1)`, the largest `|B|` the inequality covers.
    pub b_cap: u128,
    /// Largest `|B|` actually swept: `min(b_cap, C(m, b))`.
    pub swept_to: usize,
    /// Minimum over swept `|B|` of `C(m, a) - (|A|_max + C'|B|)`.
    pub worst_slack: i128,
    pub worst_at: usize,
    pub violations: Vec<LemmaViolation>,
}

fn lemma_params(m: usize, a: usize, b: usize, cprime: usize) -> Result<u128> {
    if a == 0 || b == 0 {
        return Err(Error::Parameter("lemma sweep needs a, b >= 1"));
    }
    if m <= (cprime + 1) * a.max(b) {
        return Err(Error::Parameter("lemma sweep needs m > (C' + 1) max(a, b)"));
    }
    if m > crate::bitfam::MAX_GROUND {
        return Err(Error::GroundSize(m));
    }
    // m - (b - a + 1) is nonnegative because m > b
    Ok(binom_u128((m + a - b - 1) as u64, a as u64 - 1))
}

/// Largest `|A|` cross-intersecting some `|B| = b_size` family, with the slack
/// `C(m, a) - (|A| + C'|B|)`. Refuses sizes beyond the lemma's cap.
pub fn lemma_key_point(m: usize, a: usize, b: usize, cprime: usize, b_size: usize) -> Result<(usize, i128)> {
    let cap = lemma_params(m, a, b, cprime)?;
    if b_size as u128 > cap {
        return Err(Error::Parameter("|B| exceeds C(m - (b - a + 1), a - 1)"));
    }
    let a_max = lex_partner_max(b_size, a, b, m)?;
    let total = binom_u128(m as u64, a as u64) as i128;
    Ok((a_max, total - a_max as i128 - (cprime * b_size) as i128))
}

/// Checks `|A| + C'|B| <= C(m, a)` for every `|B|` up to the cap, using the
/// lex reduction: for fixed `|B|` the largest partner is a lex prefix.
pub fn verify_lemma_key(m: usize, a: usize, b: usize, cprime: usize) -> Result<LemmaKeyReport> {
    let cap = lemma_params(m, a, b, cprime)?;
    let total = binom_u128(m as u64, a as u64);
    let swept_to = cap.min(binom_u128(m as u64, b as u64)) as usize;
    let mut worst_slack = i128::MAX;
    let mut worst_at = 0;
    let mut violations = Vec::new();
    for b_size in 0..=swept_to {
        let (a_max, slack) = lemma_key_point(m, a, b, cprime, b_size)?;
        if slack < worst_slack {
            worst_slack = slack;
            worst_at = b_size;
        }
        if slack < 0 {
            violations.push(LemmaViolation { b_size, a_max, lhs: a_max as u128 + (cprime * b_size) as u128 });
        }
    }
    Ok(LemmaKeyReport { m, a, b, cprime, total, b_cap: cap, swept_to, worst_slack, worst_at, violations })
}

/// The two inequalities on the triangle decomposition, evaluated exactly.
///
/// They are theorems only for `n` far above `k`; outside that regime the
/// truth values are data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleChainReport {
    pub n: usize,
    pub k: usize,
    pub diversity: usize,
    /// `C(n-3, k-2)`.
    pub bound: u128,
    pub g: usize,
    pub h1: usize,
    pub h2: usize,
    /// `|G| + 4|H1|`.
    pub first_lhs: usize,
    pub first_holds: bool,
    /// `|G| + 2|H2|`.
    pub second_lhs: usize,
    pub second_holds: bool,
    /// `|G| + 2|H1| + |H2|`.
    pub chain_bound: usize,
    pub chain_holds: bool,
    pub diversity_within_bound: bool,
    pub cross_intersecting: bool,
    pub decomposition: TriangleDecomposition,
}

pub fn verify_triangle_chain(fam: &Family) -> Result<TriangleChainReport> {
    let d = triangle_decompose(fam)?;
    let n = fam.n();
    let k = fam.k().unwrap_or_default();
    let bound = binom(n as u64 - 3, k as u64 - 2).to_u128().unwrap_or(u128::MAX);
    let (g, h1, h2) = (d.g.len(), d.h1.len(), d.h2.len());
    let first_lhs = g + 4 * h1;
    let second_lhs = g + 2 * h2;
    let diversity = stats(fam).diversity;
    Ok(TriangleChainReport {
        n,
        k,
        diversity,
        bound,
        g,
        h1,
        h2,
        first_lhs,
        first_holds: first_lhs as u128 <= bound,
        second_lhs,
        second_holds: second_lhs as u128 <= bound,
        chain_bound: d.chain_bound,
        chain_holds: d.chain_holds,
        diversity_within_bound: diversity as u128 <= bound,
        cross_intersecting: d.g_h1_cross_intersecting && d.g_h2_cross_intersecting,
        decomposition: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_a_u, fano_plane, star};

    fn pascal(n: usize) -> Vec<Vec<BigUint>> {
        let mut rows: Vec<Vec<BigUint>> = Vec::new();
        for i in 0..=n {
            let mut row = alloc::vec![BigUint::one(); i + 1];
            for j in 1..i {
                row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binom(7, 3), BigUint::from(35u32));
        assert_eq!(binom(9, 0), BigUint::one());
        assert_eq!(binom(3, 5), BigUint::zero());
        let table = pascal(64);
        assert_eq!(table[64][32], BigUint::from(1_832_624_140_942_590_534u64));
        assert_eq!(binom(64, 32), table[64][32]);
        for n in 0..=64u64 {
            for k in 0..=n {
                assert_eq!(binom(n, k), table[n as usize][k as usize]);
                assert_eq!(BigUint::from(binom_u128(n, k)), table[n as usize][k as usize]);
            }
        }
        assert_eq!(binom_signed(5, -1), BigUint::zero());
    }

    #[test]
    fn size_bound_values() {
        assert_eq!(kz_bound(10, 4, 3).unwrap(), BigUint::from(70u32));
        assert_eq!(kz_bound(10, 4, 4).unwrap(), BigUint::from(75u32));
        assert_eq!(kz_bound(10, 4, 3).unwrap(), 3u32 * binom(7, 2) + binom(7, 1));
        assert!(kz_bound(10, 4, 2).is_err());
        assert!(kz_bound(8, 4, 3).is_err());
        for k in 3..8u64 {
            let n = 2 * k + 1;
            let expect = binom(2 * k, k - 1) + binom(k, k) - binom(k, k - 1);
            assert_eq!(kz_bound(n, k, k).unwrap(), expect);
        }
    }

    #[test]
    fn diversity_bound_values() {
        assert_eq!(diversity_bound(10, 3).unwrap(), BigUint::from(7u32));
        assert_eq!(diversity_bound(7, 3).unwrap(), BigUint::from(4u32));
        assert!(diversity_bound(2, 2).is_err());
    }

    #[test]
    fn lemma_examples() {
        let r = verify_lemma_key(10, 2, 3, 2).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.b_cap, 8);
        assert_eq!(lemma_key_point(10, 2, 3, 2, 8).unwrap(), (17, 45 - 33));
        assert!(lemma_key_point(10, 2, 3, 2, 9).is_err());
        assert!(verify_lemma_key(12, 3, 3, 2).unwrap().violations.is_empty());
        assert!(verify_lemma_key(9, 2, 3, 2).is_err());
        assert!(verify_lemma_key(10, 0, 3, 2).is_err());
    }

    #[test]
    fn lemma_with_b_below_a() {
        // cap argument m - (b - a + 1) exceeds m - 1; sweep clamps to C(m, b)
        let r = verify_lemma_key(13, 4, 2, 2).unwrap();
        assert_eq!(r.b_cap, binom_u128(14, 3));
        assert_eq!(r.swept_to, 78);
        assert_eq!(r.violations.is_empty(), r.worst_slack >= 0);
    }

    #[test]
    fn chain_on_a2() {
        let r = verify_triangle_chain(&build_a_u(12, 3, 2).unwrap()).unwrap();
        assert_eq!((r.g, r.h1, r.h2), (9, 0, 0));
        assert_eq!(r.bound, 9);
        assert!(r.first_holds && r.second_holds && r.chain_holds && r.diversity_within_bound);
        assert_eq!(r.first_lhs, 9);
    }

    #[test]
    fn chain_on_star_and_fano() {
        let r = verify_triangle_chain(&star(12, 3, 1).unwrap()).unwrap();
        assert_eq!(r.diversity, 0);
        // a star is far outside the regime where the two inequalities are theorems
        assert_eq!(r.h1, 36);
        assert!(!r.first_holds && r.chain_holds && r.diversity_within_bound);
        let r = verify_triangle_chain(&fano_plane()).unwrap();
        assert_eq!(r.diversity, 4);
        assert!(r.chain_holds && r.cross_intersecting);
    }
}
