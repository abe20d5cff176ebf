//! Named families, juntas, and the decomposition around the triangle `[3]`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitfam::{self, subsets_of_size, Family, SubsetMask};
use crate::bounds::binom_u128;
use crate::cube::{Cube, MAX_DIM};
use crate::error::{Error, Result};
use crate::runstat;

/// Largest `C(n, k)` a junta lift will enumerate.
pub const LIFT_CAP: u128 = 1 << 26;

/// Largest `r` for the cyclic-run junta (center `2r + 1 <= 25`).
pub const MAX_T_RADIUS: usize = 12;

/// A junta: membership depends only on the trace on the center `[j]`.
///
/// The defining family is held as a membership bitset over `2^[j]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JuntaSpec {
    cube: Cube,
}

impl core::fmt::Debug for JuntaSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("JuntaSpec").field("center_size", &self.center_size()).field("members", &self.count()).finish()
    }
}

fn check_center(j: usize) -> Result<()> {
    if j == 0 || j > MAX_DIM {
        Err(Error::Cap { what: "junta center size", value: j as u128, cap: MAX_DIM as u128 })
    } else {
        Ok(())
    }
}

impl JuntaSpec {
    /// Junta whose defining family is `{S ⊆ [j] : member(S)}`.
    pub fn from_predicate<F>(j: usize, member: F) -> Result<Self>
    where
        F: Fn(SubsetMask) -> bool + Sync + Send,
    {
        check_center(j)?;
        Ok(JuntaSpec { cube: Cube::from_fn(j, |p| member(SubsetMask::from_bits(p))) })
    }

    /// Junta over `[defining.n()]` with the given defining family.
    pub fn from_family(defining: &Family) -> Result<Self> {
        let j = defining.n();
        check_center(j)?;
        Ok(JuntaSpec { cube: Cube::from_points(j, defining.members().iter().map(|m| m.bits())) })
    }

    /// `{S : |S| >= t}` over `[j]`.
    pub fn threshold(j: usize, t: usize) -> Result<Self> {
        Self::from_predicate(j, move |s| s.len() >= t)
    }

    /// Strict majority over `[j]`.
    pub fn majority(j: usize) -> Result<Self> {
        Self::threshold(j, j / 2 + 1)
    }

    /// `{S : i ∈ S}` over `[j]`.
    pub fn dictator(j: usize, i: usize) -> Result<Self> {
        if i == 0 || i > j {
            return Err(Error::ElementOutOfRange { element: i, n: j });
        }
        Self::from_predicate(j, move |s| s.contains(i))
    }

    /// Defining family of `A_u` on the center `[u + 1]`:
    /// `S ⊇ [2, u+1]`, or `1 ∈ S` and `S` meets `[2, u+1]`.
    pub fn a_u(u: usize) -> Result<Self> {
        if u < 1 {
            return Err(Error::Parameter("A_u needs u >= 1"));
        }
        let tail = SubsetMask::full(u + 1).without(1).bits();
        Self::from_predicate(u + 1, move |s| {
            let b = s.bits();
            b & tail == tail || (s.contains(1) && b & tail != 0)
        })
    }

    #[inline]
    pub fn center_size(&self) -> usize {
        self.cube.dim()
    }

    #[inline]
    pub fn contains(&self, set: SubsetMask) -> bool {
        self.cube.contains(set.bits())
    }

    /// Number of defining members.
    pub fn count(&self) -> u64 {
        self.cube.count()
    }

    /// The defining family as an explicit non-uniform family over `[j]`.
    pub fn defining(&self) -> Family {
        let members = self.cube.points().into_iter().map(SubsetMask::from_bits).collect();
        Family::from_sorted(self.center_size(), None, members)
    }

    pub fn is_up_closed(&self) -> bool {
        self.cube.is_up_closed()
    }

    /// Whether the defining family is intersecting; runs in `O(j 2^j)`.
    pub fn is_intersecting(&self) -> bool {
        self.cube.is_intersecting()
    }

    /// Whether exactly one of `S` and `[j] \ S` is a member, for every `S`.
    pub fn is_complement_exclusive(&self) -> bool {
        self.cube.is_complement_exclusive()
    }

    pub(crate) fn cube(&self) -> &Cube {
        &self.cube
    }
}

/// The cyclic-run junta on `[2r + 1]`: `S` is a member iff its descending
/// ones-run list is lexicographically larger than its zeros-run list.
pub fn build_t_defining(r: usize) -> Result<JuntaSpec> {
    if r == 0 || r > MAX_T_RADIUS {
        return Err(Error::Parameter("cyclic-run junta needs 1 <= r <= 12"));
    }
    let len = 2 * r + 1;
    Ok(JuntaSpec { cube: Cube::from_fn(len, |p| runstat::in_t(p, len)) })
}

/// `{F ∈ C([n], k) : F ∩ [j] ∈ defining}`.
pub fn lift_junta(spec: &JuntaSpec, n: usize, k: usize) -> Result<Family> {
    let j = spec.center_size();
    if j > n {
        return Err(Error::Parameter("junta center larger than ground set"));
    }
    if n > bitfam::MAX_GROUND {
        return Err(Error::GroundSize(n));
    }
    if k > n {
        return Err(Error::Parameter("uniformity exceeds ground set"));
    }
    let total = binom_u128(n as u64, k as u64);
    if total > LIFT_CAP {
        return Err(Error::Cap { what: "C(n, k) for junta lift", value: total, cap: LIFT_CAP });
    }
    let outer = n - j;
    let mut members = Vec::new();
    for s in spec.cube().points() {
        let w = s.count_ones() as usize;
        if w > k || k - w > outer {
            continue;
        }
        members.extend(subsets_of_size(outer, k - w).map(|t| SubsetMask::from_bits(s | t << j)));
    }
    Ok(Family::canonical(n, Some(k), members))
}

/// `A_u`: sets containing `[2, u+1]`, or containing 1 and meeting `[2, u+1]`.
pub fn build_a_u(n: usize, k: usize, u: usize) -> Result<Family> {
    if u < 2 || u > k {
        return Err(Error::Parameter("A_u needs 2 <= u <= k"));
    }
    if n < 2 * k {
        return Err(Error::Parameter("A_u needs n >= 2k"));
    }
    lift_junta(&JuntaSpec::a_u(u)?, n, k)
}

/// `D_r`: k-sets with at least `r + 1` elements in `[2r + 1]`.
pub fn build_d_r(n: usize, k: usize, r: usize) -> Result<Family> {
    if r < 1 || r + 1 > k {
        return Err(Error::Parameter("D_r needs 1 <= r <= k - 1"));
    }
    if 2 * r + 1 > n {
        return Err(Error::Parameter("D_r needs 2r + 1 <= n"));
    }
    lift_junta(&JuntaSpec::threshold(2 * r + 1, r + 1)?, n, k)
}

/// All k-sets through `element`.
pub fn star(n: usize, k: usize, element: usize) -> Result<Family> {
    if element == 0 || element > n {
        return Err(Error::ElementOutOfRange { element, n });
    }
    if k == 0 || k > n {
        return Err(Error::Parameter("star needs 1 <= k <= n"));
    }
    let total = binom_u128(n as u64 - 1, k as u64 - 1);
    if total > LIFT_CAP {
        return Err(Error::Cap { what: "star size", value: total, cap: LIFT_CAP });
    }
    let e = element - 1;
    let members = subsets_of_size(n - 1, k - 1)
        .map(|t| {
            let low = t & ((1 << e) - 1);
            let high = (t >> e) << (e + 1);
            SubsetMask::from_bits(low | high | 1 << e)
        })
        .collect();
    Ok(Family::canonical(n, Some(k), members))
}

/// The seven lines of the Fano plane on `[7]`.
pub fn fano_plane() -> Family {
    Family::from_sets(7, Some(3), &[[1, 2, 4], [2, 3, 5], [3, 4, 6], [4, 5, 7], [5, 6, 1], [6, 7, 2], [7, 1, 3]])
        .expect("fano lines are valid")
}

/// All k-subsets of `[n]`.
pub fn complete_uniform(n: usize, k: usize) -> Result<Family> {
    let total = binom_u128(n as u64, k as u64);
    if total > LIFT_CAP {
        return Err(Error::Cap { what: "C(n, k)", value: total, cap: LIFT_CAP });
    }
    let members = subsets_of_size(n, k).map(SubsetMask::from_bits).collect();
    Family::from_masks(n, Some(k), members)
}

/// A random intersecting k-uniform family: shuffles `C([n], k)` and keeps each
/// set that meets everything kept so far, stopping at `target` members.
pub fn random_intersecting<R: Rng + ?Sized>(n: usize, k: usize, target: usize, rng: &mut R) -> Result<Family> {
    let total = binom_u128(n as u64, k as u64);
    if total > bitfam::PAIRWISE_LIMIT as u128 {
        return Err(Error::Cap {
            what: "C(n, k) for random sampling",
            value: total,
            cap: bitfam::PAIRWISE_LIMIT as u128,
        });
    }
    let mut pool: Vec<u64> = subsets_of_size(n, k).collect();
    pool.shuffle(rng);
    let mut chosen: Vec<u64> = Vec::new();
    for s in pool {
        if chosen.len() >= target {
            break;
        }
        if chosen.iter().all(|&c| c & s != 0) {
            chosen.push(s);
        }
    }
    Family::from_masks(n, Some(k), chosen.into_iter().map(SubsetMask::from_bits).collect())
}

/// The split of an intersecting family by its trace on `[3]`.
///
/// With `l` the index of the largest `F_i` and `{a, b} = [3] \ {l}`:
/// `g` holds traces on `[4, n]` of members meeting `[3]` in `{a, b}`,
/// `h1` the traces of `F_l`, and `h2` the members avoiding `[3]`. The three
/// families are stored on `[1, n - 3]`; add [`TriangleDecomposition::OFFSET`]
/// to recover the original labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleDecomposition {
    pub f1: Family,
    pub f2: Family,
    pub f3: Family,
    pub g: Family,
    pub h1: Family,
    pub h2: Family,
    pub largest_fi_index: usize,
    pub diversity: usize,
    /// `|g| + 2|h1| + |h2|`.
    pub chain_bound: usize,
    pub chain_holds: bool,
    pub g_h1_cross_intersecting: bool,
    pub g_h2_cross_intersecting: bool,
}

impl TriangleDecomposition {
    pub const OFFSET: usize = 3;

    pub fn part(&self, i: usize) -> &Family {
        match i {
            1 => &self.f1,
            2 => &self.f2,
            3 => &self.f3,
            _ => panic!("triangle parts are indexed 1..=3"),
        }
    }
}

pub fn triangle_decompose(fam: &Family) -> Result<TriangleDecomposition> {
    let n = fam.n();
    let k = fam.k().ok_or(Error::Parameter("triangle decomposition needs a uniform family"))?;
    if k < 2 {
        return Err(Error::Parameter("triangle decomposition needs k >= 2"));
    }
    if n < 4 {
        return Err(Error::Parameter("triangle decomposition needs n >= 4"));
    }
    if !bitfam::is_intersecting(fam)? {
        return Err(Error::NotIntersecting);
    }
    let trace = |bits: u64| fam.filter(|m| m.bits() & 0b111 == bits);
    let parts = [trace(0b001), trace(0b010), trace(0b100)];
    let mut largest = 0;
    for i in 1..3 {
        if parts[i].len() > parts[largest].len() {
            largest = i;
        }
    }
    let pair = 0b111 & !(1u64 << largest);
    let outer = |src: &Family, k: usize| -> Result<Family> {
        let masks = src.members().iter().map(|m| SubsetMask::from_bits(m.bits() >> 3)).collect();
        Family::from_masks(n - 3, Some(k), masks)
    };
    let g = outer(&trace(pair), k - 2)?;
    let h1 = outer(&parts[largest], k - 1)?;
    let h2 = outer(&trace(0), k)?;
    let diversity = bitfam::stats(fam).diversity;
    let chain_bound = g.len() + 2 * h1.len() + h2.len();
    let g_h1_cross_intersecting = bitfam::are_cross_intersecting(&g, &h1)?;
    let g_h2_cross_intersecting = bitfam::are_cross_intersecting(&g, &h2)?;
    let [f1, f2, f3] = parts;
    Ok(TriangleDecomposition {
        f1,
        f2,
        f3,
        g,
        h1,
        h2,
        largest_fi_index: largest + 1,
        diversity,
        chain_bound,
        chain_holds: diversity <= chain_bound,
        g_h1_cross_intersecting,
        g_h2_cross_intersecting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitfam::{is_intersecting, is_t_intersecting, stats};
    use alloc::vec;

    /// Direct enumeration of `C([n], k)` filtered by a predicate on element lists.
    fn brute(n: usize, k: usize, keep: impl Fn(&[usize]) -> bool) -> Family {
        let mut sets = Vec::new();
        for bits in 0u64..(1 << n) {
            if bits.count_ones() as usize != k {
                continue;
            }
            let elems: Vec<usize> = (1..=n).filter(|&e| bits >> (e - 1) & 1 == 1).collect();
            if keep(&elems) {
                sets.push(elems);
            }
        }
        Family::from_sets(n, Some(k), &sets).unwrap()
    }

    #[test]
    fn a2_on_seven() {
        let a2 = build_a_u(7, 3, 2).unwrap();
        assert_eq!(a2.len(), 13);
        assert_eq!(stats(&a2).diversity, 4);
        let a3 = build_a_u(7, 3, 3).unwrap();
        assert_eq!(a3.len(), 13);
    }

    #[test]
    fn a_u_matches_definition() {
        for (n, k, u) in [(10, 4, 3), (9, 4, 2), (8, 4, 4), (11, 5, 3)] {
            let expect = brute(n, k, |s| {
                let tail = |x: &usize| (2..=u + 1).contains(x);
                let hits = s.iter().filter(|x| tail(x)).count();
                hits == u || (s.contains(&1) && hits > 0)
            });
            assert_eq!(build_a_u(n, k, u).unwrap(), expect, "({n},{k},{u})");
        }
        assert_eq!(build_a_u(10, 4, 3).unwrap().len(), 70);
    }

    #[test]
    fn a_k_at_n_equals_2k_is_intersecting() {
        for k in 2..=5 {
            assert!(is_intersecting(&build_a_u(2 * k, k, k).unwrap()).unwrap());
        }
    }

    #[test]
    fn d_r_examples() {
        assert_eq!(build_d_r(7, 3, 1).unwrap(), build_a_u(7, 3, 2).unwrap());
        let d2 = build_d_r(7, 3, 2).unwrap();
        assert_eq!(d2, brute(7, 3, |s| s.iter().all(|&x| x <= 5)));
        let st = stats(&d2);
        assert_eq!((st.size, st.max_degree, st.diversity), (10, 6, 4));
        let tri = Family::from_sets(5, Some(2), &[[1, 2], [1, 3], [2, 3]]).unwrap();
        assert_eq!(build_d_r(5, 2, 1).unwrap(), tri);
    }

    #[test]
    fn d_r_without_one_is_two_intersecting() {
        let d = build_d_r(7, 3, 2).unwrap();
        let rest = d.filter(|m| !m.contains(1));
        assert_eq!(rest.len(), 4);
        assert!(is_t_intersecting(&rest, 2).unwrap());
        for (n, k, r) in [(9, 4, 2), (11, 5, 3), (10, 4, 3)] {
            let d = build_d_r(n, k, r).unwrap();
            assert!(is_intersecting(&d).unwrap());
            assert!(is_t_intersecting(&d.filter(|m| !m.contains(1)), 2).unwrap());
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(build_a_u(7, 3, 1).is_err());
        assert!(build_a_u(7, 3, 4).is_err());
        assert!(build_a_u(5, 3, 2).is_err());
        assert!(build_d_r(7, 3, 3).is_err());
        assert!(build_d_r(4, 3, 2).is_err());
        assert!(build_t_defining(0).is_err());
        assert!(build_t_defining(13).is_err());
        assert!(lift_junta(&JuntaSpec::majority(5).unwrap(), 4, 2).is_err());
        assert!(lift_junta(&JuntaSpec::majority(3).unwrap(), 60, 30).unwrap_err().is_cap());
    }

    #[test]
    fn t_radius_one_is_majority() {
        let t1 = build_t_defining(1).unwrap();
        let expect = Family::from_sets(3, None, &[vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2, 3]]).unwrap();
        assert_eq!(t1.defining(), expect);
    }

    #[test]
    fn t_differs_from_majority_at_radius_five() {
        let t5 = build_t_defining(5).unwrap();
        let (word, _) = runstat::parse_word("11110001000").unwrap();
        let w = SubsetMask::from_bits(word);
        assert_eq!(w.len(), 5);
        assert!(t5.contains(w));
        assert!(!JuntaSpec::majority(11).unwrap().contains(w));
    }

    #[test]
    fn t_matches_majority_up_to_radius_four() {
        for r in 1..=4 {
            assert_eq!(build_t_defining(r).unwrap(), JuntaSpec::majority(2 * r + 1).unwrap(), "r = {r}");
        }
        assert_ne!(build_t_defining(5).unwrap(), JuntaSpec::majority(11).unwrap());
    }

    #[test]
    fn t_structure_small_radii() {
        for r in 1..=6 {
            let t = build_t_defining(r).unwrap();
            assert_eq!(t.count(), 1 << (2 * r));
            assert!(t.is_up_closed());
            assert!(t.is_intersecting());
            assert!(t.is_complement_exclusive());
        }
    }

    #[test]
    fn lift_examples() {
        let maj = JuntaSpec::majority(3).unwrap();
        assert_eq!(lift_junta(&maj, 7, 3).unwrap(), build_d_r(7, 3, 1).unwrap());
        let none = JuntaSpec::from_predicate(3, |_| false).unwrap();
        assert!(lift_junta(&none, 7, 3).unwrap().is_empty());
        let all = JuntaSpec::from_predicate(1, |_| true).unwrap();
        assert_eq!(lift_junta(&all, 5, 2).unwrap(), complete_uniform(5, 2).unwrap());
    }

    #[test]
    fn from_family_round_trip() {
        let fam = Family::from_sets(4, None, &[vec![1], vec![2, 3], vec![]]).unwrap();
        let spec = JuntaSpec::from_family(&fam).unwrap();
        assert_eq!(spec.defining(), fam);
        assert_eq!(spec.count(), 3);
    }

    #[test]
    fn star_and_fano() {
        let s = star(6, 3, 4).unwrap();
        assert_eq!(s, brute(6, 3, |x| x.contains(&4)));
        assert!(is_intersecting(&fano_plane()).unwrap());
    }

    #[test]
    fn decompose_a2() {
        let d = triangle_decompose(&build_a_u(7, 3, 2).unwrap()).unwrap();
        assert!(d.f1.is_empty() && d.f2.is_empty() && d.f3.is_empty() && d.h2.is_empty());
        assert_eq!(d.g.len(), 4);
        assert_eq!(d.diversity, 4);
        assert_eq!(d.largest_fi_index, 1);
        assert_eq!(d.g.n(), 4);
        assert_eq!(d.g.k(), Some(1));
    }

    #[test]
    fn decompose_star_of_five() {
        let s = star(7, 3, 5).unwrap();
        let d = triangle_decompose(&s).unwrap();
        // members {5, x, y}: F_i are {i, 5, y} with y in 4..=7 \ {5}, 3 each
        assert_eq!((d.f1.len(), d.f2.len(), d.f3.len()), (3, 3, 3));
        assert_eq!(d.largest_fi_index, 1);
        // g: traces of {2, 3, 5}
        assert_eq!(d.g.to_sets(), vec![vec![2]]);
        // h2: {5, x, y} with x, y in {4, 6, 7}
        assert_eq!(d.h2.len(), 3);
        assert_eq!(d.diversity, 0);
        assert!(d.chain_holds && d.g_h1_cross_intersecting && d.g_h2_cross_intersecting);
    }

    #[test]
    fn decompose_fano() {
        let d = triangle_decompose(&fano_plane()).unwrap();
        assert_eq!(d.diversity, 4);
        assert!(d.chain_holds);
        assert!(d.chain_bound >= 4);
        assert!(d.g_h1_cross_intersecting && d.g_h2_cross_intersecting);
    }

    #[test]
    fn decompose_rejects_bad_input() {
        let disjoint = Family::from_sets(6, Some(2), &[[1, 2], [3, 4]]).unwrap();
        assert_eq!(triangle_decompose(&disjoint).unwrap_err(), Error::NotIntersecting);
        let nonuniform = Family::from_sets(6, None, &[vec![1, 2]]).unwrap();
        assert!(triangle_decompose(&nonuniform).is_err());
        let k1 = Family::from_sets(6, Some(1), &[[1]]).unwrap();
        assert!(triangle_decompose(&k1).is_err());
    }

    #[test]
    fn random_families_are_intersecting() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_intersecting(9, 3, 15, &mut rng).unwrap();
            assert!(f.len() <= 15 && !f.is_empty());
            assert!(is_intersecting(&f).unwrap());
        }
    }
}
