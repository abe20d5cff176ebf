//! Set families over `[n]` packed as 64-bit masks.
//!
//! Element `i` of the ground set is stored at bit `i - 1`.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;

/// Largest supported ground set.
pub const MAX_GROUND: usize = 63;

/// Above this many members the quadratic pairwise check refuses to run.
pub const PAIRWISE_LIMIT: usize = 1 << 16;

/// One subset of `[n]`; bit `i - 1` set iff element `i` belongs to it.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(u64);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        SubsetMask(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Builds a mask from 1-based elements, rejecting anything outside `[1, n]`.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &e in elements {
            if e == 0 || e > n {
                return Err(Error::ElementOutOfRange { element: e, n });
            }
            let bit = 1u64 << (e - 1);
            if bits & bit != 0 {
                return Err(Error::DuplicateElement(e));
            }
            bits |= bit;
        }
        Ok(SubsetMask(bits))
    }

    /// The full set `[n]`.
    #[inline]
    pub const fn full(n: usize) -> Self {
        SubsetMask(low_bits(n))
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn contains(self, element: usize) -> bool {
        element >= 1 && element <= 64 && self.0 >> (element - 1) & 1 == 1
    }

    #[inline]
    pub const fn intersects(self, other: SubsetMask) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub const fn meet_size(self, other: SubsetMask) -> usize {
        (self.0 & other.0).count_ones() as usize
    }

    /// Smallest element, if any.
    #[inline]
    pub const fn min_element(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize + 1)
        }
    }

    #[inline]
    pub const fn with(self, element: usize) -> Self {
        SubsetMask(self.0 | 1u64 << (element - 1))
    }

    #[inline]
    pub const fn without(self, element: usize) -> Self {
        SubsetMask(self.0 & !(1u64 << (element - 1)))
    }

    /// Elements in ascending order.
    pub fn elements(self) -> Elements {
        Elements(self.0)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements()).finish()
    }
}

/// Iterator over the elements of a [`SubsetMask`].
#[derive(Clone)]
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as usize + 1;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

#[inline]
pub(crate) const fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// All `t`-subsets of `{0, .., m-1}` as bit patterns, in increasing numeric order.
pub(crate) fn subsets_of_size(m: usize, t: usize) -> impl Iterator<Item = u64> {
    let limit: u128 = 1u128 << m;
    let mut next = if t > m { None } else { Some(low_bits(t)) };
    core::iter::from_fn(move || {
        let x = next?;
        next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x as u128 + c as u128;
            let y = (((r ^ x as u128) >> 2) / c as u128) | r;
            (y < limit).then_some(y as u64)
        };
        Some(x)
    })
}

/// A canonical family: members sorted ascending by mask value, no repeats.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Family {
    n: usize,
    k: Option<usize>,
    members: Vec<SubsetMask>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family").field("n", &self.n).field("k", &self.k).field("members", &self.members).finish()
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GROUND {
        Err(Error::GroundSize(n))
    } else {
        Ok(())
    }
}

impl Family {
    /// Builds a canonical family from element lists (`make_family`).
    pub fn from_sets<S: AsRef<[usize]>>(n: usize, k: Option<usize>, sets: &[S]) -> Result<Self> {
        check_ground(n)?;
        let mut members = Vec::with_capacity(sets.len());
        for set in sets {
            let set = set.as_ref();
            let mask = SubsetMask::from_elements(n, set)?;
            if let Some(k) = k {
                if mask.len() != k {
                    return Err(Error::WrongCardinality { expected: k, found: mask.len() });
                }
            }
            members.push(mask);
        }
        Ok(Self::canonical(n, k, members))
    }

    /// Builds a canonical family from raw masks, validating range and uniformity.
    pub fn from_masks(n: usize, k: Option<usize>, masks: Vec<SubsetMask>) -> Result<Self> {
        check_ground(n)?;
        let outside = !low_bits(n);
        for m in &masks {
            if m.0 & outside != 0 {
                let element = (63 - (m.0 & outside).leading_zeros()) as usize + 1;
                return Err(Error::ElementOutOfRange { element, n });
            }
            if let Some(k) = k {
                if m.len() != k {
                    return Err(Error::WrongCardinality { expected: k, found: m.len() });
                }
            }
        }
        Ok(Self::canonical(n, k, masks))
    }

    /// The empty family on `[n]`.
    pub fn empty(n: usize, k: Option<usize>) -> Result<Self> {
        check_ground(n)?;
        Ok(Family { n, k, members: Vec::new() })
    }

    pub(crate) fn canonical(n: usize, k: Option<usize>, mut members: Vec<SubsetMask>) -> Self {
        members.sort_unstable();
        members.dedup();
        Family { n, k, members }
    }

    /// Wraps masks already sorted and deduplicated.
    pub(crate) fn from_sorted(n: usize, k: Option<usize>, members: Vec<SubsetMask>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { n, k, members }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    #[inline]
    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, set: SubsetMask) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    /// Members as ascending element lists.
    pub fn to_sets(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|m| m.elements().collect()).collect()
    }

    /// The family with `set` added (no-op if already present).
    pub fn with_member(&self, set: SubsetMask) -> Result<Self> {
        let mut members = self.members.clone();
        members.push(set);
        Self::from_masks(self.n, self.k, members)
    }

    /// Members satisfying `keep`, on the same ground set.
    pub fn filter<P: FnMut(SubsetMask) -> bool>(&self, mut keep: P) -> Self {
        let members = self.members.iter().copied().filter(|&m| keep(m)).collect();
        Family::from_sorted(self.n, self.k, members)
    }

    /// Same members with the uniformity tag dropped or replaced.
    pub fn with_uniformity(&self, k: Option<usize>) -> Result<Self> {
        Self::from_masks(self.n, k, self.members.clone())
    }
}

/// Degree statistics of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub size: usize,
    /// `degrees[i - 1]` is the number of members containing `i`.
    pub degrees: Vec<usize>,
    pub max_degree: usize,
    /// Smallest element attaining the maximum degree; `None` for the empty family.
    pub max_degree_element: Option<usize>,
    pub diversity: usize,
}

/// Degrees, maximum degree and diversity `|F| - Delta(F)`.
pub fn stats(fam: &Family) -> FamilyStats {
    let mut degrees = alloc::vec![0usize; fam.n];
    for m in &fam.members {
        for e in m.elements() {
            degrees[e - 1] += 1;
        }
    }
    let mut max_degree = 0;
    let mut max_degree_element = None;
    if !fam.is_empty() {
        for (i, &d) in degrees.iter().enumerate() {
            if max_degree_element.is_none() || d > max_degree {
                max_degree = d;
                max_degree_element = Some(i + 1);
            }
        }
    }
    FamilyStats { size: fam.len(), degrees, max_degree, max_degree_element, diversity: fam.len() - max_degree }
}

/// True iff every two distinct members share at least `t` elements.
///
/// Refuses families above [`PAIRWISE_LIMIT`] members; up-sets over a junta
/// center should use [`crate::booleanlab::is_intersecting_junta`] instead.
pub fn is_t_intersecting(fam: &Family, t: usize) -> Result<bool> {
    if fam.len() > PAIRWISE_LIMIT {
        return Err(Error::Cap {
            what: "members for pairwise check",
            value: fam.len() as u128,
            cap: PAIRWISE_LIMIT as u128,
        });
    }
    let members = &fam.members;
    let t = t as u32;
    let ok = exec::fold_blocks(
        members.len() as u64,
        64,
        true,
        |range| {
            range.into_iter().all(|i| {
                let a = members[i as usize].0;
                members[i as usize + 1..].iter().all(|b| (a & b.0).count_ones() >= t)
            })
        },
        |x, y| x && y,
    );
    Ok(ok)
}

/// Shorthand for `is_t_intersecting(fam, 1)`.
pub fn is_intersecting(fam: &Family) -> Result<bool> {
    is_t_intersecting(fam, 1)
}

/// True iff every member of `a` meets every member of `b`.
pub fn are_cross_intersecting(a: &Family, b: &Family) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::GroundMismatch(a.n, b.n));
    }
    Ok(a.members.iter().all(|x| b.members.iter().all(|y| x.0 & y.0 != 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn fano() -> Family {
        Family::from_sets(7, Some(3), &[[1, 2, 4], [2, 3, 5], [3, 4, 6], [4, 5, 7], [5, 6, 1], [6, 7, 2], [7, 1, 3]])
            .unwrap()
    }

    #[test]
    fn triangle_family() {
        let f = Family::from_sets(3, Some(2), &[[1, 2], [1, 3], [2, 3]]).unwrap();
        let bits: Vec<u64> = f.members().iter().map(|m| m.bits()).collect();
        assert_eq!(bits, vec![0b011, 0b101, 0b110]);
        assert!(is_intersecting(&f).unwrap());
    }

    #[test]
    fn duplicate_sets_collapse() {
        let f = Family::from_sets(4, Some(2), &[[1, 2], [2, 1]]).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn two_of_three_on_seven() {
        // all 3-subsets of [7] with at least two elements in {1,2,3}
        let mut sets = Vec::new();
        for a in 1..=7usize {
            for b in a + 1..=7 {
                for c in b + 1..=7 {
                    let hits = [a, b, c].iter().filter(|&&x| x <= 3).count();
                    if hits >= 2 {
                        sets.push(vec![a, b, c]);
                    }
                }
            }
        }
        let f = Family::from_sets(7, Some(3), &sets).unwrap();
        assert_eq!(f.len(), 13);
        assert_eq!(stats(&f).diversity, 4);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Family::from_sets(3, None, &[[1, 4]]).unwrap_err(), Error::ElementOutOfRange { element: 4, n: 3 });
        assert_eq!(
            Family::from_sets(5, Some(2), &[vec![1, 2, 3]]).unwrap_err(),
            Error::WrongCardinality { expected: 2, found: 3 }
        );
        assert_eq!(Family::from_sets(5, Some(2), &[[2, 2]]).unwrap_err(), Error::DuplicateElement(2));
        assert_eq!(Family::from_sets::<[usize; 0]>(0, None, &[]).unwrap_err(), Error::GroundSize(0));
        assert_eq!(Family::from_sets::<[usize; 0]>(64, None, &[]).unwrap_err(), Error::GroundSize(64));
        assert!(Family::from_masks(3, None, vec![SubsetMask::from_bits(0b1000)]).is_err());
    }

    #[test]
    fn disjoint_pair_is_not_intersecting() {
        let f = Family::from_sets(4, Some(2), &[[1, 2], [3, 4]]).unwrap();
        assert!(!is_intersecting(&f).unwrap());
        let single = Family::from_sets(4, Some(2), &[[1, 2]]).unwrap();
        assert!(is_t_intersecting(&single, 5).unwrap());
        assert!(is_t_intersecting(&Family::empty(4, None).unwrap(), 3).unwrap());
    }

    #[test]
    fn cross_intersecting_examples() {
        let star2 = Family::from_sets(5, Some(2), &[[1, 2], [1, 3], [1, 4], [1, 5]]).unwrap();
        let mut sets3 = Vec::new();
        for a in 2..=5usize {
            for b in a + 1..=5 {
                sets3.push(vec![1, a, b]);
            }
        }
        let star3 = Family::from_sets(5, Some(3), &sets3).unwrap();
        assert!(are_cross_intersecting(&star2, &star3).unwrap());
        let a = Family::from_sets(5, None, &[[2, 3]]).unwrap();
        let b = Family::from_sets(5, None, &[[4, 5]]).unwrap();
        assert!(!are_cross_intersecting(&a, &b).unwrap());
        let empty = Family::empty(5, None).unwrap();
        assert!(are_cross_intersecting(&a, &empty).unwrap());
        let other = Family::empty(6, None).unwrap();
        assert_eq!(are_cross_intersecting(&a, &other).unwrap_err(), Error::GroundMismatch(5, 6));
    }

    #[test]
    fn star_has_zero_diversity() {
        let mut sets = Vec::new();
        for a in 2..=6usize {
            for b in a + 1..=6 {
                sets.push(vec![1, a, b]);
            }
        }
        let star = Family::from_sets(6, Some(3), &sets).unwrap();
        let s = stats(&star);
        assert_eq!(s.diversity, 0);
        assert_eq!(s.max_degree_element, Some(1));
    }

    #[test]
    fn fano_stats() {
        let s = stats(&fano());
        assert_eq!((s.size, s.max_degree, s.diversity), (7, 3, 4));
        assert_eq!(s.max_degree_element, Some(1));
        assert!(is_intersecting(&fano()).unwrap());
    }

    #[test]
    fn empty_family_stats() {
        let s = stats(&Family::empty(5, Some(2)).unwrap());
        assert_eq!((s.size, s.max_degree, s.diversity, s.max_degree_element), (0, 0, 0, None));
    }

    #[test]
    fn pairwise_check_refuses_huge_families() {
        let masks = (0..(PAIRWISE_LIMIT as u64 + 1)).map(SubsetMask::from_bits).collect();
        let f = Family::from_masks(20, None, masks).unwrap();
        assert!(is_intersecting(&f).unwrap_err().is_cap());
    }
}
