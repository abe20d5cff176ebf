//! `(i, j)`-shifting and the lexicographic order on k-sets.
//!
//! In lex order `A` comes before `B` iff `min(A \ B) < min(B \ A)`, so the
//! order starts at `{1, .., k}`. "Largest" lex segments are the earliest ones.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bitfam::{Family, SubsetMask, MAX_GROUND};
use crate::bounds::binom_u128;
use crate::error::{Error, Result};

/// `S_{i,j}(A)`: replace `j` by `i` when `j ∈ A` and `i ∉ A`.
#[inline]
pub fn shift_set(set: SubsetMask, i: usize, j: usize) -> SubsetMask {
    if set.contains(j) && !set.contains(i) {
        set.without(j).with(i)
    } else {
        set
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == 0 || i >= j || j > n {
        Err(Error::Parameter("shift needs 1 <= i < j <= n"))
    } else {
        Ok(())
    }
}

/// `S_{i,j}(F) = {S_{i,j}(A) : A ∈ F} ∪ {A : A, S_{i,j}(A) ∈ F}`.
pub fn shift_family(fam: &Family, i: usize, j: usize) -> Result<Family> {
    check_pair(fam.n(), i, j)?;
    Ok(shift_unchecked(fam, i, j))
}

fn shift_unchecked(fam: &Family, i: usize, j: usize) -> Family {
    let members = fam
        .members()
        .iter()
        .map(|&a| {
            let b = shift_set(a, i, j);
            if b == a || fam.contains(b) {
                a
            } else {
                b
            }
        })
        .collect();
    Family::canonical(fam.n(), fam.k(), members)
}

/// Repeats shifts until the family is fixed by every `S_{i,j}`.
///
/// Pairs are swept in lexicographic order and the sweep restarts after every
/// effective shift; `sum_{F} sum_{x ∈ F} x` drops at each one, so this ends.
pub fn shift_closure(fam: &Family) -> Family {
    let n = fam.n();
    let mut current = fam.clone();
    'sweep: loop {
        for i in 1..n {
            for j in i + 1..=n {
                let next = shift_unchecked(&current, i, j);
                if next != current {
                    current = next;
                    continue 'sweep;
                }
            }
        }
        return current;
    }
}

pub fn is_shifted(fam: &Family) -> bool {
    let n = fam.n();
    (1..n).all(|i| (i + 1..=n).all(|j| shift_unchecked(fam, i, j) == *fam))
}

/// Lex comparison of two sets of the same size; `Less` means `a` comes first.
pub fn lex_compare(a: SubsetMask, b: SubsetMask) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::Parameter("lex comparison needs sets of equal size"));
    }
    let diff = a.bits() ^ b.bits();
    if diff == 0 {
        return Ok(Ordering::Equal);
    }
    let lowest = diff & diff.wrapping_neg();
    Ok(if a.bits() & lowest != 0 { Ordering::Less } else { Ordering::Greater })
}

/// k-subsets of `[n]` in lex order.
#[derive(Clone, Debug)]
pub struct LexOrder {
    n: usize,
    k: usize,
    idx: [u8; MAX_GROUND],
    done: bool,
}

impl LexOrder {
    pub fn new(n: usize, k: usize) -> Self {
        let mut idx = [0u8; MAX_GROUND];
        for (i, slot) in idx.iter_mut().enumerate().take(k.min(MAX_GROUND)) {
            *slot = i as u8;
        }
        LexOrder { n, k, idx, done: k > n || n > MAX_GROUND }
    }
}

impl Iterator for LexOrder {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        if self.done {
            return None;
        }
        let (n, k) = (self.n, self.k);
        let bits = self.idx[..k].iter().fold(0u64, |acc, &e| acc | 1 << e);
        // advance: rightmost slot that can still move
        match (0..k).rev().find(|&i| (self.idx[i] as usize) < n - k + i) {
            Some(i) => {
                self.idx[i] += 1;
                for t in i + 1..k {
                    self.idx[t] = self.idx[t - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(SubsetMask::from_bits(bits))
    }
}

/// `L(m, k)`: the first `m` k-subsets of `[n]` in lex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexSegment {
    pub m_sets: usize,
    pub k: usize,
    pub n: usize,
    pub realized: Family,
}

pub fn lex_segment(m_sets: usize, k: usize, n: usize) -> Result<LexSegment> {
    if n == 0 || n > MAX_GROUND || k > n {
        return Err(Error::Parameter("lex segment needs k <= n <= 63"));
    }
    let available = binom_u128(n as u64, k as u64);
    if m_sets as u128 > available {
        return Err(Error::Parameter("lex segment longer than C(n, k)"));
    }
    let members: Vec<SubsetMask> = LexOrder::new(n, k).take(m_sets).collect();
    Ok(LexSegment { m_sets, k, n, realized: Family::canonical(n, Some(k), members) })
}

/// Longest lex prefix of `C([m], a)` cross-intersecting `L(b_size, b)`.
///
/// Scans `C([m], a)` in lex order and stops at the first set disjoint from
/// some member of the `b`-segment.
pub fn lex_partner_max(b_size: usize, a: usize, b: usize, m: usize) -> Result<usize> {
    if m == 0 || m > MAX_GROUND || a > m || b > m {
        return Err(Error::Parameter("lex partner needs a, b <= m <= 63"));
    }
    if b_size as u128 > binom_u128(m as u64, b as u64) {
        return Err(Error::Parameter("b_size exceeds C(m, b)"));
    }
    let segment: Vec<u64> = LexOrder::new(m, b).take(b_size).map(|s| s.bits()).collect();
    Ok(LexOrder::new(m, a).take_while(|s| segment.iter().all(|&t| t & s.bits() != 0)).count())
}

/// All b-subsets of `[n]` meeting every member of `fam`: the largest family
/// cross-intersecting it.
pub fn max_cross_partner(fam: &Family, b: usize) -> Result<Family> {
    let n = fam.n();
    if b > n {
        return Err(Error::Parameter("partner uniformity exceeds n"));
    }
    let count = binom_u128(n as u64, b as u64);
    if count > crate::bitfam::PAIRWISE_LIMIT as u128 {
        return Err(Error::Cap {
            what: "C(n, b) for partner construction",
            value: count,
            cap: crate::bitfam::PAIRWISE_LIMIT as u128,
        });
    }
    let members = LexOrder::new(n, b).filter(|s| fam.members().iter().all(|f| f.intersects(*s))).collect();
    Ok(Family::canonical(n, Some(b), members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitfam::{is_intersecting, stats};
    use crate::constructions::{fano_plane, star};
    use alloc::vec;

    fn fam(n: usize, sets: &[&[usize]]) -> Family {
        Family::from_sets(n, None, sets).unwrap()
    }

    #[test]
    fn single_shift_examples() {
        let f = fam(3, &[&[2, 3]]);
        assert_eq!(shift_family(&f, 1, 2).unwrap(), fam(3, &[&[1, 3]]));
        let f = fam(3, &[&[1, 3], &[2, 3]]);
        assert_eq!(shift_family(&f, 1, 2).unwrap(), f);
        let s = shift_family(&fano_plane(), 1, 2).unwrap();
        assert_eq!(s.len(), 7);
        assert!(is_intersecting(&s).unwrap());
        assert!(shift_family(&f, 2, 2).is_err());
        assert!(shift_family(&f, 2, 4).is_err());
    }

    #[test]
    fn closure_examples() {
        let st = star(6, 3, 1).unwrap();
        assert_eq!(shift_closure(&st), st);
        assert!(is_shifted(&st));
        let f = fam(3, &[&[2, 3]]);
        assert!(!is_shifted(&f));
        assert_eq!(shift_closure(&f), fam(3, &[&[1, 2]]));
        let c = shift_closure(&fano_plane());
        assert!(is_shifted(&c));
        assert!(is_intersecting(&c).unwrap());
        let s = stats(&c);
        assert_eq!(s.degrees[0], s.max_degree);
    }

    #[test]
    fn lex_compare_examples() {
        let m = |e: &[usize]| SubsetMask::from_elements(5, e).unwrap();
        assert_eq!(lex_compare(m(&[1, 4]), m(&[2, 3])).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(m(&[1, 2]), m(&[1, 3])).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(m(&[2, 3]), m(&[2, 3])).unwrap(), Ordering::Equal);
        assert!(lex_compare(m(&[1]), m(&[2, 3])).is_err());
    }

    #[test]
    fn lex_sort_of_pairs() {
        let mut all: Vec<SubsetMask> = LexOrder::new(5, 2).collect();
        all.reverse();
        all.sort_by(|a, b| lex_compare(*a, *b).unwrap());
        let expect: Vec<Vec<usize>> = vec![
            vec![1, 2],
            vec![1, 3],
            vec![1, 4],
            vec![1, 5],
            vec![2, 3],
            vec![2, 4],
            vec![2, 5],
            vec![3, 4],
            vec![3, 5],
            vec![4, 5],
        ];
        let got: Vec<Vec<usize>> = all.iter().map(|s| s.elements().collect()).collect();
        assert_eq!(got, expect);
        let direct: Vec<Vec<usize>> = LexOrder::new(5, 2).map(|s| s.elements().collect()).collect();
        assert_eq!(direct, expect);
    }

    #[test]
    fn lex_segment_examples() {
        // C(n-1, k-1) first sets form the star of 1
        let seg = lex_segment(15, 3, 7).unwrap();
        assert_eq!(seg.realized, star(7, 3, 1).unwrap());
        let seg = lex_segment(8, 3, 10).unwrap();
        assert!(seg.realized.members().iter().all(|s| s.contains(1) && s.contains(2)));
        assert_eq!(seg.realized.len(), 8);
        assert!(lex_segment(0, 3, 10).unwrap().realized.is_empty());
        assert!(lex_segment(121, 3, 10).is_err());
    }

    #[test]
    fn partner_examples() {
        assert_eq!(lex_partner_max(8, 2, 3, 10).unwrap(), 17);
        assert_eq!(lex_partner_max(0, 2, 3, 10).unwrap(), 45);
        assert_eq!(lex_partner_max(120, 2, 3, 10).unwrap(), 0);
        assert!(lex_partner_max(121, 2, 3, 10).is_err());
    }

    #[test]
    fn partner_of_lex_segment() {
        let seg = lex_segment(8, 3, 10).unwrap().realized;
        let p = max_cross_partner(&seg, 2).unwrap();
        assert_eq!(p.len(), 17);
        assert_eq!(p, lex_segment(17, 2, 10).unwrap().realized);
        let none = Family::empty(6, Some(3)).unwrap();
        assert_eq!(max_cross_partner(&none, 2).unwrap().len(), 15);
    }

    #[test]
    fn lex_order_edge_cases() {
        assert_eq!(LexOrder::new(4, 0).count(), 1);
        assert_eq!(LexOrder::new(4, 4).count(), 1);
        assert_eq!(LexOrder::new(3, 4).count(), 0);
        assert_eq!(LexOrder::new(12, 5).count(), 792);
    }
}
