//! Membership bitsets over the full cube `2^[j]`, `j <= 25`.
//!
//! Point `p` (a subset of the center, as a mask) lives at bit `p % 64` of
//! word `p / 64`. Flipping coordinate `i < 6` permutes bits inside a word;
//! flipping `i >= 6` pairs whole words.

use alloc::vec::Vec;

use crate::bitfam::low_bits;
use crate::exec;

/// Largest cube dimension.
pub(crate) const MAX_DIM: usize = 25;

/// `IN_WORD_CLEAR[i]`: bit positions of a word whose index has bit `i` clear.
const IN_WORD_CLEAR: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// `LOW_CLASS[c]`: bit positions `b < 64` with `popcount(b) == c`.
const LOW_CLASS: [u64; 7] = low_classes();

const fn low_classes() -> [u64; 7] {
    let mut out = [0u64; 7];
    let mut b = 0;
    while b < 64 {
        out[(b as u64).count_ones() as usize] |= 1u64 << b;
        b += 1;
    }
    out
}

/// Per-weight counts attached to one coordinate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct CoordinateCounts {
    /// Members containing the coordinate, bucketed by weight.
    pub with: Vec<u64>,
    /// Members avoiding the coordinate, bucketed by weight.
    pub without: Vec<u64>,
    /// Points (member or not) whose membership flips with the coordinate.
    pub boundary: Vec<u64>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct Cube {
    dim: usize,
    words: Vec<u64>,
}

impl Cube {
    fn word_count(dim: usize) -> usize {
        if dim >= 6 {
            1 << (dim - 6)
        } else {
            1
        }
    }

    /// Mask of bit positions in use within each word.
    #[inline]
    fn valid(&self) -> u64 {
        if self.dim >= 6 {
            u64::MAX
        } else {
            low_bits(1 << self.dim)
        }
    }

    pub(crate) fn from_fn<F>(dim: usize, member: F) -> Cube
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        debug_assert!(dim <= MAX_DIM);
        let points_per_word = if dim >= 6 { 64 } else { 1u64 << dim };
        let words = exec::map_collect(Self::word_count(dim), |w| {
            let base = (w as u64) << 6;
            let mut x = 0u64;
            for b in 0..points_per_word {
                if member(base | b) {
                    x |= 1 << b;
                }
            }
            x
        });
        Cube { dim, words }
    }

    pub(crate) fn from_points(dim: usize, points: impl IntoIterator<Item = u64>) -> Cube {
        let mut words = alloc::vec![0u64; Self::word_count(dim)];
        for p in points {
            words[(p >> 6) as usize] |= 1 << (p & 63);
        }
        Cube { dim, words }
    }

    #[inline]
    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub(crate) fn contains(&self, p: u64) -> bool {
        self.words[(p >> 6) as usize] >> (p & 63) & 1 == 1
    }

    pub(crate) fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub(crate) fn points(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.count() as usize);
        for (w, &x) in self.words.iter().enumerate() {
            let mut x = x;
            while x != 0 {
                out.push(((w as u64) << 6) | x.trailing_zeros() as u64);
                x &= x - 1;
            }
        }
        out
    }

    #[inline]
    fn bucket(counts: &mut [u64], word_index: usize, bits: u64) {
        if bits == 0 {
            return;
        }
        let high = word_index.count_ones() as usize;
        for (c, class) in LOW_CLASS.iter().enumerate() {
            let hits = (bits & class).count_ones() as u64;
            if hits != 0 {
                counts[high + c] += hits;
            }
        }
    }

    fn fold_words<T, F>(&self, identity: T, f: F, merge: fn(T, T) -> T) -> T
    where
        T: Send + Sync + Clone,
        F: Fn(&mut T, usize, u64) + Sync + Send,
    {
        let words = &self.words;
        let fresh = identity.clone();
        exec::fold_blocks(
            words.len() as u64,
            1 << 10,
            identity,
            |range| {
                let mut acc = fresh.clone();
                for w in range {
                    f(&mut acc, w as usize, words[w as usize]);
                }
                acc
            },
            merge,
        )
    }

    /// Members bucketed by weight (`len == dim + 1`).
    pub(crate) fn weight_counts(&self) -> Vec<u64> {
        let slots = self.dim + 7;
        let mut counts =
            self.fold_words(alloc::vec![0u64; slots], |acc, w, x| Self::bucket(acc, w, x), exec::add_counts);
        counts.truncate(self.dim + 1);
        counts
    }

    /// Word at `w` after flipping coordinate `i` (0-based) of every point.
    #[inline]
    fn flipped(&self, w: usize, i: usize) -> u64 {
        if i < 6 {
            let x = self.words[w];
            let s = 1u32 << i;
            let m = IN_WORD_CLEAR[i];
            ((x >> s) & m) | ((x & m) << s)
        } else {
            self.words[w ^ (1 << (i - 6))]
        }
    }

    /// Positions in word `w` whose point contains coordinate `i`.
    #[inline]
    fn with_coordinate(&self, w: usize, i: usize) -> u64 {
        let v = self.valid();
        if i < 6 {
            !IN_WORD_CLEAR[i] & v
        } else if w >> (i - 6) & 1 == 1 {
            v
        } else {
            0
        }
    }

    pub(crate) fn coordinate_counts(&self, i: usize) -> CoordinateCounts {
        debug_assert!(i < self.dim);
        let slots = self.dim + 7;
        let zero = alloc::vec![0u64; 3 * slots];
        let mut flat = self.fold_words(
            zero,
            |acc, w, x| {
                let has = self.with_coordinate(w, i);
                let (with, rest) = acc.split_at_mut(slots);
                let (without, boundary) = rest.split_at_mut(slots);
                Self::bucket(with, w, x & has);
                Self::bucket(without, w, x & !has);
                Self::bucket(boundary, w, (x ^ self.flipped(w, i)) & self.valid());
            },
            exec::add_counts,
        );
        let boundary = flat.split_off(2 * slots);
        let without = flat.split_off(slots);
        let mut with = flat;
        let trim = |mut v: Vec<u64>| {
            v.truncate(self.dim + 1);
            v
        };
        with = trim(with);
        CoordinateCounts { with, without: trim(without), boundary: trim(boundary) }
    }

    /// Adding any coordinate to a member yields a member.
    pub(crate) fn is_up_closed(&self) -> bool {
        (0..self.dim).all(|i| {
            if i < 6 {
                let s = 1u32 << i;
                let m = IN_WORD_CLEAR[i];
                self.words.iter().all(|&x| ((x & m) << s) & !x == 0)
            } else {
                let bit = 1usize << (i - 6);
                (0..self.words.len()).filter(|w| w & bit == 0).all(|w| self.words[w] & !self.words[w | bit] == 0)
            }
        })
    }

    /// Word `w` of the complemented cube: bit `b` says whether `[j] \ p` is a member.
    #[inline]
    fn complement_word(words: &[u64], dim: usize, w: usize) -> u64 {
        if dim >= 6 {
            words[w ^ (words.len() - 1)].reverse_bits()
        } else {
            words[0].reverse_bits() >> (64 - (1u32 << dim))
        }
    }

    /// No two members are disjoint, via a subset-closure sweep in `O(j 2^j)`.
    ///
    /// `down[x]` marks points having some member below them; the family is
    /// intersecting iff no member's complement is marked.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn is_intersecting(&self) -> bool {
        let mut down = self.words.clone();
        for i in 0..self.dim {
            if i < 6 {
                let s = 1u32 << i;
                let m = IN_WORD_CLEAR[i];
                for x in down.iter_mut() {
                    *x |= (*x & m) << s;
                }
            } else {
                let bit = 1usize << (i - 6);
                for w in 0..down.len() {
                    if w & bit != 0 {
                        down[w] |= down[w ^ bit];
                    }
                }
            }
        }
        (0..self.words.len()).all(|w| self.words[w] & Self::complement_word(&down, self.dim, w) == 0)
    }

    /// Exactly one of every complementary pair of points is a member.
    pub(crate) fn is_complement_exclusive(&self) -> bool {
        let v = self.valid();
        (0..self.words.len()).all(|w| (self.words[w] ^ Self::complement_word(&self.words, self.dim, w)) & v == v)
    }
}
