//! Exhaustive maximum-diversity search over intersecting k-uniform families.
//!
//! Vertices are the k-subsets of `[n]` in lex order (at most 128 of them, one
//! `u128` per vertex set); two vertices are adjacent iff the sets meet. An
//! intersecting family is a clique. Diversity is `min_e #{F : e ∉ F}`, which
//! never drops when a set is added, so maximal cliques suffice.

use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::bitfam::{stats, Family, SubsetMask};
use crate::bounds::binom_u128;
use crate::constructions::{build_a_u, build_d_r};
use crate::error::{Error, Result};
use crate::exec;
use crate::shiftlex::LexOrder;

/// Largest vertex count (`C(n, k)`) the search handles.
pub const MAX_VERTICES: usize = 128;

/// How often (in nodes) the stop callback is polled.
const POLL_EVERY: u64 = 1 << 10;

struct Graph {
    n: usize,
    k: usize,
    sets: Vec<SubsetMask>,
    adj: Vec<u128>,
    /// `avoid[e - 1]`: vertices whose set does not contain `e`.
    avoid: Vec<u128>,
}

impl Graph {
    fn new(n: usize, k: usize) -> Result<Graph> {
        if k < 1 || n < k || n > crate::bitfam::MAX_GROUND {
            return Err(Error::Parameter("search needs 1 <= k <= n"));
        }
        let count = binom_u128(n as u64, k as u64);
        if count > MAX_VERTICES as u128 {
            return Err(Error::Cap { what: "C(n, k) for extremal search", value: count, cap: MAX_VERTICES as u128 });
        }
        let sets: Vec<SubsetMask> = LexOrder::new(n, k).collect();
        let adj = sets
            .iter()
            .enumerate()
            .map(|(i, a)| {
                sets.iter()
                    .enumerate()
                    .filter(|&(j, b)| j != i && a.intersects(*b))
                    .fold(0u128, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        let avoid = (1..=n)
            .map(|e| sets.iter().enumerate().filter(|(_, s)| !s.contains(e)).fold(0u128, |acc, (j, _)| acc | 1 << j))
            .collect();
        Ok(Graph { n, k, sets, adj, avoid })
    }

    fn family(&self, clique: u128) -> Family {
        let members = bits_of(clique).map(|v| self.sets[v]).collect();
        Family::canonical(self.n, Some(self.k), members)
    }

    #[inline]
    fn diversity(&self, clique: u128) -> usize {
        self.avoid.iter().map(|&a| (clique & a).count_ones() as usize).min().unwrap_or(0)
    }

    #[inline]
    fn upper_bound(&self, clique: u128, cand: u128) -> usize {
        self.avoid.iter().map(|&a| ((clique & a).count_ones() + (cand & a).count_ones()) as usize).min().unwrap_or(0)
    }

    fn clique_of(&self, fam: &Family) -> u128 {
        fam.members().iter().filter_map(|m| self.sets.iter().position(|s| s == m)).fold(0u128, |acc, v| acc | 1 << v)
    }
}

fn bits_of(mut x: u128) -> impl Iterator<Item = usize> {
    core::iter::from_fn(move || {
        if x == 0 {
            None
        } else {
            let v = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(v)
        }
    })
}

/// Maximal intersecting families, possibly truncated at the cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalFamilies {
    pub n: usize,
    pub k: usize,
    /// Canonical order: by sorted member list.
    pub families: Vec<Family>,
    /// False when the cap stopped the enumeration early.
    pub complete: bool,
}

impl MaximalFamilies {
    pub fn max_diversity(&self) -> Option<usize> {
        self.families.iter().map(|f| stats(f).diversity).max()
    }
}

/// All maximal intersecting families in `C([n], k)`: Bron–Kerbosch with
/// pivoting on the candidate with the most neighbours among candidates.
pub fn enumerate_maximal_intersecting(n: usize, k: usize, cap: usize) -> Result<MaximalFamilies> {
    let g = Graph::new(n, k)?;
    let all = if g.sets.len() == 128 { u128::MAX } else { (1u128 << g.sets.len()) - 1 };
    let mut out: Vec<u128> = Vec::new();
    let complete = bron_kerbosch(&g, 0, all, 0, cap, &mut out);
    let mut families: Vec<Family> = out.into_iter().map(|c| g.family(c)).collect();
    families.sort_by(|a, b| a.members().cmp(b.members()));
    Ok(MaximalFamilies { n, k, families, complete })
}

fn bron_kerbosch(g: &Graph, r: u128, mut p: u128, mut x: u128, cap: usize, out: &mut Vec<u128>) -> bool {
    if p == 0 {
        if x == 0 {
            if out.len() >= cap {
                return false;
            }
            out.push(r);
        }
        return true;
    }
    let pivot = bits_of(p | x).max_by_key(|&u| ((p & g.adj[u]).count_ones(), core::cmp::Reverse(u))).unwrap_or(0);
    for v in bits_of(p & !g.adj[pivot]) {
        let bit = 1u128 << v;
        if !bron_kerbosch(g, r | bit, p & g.adj[v], x & g.adj[v], cap, out) {
            return false;
        }
        p &= !bit;
        x |= bit;
    }
    true
}

/// Outcome of the branch-and-bound search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub n: usize,
    pub k: usize,
    pub best_diversity: usize,
    pub witness: Family,
    /// Name of the construction that seeded the incumbent.
    pub seed_family: String,
    pub seed_diversity: usize,
    /// Whether the search found something strictly better than the seed.
    pub improved: bool,
    /// Nodes expanded; may vary between runs when run in parallel.
    pub node_count: u64,
    /// True iff the search space was exhausted (the best value is optimal).
    pub complete: bool,
    pub budget_seconds: Option<f64>,
    /// `r` whose range `(k-1)(2 + 1/(r+1)) + 1 <= n <= (k-1)(2 + 1/r) + 1` holds, if any.
    pub conjecture_r: Option<usize>,
    /// Diversity of `D_max(r,1)` at that `r`, when it can be built.
    pub conjecture_value: Option<usize>,
}

/// Knobs for [`max_diversity_search`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub budget_seconds: Option<f64>,
    /// Fix `{1, .., k}` as a member: any nonempty family is isomorphic to one containing it.
    pub symmetry_break: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget_seconds: None, symmetry_break: true }
    }
}

/// Smallest `r >= 0` whose conjectured range contains `n`.
pub fn conjecture_range(n: usize, k: usize) -> Option<usize> {
    if k == 0 || n < 2 * k {
        return None;
    }
    let (n1, k1) = (n as u128 - 1, k as u128 - 1);
    (0..=k)
        .map(|r| r as u128)
        .find(|&r| {
            let low = n1 * (r + 1) >= k1 * (2 * r + 3);
            let high = r == 0 || n1 * r <= k1 * (2 * r + 1);
            low && high
        })
        .map(|r| r as usize)
}

/// Seed candidates: `A_2` and every buildable `D_r`, in that order.
fn incumbents(n: usize, k: usize) -> Vec<(String, Family)> {
    let mut out = Vec::new();
    if k >= 2 && n >= 2 * k {
        if let Ok(f) = build_a_u(n, k, 2) {
            out.push((String::from("A_2"), f));
        }
    }
    for r in 1..k {
        if let Ok(f) = build_d_r(n, k, r) {
            out.push((alloc::format!("D_{r}"), f));
        }
    }
    out
}

struct Shared<'a> {
    g: &'a Graph,
    best: AtomicUsize,
    nodes: AtomicU64,
    stopped: AtomicBool,
    stop: &'a (dyn Fn() -> bool + Sync),
}

impl Shared<'_> {
    /// Returns the best clique found in this subtree that beat the incumbent.
    fn search(&self, clique: u128, mut cand: u128) -> Option<(usize, u128)> {
        let seen = self.nodes.fetch_add(1, AtomicOrdering::Relaxed);
        if self.stopped.load(AtomicOrdering::Relaxed) {
            return None;
        }
        if seen.is_multiple_of(POLL_EVERY) && (self.stop)() {
            self.stopped.store(true, AtomicOrdering::Relaxed);
            return None;
        }
        let g = self.g;
        let mut found = None;
        let here = g.diversity(clique);
        if here > self.best.load(AtomicOrdering::Relaxed) {
            self.best.fetch_max(here, AtomicOrdering::Relaxed);
            found = Some((here, clique));
        }
        let best = self.best.load(AtomicOrdering::Relaxed);
        if g.upper_bound(clique, cand) <= best {
            return found;
        }
        // an improving extension needs more sets avoiding every e with a deficit;
        // branch on the deficient element with the fewest candidates
        let pivot = (0..g.n)
            .filter(|&e| ((clique & g.avoid[e]).count_ones() as usize) <= best)
            .min_by_key(|&e| (cand & g.avoid[e]).count_ones())?;
        for v in bits_of(cand & g.avoid[pivot]) {
            let bit = 1u128 << v;
            if let Some(sub) = self.search(clique | bit, cand & g.adj[v]) {
                if found.is_none_or(|(d, _)| sub.0 > d) {
                    found = Some(sub);
                }
            }
            cand &= !bit;
            if g.upper_bound(clique, cand) <= self.best.load(AtomicOrdering::Relaxed) {
                break;
            }
        }
        found
    }

    /// Root branches as independent `(clique, candidates)` subproblems.
    fn root_branches(&self, clique: u128, mut cand: u128) -> Vec<(u128, u128)> {
        let g = self.g;
        let best = self.best.load(AtomicOrdering::Relaxed);
        let Some(pivot) = (0..g.n)
            .filter(|&e| ((clique & g.avoid[e]).count_ones() as usize) <= best)
            .min_by_key(|&e| (cand & g.avoid[e]).count_ones())
        else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for v in bits_of(cand & g.avoid[pivot]) {
            let bit = 1u128 << v;
            out.push((clique | bit, cand & g.adj[v]));
            cand &= !bit;
            if g.upper_bound(clique, cand) <= best {
                break;
            }
        }
        out
    }
}

/// First clique in depth-first lex order with diversity at least `target`.
fn find_witness(g: &Graph, clique: u128, mut cand: u128, target: usize) -> Option<u128> {
    if g.diversity(clique) >= target {
        return Some(clique);
    }
    if g.upper_bound(clique, cand) < target {
        return None;
    }
    let pivot = (0..g.n)
        .filter(|&e| ((clique & g.avoid[e]).count_ones() as usize) < target)
        .min_by_key(|&e| (cand & g.avoid[e]).count_ones())?;
    for v in bits_of(cand & g.avoid[pivot]) {
        let bit = 1u128 << v;
        if let Some(w) = find_witness(g, clique | bit, cand & g.adj[v], target) {
            return Some(w);
        }
        cand &= !bit;
        if g.upper_bound(clique, cand) < target {
            break;
        }
    }
    None
}

/// Branch-and-bound for the largest diversity of an intersecting family in
/// `C([n], k)`, seeded with the best of `A_2` and the `D_r`.
///
/// `stop` is polled periodically; once it returns true the search unwinds
/// and reports `complete = false`.
pub fn max_diversity_search(
    n: usize,
    k: usize,
    options: SearchOptions,
    stop: &(dyn Fn() -> bool + Sync),
) -> Result<SearchResult> {
    if k < 2 || n < 2 * k {
        return Err(Error::Parameter("search needs k >= 2 and n >= 2k"));
    }
    let g = Graph::new(n, k)?;
    let all = if g.sets.len() == 128 { u128::MAX } else { (1u128 << g.sets.len()) - 1 };

    let mut seed_family = String::from("empty");
    let mut seed_witness = Family::empty(n, Some(k))?;
    let mut seed_diversity = 0;
    for (name, fam) in incumbents(n, k) {
        let d = stats(&fam).diversity;
        if d > seed_diversity || seed_witness.is_empty() {
            seed_diversity = d;
            seed_family = name;
            seed_witness = fam;
        }
    }

    let shared = Shared {
        g: &g,
        best: AtomicUsize::new(seed_diversity),
        nodes: AtomicU64::new(0),
        stopped: AtomicBool::new(false),
        stop,
    };
    let (root_clique, root_cand) = if options.symmetry_break { (1u128, g.adj[0]) } else { (0, all) };
    let mut found = None;
    if g.diversity(root_clique) > seed_diversity {
        shared.best.fetch_max(g.diversity(root_clique), AtomicOrdering::Relaxed);
        found = Some((g.diversity(root_clique), root_clique));
    }
    let branches = shared.root_branches(root_clique, root_cand);
    let results = exec::map_collect(branches.len(), |i| shared.search(branches[i].0, branches[i].1));
    for r in results.into_iter().flatten() {
        if found.is_none_or(|(d, _)| r.0 > d) {
            found = Some(r);
        }
    }
    let complete = !shared.stopped.load(AtomicOrdering::Relaxed);
    let best = shared.best.load(AtomicOrdering::Relaxed);

    let (best_diversity, witness, improved) = match found {
        Some((d, clique)) if d > seed_diversity => {
            // re-derive the witness sequentially so it does not depend on scheduling
            let canonical = if complete { find_witness(&g, root_clique, root_cand, d) } else { None };
            (d, g.family(canonical.unwrap_or(clique)), true)
        }
        _ => (seed_diversity, seed_witness, false),
    };
    debug_assert!(best_diversity == best || !complete);
    debug_assert_eq!(g.diversity(g.clique_of(&witness)), best_diversity);

    let conjecture_r = conjecture_range(n, k);
    let conjecture_value = conjecture_r.and_then(|r| build_d_r(n, k, r.max(1)).ok()).map(|f| stats(&f).diversity);
    Ok(SearchResult {
        n,
        k,
        best_diversity,
        witness,
        seed_family,
        seed_diversity,
        improved,
        node_count: shared.nodes.load(AtomicOrdering::Relaxed),
        complete,
        budget_seconds: options.budget_seconds,
        conjecture_r,
        conjecture_value,
    })
}
