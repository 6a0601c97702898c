//! Exhaustive reference implementations for checking the LCG engine.
//!
//! Nothing here is meant for dataset-scale use: the generalization relation is
//! decided by bipartite matching and the LCG by enumerating every candidate.

use std::collections::BTreeSet;

use crate::error::OracleError;
use crate::lcg::{GeneralizedTransaction, ItemBag};
use crate::taxonomy::{ItemId, TaxonomyTree};

/// Upper bound on candidates any enumeration may visit.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// True iff every item of `g` can be assigned a distinct item of `t` that it
/// is an ancestor of (a matching saturating `g`).
pub fn generalizes(taxonomy: &TaxonomyTree, g: &[ItemId], t: &[ItemId]) -> bool {
    if g.len() > t.len() {
        return false;
    }
    let mut owner: Vec<Option<usize>> = vec![None; t.len()];
    for gi in 0..g.len() {
        let mut seen = vec![false; t.len()];
        if !augment(taxonomy, g, t, gi, &mut seen, &mut owner) {
            return false;
        }
    }
    true
}

fn augment(
    taxonomy: &TaxonomyTree,
    g: &[ItemId],
    t: &[ItemId],
    gi: usize,
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for tj in 0..t.len() {
        if seen[tj] || !taxonomy.is_ancestor(g[gi], t[tj]) {
            continue;
        }
        seen[tj] = true;
        let free = match owner[tj] {
            None => true,
            Some(other) => augment(taxonomy, g, t, other, seen, owner),
        };
        if free {
            owner[tj] = Some(gi);
            return true;
        }
    }
    false
}

pub fn is_common_generalization<B: ItemBag>(
    taxonomy: &TaxonomyTree,
    g: &[ItemId],
    set: &[B],
) -> bool {
    set.iter().all(|t| generalizes(taxonomy, g, t.items()))
}

/// `a` is at least as special as `b`: `b` generalizes `a` read as a transaction.
pub fn is_specialization_of(taxonomy: &TaxonomyTree, a: &[ItemId], b: &[ItemId]) -> bool {
    generalizes(taxonomy, b, a)
}

fn ancestor_lists(taxonomy: &TaxonomyTree, x: &[ItemId]) -> Vec<Vec<ItemId>> {
    x.iter().map(|&i| taxonomy.ancestors(i).collect()).collect()
}

fn check_guard(sizes: impl Iterator<Item = usize>) -> Result<(), OracleError> {
    let mut product: u128 = 1;
    for s in sizes {
        product = product.saturating_mul(s as u128);
        if product > ENUMERATION_GUARD {
            return Err(OracleError::GuardExceeded(product));
        }
    }
    Ok(())
}

/// Every generalized transaction of `x`, the empty one included.
///
/// Each item of `x` is either suppressed or replaced by one of its ancestors;
/// the results are deduplicated as multisets.
pub fn enumerate_generalizations(
    taxonomy: &TaxonomyTree,
    x: &[ItemId],
) -> Result<BTreeSet<GeneralizedTransaction>, OracleError> {
    let lists = ancestor_lists(taxonomy, x);
    check_guard(lists.iter().map(|l| l.len() + 1))?;
    let mut out = BTreeSet::new();
    let mut current = Vec::with_capacity(x.len());
    expand(&lists, 0, true, &mut current, &mut out);
    Ok(out)
}

/// Full-length candidates only: each item replaced by an ancestor, none dropped.
fn full_length_generalizations(
    taxonomy: &TaxonomyTree,
    x: &[ItemId],
) -> Result<BTreeSet<GeneralizedTransaction>, OracleError> {
    let lists = ancestor_lists(taxonomy, x);
    check_guard(lists.iter().map(Vec::len))?;
    let mut out = BTreeSet::new();
    let mut current = Vec::with_capacity(x.len());
    expand(&lists, 0, false, &mut current, &mut out);
    Ok(out)
}

fn expand(
    lists: &[Vec<ItemId>],
    pos: usize,
    allow_drop: bool,
    current: &mut Vec<ItemId>,
    out: &mut BTreeSet<GeneralizedTransaction>,
) {
    if pos == lists.len() {
        out.insert(GeneralizedTransaction::new(current.clone()));
        return;
    }
    if allow_drop {
        expand(lists, pos + 1, allow_drop, current, out);
    }
    for &a in &lists[pos] {
        current.push(a);
        expand(lists, pos + 1, allow_drop, current, out);
        current.pop();
    }
}

/// The least common generalization by exhaustive search.
///
/// Candidates are the common generalizations whose length equals the shortest
/// member (every such candidate is a full-length generalization of that member).
/// Returns the single candidate with no strictly more special rival, and fails
/// if there is not exactly one.
pub fn brute_force_lcg<B: ItemBag>(
    taxonomy: &TaxonomyTree,
    set: &[B],
) -> Result<GeneralizedTransaction, OracleError> {
    let shortest = set
        .iter()
        .min_by_key(|b| b.bag_len())
        .ok_or(OracleError::EmptySet)?;
    let candidates: Vec<GeneralizedTransaction> = full_length_generalizations(taxonomy, shortest.items())?
        .into_iter()
        .filter(|g| is_common_generalization(taxonomy, g.items(), set))
        .collect();

    let minimal: Vec<&GeneralizedTransaction> = candidates
        .iter()
        .filter(|g| {
            !candidates
                .iter()
                .any(|h| h != *g && is_specialization_of(taxonomy, h.items(), g.items()))
        })
        .collect();
    match minimal.as_slice() {
        [only] => Ok((*only).clone()),
        _ => Err(OracleError::NotUnique(minimal.len())),
    }
}
