//! Least Common Generalization of a set of transactions, computed bottom-up
//! over the taxonomy, and the group distortion (GGD) it incurs.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::iter::{repeat_n, Sum};
use std::ops::Add;

use num_rational::Ratio;

use crate::error::LcgError;
use crate::taxonomy::{ItemId, TaxonomyTree};
use crate::translog::Transaction;

/// Anything that can be read as a bag of taxonomy items.
pub trait ItemBag {
    fn items(&self) -> &[ItemId];

    fn bag_len(&self) -> usize {
        self.items().len()
    }
}

impl ItemBag for Transaction {
    fn items(&self) -> &[ItemId] {
        &self.items
    }
}

impl ItemBag for GeneralizedTransaction {
    fn items(&self) -> &[ItemId] {
        &self.0
    }
}

impl ItemBag for Vec<ItemId> {
    fn items(&self) -> &[ItemId] {
        self
    }
}

impl ItemBag for [ItemId] {
    fn items(&self) -> &[ItemId] {
        self
    }
}

impl<B: ItemBag + ?Sized> ItemBag for &B {
    fn items(&self) -> &[ItemId] {
        (**self).items()
    }
}

/// A multiset of taxonomy nodes kept in ascending node order, so equal
/// multisets compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneralizedTransaction(Vec<ItemId>);

impl GeneralizedTransaction {
    pub fn new(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        GeneralizedTransaction(items)
    }

    /// Resolves labels through `taxonomy`; `None` if any label is unknown.
    pub fn from_labels(taxonomy: &TaxonomyTree, labels: &[&str]) -> Option<Self> {
        labels
            .iter()
            .map(|l| taxonomy.lookup(l))
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }

    /// Drops repeated nodes, keeping one copy of each.
    pub fn dedup(&self) -> Self {
        let mut items = self.0.clone();
        items.dedup();
        GeneralizedTransaction(items)
    }

    /// Σ LM over the items, in units of `1 / taxonomy.lm_scale()`.
    pub fn lm_units(&self, taxonomy: &TaxonomyTree) -> u64 {
        self.0.iter().map(|&i| taxonomy.lm_units(i)).sum()
    }

    /// Labels with the most specific items first, ties in preorder.
    pub fn labels<'t>(&self, taxonomy: &'t TaxonomyTree) -> Vec<&'t str> {
        let mut items = self.0.clone();
        items.sort_by_key(|&i| (std::cmp::Reverse(taxonomy.level(i)), i));
        items.into_iter().map(|i| taxonomy.label(i)).collect()
    }

    /// Space-separated [`labels`](Self::labels).
    pub fn render(&self, taxonomy: &TaxonomyTree) -> String {
        self.labels(taxonomy).join(" ")
    }
}

/// Generalization plus suppression cost of releasing a group under one
/// generalized transaction. Kept as integers over the taxonomy's LM scale so
/// comparisons are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distortion {
    generalization_units: u128,
    suppressed: u64,
    scale: u64,
}

impl Distortion {
    pub fn new(generalization_units: u128, suppressed: u64, scale: u64) -> Self {
        assert!(scale > 0, "distortion scale must be positive");
        Distortion {
            generalization_units,
            suppressed,
            scale,
        }
    }

    pub fn zero(scale: u64) -> Self {
        Self::new(0, 0, scale)
    }

    /// GGD from aggregates: `group_size` members holding `member_items`
    /// item occurrences in total, released as a transaction of `generalized_len`
    /// items whose LM sum is `lm_units`.
    pub fn from_parts(
        group_size: usize,
        member_items: usize,
        generalized_len: usize,
        lm_units: u64,
        scale: u64,
    ) -> Self {
        let represented = group_size * generalized_len;
        debug_assert!(member_items >= represented);
        Self::new(
            group_size as u128 * u128::from(lm_units),
            member_items.saturating_sub(represented) as u64,
            scale,
        )
    }

    /// |S| × Σ LM.
    pub fn generalization_part(&self) -> Ratio<u128> {
        Ratio::new(self.generalization_units, u128::from(self.scale))
    }

    /// N_s, suppressed item occurrences.
    pub fn suppression_part(&self) -> u64 {
        self.suppressed
    }

    pub fn total(&self) -> Ratio<u128> {
        Ratio::new(self.total_units(), u128::from(self.scale))
    }

    /// Total scaled by the LM denominator.
    pub fn total_units(&self) -> u128 {
        self.generalization_units + u128::from(self.suppressed) * u128::from(self.scale)
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn to_f64(&self) -> f64 {
        self.total_units() as f64 / self.scale as f64
    }

    /// Exact comparison of totals, valid across different scales.
    pub fn cmp_total(&self, other: &Distortion) -> Ordering {
        (self.total_units() * u128::from(other.scale))
            .cmp(&(other.total_units() * u128::from(self.scale)))
    }

    fn is_zero(&self) -> bool {
        self.generalization_units == 0 && self.suppressed == 0
    }
}

impl Add for Distortion {
    type Output = Distortion;

    fn add(self, rhs: Distortion) -> Distortion {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        assert_eq!(self.scale, rhs.scale, "adding distortions over different taxonomies");
        Distortion::new(
            self.generalization_units + rhs.generalization_units,
            self.suppressed + rhs.suppressed,
            self.scale,
        )
    }
}

impl Sum for Distortion {
    fn sum<I: Iterator<Item = Distortion>>(iter: I) -> Distortion {
        iter.fold(Distortion::zero(1), Add::add)
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.total())
    }
}

/// Shortest transaction length in `set`.
pub fn min_tran_size<B: ItemBag>(set: &[B]) -> Option<usize> {
    set.iter().map(ItemBag::bag_len).min()
}

/// LCG(S) by bottom-up item generalization.
///
/// Each touched node carries a count vector `R[j]`: how many still
/// unrepresented items of transaction `j` lie beneath it. Nodes are visited
/// children-first (descending preorder id). A node whose minimum count is
/// positive emits that many copies of itself; whatever its vector holds beyond
/// the minimum flows on to the parent. The root is padded so the result has
/// the length of the shortest transaction.
pub fn buig_lcg<B: ItemBag>(
    taxonomy: &TaxonomyTree,
    set: &[B],
) -> Result<GeneralizedTransaction, LcgError> {
    let bags: Vec<&[ItemId]> = set.iter().map(ItemBag::items).collect();
    buig(taxonomy, &bags)
}

/// LCG(S ∪ {t}) from LCG(S) alone: the LCG of the two-element set
/// `{current, new}` equals that of the whole group.
pub fn incremental_lcg(
    taxonomy: &TaxonomyTree,
    current: &GeneralizedTransaction,
    new: &(impl ItemBag + ?Sized),
) -> Result<GeneralizedTransaction, LcgError> {
    buig(taxonomy, &[current.items(), new.items()])
}

fn buig(taxonomy: &TaxonomyTree, bags: &[&[ItemId]]) -> Result<GeneralizedTransaction, LcgError> {
    let m = bags.len();
    let min_len = bags.iter().map(|b| b.len()).min().ok_or(LcgError::EmptySet)?;

    let mut counts: BTreeMap<ItemId, Vec<u32>> = BTreeMap::new();
    for (j, bag) in bags.iter().enumerate() {
        for &item in *bag {
            if !taxonomy.contains(item) {
                return Err(LcgError::UnknownItem(item));
            }
            counts.entry(item).or_insert_with(|| vec![0; m])[j] += 1;
        }
    }

    let mut out = Vec::with_capacity(min_len);
    while let Some((node, mut r)) = counts.pop_last() {
        let Some(parent) = taxonomy.parent(node) else {
            break;
        };
        let min = r.iter().copied().min().unwrap_or(0);
        if min > 0 {
            out.extend(repeat_n(node, min as usize));
            r.iter_mut().for_each(|c| *c -= min);
        }
        if r.iter().any(|&c| c > 0) {
            let slot = counts.entry(parent).or_insert_with(|| vec![0; m]);
            slot.iter_mut().zip(&r).for_each(|(s, c)| *s += c);
        }
    }
    debug_assert!(out.len() <= min_len);
    out.extend(repeat_n(taxonomy.root(), min_len.saturating_sub(out.len())));
    out.reverse();
    Ok(GeneralizedTransaction(out))
}

/// GGD(S, g) = |S| × Σ_{i∈g} LM(i) + N_s, with N_s = Σ_j (|t_j| − |g|).
///
/// Assumes `g` generalizes every member; see [`ggd_checked`].
pub fn ggd<B: ItemBag>(
    taxonomy: &TaxonomyTree,
    set: &[B],
    generalized: &GeneralizedTransaction,
) -> Distortion {
    let member_items = set.iter().map(ItemBag::bag_len).sum();
    Distortion::from_parts(
        set.len(),
        member_items,
        generalized.len(),
        generalized.lm_units(taxonomy),
        taxonomy.lm_scale(),
    )
}

/// [`ggd`] after confirming `g` is a common generalization of `set`.
pub fn ggd_checked<B: ItemBag>(
    taxonomy: &TaxonomyTree,
    set: &[B],
    generalized: &GeneralizedTransaction,
) -> Result<Distortion, LcgError> {
    let bags: Vec<&[ItemId]> = set.iter().map(ItemBag::items).collect();
    if !crate::oracle::is_common_generalization(taxonomy, generalized.items(), &bags) {
        return Err(LcgError::NotCommonGeneralization);
    }
    Ok(ggd(taxonomy, set, generalized))
}
