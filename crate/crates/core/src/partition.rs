//! Top-down Partition baseline.
//!
//! Starts with every transaction generalized to the root and drills down one
//! representation item at a time: members are grouped by the set of the
//! item's children they have items under, groups of at least k become new
//! partitions, and the rest are merged back with the item frozen. Items are
//! treated as sets, so duplicates carry no weight.

use std::collections::BTreeMap;

use crate::error::AnonymizeError;
use crate::lcg::{Distortion, GeneralizedTransaction};
use crate::par::{map_slice, Parallelism};
use crate::release::{AnonymizedDb, Group};
use crate::taxonomy::{ItemId, TaxonomyTree};
use crate::translog::TransactionDb;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct RepItem {
    item: ItemId,
    expandable: bool,
}

/// A partition: the common generalized items of its members, and which of
/// them may still be specialized.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PartitionNode {
    representation: Vec<RepItem>,
    members: Vec<usize>,
}

struct Ctx<'a> {
    taxonomy: &'a TaxonomyTree,
    /// Distinct items of each transaction, ascending.
    sets: Vec<Vec<ItemId>>,
    k: usize,
    par: Parallelism,
}

impl Ctx<'_> {
    fn rep_item(&self, item: ItemId) -> RepItem {
        RepItem {
            item,
            expandable: !self.taxonomy.is_leaf(item),
        }
    }

    /// Most general expandable item, ties broken by preorder.
    fn next_expansion(&self, node: &PartitionNode) -> Option<usize> {
        node.representation
            .iter()
            .enumerate()
            .filter(|(_, r)| r.expandable)
            .min_by_key(|(_, r)| (self.taxonomy.level(r.item), r.item))
            .map(|(pos, _)| pos)
    }

    /// Children of `x` that have at least one of the member's items beneath them.
    fn child_key(&self, member: usize, x: ItemId) -> Vec<ItemId> {
        let children = self.taxonomy.children(x);
        let end = self.taxonomy.subtree_end(x);
        let set = &self.sets[member];
        let lo = set.partition_point(|&i| i <= x);
        let mut key: Vec<ItemId> = Vec::new();
        for &item in set[lo..].iter().take_while(|&&i| i < end) {
            let c = children[children.partition_point(|&c| c <= item) - 1];
            if key.last() != Some(&c) {
                key.push(c);
            }
        }
        key
    }

    fn refine(&self, start: &PartitionNode) -> Vec<PartitionNode> {
        let mut node = start.clone();
        let mut finished = Vec::new();
        while let Some(pos) = self.next_expansion(&node) {
            let x = node.representation[pos].item;
            let mut merged = Vec::new();
            let mut split: BTreeMap<Vec<ItemId>, Vec<usize>> = BTreeMap::new();
            for &m in &node.members {
                let key = self.child_key(m, x);
                if key.is_empty() {
                    merged.push(m);
                } else {
                    split.entry(key).or_default().push(m);
                }
            }
            let mut survivors: Vec<(Vec<ItemId>, Vec<usize>)> = Vec::new();
            for (key, members) in split {
                if members.len() >= self.k {
                    survivors.push((key, members));
                } else {
                    merged.extend(members);
                }
            }
            // an under-k remainder would break k-anonymity; fold the smallest
            // survivors back until it is large enough
            while !merged.is_empty() && merged.len() < self.k && !survivors.is_empty() {
                let smallest = (0..survivors.len())
                    .min_by_key(|&i| (survivors[i].1.len(), &survivors[i].0))
                    .unwrap();
                merged.extend(survivors.remove(smallest).1);
            }

            node.representation[pos].expandable = false;
            if survivors.is_empty() {
                continue;
            }
            let children: Vec<PartitionNode> = survivors
                .into_iter()
                .map(|(key, members)| {
                    let mut representation: Vec<RepItem> = node
                        .representation
                        .iter()
                        .filter(|r| r.item != x)
                        .copied()
                        .collect();
                    representation.extend(key.into_iter().map(|c| self.rep_item(c)));
                    representation.sort_by_key(|r| r.item);
                    PartitionNode {
                        representation,
                        members,
                    }
                })
                .collect();
            finished.extend(map_slice(self.par, &children, |c| self.refine(c)).into_iter().flatten());
            if merged.is_empty() {
                return finished;
            }
            merged.sort_unstable();
            node.members = merged;
        }
        finished.push(node);
        finished
    }
}

/// Anonymizes `db` with the top-down Partition baseline.
pub fn partition_anonymize(
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    k: usize,
    par: Parallelism,
) -> Result<AnonymizedDb, AnonymizeError> {
    if k < 2 {
        return Err(AnonymizeError::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    if db.len() < k {
        return Err(AnonymizeError::KExceedsDatabase { k, size: db.len() });
    }
    let sets = db
        .iter()
        .map(|t| {
            let mut s = t.items.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let ctx = Ctx {
        taxonomy,
        sets,
        k,
        par,
    };
    let root = PartitionNode {
        representation: vec![ctx.rep_item(taxonomy.root())],
        members: (0..db.len()).collect(),
    };
    let groups = ctx
        .refine(&root)
        .into_iter()
        .map(|p| Group {
            generalized: GeneralizedTransaction::new(p.representation.iter().map(|r| r.item).collect()),
            members: p.members,
        })
        .collect();
    Ok(AnonymizedDb::new(groups))
}

/// Σ GGD over the partitions, charging each member's unrepresented items
/// (its bag length minus the representation size) as suppressions.
pub fn partition_distortion(
    result: &AnonymizedDb,
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
) -> Distortion {
    crate::metrics::release_distortion(result, db, taxonomy, Parallelism::Sequential)
}
