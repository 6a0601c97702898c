//! Item taxonomy: a rooted tree over the item universe.
//!
//! Node handles are preorder positions, so the root is always `ItemId(0)`,
//! every child has a larger id than its parent and the subtree of `v` is the
//! contiguous id range `v..subtree_end(v)`. The LCG sweep and the ancestor
//! test both lean on this layout.

mod synthetic;

pub use synthetic::{generate_synthetic, SyntheticTaxonomy};

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;

use crate::error::TaxonomyError;

/// Dense handle into a taxonomy's node table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(u32);

impl ItemId {
    pub const ROOT: ItemId = ItemId(0);

    pub fn new(index: usize) -> Self {
        ItemId(u32::try_from(index).expect("taxonomy node index exceeds u32"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Lowercases and trims a label the same way for taxonomy files and transactions.
pub fn normalize_label(raw: &str) -> String {
    raw.trim().to_lowercase()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxonomyTree {
    labels: Vec<String>,
    parents: Vec<Option<ItemId>>,
    children: Vec<Vec<ItemId>>,
    leaf_counts: Vec<u32>,
    levels: Vec<u32>,
    subtree_end: Vec<u32>,
    label_index: HashMap<String, ItemId>,
}

impl TaxonomyTree {
    /// Parses a `child<TAB>parent` edge list. Blank lines and `#` comments are skipped.
    pub fn load(text: &str) -> Result<Self, TaxonomyError> {
        let mut labels: Vec<String> = Vec::new();
        let mut ids: HashMap<String, usize> = HashMap::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();

        let mut intern = |label: String,
                          labels: &mut Vec<String>,
                          parent: &mut Vec<Option<usize>>,
                          children: &mut Vec<Vec<usize>>| {
            *ids.entry(label.clone()).or_insert_with(|| {
                labels.push(label);
                parent.push(None);
                children.push(Vec::new());
                labels.len() - 1
            })
        };

        let mut edges = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(child), Some(par), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(TaxonomyError::MalformedLine {
                    line: lineno,
                    content: line.to_string(),
                });
            };
            let (child, par) = (normalize_label(child), normalize_label(par));
            if child.is_empty() || par.is_empty() {
                return Err(TaxonomyError::EmptyLabel { line: lineno });
            }
            if child == par {
                return Err(TaxonomyError::Cycle { label: child });
            }
            let c = intern(child, &mut labels, &mut parent, &mut children);
            let p = intern(par, &mut labels, &mut parent, &mut children);
            match parent[c] {
                Some(existing) if existing == p => continue,
                Some(existing) => {
                    return Err(TaxonomyError::ConflictingParent {
                        child: labels[c].clone(),
                        first: labels[existing].clone(),
                        second: labels[p].clone(),
                    })
                }
                None => {
                    parent[c] = Some(p);
                    children[p].push(c);
                    edges += 1;
                }
            }
        }
        if edges == 0 {
            return Err(TaxonomyError::Empty);
        }

        let roots: Vec<usize> = (0..labels.len()).filter(|&i| parent[i].is_none()).collect();
        match roots.len() {
            0 => {
                return Err(TaxonomyError::Cycle {
                    label: labels[0].clone(),
                })
            }
            1 => {}
            _ => {
                return Err(TaxonomyError::MultipleRoots(
                    roots.iter().map(|&r| labels[r].clone()).collect(),
                ))
            }
        }
        Self::from_links(labels, &children, roots[0])
    }

    /// Builds the tree from arbitrary node numbering, renumbering nodes into preorder.
    /// Nodes unreachable from `root` can only sit on a parent cycle.
    pub(crate) fn from_links(
        labels: Vec<String>,
        children: &[Vec<usize>],
        root: usize,
    ) -> Result<Self, TaxonomyError> {
        let n = labels.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seen[v] {
                return Err(TaxonomyError::Cycle {
                    label: labels[v].clone(),
                });
            }
            seen[v] = true;
            order.push(v);
            stack.extend(children[v].iter().rev().copied());
        }
        if order.len() != n {
            let stray = (0..n).find(|&v| !seen[v]).unwrap();
            return Err(TaxonomyError::Cycle {
                label: labels[stray].clone(),
            });
        }

        let mut new_id = vec![0usize; n];
        for (pos, &old) in order.iter().enumerate() {
            new_id[old] = pos;
        }
        let mut old_labels: Vec<Option<String>> = labels.into_iter().map(Some).collect();
        let mut tree_labels = Vec::with_capacity(n);
        let mut tree_children = vec![Vec::new(); n];
        let mut parents = vec![None; n];
        for (pos, &old) in order.iter().enumerate() {
            tree_labels.push(old_labels[old].take().unwrap());
            for &c in &children[old] {
                tree_children[pos].push(ItemId::new(new_id[c]));
                parents[new_id[c]] = Some(ItemId::new(pos));
            }
        }

        let mut levels = vec![1u32; n];
        for v in 1..n {
            levels[v] = levels[parents[v].unwrap().index()] + 1;
        }
        let mut leaf_counts = vec![0u32; n];
        let mut subtree_end: Vec<u32> = (1..=n as u32).collect();
        for v in (0..n).rev() {
            if tree_children[v].is_empty() {
                leaf_counts[v] = 1;
            }
            if let Some(p) = parents[v] {
                leaf_counts[p.index()] += leaf_counts[v];
                subtree_end[p.index()] = subtree_end[p.index()].max(subtree_end[v]);
            }
        }

        let mut label_index = HashMap::with_capacity(n);
        for (v, label) in tree_labels.iter().enumerate() {
            if label_index.insert(label.clone(), ItemId::new(v)).is_some() {
                return Err(TaxonomyError::DuplicateLabel(label.clone()));
            }
        }

        Ok(TaxonomyTree {
            labels: tree_labels,
            parents,
            children: tree_children,
            leaf_counts,
            levels,
            subtree_end,
            label_index,
        })
    }

    /// Emits the edge list in preorder; `load` of the result reproduces the tree.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in 1..self.len() {
            let p = self.parents[v].unwrap();
            out.push_str(&self.labels[v]);
            out.push('\t');
            out.push_str(&self.labels[p.index()]);
            out.push('\n');
        }
        out
    }

    pub fn root(&self) -> ItemId {
        ItemId::ROOT
    }

    /// Number of nodes, |T|.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, id: ItemId) -> bool {
        id.index() < self.len()
    }

    /// M, the number of leaves.
    pub fn total_leaves(&self) -> u32 {
        self.leaf_counts[0]
    }

    pub fn label(&self, id: ItemId) -> &str {
        &self.labels[id.index()]
    }

    /// Resolves a raw label (normalized first).
    pub fn lookup(&self, raw: &str) -> Option<ItemId> {
        let key = normalize_label(raw);
        self.label_index.get(&key).copied()
    }

    /// Resolves an already-normalized label.
    pub fn lookup_normalized(&self, label: &str) -> Option<ItemId> {
        self.label_index.get(label).copied()
    }

    pub fn parent(&self, id: ItemId) -> Option<ItemId> {
        self.parents[id.index()]
    }

    pub fn children(&self, id: ItemId) -> &[ItemId] {
        &self.children[id.index()]
    }

    pub fn is_leaf(&self, id: ItemId) -> bool {
        self.children[id.index()].is_empty()
    }

    /// M_p, leaves under `id`.
    pub fn leaf_count(&self, id: ItemId) -> u32 {
        self.leaf_counts[id.index()]
    }

    /// Depth with the root at level 1.
    pub fn level(&self, id: ItemId) -> u32 {
        self.levels[id.index()]
    }

    pub fn height(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// One past the last preorder id in the subtree of `id`.
    pub fn subtree_end(&self, id: ItemId) -> ItemId {
        ItemId(self.subtree_end[id.index()])
    }

    /// True iff `a` lies on the path from `b` to the root, `b` included.
    pub fn is_ancestor(&self, a: ItemId, b: ItemId) -> bool {
        a <= b && b.0 < self.subtree_end[a.index()]
    }

    /// `id`, its parent, and so on up to the root.
    pub fn ancestors(&self, id: ItemId) -> impl Iterator<Item = ItemId> + '_ {
        std::iter::successors(Some(id), move |&v| self.parent(v))
    }

    pub fn leaves(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.len())
            .map(ItemId::new)
            .filter(move |&v| self.is_leaf(v))
    }

    /// Denominator of every loss-metric value: M − 1, or 1 for a single-leaf tree.
    pub fn lm_scale(&self) -> u64 {
        u64::from(self.total_leaves().saturating_sub(1)).max(1)
    }

    /// Numerator of LM over `lm_scale()`.
    pub fn lm_units(&self, id: ItemId) -> u64 {
        if id == ItemId::ROOT {
            self.lm_scale()
        } else {
            u64::from(self.leaf_count(id) - 1)
        }
    }

    /// Loss metric (M_p − 1)/(M − 1); the root is pinned to 1.
    pub fn lm(&self, id: ItemId) -> Ratio<u64> {
        Ratio::new(self.lm_units(id), self.lm_scale())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::FOOD;
    use super::*;
    use proptest::prelude::*;

    fn food() -> TaxonomyTree {
        TaxonomyTree::load(FOOD).unwrap()
    }

    #[test]
    fn food_tree_shape() {
        let t = food();
        assert_eq!(t.len(), 12);
        assert_eq!(t.total_leaves(), 8);
        assert_eq!(t.label(t.root()), "food");
        assert_eq!(t.height(), 3);
        let fruit = t.lookup("Fruit ").unwrap();
        assert_eq!(t.leaf_count(fruit), 3);
        assert_eq!(t.level(fruit), 2);
        let labels: Vec<_> = t.children(fruit).iter().map(|&c| t.label(c)).collect();
        assert_eq!(labels, ["orange", "banana", "apple"]);
    }

    #[test]
    fn loss_metric_values() {
        let t = food();
        assert_eq!(t.lm(t.lookup("fruit").unwrap()), Ratio::new(2, 7));
        assert_eq!(t.lm(t.lookup("orange").unwrap()), Ratio::new(0, 1));
        assert_eq!(t.lm(t.lookup("food").unwrap()), Ratio::new(1, 1));
        assert_eq!(t.lm(t.lookup("meat").unwrap()), Ratio::new(1, 7));
    }

    #[test]
    fn ancestry() {
        let t = food();
        let id = |s| t.lookup(s).unwrap();
        assert!(t.is_ancestor(id("fruit"), id("orange")));
        assert!(t.is_ancestor(id("orange"), id("orange")));
        assert!(!t.is_ancestor(id("meat"), id("orange")));
        assert!(!t.is_ancestor(id("orange"), id("fruit")));
        assert!(t.is_ancestor(id("food"), id("butter")));
        let path: Vec<_> = t.ancestors(id("cheese")).map(|v| t.label(v)).collect();
        assert_eq!(path, ["cheese", "dairy", "food"]);
    }

    #[test]
    fn two_node_tree() {
        let t = TaxonomyTree::load("a\troot\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.total_leaves(), 1);
        assert_eq!(t.lm(t.root()), Ratio::new(1, 1));
        assert_eq!(t.lm(t.lookup("a").unwrap()), Ratio::new(0, 1));
    }

    #[test]
    fn rejects_cycles() {
        assert!(matches!(
            TaxonomyTree::load("a\tb\nb\ta\n"),
            Err(TaxonomyError::Cycle { .. })
        ));
        // a rooted component plus a detached loop
        assert!(matches!(
            TaxonomyTree::load("x\troot\na\tb\nb\ta\n"),
            Err(TaxonomyError::Cycle { .. })
        ));
        assert!(matches!(
            TaxonomyTree::load("a\ta\n"),
            Err(TaxonomyError::Cycle { .. })
        ));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(TaxonomyTree::load(""), Err(TaxonomyError::Empty)));
        assert!(matches!(
            TaxonomyTree::load("# only a comment\n\n"),
            Err(TaxonomyError::Empty)
        ));
        assert!(matches!(
            TaxonomyTree::load("a\tr1\nb\tr2\n"),
            Err(TaxonomyError::MultipleRoots(_))
        ));
        assert!(matches!(
            TaxonomyTree::load("a\tr\na\tq\nq\tr\n"),
            Err(TaxonomyError::ConflictingParent { .. })
        ));
        assert!(matches!(
            TaxonomyTree::load("a r\n"),
            Err(TaxonomyError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            TaxonomyTree::load("a\t  \n"),
            Err(TaxonomyError::EmptyLabel { line: 1 })
        ));
    }

    #[test]
    fn normalizes_and_tolerates_repeated_edges() {
        let t = TaxonomyTree::load("# header\n  Apple \tFRUIT\napple\tfruit\nfruit\tfood\n").unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.lookup("APPLE").is_some());
    }

    #[test]
    fn serialize_round_trips_food() {
        let t = food();
        let again = TaxonomyTree::load(&t.serialize()).unwrap();
        assert_eq!(t, again);
    }

    proptest! {
        #[test]
        fn structural_invariants(leaves in 10u32..200, lo in 2u32..4, extra in 0u32..4, seed in any::<u64>()) {
            let params = SyntheticTaxonomy { leaf_target: leaves, branching: (lo, lo + extra), depth_target: 12, seed };
            let t = generate_synthetic(&params).unwrap();
            for v in (0..t.len()).map(ItemId::new) {
                if !t.is_leaf(v) {
                    let sum: u32 = t.children(v).iter().map(|&c| t.leaf_count(c)).sum();
                    prop_assert_eq!(sum, t.leaf_count(v));
                }
                if let Some(p) = t.parent(v) {
                    prop_assert_eq!(t.level(v), t.level(p) + 1);
                    prop_assert!(t.lm(p) >= t.lm(v));
                }
                prop_assert_eq!(t.lm_units(v) == 0, t.is_leaf(v));
                prop_assert_eq!(t.lm(v) == Ratio::new(1, 1), v == t.root());
            }
            prop_assert_eq!(TaxonomyTree::load(&t.serialize()).unwrap(), t);
        }
    }
}
