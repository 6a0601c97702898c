use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TaxonomyTree;
use crate::error::TaxonomyError;

/// Parameters for a random taxonomy. Stands in for a dictionary-derived tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticTaxonomy {
    pub leaf_target: u32,
    /// Inclusive range for the number of children of an internal node.
    pub branching: (u32, u32),
    pub depth_target: u32,
    pub seed: u64,
}

/// Grows a tree by repeatedly splitting a uniformly chosen leaf until the leaf
/// count reaches `leaf_target`. Internal nodes never sit below `depth_target`,
/// so the height is at most `depth_target + 1`.
pub fn generate_synthetic(params: &SyntheticTaxonomy) -> Result<TaxonomyTree, TaxonomyError> {
    let SyntheticTaxonomy {
        leaf_target,
        branching: (lo, hi),
        depth_target,
        seed,
    } = *params;
    if leaf_target == 0 {
        return Err(TaxonomyError::Infeasible("leaf_target must be at least 1".into()));
    }
    if lo < 2 || hi < lo {
        return Err(TaxonomyError::Infeasible(format!(
            "branching range [{lo}, {hi}] must satisfy 2 <= min <= max"
        )));
    }
    if depth_target == 0 {
        return Err(TaxonomyError::Infeasible("depth_target must be at least 1".into()));
    }
    let reachable = (hi as f64).powi(depth_target.min(64) as i32);
    if reachable < 0.9 * leaf_target as f64 {
        return Err(TaxonomyError::Infeasible(format!(
            "at most {reachable} leaves fit in depth {depth_target} with branching {hi}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut levels: Vec<u32> = vec![1];
    // leaves that may still be split
    let mut open: Vec<usize> = vec![0];

    if leaf_target == 1 {
        // a lone root cannot be written as an edge list; hang one leaf under it
        children[0].push(1);
        children.push(Vec::new());
        levels.push(2);
    } else {
        let mut leaves = 1u32;
        while leaves < leaf_target && !open.is_empty() {
            let pick = rng.random_range(0..open.len());
            let v = open.swap_remove(pick);
            let mut fanout = rng.random_range(lo..=hi);
            if leaves + fanout - 1 > leaf_target {
                fanout = (leaf_target - leaves + 1).max(lo);
            }
            let level = levels[v] + 1;
            for _ in 0..fanout {
                let c = children.len();
                children.push(Vec::new());
                levels.push(level);
                children[v].push(c);
                if level <= depth_target {
                    open.push(c);
                }
            }
            leaves += fanout - 1;
        }
        let miss = (i64::from(leaves) - i64::from(leaf_target)).unsigned_abs();
        if miss as f64 > 0.1 * f64::from(leaf_target) {
            return Err(TaxonomyError::Infeasible(format!(
                "reached {leaves} leaves for a target of {leaf_target}"
            )));
        }
    }

    let labels = (0..children.len())
        .map(|i| if i == 0 { "root".to_string() } else { format!("n{i}") })
        .collect();
    TaxonomyTree::from_links(labels, &children, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tree_hits_target() {
        let p = SyntheticTaxonomy {
            leaf_target: 8,
            branching: (2, 3),
            depth_target: 3,
            seed: 42,
        };
        let t = generate_synthetic(&p).unwrap();
        assert!((7..=9).contains(&t.total_leaves()));
        assert!(t.height() <= 4);
        assert_eq!(t, generate_synthetic(&p).unwrap());
    }

    #[test]
    fn large_tree_near_target() {
        let p = SyntheticTaxonomy {
            leaf_target: 25_000,
            branching: (2, 6),
            depth_target: 18,
            seed: 1,
        };
        let t = generate_synthetic(&p).unwrap();
        let leaves = f64::from(t.total_leaves());
        assert!((leaves - 25_000.0).abs() <= 2_500.0);
        assert!(t.height() <= 19);
    }

    #[test]
    fn different_seeds_differ() {
        let mut p = SyntheticTaxonomy {
            leaf_target: 50,
            branching: (2, 4),
            depth_target: 6,
            seed: 1,
        };
        let a = generate_synthetic(&p).unwrap();
        p.seed = 2;
        assert_ne!(a, generate_synthetic(&p).unwrap());
    }

    #[test]
    fn single_leaf_target() {
        let p = SyntheticTaxonomy {
            leaf_target: 1,
            branching: (2, 2),
            depth_target: 1,
            seed: 0,
        };
        let t = generate_synthetic(&p).unwrap();
        assert_eq!(t.total_leaves(), 1);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn infeasible_parameters() {
        let bad = |leaf_target, branching, depth_target| {
            generate_synthetic(&SyntheticTaxonomy {
                leaf_target,
                branching,
                depth_target,
                seed: 0,
            })
        };
        assert!(matches!(bad(0, (2, 3), 3), Err(TaxonomyError::Infeasible(_))));
        assert!(matches!(bad(10, (1, 3), 3), Err(TaxonomyError::Infeasible(_))));
        assert!(matches!(bad(10, (4, 3), 3), Err(TaxonomyError::Infeasible(_))));
        assert!(matches!(bad(1000, (2, 3), 2), Err(TaxonomyError::Infeasible(_))));
        // a single split already overshoots by far
        assert!(matches!(bad(3, (9, 9), 3), Err(TaxonomyError::Infeasible(_))));
    }
}
