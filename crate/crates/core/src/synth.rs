//! Seeded synthetic transaction databases for benchmarks and sweeps.
//!
//! Each transaction has a topic (a subtree a few levels above an anchor leaf)
//! and draws most of its items from the leaves under it. Anchors and
//! off-topic items follow a Zipf law over a seeded ranking of the leaves.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::taxonomy::{ItemId, TaxonomyTree};
use crate::translog::{Transaction, TransactionDb};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticWorkload {
    pub transactions: usize,
    /// Mean transaction length; lengths are uniform on `1..=2*mean-1`.
    pub mean_len: usize,
    /// Probability that an item is drawn from the transaction's topic.
    pub locality: f64,
    /// How many levels above the seed leaf the topic sits.
    pub topic_lift: u32,
    /// Zipf exponent of leaf popularity; 0 is uniform.
    pub popularity_skew: f64,
    pub seed: u64,
}

impl Default for SyntheticWorkload {
    fn default() -> Self {
        SyntheticWorkload {
            transactions: 1000,
            mean_len: 5,
            locality: 0.8,
            topic_lift: 2,
            popularity_skew: 1.0,
            seed: 0,
        }
    }
}

/// Distinct-item transactions over the leaves of `taxonomy`.
pub fn generate_transactions(taxonomy: &TaxonomyTree, params: &SyntheticWorkload) -> TransactionDb {
    let leaves: Vec<ItemId> = taxonomy.leaves().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut ranked = leaves.clone();
    ranked.shuffle(&mut rng);
    let zipf = Zipf::new(leaves.len() as f64, params.popularity_skew.max(0.0)).expect("valid Zipf parameters");
    let popular = |rng: &mut ChaCha8Rng| ranked[zipf.sample(rng) as usize - 1];
    let max_len = (2 * params.mean_len.max(1) - 1).min(leaves.len());

    let mut transactions = Vec::with_capacity(params.transactions);
    for i in 0..params.transactions {
        let anchor = popular(&mut rng);
        let mut topic = anchor;
        for _ in 0..params.topic_lift {
            match taxonomy.parent(topic) {
                Some(p) if p != taxonomy.root() => topic = p,
                _ => break,
            }
        }
        let lo = leaves.partition_point(|&l| l < topic);
        let hi = leaves.partition_point(|&l| l < taxonomy.subtree_end(topic));

        let len = rng.random_range(1..=max_len);
        let mut items: Vec<ItemId> = Vec::with_capacity(len);
        let mut attempts = 0;
        while items.len() < len && attempts < 20 * len {
            attempts += 1;
            let item = if rng.random_bool(params.locality) {
                leaves[rng.random_range(lo..hi)]
            } else {
                popular(&mut rng)
            };
            if !items.contains(&item) {
                items.push(item);
            }
        }
        transactions.push(Transaction::new(format!("s{i}"), items));
    }
    TransactionDb::new(transactions).expect("generated transactions are non-empty with unique ids")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{generate_synthetic, SyntheticTaxonomy};

    fn tree() -> TaxonomyTree {
        generate_synthetic(&SyntheticTaxonomy {
            leaf_target: 500,
            branching: (2, 5),
            depth_target: 8,
            seed: 3,
        })
        .unwrap()
    }

    #[test]
    fn deterministic_and_well_formed() {
        let t = tree();
        let p = SyntheticWorkload {
            transactions: 300,
            seed: 9,
            ..SyntheticWorkload::default()
        };
        let a = generate_transactions(&t, &p);
        assert_eq!(a, generate_transactions(&t, &p));
        assert_eq!(a.len(), 300);
        a.validate(&t).unwrap();
        for tx in a.iter() {
            assert!(!tx.is_empty() && tx.len() <= 9);
            assert!(tx.items.iter().all(|&i| t.is_leaf(i)));
            let mut s = tx.items.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), tx.len());
        }
        let mean = a.total_items() as f64 / a.len() as f64;
        assert!((mean - 5.0).abs() < 0.6, "mean length {mean}");
    }
}
