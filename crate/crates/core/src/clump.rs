//! Greedy clustering anonymizer.
//!
//! Transactions are sorted longest first. Every k-th one seeds a cluster,
//! the rest fill clusters up to size k by picking the cluster whose merged
//! distortion is smallest, and any remainder (< k transactions) goes to the
//! best cluster overall. Each cluster is released as its LCG.

use std::collections::BTreeSet;

use crate::error::AnonymizeError;
use crate::lcg::{incremental_lcg, Distortion, GeneralizedTransaction};
use crate::par::{map_slice, Parallelism};
use crate::release::{AnonymizedDb, Group};
use crate::taxonomy::TaxonomyTree;
use crate::translog::TransactionDb;

/// Candidate batches smaller than this are scored sequentially; spawning
/// tasks costs more than a handful of small LCG merges.
const PAR_MIN_CANDIDATES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClumpConfig {
    pub k: usize,
    /// Search window: only the first `r` under-filled clusters are scored.
    pub r: usize,
    /// Release each LCG with repeated items removed.
    pub dedup_output: bool,
    pub parallelism: Parallelism,
}

impl Default for ClumpConfig {
    fn default() -> Self {
        ClumpConfig {
            k: 5,
            r: 10,
            dedup_output: false,
            parallelism: Parallelism::default(),
        }
    }
}

impl ClumpConfig {
    pub fn new(k: usize, r: usize) -> Self {
        ClumpConfig {
            k,
            r,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), AnonymizeError> {
        if self.k < 2 {
            return Err(AnonymizeError::InvalidConfig(format!("k must be at least 2, got {}", self.k)));
        }
        if self.r < 1 {
            return Err(AnonymizeError::InvalidConfig("r must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    members: Vec<usize>,
    lcg: GeneralizedTransaction,
    member_items: usize,
    distortion: Distortion,
}

impl Cluster {
    fn seed(db: &TransactionDb, taxonomy: &TaxonomyTree, index: usize) -> Self {
        let t = db.get(index);
        let lcg = GeneralizedTransaction::new(t.items.clone());
        let distortion =
            Distortion::from_parts(1, t.len(), lcg.len(), lcg.lm_units(taxonomy), taxonomy.lm_scale());
        Cluster {
            members: vec![index],
            lcg,
            member_items: t.len(),
            distortion,
        }
    }

    /// Source positions in assignment order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn lcg(&self) -> &GeneralizedTransaction {
        &self.lcg
    }

    /// GGD(S, LCG(S)) as maintained during clustering.
    pub fn distortion(&self) -> Distortion {
        self.distortion
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Filling clusters up to k over the r-cluster window.
    Fill,
    /// Placing the remainder once every cluster holds k.
    Leftover,
}

/// One assignment decision, for tracing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub transaction: usize,
    pub phase: Phase,
    /// (cluster index, distortion of the cluster with the transaction added)
    pub candidates: Vec<(usize, Distortion)>,
    pub chosen: usize,
}

/// Runs the clustering and returns the clusters in seed order.
pub fn cluster(
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    cfg: &ClumpConfig,
) -> Result<Vec<Cluster>, AnonymizeError> {
    cluster_traced(db, taxonomy, cfg, |_| {})
}

/// [`cluster`], reporting every assignment to `observe`.
pub fn cluster_traced(
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    cfg: &ClumpConfig,
    mut observe: impl FnMut(&Assignment),
) -> Result<Vec<Cluster>, AnonymizeError> {
    cfg.validate()?;
    if db.len() < cfg.k {
        return Err(AnonymizeError::KExceedsDatabase {
            k: cfg.k,
            size: db.len(),
        });
    }
    let scale = taxonomy.lm_scale();
    let order = db.order_by_length_desc();
    let n = db.len() / cfg.k;

    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster::seed(db, taxonomy, order[i * cfg.k]))
        .collect();
    let mut open: BTreeSet<usize> = (0..n).filter(|&i| clusters[i].len() < cfg.k).collect();

    for (pos, &ti) in order.iter().enumerate() {
        if pos % cfg.k == 0 && pos / cfg.k < n {
            continue;
        }
        let t = db.get(ti);
        let (phase, window): (Phase, Vec<usize>) = if open.is_empty() {
            (Phase::Leftover, (0..n).collect())
        } else {
            (Phase::Fill, open.iter().take(cfg.r).copied().collect())
        };

        let score = |&ci: &usize| -> Result<(GeneralizedTransaction, Distortion), AnonymizeError> {
            let c = &clusters[ci];
            let merged = incremental_lcg(taxonomy, &c.lcg, t)?;
            let d = Distortion::from_parts(
                c.len() + 1,
                c.member_items + t.len(),
                merged.len(),
                merged.lm_units(taxonomy),
                scale,
            );
            Ok((merged, d))
        };
        let par = if window.len() >= PAR_MIN_CANDIDATES {
            cfg.parallelism
        } else {
            Parallelism::Sequential
        };
        let scored = map_slice(par, &window, score)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;

        // strict `<` keeps the lowest cluster index on ties
        let mut best = 0;
        for (slot, (_, d)) in scored.iter().enumerate().skip(1) {
            if d.cmp_total(&scored[best].1).is_lt() {
                best = slot;
            }
        }
        let chosen = window[best];
        observe(&Assignment {
            transaction: ti,
            phase,
            candidates: window.iter().copied().zip(scored.iter().map(|(_, d)| *d)).collect(),
            chosen,
        });

        let (merged, d) = scored.into_iter().nth(best).unwrap();
        let c = &mut clusters[chosen];
        c.members.push(ti);
        c.member_items += t.len();
        c.lcg = merged;
        c.distortion = d;
        if c.len() >= cfg.k {
            open.remove(&chosen);
        }
    }
    Ok(clusters)
}

/// Releases every member of a cluster as the cluster's LCG (deduplicated
/// when `dedup_output` is set).
pub fn anonymize(clusters: &[Cluster], cfg: &ClumpConfig) -> AnonymizedDb {
    AnonymizedDb::new(
        clusters
            .iter()
            .map(|c| Group {
                generalized: if cfg.dedup_output { c.lcg.dedup() } else { c.lcg.clone() },
                members: c.members.clone(),
            })
            .collect(),
    )
}

/// [`cluster`] followed by [`anonymize`].
pub fn run(
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    cfg: &ClumpConfig,
) -> Result<AnonymizedDb, AnonymizeError> {
    Ok(anonymize(&cluster(db, taxonomy, cfg)?, cfg))
}
