//! Quality indicators for an anonymized release: total distortion, average
//! released length, average item level (root = 1), density and runtime.

use std::collections::BTreeMap;
use std::time::Duration;

use num_rational::Ratio;
use serde::Serialize;

use crate::lcg::{ggd, Distortion};
use crate::par::{map_slice, Parallelism};
use crate::release::AnonymizedDb;
use crate::taxonomy::TaxonomyTree;
use crate::translog::{Transaction, TransactionDb};

/// An exact fraction with its decimal rendering (4 places).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalValue {
    pub rational: String,
    pub decimal: f64,
    #[serde(skip)]
    pub exact: Ratio<u128>,
}

impl RationalValue {
    pub fn new(numer: u128, denom: u128) -> Self {
        let exact = if denom == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(numer, denom)
        };
        RationalValue {
            rational: exact.to_string(),
            decimal: round4(*exact.numer() as f64 / *exact.denom() as f64),
            exact,
        }
    }

    pub fn zero() -> Self {
        Self::new(0, 1)
    }
}

impl From<Distortion> for RationalValue {
    fn from(d: Distortion) -> Self {
        RationalValue::new(d.total_units(), u128::from(d.scale()))
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Averages taken once per group instead of once per released record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupAverages {
    pub avg_generalized_length: RationalValue,
    pub avg_item_level: RationalValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnonymizationReport {
    pub algorithm: String,
    pub k: usize,
    pub r: Option<usize>,
    pub total_distortion: RationalValue,
    pub avg_generalized_length: RationalValue,
    pub avg_item_level: RationalValue,
    pub density: RationalValue,
    pub runtime_ms: u64,
    pub cluster_size_histogram: BTreeMap<usize, usize>,
    pub transaction_count: usize,
    pub taxonomy_size: usize,
    pub per_group: GroupAverages,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip)]
    pub distortion: Distortion,
}

/// Identifies the run a report describes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunInfo {
    pub algorithm: String,
    pub k: usize,
    pub r: Option<usize>,
    pub runtime: Duration,
}

/// Σ GGD(S_i, g_i) over the released groups, against the original bags.
pub fn release_distortion(
    out: &AnonymizedDb,
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    par: Parallelism,
) -> Distortion {
    map_slice(par, out.groups(), |g| {
        let members: Vec<&Transaction> = g.members.iter().map(|&i| db.get(i)).collect();
        ggd(taxonomy, &members, &g.generalized)
    })
    .into_iter()
    .fold(Distortion::zero(taxonomy.lm_scale()), |a, b| a + b)
}

pub fn build_report(
    out: &AnonymizedDb,
    db: &TransactionDb,
    taxonomy: &TaxonomyTree,
    run: &RunInfo,
    par: Parallelism,
) -> AnonymizationReport {
    let distortion = release_distortion(out, db, taxonomy, par);

    let (mut records, mut record_items, mut record_levels) = (0u128, 0u128, 0u128);
    let (mut group_items, mut group_levels) = (0u128, 0u128);
    let mut histogram = BTreeMap::new();
    for g in out.groups() {
        let size = g.members.len() as u128;
        let len = g.generalized.len() as u128;
        let levels: u128 = g.generalized.iter().map(|i| u128::from(taxonomy.level(i))).sum();
        records += size;
        record_items += size * len;
        record_levels += size * levels;
        group_items += len;
        group_levels += levels;
        *histogram.entry(g.members.len()).or_insert(0) += 1;
    }

    let warning = if out.is_empty() {
        Some("empty result: no records were released".to_string())
    } else if record_items == 0 {
        Some("released transactions contain no items".to_string())
    } else {
        None
    };
    let density = if db.is_empty() {
        RationalValue::zero()
    } else {
        let d = db.density(taxonomy);
        RationalValue::new(u128::from(*d.numer()), u128::from(*d.denom()))
    };

    AnonymizationReport {
        algorithm: run.algorithm.clone(),
        k: run.k,
        r: run.r,
        total_distortion: distortion.into(),
        avg_generalized_length: RationalValue::new(record_items, records),
        avg_item_level: RationalValue::new(record_levels, record_items),
        density,
        runtime_ms: run.runtime.as_millis() as u64,
        cluster_size_histogram: histogram,
        transaction_count: db.len(),
        taxonomy_size: taxonomy.len(),
        per_group: GroupAverages {
            avg_generalized_length: RationalValue::new(group_items, out.len() as u128),
            avg_item_level: RationalValue::new(group_levels, group_items),
        },
        warning,
        distortion,
    }
}

/// Pretty JSON with a stable key order.
pub fn write_report(report: &AnonymizationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub const CSV_HEADER: &str = "algorithm,k,r,transactions,distortion,avg_len,avg_level,runtime_ms";

pub fn csv_row(report: &AnonymizationReport) -> String {
    format!(
        "{},{},{},{},{:.4},{:.4},{:.4},{}",
        report.algorithm,
        report.k,
        report.r.map(|r| r.to_string()).unwrap_or_default(),
        report.transaction_count,
        report.total_distortion.decimal,
        report.avg_generalized_length.decimal,
        report.avg_item_level.decimal,
        report.runtime_ms
    )
}
