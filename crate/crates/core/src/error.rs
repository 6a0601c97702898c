use thiserror::Error;

use crate::taxonomy::ItemId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("taxonomy document contains no edges")]
    Empty,
    #[error("line {line}: expected `child<TAB>parent`, got {content:?}")]
    MalformedLine { line: usize, content: String },
    #[error("line {line}: empty label")]
    EmptyLabel { line: usize },
    #[error("item {child:?} declared under both {first:?} and {second:?}")]
    ConflictingParent {
        child: String,
        first: String,
        second: String,
    },
    #[error("taxonomy has several roots: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("taxonomy contains a cycle through {label:?}")]
    Cycle { label: String },
    #[error("label {0:?} occurs twice")]
    DuplicateLabel(String),
    #[error("infeasible synthetic taxonomy: {0}")]
    Infeasible(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslogError {
    #[error("no transactions survived ingestion ({dropped_tokens} tokens dropped, {skipped_rows} rows skipped)")]
    NoTransactions {
        dropped_tokens: usize,
        skipped_rows: usize,
    },
    #[error("line {line}: unknown item {label:?}")]
    UnknownItem { line: usize, label: String },
    #[error("duplicate transaction id {0:?}")]
    DuplicateTid(String),
    #[error("transaction {0:?} has no items")]
    EmptyTransaction(String),
    #[error("transaction {tid:?} references {item} outside the taxonomy")]
    ItemOutOfRange { tid: String, item: ItemId },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LcgError {
    #[error("cannot generalize an empty set of transactions")]
    EmptySet,
    #[error("item {0} is not in the taxonomy")]
    UnknownItem(ItemId),
    #[error("the generalized transaction does not generalize every member")]
    NotCommonGeneralization,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnonymizeError {
    #[error("k = {k} exceeds database size {size}")]
    KExceedsDatabase { k: usize, size: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Lcg(#[from] LcgError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration would visit {0} candidates, above the guard")]
    GuardExceeded(u128),
    #[error("cannot generalize an empty set of transactions")]
    EmptySet,
    #[error("{0} minimal common generalizations found, expected exactly one")]
    NotUnique(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReleaseError {
    #[error("line {line}: malformed release record {content:?}")]
    Malformed { line: usize, content: String },
    #[error("line {line}: unknown item {label:?}")]
    UnknownItem { line: usize, label: String },
    #[error("audit map references unknown transaction {0:?}")]
    UnknownTid(String),
    #[error("group {0} is released under more than one generalized transaction")]
    InconsistentGroup(usize),
    #[error("group {group}: {released} released records but {mapped} mapped transactions")]
    CountMismatch {
        group: usize,
        released: usize,
        mapped: usize,
    },
    #[error("transaction {0:?} is mapped more than once")]
    DuplicateTid(String),
}
