//! k-anonymization of set-valued transaction data such as web query logs.
//!
//! Transactions are bags of items drawn from an item taxonomy. The [`clump`]
//! anonymizer clusters similar transactions and releases each cluster as its
//! least common generalization ([`lcg`]); [`partition`] is the top-down
//! baseline it is compared against. [`metrics`] scores either result.

pub mod clump;
pub mod cli;
pub mod error;
pub mod lcg;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod partition;
pub mod release;
pub mod synth;
pub mod taxonomy;
pub mod translog;

pub use clump::{ClumpConfig, Cluster};
pub use lcg::{buig_lcg, ggd, incremental_lcg, Distortion, GeneralizedTransaction, ItemBag};
pub use par::Parallelism;
pub use release::{verify_k_anonymity, AnonymizedDb, Group};
pub use taxonomy::{ItemId, TaxonomyTree};
pub use translog::{Transaction, TransactionDb};
