//! Transactions as bags of taxonomy items, plus the two input formats:
//! AOL-style query logs and plain `tid<TAB>item item ...` files.

use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use serde::Serialize;

use crate::error::TranslogError;
use crate::par::{map_slice, Parallelism};
use crate::taxonomy::{ItemId, TaxonomyTree};

/// A bag of items; duplicates are meaningful.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub tid: String,
    pub items: Vec<ItemId>,
}

impl Transaction {
    pub fn new(tid: impl Into<String>, items: Vec<ItemId>) -> Self {
        Transaction {
            tid: tid.into(),
            items,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransactionDb {
    transactions: Vec<Transaction>,
}

impl TransactionDb {
    pub fn new(transactions: Vec<Transaction>) -> Result<Self, TranslogError> {
        let mut seen = HashSet::with_capacity(transactions.len());
        for t in &transactions {
            if t.items.is_empty() {
                return Err(TranslogError::EmptyTransaction(t.tid.clone()));
            }
            if !seen.insert(t.tid.as_str()) {
                return Err(TranslogError::DuplicateTid(t.tid.clone()));
            }
        }
        Ok(TransactionDb { transactions })
    }

    /// Checks every item handle against `taxonomy`.
    pub fn validate(&self, taxonomy: &TaxonomyTree) -> Result<(), TranslogError> {
        for t in &self.transactions {
            if let Some(&item) = t.items.iter().find(|&&i| !taxonomy.contains(i)) {
                return Err(TranslogError::ItemOutOfRange {
                    tid: t.tid.clone(),
                    item,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn get(&self, index: usize) -> &Transaction {
        &self.transactions[index]
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transaction> {
        self.transactions.iter()
    }

    /// Keeps the first `n` transactions.
    pub fn truncated(&self, n: usize) -> TransactionDb {
        TransactionDb {
            transactions: self.transactions[..n.min(self.len())].to_vec(),
        }
    }

    /// N_total, the number of item occurrences.
    pub fn total_items(&self) -> usize {
        self.transactions.iter().map(Transaction::len).sum()
    }

    /// N_total / (|D| × |L|).
    pub fn density(&self, taxonomy: &TaxonomyTree) -> Ratio<u64> {
        assert!(!self.is_empty(), "density of an empty database");
        Ratio::new(
            self.total_items() as u64,
            self.len() as u64 * u64::from(taxonomy.total_leaves()),
        )
    }

    /// Indices sorted by length, longest first; equal lengths keep input order.
    /// Counting sort, O(|D| + max length).
    pub fn order_by_length_desc(&self) -> Vec<usize> {
        let max_len = self.transactions.iter().map(Transaction::len).max().unwrap_or(0);
        let mut start = vec![0usize; max_len + 2];
        for t in &self.transactions {
            // bucket index grows as length shrinks
            start[max_len - t.len() + 1] += 1;
        }
        for b in 1..start.len() {
            start[b] += start[b - 1];
        }
        let mut order = vec![0usize; self.len()];
        for (i, t) in self.transactions.iter().enumerate() {
            let slot = &mut start[max_len - t.len()];
            order[*slot] = i;
            *slot += 1;
        }
        order
    }

    /// Writes the `tid<TAB>item item ...` format read by [`parse_transactions`].
    pub fn write(&self, taxonomy: &TaxonomyTree) -> String {
        let mut out = String::new();
        for t in &self.transactions {
            out.push_str(&t.tid);
            out.push('\t');
            push_labels(&mut out, taxonomy, &t.items);
            out.push('\n');
        }
        out
    }
}

pub(crate) fn push_labels(out: &mut String, taxonomy: &TaxonomyTree, items: &[ItemId]) {
    for (n, &item) in items.iter().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        out.push_str(taxonomy.label(item));
    }
}

fn dedup_in_place(items: &mut Vec<ItemId>) {
    let mut seen = HashSet::with_capacity(items.len());
    items.retain(|&i| seen.insert(i));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IngestOptions {
    pub merge_by_user: bool,
    pub dedup_items: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            merge_by_user: true,
            dedup_items: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub rows: usize,
    pub skipped_rows: usize,
    pub users: usize,
    pub dropped_tokens: usize,
    pub dropped_empty_transactions: usize,
    pub transactions: usize,
}

enum Row {
    Skipped,
    Query {
        user: String,
        items: Vec<ItemId>,
        dropped: usize,
    },
}

fn parse_log_row(line: &str, taxonomy: &TaxonomyTree) -> Row {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(2..=5).contains(&fields.len()) {
        return Row::Skipped;
    }
    let user = fields[0].trim();
    if user.is_empty() {
        return Row::Skipped;
    }
    let query = fields[1].to_lowercase();
    let mut items = Vec::new();
    let mut dropped = 0;
    for token in query.split_whitespace() {
        match taxonomy.lookup_normalized(token) {
            Some(id) => items.push(id),
            None => dropped += 1,
        }
    }
    Row::Query {
        user: user.to_string(),
        items,
        dropped,
    }
}

/// Turns a query log (`AnonID, QueryContent[, QueryTime, ItemRank, ClickURL]`)
/// into transactions. Malformed rows and unknown tokens are counted, not fatal.
pub fn ingest_query_log(
    log: &str,
    taxonomy: &TaxonomyTree,
    options: IngestOptions,
    par: Parallelism,
) -> Result<(TransactionDb, IngestStats), TranslogError> {
    let mut lines: Vec<&str> = log.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines
        .first()
        .is_some_and(|l| l.split('\t').next().map(str::trim) == Some("AnonID"))
    {
        lines.remove(0);
    }
    let rows = map_slice(par, &lines, |line| parse_log_row(line, taxonomy));

    let mut stats = IngestStats {
        rows: lines.len(),
        ..IngestStats::default()
    };
    let mut users: HashMap<String, usize> = HashMap::new();
    let mut per_user_queries: HashMap<String, usize> = HashMap::new();
    let mut pending: Vec<Transaction> = Vec::new();
    for row in rows {
        let Row::Query {
            user,
            items,
            dropped,
        } = row
        else {
            stats.skipped_rows += 1;
            continue;
        };
        stats.dropped_tokens += dropped;
        if options.merge_by_user {
            match users.get(&user) {
                Some(&slot) => pending[slot].items.extend(items),
                None => {
                    users.insert(user.clone(), pending.len());
                    pending.push(Transaction::new(user, items));
                }
            }
        } else {
            let n = per_user_queries.entry(user.clone()).or_default();
            *n += 1;
            pending.push(Transaction::new(format!("{user}:{n}"), items));
        }
    }
    stats.users = if options.merge_by_user {
        users.len()
    } else {
        per_user_queries.len()
    };

    let mut transactions = Vec::with_capacity(pending.len());
    for mut t in pending {
        if options.dedup_items {
            dedup_in_place(&mut t.items);
        }
        if t.items.is_empty() {
            stats.dropped_empty_transactions += 1;
        } else {
            transactions.push(t);
        }
    }
    stats.transactions = transactions.len();
    if transactions.is_empty() {
        return Err(TranslogError::NoTransactions {
            dropped_tokens: stats.dropped_tokens,
            skipped_rows: stats.skipped_rows,
        });
    }
    Ok((TransactionDb::new(transactions)?, stats))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnknownItemPolicy {
    #[default]
    Drop,
    Fail,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub unknown_items: UnknownItemPolicy,
    pub dedup_items: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    pub records: usize,
    pub dropped_items: usize,
    pub dropped_empty_transactions: usize,
}

/// Reads `tid<TAB>item item ...` lines, or bare `item item ...` lines whose
/// tids are assigned as `t1`, `t2`, ... by record position.
pub fn parse_transactions(
    text: &str,
    taxonomy: &TaxonomyTree,
    options: ParseOptions,
) -> Result<(TransactionDb, ParseStats), TranslogError> {
    let mut stats = ParseStats::default();
    let mut transactions = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        stats.records += 1;
        let (tid, body) = match line.split_once('\t') {
            Some((tid, body)) => (tid.trim().to_string(), body),
            None => (format!("t{}", stats.records), line),
        };
        let mut items = Vec::new();
        for token in body.split_whitespace() {
            match taxonomy.lookup(token) {
                Some(id) => items.push(id),
                None if options.unknown_items == UnknownItemPolicy::Fail => {
                    return Err(TranslogError::UnknownItem {
                        line: lineno + 1,
                        label: token.to_string(),
                    })
                }
                None => stats.dropped_items += 1,
            }
        }
        if options.dedup_items {
            dedup_in_place(&mut items);
        }
        if items.is_empty() {
            stats.dropped_empty_transactions += 1;
            continue;
        }
        transactions.push(Transaction::new(tid, items));
    }
    Ok((TransactionDb::new(transactions)?, stats))
}

#[cfg(test)]
pub(crate) mod fixtures {
    /// The five motivating transactions over the food taxonomy.
    pub const WORKED: &str = "\
t1\torange chicken beef
t2\tbanana beef cheese
t3\tchicken milk butter
t4\tapple chicken
t5\tchicken beef
";
}
