//! The anonymized database: groups of records released under one shared
//! generalized transaction, and the private record-to-group audit map.

use std::collections::{BTreeMap, HashMap};

use crate::error::ReleaseError;
use crate::lcg::GeneralizedTransaction;
use crate::taxonomy::TaxonomyTree;
use crate::translog::TransactionDb;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub generalized: GeneralizedTransaction,
    /// Positions in the source [`TransactionDb`], ascending.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnonymizedDb {
    groups: Vec<Group>,
}

impl AnonymizedDb {
    /// Normalizes member order and orders groups by their first member.
    pub fn new(mut groups: Vec<Group>) -> Self {
        for g in &mut groups {
            g.members.sort_unstable();
        }
        groups.retain(|g| !g.members.is_empty());
        groups.sort_by_key(|g| g.members[0]);
        AnonymizedDb { groups }
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Released records, one per member copy.
    pub fn record_count(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }

    /// Group index of every source record, `None` where a record is not covered.
    pub fn group_of(&self, db_len: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; db_len];
        for (gi, g) in self.groups.iter().enumerate() {
            for &m in &g.members {
                out[m] = Some(gi);
            }
        }
        out
    }

    /// Public release: `group_id<TAB>item item ...`, one line per record.
    /// Carries no transaction ids.
    pub fn write_public(&self, taxonomy: &TaxonomyTree) -> String {
        let mut out = String::new();
        for (gi, g) in self.groups.iter().enumerate() {
            let line = format!("{gi}\t{}\n", g.generalized.render(taxonomy));
            for _ in &g.members {
                out.push_str(&line);
            }
        }
        out
    }

    /// Private audit map: `tid<TAB>group_id`, in source record order.
    pub fn write_audit_map(&self, db: &TransactionDb) -> String {
        let mut out = String::new();
        for (pos, group) in self.group_of(db.len()).into_iter().enumerate() {
            if let Some(gi) = group {
                out.push_str(&db.get(pos).tid);
                out.push('\t');
                out.push_str(&gi.to_string());
                out.push('\n');
            }
        }
        out
    }

    /// Rebuilds the groups from a public release plus its audit map.
    pub fn from_release(
        public: &str,
        audit_map: &str,
        db: &TransactionDb,
        taxonomy: &TaxonomyTree,
    ) -> Result<Self, ReleaseError> {
        let mut released: BTreeMap<usize, (GeneralizedTransaction, usize)> = BTreeMap::new();
        for (lineno, line) in public.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = || ReleaseError::Malformed {
                line: lineno + 1,
                content: line.to_string(),
            };
            let (id, body) = line.split_once('\t').ok_or_else(malformed)?;
            let id: usize = id.trim().parse().map_err(|_| malformed())?;
            let items = body
                .split_whitespace()
                .map(|l| {
                    taxonomy.lookup(l).ok_or_else(|| ReleaseError::UnknownItem {
                        line: lineno + 1,
                        label: l.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let g = GeneralizedTransaction::new(items);
            match released.get_mut(&id) {
                Some((existing, n)) if *existing == g => *n += 1,
                Some(_) => return Err(ReleaseError::InconsistentGroup(id)),
                None => {
                    released.insert(id, (g, 1));
                }
            }
        }

        let positions: HashMap<&str, usize> =
            db.iter().enumerate().map(|(i, t)| (t.tid.as_str(), i)).collect();
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut mapped = vec![false; db.len()];
        for (lineno, line) in audit_map.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = || ReleaseError::Malformed {
                line: lineno + 1,
                content: line.to_string(),
            };
            let (tid, id) = line.split_once('\t').ok_or_else(malformed)?;
            let id: usize = id.trim().parse().map_err(|_| malformed())?;
            let &pos = positions
                .get(tid)
                .ok_or_else(|| ReleaseError::UnknownTid(tid.to_string()))?;
            if std::mem::replace(&mut mapped[pos], true) {
                return Err(ReleaseError::DuplicateTid(tid.to_string()));
            }
            members.entry(id).or_default().push(pos);
        }

        let mut groups = Vec::with_capacity(released.len());
        for (id, (generalized, count)) in released {
            let m = members.remove(&id).unwrap_or_default();
            if m.len() != count {
                return Err(ReleaseError::CountMismatch {
                    group: id,
                    released: count,
                    mapped: m.len(),
                });
            }
            groups.push(Group {
                generalized,
                members: m,
            });
        }
        if let Some((&id, m)) = members.iter().next() {
            return Err(ReleaseError::CountMismatch {
                group: id,
                released: 0,
                mapped: m.len(),
            });
        }
        Ok(AnonymizedDb::new(groups))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub generalized: GeneralizedTransaction,
    pub count: usize,
    pub groups: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KAnonymityCheck {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Every distinct released transaction must occur at least `k` times.
/// Groups released under the same transaction count together.
pub fn verify_k_anonymity(out: &AnonymizedDb, k: usize) -> KAnonymityCheck {
    let mut tally: BTreeMap<&GeneralizedTransaction, (usize, Vec<usize>)> = BTreeMap::new();
    for (gi, g) in out.groups.iter().enumerate() {
        let entry = tally.entry(&g.generalized).or_default();
        entry.0 += g.members.len();
        entry.1.push(gi);
    }
    let violations: Vec<Violation> = tally
        .into_iter()
        .filter(|(_, (count, _))| *count < k)
        .map(|(g, (count, groups))| Violation {
            generalized: g.clone(),
            count,
            groups,
        })
        .collect();
    KAnonymityCheck {
        ok: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::fixtures::FOOD;
    use crate::translog::fixtures::WORKED;
    use crate::translog::{parse_transactions, ParseOptions};

    fn fixture() -> (TaxonomyTree, TransactionDb, AnonymizedDb) {
        let t = TaxonomyTree::load(FOOD).unwrap();
        let (db, _) = parse_transactions(WORKED, &t, ParseOptions::default()).unwrap();
        let g = |l: &[&str]| GeneralizedTransaction::from_labels(&t, l).unwrap();
        let out = AnonymizedDb::new(vec![
            Group {
                generalized: g(&["chicken", "food"]),
                members: vec![4, 2, 3],
            },
            Group {
                generalized: g(&["fruit", "beef", "food"]),
                members: vec![1, 0],
            },
        ]);
        (t, db, out)
    }

    #[test]
    fn groups_are_ordered_by_first_member() {
        let (_, _, out) = fixture();
        assert_eq!(out.groups()[0].members, [0, 1]);
        assert_eq!(out.groups()[1].members, [2, 3, 4]);
        assert_eq!(out.record_count(), 5);
    }

    #[test]
    fn k_anonymity_checks() {
        let (t, _, out) = fixture();
        assert!(verify_k_anonymity(&out, 2).ok);
        let check = verify_k_anonymity(&out, 3);
        assert!(!check.ok);
        assert_eq!(check.violations.len(), 1);
        assert_eq!(check.violations[0].groups, [0]);

        let mut groups = out.groups().to_vec();
        groups.push(Group {
            generalized: GeneralizedTransaction::from_labels(&t, &["dairy"]).unwrap(),
            members: vec![5],
        });
        let check = verify_k_anonymity(&AnonymizedDb::new(groups), 2);
        assert!(!check.ok);
        assert_eq!(check.violations[0].count, 1);

        assert!(verify_k_anonymity(&AnonymizedDb::default(), 5).ok);
    }

    #[test]
    fn identical_groups_pool_their_counts() {
        let (t, _, _) = fixture();
        let g = GeneralizedTransaction::from_labels(&t, &["food"]).unwrap();
        let out = AnonymizedDb::new(vec![
            Group { generalized: g.clone(), members: vec![0] },
            Group { generalized: g, members: vec![1] },
        ]);
        assert!(verify_k_anonymity(&out, 2).ok);
    }

    #[test]
    fn public_release_has_no_tids() {
        let (t, db, out) = fixture();
        let public = out.write_public(&t);
        assert_eq!(
            public,
            "0\tbeef fruit food\n0\tbeef fruit food\n1\tchicken food\n1\tchicken food\n1\tchicken food\n"
        );
        for tx in db.iter() {
            assert!(!public.contains(&tx.tid));
        }
        assert_eq!(out.write_audit_map(&db), "t1\t0\nt2\t0\nt3\t1\nt4\t1\nt5\t1\n");
    }

    #[test]
    fn release_round_trip() {
        let (t, db, out) = fixture();
        let back = AnonymizedDb::from_release(&out.write_public(&t), &out.write_audit_map(&db), &db, &t).unwrap();
        assert_eq!(back, out);
        assert!(matches!(
            AnonymizedDb::from_release("0\tfood\n", "t1\t0\nt2\t0\n", &db, &t),
            Err(ReleaseError::CountMismatch { .. })
        ));
        assert!(matches!(
            AnonymizedDb::from_release("0\tfood\n0\tfruit\n", "t1\t0\nt2\t0\n", &db, &t),
            Err(ReleaseError::InconsistentGroup(0))
        ));
        assert!(matches!(
            AnonymizedDb::from_release("0\tfood\n", "zz\t0\n", &db, &t),
            Err(ReleaseError::UnknownTid(_))
        ));
    }
}
