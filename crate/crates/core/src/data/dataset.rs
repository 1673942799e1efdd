// SPDX-License-Identifier: Apache-2.0

use super::{Csr, Index, RatingTable};
use crate::error::{Error, Result};

/// Indexed, matrix form of a rating table.
///
/// `by_user` is `n_users × n_items`; `by_item` is its transpose. Values are
/// the ratings, or `1.0` for tables without a rating column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub users: Index,
    pub items: Index,
    pub by_user: Csr,
    pub by_item: Csr,
    explicit: bool,
}

impl Dataset {
    /// Index the distinct users and items and build the sparse views.
    ///
    /// Duplicate `(user, item)` rows keep the last occurrence.
    pub fn build(ratings: &RatingTable) -> Result<Dataset> {
        if ratings.is_empty() {
            return Err(Error::EmptyInput("rating table has no rows".into()));
        }
        let mut users = Index::new();
        let mut items = Index::new();
        let mut entries = Vec::with_capacity(ratings.len());
        for row in 0..ratings.len() {
            let u = users.intern(ratings.user(row));
            let i = items.intern(ratings.item(row));
            entries.push((u, i, ratings.rating(row).unwrap_or(1.0)));
        }
        let by_user = Csr::from_entries(users.len(), items.len(), &entries);
        let by_item = by_user.transpose();
        Ok(Dataset {
            users,
            items,
            by_user,
            by_item,
            explicit: ratings.has_ratings(),
        })
    }

    /// Rebuild from persisted parts; the by-item view is recomputed.
    pub fn from_parts(users: Index, items: Index, by_user: Csr, explicit: bool) -> Result<Dataset> {
        if by_user.n_rows() != users.len() || by_user.n_cols() != items.len() {
            return Err(Error::Format(format!(
                "matrix shape {}x{} does not match indexes {}x{}",
                by_user.n_rows(),
                by_user.n_cols(),
                users.len(),
                items.len()
            )));
        }
        let by_item = by_user.transpose();
        Ok(Dataset {
            users,
            items,
            by_user,
            by_item,
            explicit,
        })
    }

    /// Whether the source table carried explicit ratings.
    pub fn is_explicit(&self) -> bool {
        self.explicit
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn nnz(&self) -> usize {
        self.by_user.nnz()
    }

    /// Error unless the source data had explicit ratings.
    pub fn require_explicit(&self, algorithm: &str) -> Result<()> {
        if self.explicit {
            Ok(())
        } else {
            Err(Error::Fit(format!(
                "{algorithm} requires explicit ratings but the data has no rating column"
            )))
        }
    }

    /// Flatten back to `(user, item, value)` triples, user-major.
    pub fn triples(&self) -> Vec<(String, String, f64)> {
        self.by_user
            .entries()
            .map(|(u, i, v)| {
                (
                    self.users.id_of(u).unwrap().to_owned(),
                    self.items.id_of(i).unwrap().to_owned(),
                    v,
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn small_table() {
        let t = RatingTable::from_triples([("u1", "a", 4.0), ("u1", "b", 3.0), ("u2", "a", 5.0)]);
        let ds = Dataset::build(&t).unwrap();
        assert_eq!(ds.n_users(), 2);
        assert_eq!(ds.n_items(), 2);
        assert_eq!(ds.nnz(), 3);
        assert!(ds.is_explicit());
        assert_eq!(ds.by_item.row_cols(0), [0, 1]);
    }

    #[test]
    fn duplicate_keeps_last() {
        let t = RatingTable::from_triples([("u1", "a", 4.0), ("u2", "a", 1.0), ("u1", "a", 2.0)]);
        let ds = Dataset::build(&t).unwrap();
        assert_eq!(ds.nnz(), 2);
        assert_eq!(ds.by_user.get(0, 0), Some(2.0));
    }

    #[test]
    fn implicit_values_are_one() {
        let t = RatingTable::from_pairs([("u1", "a"), ("u2", "b")]);
        let ds = Dataset::build(&t).unwrap();
        assert!(!ds.is_explicit());
        assert!(ds.by_user.values().iter().all(|&v| v == 1.0));
        assert!(ds.require_explicit("bias").is_err());
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            Dataset::build(&RatingTable::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    proptest! {
        #[test]
        fn flattening_reproduces_deduplicated_rows(
            rows in prop::collection::vec((0u8..8, 0u8..9, 1u8..6), 1..80)
        ) {
            let t = RatingTable::from_triples(
                rows.iter().map(|&(u, i, r)| (format!("u{u}"), format!("i{i}"), r as f64)),
            );
            let mut expected = HashMap::new();
            for &(u, i, r) in &rows {
                expected.insert((format!("u{u}"), format!("i{i}")), r as f64);
            }
            let ds = Dataset::build(&t).unwrap();
            let got: HashMap<_, _> = ds.triples().into_iter().map(|(u, i, v)| ((u, i), v)).collect();
            prop_assert_eq!(ds.nnz(), expected.len());
            prop_assert_eq!(got, expected);
        }
    }
}
