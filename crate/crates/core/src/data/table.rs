// SPDX-License-Identifier: Apache-2.0

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// A pass-through column the library does not interpret.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraColumn {
    pub name: String,
    pub values: Vec<String>,
}

/// Columnar table of user-item interactions.
///
/// `user` and `item` are always present. `rating` and `timestamp` are
/// optional, and any other columns are carried along verbatim through
/// every row-selection operation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RatingTable {
    users: Vec<String>,
    items: Vec<String>,
    ratings: Option<Vec<f64>>,
    timestamps: Option<Vec<i64>>,
    extras: Vec<ExtraColumn>,
}

impl RatingTable {
    pub fn new(
        users: Vec<String>,
        items: Vec<String>,
        ratings: Option<Vec<f64>>,
        timestamps: Option<Vec<i64>>,
    ) -> Result<Self> {
        let n = users.len();
        if items.len() != n {
            return Err(Error::Schema(format!(
                "item column has {} rows, user column has {n}",
                items.len()
            )));
        }
        if let Some(r) = &ratings {
            if r.len() != n {
                return Err(Error::Schema(format!(
                    "rating column has {} rows, expected {n}",
                    r.len()
                )));
            }
        }
        if let Some(t) = &timestamps {
            if t.len() != n {
                return Err(Error::Schema(format!(
                    "timestamp column has {} rows, expected {n}",
                    t.len()
                )));
            }
        }
        Ok(RatingTable {
            users,
            items,
            ratings,
            timestamps,
            extras: Vec::new(),
        })
    }

    /// Build an explicit-feedback table from `(user, item, rating)` triples.
    pub fn from_triples<U, I>(rows: impl IntoIterator<Item = (U, I, f64)>) -> Self
    where
        U: Into<String>,
        I: Into<String>,
    {
        let mut users = Vec::new();
        let mut items = Vec::new();
        let mut ratings = Vec::new();
        for (u, i, r) in rows {
            users.push(u.into());
            items.push(i.into());
            ratings.push(r);
        }
        RatingTable {
            users,
            items,
            ratings: Some(ratings),
            timestamps: None,
            extras: Vec::new(),
        }
    }

    /// Build an implicit-feedback table from `(user, item)` pairs.
    pub fn from_pairs<U, I>(rows: impl IntoIterator<Item = (U, I)>) -> Self
    where
        U: Into<String>,
        I: Into<String>,
    {
        let (users, items) = rows.into_iter().map(|(u, i)| (u.into(), i.into())).unzip();
        RatingTable {
            users,
            items,
            ..Default::default()
        }
    }

    pub fn with_timestamps(mut self, timestamps: Vec<i64>) -> Result<Self> {
        if timestamps.len() != self.len() {
            return Err(Error::Schema(format!(
                "timestamp column has {} rows, expected {}",
                timestamps.len(),
                self.len()
            )));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn with_extra(mut self, name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let name = name.into();
        if values.len() != self.len() {
            return Err(Error::Schema(format!(
                "column {name} has {} rows, expected {}",
                values.len(),
                self.len()
            )));
        }
        if is_reserved(&name) || self.extras.iter().any(|c| c.name == name) {
            return Err(Error::Schema(format!("duplicate column {name}")));
        }
        self.extras.push(ExtraColumn { name, values });
        Ok(self)
    }

    /// Drop the rating column, turning the table into implicit feedback.
    pub fn without_ratings(mut self) -> Self {
        self.ratings = None;
        self
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn ratings(&self) -> Option<&[f64]> {
        self.ratings.as_deref()
    }

    pub fn timestamps(&self) -> Option<&[i64]> {
        self.timestamps.as_deref()
    }

    pub fn extras(&self) -> &[ExtraColumn] {
        &self.extras
    }

    pub fn has_ratings(&self) -> bool {
        self.ratings.is_some()
    }

    pub fn has_timestamps(&self) -> bool {
        self.timestamps.is_some()
    }

    pub fn user(&self, row: usize) -> &str {
        &self.users[row]
    }

    pub fn item(&self, row: usize) -> &str {
        &self.items[row]
    }

    pub fn rating(&self, row: usize) -> Option<f64> {
        self.ratings.as_ref().map(|r| r[row])
    }

    pub fn timestamp(&self, row: usize) -> Option<i64> {
        self.timestamps.as_ref().map(|t| t[row])
    }

    /// Column names in output order.
    pub fn column_names(&self) -> Vec<&str> {
        let mut names = vec!["user", "item"];
        if self.ratings.is_some() {
            names.push("rating");
        }
        if self.timestamps.is_some() {
            names.push("timestamp");
        }
        names.extend(self.extras.iter().map(|c| c.name.as_str()));
        names
    }

    /// New table holding the given rows, in the given order.
    pub fn take(&self, rows: &[usize]) -> RatingTable {
        fn pick<T: Clone>(col: &[T], rows: &[usize]) -> Vec<T> {
            rows.iter().map(|&r| col[r].clone()).collect()
        }
        RatingTable {
            users: pick(&self.users, rows),
            items: pick(&self.items, rows),
            ratings: self.ratings.as_ref().map(|c| pick(c, rows)),
            timestamps: self.timestamps.as_ref().map(|c| pick(c, rows)),
            extras: self
                .extras
                .iter()
                .map(|c| ExtraColumn {
                    name: c.name.clone(),
                    values: pick(&c.values, rows),
                })
                .collect(),
        }
    }

    /// Concatenate tables with identical column sets.
    pub fn concat(tables: &[RatingTable]) -> Result<RatingTable> {
        let Some(first) = tables.first() else {
            return Ok(RatingTable::default());
        };
        let names = first.column_names();
        let mut out = first.clone();
        for t in &tables[1..] {
            if t.column_names() != names {
                return Err(Error::Schema(format!(
                    "cannot concatenate tables with columns {:?} and {:?}",
                    names,
                    t.column_names()
                )));
            }
            out.users.extend_from_slice(&t.users);
            out.items.extend_from_slice(&t.items);
            if let (Some(a), Some(b)) = (out.ratings.as_mut(), t.ratings.as_ref()) {
                a.extend_from_slice(b);
            }
            if let (Some(a), Some(b)) = (out.timestamps.as_mut(), t.timestamps.as_ref()) {
                a.extend_from_slice(b);
            }
            for (a, b) in out.extras.iter_mut().zip(&t.extras) {
                a.values.extend_from_slice(&b.values);
            }
        }
        Ok(out)
    }

    /// Row indices grouped by user, users in order of first appearance.
    pub fn rows_by_user(&self) -> IndexMap<&str, Vec<usize>> {
        let mut groups: IndexMap<&str, Vec<usize>> = IndexMap::new();
        for (row, u) in self.users.iter().enumerate() {
            groups.entry(u.as_str()).or_default().push(row);
        }
        groups
    }

    /// Distinct users in order of first appearance.
    pub fn distinct_users(&self) -> Vec<&str> {
        self.rows_by_user().into_keys().collect()
    }
}

pub(crate) fn is_reserved(name: &str) -> bool {
    matches!(name, "user" | "item" | "rating" | "timestamp")
}
