// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};

use indexmap::IndexMap;

use crate::data::io::{format_real, parse_real};
use crate::data::RatingTable;
use crate::error::{Error, Result};

use super::Gain;

/// One row per requested (user, item) pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTable {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub predictions: Vec<Option<f64>>,
    /// Carried from the input pairs when they had a rating column.
    pub ratings: Option<Vec<f64>>,
}

impl PredictionTable {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["user", "item", "prediction"];
        if self.ratings.is_some() {
            header.push("rating");
        }
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![
                self.users[k].clone(),
                self.items[k].clone(),
                format_real(self.predictions[k]),
            ];
            if let Some(r) = &self.ratings {
                row.push(format_real(Some(r[k])));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(u), Some(i), Some(p)) = (col("user"), col("item"), col("prediction")) else {
            return Err(Error::Schema(
                "prediction file needs user, item and prediction columns".into(),
            ));
        };
        let r = col("rating");
        let mut out = PredictionTable {
            ratings: r.map(|_| Vec::new()),
            ..Default::default()
        };
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = n as u64 + 2;
            out.users.push(rec[u].to_owned());
            out.items.push(rec[i].to_owned());
            out.predictions.push(parse_real(&rec[p], line)?);
            if let (Some(r), Some(rs)) = (r, out.ratings.as_mut()) {
                let v = parse_real(&rec[r], line)?
                    .ok_or_else(|| Error::Parse { line, message: "missing rating".into() })?;
                rs.push(v);
            }
        }
        Ok(out)
    }
}

/// One recommended item.
#[derive(Debug, Clone, PartialEq)]
pub struct RecRow {
    /// Values of the grouping columns, parallel to [`RecList::group_names`].
    pub group: Vec<String>,
    pub user: String,
    pub item: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Ranked recommendation lists, optionally tagged with grouping columns
/// such as algorithm or fold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecList {
    pub group_names: Vec<String>,
    pub rows: Vec<RecRow>,
}

impl RecList {
    pub fn new(group_names: Vec<String>) -> Self {
        RecList {
            group_names,
            rows: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Prepend a constant grouping column.
    pub fn with_group(mut self, name: &str, value: &str) -> Self {
        self.group_names.insert(0, name.to_owned());
        for r in &mut self.rows {
            r.group.insert(0, value.to_owned());
        }
        self
    }

    /// Stack lists that share grouping columns.
    pub fn concat(lists: impl IntoIterator<Item = RecList>) -> Result<RecList> {
        let mut iter = lists.into_iter();
        let Some(mut out) = iter.next() else {
            return Ok(RecList::default());
        };
        for l in iter {
            if l.group_names != out.group_names {
                return Err(Error::Schema(format!(
                    "grouping columns differ: {:?} vs {:?}",
                    out.group_names, l.group_names
                )));
            }
            out.rows.extend(l.rows);
        }
        Ok(out)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.group_names.iter().map(String::as_str).collect();
        header.extend(["user", "item", "score", "rank"]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut row = r.group.clone();
            row.extend([
                r.user.clone(),
                r.item.clone(),
                format_real(Some(r.score)),
                r.rank.to_string(),
            ]);
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Read a list file; columns other than user, item, score and rank
    /// become grouping columns.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(u), Some(i), Some(rk)) = (col("user"), col("item"), col("rank")) else {
            return Err(Error::Schema(
                "recommendation file needs user, item and rank columns".into(),
            ));
        };
        let s = col("score");
        let group_cols: Vec<usize> = (0..headers.len())
            .filter(|c| ![Some(u), Some(i), Some(rk), s].contains(&Some(*c)))
            .collect();
        let mut out = RecList::new(group_cols.iter().map(|&c| headers[c].to_owned()).collect());
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = n as u64 + 2;
            let rank = rec[rk].trim().parse::<usize>().ok().filter(|&r| r >= 1).ok_or_else(|| {
                Error::Parse {
                    line,
                    message: format!("invalid rank {:?}", &rec[rk]),
                }
            })?;
            let score = match s {
                Some(s) => parse_real(&rec[s], line)?.unwrap_or(f64::NAN),
                None => f64::NAN,
            };
            out.rows.push(RecRow {
                group: group_cols.iter().map(|&c| rec[c].to_owned()).collect(),
                user: rec[u].to_owned(),
                item: rec[i].to_owned(),
                score,
                rank,
            });
        }
        Ok(out)
    }
}

/// Relevant items of one user with their relevance values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserTruth {
    items: IndexMap<String, f64>,
}

impl UserTruth {
    pub fn insert(&mut self, item: impl Into<String>, relevance: f64) {
        self.items.insert(item.into(), relevance);
    }

    pub fn contains(&self, item: &str) -> bool {
        self.items.contains_key(item)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn relevance(&self, item: &str) -> Option<f64> {
        self.items.get(item).copied()
    }

    pub fn gain(&self, item: &str, gain: Gain) -> Option<f64> {
        let r = self.relevance(item)?;
        Some(match gain {
            Gain::Binary => 1.0,
            Gain::Rating => r,
        })
    }
}

impl FromIterator<(String, f64)> for UserTruth {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        UserTruth {
            items: iter.into_iter().collect(),
        }
    }
}

/// Test data keyed by user.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TruthTable {
    users: IndexMap<String, UserTruth>,
}

impl TruthTable {
    /// Relevance is the rating, or 1 for rating-less rows. Rows whose
    /// relevance falls below `min_rating` are not relevant.
    pub fn from_ratings(ratings: &RatingTable, min_rating: Option<f64>) -> Self {
        let mut users: IndexMap<String, UserTruth> = IndexMap::new();
        for k in 0..ratings.len() {
            let rel = ratings.rating(k).unwrap_or(1.0);
            if min_rating.is_some_and(|m| rel < m) {
                continue;
            }
            users
                .entry(ratings.user(k).to_owned())
                .or_default()
                .insert(ratings.item(k), rel);
        }
        TruthTable { users }
    }

    pub fn get(&self, user: &str) -> Option<&UserTruth> {
        self.users.get(user)
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.users.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}
