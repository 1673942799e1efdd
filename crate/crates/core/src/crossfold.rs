// SPDX-License-Identifier: Apache-2.0

//! Train/test splitting oriented around test users.
//!
//! Every splitter is a pure function of its inputs and seed. Within each
//! output table rows keep their input order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::data::{Index, RatingTable};
use crate::error::{Error, Result};
use crate::rng;

/// Rule choosing which of a test user's rows become test data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum RowSelector {
    /// `n` rows drawn uniformly without replacement.
    SampleN(usize),
    /// A fraction of the user's rows, drawn uniformly.
    SampleFrac(f64),
    /// The `n` most recent rows.
    LastN(usize),
    /// The most recent fraction of the user's rows.
    LastFrac(f64),
}

impl RowSelector {
    fn validate(&self, ratings: &RatingTable) -> Result<()> {
        match *self {
            RowSelector::SampleN(0) | RowSelector::LastN(0) => {
                return Err(Error::Parameter("selector count must be positive".into()))
            }
            RowSelector::SampleFrac(f) | RowSelector::LastFrac(f) if !(f > 0.0 && f < 1.0) => {
                return Err(Error::Parameter(format!(
                    "selector fraction {f} must lie in (0, 1)"
                )))
            }
            _ => {}
        }
        if self.uses_timestamps() && !ratings.has_timestamps() {
            return Err(Error::Schema(format!(
                "selector {self} requires a timestamp column"
            )));
        }
        Ok(())
    }

    pub fn uses_timestamps(&self) -> bool {
        matches!(self, RowSelector::LastN(_) | RowSelector::LastFrac(_))
    }

    /// Number of test rows taken from a user with `n_rows` rows.
    ///
    /// Fractions round to nearest with a minimum of one row.
    pub fn test_count(&self, n_rows: usize) -> usize {
        match *self {
            RowSelector::SampleN(n) | RowSelector::LastN(n) => n,
            RowSelector::SampleFrac(f) | RowSelector::LastFrac(f) => {
                ((f * n_rows as f64).round() as usize).max(1)
            }
        }
    }

    /// A user is eligible for testing only if at least one row stays in training.
    pub fn is_eligible(&self, n_rows: usize) -> bool {
        self.test_count(n_rows) < n_rows
    }

    /// Pick test rows among `rows` (one user's rows). Returned ascending.
    fn select(&self, ratings: &RatingTable, rows: &[usize], rng: &mut rng::Rng) -> Vec<usize> {
        let count = self.test_count(rows.len()).min(rows.len());
        let mut picked: Vec<usize> = if self.uses_timestamps() {
            let ts = ratings.timestamps().expect("validated");
            let mut order = rows.to_vec();
            // stable, so later input rows count as more recent among ties
            order.sort_by_key(|&r| ts[r]);
            order[rows.len() - count..].to_vec()
        } else {
            index::sample(rng, rows.len(), count)
                .into_iter()
                .map(|k| rows[k])
                .collect()
        };
        picked.sort_unstable();
        picked
    }
}

impl fmt::Display for RowSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowSelector::SampleN(n) => write!(f, "n:{n}"),
            RowSelector::SampleFrac(x) => write!(f, "frac:{x}"),
            RowSelector::LastN(n) => write!(f, "last-n:{n}"),
            RowSelector::LastFrac(x) => write!(f, "last-frac:{x}"),
        }
    }
}

impl FromStr for RowSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("invalid row selector {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "n" => Ok(RowSelector::SampleN(value.trim().parse().map_err(|_| bad())?)),
            "frac" => Ok(RowSelector::SampleFrac(value.trim().parse().map_err(|_| bad())?)),
            "last-n" => Ok(RowSelector::LastN(value.trim().parse().map_err(|_| bad())?)),
            "last-frac" => Ok(RowSelector::LastFrac(value.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// One fold of a split.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTestPair {
    pub train: RatingTable,
    pub test: RatingTable,
    pub fold_index: usize,
    pub seed: u64,
}

/// Sizes of `k` near-equal consecutive chunks of `n` elements; the first
/// `n mod k` chunks get one extra element.
pub fn chunk_sizes(n: usize, k: usize) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    (0..k).map(|j| base + usize::from(j < extra)).collect()
}

fn split_chunks<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for size in chunk_sizes(items.len(), k) {
        out.push(items[start..start + size].to_vec());
        start += size;
    }
    out
}

fn complement(n: usize, test_rows: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &r in test_rows {
        mask[r] = true;
    }
    (0..n).filter(|&r| !mask[r]).collect()
}

fn pair_from_rows(ratings: &RatingTable, mut test_rows: Vec<usize>, fold: usize, seed: u64) -> TrainTestPair {
    test_rows.sort_unstable();
    let train_rows = complement(ratings.len(), &test_rows);
    TrainTestPair {
        train: ratings.take(&train_rows),
        test: ratings.take(&test_rows),
        fold_index: fold,
        seed,
    }
}

/// Users with enough rows to be test users, shuffled by `rng`.
fn eligible_users<'a>(
    groups: &IndexMap<&'a str, Vec<usize>>,
    select: &RowSelector,
    rng: &mut rng::Rng,
) -> Vec<&'a str> {
    let mut users: Vec<&str> = groups
        .iter()
        .filter(|(_, rows)| select.is_eligible(rows.len()))
        .map(|(u, _)| *u)
        .collect();
    users.shuffle(rng);
    users
}

fn user_folds(
    ratings: &RatingTable,
    groups: &IndexMap<&str, Vec<usize>>,
    user_sets: Vec<Vec<&str>>,
    select: &RowSelector,
    rng: &mut rng::Rng,
    seed: u64,
) -> Vec<TrainTestPair> {
    user_sets
        .into_iter()
        .enumerate()
        .map(|(fold, users)| {
            let mut test_rows = Vec::new();
            for u in users {
                test_rows.extend(select.select(ratings, &groups[u], rng));
            }
            pair_from_rows(ratings, test_rows, fold, seed)
        })
        .collect()
}

/// Partition users into `k` disjoint test-user sets.
///
/// For fold `j`, the selector picks test rows from each user in set `j`;
/// training holds their remaining rows plus all rows of other users. Users
/// with too few rows to keep any training history are never test users.
pub fn partition_users(
    ratings: &RatingTable,
    k: usize,
    select: RowSelector,
    seed: u64,
) -> Result<Vec<TrainTestPair>> {
    if k < 2 {
        return Err(Error::Parameter(format!("partition count must be at least 2, got {k}")));
    }
    select.validate(ratings)?;
    let groups = ratings.rows_by_user();
    let mut rng = rng::seeded(seed);
    let users = eligible_users(&groups, &select, &mut rng);
    if k > users.len() {
        return Err(Error::InfeasibleSplit(format!(
            "cannot partition {} eligible users into {k} folds",
            users.len()
        )));
    }
    let sets = split_chunks(&users, k);
    Ok(user_folds(ratings, &groups, sets, &select, &mut rng, seed))
}

/// Draw `k` disjoint samples of `size` test users each.
pub fn sample_users(
    ratings: &RatingTable,
    k: usize,
    size: usize,
    select: RowSelector,
    seed: u64,
) -> Result<Vec<TrainTestPair>> {
    if k == 0 || size == 0 {
        return Err(Error::Parameter("sample count and size must be positive".into()));
    }
    select.validate(ratings)?;
    let groups = ratings.rows_by_user();
    let mut rng = rng::seeded(seed);
    let users = eligible_users(&groups, &select, &mut rng);
    if k * size > users.len() {
        return Err(Error::InfeasibleSplit(format!(
            "need {} eligible users for {k} samples of {size}, have {}",
            k * size,
            users.len()
        )));
    }
    let sets = users.chunks(size).take(k).map(<[_]>::to_vec).collect();
    Ok(user_folds(ratings, &groups, sets, &select, &mut rng, seed))
}

/// Partition rows into `k` near-equal disjoint test sets.
pub fn partition_rows(ratings: &RatingTable, k: usize, seed: u64) -> Result<Vec<TrainTestPair>> {
    if k < 2 {
        return Err(Error::Parameter(format!("partition count must be at least 2, got {k}")));
    }
    if ratings.len() < k {
        return Err(Error::InfeasibleSplit(format!(
            "cannot partition {} rows into {k} folds",
            ratings.len()
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut rows: Vec<usize> = (0..ratings.len()).collect();
    rows.shuffle(&mut rng);
    Ok(split_chunks(&rows, k)
        .into_iter()
        .enumerate()
        .map(|(fold, test)| pair_from_rows(ratings, test, fold, seed))
        .collect())
}

/// Draw `k` test samples of `size` rows, disjoint across folds iff `disjoint`.
pub fn sample_rows(
    ratings: &RatingTable,
    k: usize,
    size: usize,
    seed: u64,
    disjoint: bool,
) -> Result<Vec<TrainTestPair>> {
    if k == 0 || size == 0 {
        return Err(Error::Parameter("sample count and size must be positive".into()));
    }
    let n = ratings.len();
    let needed = if disjoint { k * size } else { size };
    if needed > n {
        return Err(Error::InfeasibleSplit(format!(
            "need {needed} rows for {k} samples of {size}, have {n}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let samples: Vec<Vec<usize>> = if disjoint {
        index::sample(&mut rng, n, k * size)
            .into_vec()
            .chunks(size)
            .map(<[_]>::to_vec)
            .collect()
    } else {
        (0..k)
            .map(|_| index::sample(&mut rng, n, size).into_vec())
            .collect()
    };
    Ok(samples
        .into_iter()
        .enumerate()
        .map(|(fold, test)| pair_from_rows(ratings, test, fold, seed))
        .collect())
}

/// Candidate items per test user: their test items followed by
/// `n_negatives` items sampled uniformly from the universe items the user
/// has not rated in either `train` or `test`.
pub fn select_item_candidates(
    test: &RatingTable,
    train: &RatingTable,
    n_negatives: usize,
    universe: &Index,
    seed: u64,
) -> Result<IndexMap<String, Vec<String>>> {
    let mut rated: IndexMap<&str, HashSet<&str>> = IndexMap::new();
    for t in [train, test] {
        for (u, i) in t.users().iter().zip(t.items()) {
            rated.entry(u.as_str()).or_default().insert(i.as_str());
        }
    }
    let mut out = IndexMap::new();
    let mut rng = rng::seeded(seed);
    for (user, rows) in test.rows_by_user() {
        let seen = &rated[user];
        let mut candidates: Vec<String> = Vec::new();
        for &r in &rows {
            let item = test.item(r);
            if !candidates.iter().any(|c| c == item) {
                candidates.push(item.to_owned());
            }
        }
        let pool: Vec<&str> = universe.ids().filter(|i| !seen.contains(i)).collect();
        if n_negatives > pool.len() {
            return Err(Error::InfeasibleSplit(format!(
                "user {user} has only {} unrated items, {n_negatives} negatives requested",
                pool.len()
            )));
        }
        let mut picks = index::sample(&mut rng, pool.len(), n_negatives).into_vec();
        picks.sort_unstable();
        candidates.extend(picks.into_iter().map(|k| pool[k].to_owned()));
        out.insert(user.to_owned(), candidates);
    }
    Ok(out)
}
