// SPDX-License-Identifier: Apache-2.0

//! Batch prediction and recommendation, parallel over users.
//!
//! Each user is scored in isolation against a shared read-only model and
//! results are assembled in input order, so output does not depend on the
//! worker count.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::Algorithm;
use crate::data::RatingTable;
use crate::error::{Error, Result};
use crate::metrics::{PredictionTable, RecList, RecRow};

/// Number of cores, or 1 if that cannot be determined.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Map `f` over `inputs` on `workers` threads (0 means all cores),
/// returning results in input order.
fn run_parallel<T, R, F>(inputs: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let workers = if workers == 0 { default_workers() } else { workers };
    if workers == 1 {
        return inputs.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| inputs.par_iter().map(f).collect())
}

/// Predict every (user, item) pair of `pairs`.
///
/// Output rows follow input order. A rating column in the input is carried
/// through unchanged.
pub fn batch_predict(algo: &dyn Algorithm, pairs: &RatingTable, workers: usize) -> Result<PredictionTable> {
    let predictor = algo.as_predictor().ok_or_else(|| {
        Error::Parameter(format!("{} cannot predict ratings", algo.name()))
    })?;
    if !algo.is_fitted() {
        return Err(Error::NotFitted);
    }
    let groups: Vec<(&str, Vec<usize>)> = pairs.rows_by_user().into_iter().collect();
    let scored = run_parallel(&groups, workers, |(user, rows)| {
        let items: Vec<String> = rows.iter().map(|&r| pairs.item(r).to_owned()).collect();
        predictor.predict_for_user(user, &items, None)
    })?;
    let mut predictions = vec![None; pairs.len()];
    for ((_, rows), preds) in groups.iter().zip(scored) {
        for (&r, p) in rows.iter().zip(preds) {
            predictions[r] = p;
        }
    }
    Ok(PredictionTable {
        users: pairs.users().to_vec(),
        items: pairs.items().to_vec(),
        predictions,
        ratings: pairs.ratings().map(<[f64]>::to_vec),
    })
}

/// Run metadata for a batch recommendation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendManifest {
    pub algorithm: String,
    pub n: Option<usize>,
    pub users: usize,
    pub rows: usize,
    /// Users whose list came back empty.
    pub empty_users: Vec<String>,
}

/// Recommend up to `n` items to each user, in the order given.
///
/// With `candidates`, each user ranks only their own candidate list; users
/// absent from the map get an empty list.
pub fn batch_recommend(
    algo: &dyn Algorithm,
    users: &[String],
    n: Option<usize>,
    candidates: Option<&IndexMap<String, Vec<String>>>,
    workers: usize,
) -> Result<(RecList, RecommendManifest)> {
    let rec = algo.as_recommender().ok_or_else(|| {
        Error::Parameter(format!("{} cannot recommend; adapt it first", algo.name()))
    })?;
    if !algo.is_fitted() {
        return Err(Error::NotFitted);
    }
    let lists = run_parallel(users, workers, |user| {
        let cands = candidates.map(|c| c.get(user).map_or(&[][..], Vec::as_slice));
        rec.recommend(user, n, cands, None)
    })?;
    let mut out = RecList::new(Vec::new());
    let mut empty_users = Vec::new();
    for (user, list) in users.iter().zip(lists) {
        if list.is_empty() {
            empty_users.push(user.clone());
        }
        out.rows.extend(list.into_iter().enumerate().map(|(k, s)| RecRow {
            group: Vec::new(),
            user: user.clone(),
            item: s.item,
            score: s.score,
            rank: k + 1,
        }));
    }
    let manifest = RecommendManifest {
        algorithm: algo.name().to_owned(),
        n,
        users: users.len(),
        rows: out.len(),
        empty_users,
    };
    Ok((out, manifest))
}
