// SPDX-License-Identifier: Apache-2.0

//! The algorithm interfaces and the top-N adapter.
//!
//! Every algorithm implements [`Algorithm`]. Rating predictors and scorers
//! additionally implement [`Predictor`]; algorithms that can produce ranked
//! lists implement [`Recommender`]. [`adapt`] turns any predictor into a
//! recommender by ranking the items a [`CandidateSelector`] proposes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::data::{Dataset, Index, RatingTable};
use crate::error::{Error, Result};
use crate::persist::ModelPayload;

/// Ratings supplied at query time for a user, as `(item, rating)` pairs.
pub type FreshRatings = [(String, f64)];

/// Extra named arguments to [`Algorithm::fit`]. The built-in algorithms
/// ignore them; wrappers forward them to the algorithms they wrap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitArgs(pub BTreeMap<String, String>);

/// A recommended item and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub item: String,
    pub score: f64,
}

impl Scored {
    pub fn new(item: impl Into<String>, score: f64) -> Self {
        Scored {
            item: item.into(),
            score,
        }
    }
}

pub trait Algorithm: Send + Sync {
    /// Registry name, also written into persisted models.
    fn name(&self) -> &'static str;

    /// Estimate parameters from `ratings`, replacing any earlier state.
    fn fit(&mut self, ratings: &RatingTable, args: &FitArgs) -> Result<()>;

    fn is_fitted(&self) -> bool;

    fn as_predictor(&self) -> Option<&dyn Predictor> {
        None
    }

    fn as_recommender(&self) -> Option<&dyn Recommender> {
        None
    }

    /// Serialize the fitted state.
    fn to_payload(&self) -> Result<ModelPayload>;
}

pub trait Predictor: Send + Sync {
    /// One score per requested item, `None` where the item cannot be scored.
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>>;
}

pub trait Recommender: Send + Sync {
    /// Ranked list, best first, at most `n` long when `n` is given. When
    /// `candidates` is given, only those items are considered.
    fn recommend(
        &self,
        user: &str,
        n: Option<usize>,
        candidates: Option<&[String]>,
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Scored>>;
}

pub trait CandidateSelector: Send + Sync {
    /// Items to rank for `user` when the caller supplies none, in item-index order.
    fn candidates(&self, user: &str, fresh: Option<&FreshRatings>) -> Vec<String>;

    /// Item index used to break score ties.
    fn item_index(&self, item: &str) -> Option<usize>;
}

/// Sort `(tie_key, item, score)` by descending score then ascending tie key
/// and keep the first `n`.
pub(crate) fn rank(mut scored: Vec<(usize, String, f64)>, n: Option<usize>) -> Vec<Scored> {
    let cmp = |a: &(usize, String, f64), b: &(usize, String, f64)| -> Ordering {
        b.2.total_cmp(&a.2).then(a.0.cmp(&b.0))
    };
    match n {
        Some(n) if n < scored.len() => {
            if n == 0 {
                return Vec::new();
            }
            scored.select_nth_unstable_by(n - 1, cmp);
            scored.truncate(n);
        }
        _ => {}
    }
    scored.sort_unstable_by(cmp);
    scored
        .into_iter()
        .map(|(_, item, score)| Scored { item, score })
        .collect()
}

/// Tie-break keys for `items`: the training item index, with unknown items
/// after all known ones in the order given.
pub(crate) fn tie_keys(selector: &dyn CandidateSelector, items: &[String]) -> Vec<usize> {
    items
        .iter()
        .enumerate()
        .map(|(pos, item)| match selector.item_index(item) {
            Some(k) => k,
            None => usize::MAX / 2 + pos,
        })
        .collect()
}

/// Score `candidates` (or the selector's candidates) with `scorer`, drop
/// missing scores and return the top `n`, ties broken by item index.
pub fn topn_recommend(
    scorer: &dyn Predictor,
    selector: &dyn CandidateSelector,
    user: &str,
    n: Option<usize>,
    candidates: Option<&[String]>,
    fresh: Option<&FreshRatings>,
) -> Result<Vec<Scored>> {
    let owned;
    let items = match candidates {
        Some(c) => c,
        None => {
            owned = selector.candidates(user, fresh);
            &owned
        }
    };
    let scores = scorer.predict_for_user(user, items, fresh)?;
    let keys = tie_keys(selector, items);
    let scored = items
        .iter()
        .zip(scores)
        .zip(keys)
        .filter_map(|((item, s), key)| s.filter(|v| !v.is_nan()).map(|v| (key, item.clone(), v)))
        .collect();
    Ok(rank(scored, n))
}

/// Candidate selector returning the items a user has not rated in training.
///
/// Items in fresh ratings are removed as well. Unknown users get every item.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UnratedItems {
    users: Index,
    items: Index,
    // per-user rated item indices, sorted
    row_ptr: Vec<usize>,
    rated: Vec<u32>,
}

impl UnratedItems {
    pub fn from_dataset(data: &Dataset) -> Self {
        UnratedItems {
            users: data.users.clone(),
            items: data.items.clone(),
            row_ptr: data.by_user.row_ptr().to_vec(),
            rated: data.by_user.col_idx().to_vec(),
        }
    }

    pub fn items(&self) -> &Index {
        &self.items
    }

    pub fn rated_by(&self, user: usize) -> &[u32] {
        &self.rated[self.row_ptr[user]..self.row_ptr[user + 1]]
    }

    pub(crate) fn write_payload(&self, prefix: &str, payload: &mut ModelPayload) {
        payload.push_strs(format!("{prefix}users"), self.users.ids().map(str::to_owned).collect());
        payload.push_strs(format!("{prefix}items"), self.items.ids().map(str::to_owned).collect());
        payload.push_usizes(format!("{prefix}row_ptr"), &self.row_ptr);
        payload.push_u64s(
            format!("{prefix}rated"),
            self.rated.iter().map(|&c| c as u64).collect(),
        );
    }

    pub(crate) fn read_payload(prefix: &str, payload: &ModelPayload) -> Result<Self> {
        let users: Index = payload.strs(&format!("{prefix}users"))?.iter().cloned().collect();
        let items: Index = payload.strs(&format!("{prefix}items"))?.iter().cloned().collect();
        let row_ptr = payload.usizes(&format!("{prefix}row_ptr"))?;
        let rated: Vec<u32> = payload
            .u64s(&format!("{prefix}rated"))?
            .iter()
            .map(|&c| c as u32)
            .collect();
        if row_ptr.len() != users.len() + 1
            || row_ptr.last().copied() != Some(rated.len())
            || rated.iter().any(|&c| c as usize >= items.len())
        {
            return Err(Error::Format("inconsistent candidate selector arrays".into()));
        }
        Ok(UnratedItems {
            users,
            items,
            row_ptr,
            rated,
        })
    }
}

impl CandidateSelector for UnratedItems {
    fn candidates(&self, user: &str, fresh: Option<&FreshRatings>) -> Vec<String> {
        let mut exclude = vec![false; self.items.len()];
        if let Some(u) = self.users.index_of(user) {
            for &i in self.rated_by(u) {
                exclude[i as usize] = true;
            }
        }
        if let Some(fresh) = fresh {
            for (item, _) in fresh {
                if let Some(i) = self.items.index_of(item) {
                    exclude[i] = true;
                }
            }
        }
        self.items
            .ids()
            .zip(exclude)
            .filter(|(_, x)| !x)
            .map(|(id, _)| id.to_owned())
            .collect()
    }

    fn item_index(&self, item: &str) -> Option<usize> {
        self.items.index_of(item)
    }
}

/// Wraps a predictor to recommend its highest-scoring unrated items.
pub struct TopN {
    inner: Box<dyn Algorithm>,
    selector: Option<UnratedItems>,
}

impl TopN {
    pub fn new(inner: Box<dyn Algorithm>) -> Self {
        TopN {
            inner,
            selector: None,
        }
    }

    pub(crate) fn from_parts(inner: Box<dyn Algorithm>, selector: UnratedItems) -> Self {
        TopN {
            inner,
            selector: Some(selector),
        }
    }

    pub fn inner(&self) -> &dyn Algorithm {
        self.inner.as_ref()
    }

    pub fn selector(&self) -> Option<&UnratedItems> {
        self.selector.as_ref()
    }

    fn scorer(&self) -> Result<&dyn Predictor> {
        self.inner.as_predictor().ok_or_else(|| {
            Error::Parameter(format!("{} cannot score items", self.inner.name()))
        })
    }
}

impl Algorithm for TopN {
    fn name(&self) -> &'static str {
        "topn"
    }

    fn fit(&mut self, ratings: &RatingTable, args: &FitArgs) -> Result<()> {
        self.scorer()?;
        self.inner.fit(ratings, args)?;
        self.selector = Some(UnratedItems::from_dataset(&Dataset::build(ratings)?));
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.selector.is_some() && self.inner.is_fitted()
    }

    fn as_predictor(&self) -> Option<&dyn Predictor> {
        self.inner.as_predictor()
    }

    fn as_recommender(&self) -> Option<&dyn Recommender> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let selector = self.selector.as_ref().ok_or(Error::NotFitted)?;
        let mut payload = ModelPayload::wrapping("topn", self.inner.to_payload()?);
        selector.write_payload("selector.", &mut payload);
        Ok(payload)
    }
}

impl Recommender for TopN {
    fn recommend(
        &self,
        user: &str,
        n: Option<usize>,
        candidates: Option<&[String]>,
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Scored>> {
        let selector = self.selector.as_ref().ok_or(Error::NotFitted)?;
        topn_recommend(self.scorer()?, selector, user, n, candidates, fresh)
    }
}

/// Make `algo` able to recommend. Recommenders come back unchanged;
/// predictors are wrapped in [`TopN`] with the [`UnratedItems`] selector.
pub fn adapt(algo: Box<dyn Algorithm>) -> Box<dyn Algorithm> {
    if algo.as_recommender().is_some() {
        algo
    } else {
        Box::new(TopN::new(algo))
    }
}

/// Primary scores where present, fallback scores elsewhere.
pub fn fallback_predict(
    primary: &dyn Predictor,
    fallback: &dyn Predictor,
    user: &str,
    items: &[String],
    fresh: Option<&FreshRatings>,
) -> Result<Vec<Option<f64>>> {
    let mut scores = primary.predict_for_user(user, items, fresh)?;
    let missing: Vec<usize> = (0..items.len()).filter(|&k| scores[k].is_none()).collect();
    if missing.is_empty() {
        return Ok(scores);
    }
    let sub: Vec<String> = missing.iter().map(|&k| items[k].clone()).collect();
    let backup = fallback.predict_for_user(user, &sub, fresh)?;
    for (k, s) in missing.into_iter().zip(backup) {
        scores[k] = s;
    }
    Ok(scores)
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn selector_over(items: &[&str], rated: &[(&str, &str)]) -> UnratedItems {
        let mut rows: Vec<(String, String)> = rated
            .iter()
            .map(|(u, i)| (u.to_string(), i.to_string()))
            .collect();
        // make sure every item is in the universe
        for i in items {
            rows.push(("__all".into(), i.to_string()));
        }
        rows.sort_by_key(|(u, _)| u == "__all");
        let mut t = RatingTable::from_pairs(rows.iter().map(|(u, i)| (u.clone(), i.clone())));
        // universe order follows `items`
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..t.len()).collect();
            idx.sort_by_key(|&r| items.iter().position(|i| *i == t.item(r)).unwrap());
            idx
        };
        t = t.take(&order);
        UnratedItems::from_dataset(&Dataset::build(&t).unwrap())
    }

    #[test]
    fn topn_orders_by_score() {
        let scorer = FixedScores::new(&[("a", 3.0), ("b", 5.0), ("c", 4.0)]);
        let sel = selector_over(&["a", "b", "c"], &[]);
        let recs = topn_recommend(&scorer, &sel, "u", Some(2), None, None).unwrap();
        assert_eq!(recs, vec![Scored::new("b", 5.0), Scored::new("c", 4.0)]);
        let all = topn_recommend(&scorer, &sel, "u", Some(10), None, None).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn topn_drops_missing() {
        let scorer = FixedScores::new(&[]);
        let sel = selector_over(&["a", "b"], &[]);
        assert!(topn_recommend(&scorer, &sel, "u", Some(2), None, None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn topn_ties_break_by_item_index() {
        let scorer = FixedScores::new(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]);
        let sel = selector_over(&["c", "a", "b"], &[]);
        let recs = topn_recommend(&scorer, &sel, "u", None, None, None).unwrap();
        let items: Vec<_> = recs.iter().map(|s| s.item.as_str()).collect();
        assert_eq!(items, ["c", "a", "b"]);
    }

    #[test]
    fn unrated_candidates() {
        let items: Vec<String> = (0..10).map(|k| format!("i{k}")).collect();
        let names: Vec<&str> = items.iter().map(String::as_str).collect();
        let sel = selector_over(&names, &[("u", "i1"), ("u", "i4"), ("u", "i7")]);
        assert_eq!(sel.candidates("u", None).len(), 7);
        assert!(!sel.candidates("u", None).contains(&"i4".to_string()));
        assert_eq!(sel.candidates("stranger", None).len(), 10);
        let fresh = vec![("i0".to_string(), 3.0)];
        assert_eq!(sel.candidates("u", Some(&fresh)).len(), 6);

        let all: Vec<(&str, &str)> = names.iter().map(|i| ("v", *i)).collect();
        let sel = selector_over(&names, &all);
        assert!(sel.candidates("v", None).is_empty());
    }

    #[test]
    fn fallback_fills_holes() {
        let primary = FixedScores::new(&[("a", 2.0)]);
        let backup = FixedScores::new(&[("a", 9.0), ("b", 3.0)]);
        let items = strings(&["a", "b"]);
        let s = fallback_predict(&primary, &backup, "u", &items, None).unwrap();
        assert_eq!(s, [Some(2.0), Some(3.0)]);

        let full = FixedScores::new(&[("a", 1.0), ("b", 1.5)]);
        assert_eq!(
            fallback_predict(&full, &backup, "u", &items, None).unwrap(),
            [Some(1.0), Some(1.5)]
        );
        let empty = FixedScores::new(&[]);
        assert_eq!(
            fallback_predict(&empty, &backup, "u", &items, None).unwrap(),
            [Some(9.0), Some(3.0)]
        );
    }

    fn score_table() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(1.0), Just(2.0), -10.0f64..10.0], 1..30)
    }

    proptest! {
        #[test]
        fn prefix_property(scores in score_table(), n in 0usize..30) {
            let names: Vec<String> = (0..scores.len()).map(|k| format!("i{k}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let sel = selector_over(&refs, &[]);
            let scorer = FixedScores(names.iter().cloned().zip(scores.iter().copied()).collect::<HashMap<_, _>>());
            let short = topn_recommend(&scorer, &sel, "u", Some(n), None, None).unwrap();
            let long = topn_recommend(&scorer, &sel, "u", Some(n + 3), None, None).unwrap();
            prop_assert!(short.len() <= n);
            prop_assert_eq!(&long[..short.len()], &short[..]);
            prop_assert!(long.windows(2).all(|w| w[0].score >= w[1].score));
        }

        #[test]
        fn monotone_transform_keeps_order(scores in score_table(), n in 1usize..30) {
            let names: Vec<String> = (0..scores.len()).map(|k| format!("i{k}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let sel = selector_over(&refs, &[]);
            let raw = FixedScores(names.iter().cloned().zip(scores.iter().copied()).collect());
            let warped = FixedScores(names.iter().cloned().zip(scores.iter().map(|s| (s / 3.0).exp() + 7.0)).collect());
            let a: Vec<String> = topn_recommend(&raw, &sel, "u", Some(n), None, None).unwrap().into_iter().map(|s| s.item).collect();
            let b: Vec<String> = topn_recommend(&warped, &sel, "u", Some(n), None, None).unwrap().into_iter().map(|s| s.item).collect();
            prop_assert_eq!(a, b);
        }
    }
}
