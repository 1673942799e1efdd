// SPDX-License-Identifier: Apache-2.0

//! Non-personalized baselines: damped user-item bias, popularity and random.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::algo::{
    rank, Algorithm, CandidateSelector, FitArgs, FreshRatings, Predictor, Recommender, Scored,
    UnratedItems,
};
use crate::data::{Dataset, Index, RatingTable};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::persist::{ModelPayload, Persist};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Damping {
    pub user: f64,
    pub item: f64,
}

impl Damping {
    pub fn validate(&self) -> Result<()> {
        if self.user >= 0.0 && self.item >= 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "damping must be nonnegative, got user={} item={}",
                self.user, self.item
            )))
        }
    }
}

/// Global mean plus per-user and per-item offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasModel {
    pub mean: f64,
    pub item_offsets: Vec<f64>,
    pub user_offsets: Vec<f64>,
    pub users: Index,
    pub items: Index,
}

impl BiasModel {
    /// Item offsets are estimated first, then user offsets from the
    /// item-adjusted residuals; each offset is a damped mean.
    pub fn estimate(data: &Dataset, damping: Damping) -> BiasModel {
        Self::estimate_terms(data, damping, true, true)
    }

    /// Like [`BiasModel::estimate`], with disabled offsets fixed at zero.
    pub fn estimate_terms(data: &Dataset, damping: Damping, items: bool, users: bool) -> BiasModel {
        let values = data.by_user.values();
        let mean = values.iter().sum::<f64>() / values.len() as f64;

        let item_offsets: Vec<f64> = (0..data.n_items())
            .map(|i| {
                if !items {
                    return 0.0;
                }
                let r = data.by_item.row_values(i);
                r.iter().map(|v| v - mean).sum::<f64>() / (r.len() as f64 + damping.item)
            })
            .collect();
        let user_offsets: Vec<f64> = (0..data.n_users())
            .map(|u| {
                if !users {
                    return 0.0;
                }
                let cols = data.by_user.row_cols(u);
                let vals = data.by_user.row_values(u);
                let sum: f64 = cols
                    .iter()
                    .zip(vals)
                    .map(|(&i, v)| v - mean - item_offsets[i as usize])
                    .sum();
                sum / (cols.len() as f64 + damping.user)
            })
            .collect();
        BiasModel {
            mean,
            item_offsets,
            user_offsets,
            users: data.users.clone(),
            items: data.items.clone(),
        }
    }

    /// Bias prediction from dense indices; unknown sides contribute zero.
    pub fn score_index(&self, user: Option<usize>, item: Option<usize>) -> f64 {
        self.mean
            + user.map_or(0.0, |u| self.user_offsets[u])
            + item.map_or(0.0, |i| self.item_offsets[i])
    }

    pub fn score(&self, user: &str, item: &str) -> f64 {
        self.score_index(self.users.index_of(user), self.items.index_of(item))
    }

    /// Residual of every stored rating in `data.by_user` order.
    pub fn residuals(&self, data: &Dataset) -> Vec<f64> {
        data.by_user
            .entries()
            .map(|(u, i, r)| r - self.score_index(Some(u), Some(i)))
            .collect()
    }

    pub(crate) fn write_payload(&self, prefix: &str, payload: &mut ModelPayload) {
        payload.push_f64s(format!("{prefix}mean"), vec![self.mean]);
        payload.push_f64s(format!("{prefix}item_offsets"), self.item_offsets.clone());
        payload.push_f64s(format!("{prefix}user_offsets"), self.user_offsets.clone());
        payload.push_strs(format!("{prefix}users"), self.users.ids().map(str::to_owned).collect());
        payload.push_strs(format!("{prefix}items"), self.items.ids().map(str::to_owned).collect());
    }

    pub(crate) fn read_payload(prefix: &str, payload: &ModelPayload) -> Result<Self> {
        let mean = payload.f64s(&format!("{prefix}mean"))?;
        let model = BiasModel {
            mean: *mean
                .first()
                .ok_or_else(|| Error::Format("empty mean array".into()))?,
            item_offsets: payload.f64s(&format!("{prefix}item_offsets"))?.to_vec(),
            user_offsets: payload.f64s(&format!("{prefix}user_offsets"))?.to_vec(),
            users: payload.strs(&format!("{prefix}users"))?.iter().cloned().collect(),
            items: payload.strs(&format!("{prefix}items"))?.iter().cloned().collect(),
        };
        if model.users.len() != model.user_offsets.len() || model.items.len() != model.item_offsets.len() {
            return Err(Error::Format("bias offsets do not match indexes".into()));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub damping: Damping,
    /// Estimate item offsets.
    pub items: bool,
    /// Estimate user offsets.
    pub users: bool,
}

impl Default for BiasConfig {
    fn default() -> Self {
        BiasConfig {
            damping: Damping::default(),
            items: true,
            users: true,
        }
    }
}

impl BiasConfig {
    /// Predicts the global mean only.
    pub fn global_mean() -> Self {
        BiasConfig {
            items: false,
            users: false,
            ..Default::default()
        }
    }

    pub fn from_params(mut p: Params) -> Result<Self> {
        let damping: Option<f64> = p.take_opt("damping")?;
        let cfg = BiasConfig {
            damping: Damping {
                user: p.take("user_damping", damping.unwrap_or(0.0))?,
                item: p.take("item_damping", damping.unwrap_or(0.0))?,
            },
            items: p.take("items", true)?,
            users: p.take("users", true)?,
        };
        p.finish()?;
        cfg.damping.validate()?;
        Ok(cfg)
    }
}

/// User-item bias rating predictor.
#[derive(Debug, Clone, Default)]
pub struct Bias {
    pub config: BiasConfig,
    model: Option<BiasModel>,
}

impl Bias {
    pub fn new(config: BiasConfig) -> Self {
        Bias {
            config,
            model: None,
        }
    }

    pub fn model(&self) -> Option<&BiasModel> {
        self.model.as_ref()
    }
}

impl Algorithm for Bias {
    fn name(&self) -> &'static str {
        "bias"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        self.config.damping.validate()?;
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        data.require_explicit("bias")?;
        let c = self.config;
        self.model = Some(BiasModel::estimate_terms(&data, c.damping, c.items, c.users));
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    fn as_predictor(&self) -> Option<&dyn Predictor> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let model = self.model.as_ref().ok_or(Error::NotFitted)?;
        let mut p = ModelPayload::new(self.name(), &self.config)?;
        model.write_payload("", &mut p);
        Ok(p)
    }
}

impl Persist for Bias {
    fn from_payload(payload: &ModelPayload) -> Result<Self> {
        Ok(Bias {
            config: payload.params()?,
            model: Some(BiasModel::read_payload("", payload)?),
        })
    }
}

impl Predictor for Bias {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        _fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let model = self.model.as_ref().ok_or(Error::NotFitted)?;
        let u = model.users.index_of(user);
        Ok(items
            .iter()
            .map(|i| Some(model.score_index(u, model.items.index_of(i))))
            .collect())
    }
}

pub(crate) fn no_ratings(e: Error) -> Error {
    match e {
        Error::EmptyInput(m) => Error::Fit(m),
        other => other,
    }
}

/// Recommends the most widely consumed items the user has not rated.
#[derive(Debug, Clone, Default)]
pub struct Popular {
    state: Option<PopModel>,
}

/// Number of distinct training users per item.
#[derive(Debug, Clone, PartialEq)]
pub struct PopModel {
    pub counts: Vec<u64>,
    pub selector: UnratedItems,
}

impl Popular {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn model(&self) -> Option<&PopModel> {
        self.state.as_ref()
    }
}

impl Algorithm for Popular {
    fn name(&self) -> &'static str {
        "popular"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        let counts = (0..data.n_items())
            .map(|i| data.by_item.row_nnz(i) as u64)
            .collect();
        self.state = Some(PopModel {
            counts,
            selector: UnratedItems::from_dataset(&data),
        });
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.state.is_some()
    }

    fn as_recommender(&self) -> Option<&dyn Recommender> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let state = self.state.as_ref().ok_or(Error::NotFitted)?;
        let mut p = ModelPayload::new(self.name(), &serde_json::json!({}))?;
        p.push_u64s("counts", state.counts.clone());
        state.selector.write_payload("selector.", &mut p);
        Ok(p)
    }
}

impl Persist for Popular {
    fn from_payload(payload: &ModelPayload) -> Result<Self> {
        let counts = payload.u64s("counts")?.to_vec();
        let selector = UnratedItems::read_payload("selector.", payload)?;
        if counts.len() != selector.items().len() {
            return Err(Error::Format("popularity counts do not match item index".into()));
        }
        Ok(Popular {
            state: Some(PopModel { counts, selector }),
        })
    }
}

impl Recommender for Popular {
    fn recommend(
        &self,
        user: &str,
        n: Option<usize>,
        candidates: Option<&[String]>,
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Scored>> {
        let state = self.state.as_ref().ok_or(Error::NotFitted)?;
        let owned;
        let items = match candidates {
            Some(c) => c,
            None => {
                owned = state.selector.candidates(user, fresh);
                &owned
            }
        };
        let scored = items
            .iter()
            .filter_map(|item| {
                state
                    .selector
                    .item_index(item)
                    .map(|k| (k, item.clone(), state.counts[k] as f64))
            })
            .collect();
        Ok(rank(scored, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RandomConfig {
    pub seed: u64,
}

impl RandomConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let cfg = RandomConfig {
            seed: p.take("seed", 0)?,
        };
        p.finish()?;
        Ok(cfg)
    }
}

/// Recommends a uniform random sample of candidate items.
///
/// The draw for a user depends only on the seed, the user id and the
/// candidate list, so repeated calls return the same list.
#[derive(Debug, Clone, Default)]
pub struct Random {
    pub config: RandomConfig,
    selector: Option<UnratedItems>,
}

impl Random {
    pub fn new(config: RandomConfig) -> Self {
        Random {
            config,
            selector: None,
        }
    }
}

impl Algorithm for Random {
    fn name(&self) -> &'static str {
        "random"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        self.selector = Some(UnratedItems::from_dataset(&data));
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.selector.is_some()
    }

    fn as_recommender(&self) -> Option<&dyn Recommender> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let selector = self.selector.as_ref().ok_or(Error::NotFitted)?;
        let mut p = ModelPayload::new(self.name(), &self.config)?;
        selector.write_payload("selector.", &mut p);
        Ok(p)
    }
}

impl Persist for Random {
    fn from_payload(payload: &ModelPayload) -> Result<Self> {
        Ok(Random {
            config: payload.params()?,
            selector: Some(UnratedItems::read_payload("selector.", payload)?),
        })
    }
}

impl Recommender for Random {
    fn recommend(
        &self,
        user: &str,
        n: Option<usize>,
        candidates: Option<&[String]>,
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Scored>> {
        let selector = self.selector.as_ref().ok_or(Error::NotFitted)?;
        let owned;
        let items = match candidates {
            Some(c) => c,
            None => {
                owned = selector.candidates(user, fresh);
                &owned
            }
        };
        let mut rng = rng::derived(self.config.seed, user);
        // a uniform random key per candidate; the top n keys are a uniform
        // sample without replacement
        let scored = items
            .iter()
            .enumerate()
            .map(|(pos, item)| (pos, item.clone(), rng.random::<f64>()))
            .collect();
        Ok(rank(scored, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::testing::strings;
    use std::collections::HashSet;

    fn fitted_bias(rows: &[(&str, &str, f64)], damping: Damping) -> Bias {
        let mut b = Bias::new(BiasConfig {
            damping,
            ..Default::default()
        });
        b.fit(&RatingTable::from_triples(rows.iter().copied()), &FitArgs::default())
            .unwrap();
        b
    }

    #[test]
    fn three_rating_example() {
        // averaging oracle: mu = 9/3; b_i1 = ((3-3)+(1-3))/2; b_i2 = 5-3;
        // b_u1 = ((3-3+1)+(5-3-2))/2; b_u2 = (1-3+1)/1
        let mu = (3.0 + 5.0 + 1.0) / 3.0;
        let bi1 = ((3.0 - mu) + (1.0 - mu)) / 2.0;
        let bi2 = 5.0 - mu;
        let bu1 = ((3.0 - mu - bi1) + (5.0 - mu - bi2)) / 2.0;
        let bu2 = 1.0 - mu - bi1;
        assert_eq!((mu, bi1, bi2, bu1, bu2), (3.0, -1.0, 2.0, 0.5, -1.0));

        let b = fitted_bias(
            &[("u1", "i1", 3.0), ("u1", "i2", 5.0), ("u2", "i1", 1.0)],
            Damping::default(),
        );
        let m = b.model().unwrap();
        assert_eq!(m.mean, mu);
        assert_eq!(m.item_offsets, [bi1, bi2]);
        assert_eq!(m.user_offsets, [bu1, bu2]);
        let p = b.predict_for_user("u1", &strings(&["i1"]), None).unwrap();
        assert_eq!(p, [Some(2.5)]);
    }

    #[test]
    fn global_mean_only() {
        let mut b = Bias::new(BiasConfig::global_mean());
        let rows = [("u1", "i1", 3.0), ("u1", "i2", 5.0), ("u2", "i1", 1.0)];
        b.fit(&RatingTable::from_triples(rows), &FitArgs::default()).unwrap();
        let p = b.predict_for_user("u1", &strings(&["i1", "i2", "x"]), None).unwrap();
        assert_eq!(p, [Some(3.0); 3]);
        let cfg = BiasConfig::from_params(Params::new("bias").with("items", false).with("users", false)).unwrap();
        assert_eq!(cfg, BiasConfig::global_mean());
    }

    #[test]
    fn single_rating() {
        let b = fitted_bias(&[("u", "i", 4.0)], Damping::default());
        let m = b.model().unwrap();
        assert_eq!((m.mean, m.item_offsets[0], m.user_offsets[0]), (4.0, 0.0, 0.0));
        assert_eq!(b.predict_for_user("u", &strings(&["i"]), None).unwrap(), [Some(4.0)]);
    }

    #[test]
    fn unknown_sides_fall_back() {
        let b = fitted_bias(
            &[("u1", "i1", 3.0), ("u1", "i2", 5.0), ("u2", "i1", 1.0)],
            Damping::default(),
        );
        let p = b
            .predict_for_user("ghost", &strings(&["i2", "nope"]), None)
            .unwrap();
        assert_eq!(p, [Some(3.0 + 2.0), Some(3.0)]);
        let p = b.predict_for_user("u1", &strings(&["nope"]), None).unwrap();
        assert_eq!(p, [Some(3.5)]);
    }

    #[test]
    fn heavy_damping_shrinks_offsets() {
        let rows = [("u1", "i1", 5.0), ("u2", "i1", 4.0), ("u2", "i2", 1.0)];
        let mut last = f64::INFINITY;
        for d in [0.0, 10.0, 1e3, 1e9] {
            let b = fitted_bias(&rows, Damping { user: 0.0, item: d });
            let size: f64 = b.model().unwrap().item_offsets.iter().map(|x| x.abs()).sum();
            assert!(size <= last);
            last = size;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn bias_needs_ratings() {
        let mut b = Bias::default();
        let err = b
            .fit(&RatingTable::from_pairs([("u", "i")]), &FitArgs::default())
            .unwrap_err();
        assert!(matches!(err, Error::Fit(_)));
        assert!(matches!(
            b.fit(&RatingTable::default(), &FitArgs::default()),
            Err(Error::Fit(_))
        ));
        assert!(BiasConfig::from_params(Params::new("bias").with("user_damping", -1)).is_err());
    }

    fn popular_fixture() -> Popular {
        // counts: a = 5, b = 9, c = 1 distinct users; "me" rated b
        let mut rows = vec![("me".to_string(), "b".to_string())];
        for k in 0..8 {
            rows.push((format!("x{k}"), "b".into()));
        }
        for k in 0..5 {
            rows.push((format!("y{k}"), "a".into()));
        }
        rows.push(("z".into(), "c".into()));
        rows.push(("z".into(), "c".into()));
        let mut p = Popular::new();
        p.fit(&RatingTable::from_pairs(rows), &FitArgs::default()).unwrap();
        p
    }

    #[test]
    fn popular_ranks_unrated_by_count() {
        let p = popular_fixture();
        let recs = p.recommend("me", Some(2), None, None).unwrap();
        assert_eq!(recs, vec![Scored::new("a", 5.0), Scored::new("c", 1.0)]);
        let global = p.recommend("stranger", None, None, None).unwrap();
        let order: Vec<_> = global.iter().map(|s| s.item.as_str()).collect();
        assert_eq!(order, ["b", "a", "c"]);
        let total: u64 = p.model().unwrap().counts.iter().sum();
        assert_eq!(total, 15);
    }

    #[test]
    fn popular_empty_when_everything_rated() {
        let mut p = Popular::new();
        p.fit(
            &RatingTable::from_pairs([("u", "a"), ("u", "b")]),
            &FitArgs::default(),
        )
        .unwrap();
        assert!(p.recommend("u", Some(5), None, None).unwrap().is_empty());
    }

    #[test]
    fn popular_ignores_rating_values() {
        let low = RatingTable::from_triples([("u", "a", 1.0), ("v", "a", 1.0), ("v", "b", 5.0)]);
        let high = RatingTable::from_triples([("u", "a", 5.0), ("v", "a", 2.0), ("v", "b", 1.0)]);
        let mut p1 = Popular::new();
        let mut p2 = Popular::new();
        p1.fit(&low, &FitArgs::default()).unwrap();
        p2.fit(&high, &FitArgs::default()).unwrap();
        assert_eq!(p1.model().unwrap().counts, p2.model().unwrap().counts);
    }

    fn random_fixture(seed: u64) -> Random {
        let rows: Vec<(String, String)> = (0..20).map(|k| (format!("u{}", k % 3), format!("i{k}"))).collect();
        let mut r = Random::new(RandomConfig { seed });
        r.fit(&RatingTable::from_pairs(rows), &FitArgs::default()).unwrap();
        r
    }

    #[test]
    fn random_samples_distinct_items() {
        let r = random_fixture(3);
        let recs = r.recommend("u0", Some(5), None, None).unwrap();
        assert_eq!(recs.len(), 5);
        let distinct: HashSet<_> = recs.iter().map(|s| s.item.clone()).collect();
        assert_eq!(distinct.len(), 5);
        let all = r.recommend("u0", Some(100), None, None).unwrap();
        assert_eq!(all.len(), 13);
        assert_eq!(r.recommend("u0", Some(5), None, None).unwrap(), recs);
        let other = random_fixture(4).recommend("u0", Some(5), None, None).unwrap();
        assert_ne!(other, recs);
    }

    #[test]
    fn random_honors_candidates() {
        let r = random_fixture(1);
        let cands = strings(&["i1", "i2", "zz"]);
        let recs = r.recommend("u0", None, Some(&cands), None).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|s| cands.contains(&s.item)));
    }
}
