// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use reckit::algo::{topn_recommend, UnratedItems, FreshRatings};
use reckit::metrics::{ndcg, Accuracy, Gain, ListMetric, MissingPolicy, UserTruth};
use reckit::{adapt, build_algorithm, Dataset, FitArgs, Params, Predictor, RatingTable, Result};

const LIST_METRICS: [ListMetric; 7] = [
    ListMetric::Precision,
    ListMetric::Recall,
    ListMetric::RecallCapped,
    ListMetric::Hit,
    ListMetric::RecipRank,
    ListMetric::AvgPrecision,
    ListMetric::Ndcg,
];

/// A list over items `0..20` and a truth set with ratings.
fn list_and_truth() -> impl Strategy<Value = (Vec<String>, UserTruth)> {
    let list = proptest::sample::subsequence((0..20).collect::<Vec<u32>>(), 0..12).prop_shuffle();
    let truth = proptest::collection::btree_map(0u32..20, 1u8..=5, 0..10);
    (list, truth).prop_map(|(l, t)| {
        (
            l.into_iter().map(|i| format!("i{i}")).collect(),
            t.into_iter().map(|(i, r)| (format!("i{i}"), r as f64)).collect(),
        )
    })
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

proptest! {
    #[test]
    fn list_metrics_are_bounded_and_pure((list, truth) in list_and_truth(), binary in any::<bool>()) {
        let gain = if binary { Gain::Binary } else { Gain::Rating };
        let l = refs(&list);
        for m in LIST_METRICS {
            let v = m.eval(&l, &truth, gain);
            if let Some(v) = v {
                prop_assert!((0.0..=1.0).contains(&v), "{} = {}", m, v);
            }
            prop_assert_eq!(v.map(f64::to_bits), m.eval(&l, &truth, gain).map(f64::to_bits));
        }
    }

    #[test]
    fn appending_irrelevant_items_never_raises_ndcg((list, truth) in list_and_truth(), extra in 1usize..5) {
        let mut longer = list.clone();
        longer.extend((0..extra).map(|k| format!("junk{k}")));
        let a = ndcg(&refs(&list), &truth, Gain::Rating);
        let b = ndcg(&refs(&longer), &truth, Gain::Rating);
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn ideal_order_has_unit_ndcg(truth in proptest::collection::btree_map(0u32..20, 1u8..=5, 1..10)) {
        let mut items: Vec<(u32, u8)> = truth.into_iter().collect();
        items.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let t: UserTruth = items.iter().map(|&(i, r)| (format!("i{i}"), r as f64)).collect();
        let list: Vec<String> = items.iter().map(|&(i, _)| format!("i{i}")).collect();
        prop_assert!((ndcg(&refs(&list), &t, Gain::Rating) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rmse_bounds_mae(pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..50)) {
        let p: Vec<(Option<f64>, f64)> = pairs.iter().map(|&(a, b)| (Some(a), b)).collect();
        let rmse = Accuracy::Rmse.eval(p.iter().copied(), MissingPolicy::Error).unwrap();
        let mae = Accuracy::Mae.eval(p.iter().copied(), MissingPolicy::Error).unwrap();
        prop_assert!(mae >= 0.0);
        prop_assert!(rmse >= mae - 1e-12);
    }
}

/// Fixed scores passed through a transform.
struct Mapped {
    scores: HashMap<String, f64>,
    f: fn(f64) -> f64,
}

impl Predictor for Mapped {
    fn predict_for_user(&self, _user: &str, items: &[String], _fresh: Option<&FreshRatings>) -> Result<Vec<Option<f64>>> {
        Ok(items.iter().map(|i| self.scores.get(i).map(|&s| (self.f)(s))).collect())
    }
}

fn selector(n_items: usize) -> UnratedItems {
    let table = RatingTable::from_triples((0..n_items).map(|i| ("owner".to_string(), format!("i{i}"), 1.0)));
    UnratedItems::from_dataset(&Dataset::build(&table).unwrap())
}

proptest! {
    #[test]
    fn topn_is_prefix_stable_and_order_invariant(
        raw in proptest::collection::vec(proptest::option::of(-3i32..3), 1..25),
        n in 1usize..10,
    ) {
        let scores: HashMap<String, f64> = raw
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (format!("i{i}"), s as f64)))
            .collect();
        let sel = selector(raw.len());
        let ident = Mapped { scores: scores.clone(), f: |x| x };
        let warped = Mapped { scores, f: |x| (x * 0.7).exp() + 3.0 };
        let items = |v: Vec<reckit::Scored>| v.into_iter().map(|s| s.item).collect::<Vec<_>>();

        let short = items(topn_recommend(&ident, &sel, "stranger", Some(n), None, None).unwrap());
        let long = items(topn_recommend(&ident, &sel, "stranger", Some(n + 3), None, None).unwrap());
        prop_assert_eq!(&short[..], &long[..short.len()]);
        prop_assert!(short.len() <= n);

        let w = items(topn_recommend(&warped, &sel, "stranger", Some(n), None, None).unwrap());
        prop_assert_eq!(short, w);
    }
}

#[test]
fn adapt_is_idempotent() {
    let train = common::random_ratings(3, 10, 12, 2);
    for params in common::zoo() {
        let once = adapt(build_algorithm(params.clone()).unwrap());
        let name = once.name();
        let mut twice = adapt(once);
        assert_eq!(twice.name(), name, "{params:?}");
        twice.fit(&train, &FitArgs::default()).unwrap();
        assert!(twice.as_recommender().is_some());
    }
    let pop = adapt(build_algorithm(Params::new("popular")).unwrap());
    assert_eq!(pop.name(), "popular");
    let ii = adapt(build_algorithm(Params::new("item-item")).unwrap());
    assert_eq!(ii.name(), "topn");
}

#[test]
fn recommendations_respect_n_and_candidates() {
    let train = common::random_ratings(4, 15, 20, 3);
    for params in common::zoo() {
        let mut algo = adapt(build_algorithm(params.clone()).unwrap());
        algo.fit(&train, &FitArgs::default()).unwrap();
        let r = algo.as_recommender().unwrap();
        let cands: Vec<String> = ["i1", "i3", "i5", "nope"].iter().map(|s| s.to_string()).collect();
        for u in ["u0", "u7", "ghost"] {
            let list = r.recommend(u, Some(4), None, None).unwrap();
            assert!(list.len() <= 4);
            assert!(list.windows(2).all(|w| w[0].score >= w[1].score), "{params:?}");
            let restricted = r.recommend(u, None, Some(&cands), None).unwrap();
            assert!(restricted.iter().all(|s| cands.contains(&s.item)), "{params:?}");
        }
    }
}
