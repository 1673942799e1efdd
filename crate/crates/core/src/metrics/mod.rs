// SPDX-License-Identifier: Apache-2.0

//! Prediction accuracy and top-N list metrics.
//!
//! List metrics take one user's recommended items in rank order and that
//! user's [`UserTruth`]. [`reclist_analysis`] joins a whole [`RecList`]
//! against a [`TruthTable`] and evaluates every (grouping, user) cell.

mod accuracy;
mod analysis;
mod tables;

pub use accuracy::{mae, rmse, user_accuracy, Accuracy, MissingPolicy};
pub use analysis::{reclist_analysis, AnalysisOptions, GroupSummary, MetricRow, MetricTable};
pub use tables::{PredictionTable, RecList, RecRow, TruthTable, UserTruth};

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Gain of a relevant item in DCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gain {
    Binary,
    /// The truth rating; 1 for rating-less truth.
    #[default]
    Rating,
}

impl FromStr for Gain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "binary" => Ok(Gain::Binary),
            "rating" => Ok(Gain::Rating),
            _ => Err(Error::Parameter(format!("unknown gain {s:?}"))),
        }
    }
}

/// A per-list top-N metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ListMetric {
    Precision,
    Recall,
    RecallCapped,
    Hit,
    RecipRank,
    AvgPrecision,
    Ndcg,
}

impl ListMetric {
    pub const ALL: [ListMetric; 7] = [
        ListMetric::Precision,
        ListMetric::Recall,
        ListMetric::RecallCapped,
        ListMetric::Hit,
        ListMetric::RecipRank,
        ListMetric::AvgPrecision,
        ListMetric::Ndcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ListMetric::Precision => "precision",
            ListMetric::Recall => "recall",
            ListMetric::RecallCapped => "recall.capped",
            ListMetric::Hit => "hit",
            ListMetric::RecipRank => "recip_rank",
            ListMetric::AvgPrecision => "avg_precision",
            ListMetric::Ndcg => "ndcg",
        }
    }

    /// Evaluate one list. `None` marks an undefined value.
    pub fn eval(self, recs: &[&str], truth: &UserTruth, gain: Gain) -> Option<f64> {
        match self {
            ListMetric::Precision => precision(recs, truth),
            ListMetric::Recall => recall(recs, truth),
            ListMetric::RecallCapped => recall_capped(recs, truth),
            ListMetric::Hit => Some(hit(recs, truth)),
            ListMetric::RecipRank => Some(recip_rank(recs, truth)),
            ListMetric::AvgPrecision => Some(avg_precision(recs, truth)),
            ListMetric::Ndcg => Some(ndcg(recs, truth, gain)),
        }
    }
}

impl fmt::Display for ListMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ListMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        ListMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .or(match s {
                "map" | "ap" => Some(ListMetric::AvgPrecision),
                "mrr" => Some(ListMetric::RecipRank),
                _ => None,
            })
            .ok_or_else(|| Error::Parameter(format!("unknown list metric {s:?}")))
    }
}

fn hits(recs: &[&str], truth: &UserTruth) -> usize {
    recs.iter().filter(|i| truth.contains(i)).count()
}

/// Fraction of recommended items that are relevant; undefined for an empty list.
pub fn precision(recs: &[&str], truth: &UserTruth) -> Option<f64> {
    if recs.is_empty() {
        None
    } else {
        Some(hits(recs, truth) as f64 / recs.len() as f64)
    }
}

/// Fraction of relevant items that were recommended; undefined without relevant items.
pub fn recall(recs: &[&str], truth: &UserTruth) -> Option<f64> {
    if truth.is_empty() {
        None
    } else {
        Some(hits(recs, truth) as f64 / truth.len() as f64)
    }
}

/// Recall with the denominator capped at the list length.
pub fn recall_capped(recs: &[&str], truth: &UserTruth) -> Option<f64> {
    if truth.is_empty() {
        return None;
    }
    let denom = truth.len().min(recs.len());
    if denom == 0 {
        Some(0.0)
    } else {
        Some(hits(recs, truth) as f64 / denom as f64)
    }
}

pub fn hit(recs: &[&str], truth: &UserTruth) -> f64 {
    if recs.iter().any(|i| truth.contains(i)) {
        1.0
    } else {
        0.0
    }
}

/// Reciprocal of the 1-based rank of the first relevant item, 0 if none.
pub fn recip_rank(recs: &[&str], truth: &UserTruth) -> f64 {
    recs.iter()
        .position(|i| truth.contains(i))
        .map_or(0.0, |k| 1.0 / (k + 1) as f64)
}

/// Sum of precision at each relevant rank, over `min(|rel|, list length)`.
pub fn avg_precision(recs: &[&str], truth: &UserTruth) -> f64 {
    let denom = truth.len().min(recs.len());
    if denom == 0 {
        return 0.0;
    }
    let mut found = 0usize;
    let mut total = 0.0;
    for (k, item) in recs.iter().enumerate() {
        if truth.contains(item) {
            found += 1;
            total += found as f64 / (k + 1) as f64;
        }
    }
    total / denom as f64
}

/// Rank discount `1 / log2(max(rank, 2))` for 1-based `rank`.
pub fn discount(rank: usize) -> f64 {
    1.0 / (rank.max(2) as f64).log2()
}

fn dcg(gains: impl IntoIterator<Item = f64>) -> f64 {
    gains
        .into_iter()
        .enumerate()
        .map(|(k, g)| g * discount(k + 1))
        .fold(0.0, |acc, v| acc + v)
}

/// Normalized DCG against the untruncated ideal ordering of the truth.
pub fn ndcg(recs: &[&str], truth: &UserTruth, gain: Gain) -> f64 {
    let g = |item: &str| truth.gain(item, gain).unwrap_or(0.0);
    let mut ideal: Vec<f64> = truth.items().map(g).collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(ideal);
    if idcg == 0.0 {
        return 0.0;
    }
    dcg(recs.iter().map(|i| g(i))) / idcg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(items: &[&str]) -> UserTruth {
        UserTruth::from_iter(items.iter().map(|i| (i.to_string(), 1.0)))
    }

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|k| format!("{prefix}{k}")).collect()
    }

    #[test]
    fn set_count_example() {
        // 10 recs, 3 of them relevant, 6 relevant overall
        let recs = names("i", 10);
        let recs: Vec<&str> = recs.iter().map(String::as_str).collect();
        let t = truth(&["i2", "i5", "i9", "x1", "x2", "x3"]);
        assert_eq!(precision(&recs, &t), Some(3.0 / 10.0));
        assert_eq!(recall(&recs, &t), Some(3.0 / 6.0));
        assert_eq!(hit(&recs, &t), 1.0);
        assert_eq!(recip_rank(&recs, &t), 0.5);
    }

    #[test]
    fn reciprocal_rank_four() {
        let t = truth(&["d"]);
        assert_eq!(recip_rank(&["a", "b", "c", "d"], &t), 0.25);
    }

    #[test]
    fn nothing_relevant() {
        let t = truth(&["z"]);
        assert_eq!(hit(&["a", "b"], &t), 0.0);
        assert_eq!(recip_rank(&["a", "b"], &t), 0.0);
        assert_eq!(avg_precision(&["a", "b"], &t), 0.0);
    }

    #[test]
    fn empty_list() {
        let t = truth(&["z"]);
        assert_eq!(precision(&[], &t), None);
        assert_eq!(recall(&[], &t), Some(0.0));
        assert_eq!(ndcg(&[], &t, Gain::Binary), 0.0);
    }

    #[test]
    fn average_precision_rank_walk() {
        let t = truth(&["a", "c"]);
        let ap = avg_precision(&["a", "b", "c"], &t);
        assert!((ap - (1.0 / 1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(avg_precision(&["a", "c", "x"], &t), 1.0);
    }

    #[test]
    fn ndcg_single_item_rank_three() {
        let t = truth(&["c"]);
        let v = ndcg(&["a", "b", "c"], &t, Gain::Binary);
        assert!((v - 1.0 / 3f64.log2()).abs() < 1e-12);
        assert_eq!(ndcg(&["c", "a"], &t, Gain::Binary), 1.0);
        assert_eq!(ndcg(&["a"], &UserTruth::default(), Gain::Binary), 0.0);
    }

    #[test]
    fn ndcg_rating_gain_ideal() {
        let t = UserTruth::from_iter([("a".to_string(), 5.0), ("b".to_string(), 3.0)]);
        assert_eq!(ndcg(&["a", "b"], &t, Gain::Rating), 1.0);
        assert!(ndcg(&["x", "b", "a"], &t, Gain::Rating) < 1.0);
    }

    #[test]
    fn discount_table() {
        assert_eq!(discount(1), 1.0);
        assert_eq!(discount(2), 1.0);
        assert_eq!(discount(4), 0.5);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in ListMetric::ALL {
            assert_eq!(m.name().parse::<ListMetric>().unwrap(), m);
        }
        assert!("bogus".parse::<ListMetric>().is_err());
    }
}
