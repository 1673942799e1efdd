// SPDX-License-Identifier: Apache-2.0

use std::str::FromStr;

use indexmap::IndexMap;

use crate::error::{Error, Result};

use super::PredictionTable;

/// What to do with pairs that have no prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    #[default]
    Error,
    Ignore,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(MissingPolicy::Error),
            "ignore" => Ok(MissingPolicy::Ignore),
            _ => Err(Error::Parameter(format!("unknown missing policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accuracy {
    Rmse,
    Mae,
}

impl Accuracy {
    pub fn name(self) -> &'static str {
        match self {
            Accuracy::Rmse => "rmse",
            Accuracy::Mae => "mae",
        }
    }

    pub fn eval(
        self,
        pairs: impl IntoIterator<Item = (Option<f64>, f64)>,
        missing: MissingPolicy,
    ) -> Result<f64> {
        let mut n = 0usize;
        let mut total = 0.0;
        for (pred, truth) in pairs {
            let Some(p) = pred else {
                match missing {
                    MissingPolicy::Error => {
                        return Err(Error::UndefinedMetric(format!(
                            "{}: a pair has no prediction",
                            self.name()
                        )))
                    }
                    MissingPolicy::Ignore => continue,
                }
            };
            let e = p - truth;
            total += match self {
                Accuracy::Rmse => e * e,
                Accuracy::Mae => e.abs(),
            };
            n += 1;
        }
        if n == 0 {
            return Err(Error::UndefinedMetric(format!("{}: no scored pairs", self.name())));
        }
        let mean = total / n as f64;
        Ok(match self {
            Accuracy::Rmse => mean.sqrt(),
            Accuracy::Mae => mean,
        })
    }
}

impl FromStr for Accuracy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rmse" => Ok(Accuracy::Rmse),
            "mae" => Ok(Accuracy::Mae),
            _ => Err(Error::Parameter(format!("unknown accuracy metric {s:?}"))),
        }
    }
}

pub fn rmse(
    pairs: impl IntoIterator<Item = (Option<f64>, f64)>,
    missing: MissingPolicy,
) -> Result<f64> {
    Accuracy::Rmse.eval(pairs, missing)
}

pub fn mae(
    pairs: impl IntoIterator<Item = (Option<f64>, f64)>,
    missing: MissingPolicy,
) -> Result<f64> {
    Accuracy::Mae.eval(pairs, missing)
}

fn ratings(table: &PredictionTable) -> Result<&[f64]> {
    table
        .ratings
        .as_deref()
        .ok_or_else(|| Error::Schema("predictions carry no rating column".into()))
}

impl PredictionTable {
    /// Accuracy over every pair of the table.
    pub fn accuracy(&self, metric: Accuracy, missing: MissingPolicy) -> Result<f64> {
        let r = ratings(self)?;
        metric.eval(self.predictions.iter().copied().zip(r.iter().copied()), missing)
    }
}

/// Per-user accuracy in order of first appearance. Under
/// [`MissingPolicy::Ignore`] users with no scored pair are left out.
pub fn user_accuracy(
    table: &PredictionTable,
    metric: Accuracy,
    missing: MissingPolicy,
) -> Result<Vec<(String, f64)>> {
    let r = ratings(table)?;
    let mut groups: IndexMap<&str, Vec<(Option<f64>, f64)>> = IndexMap::new();
    for k in 0..table.len() {
        groups
            .entry(table.users[k].as_str())
            .or_default()
            .push((table.predictions[k], r[k]));
    }
    let mut out = Vec::with_capacity(groups.len());
    for (user, pairs) in groups {
        match metric.eval(pairs, missing) {
            Ok(v) => out.push((user.to_owned(), v)),
            Err(Error::UndefinedMetric(_)) if missing == MissingPolicy::Ignore => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_example() {
        let pairs = [(Some(3.0), 3.0), (Some(4.0), 2.0)];
        // squared errors 0 and 4, absolute errors 0 and 2
        assert!((rmse(pairs, MissingPolicy::Error).unwrap() - (4.0f64 / 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(mae(pairs, MissingPolicy::Error).unwrap(), 1.0);
    }

    #[test]
    fn perfect_is_zero() {
        let pairs = [(Some(1.5), 1.5), (Some(4.0), 4.0)];
        assert_eq!(rmse(pairs, MissingPolicy::Error).unwrap(), 0.0);
    }

    #[test]
    fn missing_policies() {
        let pairs = [(None, 3.0), (Some(4.0), 2.0)];
        assert!(matches!(rmse(pairs, MissingPolicy::Error), Err(Error::UndefinedMetric(_))));
        assert_eq!(mae(pairs, MissingPolicy::Ignore).unwrap(), 2.0);
        assert!(matches!(
            rmse([(None, 3.0)], MissingPolicy::Ignore),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn per_user() {
        let t = PredictionTable {
            users: vec!["a".into(), "b".into(), "a".into(), "c".into()],
            items: vec!["x".into(); 4],
            predictions: vec![Some(1.0), Some(2.0), Some(3.0), None],
            ratings: Some(vec![2.0, 2.0, 2.0, 1.0]),
        };
        let v = user_accuracy(&t, Accuracy::Mae, MissingPolicy::Ignore).unwrap();
        assert_eq!(v, [("a".to_string(), 1.0), ("b".to_string(), 0.0)]);
    }
}
