// SPDX-License-Identifier: Apache-2.0

//! Experiment config files.
//!
//! A config is TOML with three optional tables and one or more
//! `[[algorithm]]` entries:
//!
//! ```toml
//! out = "results"                  # output directory, relative to the config
//!
//! [data]
//! path = "../data/ratings.csv"     # relative to the config file
//! format = "csv"                   # csv | ml100k
//! # or, instead of path/format:
//! # synthetic = { users = 943, seed = 42 }
//!
//! [split]
//! method = "part-users"            # part-users | sample-users | part-rows | sample-rows
//! k = 5
//! select = "n:5"                   # n:N | frac:F | last-n:N | last-frac:F
//! # size = 100                     # per-fold users or rows for the sample methods
//! seed = 42
//!
//! [run]
//! n = 20                           # recommendation list length
//! predict = true                   # also predict test ratings when the algorithm can
//! metrics = ["ndcg"]               # list metrics
//! accuracy = ["rmse"]              # prediction metrics
//! gain = "rating"                  # rating | binary
//! include_missing = true           # score unserved test users as empty lists
//! missing = "ignore"               # ignore | error, for pairs without a prediction
//! # min_rating = 4.0
//! # workers = 4
//!
//! [[algorithm]]
//! name = "MF"                      # label used in outputs
//! type = "biased-mf"               # defaults to the name
//! # predict = false                # overrides [run] predict for this entry
//! features = 50                    # every other key is a hyperparameter
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use reckit::metrics::{Accuracy, Gain, ListMetric, MissingPolicy};
use reckit::{Params, RowSelector};
use serde::Deserialize;

use crate::args::SplitMethod;
use crate::UsageError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(rename = "algorithm", default)]
    pub algorithms: Vec<AlgorithmConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: String,
    pub synthetic: Option<SyntheticSource>,
}

fn default_format() -> String {
    "csv".into()
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub users: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_select")]
    pub select: String,
    pub size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> String {
    "part-users".into()
}

fn default_k() -> usize {
    5
}

fn default_select() -> String {
    "n:5".into()
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            method: default_method(),
            k: default_k(),
            select: default_select(),
            size: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "yes")]
    pub predict: bool,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    #[serde(default = "default_accuracy")]
    pub accuracy: Vec<String>,
    #[serde(default = "default_gain")]
    pub gain: String,
    #[serde(default = "yes")]
    pub include_missing: bool,
    #[serde(default = "default_missing")]
    pub missing: String,
    pub min_rating: Option<f64>,
    pub workers: Option<usize>,
}

fn default_n() -> usize {
    20
}

fn yes() -> bool {
    true
}

fn default_metrics() -> Vec<String> {
    vec!["ndcg".into()]
}

fn default_accuracy() -> Vec<String> {
    vec!["rmse".into()]
}

fn default_gain() -> String {
    "rating".into()
}

fn default_missing() -> String {
    "ignore".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: default_n(),
            predict: true,
            metrics: default_metrics(),
            accuracy: default_accuracy(),
            gain: default_gain(),
            include_missing: true,
            missing: default_missing(),
            min_rating: None,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct AlgorithmConfig {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: Option<String>,
    pub predict: Option<bool>,
    #[serde(flatten)]
    pub params: BTreeMap<String, toml::Value>,
}

impl AlgorithmConfig {
    pub fn algorithm(&self) -> &str {
        self.kind.as_deref().unwrap_or(&self.name)
    }

    pub fn to_params(&self) -> anyhow::Result<Params> {
        let mut p = Params::new(self.algorithm());
        for (k, v) in &self.params {
            let s = match v {
                toml::Value::String(s) => s.clone(),
                toml::Value::Integer(i) => i.to_string(),
                toml::Value::Float(f) => f.to_string(),
                toml::Value::Boolean(b) => b.to_string(),
                other => bail!(UsageError(format!(
                    "algorithm {:?}: parameter {k} has unsupported value {other}",
                    self.name
                ))),
            };
            p.insert(k, s);
        }
        Ok(p)
    }
}

/// Where the ratings come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File { path: PathBuf, format: reckit::data::FileFormat },
    Synthetic(SyntheticSource),
}

/// A parsed config with every setting checked.
#[derive(Debug, Clone)]
pub struct Plan {
    pub labels: Vec<String>,
    pub params: Vec<Params>,
    pub source: DataSource,
    pub method: SplitMethod,
    pub k: usize,
    pub select: RowSelector,
    pub size: Option<usize>,
    pub seed: u64,
    pub n: usize,
    /// Per algorithm, whether to predict test ratings.
    pub predict: Vec<bool>,
    pub metrics: Vec<ListMetric>,
    pub accuracy: Vec<Accuracy>,
    pub gain: Gain,
    pub include_missing: bool,
    pub missing: MissingPolicy,
    pub min_rating: Option<f64>,
    pub workers: usize,
    pub out: PathBuf,
}

fn usage<T, E: std::fmt::Display>(r: Result<T, E>) -> anyhow::Result<T> {
    r.map_err(|e| UsageError(e.to_string()).into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        usage(toml::from_str(text))
    }

    /// Check every setting and resolve paths against `base`. Fails before
    /// any data is read or model trained.
    pub fn plan(&self, base: &Path) -> anyhow::Result<Plan> {
        if self.algorithms.is_empty() {
            bail!(UsageError("config has no [[algorithm]] entries".into()));
        }
        let mut labels: Vec<String> = Vec::new();
        let mut params = Vec::new();
        for a in &self.algorithms {
            if labels.contains(&a.name) {
                bail!(UsageError(format!("duplicate algorithm name {:?}", a.name)));
            }
            let p = a.to_params()?;
            // build once to validate names and hyperparameters
            reckit::build_algorithm(p.clone())
                .with_context(|| format!("algorithm {:?}", a.name))?;
            labels.push(a.name.clone());
            params.push(p);
        }

        let source = match (&self.data.path, self.data.synthetic) {
            (Some(p), None) => {
                let path = base.join(p);
                if !path.is_file() {
                    bail!(reckit::Error::Io {
                        path: path.clone(),
                        source: std::io::Error::new(std::io::ErrorKind::NotFound, "data file not found"),
                    });
                }
                DataSource::File {
                    path,
                    format: usage(self.data.format.parse())?,
                }
            }
            (None, Some(s)) => DataSource::Synthetic(s),
            _ => bail!(UsageError("[data] needs exactly one of path or synthetic".into())),
        };

        let method = usage(SplitMethod::from_str_name(&self.split.method))?;
        let run = &self.run;
        Ok(Plan {
            labels,
            params,
            source,
            method,
            k: self.split.k,
            select: usage(self.split.select.parse())?,
            size: self.split.size,
            seed: self.split.seed,
            n: run.n,
            predict: self.algorithms.iter().map(|a| a.predict.unwrap_or(run.predict)).collect(),
            metrics: usage(run.metrics.iter().map(|m| m.parse()).collect())?,
            accuracy: usage(run.accuracy.iter().map(|m| m.parse()).collect())?,
            gain: usage(run.gain.parse())?,
            include_missing: run.include_missing,
            missing: usage(run.missing.parse())?,
            min_rating: run.min_rating,
            workers: run.workers.unwrap_or(0),
            out: base.join(self.out.clone().unwrap_or_else(|| "results".into())),
        })
    }
}

impl SplitMethod {
    pub fn name(self) -> String {
        clap::ValueEnum::to_possible_value(&self).map_or_else(String::new, |v| v.get_name().to_owned())
    }

    pub fn from_str_name(s: &str) -> Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(|_| format!("unknown split method {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[data]
synthetic = { users = 30, seed = 1 }

[[algorithm]]
name = "bias"

[[algorithm]]
name = "MF"
type = "biased-mf"
features = 5
reg = 0.05
"#;

    #[test]
    fn defaults_and_params() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        let plan = c.plan(Path::new(".")).unwrap();
        assert_eq!(plan.labels, ["bias", "MF"]);
        assert_eq!(plan.params[1].algorithm(), "biased-mf");
        assert_eq!(plan.k, 5);
        assert_eq!(plan.select, RowSelector::SampleN(5));
        assert_eq!(plan.n, 20);
        assert_eq!(plan.metrics, [ListMetric::Ndcg]);
    }

    #[test]
    fn unknown_key_rejected() {
        let bad = MINIMAL.replace("[data]", "[data]\nbogus = 1");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn bad_algorithm_rejected_before_work() {
        let bad = MINIMAL.replace("features = 5", "features = 0");
        let c = ExperimentConfig::parse(&bad).unwrap();
        assert!(c.plan(Path::new(".")).is_err());
    }

    #[test]
    fn missing_data_file() {
        let bad = MINIMAL.replace("synthetic = { users = 30, seed = 1 }", "path = \"no/such/file.csv\"");
        let c = ExperimentConfig::parse(&bad).unwrap();
        let err = c.plan(Path::new(".")).unwrap_err();
        assert_eq!(crate::exit::code_for(&err), crate::exit::DATA);
    }
}
