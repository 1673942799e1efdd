// SPDX-License-Identifier: Apache-2.0

//! Split, train, predict, recommend and evaluate from one [`Plan`].

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use reckit::crossfold::{partition_rows, partition_users, sample_rows, sample_users};
use reckit::metrics::{reclist_analysis, Accuracy, AnalysisOptions, ListMetric, MetricTable};
use reckit::{adapt, batch_predict, batch_recommend, FitArgs, PredictionTable, RatingTable, RecList};
use reckit::data::io::format_real;
use reckit::{RowSelector, TrainTestPair, TruthTable};
use serde::Serialize;

use crate::args::SplitMethod;
use crate::config::{DataSource, Plan};
use crate::UsageError;

pub fn load_data(source: &DataSource) -> anyhow::Result<RatingTable> {
    Ok(match source {
        DataSource::File { path, format } => reckit::data::load_csv(path, *format)?,
        DataSource::Synthetic(s) => {
            reckit::synth::generate(&reckit::synth::SynthConfig::scaled(s.users, s.seed))?
        }
    })
}

pub fn split(
    data: &RatingTable,
    method: SplitMethod,
    k: usize,
    select: RowSelector,
    size: Option<usize>,
    seed: u64,
) -> anyhow::Result<Vec<TrainTestPair>> {
    let size = || size.ok_or_else(|| UsageError(format!("{} needs a sample size", method.name())));
    Ok(match method {
        SplitMethod::PartUsers => partition_users(data, k, select, seed)?,
        SplitMethod::SampleUsers => sample_users(data, k, size()?, select, seed)?,
        SplitMethod::PartRows => partition_rows(data, k, seed)?,
        SplitMethod::SampleRows => sample_rows(data, k, size()?, seed, true)?,
    })
}

/// Predictions of one algorithm on one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPredictions {
    pub algorithm: String,
    pub fold: usize,
    pub table: PredictionTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    /// Per-user metric rows across all folds.
    pub n_users: usize,
    pub list_metrics: Vec<(String, Option<f64>)>,
    /// Over pooled predictions of all folds; absent for non-predictors.
    pub accuracy: Vec<(String, Option<f64>)>,
}

impl AlgorithmSummary {
    pub fn list_metric(&self, name: &str) -> Option<f64> {
        self.list_metrics.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v)
    }

    pub fn accuracy(&self, name: &str) -> Option<f64> {
        self.accuracy.iter().find(|(n, _)| n == name).and_then(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Grouped by algorithm and fold.
    pub recs: RecList,
    pub predictions: Vec<FoldPredictions>,
    /// Per-user list metrics grouped by algorithm and fold.
    pub metrics: MetricTable,
    pub summary: Vec<AlgorithmSummary>,
    pub folds: usize,
    pub empty_lists: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut n, mut t) = (0usize, 0.0);
    for v in values {
        n += 1;
        t += v;
    }
    (n > 0).then(|| t / n as f64)
}

/// Run every algorithm on every fold.
pub fn run(plan: &Plan, data: &RatingTable) -> anyhow::Result<ExperimentOutput> {
    let folds = split(data, plan.method, plan.k, plan.select, plan.size, plan.seed)?;
    let groups = vec!["algorithm".to_string(), "fold".to_string()];
    let opts = AnalysisOptions {
        include_missing: plan.include_missing,
        gain: plan.gain,
    };
    let mut all_recs = Vec::new();
    let mut predictions = Vec::new();
    let mut metric_rows = Vec::new();
    let mut empty_lists = 0;
    for (j, fold) in folds.iter().enumerate() {
        let fold_label = (j + 1).to_string();
        let users: Vec<String> = fold.test.distinct_users().into_iter().map(str::to_owned).collect();
        let truth = TruthTable::from_ratings(&fold.test, plan.min_rating);
        let mut fold_recs = Vec::new();
        for (a, (label, params)) in plan.labels.iter().zip(&plan.params).enumerate() {
            let started = Instant::now();
            let mut algo = adapt(reckit::build_algorithm(params.clone())?);
            algo.fit(&fold.train, &FitArgs::default())
                .with_context(|| format!("training {label} on fold {fold_label}"))?;
            log::info!("{label} fold {fold_label}: trained in {:.2?}", started.elapsed());
            if plan.predict[a] && algo.as_predictor().is_some() {
                predictions.push(FoldPredictions {
                    algorithm: label.clone(),
                    fold: j + 1,
                    table: batch_predict(algo.as_ref(), &fold.test, plan.workers)?,
                });
            }
            let (recs, manifest) =
                batch_recommend(algo.as_ref(), &users, Some(plan.n), None, plan.workers)?;
            empty_lists += manifest.empty_users.len();
            fold_recs.push(recs.with_group("fold", &fold_label).with_group("algorithm", label));
        }
        let fold_recs = RecList::concat(fold_recs)?;
        let mut fold_recs_grouped = fold_recs.clone();
        if fold_recs_grouped.group_names.is_empty() {
            fold_recs_grouped.group_names = groups.clone();
        }
        let m = reclist_analysis(&fold_recs_grouped, &truth, &plan.metrics, opts)?;
        metric_rows.extend(m.rows);
        all_recs.push(fold_recs);
    }
    let mut recs = RecList::concat(all_recs)?;
    if recs.group_names.is_empty() {
        recs.group_names = groups.clone();
    }
    metric_rows.sort_by(|a, b| {
        let key = |r: &reckit::metrics::MetricRow| {
            let algo = plan.labels.iter().position(|l| *l == r.group[0]);
            let fold: usize = r.group[1].parse().unwrap_or(0);
            (algo, fold, r.user.clone())
        };
        key(a).cmp(&key(b))
    });
    let metrics = MetricTable {
        group_names: groups,
        metrics: plan.metrics.clone(),
        rows: metric_rows,
    };

    let summary = plan
        .labels
        .iter()
        .map(|label| summarize(label, plan, &metrics, &predictions))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        recs,
        predictions,
        metrics,
        summary,
        folds: folds.len(),
        empty_lists,
    })
}

fn summarize(
    label: &str,
    plan: &Plan,
    metrics: &MetricTable,
    predictions: &[FoldPredictions],
) -> anyhow::Result<AlgorithmSummary> {
    let rows: Vec<_> = metrics.rows.iter().filter(|r| r.group[0] == label).collect();
    let list_metrics = plan
        .metrics
        .iter()
        .enumerate()
        .map(|(k, m)| (m.name().to_owned(), mean(rows.iter().filter_map(|r| r.values[k]))))
        .collect();
    let mine: Vec<&FoldPredictions> = predictions.iter().filter(|p| p.algorithm == label).collect();
    let mut accuracy = Vec::new();
    for a in &plan.accuracy {
        let value = if mine.is_empty() {
            None
        } else {
            let pairs = mine.iter().flat_map(|p| {
                let r = p.table.ratings.as_deref().unwrap_or(&[]);
                p.table.predictions.iter().copied().zip(r.iter().copied())
            });
            match a.eval(pairs, plan.missing) {
                Ok(v) => Some(v),
                Err(reckit::Error::UndefinedMetric(msg)) => {
                    log::warn!("{label}: {msg}");
                    None
                }
                Err(e) => return Err(e.into()),
            }
        };
        accuracy.push((a.name().to_owned(), value));
    }
    Ok(AlgorithmSummary {
        algorithm: label.to_owned(),
        n_users: rows.len(),
        list_metrics,
        accuracy,
    })
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

/// Write the result tables and a sidecar manifest into `dir`.
pub fn write_outputs(out: &ExperimentOutput, plan: &Plan, dir: &Path, elapsed_secs: f64) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    out.recs.write_csv(create(&dir.join("recommendations.csv"))?)?;
    write_predictions(&out.predictions, create(&dir.join("predictions.csv"))?)?;
    out.metrics.write_csv(create(&dir.join("user-metrics.csv"))?)?;
    write_summary(&out.summary, plan, create(&dir.join("summary.csv"))?)?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        algorithms: &'a [String],
        split_method: String,
        folds: usize,
        select: String,
        seed: u64,
        n: usize,
        empty_lists: usize,
        summary: &'a [AlgorithmSummary],
        elapsed_secs: f64,
    }
    let manifest = Manifest {
        algorithms: &plan.labels,
        split_method: plan.method.name(),
        folds: out.folds,
        select: plan.select.to_string(),
        seed: plan.seed,
        n: plan.n,
        empty_lists: out.empty_lists,
        summary: &out.summary,
        elapsed_secs,
    };
    let mut w = create(&dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    w.flush()?;
    Ok(())
}

pub fn write_predictions(preds: &[FoldPredictions], w: impl Write) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["algorithm", "fold", "user", "item", "prediction", "rating"])?;
    for p in preds {
        let t = &p.table;
        for k in 0..t.len() {
            out.write_record([
                p.algorithm.clone(),
                p.fold.to_string(),
                t.users[k].clone(),
                t.items[k].clone(),
                format_real(t.predictions[k]),
                format_real(t.ratings.as_ref().map(|r| r[k])),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary(summary: &[AlgorithmSummary], plan: &Plan, w: impl Write) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["algorithm".to_string(), "n_users".to_string()];
    header.extend(plan.accuracy.iter().map(|a| a.name().to_owned()));
    header.extend(plan.metrics.iter().map(|m| m.name().to_owned()));
    out.write_record(&header)?;
    for s in summary {
        let mut row = vec![s.algorithm.clone(), s.n_users.to_string()];
        row.extend(s.accuracy.iter().map(|(_, v)| format_real(*v)));
        row.extend(s.list_metrics.iter().map(|(_, v)| format_real(*v)));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Human-readable summary lines.
pub fn report(summary: &[AlgorithmSummary], accuracy: &[Accuracy], metrics: &[ListMetric]) -> String {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    let mut s = String::new();
    for a in summary {
        s.push_str(&a.algorithm);
        for m in accuracy {
            s.push_str(&format!("  {}: {}", m.name().to_uppercase(), fmt(a.accuracy(m.name()))));
        }
        for m in metrics {
            s.push_str(&format!("  {}: {}", m.name(), fmt(a.list_metric(m.name()))));
        }
        s.push('\n');
    }
    s
}
