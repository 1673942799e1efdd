// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use indexmap::IndexMap;
use reckit::data::{load_csv, save_csv, write_ml100k, write_table, FileFormat};
use reckit::metrics::{reclist_analysis, user_accuracy, Accuracy, AnalysisOptions, ListMetric};
use reckit::{adapt, batch_predict, batch_recommend, build_algorithm, load_model, save_model};
use reckit::{FitArgs, Params, PredictionTable, RecList, TruthTable};
use serde::Serialize;

use crate::args::*;
use crate::config::{DataSource, ExperimentConfig};
use crate::experiment;
use crate::UsageError;

pub fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Recommend(a) => recommend(a),
        Command::Eval(a) => eval(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Synth(a) => synth(a),
    }
}

/// Make the directory an output file goes into.
fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
        }
        _ => Ok(()),
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    ensure_parent(path)?;
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|source| reckit::Error::Io {
        path: path.to_path_buf(),
        source,
    })?))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn split(a: SplitArgs) -> anyhow::Result<()> {
    let data = load_csv(&a.input.ratings, a.input.format)?;
    let folds = experiment::split(&data, a.method, a.k, a.select, a.size, a.seed)?;

    #[derive(Serialize)]
    struct FoldInfo {
        fold: usize,
        train: String,
        test: String,
        train_rows: usize,
        test_rows: usize,
    }
    ensure_parent(&a.out)?;
    let mut info = Vec::new();
    for (j, fold) in folds.iter().enumerate() {
        let train = with_suffix(&a.out, &format!(".train-{}.csv", j + 1));
        let test = with_suffix(&a.out, &format!(".test-{}.csv", j + 1));
        save_csv(&fold.train, &train)?;
        save_csv(&fold.test, &test)?;
        info.push(FoldInfo {
            fold: j + 1,
            train: file_name(&train),
            test: file_name(&test),
            train_rows: fold.train.len(),
            test_rows: fold.test.len(),
        });
    }
    write_json(
        &with_suffix(&a.out, ".folds.json"),
        &serde_json::json!({
            "method": a.method.name(),
            "k": a.k,
            "select": a.select.to_string(),
            "size": a.size,
            "seed": a.seed,
            "folds": info,
        }),
    )?;
    log::info!("wrote {} folds", folds.len());
    Ok(())
}

fn train(a: TrainArgs) -> anyhow::Result<()> {
    let mut params = Params::new(&a.algo);
    for p in &a.params {
        params.insert_pair(p)?;
    }
    let mut algo = build_algorithm(params)?;
    if !a.no_adapt {
        algo = adapt(algo);
    }
    let data = load_csv(&a.input.ratings, a.input.format)?;
    let started = Instant::now();
    algo.fit(&data, &FitArgs::default())?;
    log::info!("trained {} in {:.2?}", algo.name(), started.elapsed());
    ensure_parent(&a.out)?;
    save_model(algo.as_ref(), &a.out)?;
    Ok(())
}

fn predict(a: PredictArgs) -> anyhow::Result<()> {
    let algo = load_model(&a.model)?;
    let pairs = load_csv(&a.pairs, a.format)?;
    let table = batch_predict(algo.as_ref(), &pairs, a.workers.workers)?;
    table.write_csv(create(&a.out)?)?;
    Ok(())
}

/// Distinct values of the `user` column, in first-appearance order.
fn read_users(path: &Path) -> anyhow::Result<Vec<String>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let col = rdr
        .headers()?
        .iter()
        .position(|h| h == "user")
        .ok_or_else(|| reckit::Error::Schema(format!("{}: no user column", path.display())))?;
    let mut seen = indexmap::IndexSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        seen.insert(rec[col].to_owned());
    }
    Ok(seen.into_iter().collect())
}

fn read_candidates(path: &Path) -> anyhow::Result<IndexMap<String, Vec<String>>> {
    let table = load_csv(path, FileFormat::CsvHeader)?;
    let mut out: IndexMap<String, Vec<String>> = IndexMap::new();
    for k in 0..table.len() {
        out.entry(table.user(k).to_owned()).or_default().push(table.item(k).to_owned());
    }
    Ok(out)
}

fn recommend(a: RecommendArgs) -> anyhow::Result<()> {
    let algo = load_model(&a.model)?;
    let users = read_users(&a.users)?;
    let candidates = a.candidates.as_deref().map(read_candidates).transpose()?;
    let (recs, manifest) =
        batch_recommend(algo.as_ref(), &users, a.n, candidates.as_ref(), a.workers.workers)?;
    if !manifest.empty_users.is_empty() {
        log::warn!("{} users got empty lists", manifest.empty_users.len());
    }
    recs.write_csv(create(&a.out)?)?;
    write_json(&with_suffix(&a.out, ".manifest.json"), &manifest)?;
    Ok(())
}

fn eval(a: EvalArgs) -> anyhow::Result<()> {
    let mut list_metrics = Vec::new();
    let mut accuracy = Vec::new();
    for name in a.metrics.iter().map(|m| m.trim()).filter(|m| !m.is_empty()) {
        if let Ok(m) = name.parse::<ListMetric>() {
            list_metrics.push(m);
        } else if let Ok(m) = name.parse::<Accuracy>() {
            accuracy.push(m);
        } else {
            bail!(UsageError(format!("unknown metric {name:?}")));
        }
    }
    if a.recs.is_none() && a.preds.is_none() {
        bail!(UsageError("eval needs --recs, --preds or both".into()));
    }
    let mut printed = String::new();

    if let Some(path) = &a.recs {
        if !list_metrics.is_empty() {
            let truth_path = a
                .truth
                .as_ref()
                .ok_or_else(|| UsageError("list metrics need --truth".into()))?;
            let recs = RecList::read_csv(open(path)?)?;
            if recs.is_empty() {
                return Err(reckit::Error::EmptyInput(format!("{} has no rows", path.display())).into());
            }
            let truth = TruthTable::from_ratings(&load_csv(truth_path, a.truth_format)?, a.min_rating);
            let opts = AnalysisOptions {
                include_missing: !a.exclude_missing,
                gain: a.gain.into(),
            };
            let table = reclist_analysis(&recs, &truth, &list_metrics, opts)?;
            table.write_csv(create(&with_suffix(&a.out, ".users.csv"))?)?;
            table.write_summary_csv(create(&with_suffix(&a.out, ".summary.csv"))?)?;
            for s in table.summary() {
                let label = if s.group.is_empty() { "all".to_string() } else { s.group.join("/") };
                printed.push_str(&format!("{label} ({} users)", s.n_users));
                for (m, v) in list_metrics.iter().zip(&s.means) {
                    printed.push_str(&format!("  {m}: {}", v.map_or("-".into(), |v| format!("{v:.4}"))));
                }
                printed.push('\n');
            }
        }
    }

    if let Some(path) = &a.preds {
        if !accuracy.is_empty() {
            let preds = PredictionTable::read_csv(open(path)?)?;
            let missing = a.missing.into();
            let mut w = csv::Writer::from_writer(create(&with_suffix(&a.out, ".accuracy.csv"))?);
            w.write_record(["metric", "global", "user_mean"])?;
            for m in &accuracy {
                let global = preds.accuracy(*m, missing)?;
                let per_user = user_accuracy(&preds, *m, missing)?;
                let user_mean = if per_user.is_empty() {
                    None
                } else {
                    Some(per_user.iter().map(|(_, v)| v).sum::<f64>() / per_user.len() as f64)
                };
                w.write_record([
                    m.name().to_owned(),
                    reckit::data::io::format_real(Some(global)),
                    reckit::data::io::format_real(user_mean),
                ])?;
                printed.push_str(&format!("{}: {global:.4}\n", m.name().to_uppercase()));
            }
            w.flush()?;
        }
    }
    print!("{printed}");
    Ok(())
}

fn run_experiment(a: ExperimentArgs) -> anyhow::Result<()> {
    let config = ExperimentConfig::load(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let mut plan = config.plan(base)?;
    if let Some(w) = a.workers {
        plan.workers = w;
    }
    if let Some(out) = a.out {
        plan.out = out;
    }
    let started = Instant::now();
    let data = experiment::load_data(&plan.source)?;
    if let DataSource::Synthetic(s) = &plan.source {
        log::info!("generated {} synthetic ratings for {} users", data.len(), s.users);
    }
    let output = experiment::run(&plan, &data)?;
    let elapsed = started.elapsed().as_secs_f64();
    experiment::write_outputs(&output, &plan, &plan.out, elapsed)?;
    print!("{}", experiment::report(&output.summary, &plan.accuracy, &plan.metrics));
    log::info!("results in {} after {elapsed:.1}s", plan.out.display());
    Ok(())
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    if a.users == 0 {
        bail!(UsageError("--users must be positive".into()));
    }
    let data = reckit::synth::generate(&reckit::synth::SynthConfig::scaled(a.users, a.seed))?;
    let w = create(&a.out)?;
    match a.format {
        FileFormat::Ml100kTsv => write_ml100k(&data, w)?,
        FileFormat::CsvHeader => write_table(&data, w)?,
    }
    log::info!("wrote {} ratings to {}", data.len(), a.out.display());
    Ok(())
}
