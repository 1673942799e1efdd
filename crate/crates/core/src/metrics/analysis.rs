// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::data::io::format_real;
use crate::error::{Error, Result};

use super::{Gain, ListMetric, RecList, TruthTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Score truth users that have no list in a group as empty lists.
    pub include_missing: bool,
    pub gain: Gain,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            include_missing: true,
            gain: Gain::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub group: Vec<String>,
    pub user: String,
    /// Parallel to [`MetricTable::metrics`]; `None` is undefined.
    pub values: Vec<Option<f64>>,
}

/// Per-(grouping, user) metric values, sorted by grouping then user.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    pub group_names: Vec<String>,
    pub metrics: Vec<ListMetric>,
    pub rows: Vec<MetricRow>,
}

/// Means of each metric within one grouping cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub group: Vec<String>,
    pub n_users: usize,
    pub means: Vec<Option<f64>>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (mut n, mut total) = (0usize, 0.0);
    for v in values.flatten() {
        n += 1;
        total += v;
    }
    (n > 0).then(|| total / n as f64)
}

impl MetricTable {
    fn position(&self, metric: ListMetric) -> Option<usize> {
        self.metrics.iter().position(|m| *m == metric)
    }

    pub fn column(&self, metric: ListMetric) -> Option<Vec<Option<f64>>> {
        let k = self.position(metric)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    /// Mean of the defined values of `metric` over all rows.
    pub fn mean(&self, metric: ListMetric) -> Option<f64> {
        let k = self.position(metric)?;
        mean(self.rows.iter().map(|r| r.values[k]))
    }

    pub fn summary(&self) -> Vec<GroupSummary> {
        let mut out: Vec<GroupSummary> = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let g = &self.rows[start].group;
            let end = start + self.rows[start..].iter().take_while(|r| &r.group == g).count();
            let cell = &self.rows[start..end];
            out.push(GroupSummary {
                group: g.clone(),
                n_users: cell.len(),
                means: (0..self.metrics.len())
                    .map(|k| mean(cell.iter().map(|r| r.values[k])))
                    .collect(),
            });
            start = end;
        }
        out
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.group_names.clone();
        header.push("user".into());
        header.extend(self.metrics.iter().map(|m| m.name().to_owned()));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut row = r.group.clone();
            row.push(r.user.clone());
            row.extend(r.values.iter().map(|v| format_real(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn write_summary_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.group_names.clone();
        header.push("n_users".into());
        header.extend(self.metrics.iter().map(|m| m.name().to_owned()));
        w.write_record(&header)?;
        for s in self.summary() {
            let mut row = s.group.clone();
            row.push(s.n_users.to_string());
            row.extend(s.means.iter().map(|v| format_real(*v)));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Evaluate every (grouping, user) list against the truth.
///
/// Users with lists but no truth are left out. With
/// [`AnalysisOptions::include_missing`], truth users without a list in a
/// grouping cell are scored as empty lists there.
pub fn reclist_analysis(
    recs: &RecList,
    truth: &TruthTable,
    metrics: &[ListMetric],
    opts: AnalysisOptions,
) -> Result<MetricTable> {
    type Cell<'a> = (&'a [String], &'a str);
    let mut cells: BTreeMap<Cell<'_>, BTreeMap<usize, &str>> = BTreeMap::new();
    for r in &recs.rows {
        if r.group.len() != recs.group_names.len() {
            return Err(Error::Schema("row grouping arity does not match columns".into()));
        }
        let ranks = cells.entry((&r.group, &r.user)).or_default();
        if ranks.insert(r.rank, &r.item).is_some() {
            return Err(Error::Schema(format!(
                "duplicate rank {} for user {:?} in group {:?}",
                r.rank, r.user, r.group
            )));
        }
    }

    let mut groups: BTreeSet<&[String]> = cells.keys().map(|(g, _)| *g).collect();
    if recs.group_names.is_empty() {
        groups.insert(&[]);
    }

    let eval = |items: &[&str], user: &str| -> Vec<Option<f64>> {
        let t = truth.get(user).expect("truth user");
        metrics.iter().map(|m| m.eval(items, t, opts.gain)).collect()
    };

    let mut rows = Vec::new();
    for ((group, user), ranked) in &cells {
        if truth.get(user).is_none() {
            continue;
        }
        let items: Vec<&str> = ranked.values().copied().collect();
        rows.push(MetricRow {
            group: group.to_vec(),
            user: (*user).to_owned(),
            values: eval(&items, user),
        });
    }
    if opts.include_missing {
        for group in &groups {
            for user in truth.users() {
                if !cells.contains_key(&(*group, user)) {
                    rows.push(MetricRow {
                        group: group.to_vec(),
                        user: user.to_owned(),
                        values: eval(&[], user),
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| (&a.group, &a.user).cmp(&(&b.group, &b.user)));
    Ok(MetricTable {
        group_names: recs.group_names.clone(),
        metrics: metrics.to_vec(),
        rows,
    })
}
