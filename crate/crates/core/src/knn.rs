// SPDX-License-Identifier: Apache-2.0

//! Neighborhood collaborative filtering with cosine similarity over
//! user-mean-centered rating vectors.
//!
//! Explicit-feedback scores are the similarity-weighted average of the
//! neighbors' centered ratings plus the target user's mean. Implicit data
//! skips centering and scores by the sum of neighbor similarities.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{Algorithm, FitArgs, FreshRatings, Predictor};
use crate::baselines::no_ratings;
use crate::data::{Csr, Dataset, Index, RatingTable};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::persist::{ModelPayload, Persist};

/// Whether to treat the rating column as explicit preference values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    /// Explicit when the training data has a rating column.
    #[default]
    Auto,
    Explicit,
    Implicit,
}

impl Feedback {
    fn resolve(self, data: &Dataset) -> Result<bool> {
        match self {
            Feedback::Auto => Ok(data.is_explicit()),
            Feedback::Explicit => data.require_explicit("explicit k-NN").map(|_| true),
            Feedback::Implicit => Ok(false),
        }
    }
}

impl FromStr for Feedback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Feedback::Auto),
            "explicit" => Ok(Feedback::Explicit),
            "implicit" => Ok(Feedback::Implicit),
            other => Err(Error::Parameter(format!("unknown feedback mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserUserConfig {
    pub nnbrs: usize,
    pub min_nbrs: usize,
    pub min_sim: f64,
    pub feedback: Feedback,
}

impl Default for UserUserConfig {
    fn default() -> Self {
        UserUserConfig {
            nnbrs: 20,
            min_nbrs: 1,
            min_sim: 1e-6,
            feedback: Feedback::Auto,
        }
    }
}

impl UserUserConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let d = Self::default();
        let cfg = UserUserConfig {
            nnbrs: p.take("nnbrs", d.nnbrs)?,
            min_nbrs: p.take("min_nbrs", d.min_nbrs)?,
            min_sim: p.take("min_sim", d.min_sim)?,
            feedback: p.take("feedback", d.feedback)?,
        };
        p.finish()?;
        check_neighborhood(cfg.nnbrs, cfg.min_nbrs, cfg.min_sim)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemItemConfig {
    pub nnbrs: usize,
    pub min_nbrs: usize,
    pub min_sim: f64,
    /// Neighbors kept per item after fitting; 0 keeps all.
    pub save_nbrs: usize,
    pub feedback: Feedback,
}

impl Default for ItemItemConfig {
    fn default() -> Self {
        ItemItemConfig {
            nnbrs: 20,
            min_nbrs: 1,
            min_sim: 1e-6,
            save_nbrs: 0,
            feedback: Feedback::Auto,
        }
    }
}

impl ItemItemConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let d = Self::default();
        let cfg = ItemItemConfig {
            nnbrs: p.take("nnbrs", d.nnbrs)?,
            min_nbrs: p.take("min_nbrs", d.min_nbrs)?,
            min_sim: p.take("min_sim", d.min_sim)?,
            save_nbrs: p.take("save_nbrs", d.save_nbrs)?,
            feedback: p.take("feedback", d.feedback)?,
        };
        p.finish()?;
        check_neighborhood(cfg.nnbrs, cfg.min_nbrs, cfg.min_sim)?;
        Ok(cfg)
    }
}

fn check_neighborhood(nnbrs: usize, min_nbrs: usize, min_sim: f64) -> Result<()> {
    if nnbrs == 0 {
        return Err(Error::Parameter("nnbrs must be positive".into()));
    }
    if min_nbrs > nnbrs {
        return Err(Error::Parameter(format!(
            "min_nbrs ({min_nbrs}) exceeds nnbrs ({nnbrs})"
        )));
    }
    if !(min_sim >= 0.0) {
        return Err(Error::Parameter(format!("min_sim must be nonnegative, got {min_sim}")));
    }
    Ok(())
}

fn row_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Map fresh ratings onto known items, sorted by item index, last
/// duplicate winning. Unknown items are dropped.
fn index_fresh(items: &Index, fresh: &FreshRatings) -> (Vec<u32>, Vec<f64>) {
    let mut rows: Vec<(u32, usize, f64)> = fresh
        .iter()
        .enumerate()
        .filter_map(|(pos, (item, r))| items.index_of(item).map(|i| (i as u32, pos, *r)))
        .collect();
    rows.sort_unstable_by_key(|&(i, pos, _)| (i, pos));
    let mut cols: Vec<u32> = Vec::with_capacity(rows.len());
    let mut vals: Vec<f64> = Vec::with_capacity(rows.len());
    for (i, _, r) in rows {
        if cols.last() == Some(&i) {
            *vals.last_mut().unwrap() = r;
        } else {
            cols.push(i);
            vals.push(r);
        }
    }
    (cols, vals)
}

/// Weighted average of `values` by `weights`, divided by the sum of |weight|.
fn weighted_average(pairs: &[(f64, f64)]) -> f64 {
    let num: f64 = pairs.iter().map(|(s, v)| s * v).sum();
    let den: f64 = pairs.iter().map(|(s, _)| s.abs()).sum();
    num / den
}

// ---------------------------------------------------------------------------
// user-user

/// Fitted user-user state.
#[derive(Debug, Clone, PartialEq)]
pub struct UserUserModel {
    pub users: Index,
    pub items: Index,
    /// Centered ratings, user-major.
    pub centered: Csr,
    /// Centered ratings, item-major.
    pub centered_by_item: Csr,
    pub norms: Vec<f64>,
    pub means: Vec<f64>,
    pub explicit: bool,
}

impl UserUserModel {
    fn from_dataset(data: &Dataset, explicit: bool) -> Self {
        let means: Vec<f64> = (0..data.n_users())
            .map(|u| {
                if explicit {
                    row_mean(data.by_user.row_values(u))
                } else {
                    0.0
                }
            })
            .collect();
        let centered = data.by_user.map_values(|u, _, v| {
            if explicit {
                v - means[u]
            } else {
                1.0
            }
        });
        let norms = (0..centered.n_rows())
            .map(|u| norm(centered.row_values(u)))
            .collect();
        UserUserModel {
            users: data.users.clone(),
            items: data.items.clone(),
            centered_by_item: centered.transpose(),
            centered,
            norms,
            means,
            explicit,
        }
    }

    /// Cosine similarity of a centered query vector to every training user.
    fn similarities(&self, cols: &[u32], vals: &[f64], exclude: Option<usize>) -> Vec<f64> {
        let mut sims = vec![0.0; self.users.len()];
        let qnorm = norm(vals);
        if qnorm == 0.0 {
            return sims;
        }
        for (&j, &cq) in cols.iter().zip(vals) {
            let j = j as usize;
            for (&v, &cv) in self
                .centered_by_item
                .row_cols(j)
                .iter()
                .zip(self.centered_by_item.row_values(j))
            {
                sims[v as usize] += cq * cv;
            }
        }
        for (v, s) in sims.iter_mut().enumerate() {
            let n = self.norms[v];
            *s = if n > 0.0 { *s / (qnorm * n) } else { 0.0 };
        }
        if let Some(u) = exclude {
            sims[u] = 0.0;
        }
        sims
    }
}

/// User-user k-NN.
#[derive(Debug, Clone, Default)]
pub struct UserUser {
    pub config: UserUserConfig,
    model: Option<UserUserModel>,
}

impl UserUser {
    pub fn new(config: UserUserConfig) -> Self {
        UserUser {
            config,
            model: None,
        }
    }

    pub fn model(&self) -> Option<&UserUserModel> {
        self.model.as_ref()
    }
}

impl Algorithm for UserUser {
    fn name(&self) -> &'static str {
        "user-user"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        let explicit = self.config.feedback.resolve(&data)?;
        self.model = Some(UserUserModel::from_dataset(&data, explicit));
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    fn as_predictor(&self) -> Option<&dyn Predictor> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let mut p = ModelPayload::new(self.name(), &self.config)?;
        write_index_pair(&mut p, &m.users, &m.items);
        write_csr(&mut p, "centered.", &m.centered);
        p.push_f64s("norms", m.norms.clone());
        p.push_f64s("means", m.means.clone());
        p.push_u64s("explicit", vec![m.explicit as u64]);
        Ok(p)
    }
}

impl Persist for UserUser {
    fn from_payload(p: &ModelPayload) -> Result<Self> {
        let (users, items) = read_index_pair(p)?;
        let centered = read_csr(p, "centered.", users.len(), items.len())?;
        let norms = p.f64s("norms")?.to_vec();
        let means = p.f64s("means")?.to_vec();
        if norms.len() != users.len() || means.len() != users.len() {
            return Err(Error::Format("user-user arrays do not match user index".into()));
        }
        Ok(UserUser {
            config: p.params()?,
            model: Some(UserUserModel {
                users,
                items,
                centered_by_item: centered.transpose(),
                centered,
                norms,
                means,
                explicit: read_flag(p, "explicit")?,
            }),
        })
    }
}

impl Predictor for UserUser {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let known = m.users.index_of(user);
        let (cols, vals, mean) = match (fresh, known) {
            (Some(f), _) => {
                let (cols, raw) = index_fresh(&m.items, f);
                let mean = if m.explicit { row_mean(&raw) } else { 0.0 };
                let vals = raw
                    .iter()
                    .map(|r| if m.explicit { r - mean } else { 1.0 })
                    .collect();
                (cols, vals, mean)
            }
            (None, Some(u)) => (
                m.centered.row_cols(u).to_vec(),
                m.centered.row_values(u).to_vec(),
                m.means[u],
            ),
            (None, None) => return Ok(vec![None; items.len()]),
        };
        let sims = m.similarities(&cols, &vals, known);
        let cfg = &self.config;

        let mut nbrs: Vec<(f64, u32, f64)> = Vec::new();
        Ok(items
            .iter()
            .map(|item| {
                let i = m.items.index_of(item)?;
                nbrs.clear();
                for (&v, &cv) in m
                    .centered_by_item
                    .row_cols(i)
                    .iter()
                    .zip(m.centered_by_item.row_values(i))
                {
                    let s = sims[v as usize];
                    if s > cfg.min_sim {
                        nbrs.push((s, v, cv));
                    }
                }
                if nbrs.len() < cfg.min_nbrs || nbrs.is_empty() {
                    return None;
                }
                let by_sim = |a: &(f64, u32, f64), b: &(f64, u32, f64)| {
                    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
                };
                if nbrs.len() > cfg.nnbrs {
                    nbrs.select_nth_unstable_by(cfg.nnbrs - 1, by_sim);
                    nbrs.truncate(cfg.nnbrs);
                }
                nbrs.sort_unstable_by(by_sim);
                if m.explicit {
                    let pairs: Vec<(f64, f64)> = nbrs.iter().map(|&(s, _, c)| (s, c)).collect();
                    Some(mean + weighted_average(&pairs))
                } else {
                    Some(nbrs.iter().map(|n| n.0).sum())
                }
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// item-item

/// Fitted item-item state.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemItemModel {
    pub users: Index,
    pub items: Index,
    /// Raw training ratings, user-major.
    pub ratings: Csr,
    pub user_means: Vec<f64>,
    /// Row `i` lists neighbors of item `i` by descending similarity; the
    /// stored value is the similarity.
    pub neighbors: Vec<Vec<(u32, f64)>>,
    pub explicit: bool,
}

impl ItemItemModel {
    fn from_dataset(data: &Dataset, explicit: bool, cfg: &ItemItemConfig) -> Self {
        let user_means: Vec<f64> = (0..data.n_users())
            .map(|u| {
                if explicit {
                    row_mean(data.by_user.row_values(u))
                } else {
                    0.0
                }
            })
            .collect();
        let centered = data.by_user.map_values(|u, _, v| {
            if explicit {
                v - user_means[u]
            } else {
                1.0
            }
        });
        let neighbors = item_similarities(&centered, cfg.min_sim, cfg.save_nbrs);
        ItemItemModel {
            users: data.users.clone(),
            items: data.items.clone(),
            ratings: data.by_user.clone(),
            user_means,
            neighbors,
            explicit,
        }
    }
}

/// Truncated cosine similarity lists between the columns of `centered`.
///
/// Only pairs with similarity above `min_sim` are kept; each list is sorted
/// by descending similarity with ties in item order and cut to `save_nbrs`
/// entries when that is nonzero.
pub fn item_similarities(centered: &Csr, min_sim: f64, save_nbrs: usize) -> Vec<Vec<(u32, f64)>> {
    let by_item = centered.transpose();
    let n_items = by_item.n_rows();
    let norms: Vec<f64> = (0..n_items).map(|i| norm(by_item.row_values(i))).collect();

    (0..n_items)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; n_items], Vec::<u32>::new()),
            |(acc, touched), i| {
                touched.clear();
                for (&u, &cu) in by_item.row_cols(i).iter().zip(by_item.row_values(i)) {
                    let u = u as usize;
                    for (&j, &cj) in centered.row_cols(u).iter().zip(centered.row_values(u)) {
                        if acc[j as usize] == 0.0 {
                            touched.push(j);
                        }
                        acc[j as usize] += cu * cj;
                    }
                }
                let mut row = Vec::new();
                for &j in touched.iter() {
                    let dot = acc[j as usize];
                    acc[j as usize] = 0.0;
                    let j_us = j as usize;
                    if j_us == i || norms[i] == 0.0 || norms[j_us] == 0.0 {
                        continue;
                    }
                    let s = dot / (norms[i] * norms[j_us]);
                    if s > min_sim {
                        row.push((j, s.min(1.0)));
                    }
                }
                // `touched` may hold repeats when a partial sum returns to 0
                row.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                row.dedup_by_key(|e| e.0);
                if save_nbrs > 0 {
                    row.truncate(save_nbrs);
                }
                row
            },
        )
        .collect()
}

/// Item-item k-NN.
#[derive(Debug, Clone, Default)]
pub struct ItemItem {
    pub config: ItemItemConfig,
    model: Option<ItemItemModel>,
}

impl ItemItem {
    pub fn new(config: ItemItemConfig) -> Self {
        ItemItem {
            config,
            model: None,
        }
    }

    /// Use an already-built model.
    pub fn with_model(config: ItemItemConfig, model: ItemItemModel) -> Self {
        ItemItem {
            config,
            model: Some(model),
        }
    }

    pub fn model(&self) -> Option<&ItemItemModel> {
        self.model.as_ref()
    }
}

impl Algorithm for ItemItem {
    fn name(&self) -> &'static str {
        "item-item"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        let explicit = self.config.feedback.resolve(&data)?;
        log::debug!(
            "computing item similarities for {} items over {} ratings",
            data.n_items(),
            data.nnz()
        );
        self.model = Some(ItemItemModel::from_dataset(&data, explicit, &self.config));
        Ok(())
    }

    fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    fn as_predictor(&self) -> Option<&dyn Predictor> {
        Some(self)
    }

    fn to_payload(&self) -> Result<ModelPayload> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let mut p = ModelPayload::new(self.name(), &self.config)?;
        write_index_pair(&mut p, &m.users, &m.items);
        write_csr(&mut p, "ratings.", &m.ratings);
        p.push_f64s("user_means", m.user_means.clone());
        let mut ptr = vec![0usize];
        let mut idx = Vec::new();
        let mut sim = Vec::new();
        for row in &m.neighbors {
            for &(j, s) in row {
                idx.push(j as u64);
                sim.push(s);
            }
            ptr.push(idx.len());
        }
        p.push_usizes("nbr_ptr", &ptr);
        p.push_u64s("nbr_idx", idx);
        p.push_f64s("nbr_sim", sim);
        p.push_u64s("explicit", vec![m.explicit as u64]);
        Ok(p)
    }
}

impl Persist for ItemItem {
    fn from_payload(p: &ModelPayload) -> Result<Self> {
        let (users, items) = read_index_pair(p)?;
        let ratings = read_csr(p, "ratings.", users.len(), items.len())?;
        let user_means = p.f64s("user_means")?.to_vec();
        let ptr = p.usizes("nbr_ptr")?;
        let idx = p.u64s("nbr_idx")?;
        let sim = p.f64s("nbr_sim")?;
        if ptr.len() != items.len() + 1
            || ptr.last() != Some(&idx.len())
            || idx.len() != sim.len()
            || user_means.len() != users.len()
            || ptr.windows(2).any(|w| w[0] > w[1])
            || idx.iter().any(|&j| j as usize >= items.len())
        {
            return Err(Error::Format("inconsistent item-item arrays".into()));
        }
        let neighbors = ptr
            .windows(2)
            .map(|w| (w[0]..w[1]).map(|k| (idx[k] as u32, sim[k])).collect())
            .collect();
        Ok(ItemItem {
            config: p.params()?,
            model: Some(ItemItemModel {
                users,
                items,
                ratings,
                user_means,
                neighbors,
                explicit: read_flag(p, "explicit")?,
            }),
        })
    }
}

impl Predictor for ItemItem {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let (cols, raw) = match (fresh, m.users.index_of(user)) {
            (Some(f), _) => index_fresh(&m.items, f),
            (None, Some(u)) => (m.ratings.row_cols(u).to_vec(), m.ratings.row_values(u).to_vec()),
            (None, None) => return Ok(vec![None; items.len()]),
        };
        let mean = if m.explicit { row_mean(&raw) } else { 0.0 };
        // centered rating per item, NaN where unrated
        let mut rated = vec![f64::NAN; m.items.len()];
        for (&j, &r) in cols.iter().zip(&raw) {
            rated[j as usize] = if m.explicit { r - mean } else { 1.0 };
        }
        let cfg = &self.config;
        let mut nbrs: Vec<(f64, f64)> = Vec::with_capacity(cfg.nnbrs);
        Ok(items
            .iter()
            .map(|item| {
                let i = m.items.index_of(item)?;
                nbrs.clear();
                for &(j, s) in &m.neighbors[i] {
                    if s <= cfg.min_sim {
                        break;
                    }
                    let c = rated[j as usize];
                    if !c.is_nan() {
                        nbrs.push((s, c));
                        if nbrs.len() == cfg.nnbrs {
                            break;
                        }
                    }
                }
                if nbrs.len() < cfg.min_nbrs || nbrs.is_empty() {
                    None
                } else if m.explicit {
                    Some(mean + weighted_average(&nbrs))
                } else {
                    Some(nbrs.iter().map(|n| n.0).sum())
                }
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// persistence helpers shared with the factorization models

pub(crate) fn write_index_pair(p: &mut ModelPayload, users: &Index, items: &Index) {
    p.push_strs("users", users.ids().map(str::to_owned).collect());
    p.push_strs("items", items.ids().map(str::to_owned).collect());
}

pub(crate) fn read_index_pair(p: &ModelPayload) -> Result<(Index, Index)> {
    let users: Index = p.strs("users")?.iter().cloned().collect();
    let items: Index = p.strs("items")?.iter().cloned().collect();
    Ok((users, items))
}

pub(crate) fn write_csr(p: &mut ModelPayload, prefix: &str, m: &Csr) {
    p.push_usizes(format!("{prefix}row_ptr"), m.row_ptr());
    p.push_u64s(
        format!("{prefix}col_idx"),
        m.col_idx().iter().map(|&c| c as u64).collect(),
    );
    p.push_f64s(format!("{prefix}values"), m.values().to_vec());
}

pub(crate) fn read_csr(p: &ModelPayload, prefix: &str, n_rows: usize, n_cols: usize) -> Result<Csr> {
    let row_ptr = p.usizes(&format!("{prefix}row_ptr"))?;
    let col_idx = p
        .u64s(&format!("{prefix}col_idx"))?
        .iter()
        .map(|&c| u32::try_from(c).map_err(|_| Error::Format("column index overflow".into())))
        .collect::<Result<Vec<_>>>()?;
    let values = p.f64s(&format!("{prefix}values"))?.to_vec();
    Csr::from_parts(n_rows, n_cols, row_ptr, col_idx, values)
        .ok_or_else(|| Error::Format(format!("invalid sparse matrix {prefix}")))
}

pub(crate) fn read_flag(p: &ModelPayload, name: &str) -> Result<bool> {
    match p.u64s(name)? {
        [v] => Ok(*v != 0),
        _ => Err(Error::Format(format!("flag {name} must hold one value"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::testing::strings;

    fn fit_uu(rows: &[(&str, &str, f64)], cfg: UserUserConfig) -> UserUser {
        let mut a = UserUser::new(cfg);
        a.fit(&RatingTable::from_triples(rows.iter().copied()), &FitArgs::default())
            .unwrap();
        a
    }

    fn fit_ii(rows: &[(&str, &str, f64)], cfg: ItemItemConfig) -> ItemItem {
        let mut a = ItemItem::new(cfg);
        a.fit(&RatingTable::from_triples(rows.iter().copied()), &FitArgs::default())
            .unwrap();
        a
    }

    #[test]
    fn user_user_single_neighbor_closed_form() {
        // u: mean 2, centered (-1, +1); v: mean 3, centered (-1, +1, +1, -1).
        // One positive-similarity neighbor, so the score is
        // mu_u + (r_vc - mu_v) = 2 + (4 - 3) whatever the similarity.
        let rows = [
            ("u", "a", 1.0),
            ("u", "b", 3.0),
            ("v", "a", 2.0),
            ("v", "b", 4.0),
            ("v", "c", 4.0),
            ("v", "d", 2.0),
        ];
        let a = fit_uu(&rows, UserUserConfig::default());
        let p = a.predict_for_user("u", &strings(&["c"]), None).unwrap();
        assert!((p[0].unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn user_user_missing_cases() {
        let rows = [
            ("u", "a", 1.0),
            ("u", "b", 3.0),
            ("v", "a", 1.0),
            ("v", "b", 3.0),
            ("w", "a", 1.0),
            ("w", "z", 3.0),
        ];
        let a = fit_uu(&rows, UserUserConfig::default());
        // nobody but u rated "b"... v did; nobody else rated "q"
        let p = a
            .predict_for_user("u", &strings(&["q", "z"]), None)
            .unwrap();
        assert_eq!(p[0], None);
        // w's centered vector (-1 on a, +1 on z) vs u's (-1 on a, +1 on b):
        // cos = 1/2 > 0, so z is scorable
        assert!(p[1].is_some());
        assert_eq!(a.predict_for_user("ghost", &strings(&["a"]), None).unwrap(), [None]);
    }

    #[test]
    fn user_user_orthogonal_neighbors_are_ignored() {
        // u centered (-1, +1, 0 ...) on a, b; v centered on c, d only
        let rows = [
            ("u", "a", 1.0),
            ("u", "b", 3.0),
            ("v", "c", 1.0),
            ("v", "d", 3.0),
            ("v", "e", 2.0),
        ];
        let a = fit_uu(&rows, UserUserConfig::default());
        assert_eq!(a.predict_for_user("u", &strings(&["e"]), None).unwrap(), [None]);
    }

    #[test]
    fn user_user_centered_rows_have_zero_mean() {
        let rows = [
            ("u", "a", 1.0),
            ("u", "b", 3.5),
            ("u", "c", 5.0),
            ("v", "a", 2.0),
            ("v", "c", 4.0),
        ];
        let a = fit_uu(&rows, UserUserConfig::default());
        let m = a.model().unwrap();
        for u in 0..m.users.len() {
            let vals = m.centered.row_values(u);
            assert!(vals.iter().sum::<f64>().abs() / (vals.len() as f64) < 1e-9);
            assert!(m.norms[u] > 0.0);
        }
    }

    #[test]
    fn item_item_single_neighbor_closed_form() {
        // one neighbor j of i with s = 0.5; the user's centered rating of j
        // is +1 and the user mean is 3, so the score is 3 + 0.5*1/0.5 = 4
        let users: Index = ["u"].into_iter().collect();
        let items: Index = ["i", "j", "k"].into_iter().collect();
        let ratings = Csr::from_entries(1, 3, &[(0, 1, 4.0), (0, 2, 2.0)]);
        let model = ItemItemModel {
            users,
            items,
            ratings,
            user_means: vec![3.0],
            neighbors: vec![vec![(1, 0.5)], vec![], vec![]],
            explicit: true,
        };
        let a = ItemItem::with_model(ItemItemConfig::default(), model);
        let p = a.predict_for_user("u", &strings(&["i"]), None).unwrap();
        assert_eq!(p, [Some(4.0)]);
    }

    #[test]
    fn item_item_k_limits_neighborhood() {
        let users: Index = ["u"].into_iter().collect();
        let items: Index = ["i", "j", "k"].into_iter().collect();
        // centered: j = +1, k = -1 (mean 3)
        let ratings = Csr::from_entries(1, 3, &[(0, 1, 4.0), (0, 2, 2.0)]);
        let model = ItemItemModel {
            users,
            items,
            ratings,
            user_means: vec![3.0],
            neighbors: vec![vec![(2, 0.9), (1, 0.5)], vec![], vec![]],
            explicit: true,
        };
        let one = ItemItem::with_model(ItemItemConfig { nnbrs: 1, ..Default::default() }, model.clone());
        assert_eq!(one.predict_for_user("u", &strings(&["i"]), None).unwrap(), [Some(2.0)]);
        let two = ItemItem::with_model(ItemItemConfig::default(), model);
        let expected = 3.0 + (0.9 * -1.0 + 0.5 * 1.0) / 1.4;
        assert_eq!(two.predict_for_user("u", &strings(&["i"]), None).unwrap(), [Some(expected)]);
    }

    #[test]
    fn item_item_parallel_columns_have_unit_similarity() {
        // centered columns of a and b are identical
        let rows = [
            ("u", "a", 5.0),
            ("u", "b", 5.0),
            ("u", "c", 2.0),
            ("v", "a", 1.0),
            ("v", "b", 1.0),
            ("v", "c", 4.0),
        ];
        let a = fit_ii(&rows, ItemItemConfig::default());
        let m = a.model().unwrap();
        let (j, s) = m.neighbors[0][0];
        assert_eq!(m.items.id_of(j as usize), Some("b"));
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn item_item_disjoint_items_have_no_similarity() {
        let rows = [("u", "a", 5.0), ("u", "b", 1.0), ("v", "c", 4.0), ("v", "d", 2.0)];
        let a = fit_ii(&rows, ItemItemConfig::default());
        let m = a.model().unwrap();
        let a_nbrs: Vec<_> = m.neighbors[0].iter().map(|e| e.0).collect();
        assert!(!a_nbrs.contains(&2) && !a_nbrs.contains(&3));
        assert_eq!(a.predict_for_user("u", &strings(&["c"]), None).unwrap(), [None]);
    }

    #[test]
    fn save_nbrs_truncates() {
        let rows: Vec<(String, String, f64)> = (0..6)
            .flat_map(|u| (0..8).map(move |i| (format!("u{u}"), format!("i{i}"), ((u * i) % 5 + 1) as f64)))
            .collect();
        let refs: Vec<(&str, &str, f64)> = rows.iter().map(|(u, i, r)| (u.as_str(), i.as_str(), *r)).collect();
        let a = fit_ii(&refs, ItemItemConfig { save_nbrs: 2, ..Default::default() });
        assert!(a.model().unwrap().neighbors.iter().all(|r| r.len() <= 2));
        for row in &a.model().unwrap().neighbors {
            assert!(row.iter().all(|&(_, s)| s > 1e-6 && s <= 1.0));
        }
    }

    #[test]
    fn implicit_mode_sums_similarities() {
        let t = RatingTable::from_pairs([("u", "a"), ("u", "b"), ("v", "a"), ("v", "b"), ("v", "c")]);
        let mut a = ItemItem::default();
        a.fit(&t, &FitArgs::default()).unwrap();
        let m = a.model().unwrap();
        assert!(!m.explicit);
        let p = a.predict_for_user("u", &strings(&["c"]), None).unwrap()[0].unwrap();
        // c = (0,1), a = b = (1,1): cos = 1/sqrt(2) each
        assert!((p - 2.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(ItemItemConfig::from_params(Params::new("item-item").with("nnbrs", 0)).is_err());
        assert!(UserUserConfig::from_params(Params::new("user-user").with("min_nbrs", 30)).is_err());
        assert!(UserUserConfig::from_params(Params::new("user-user").with("feedback", "weird")).is_err());
        let c = ItemItemConfig::from_params(Params::new("item-item").with("save_nbrs", 5)).unwrap();
        assert_eq!(c.save_nbrs, 5);
    }
}
