// SPDX-License-Identifier: Apache-2.0

//! Matrix factorization: biased MF trained by coordinate-descent ALS,
//! implicit-feedback MF trained by conjugate-gradient ALS, and FunkSVD.

use std::str::FromStr;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{Algorithm, FitArgs, FreshRatings, Predictor};
use crate::baselines::{no_ratings, BiasModel, Damping};
use crate::data::{Csr, Dataset, Index, RatingTable};
use crate::error::{Error, Result};
use crate::knn::{read_index_pair, write_index_pair};
use crate::params::Params;
use crate::persist::{ModelPayload, Persist};
use crate::rng;

/// Dense row-major factor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    rows: usize,
    features: usize,
    data: Vec<f64>,
}

impl Factors {
    pub fn zeros(rows: usize, features: usize) -> Self {
        Factors {
            rows,
            features,
            data: vec![0.0; rows * features],
        }
    }

    pub fn filled(rows: usize, features: usize, value: f64) -> Self {
        Factors {
            rows,
            features,
            data: vec![value; rows * features],
        }
    }

    /// Entries drawn uniformly from `(-scale, scale)`.
    pub fn random(rows: usize, features: usize, scale: f64, rng: &mut rng::Rng) -> Self {
        let data = (0..rows * features)
            .map(|_| rng.random_range(-scale..scale))
            .collect();
        Factors {
            rows,
            features,
            data,
        }
    }

    pub fn from_vec(rows: usize, features: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * features {
            return Err(Error::Format(format!(
                "factor matrix has {} values, expected {rows}x{features}",
                data.len()
            )));
        }
        Ok(Factors {
            rows,
            features,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.features..(r + 1) * self.features]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.features..(r + 1) * self.features]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `FᵀF`, `features × features` row-major.
    pub fn gram(&self) -> Vec<f64> {
        let f = self.features;
        let mut g = vec![0.0; f * f];
        for r in 0..self.rows {
            let row = self.row(r);
            for a in 0..f {
                for b in 0..f {
                    g[a * f + b] += row[a] * row[b];
                }
            }
        }
        g
    }

    fn par_rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [f64])> {
        self.data.par_chunks_mut(self.features.max(1)).enumerate()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_features(features: usize) -> Result<()> {
    if features == 0 {
        Err(Error::Parameter("features must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn warn_rank(name: &str, features: usize, data: &Dataset) {
    if features > data.n_users().min(data.n_items()) {
        log::warn!(
            "{name}: {features} features exceeds the smaller matrix dimension ({}x{})",
            data.n_users(),
            data.n_items()
        );
    }
}

// ---------------------------------------------------------------------------
// biased MF

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasedMFConfig {
    pub features: usize,
    pub reg: f64,
    pub iterations: usize,
    pub damping: Damping,
    pub seed: u64,
}

impl Default for BiasedMFConfig {
    fn default() -> Self {
        BiasedMFConfig {
            features: 50,
            reg: 0.1,
            iterations: 20,
            damping: Damping::default(),
            seed: 0,
        }
    }
}

impl BiasedMFConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let d = Self::default();
        let damping: Option<f64> = p.take_opt("damping")?;
        let cfg = BiasedMFConfig {
            features: p.take("features", d.features)?,
            reg: p.take("reg", d.reg)?,
            iterations: p.take("iterations", d.iterations)?,
            damping: Damping {
                user: p.take("user_damping", damping.unwrap_or(0.0))?,
                item: p.take("item_damping", damping.unwrap_or(0.0))?,
            },
            seed: p.take("seed", d.seed)?,
        };
        p.finish()?;
        check_features(cfg.features)?;
        cfg.damping.validate()?;
        if !(cfg.reg >= 0.0) {
            return Err(Error::Parameter(format!("reg must be nonnegative, got {}", cfg.reg)));
        }
        Ok(cfg)
    }
}

/// Coordinate-descent update of one factor row against frozen factors.
///
/// `resid` holds the bias residuals of the row's ratings and `other` the
/// opposite factor rows for the same columns. Each coordinate is set to
/// its exact minimizer of `Σ (resid − row·other)² + reg_weight·|row|²`.
pub fn cd_update_row(cols: &[u32], resid: &[f64], other: &Factors, reg_weight: f64, row: &mut [f64]) {
    let mut err: Vec<f64> = cols
        .iter()
        .zip(resid)
        .map(|(&c, &r)| r - dot(row, other.row(c as usize)))
        .collect();
    for g in 0..row.len() {
        let mut num = 0.0;
        let mut den = reg_weight;
        for (&c, e) in cols.iter().zip(&err) {
            let q = other.row(c as usize)[g];
            num += q * (e + row[g] * q);
            den += q * q;
        }
        if den == 0.0 {
            continue;
        }
        let new = num / den;
        let delta = new - row[g];
        for (&c, e) in cols.iter().zip(err.iter_mut()) {
            *e -= delta * other.row(c as usize)[g];
        }
        row[g] = new;
    }
}

/// Step-wise trainer for [`BiasedMF`].
pub struct BiasedMFTrainer {
    pub config: BiasedMFConfig,
    pub bias: BiasModel,
    /// Bias residuals, user-major and item-major.
    resid_by_user: Csr,
    resid_by_item: Csr,
    pub user_factors: Factors,
    pub item_factors: Factors,
}

impl BiasedMFTrainer {
    pub fn new(data: &Dataset, config: BiasedMFConfig) -> Result<Self> {
        check_features(config.features)?;
        config.damping.validate()?;
        data.require_explicit("biased-mf")?;
        warn_rank("biased-mf", config.features, data);
        let bias = BiasModel::estimate(data, config.damping);
        let resid_by_user = data
            .by_user
            .map_values(|u, i, r| r - bias.score_index(Some(u), Some(i)));
        let resid_by_item = resid_by_user.transpose();
        let mut rng = rng::seeded(config.seed);
        let user_factors = Factors::random(data.n_users(), config.features, 0.01, &mut rng);
        let item_factors = Factors::random(data.n_items(), config.features, 0.01, &mut rng);
        Ok(BiasedMFTrainer {
            config,
            bias,
            resid_by_user,
            resid_by_item,
            user_factors,
            item_factors,
        })
    }

    /// Update every user row with item factors frozen.
    pub fn user_step(&mut self) {
        let (m, other, reg) = (&self.resid_by_user, &self.item_factors, self.config.reg);
        self.user_factors.par_rows_mut().for_each(|(u, row)| {
            let cols = m.row_cols(u);
            cd_update_row(cols, m.row_values(u), other, reg * cols.len() as f64, row);
        });
    }

    /// Update every item row with user factors frozen.
    pub fn item_step(&mut self) {
        let (m, other, reg) = (&self.resid_by_item, &self.user_factors, self.config.reg);
        self.item_factors.par_rows_mut().for_each(|(i, row)| {
            let cols = m.row_cols(i);
            cd_update_row(cols, m.row_values(i), other, reg * cols.len() as f64, row);
        });
    }

    /// `Σ e² + λ Σ_u |R_u|·|p_u|² + λ Σ_i |R_i|·|q_i|²`.
    pub fn objective(&self) -> f64 {
        let m = &self.resid_by_user;
        let mut sse = 0.0;
        for (u, i, r) in m.entries() {
            let e = r - dot(self.user_factors.row(u), self.item_factors.row(i));
            sse += e * e;
        }
        let user_pen: f64 = (0..m.n_rows())
            .map(|u| m.row_nnz(u) as f64 * dot(self.user_factors.row(u), self.user_factors.row(u)))
            .sum();
        let item_pen: f64 = (0..self.resid_by_item.n_rows())
            .map(|i| {
                self.resid_by_item.row_nnz(i) as f64
                    * dot(self.item_factors.row(i), self.item_factors.row(i))
            })
            .sum();
        sse + self.config.reg * (user_pen + item_pen)
    }

    /// Training RMSE of the full prediction (bias plus factors).
    pub fn train_rmse(&self) -> f64 {
        let m = &self.resid_by_user;
        let sse: f64 = m
            .entries()
            .map(|(u, i, r)| {
                let e = r - dot(self.user_factors.row(u), self.item_factors.row(i));
                e * e
            })
            .sum();
        (sse / m.nnz() as f64).sqrt()
    }

    pub fn into_model(self) -> BiasedMFModel {
        BiasedMFModel {
            bias: self.bias,
            user_factors: self.user_factors,
            item_factors: self.item_factors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasedMFModel {
    pub bias: BiasModel,
    pub user_factors: Factors,
    pub item_factors: Factors,
}

impl BiasedMFModel {
    fn score(&self, user: Option<usize>, item: Option<usize>) -> f64 {
        let base = self.bias.score_index(user, item);
        match (user, item) {
            (Some(u), Some(i)) => base + dot(self.user_factors.row(u), self.item_factors.row(i)),
            _ => base,
        }
    }

    fn write_payload(&self, p: &mut ModelPayload) {
        self.bias.write_payload("bias.", p);
        p.push_f64s("user_factors", self.user_factors.as_slice().to_vec());
        p.push_f64s("item_factors", self.item_factors.as_slice().to_vec());
    }

    fn read_payload(p: &ModelPayload, features: usize) -> Result<Self> {
        let bias = BiasModel::read_payload("bias.", p)?;
        let user_factors =
            Factors::from_vec(bias.users.len(), features, p.f64s("user_factors")?.to_vec())?;
        let item_factors =
            Factors::from_vec(bias.items.len(), features, p.f64s("item_factors")?.to_vec())?;
        Ok(BiasedMFModel {
            bias,
            user_factors,
            item_factors,
        })
    }
}

/// Biased matrix factorization for explicit ratings.
#[derive(Debug, Clone, Default)]
pub struct BiasedMF {
    pub config: BiasedMFConfig,
    model: Option<BiasedMFModel>,
}

impl BiasedMF {
    pub fn new(config: BiasedMFConfig) -> Self {
        BiasedMF {
            config,
            model: None,
        }
    }

    pub fn with_model(config: BiasedMFConfig, model: BiasedMFModel) -> Self {
        BiasedMF {
            config,
            model: Some(model),
        }
    }

    pub fn model(&self) -> Option<&BiasedMFModel> {
        self.model.as_ref()
    }
}

impl Algorithm for BiasedMF {
    fn name(&self) -> &'static str {
        "biased-mf"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        let mut trainer = BiasedMFTrainer::new(&data, self.config)?;
        for iter in 0..self.config.iterations {
            trainer.user_step();
            trainer.item_step();
            if log::log_enabled!(log::Level::Debug) {
                log::debug!("biased-mf round {}: objective {:.6}", iter + 1, trainer.objective());
            }
            if !(trainer.user_factors.is_finite() && trainer.item_factors.is_finite()) {
                return Err(Error::Fit(format!("non-finite factors after round {}", iter + 1)));
            }
        }
        self.model = Some(trainer.into_model());
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
        m.write_payload(&mut p);
        Ok(p)
    }
}

impl Persist for BiasedMF {
    fn from_payload(p: &ModelPayload) -> Result<Self> {
        let config: BiasedMFConfig = p.params()?;
        Ok(BiasedMF {
            model: Some(BiasedMFModel::read_payload(p, config.features)?),
            config,
        })
    }
}

impl Predictor for BiasedMF {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        _fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let u = m.bias.users.index_of(user);
        Ok(items
            .iter()
            .map(|i| Some(m.score(u, m.bias.items.index_of(i))))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// implicit MF

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImplicitMFConfig {
    pub features: usize,
    pub reg: f64,
    pub weight: f64,
    pub iterations: usize,
    pub cg_steps: usize,
    pub seed: u64,
}

impl Default for ImplicitMFConfig {
    fn default() -> Self {
        ImplicitMFConfig {
            features: 50,
            reg: 0.1,
            weight: 40.0,
            iterations: 20,
            cg_steps: 3,
            seed: 0,
        }
    }
}

impl ImplicitMFConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let d = Self::default();
        let cfg = ImplicitMFConfig {
            features: p.take("features", d.features)?,
            reg: p.take("reg", d.reg)?,
            weight: p.take("weight", d.weight)?,
            iterations: p.take("iterations", d.iterations)?,
            cg_steps: p.take("cg_steps", d.cg_steps)?,
            seed: p.take("seed", d.seed)?,
        };
        p.finish()?;
        check_features(cfg.features)?;
        if !(cfg.reg >= 0.0 && cfg.weight >= 0.0) {
            return Err(Error::Parameter("reg and weight must be nonnegative".into()));
        }
        if cfg.cg_steps == 0 {
            return Err(Error::Parameter("cg_steps must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// Run `steps` conjugate-gradient iterations on one implicit ALS row
/// system, starting from `x`.
///
/// The system is `(G + Σ_k (c_k − 1)·o_k o_kᵀ + reg·I)·x = Σ_k c_k·p_k·o_k`,
/// with `G` the Gram matrix of the opposite factors, `o_k` the opposite
/// rows for the row's interactions, `c_k = 1 + weight·r_k` and
/// `p_k = 1[r_k > 0]`. Only the interacted rows enter beyond `G`.
pub fn cg_solve_row(
    cols: &[u32],
    values: &[f64],
    other: &Factors,
    gram: &[f64],
    reg: f64,
    weight: f64,
    steps: usize,
    x: &mut [f64],
) {
    let f = x.len();
    let apply = |v: &[f64], out: &mut [f64]| {
        for a in 0..f {
            out[a] = reg * v[a] + dot(&gram[a * f..(a + 1) * f], v);
        }
        for (&c, &r) in cols.iter().zip(values) {
            let o = other.row(c as usize);
            let w = weight * r * dot(o, v);
            for a in 0..f {
                out[a] += w * o[a];
            }
        }
    };

    let mut b = vec![0.0; f];
    for (&c, &r) in cols.iter().zip(values) {
        if r > 0.0 {
            let conf = 1.0 + weight * r;
            for (ba, oa) in b.iter_mut().zip(other.row(c as usize)) {
                *ba += conf * oa;
            }
        }
    }
    if b.iter().all(|&v| v == 0.0) {
        // the exact solution of a positive-definite system with zero rhs
        x.fill(0.0);
        return;
    }

    let mut ax = vec![0.0; f];
    apply(x, &mut ax);
    let mut resid: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut dir = resid.clone();
    let mut rs = dot(&resid, &resid);
    let mut ad = vec![0.0; f];
    for _ in 0..steps {
        if rs == 0.0 {
            break;
        }
        apply(&dir, &mut ad);
        let curv = dot(&dir, &ad);
        if !(curv > 0.0) {
            break;
        }
        let alpha = rs / curv;
        for a in 0..f {
            x[a] += alpha * dir[a];
            resid[a] -= alpha * ad[a];
        }
        let rs_new = dot(&resid, &resid);
        let beta = rs_new / rs;
        for a in 0..f {
            dir[a] = resid[a] + beta * dir[a];
        }
        rs = rs_new;
    }
}

/// Step-wise trainer for [`ImplicitMF`].
pub struct ImplicitMFTrainer {
    pub config: ImplicitMFConfig,
    by_user: Csr,
    by_item: Csr,
    pub user_factors: Factors,
    pub item_factors: Factors,
}

impl ImplicitMFTrainer {
    pub fn new(data: &Dataset, config: ImplicitMFConfig) -> Result<Self> {
        check_features(config.features)?;
        if let Some(v) = data.by_user.values().iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Parameter(format!(
                "implicit-mf needs nonnegative interaction values, found {v}"
            )));
        }
        warn_rank("implicit-mf", config.features, data);
        let mut rng = rng::seeded(config.seed);
        let user_factors = Factors::random(data.n_users(), config.features, 0.01, &mut rng);
        let item_factors = Factors::random(data.n_items(), config.features, 0.01, &mut rng);
        Ok(ImplicitMFTrainer {
            config,
            by_user: data.by_user.clone(),
            by_item: data.by_item.clone(),
            user_factors,
            item_factors,
        })
    }

    pub fn user_step(&mut self) {
        let gram = self.item_factors.gram();
        let c = self.config;
        let (m, other) = (&self.by_user, &self.item_factors);
        self.user_factors.par_rows_mut().for_each(|(u, row)| {
            cg_solve_row(m.row_cols(u), m.row_values(u), other, &gram, c.reg, c.weight, c.cg_steps, row);
        });
    }

    pub fn item_step(&mut self) {
        let gram = self.user_factors.gram();
        let c = self.config;
        let (m, other) = (&self.by_item, &self.user_factors);
        self.item_factors.par_rows_mut().for_each(|(i, row)| {
            cg_solve_row(m.row_cols(i), m.row_values(i), other, &gram, c.reg, c.weight, c.cg_steps, row);
        });
    }

    /// `Σ_ui c_ui (p_ui − x_u·y_i)² + λ(|X|² + |Y|²)` over all user-item pairs.
    pub fn loss(&self) -> f64 {
        let gram = self.item_factors.gram();
        let f = self.config.features;
        let w = self.config.weight;
        let mut total = 0.0;
        for u in 0..self.by_user.n_rows() {
            let x = self.user_factors.row(u);
            // Σ_i (x·y_i)² over every item
            let mut all: f64 = 0.0;
            for a in 0..f {
                all += x[a] * dot(&gram[a * f..(a + 1) * f], x);
            }
            total += all;
            for (&i, &r) in self.by_user.row_cols(u).iter().zip(self.by_user.row_values(u)) {
                let s = dot(x, self.item_factors.row(i as usize));
                let p = if r > 0.0 { 1.0 } else { 0.0 };
                let c = 1.0 + w * r;
                total += c * (p - s) * (p - s) - s * s;
            }
        }
        total
            + self.config.reg * (self.user_factors.squared_norm() + self.item_factors.squared_norm())
    }

    pub fn into_model(self, users: Index, items: Index) -> ImplicitMFModel {
        ImplicitMFModel {
            users,
            items,
            user_factors: self.user_factors,
            item_factors: self.item_factors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitMFModel {
    pub users: Index,
    pub items: Index,
    pub user_factors: Factors,
    pub item_factors: Factors,
}

/// Confidence-weighted ALS factorization for implicit feedback.
#[derive(Debug, Clone, Default)]
pub struct ImplicitMF {
    pub config: ImplicitMFConfig,
    model: Option<ImplicitMFModel>,
}

impl ImplicitMF {
    pub fn new(config: ImplicitMFConfig) -> Self {
        ImplicitMF {
            config,
            model: None,
        }
    }

    pub fn model(&self) -> Option<&ImplicitMFModel> {
        self.model.as_ref()
    }
}

impl Algorithm for ImplicitMF {
    fn name(&self) -> &'static str {
        "implicit-mf"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        let mut trainer = ImplicitMFTrainer::new(&data, self.config)?;
        for iter in 0..self.config.iterations {
            trainer.user_step();
            trainer.item_step();
            if log::log_enabled!(log::Level::Debug) {
                log::debug!("implicit-mf round {}: loss {:.6}", iter + 1, trainer.loss());
            }
            if !(trainer.user_factors.is_finite() && trainer.item_factors.is_finite()) {
                return Err(Error::Fit(format!("non-finite factors after round {}", iter + 1)));
            }
        }
        self.model = Some(trainer.into_model(data.users, data.items));
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
        p.push_f64s("user_factors", m.user_factors.as_slice().to_vec());
        p.push_f64s("item_factors", m.item_factors.as_slice().to_vec());
        Ok(p)
    }
}

impl Persist for ImplicitMF {
    fn from_payload(p: &ModelPayload) -> Result<Self> {
        let config: ImplicitMFConfig = p.params()?;
        let (users, items) = read_index_pair(p)?;
        let user_factors = Factors::from_vec(users.len(), config.features, p.f64s("user_factors")?.to_vec())?;
        let item_factors = Factors::from_vec(items.len(), config.features, p.f64s("item_factors")?.to_vec())?;
        Ok(ImplicitMF {
            config,
            model: Some(ImplicitMFModel {
                users,
                items,
                user_factors,
                item_factors,
            }),
        })
    }
}

impl Predictor for ImplicitMF {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        _fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let Some(u) = m.users.index_of(user) else {
            return Ok(vec![None; items.len()]);
        };
        let x = m.user_factors.row(u);
        Ok(items
            .iter()
            .map(|i| m.items.index_of(i).map(|i| dot(x, m.item_factors.row(i))))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// FunkSVD

/// Inclusive rating range used for clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingRange {
    pub min: f64,
    pub max: f64,
}

impl RatingRange {
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

impl FromStr for RatingRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("invalid rating range {s:?}; expected min,max"));
        let (a, b) = s.split_once([',', ':']).ok_or_else(bad)?;
        let range = RatingRange {
            min: a.trim().parse().map_err(|_| bad())?,
            max: b.trim().parse().map_err(|_| bad())?,
        };
        if range.min <= range.max {
            Ok(range)
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunkSVDConfig {
    pub features: usize,
    pub lrate: f64,
    pub reg: f64,
    /// Epochs per feature.
    pub epochs: usize,
    /// Clamp range; the observed training range when unset.
    pub range: Option<RatingRange>,
    pub damping: Damping,
}

impl Default for FunkSVDConfig {
    fn default() -> Self {
        FunkSVDConfig {
            features: 50,
            lrate: 0.001,
            reg: 0.015,
            epochs: 100,
            range: None,
            damping: Damping::default(),
        }
    }
}

impl FunkSVDConfig {
    pub fn from_params(mut p: Params) -> Result<Self> {
        let d = Self::default();
        let damping: Option<f64> = p.take_opt("damping")?;
        let cfg = FunkSVDConfig {
            features: p.take("features", d.features)?,
            lrate: p.take("lrate", d.lrate)?,
            reg: p.take("reg", d.reg)?,
            epochs: p.take("epochs", d.epochs)?,
            range: p.take_opt("range")?,
            damping: Damping {
                user: p.take("user_damping", damping.unwrap_or(0.0))?,
                item: p.take("item_damping", damping.unwrap_or(0.0))?,
            },
        };
        p.finish()?;
        check_features(cfg.features)?;
        cfg.damping.validate()?;
        Ok(cfg)
    }
}

/// Initial value of every FunkSVD factor entry.
pub const FUNK_INIT: f64 = 0.1;

/// One FunkSVD stochastic-gradient update for a single rating.
///
/// `base` is the clamped prediction from the bias and earlier features.
/// Returns the updated `(user, item)` feature values; both updates use the
/// pre-update values.
pub fn funk_step(
    rating: f64,
    base: f64,
    user_value: f64,
    item_value: f64,
    lrate: f64,
    reg: f64,
    range: RatingRange,
) -> (f64, f64) {
    let pred = range.clamp(base + user_value * item_value);
    let err = rating - pred;
    let du = lrate * (err * item_value - reg * user_value);
    let di = lrate * (err * user_value - reg * item_value);
    (user_value + du, item_value + di)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunkSVDModel {
    pub bias: BiasModel,
    pub user_factors: Factors,
    pub item_factors: Factors,
    pub range: RatingRange,
}

impl FunkSVDModel {
    fn score(&self, user: Option<usize>, item: Option<usize>) -> f64 {
        let mut v = self.bias.score_index(user, item);
        if let (Some(u), Some(i)) = (user, item) {
            v += dot(self.user_factors.row(u), self.item_factors.row(i));
        }
        self.range.clamp(v)
    }
}

/// Simon Funk's feature-at-a-time gradient descent factorization.
#[derive(Debug, Clone, Default)]
pub struct FunkSVD {
    pub config: FunkSVDConfig,
    model: Option<FunkSVDModel>,
}

impl FunkSVD {
    pub fn new(config: FunkSVDConfig) -> Self {
        FunkSVD {
            config,
            model: None,
        }
    }

    pub fn model(&self) -> Option<&FunkSVDModel> {
        self.model.as_ref()
    }

    /// Train on an indexed dataset. Ratings are visited in user-major order.
    pub fn train(data: &Dataset, config: &FunkSVDConfig) -> Result<FunkSVDModel> {
        check_features(config.features)?;
        config.damping.validate()?;
        data.require_explicit("funk-svd")?;
        let values = data.by_user.values();
        let range = config.range.unwrap_or_else(|| RatingRange {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
        let bias = BiasModel::estimate(data, config.damping);
        let entries: Vec<(usize, usize, f64)> = data.by_user.entries().collect();
        let mut base: Vec<f64> = entries
            .iter()
            .map(|&(u, i, _)| range.clamp(bias.score_index(Some(u), Some(i))))
            .collect();
        let f = config.features;
        let mut uf = Factors::filled(data.n_users(), f, FUNK_INIT);
        let mut itf = Factors::filled(data.n_items(), f, FUNK_INIT);
        for g in 0..f {
            for _ in 0..config.epochs {
                for (s, &(u, i, r)) in entries.iter().enumerate() {
                    let (pu, qi) = funk_step(
                        r,
                        base[s],
                        uf.row(u)[g],
                        itf.row(i)[g],
                        config.lrate,
                        config.reg,
                        range,
                    );
                    uf.row_mut(u)[g] = pu;
                    itf.row_mut(i)[g] = qi;
                }
            }
            for (s, &(u, i, _)) in entries.iter().enumerate() {
                base[s] = range.clamp(base[s] + uf.row(u)[g] * itf.row(i)[g]);
            }
            log::trace!("funk-svd finished feature {g}");
        }
        if !(uf.is_finite() && itf.is_finite()) {
            return Err(Error::Fit("non-finite FunkSVD factors".into()));
        }
        Ok(FunkSVDModel {
            bias,
            user_factors: uf,
            item_factors: itf,
            range,
        })
    }
}

impl Algorithm for FunkSVD {
    fn name(&self) -> &'static str {
        "funk-svd"
    }

    fn fit(&mut self, ratings: &RatingTable, _args: &FitArgs) -> Result<()> {
        let data = Dataset::build(ratings).map_err(no_ratings)?;
        self.model = Some(Self::train(&data, &self.config)?);
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
        m.bias.write_payload("bias.", &mut p);
        p.push_f64s("user_factors", m.user_factors.as_slice().to_vec());
        p.push_f64s("item_factors", m.item_factors.as_slice().to_vec());
        p.push_f64s("range", vec![m.range.min, m.range.max]);
        Ok(p)
    }
}

impl Persist for FunkSVD {
    fn from_payload(p: &ModelPayload) -> Result<Self> {
        let config: FunkSVDConfig = p.params()?;
        let bias = BiasModel::read_payload("bias.", p)?;
        let user_factors = Factors::from_vec(bias.users.len(), config.features, p.f64s("user_factors")?.to_vec())?;
        let item_factors = Factors::from_vec(bias.items.len(), config.features, p.f64s("item_factors")?.to_vec())?;
        let range = match p.f64s("range")? {
            [min, max] => RatingRange { min: *min, max: *max },
            _ => return Err(Error::Format("range must hold two values".into())),
        };
        Ok(FunkSVD {
            config,
            model: Some(FunkSVDModel {
                bias,
                user_factors,
                item_factors,
                range,
            }),
        })
    }
}

impl Predictor for FunkSVD {
    fn predict_for_user(
        &self,
        user: &str,
        items: &[String],
        _fresh: Option<&FreshRatings>,
    ) -> Result<Vec<Option<f64>>> {
        let m = self.model.as_ref().ok_or(Error::NotFitted)?;
        let u = m.bias.users.index_of(user);
        Ok(items
            .iter()
            .map(|i| Some(m.score(u, m.bias.items.index_of(i))))
            .collect())
    }
}
