// SPDX-License-Identifier: Apache-2.0

//! Synthetic explicit-rating data in the shape of MovieLens 100K.
//!
//! Users and items carry latent factors and offsets. Item choice is
//! weighted by a power-law popularity and by user-item affinity, so the
//! observed ratings are not missing at random. Ratings are rounded to the
//! 1..=5 star scale.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};

use crate::data::RatingTable;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    /// Minimum ratings per user.
    pub min_per_user: usize,
    /// Latent dimension of the generating model.
    pub latent: usize,
    /// Power-law exponent of item popularity.
    pub popularity_exponent: f64,
    /// Weight of affinity in item choice.
    pub choice_affinity: f64,
    /// Standard deviations of the user offsets, item offsets and noise.
    pub user_sd: f64,
    pub item_sd: f64,
    pub noise: f64,
    /// Weight of affinity in the rating.
    pub rating_affinity: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// 943 users, 1682 items, 100,000 ratings, at least 20 per user.
    pub fn ml100k(seed: u64) -> Self {
        SynthConfig {
            users: 943,
            items: 1682,
            ratings: 100_000,
            min_per_user: 20,
            latent: 8,
            popularity_exponent: 0.9,
            choice_affinity: 1.5,
            user_sd: 0.45,
            item_sd: 0.5,
            noise: 0.6,
            rating_affinity: 1.0,
            seed,
        }
    }

    /// Same generating model with `users` users at the same mean activity.
    /// Small sets keep at least 200 items and at most 25% density.
    pub fn scaled(users: usize, seed: u64) -> Self {
        let base = Self::ml100k(seed);
        let items = base.items.min((users * 6).max(200));
        let ratings = (base.ratings * users / base.users).min(users * items / 4);
        SynthConfig {
            users,
            items,
            ratings: ratings.max(users * base.min_per_user),
            ..base
        }
    }
}

fn user_counts(cfg: &SynthConfig, rng: &mut rng::Rng) -> Vec<usize> {
    let activity = LogNormal::new(0.0, 1.0).expect("valid lognormal");
    let weights: Vec<f64> = (0..cfg.users).map(|_| activity.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let extra = cfg.ratings - cfg.users * cfg.min_per_user;
    let mut counts: Vec<usize> = weights
        .iter()
        .map(|w| (cfg.min_per_user + (extra as f64 * w / total) as usize).min(cfg.items))
        .collect();
    let mut short = cfg.ratings - counts.iter().sum::<usize>();
    let mut u = 0;
    while short > 0 {
        if counts[u] < cfg.items {
            counts[u] += 1;
            short -= 1;
        }
        u = (u + 1) % cfg.users;
    }
    counts
}

/// Generate a rating table with user ids `1..=users` and item ids
/// `1..=items`, grouped by user, with increasing per-user timestamps.
pub fn generate(cfg: &SynthConfig) -> Result<RatingTable> {
    if cfg.users == 0 || cfg.items == 0 || cfg.latent == 0 {
        return Err(Error::Parameter("users, items and latent must be positive".into()));
    }
    if cfg.min_per_user > cfg.items
        || cfg.ratings < cfg.users * cfg.min_per_user
        || cfg.ratings > cfg.users * cfg.items
    {
        return Err(Error::Parameter(format!(
            "cannot place {} ratings for {} users over {} items with at least {} each",
            cfg.ratings, cfg.users, cfg.items, cfg.min_per_user
        )));
    }
    let mut rng = rng::seeded(cfg.seed);
    let k = cfg.latent;
    let std_normal = |rng: &mut rng::Rng| -> f64 { StandardNormal.sample(rng) };

    let mut ranks: Vec<usize> = (1..=cfg.items).collect();
    ranks.shuffle(&mut rng);
    let log_pop: Vec<f64> = ranks
        .iter()
        .map(|&r| -cfg.popularity_exponent * (r as f64).ln())
        .collect();
    let mean_log_pop = log_pop.iter().sum::<f64>() / cfg.items as f64;

    let item_bias = Normal::new(0.0, cfg.item_sd).expect("valid normal");
    let user_bias = Normal::new(0.0, cfg.user_sd).expect("valid normal");
    let noise = Normal::new(0.0, cfg.noise).expect("valid normal");
    let items_b: Vec<f64> = log_pop
        .iter()
        .map(|lp| item_bias.sample(&mut rng) + 0.08 * (lp - mean_log_pop))
        .collect();
    let items_q: Vec<f64> = (0..cfg.items * k).map(|_| std_normal(&mut rng)).collect();
    let counts = user_counts(cfg, &mut rng);

    let scale = 1.0 / (k as f64).sqrt();
    let mut users = Vec::with_capacity(cfg.ratings);
    let mut items = Vec::with_capacity(cfg.ratings);
    let mut ratings = Vec::with_capacity(cfg.ratings);
    let mut stamps = Vec::with_capacity(cfg.ratings);
    let mut keyed: Vec<(f64, usize, f64)> = Vec::with_capacity(cfg.items);
    for (u, &count) in counts.iter().enumerate() {
        let b_u = user_bias.sample(&mut rng);
        let p_u: Vec<f64> = (0..k).map(|_| std_normal(&mut rng)).collect();
        keyed.clear();
        for i in 0..cfg.items {
            let q = &items_q[i * k..(i + 1) * k];
            let aff = scale * p_u.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
            // Gumbel top-k samples without replacement in proportion to exp(weight)
            let gumbel = -(-rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).ln();
            keyed.push((log_pop[i] + cfg.choice_affinity * aff + gumbel, i, aff));
        }
        keyed.select_nth_unstable_by(count - 1, |a, b| b.0.total_cmp(&a.0));
        let mut chosen = keyed[..count].to_vec();
        chosen.shuffle(&mut rng);
        let mut t: i64 = 874_724_710 + rng.random_range(0..20_000_000);
        for (_, i, aff) in chosen {
            let raw = 3.53 + b_u + items_b[i] + cfg.rating_affinity * aff + noise.sample(&mut rng);
            users.push((u + 1).to_string());
            items.push((i + 1).to_string());
            ratings.push(raw.round().clamp(1.0, 5.0));
            t += rng.random_range(1..5_000);
            stamps.push(t);
        }
    }
    RatingTable::new(users, items, Some(ratings), Some(stamps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ml100k_shape() {
        let t = generate(&SynthConfig::ml100k(7)).unwrap();
        assert_eq!(t.len(), 100_000);
        let by_user = t.rows_by_user();
        assert_eq!(by_user.len(), 943);
        assert!(by_user.values().all(|r| r.len() >= 20));
        let mut items: Vec<&String> = t.items().iter().collect();
        items.sort();
        items.dedup();
        assert!(items.len() <= 1682);
        assert!(t.ratings().unwrap().iter().all(|r| (1.0..=5.0).contains(r) && r.fract() == 0.0));
        // no duplicate (user, item) pairs
        let mut pairs: Vec<(&str, &str)> = (0..t.len()).map(|k| (t.user(k), t.item(k))).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), t.len());
    }

    #[test]
    fn seeded() {
        let cfg = SynthConfig::scaled(50, 3);
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        assert_ne!(generate(&cfg).unwrap(), generate(&SynthConfig { seed: 4, ..cfg }).unwrap());
    }

    #[test]
    fn infeasible_shape_rejected() {
        let cfg = SynthConfig {
            ratings: 10,
            ..SynthConfig::scaled(50, 0)
        };
        assert!(matches!(generate(&cfg), Err(Error::Parameter(_))));
    }
}
