// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reckit::RatingTable;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random explicit ratings with integer stars, every user and item present.
///
/// Each user rates between `min_per_user` and `n_items` items.
pub fn random_ratings(seed: u64, n_users: usize, n_items: usize, min_per_user: usize) -> RatingTable {
    let mut rng = rng(seed);
    let mut rows = Vec::new();
    let mut times = Vec::new();
    let mut items: Vec<usize> = (0..n_items).collect();
    for u in 0..n_users {
        let k = rng.random_range(min_per_user.min(n_items)..=n_items);
        items.shuffle(&mut rng);
        for &i in &items[..k] {
            let r = rng.random_range(1..=5) as f64;
            rows.push((format!("u{u}"), format!("i{i}"), r));
            times.push(rng.random_range(0..1_000_000));
        }
    }
    // every item appears at least once
    for i in 0..n_items {
        if !rows.iter().any(|(_, it, _)| *it == format!("i{i}")) {
            rows.push((format!("u{}", i % n_users), format!("i{i}"), 3.0));
            times.push(rng.random_range(0..1_000_000));
        }
    }
    RatingTable::from_triples(rows).with_timestamps(times).unwrap()
}

/// Fully dense ratings from a closure.
pub fn dense(n_users: usize, n_items: usize, f: impl Fn(usize, usize) -> f64) -> RatingTable {
    let mut rows = Vec::new();
    for u in 0..n_users {
        for i in 0..n_items {
            rows.push((format!("u{u}"), format!("i{i}"), f(u, i)));
        }
    }
    RatingTable::from_triples(rows)
}

pub fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Every registered algorithm with settings small enough for quick tests.
pub fn zoo() -> Vec<reckit::Params> {
    use reckit::Params;
    vec![
        Params::new("bias").with("damping", 2),
        Params::new("popular"),
        Params::new("random").with("seed", 3),
        Params::new("user-user").with("nnbrs", 5),
        Params::new("item-item").with("nnbrs", 5),
        Params::new("item-item").with("feedback", "implicit"),
        Params::new("biased-mf").with("features", 4).with("iterations", 5),
        Params::new("implicit-mf").with("features", 4).with("iterations", 5),
        Params::new("funk-svd").with("features", 3).with("epochs", 10),
    ]
}
