// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use reckit::mf::{
    cd_update_row, funk_step, BiasedMF, BiasedMFConfig, BiasedMFTrainer, Factors, FunkSVD, FunkSVDConfig,
    ImplicitMFConfig, ImplicitMFTrainer, RatingRange,
};
use reckit::{Algorithm, Dataset, FitArgs};

fn non_increasing(before: f64, after: f64) -> bool {
    after <= before + 1e-10 * before.abs().max(1.0)
}

#[test]
fn biased_mf_objective_never_rises_per_half_sweep() {
    let table = common::random_ratings(11, 50, 60, 5);
    let data = Dataset::build(&table).unwrap();
    for seed in 0..3 {
        let cfg = BiasedMFConfig {
            features: 8,
            reg: 0.1,
            seed,
            ..Default::default()
        };
        let mut t = BiasedMFTrainer::new(&data, cfg).unwrap();
        let mut last = t.objective();
        for sweep in 0..20 {
            t.user_step();
            let after_users = t.objective();
            assert!(non_increasing(last, after_users), "sweep {sweep} users: {last} -> {after_users}");
            t.item_step();
            let after_items = t.objective();
            assert!(non_increasing(after_users, after_items), "sweep {sweep} items: {after_users} -> {after_items}");
            last = after_items;
        }
        assert!(t.user_factors.is_finite() && t.item_factors.is_finite());
    }
}

#[test]
fn implicit_mf_loss_never_rises_per_round() {
    let table = common::random_ratings(12, 40, 50, 3);
    let data = Dataset::build(&table).unwrap();
    for cg_steps in [1, 3, 10] {
        let cfg = ImplicitMFConfig {
            features: 6,
            reg: 0.1,
            weight: 40.0,
            cg_steps,
            seed: 4,
            ..Default::default()
        };
        let mut t = ImplicitMFTrainer::new(&data, cfg).unwrap();
        let mut last = t.loss();
        for round in 0..15 {
            t.user_step();
            t.item_step();
            let loss = t.loss();
            assert!(non_increasing(last, loss), "cg_steps {cg_steps} round {round}: {last} -> {loss}");
            last = loss;
        }
    }
}

#[test]
fn cd_sweep_on_two_by_two_matches_closed_form() {
    let q = Factors::from_vec(2, 2, vec![0.5, -1.0, 2.0, 0.25]).unwrap();
    let resid = [1.5, -0.5];
    let lambda = 0.1;
    let reg_weight = lambda * 2.0;
    let mut p = [0.3, -0.2];
    let p0 = p;
    cd_update_row(&[0, 1], &resid, &q, reg_weight, &mut p);

    let e = |p: [f64; 2], i: usize| resid[i] - (p[0] * q.row(i)[0] + p[1] * q.row(i)[1]);
    let update = |p: [f64; 2], g: usize| {
        let num: f64 = (0..2).map(|i| q.row(i)[g] * (e(p, i) + p[g] * q.row(i)[g])).sum();
        let den: f64 = (0..2).map(|i| q.row(i)[g].powi(2)).sum::<f64>() + reg_weight;
        num / den
    };
    let first = update(p0, 0);
    let second = update([first, p0[1]], 1);
    assert!((p[0] - first).abs() <= 1e-12);
    assert!((p[1] - second).abs() <= 1e-12);
}

#[test]
fn rank_one_residuals_are_recovered() {
    // row and column factors sum to zero, so the bias stage removes exactly
    // the additive terms and leaves a·bᵀ behind
    let a = [1.0, -2.0, 0.5, 0.5];
    let b = [0.7, -0.3, 1.2, -1.6];
    let bu = [0.2, -0.1, 0.4, 0.0];
    let bi = [-0.3, 0.1, 0.0, 0.5];
    let table = common::dense(4, 4, |u, i| 3.0 + bu[u] + bi[i] + a[u] * b[i]);
    let data = Dataset::build(&table).unwrap();
    let cfg = BiasedMFConfig {
        features: 1,
        reg: 1e-6,
        iterations: 20,
        ..Default::default()
    };
    let mut t = BiasedMFTrainer::new(&data, cfg).unwrap();
    for _ in 0..cfg.iterations {
        t.user_step();
        t.item_step();
    }
    let rmse = t.train_rmse();
    assert!(rmse <= 1e-3, "training RMSE {rmse}");

    // the fitted algorithm reaches the same model
    let mut algo = BiasedMF::new(cfg);
    algo.fit(&table, &FitArgs::default()).unwrap();
    let p = algo.as_predictor().unwrap();
    let mut sse = 0.0;
    for k in 0..table.len() {
        let got = p.predict_for_user(table.user(k), &[table.item(k).to_owned()], None).unwrap()[0].unwrap();
        sse += (got - table.rating(k).unwrap()).powi(2);
    }
    assert!((sse / table.len() as f64).sqrt() <= 1e-3);
}

/// Half squared clamped error plus the ridge terms, as a function of one
/// (user, item) feature pair.
fn funk_loss(rating: f64, base: f64, p: f64, q: f64, reg: f64, range: RatingRange) -> f64 {
    let e = rating - range.clamp(base + p * q);
    0.5 * e * e + 0.5 * reg * (p * p + q * q)
}

proptest! {
    #[test]
    fn funk_step_follows_finite_difference_gradient(
        rating in 1.0f64..5.0,
        base in 1.5f64..4.5,
        p in -0.5f64..0.5,
        q in -0.5f64..0.5,
        lrate in 0.0005f64..0.01,
        reg in 0.0f64..0.1,
    ) {
        let range = RatingRange { min: 0.0, max: 6.0 };
        // interior points only: the clamp must be inactive
        prop_assume!((base + p * q) > 0.01 && (base + p * q) < 5.99);
        let (p1, q1) = funk_step(rating, base, p, q, lrate, reg, range);
        let h = 1e-6;
        let dp = (funk_loss(rating, base, p + h, q, reg, range) - funk_loss(rating, base, p - h, q, reg, range)) / (2.0 * h);
        let dq = (funk_loss(rating, base, p, q + h, reg, range) - funk_loss(rating, base, p, q - h, reg, range)) / (2.0 * h);
        prop_assert!(((p1 - p) / lrate + dp).abs() <= 1e-6, "dp {} vs {}", (p1 - p) / lrate, -dp);
        prop_assert!(((q1 - q) / lrate + dq).abs() <= 1e-6, "dq {} vs {}", (q1 - q) / lrate, -dq);
    }
}

#[test]
fn funk_step_hand_oracle() {
    let range = RatingRange { min: 1.0, max: 5.0 };
    let (p, q) = funk_step(4.0, 3.0, 0.1, 0.1, 0.001, 0.015, range);
    let e = 4.0 - (3.0 + 0.01);
    assert_eq!(p, 0.1 + 0.001 * (e * 0.1 - 0.015 * 0.1));
    assert_eq!(q, 0.1 + 0.001 * (e * 0.1 - 0.015 * 0.1));
}

#[test]
fn funk_zero_residuals_shrink_factors() {
    // a perfectly additive table leaves nothing for the features to fit
    let table = common::dense(6, 5, |u, i| 1.0 + u as f64 * 0.5 + i as f64 * 0.25);
    let data = Dataset::build(&table).unwrap();
    let cfg = FunkSVDConfig {
        features: 2,
        epochs: 50,
        lrate: 0.01,
        ..Default::default()
    };
    let model = FunkSVD::train(&data, &cfg).unwrap();
    for v in model.user_factors.as_slice().iter().chain(model.item_factors.as_slice()) {
        assert!(v.abs() < 0.1, "{v}");
    }
}
