// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the benchmarks.

use reckit::synth::{generate, SynthConfig};
use reckit::{adapt, build_algorithm, Algorithm, FitArgs, Params, RatingTable};

/// Generated ratings for `users` users at ML-100K density.
pub fn ratings(users: usize) -> RatingTable {
    generate(&SynthConfig::scaled(users, 42)).expect("generator settings are valid")
}

/// Algorithm configurations covered by the benchmarks.
pub fn configs() -> Vec<(&'static str, Params)> {
    vec![
        ("bias", Params::new("bias")),
        ("popular", Params::new("popular")),
        ("item-item", Params::new("item-item")),
        ("user-user", Params::new("user-user")),
        ("biased-mf", Params::new("biased-mf").with("features", 20)),
        ("implicit-mf", Params::new("implicit-mf").with("features", 20)),
        ("funk-svd", Params::new("funk-svd").with("features", 20)),
    ]
}

/// Build, adapt and fit one configuration.
pub fn fitted(params: Params, ratings: &RatingTable) -> Box<dyn Algorithm> {
    let mut algo = adapt(build_algorithm(params).expect("known algorithm"));
    algo.fit(ratings, &FitArgs::default()).expect("fit succeeds");
    algo
}
