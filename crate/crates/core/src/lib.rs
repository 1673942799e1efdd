// SPDX-License-Identifier: Apache-2.0

//! Building blocks for offline recommender-system experiments.
//!
//! The pieces compose in the order an experiment runs:
//!
//! - [`data`]: rating tables, loaders and the sparse matrix views
//! - [`crossfold`]: user-oriented train/test splitting
//! - [`algo`]: the `fit` / `predict_for_user` / `recommend` interfaces and
//!   the top-N adapter, with algorithms in [`baselines`], [`knn`] and [`mf`]
//! - [`batch`]: parallel prediction and recommendation over test users
//! - [`metrics`]: prediction accuracy and top-N list metrics
//! - [`registry`]: algorithms by name, model save and load

pub mod algo;
pub mod baselines;
pub mod batch;
pub mod crossfold;
pub mod data;
mod error;
pub mod knn;
pub mod metrics;
pub mod mf;
pub mod params;
pub mod persist;
pub mod registry;
pub mod rng;
pub mod synth;

pub use algo::{adapt, Algorithm, CandidateSelector, FitArgs, Predictor, Recommender, Scored, TopN};
pub use batch::{batch_predict, batch_recommend};
pub use crossfold::{RowSelector, TrainTestPair};
pub use data::{Dataset, Index, RatingTable};
pub use error::{Error, Result};
pub use metrics::{PredictionTable, RecList, TruthTable};
pub use params::Params;
pub use registry::{build_algorithm, load_model, save_model};
