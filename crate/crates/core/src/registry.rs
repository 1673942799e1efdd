// SPDX-License-Identifier: Apache-2.0

//! Construct algorithms by name and load saved models.

use std::path::Path;

use crate::algo::{Algorithm, TopN, UnratedItems};
use crate::baselines::{Bias, BiasConfig, Popular, Random, RandomConfig};
use crate::error::{Error, Result};
use crate::knn::{ItemItem, ItemItemConfig, UserUser, UserUserConfig};
use crate::mf::{BiasedMF, BiasedMFConfig, FunkSVD, FunkSVDConfig, ImplicitMF, ImplicitMFConfig};
use crate::params::Params;
use crate::persist::{ModelPayload, Persist};

/// Names accepted by [`build_algorithm`].
pub const ALGORITHMS: [&str; 8] = [
    "bias",
    "popular",
    "random",
    "user-user",
    "item-item",
    "biased-mf",
    "implicit-mf",
    "funk-svd",
];

/// Build an unfitted algorithm from its name and hyperparameters.
pub fn build_algorithm(params: Params) -> Result<Box<dyn Algorithm>> {
    Ok(match params.algorithm() {
        "bias" => Box::new(Bias::new(BiasConfig::from_params(params)?)),
        "popular" => {
            params.finish()?;
            Box::new(Popular::new())
        }
        "random" => Box::new(Random::new(RandomConfig::from_params(params)?)),
        "user-user" => Box::new(UserUser::new(UserUserConfig::from_params(params)?)),
        "item-item" => Box::new(ItemItem::new(ItemItemConfig::from_params(params)?)),
        "biased-mf" => Box::new(BiasedMF::new(BiasedMFConfig::from_params(params)?)),
        "implicit-mf" => Box::new(ImplicitMF::new(ImplicitMFConfig::from_params(params)?)),
        "funk-svd" => Box::new(FunkSVD::new(FunkSVDConfig::from_params(params)?)),
        other => {
            return Err(Error::Parameter(format!(
                "unknown algorithm {other:?}; expected one of {}",
                ALGORITHMS.join(", ")
            )))
        }
    })
}

/// Rebuild a fitted algorithm from its payload.
pub fn from_payload(p: &ModelPayload) -> Result<Box<dyn Algorithm>> {
    Ok(match p.algorithm.as_str() {
        "bias" => Box::new(Bias::from_payload(p)?),
        "popular" => Box::new(Popular::from_payload(p)?),
        "random" => Box::new(Random::from_payload(p)?),
        "user-user" => Box::new(UserUser::from_payload(p)?),
        "item-item" => Box::new(ItemItem::from_payload(p)?),
        "biased-mf" => Box::new(BiasedMF::from_payload(p)?),
        "implicit-mf" => Box::new(ImplicitMF::from_payload(p)?),
        "funk-svd" => Box::new(FunkSVD::from_payload(p)?),
        "topn" => {
            let inner = from_payload(&p.unwrap_inner()?)?;
            let selector = UnratedItems::read_payload("selector.", p)?;
            Box::new(TopN::from_parts(inner, selector))
        }
        other => return Err(Error::Format(format!("unknown model type {other:?}"))),
    })
}

pub fn save_model(algo: &dyn Algorithm, path: impl AsRef<Path>) -> Result<()> {
    algo.to_payload()?.save(path)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Box<dyn Algorithm>> {
    from_payload(&ModelPayload::load(path)?)
}
