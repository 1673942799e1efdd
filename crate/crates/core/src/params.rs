// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// String-valued hyperparameters as given on a command line or in a config.
///
/// Consumers take the keys they know; [`Params::finish`] rejects leftovers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    algorithm: String,
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn new(algorithm: &str) -> Self {
        Params {
            algorithm: algorithm.to_owned(),
            values: BTreeMap::new(),
        }
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_owned(), value.to_string());
        self
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_owned(), value.to_string());
    }

    /// Parse `key=value`.
    pub fn insert_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected key=value, got {pair:?}")))?;
        self.insert(k.trim(), v.trim());
        Ok(())
    }

    pub fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.values.remove(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                Error::Parameter(format!(
                    "{}: invalid value {raw:?} for {key}",
                    self.algorithm
                ))
            }),
        }
    }

    pub fn take_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::Parameter(format!(
                    "{}: invalid value {raw:?} for {key}",
                    self.algorithm
                ))
            }),
        }
    }

    pub fn finish(self) -> Result<()> {
        if self.values.is_empty() {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "{}: unknown parameters {:?}",
                self.algorithm,
                self.values.keys().collect::<Vec<_>>()
            )))
        }
    }
}
