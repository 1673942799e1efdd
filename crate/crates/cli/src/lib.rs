// SPDX-License-Identifier: Apache-2.0

//! Command implementations behind the `reckit` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod exit;
pub mod experiment;

use std::fmt;

/// A bad flag, config value or combination of settings (exit code 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
