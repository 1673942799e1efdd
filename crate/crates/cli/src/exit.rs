// SPDX-License-Identifier: Apache-2.0

//! Process exit codes.

use reckit::Error;

pub const SUCCESS: i32 = 0;
pub const USAGE: i32 = 2;
pub const DATA: i32 = 3;
pub const INFEASIBLE_SPLIT: i32 = 4;

/// Usage errors for bad arguments and parameters, split errors for
/// infeasible folds, data errors for everything else.
pub fn code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<crate::UsageError>().is_some() {
        return USAGE;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Parameter(_) => USAGE,
                Error::InfeasibleSplit(_) => INFEASIBLE_SPLIT,
                _ => DATA,
            };
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return USAGE;
        }
    }
    DATA
}
