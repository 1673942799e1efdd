// SPDX-License-Identifier: Apache-2.0

//! Rating tables, identifier indexes, sparse matrices and file loaders.

mod dataset;
mod index;
pub mod io;
mod sparse;
mod table;

pub use dataset::Dataset;
pub use index::Index;
pub use io::{load_csv, read_ratings, save_csv, write_ml100k, write_table, FileFormat};
pub use sparse::Csr;
pub use table::{ExtraColumn, RatingTable};

/// Build the indexed matrix form of a rating table.
pub fn build_dataset(ratings: &RatingTable) -> crate::Result<Dataset> {
    Dataset::build(ratings)
}
