// SPDX-License-Identifier: Apache-2.0

use indexmap::IndexSet;

/// Bidirectional map between opaque identifiers and dense indices.
///
/// Indices are assigned in insertion order and are contiguous in `[0, len)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Index {
    ids: IndexSet<String>,
}

impl Index {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `id`, inserting it if it is new.
    pub fn intern(&mut self, id: &str) -> usize {
        match self.ids.get_index_of(id) {
            Some(k) => k,
            None => self.ids.insert_full(id.to_owned()).0,
        }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.get_index_of(id)
    }

    pub fn id_of(&self, index: usize) -> Option<&str> {
        self.ids.get_index(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.ids.iter().map(String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains(id)
    }
}

impl<S: Into<String>> FromIterator<S> for Index {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        Index {
            ids: iter.into_iter().map(Into::into).collect(),
        }
    }
}
