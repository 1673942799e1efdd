// SPDX-License-Identifier: Apache-2.0

/// Compressed sparse row matrix of `f64` values.
///
/// Column indices within each row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    /// Build from `(row, col, value)` entries. Later duplicates of a
    /// `(row, col)` cell replace earlier ones.
    pub fn from_entries(n_rows: usize, n_cols: usize, entries: &[(usize, usize, f64)]) -> Csr {
        let mut counts = vec![0usize; n_rows];
        for &(r, c, _) in entries {
            assert!(r < n_rows && c < n_cols, "entry ({r}, {c}) out of bounds");
            counts[r] += 1;
        }
        let mut start = vec![0usize; n_rows + 1];
        for r in 0..n_rows {
            start[r + 1] = start[r] + counts[r];
        }
        // bucket by row, keeping input order so the last duplicate can win
        let mut fill = start.clone();
        let mut bucket: Vec<(u32, usize)> = vec![(0, 0); entries.len()];
        for (pos, &(r, c, _)) in entries.iter().enumerate() {
            bucket[fill[r]] = (c as u32, pos);
            fill[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut bucket[start[r]..start[r + 1]];
            row.sort_unstable();
            let mut k = 0;
            while k < row.len() {
                let col = row[k].0;
                let mut last = row[k].1;
                while k < row.len() && row[k].0 == col {
                    last = last.max(row[k].1);
                    k += 1;
                }
                col_idx.push(col);
                values.push(entries[last].2);
            }
            row_ptr.push(col_idx.len());
        }
        Csr {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Reassemble from raw arrays, checking structural validity.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f64>,
    ) -> Option<Csr> {
        if row_ptr.len() != n_rows + 1
            || row_ptr[0] != 0
            || *row_ptr.last()? != col_idx.len()
            || col_idx.len() != values.len()
        {
            return None;
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return None;
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c as usize >= n_cols) {
                return None;
            }
        }
        Some(Csr {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_extent(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row]..self.row_ptr[row + 1]
    }

    pub fn row_cols(&self, row: usize) -> &[u32] {
        &self.col_idx[self.row_extent(row)]
    }

    pub fn row_values(&self, row: usize) -> &[f64] {
        &self.values[self.row_extent(row)]
    }

    pub fn row_nnz(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    /// Value at `(row, col)` if stored.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let cols = self.row_cols(row);
        cols.binary_search(&(col as u32))
            .ok()
            .map(|k| self.row_values(row)[k])
    }

    /// Iterate stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            self.row_cols(r)
                .iter()
                .zip(self.row_values(r))
                .map(move |(&c, &v)| (r, c as usize, v))
        })
    }

    /// Same matrix with every stored value replaced.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Csr {
        let mut out = self.clone();
        for r in 0..self.n_rows {
            for k in self.row_extent(r) {
                out.values[k] = f(r, self.col_idx[k] as usize, self.values[k]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let mut col_idx = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows are visited in order, so each transposed row stays sorted
        for r in 0..self.n_rows {
            for k in self.row_extent(r) {
                let c = self.col_idx[k] as usize;
                col_idx[fill[c]] = r as u32;
                values[fill[c]] = self.values[k];
                fill[c] += 1;
            }
        }
        Csr {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }
}
