use super::{check_len, DenseMatrix, LinalgError};

/// Compressed sparse column matrix.
///
/// Row indices are strictly increasing within each column; the structure is
/// validated on construction and never mutated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if col_ptr.len() != cols + 1 {
            return Err(LinalgError::InvalidStructure(format!(
                "expected {} column offsets, got {}",
                cols + 1,
                col_ptr.len()
            )));
        }
        if col_ptr[0] != 0 {
            return Err(LinalgError::InvalidStructure("first column offset must be 0".into()));
        }
        if col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(LinalgError::InvalidStructure("column offsets decrease".into()));
        }
        let nnz = col_ptr[cols];
        if row_idx.len() != nnz || values.len() != nnz {
            return Err(LinalgError::InvalidStructure(format!(
                "last column offset {nnz} does not match {} indices / {} values",
                row_idx.len(),
                values.len()
            )));
        }
        for j in 0..cols {
            let idx = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            if idx.iter().any(|&r| r >= rows) {
                return Err(LinalgError::InvalidStructure(format!("row index out of range in column {j}")));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LinalgError::InvalidStructure(format!(
                    "row indices not strictly increasing in column {j}"
                )));
            }
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Assembles from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows || c >= cols {
                return Err(LinalgError::InvalidStructure(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
        }
        sorted.sort_by_key(|t| (t.1, t.0));
        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_idx.push(r);
            values.push(v);
            col_ptr[c + 1] += 1;
            last = Some((r, c));
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Self::new(rows, cols, col_ptr, row_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut triplets = Vec::new();
        for j in 0..d.cols() {
            for i in 0..d.rows() {
                let v = d[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(d.rows(), d.cols(), &triplets).expect("dense source is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(row, value)` over the stored entries of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Iterates `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    /// `A v`
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.cols, v.len())?;
        let mut out = vec![0.0; self.rows];
        for (j, vj) in v.iter().enumerate() {
            if *vj == 0.0 {
                continue;
            }
            for (i, a) in self.column(j) {
                out[i] += a * vj;
            }
        }
        Ok(out)
    }

    /// `Aᵀ v`
    pub fn matvec_transpose(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.rows, v.len())?;
        Ok((0..self.cols)
            .map(|j| self.column(j).map(|(i, a)| a * v[i]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Dense `AᵀA` (n×n), built from column inner products.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = DenseMatrix::zeros(n, n);
        let mut scratch = vec![0.0; self.rows];
        for j in 0..n {
            for (i, v) in self.column(j) {
                scratch[i] = v;
            }
            for k in j..n {
                let s: f64 = self.column(k).map(|(i, v)| v * scratch[i]).sum();
                g[(j, k)] = s;
                g[(k, j)] = s;
            }
            for (i, _) in self.column(j) {
                scratch[i] = 0.0;
            }
        }
        g
    }

    /// Dense `AAᵀ` (m×m), accumulated column by column.
    pub fn outer_gram(&self) -> DenseMatrix {
        let m = self.rows;
        let mut g = DenseMatrix::zeros(m, m);
        for j in 0..self.cols {
            let col: Vec<(usize, f64)> = self.column(j).collect();
            for &(r, vr) in &col {
                for &(c, vc) in &col {
                    g[(r, c)] += vr * vc;
                }
            }
        }
        g
    }
}
