//! Dense input matrices and the CSRV (compressed sparse row/value) layout.
//!
//! A CSRV matrix stores the distinct non-zero values once, in a
//! [`ValueDictionary`], and describes the matrix as a single symbol sequence:
//! every non-zero entry becomes a `(value index, column)` pair and every row
//! is terminated by a delimiter. Rows may hold their pairs in any order.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};

/// Treats both `+0.0` and `-0.0` as zero.
#[inline]
pub(crate) fn is_zero(v: f64) -> bool {
    v == 0.0
}

/// Row-major dense matrix of `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries. NaN entries are rejected.
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {n_rows}x{n_cols}"
            )));
        }
        let expected = n_rows
            .checked_mul(n_cols)
            .ok_or_else(|| Error::InvalidArgument("matrix dimensions overflow".into()))?;
        check_len(expected, entries.len())?;
        if let Some(pos) = entries.iter().position(|v| v.is_nan()) {
            return Err(Error::NaN {
                row: pos / n_cols,
                col: pos % n_cols,
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Self::new(n_rows, n_cols, vec![0.0; n_rows * n_cols])
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            check_len(n_cols, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, entries)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|v| !is_zero(**v)).count()
    }

    /// Copies rows `[start, end)` into a new matrix.
    pub fn row_slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_rows {
            return Err(Error::InvalidArgument(format!(
                "row range {start}..{end} invalid for {} rows",
                self.n_rows
            )));
        }
        Self::new(
            end - start,
            self.n_cols,
            self.entries[start * self.n_cols..end * self.n_cols].to_vec(),
        )
    }

    /// Returns a copy whose column `p` is column `order[p]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        check_len(self.n_cols, order.len())?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            entries.extend(order.iter().map(|&c| row[c]));
        }
        Self::new(self.n_rows, self.n_cols, entries)
    }
}

/// The distinct non-zero values of a matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValueDictionary {
    values: Vec<f64>,
}

impl ValueDictionary {
    /// Validates that every value is non-zero, not NaN, and bitwise-distinct.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if v.is_nan() || is_zero(*v) {
                return Err(Error::MalformedInput(format!(
                    "dictionary entry {i} is {v}, expected a non-zero number"
                )));
            }
            if seen.insert(v.to_bits(), i).is_some() {
                return Err(Error::MalformedInput(format!(
                    "dictionary entry {i} ({v}) is duplicated"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, index: u32) -> f64 {
        self.values[index as usize]
    }
}

/// Assigns dictionary indices to values in first-occurrence order.
#[derive(Default)]
pub(crate) struct DictionaryBuilder {
    values: Vec<f64>,
    index: HashMap<u64, u32>,
}

impl DictionaryBuilder {
    pub(crate) fn intern(&mut self, v: f64) -> u32 {
        let next = self.values.len() as u32;
        *self.index.entry(v.to_bits()).or_insert_with(|| {
            self.values.push(v);
            next
        })
    }

    pub(crate) fn finish(self) -> ValueDictionary {
        ValueDictionary {
            values: self.values,
        }
    }
}

/// One element of the CSRV sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CsrvSymbol {
    /// A non-zero entry: `dict[value]` stored in column `col`.
    Pair { value: u32, col: u32 },
    /// End of the current row.
    RowDelimiter,
}

/// A matrix in CSRV form: shared value dictionary plus symbol sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrvMatrix {
    n_rows: usize,
    n_cols: usize,
    dict: Arc<ValueDictionary>,
    symbols: Vec<CsrvSymbol>,
}

impl CsrvMatrix {
    /// Scans `m` row by row, left to right.
    pub fn build(m: &DenseMatrix) -> Self {
        let mut builder = DictionaryBuilder::default();
        let symbols = csrv_symbols(m, &mut builder);
        Self {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            dict: Arc::new(builder.finish()),
            symbols,
        }
    }

    /// Assembles a CSRV matrix from its parts, checking every structural invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        dict: Arc<ValueDictionary>,
        symbols: Vec<CsrvSymbol>,
    ) -> Result<Self> {
        let mut rows = 0usize;
        for (pos, sym) in symbols.iter().enumerate() {
            match *sym {
                CsrvSymbol::RowDelimiter => rows += 1,
                CsrvSymbol::Pair { value, col } => {
                    if value as usize >= dict.len() {
                        return Err(Error::MalformedInput(format!(
                            "symbol {pos}: value index {value} out of range for dictionary of {}",
                            dict.len()
                        )));
                    }
                    if col as usize >= n_cols {
                        return Err(Error::MalformedInput(format!(
                            "symbol {pos}: column {col} out of range for {n_cols} columns"
                        )));
                    }
                    if rows == n_rows {
                        return Err(Error::MalformedInput(
                            "pair after the final row delimiter".into(),
                        ));
                    }
                }
            }
        }
        if rows != n_rows {
            return Err(Error::MalformedInput(format!(
                "expected {n_rows} row delimiters, found {rows}"
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            dict,
            symbols,
        })
    }

    /// Crate-internal constructor for sequences already known to be valid.
    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        dict: Arc<ValueDictionary>,
        symbols: Vec<CsrvSymbol>,
    ) -> Self {
        debug_assert_eq!(
            symbols
                .iter()
                .filter(|s| **s == CsrvSymbol::RowDelimiter)
                .count(),
            n_rows
        );
        Self {
            n_rows,
            n_cols,
            dict,
            symbols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn dict(&self) -> &ValueDictionary {
        &self.dict
    }

    pub fn shared_dict(&self) -> &Arc<ValueDictionary> {
        &self.dict
    }

    pub fn symbols(&self) -> &[CsrvSymbol] {
        &self.symbols
    }

    /// Number of non-zero entries (pairs) in the sequence.
    pub fn nnz(&self) -> usize {
        self.symbols.len() - self.n_rows
    }

    /// Iterates the pairs of each row, without delimiters.
    pub fn rows(&self) -> impl Iterator<Item = &[CsrvSymbol]> + '_ {
        self.symbols
            .split(|s| *s == CsrvSymbol::RowDelimiter)
            .take(self.n_rows)
    }

    /// Rebuilds the dense matrix.
    pub fn decode(&self) -> Result<DenseMatrix> {
        let mut entries = vec![0.0; self.n_rows * self.n_cols];
        let mut row = 0usize;
        for sym in &self.symbols {
            match *sym {
                CsrvSymbol::RowDelimiter => row += 1,
                CsrvSymbol::Pair { value, col } => {
                    let col = col as usize;
                    if col >= self.n_cols || row >= self.n_rows {
                        return Err(Error::MalformedInput(format!(
                            "pair at row {row} column {col} outside {}x{}",
                            self.n_rows, self.n_cols
                        )));
                    }
                    let v = *self.dict.values.get(value as usize).ok_or_else(|| {
                        Error::MalformedInput(format!("value index {value} out of range"))
                    })?;
                    entries[row * self.n_cols + col] = v;
                }
            }
        }
        DenseMatrix::new(self.n_rows, self.n_cols, entries)
    }

    /// `y = M x` by one forward scan of the sequence.
    pub fn right_mult(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.right_mult_into(x, &mut y)?;
        Ok(y)
    }

    /// Writes `M x` into `y` and returns the number of symbols visited.
    pub fn right_mult_into(&self, x: &[f64], y: &mut [f64]) -> Result<usize> {
        check_len(self.n_cols, x.len())?;
        check_len(self.n_rows, y.len())?;
        let v = self.dict.values();
        let mut row = 0usize;
        let mut acc = 0.0;
        let mut visits = 0usize;
        for sym in &self.symbols {
            visits += 1;
            match *sym {
                CsrvSymbol::Pair { value, col } => acc += v[value as usize] * x[col as usize],
                CsrvSymbol::RowDelimiter => {
                    y[row] = acc;
                    row += 1;
                    acc = 0.0;
                }
            }
        }
        Ok(visits)
    }

    /// `x^t = y^t M` by one forward scan of the sequence.
    pub fn left_mult(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_cols];
        self.left_mult_into(y, &mut x)?;
        Ok(x)
    }

    /// Accumulates `y^t M` into a zeroed `x` and returns the number of symbols visited.
    pub fn left_mult_into(&self, y: &[f64], x: &mut [f64]) -> Result<usize> {
        check_len(self.n_rows, y.len())?;
        check_len(self.n_cols, x.len())?;
        x.fill(0.0);
        let v = self.dict.values();
        let mut row = 0usize;
        let mut visits = 0usize;
        for sym in &self.symbols {
            visits += 1;
            match *sym {
                CsrvSymbol::Pair { value, col } => {
                    x[col as usize] += y[row] * v[value as usize];
                }
                CsrvSymbol::RowDelimiter => row += 1,
            }
        }
        Ok(visits)
    }
}

pub(crate) fn csrv_symbols(m: &DenseMatrix, dict: &mut DictionaryBuilder) -> Vec<CsrvSymbol> {
    let mut symbols = Vec::with_capacity(m.nnz() + m.n_rows());
    for r in 0..m.n_rows() {
        for (c, &v) in m.row(r).iter().enumerate() {
            if !is_zero(v) {
                symbols.push(CsrvSymbol::Pair {
                    value: dict.intern(v),
                    col: c as u32,
                });
            }
        }
        symbols.push(CsrvSymbol::RowDelimiter);
    }
    symbols
}
