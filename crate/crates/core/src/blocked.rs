//! Row-block partitioning and parallel multiplication.
//!
//! A matrix with `n` rows split into `b` blocks gets blocks of `ceil(n / b)`
//! rows, the last ones possibly shorter (or empty). All blocks share one value
//! dictionary. Right multiplication writes each block's disjoint slice of the
//! output; left multiplication computes one partial vector per block and sums
//! the partials in block order, so results are reproducible run to run.

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::grammar::Grammar;
use crate::matrix::{CsrvMatrix, CsrvSymbol, DenseMatrix, ValueDictionary};
use crate::multiply::{left_mult_into, right_mult_into, EvalTable, Visits};
use crate::repair::repair_compress;

/// A horizontal slice of a matrix that can multiply on its own.
pub trait RowBlock: Sync {
    fn block_rows(&self) -> usize;

    fn right_into(
        &self,
        dict: &ValueDictionary,
        x: &[f64],
        y: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits>;

    fn left_into(
        &self,
        dict: &ValueDictionary,
        y: &[f64],
        x: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits>;
}

impl RowBlock for Grammar {
    fn block_rows(&self) -> usize {
        self.n_rows()
    }

    fn right_into(
        &self,
        dict: &ValueDictionary,
        x: &[f64],
        y: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits> {
        right_mult_into(self, dict, x, y, table)
    }

    fn left_into(
        &self,
        dict: &ValueDictionary,
        y: &[f64],
        x: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits> {
        left_mult_into(self, dict, y, x, table)
    }
}

/// Per-block scratch buffers, reusable across multiplications.
#[derive(Debug, Default)]
pub struct Scratch {
    tables: Vec<EvalTable>,
    partials: Vec<Vec<f64>>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, blocks: usize, n_cols: usize) {
        self.tables.resize_with(blocks, EvalTable::new);
        self.partials.resize_with(blocks, Vec::new);
        for p in &mut self.partials {
            p.resize(n_cols, 0.0);
        }
    }
}

/// Half-open row ranges of a `b`-way split of `n_rows` rows.
pub fn block_ranges(n_rows: usize, blocks: usize) -> Vec<Range<usize>> {
    let per = n_rows.div_ceil(blocks.max(1));
    (0..blocks)
        .map(|i| (i * per).min(n_rows)..((i + 1) * per).min(n_rows))
        .collect()
}

pub(crate) fn check_block_count(n_rows: usize, blocks: usize) -> Result<()> {
    if blocks == 0 || blocks > n_rows {
        return Err(Error::InvalidArgument(format!(
            "block count {blocks} must be between 1 and the row count {n_rows}"
        )));
    }
    Ok(())
}

/// Splits a CSRV matrix at row boundaries; every part shares the dictionary.
pub fn split_csrv(c: &CsrvMatrix, blocks: usize) -> Result<Vec<CsrvMatrix>> {
    check_block_count(c.n_rows(), blocks)?;
    let ranges = block_ranges(c.n_rows(), blocks);
    let mut parts = Vec::with_capacity(blocks);
    let mut rows = c.rows();
    for r in ranges {
        let mut syms = Vec::new();
        for row in rows.by_ref().take(r.len()) {
            syms.extend_from_slice(row);
            syms.push(CsrvSymbol::RowDelimiter);
        }
        parts.push(CsrvMatrix::from_parts_unchecked(
            r.len(),
            c.n_cols(),
            c.shared_dict().clone(),
            syms,
        ));
    }
    Ok(parts)
}

pub(crate) fn par_right_mult<B: RowBlock>(
    blocks: &[B],
    dict: &ValueDictionary,
    x: &[f64],
    y: &mut [f64],
    scratch: &mut Scratch,
) -> Result<Visits> {
    let total: usize = blocks.iter().map(RowBlock::block_rows).sum();
    check_len(total, y.len())?;
    scratch.prepare(blocks.len(), 0);
    let mut slices = Vec::with_capacity(blocks.len());
    let mut rest = y;
    for b in blocks {
        let (head, tail) = rest.split_at_mut(b.block_rows());
        slices.push(head);
        rest = tail;
    }
    let visits = blocks
        .par_iter()
        .zip(slices.into_par_iter())
        .zip(scratch.tables.par_iter_mut())
        .map(|((b, ys), t)| b.right_into(dict, x, ys, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_visits(visits))
}

pub(crate) fn par_left_mult<B: RowBlock>(
    blocks: &[B],
    dict: &ValueDictionary,
    y: &[f64],
    x: &mut [f64],
    scratch: &mut Scratch,
) -> Result<Visits> {
    let total: usize = blocks.iter().map(RowBlock::block_rows).sum();
    check_len(total, y.len())?;
    let n_cols = x.len();
    scratch.prepare(blocks.len(), n_cols);
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut start = 0;
    for b in blocks {
        offsets.push(start..start + b.block_rows());
        start += b.block_rows();
    }
    let visits = blocks
        .par_iter()
        .zip(offsets.into_par_iter())
        .zip(
            scratch
                .tables
                .par_iter_mut()
                .zip(scratch.partials.par_iter_mut()),
        )
        .map(|((b, r), (t, p))| b.left_into(dict, &y[r], p, t))
        .collect::<Result<Vec<_>>>()?;

    match scratch.partials.split_first() {
        Some((first, rest)) => {
            x.copy_from_slice(first);
            for p in rest {
                for (xi, pi) in x.iter_mut().zip(p) {
                    *xi += *pi;
                }
            }
        }
        None => x.fill(0.0),
    }
    Ok(sum_visits(visits))
}

fn sum_visits(v: Vec<Visits>) -> Visits {
    v.into_iter().fold(Visits::default(), |mut acc, x| {
        acc += x;
        acc
    })
}

/// Runs `f` on a thread pool with exactly `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// A matrix compressed as independent row blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockedMatrix {
    n_rows: usize,
    n_cols: usize,
    dict: Arc<ValueDictionary>,
    blocks: Vec<Grammar>,
}

impl BlockedMatrix {
    /// Builds the dictionary globally, then compresses each row block in parallel.
    pub fn build(m: &DenseMatrix, blocks: usize) -> Result<Self> {
        check_block_count(m.n_rows(), blocks)?;
        Self::from_csrv_blocks(split_csrv(&CsrvMatrix::build(m), blocks)?)
    }

    /// Compresses already split (and possibly reordered) CSRV blocks.
    pub fn from_csrv_blocks(parts: Vec<CsrvMatrix>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("no blocks".into()))?;
        let (n_cols, dict) = (first.n_cols(), first.shared_dict().clone());
        if parts
            .iter()
            .any(|p| p.n_cols() != n_cols || !Arc::ptr_eq(p.shared_dict(), &dict))
        {
            return Err(Error::InvalidArgument(
                "blocks must share column count and dictionary".into(),
            ));
        }
        let n_rows = parts.iter().map(CsrvMatrix::n_rows).sum();
        let blocks = parts.par_iter().map(repair_compress).collect();
        Ok(Self {
            n_rows,
            n_cols,
            dict,
            blocks,
        })
    }

    pub fn from_grammars(blocks: Vec<Grammar>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidArgument("no blocks".into()))?;
        let (n_cols, dict) = (first.n_cols(), first.shared_dict().clone());
        if blocks
            .iter()
            .any(|g| g.n_cols() != n_cols || g.shared_dict() != &dict)
        {
            return Err(Error::InvalidArgument(
                "blocks must share column count and dictionary".into(),
            ));
        }
        Ok(Self {
            n_rows: blocks.iter().map(Grammar::n_rows).sum(),
            n_cols,
            dict,
            blocks,
        })
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

    pub fn blocks(&self) -> &[Grammar] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Concatenated expansion of every block.
    pub fn expand(&self) -> Result<CsrvMatrix> {
        let mut symbols = Vec::new();
        for g in &self.blocks {
            symbols.extend_from_slice(g.expand()?.symbols());
        }
        CsrvMatrix::from_parts(self.n_rows, self.n_cols, self.dict.clone(), symbols)
    }

    pub fn right_mult_into(
        &self,
        x: &[f64],
        y: &mut [f64],
        scratch: &mut Scratch,
    ) -> Result<Visits> {
        check_len(self.n_cols, x.len())?;
        par_right_mult(&self.blocks, &self.dict, x, y, scratch)
    }

    pub fn left_mult_into(
        &self,
        y: &[f64],
        x: &mut [f64],
        scratch: &mut Scratch,
    ) -> Result<Visits> {
        check_len(self.n_cols, x.len())?;
        par_left_mult(&self.blocks, &self.dict, y, x, scratch)
    }

    pub fn right_mult(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.right_mult_into(x, &mut y, &mut Scratch::new())?;
        Ok(y)
    }

    pub fn left_mult(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_cols];
        self.left_mult_into(y, &mut x, &mut Scratch::new())?;
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::tests::example_matrix;

    #[test]
    fn ranges_partition_rows() {
        assert_eq!(block_ranges(6, 2), vec![0..3, 3..6]);
        assert_eq!(block_ranges(6, 4), vec![0..2, 2..4, 4..6, 6..6]);
        assert_eq!(block_ranges(7, 3), vec![0..3, 3..6, 6..7]);
        assert_eq!(block_ranges(5, 1), vec![0..5]);
    }

    #[test]
    fn example_two_blocks() {
        let m = example_matrix();
        let bm = BlockedMatrix::build(&m, 2).unwrap();
        assert_eq!(bm.blocks()[0].n_rows(), 3);
        assert_eq!(bm.blocks()[1].n_rows(), 3);
        assert_eq!(bm.expand().unwrap(), CsrvMatrix::build(&m));
        let y = bm.right_mult(&[1.0; 5]).unwrap();
        let unblocked = repair_compress(&CsrvMatrix::build(&m))
            .right_mult(&[1.0; 5])
            .unwrap();
        for (a, b) in y.iter().zip([12.5, 10.8, 11.4, 11.3, 9.1, 14.8]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(y.len(), unblocked.len());
    }

    #[test]
    fn single_block_equals_unblocked() {
        let m = example_matrix();
        let bm = BlockedMatrix::build(&m, 1).unwrap();
        let g = repair_compress(&CsrvMatrix::build(&m));
        assert_eq!(bm.blocks()[0], g);
        let y = [0.5, -1.0, 2.0, 0.25, 3.0, -4.0];
        assert_eq!(bm.left_mult(&y).unwrap(), g.left_mult(&y).unwrap());
    }

    #[test]
    fn one_row_per_block() {
        let m = example_matrix();
        let bm = BlockedMatrix::build(&m, 6).unwrap();
        assert!(bm.blocks().iter().all(|g| g.rules().is_empty()));
        let e1 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(bm.left_mult(&e1).unwrap(), vec![1.2, 3.4, 5.6, 0.0, 2.3]);
    }

    #[test]
    fn block_count_bounds() {
        let m = example_matrix();
        assert!(BlockedMatrix::build(&m, 0).is_err());
        assert!(BlockedMatrix::build(&m, 7).is_err());
    }

    #[test]
    fn empty_trailing_block() {
        let m = example_matrix();
        let parts = split_csrv(&CsrvMatrix::build(&m), 4).unwrap();
        assert_eq!(
            parts.iter().map(CsrvMatrix::n_rows).collect::<Vec<_>>(),
            vec![2, 2, 2, 0]
        );
        let bm = BlockedMatrix::from_csrv_blocks(parts).unwrap();
        assert_eq!(bm.n_rows(), 6);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(
            bm.right_mult(&x).unwrap(),
            BlockedMatrix::build(&m, 1).unwrap().right_mult(&x).unwrap()
        );
    }

    #[test]
    fn explicit_workers() {
        let m = example_matrix();
        let bm = BlockedMatrix::build(&m, 3).unwrap();
        let y = with_workers(2, || bm.right_mult(&[1.0; 5]))
            .unwrap()
            .unwrap();
        assert_eq!(y, bm.right_mult(&[1.0; 5]).unwrap());
    }
}
