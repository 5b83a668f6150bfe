//! Column similarity scores.
//!
//! For columns `i` and `j`, take the rows where both are non-zero and count
//! how many of those `(M[r][i], M[r][j])` value pairs repeat an earlier one,
//! i.e. the number of such rows minus the number of distinct pairs. The score
//! is that count divided by the number of rows.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{is_zero, CsrvMatrix, CsrvSymbol, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CsmMode {
    /// Every non-zero score.
    Full,
    /// Keep an edge when it is among the `k` best of both of its columns.
    Local(usize),
    /// Keep the `m * k` best edges overall.
    Global(usize),
}

/// How equal value pairs are grouped when counting repetitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairCounting {
    #[default]
    Sort,
    Hash,
}

/// Symmetric column-similarity scores, stored as an edge list without
/// zero scores or self-edges.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    n_cols: usize,
    mode: CsmMode,
    /// `(i, j, score)` with `i < j`, by decreasing score then by `(i, j)`.
    edges: Vec<(usize, usize, f64)>,
}

fn edge_order(a: &(usize, usize, f64), b: &(usize, usize, f64)) -> std::cmp::Ordering {
    b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1)))
}

impl SimilarityMatrix {
    /// Builds a full similarity matrix from explicit scores in `(0, 1]`; zero
    /// scores are dropped.
    pub fn from_edges(n_cols: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (i, j, s) in edges {
            if i == j || i >= n_cols || j >= n_cols || !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!(
                    "invalid similarity edge ({i}, {j}, {s})"
                )));
            }
            if s > 0.0 {
                out.push((i.min(j), i.max(j), s));
            }
        }
        out.sort_by(edge_order);
        if out.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidArgument("duplicate similarity edge".into()));
        }
        Ok(Self {
            n_cols,
            mode: CsmMode::Full,
            edges: out,
        })
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn mode(&self) -> CsmMode {
        self.mode
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| (e.0, e.1) == key)
            .map_or(0.0, |e| e.2)
    }

    /// Row-major `m x m` matrix of scores, zero on the diagonal and for
    /// missing edges.
    pub fn dense(&self) -> Vec<f64> {
        let m = self.n_cols;
        let mut w = vec![0.0; m * m];
        for &(i, j, s) in &self.edges {
            w[i * m + j] = s;
            w[j * m + i] = s;
        }
        w
    }

    /// Applies a pruning mode to a full matrix.
    pub fn prune(&self, mode: CsmMode) -> Self {
        let edges = match mode {
            CsmMode::Full => self.edges.clone(),
            CsmMode::Global(k) => self
                .edges
                .iter()
                .take(self.n_cols.saturating_mul(k))
                .copied()
                .collect(),
            CsmMode::Local(k) => {
                // Edges are already in preference order, so each column's
                // first k incident edges are its top k.
                let mut seen = vec![0usize; self.n_cols];
                let mut top = vec![[false; 2]; self.edges.len()];
                for (t, &(i, j, _)) in self.edges.iter().enumerate() {
                    for (side, c) in [i, j].into_iter().enumerate() {
                        if seen[c] < k {
                            top[t][side] = true;
                        }
                        seen[c] += 1;
                    }
                }
                self.edges
                    .iter()
                    .zip(top)
                    .filter(|(_, t)| t[0] && t[1])
                    .map(|(e, _)| *e)
                    .collect()
            }
        };
        Self {
            n_cols: self.n_cols,
            mode,
            edges,
        }
    }
}

/// Column-major table of value ids, `0` for zero entries.
struct ColumnIds {
    n_rows: usize,
    n_cols: usize,
    distinct: usize,
    ids: Vec<u32>,
}

impl ColumnIds {
    fn col(&self, c: usize) -> &[u32] {
        &self.ids[c * self.n_rows..(c + 1) * self.n_rows]
    }

    fn from_dense(m: &DenseMatrix) -> Self {
        let (n, cols) = (m.n_rows(), m.n_cols());
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut ids = vec![0u32; n * cols];
        for r in 0..n {
            for (c, &v) in m.row(r).iter().enumerate() {
                if !is_zero(v) {
                    let next = index.len() as u32 + 1;
                    ids[c * n + r] = *index.entry(v.to_bits()).or_insert(next);
                }
            }
        }
        Self {
            n_rows: n,
            n_cols: cols,
            distinct: index.len(),
            ids,
        }
    }

    fn from_csrv(c: &CsrvMatrix) -> Self {
        let (n, cols) = (c.n_rows(), c.n_cols());
        let mut ids = vec![0u32; n * cols];
        for (r, row) in c.rows().enumerate() {
            for s in row {
                if let CsrvSymbol::Pair { value, col } = *s {
                    ids[col as usize * n + r] = value + 1;
                }
            }
        }
        Self {
            n_rows: n,
            n_cols: cols,
            distinct: c.dict().len(),
            ids,
        }
    }
}

/// Largest key space still counted with a direct table.
const TABLE_LIMIT: usize = 1 << 20;

#[derive(Default)]
struct Buffers {
    keys: Vec<u64>,
    table: Vec<u32>,
    touched: Vec<u32>,
    map: HashMap<u64, u32>,
}

fn repetitions(
    a: &[u32],
    b: &[u32],
    distinct: usize,
    counting: PairCounting,
    buf: &mut Buffers,
) -> usize {
    let width = distinct as u64 + 1;
    let keys = a
        .iter()
        .zip(b)
        .filter(|(x, y)| **x != 0 && **y != 0)
        .map(|(&x, &y)| u64::from(x) * width + u64::from(y));
    match counting {
        PairCounting::Hash => {
            buf.map.clear();
            let mut total = 0;
            for k in keys {
                *buf.map.entry(k).or_insert(0) += 1;
                total += 1;
            }
            total - buf.map.len()
        }
        PairCounting::Sort
            if width
                .checked_mul(width)
                .is_some_and(|t| t <= TABLE_LIMIT as u64) =>
        {
            buf.table.resize((width * width) as usize, 0);
            let (mut total, mut distinct_pairs) = (0, 0);
            for k in keys {
                let slot = &mut buf.table[k as usize];
                if *slot == 0 {
                    distinct_pairs += 1;
                    buf.touched.push(k as u32);
                }
                *slot += 1;
                total += 1;
            }
            for k in buf.touched.drain(..) {
                buf.table[k as usize] = 0;
            }
            total - distinct_pairs
        }
        PairCounting::Sort => {
            buf.keys.clear();
            buf.keys.extend(keys);
            buf.keys.sort_unstable();
            let runs = buf.keys.chunk_by(|x, y| x == y).count();
            buf.keys.len() - runs
        }
    }
}

fn scores(ids: &ColumnIds, counting: PairCounting) -> SimilarityMatrix {
    let m = ids.n_cols;
    let n = ids.n_rows.max(1) as f64;
    let edges: Vec<(usize, usize, f64)> = (0..m)
        .into_par_iter()
        .map_init(Buffers::default, |buf, i| {
            let a = ids.col(i);
            (i + 1..m)
                .filter_map(|j| {
                    let reps = repetitions(a, ids.col(j), ids.distinct, counting, buf);
                    (reps > 0).then(|| (i, j, reps as f64 / n))
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    let mut s = SimilarityMatrix {
        n_cols: m,
        mode: CsmMode::Full,
        edges,
    };
    s.edges.sort_by(edge_order);
    s
}

pub fn build_csm(m: &DenseMatrix, mode: CsmMode) -> SimilarityMatrix {
    scores(&ColumnIds::from_dense(m), PairCounting::Sort).prune(mode)
}

pub fn build_csm_csrv(c: &CsrvMatrix, mode: CsmMode, counting: PairCounting) -> SimilarityMatrix {
    scores(&ColumnIds::from_csrv(c), counting).prune(mode)
}
