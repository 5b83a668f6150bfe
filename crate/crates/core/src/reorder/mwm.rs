//! Orders columns from a maximum-weight matching of "column i precedes column j".
//!
//! Left copies `0..m` are matched to right copies `0'..m'`; the edge `(i, j')`
//! exists for `i < j` with the similarity of `i` and `j` as weight. A matched
//! edge puts `j` right after `i`. Requiring `i < j` keeps the chains acyclic.

use super::{ColumnPermutation, SimilarityMatrix};

/// Largest column count solved exactly; above it the matching is greedy.
pub const EXACT_LIMIT: usize = 1024;

pub fn reorder_mwm(s: &SimilarityMatrix) -> ColumnPermutation {
    let m = s.n_cols();
    let succ = if m <= EXACT_LIMIT {
        exact_matching(m, &s.dense())
    } else {
        greedy_matching(s)
    };
    chains_to_order(&succ)
}

/// `succ[i] = Some(j)` when left `i` is matched to right `j` with positive weight.
pub(crate) fn exact_matching(m: usize, w: &[f64]) -> Vec<Option<usize>> {
    // Hungarian method on the cost matrix -w, 1-based with a dummy row/column 0.
    let cost = |i: usize, j: usize| if i < j { -w[i * m + j] } else { 0.0 };
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut succ = vec![None; m];
    for j in 1..=m {
        let i = p[j] - 1;
        if i < j - 1 && w[i * m + j - 1] > 0.0 {
            succ[i] = Some(j - 1);
        }
    }
    succ
}

fn greedy_matching(s: &SimilarityMatrix) -> Vec<Option<usize>> {
    let m = s.n_cols();
    let mut succ = vec![None; m];
    let mut has_pred = vec![false; m];
    for &(i, j, _) in s.edges() {
        if succ[i].is_none() && !has_pred[j] {
            succ[i] = Some(j);
            has_pred[j] = true;
        }
    }
    succ
}

/// Chains in order of their first column, then unmatched columns.
fn chains_to_order(succ: &[Option<usize>]) -> ColumnPermutation {
    let m = succ.len();
    let mut has_pred = vec![false; m];
    succ.iter().flatten().for_each(|&j| has_pred[j] = true);
    let mut order = Vec::with_capacity(m);
    for head in (0..m).filter(|&c| !has_pred[c] && succ[c].is_some()) {
        let mut cur = Some(head);
        while let Some(c) = cur {
            order.push(c);
            cur = succ[c];
        }
    }
    let mut placed = vec![false; m];
    order.iter().for_each(|&c| placed[c] = true);
    order.extend((0..m).filter(|&c| !placed[c]));
    ColumnPermutation::new(order).expect("chains cover each column once")
}
