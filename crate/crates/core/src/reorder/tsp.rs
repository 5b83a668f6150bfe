//! Open-path tour maximizing the similarity of consecutive columns:
//! nearest-neighbour construction followed by 2-opt.

use super::{ColumnPermutation, SimilarityMatrix};

/// Column counts up to this try every start column for the construction.
const ALL_STARTS_LIMIT: usize = 256;
/// Cap on full 2-opt passes.
const MAX_PASSES: usize = 1000;

pub fn reorder_tsp(s: &SimilarityMatrix) -> ColumnPermutation {
    let m = s.n_cols();
    if m <= 2 {
        return ColumnPermutation::identity(m);
    }
    let w = s.dense();
    let starts = if m <= ALL_STARTS_LIMIT { m } else { 1 };
    let mut best = nearest_neighbour(m, &w, 0);
    let mut best_len = path_weight(m, &w, &best);
    for start in 1..starts {
        let p = nearest_neighbour(m, &w, start);
        let len = path_weight(m, &w, &p);
        if len > best_len {
            (best, best_len) = (p, len);
        }
    }
    two_opt(m, &w, &mut best);
    if best[0] > best[m - 1] {
        best.reverse();
    }
    ColumnPermutation::new(best).expect("tour visits each column once")
}

fn nearest_neighbour(m: usize, w: &[f64], start: usize) -> Vec<usize> {
    let mut visited = vec![false; m];
    let mut path = Vec::with_capacity(m);
    let mut cur = start;
    visited[cur] = true;
    path.push(cur);
    for _ in 1..m {
        let mut next = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for c in (0..m).filter(|&c| !visited[c]) {
            if w[cur * m + c] > best {
                best = w[cur * m + c];
                next = c;
            }
        }
        visited[next] = true;
        path.push(next);
        cur = next;
    }
    path
}

pub(crate) fn path_weight(m: usize, w: &[f64], p: &[usize]) -> f64 {
    p.windows(2).map(|e| w[e[0] * m + e[1]]).sum()
}

/// Reverses segments while doing so raises the path weight.
fn two_opt(m: usize, w: &[f64], p: &mut [usize]) {
    let n = p.len();
    let wt = |a: usize, b: usize| w[a * m + b];
    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let mut delta = 0.0;
                if i > 0 {
                    delta += wt(p[i - 1], p[j]) - wt(p[i - 1], p[i]);
                }
                if j + 1 < n {
                    delta += wt(p[i], p[j + 1]) - wt(p[j], p[j + 1]);
                }
                if delta > 1e-12 {
                    p[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}
