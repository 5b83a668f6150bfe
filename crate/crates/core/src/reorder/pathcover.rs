//! Greedy disjoint path covers of the similarity graph.

use super::{paths_to_order, ColumnPermutation, SimilarityMatrix, UnionFind};

/// Scans edges by decreasing score and keeps those that extend disjoint paths.
pub fn reorder_pathcover(s: &SimilarityMatrix) -> ColumnPermutation {
    let m = s.n_cols();
    let mut deg = vec![0u8; m];
    let mut uf = UnionFind::new(m);
    let mut accepted = Vec::new();
    for &(i, j, _) in s.edges() {
        if deg[i] < 2 && deg[j] < 2 && uf.union(i, j) {
            deg[i] += 1;
            deg[j] += 1;
            accepted.push((i, j));
            if accepted.len() + 1 == m {
                break;
            }
        }
    }
    paths_to_order(m, &accepted)
}

/// Like [`reorder_pathcover`], but each time a path grows, the scores from
/// every outside column to the path's columns drop to the smallest of them,
/// as if the path were a single column.
pub fn reorder_pathcover_plus(s: &SimilarityMatrix) -> ColumnPermutation {
    let m = s.n_cols();
    let mut w = s.dense();
    let mut deg = vec![0u8; m];
    let mut uf = UnionFind::new(m);
    let mut members: Vec<Vec<usize>> = (0..m).map(|c| vec![c]).collect();
    let mut accepted = Vec::new();

    while accepted.len() + 1 < m {
        let open: Vec<(usize, usize)> = (0..m)
            .filter(|&c| deg[c] < 2)
            .map(|c| (c, uf.find(c)))
            .collect();
        let mut best: Option<(usize, usize, f64)> = None;
        for (x, &(a, ra)) in open.iter().enumerate() {
            for &(b, rb) in &open[x + 1..] {
                let wab = w[a * m + b];
                if ra != rb && wab > 0.0 && best.is_none_or(|(_, _, bw)| wab > bw) {
                    best = Some((a, b, wab));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        deg[a] += 1;
        deg[b] += 1;
        accepted.push((a, b));
        let (ra, rb) = (uf.find(a), uf.find(b));
        uf.union(a, b);
        let root = uf.find(a);
        let other = if root == ra { rb } else { ra };
        let moved = std::mem::take(&mut members[other]);
        members[root].extend(moved);

        let path = &members[root];
        let mut in_path = vec![false; m];
        path.iter().for_each(|&u| in_path[u] = true);
        for v in (0..m).filter(|&v| !in_path[v]) {
            let min = path
                .iter()
                .map(|&u| w[v * m + u])
                .filter(|&x| x > 0.0)
                .fold(f64::INFINITY, f64::min);
            if min.is_finite() {
                for &u in path {
                    if w[v * m + u] > 0.0 {
                        w[v * m + u] = min;
                        w[u * m + v] = min;
                    }
                }
            }
        }
    }
    paths_to_order(m, &accepted)
}
