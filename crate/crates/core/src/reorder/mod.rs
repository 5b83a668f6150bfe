//! Column reordering to improve grammar compression.
//!
//! Reordering never changes the column index stored in a pair: it only changes
//! the order in which the pairs of each row appear in the CSRV sequence, so
//! every permuted matrix decodes to the original one.

mod csm;
mod mwm;
mod pathcover;
mod select;
mod tsp;

use std::fmt;
use std::str::FromStr;

pub use csm::{build_csm, build_csm_csrv, CsmMode, PairCounting, SimilarityMatrix};
pub use mwm::reorder_mwm;
pub use pathcover::{reorder_pathcover, reorder_pathcover_plus};
pub use select::{choose_best_reordering, BlockReport, Candidate, ReorderConfig, ReorderOutcome};
pub use tsp::reorder_tsp;

use crate::error::{Error, Result};
use crate::matrix::{CsrvMatrix, CsrvSymbol};

/// A column order: `order[p]` is the original column placed at position `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColumnPermutation {
    order: Vec<usize>,
}

impl ColumnPermutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &c in &order {
            if c >= order.len() || std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidArgument(format!(
                    "not a permutation of 0..{}: column {c}",
                    order.len()
                )));
            }
        }
        Ok(Self { order })
    }

    pub fn identity(n_cols: usize) -> Self {
        Self {
            order: (0..n_cols).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(p, &c)| p == c)
    }

    /// Position of every original column.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (p, &c) in self.order.iter().enumerate() {
            rank[c] = p;
        }
        rank
    }
}

/// Re-sorts the pairs of every row by the position of their column in `p`.
pub fn apply_permutation(c: &CsrvMatrix, p: &ColumnPermutation) -> Result<CsrvMatrix> {
    if p.len() != c.n_cols() {
        return Err(Error::InvalidArgument(format!(
            "permutation of {} columns applied to a matrix with {}",
            p.len(),
            c.n_cols()
        )));
    }
    let rank = p.ranks();
    let mut symbols = Vec::with_capacity(c.symbols().len());
    for row in c.rows() {
        let start = symbols.len();
        symbols.extend_from_slice(row);
        symbols[start..].sort_by_key(|s| match *s {
            CsrvSymbol::Pair { col, .. } => rank[col as usize],
            CsrvSymbol::RowDelimiter => usize::MAX,
        });
        symbols.push(CsrvSymbol::RowDelimiter);
    }
    Ok(CsrvMatrix::from_parts_unchecked(
        c.n_rows(),
        c.n_cols(),
        c.shared_dict().clone(),
        symbols,
    ))
}

/// A column ordering heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Identity,
    PathCover,
    PathCoverPlus,
    Mwm,
    Tsp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Identity,
        Algorithm::PathCover,
        Algorithm::PathCoverPlus,
        Algorithm::Mwm,
        Algorithm::Tsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Identity => "none",
            Algorithm::PathCover => "pathcover",
            Algorithm::PathCoverPlus => "pathcover+",
            Algorithm::Mwm => "mwm",
            Algorithm::Tsp => "tsp",
        }
    }

    pub fn run(self, s: &SimilarityMatrix) -> ColumnPermutation {
        match self {
            Algorithm::Identity => ColumnPermutation::identity(s.n_cols()),
            Algorithm::PathCover => reorder_pathcover(s),
            Algorithm::PathCoverPlus => reorder_pathcover_plus(s),
            Algorithm::Mwm => reorder_mwm(s),
            Algorithm::Tsp => reorder_tsp(s),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s || (s == "identity" && *a == Algorithm::Identity))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown reordering '{s}'")))
    }
}

/// Lays out disjoint simple paths given as undirected edges.
///
/// Paths come out in `edge` order of their first edge, each read from its
/// smaller-index end; columns on no edge follow in index order.
pub(crate) fn paths_to_order(n: usize, edges: &[(usize, usize)]) -> ColumnPermutation {
    let mut adj = vec![Vec::with_capacity(2); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for &(a, _) in edges {
        if placed[a] {
            continue;
        }
        let ends = walk_ends(&adj, a);
        let mut prev = usize::MAX;
        let mut cur = ends.0.min(ends.1);
        loop {
            placed[cur] = true;
            order.push(cur);
            match adj[cur].iter().find(|&&x| x != prev && !placed[x]) {
                Some(&next) => {
                    prev = cur;
                    cur = next;
                }
                None => break,
            }
        }
    }
    order.extend((0..n).filter(|&c| !placed[c]));
    ColumnPermutation { order }
}

fn walk_ends(adj: &[Vec<usize>], start: usize) -> (usize, usize) {
    let end = |first: Option<&usize>| {
        let (mut prev, mut cur) = (
            start,
            match first {
                Some(&c) => c,
                None => return start,
            },
        );
        while let Some(&next) = adj[cur].iter().find(|&&x| x != prev) {
            prev = cur;
            cur = next;
        }
        cur
    };
    (end(adj[start].first()), end(adj[start].get(1)))
}

/// Disjoint-set forest with path halving.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
