//! Per-block choice of the column order that compresses best.

use rayon::prelude::*;

use super::{
    apply_permutation, build_csm_csrv, Algorithm, ColumnPermutation, CsmMode, PairCounting,
};
use crate::blocked::{split_csrv, BlockedMatrix};
use crate::encoding::{EncodedBlock, Variant};
use crate::error::Result;
use crate::grammar::Grammar;
use crate::matrix::CsrvMatrix;
use crate::repair::repair_compress;

#[derive(Clone, Debug, PartialEq)]
pub struct ReorderConfig {
    /// Heuristics to try; the identity order is always tried first.
    pub algorithms: Vec<Algorithm>,
    pub mode: CsmMode,
    /// Storage variant whose payload size decides the winner.
    pub variant: Variant,
    pub counting: PairCounting,
}

impl Default for ReorderConfig {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::PathCover, Algorithm::Mwm],
            mode: CsmMode::Local(16),
            variant: Variant::ReAns,
            counting: PairCounting::Sort,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub algorithm: Algorithm,
    /// Serialized payload bytes of the block under this order.
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub block: usize,
    pub candidates: Vec<Candidate>,
    pub winner: Algorithm,
    pub permutation: ColumnPermutation,
}

impl BlockReport {
    pub fn winner_bytes(&self) -> usize {
        self.candidates
            .iter()
            .find(|c| c.algorithm == self.winner)
            .map_or(0, |c| c.bytes)
    }

    pub fn identity_bytes(&self) -> usize {
        self.candidates[0].bytes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReorderOutcome {
    /// The matrix compressed with each block's winning order.
    pub matrix: BlockedMatrix,
    pub blocks: Vec<BlockReport>,
}

impl ReorderOutcome {
    pub fn permutations(&self) -> Vec<&ColumnPermutation> {
        self.blocks.iter().map(|b| &b.permutation).collect()
    }
}

/// Splits `c` into `blocks` row blocks and, for each, keeps the candidate order
/// with the smallest payload. Ties go to the earlier candidate, so the
/// identity order wins whenever nothing does strictly better.
pub fn choose_best_reordering(
    c: &CsrvMatrix,
    blocks: usize,
    cfg: &ReorderConfig,
) -> Result<ReorderOutcome> {
    let parts = split_csrv(c, blocks)?;
    let results = parts
        .par_iter()
        .enumerate()
        .map(|(b, part)| best_for_block(b, part, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (grammars, reports): (Vec<Grammar>, Vec<BlockReport>) = results.into_iter().unzip();
    Ok(ReorderOutcome {
        matrix: BlockedMatrix::from_grammars(grammars)?,
        blocks: reports,
    })
}

fn best_for_block(
    block: usize,
    part: &CsrvMatrix,
    cfg: &ReorderConfig,
) -> Result<(Grammar, BlockReport)> {
    let csm = build_csm_csrv(part, cfg.mode, cfg.counting);
    let mut algorithms = vec![Algorithm::Identity];
    algorithms.extend(cfg.algorithms.iter().filter(|a| **a != Algorithm::Identity));

    let mut tried: Vec<(ColumnPermutation, usize)> = Vec::new();
    let mut candidates = Vec::with_capacity(algorithms.len());
    let mut best: Option<(usize, Grammar, ColumnPermutation, Algorithm)> = None;
    for algorithm in algorithms {
        let perm = algorithm.run(&csm);
        let bytes = match tried.iter().find(|(p, _)| *p == perm) {
            Some(&(_, bytes)) => bytes,
            None => {
                let g = repair_compress(&apply_permutation(part, &perm)?);
                let bytes = EncodedBlock::from_grammar(&g, cfg.variant)?.serialized_len();
                tried.push((perm.clone(), bytes));
                if best.as_ref().is_none_or(|b| bytes < b.0) {
                    best = Some((bytes, g, perm, algorithm));
                }
                bytes
            }
        };
        candidates.push(Candidate { algorithm, bytes });
    }
    let (_, g, permutation, winner) = best.expect("identity is always tried");
    Ok((
        g,
        BlockReport {
            block,
            candidates,
            winner,
            permutation,
        },
    ))
}
