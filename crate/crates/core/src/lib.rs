//! Grammar-compressed matrices with multiplication in compressed form.
//!
//! A dense matrix is first rewritten in CSRV form (a dictionary of distinct
//! non-zero values plus one symbol sequence with inline row delimiters), then
//! compressed with RePair into a straight-line grammar. Right and left
//! matrix-vector products run directly on the grammar.

pub mod bench;
pub mod blocked;
pub mod encoding;
mod error;
pub mod grammar;
pub mod io;
pub mod matrix;
pub mod multiply;
pub mod reorder;
pub mod repair;

pub use bench::{bench_dense, bench_iterate, BenchConfig, BenchReport};
pub use blocked::{BlockedMatrix, Scratch};
pub use encoding::{
    compressed_size_report, deserialize, serialize_csrv, serialize_grammar, CompressedMatrix,
    Decoded, EncodedBlock, SizeReport, Variant,
};
pub use error::{Error, Result};
pub use grammar::{Diagnostic, Grammar, GrammarStats, GrammarSymbol, Rule};
pub use matrix::{CsrvMatrix, CsrvSymbol, DenseMatrix, ValueDictionary};
pub use multiply::{EvalTable, GrammarView, OpCounts, Visits};
pub use reorder::{
    apply_permutation, build_csm, choose_best_reordering, Algorithm, ColumnPermutation, CsmMode,
    ReorderConfig, SimilarityMatrix,
};
pub use repair::repair_compress;
