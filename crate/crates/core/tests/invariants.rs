mod common;

use std::collections::HashMap;

use gramlin::encoding::{decode_symbol, encode_symbol, terminal_codes_end};
use gramlin::reorder::{build_csm_csrv, PairCounting};
use gramlin::{
    apply_permutation, build_csm, deserialize, repair_compress, serialize_csrv, serialize_grammar,
    Algorithm, BlockedMatrix, ColumnPermutation, CompressedMatrix, CsmMode, CsrvMatrix, CsrvSymbol,
    Decoded, DenseMatrix, GrammarSymbol, Variant,
};
use proptest::prelude::*;

use common::{max_rel_err, oracle_left, oracle_right};

/// Matrices with few distinct values and many zeros, the shape grammars like.
fn matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..24, 1usize..10, 1usize..5, 0.0f64..1.0).prop_flat_map(|(n, m, k, density)| {
        let cell = (0.0f64..1.0, 0..k).prop_map(move |(u, i)| {
            if u < density {
                [1.5, -2.25, 1e-3, 7.0, -0.5][i]
            } else {
                0.0
            }
        });
        proptest::collection::vec(cell, n * m).prop_map(move |e| DenseMatrix::new(n, m, e).unwrap())
    })
}

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-4.0f64..4.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn csrv_shape(m in matrix()) {
        let c = CsrvMatrix::build(&m);
        let delimiters = c.symbols().iter().filter(|s| **s == CsrvSymbol::RowDelimiter).count();
        prop_assert_eq!(delimiters, m.n_rows());
        prop_assert_eq!(c.symbols().len(), m.nnz() + m.n_rows());
        prop_assert_eq!(c.symbols().last(), Some(&CsrvSymbol::RowDelimiter));
        let v = c.dict().values();
        for (i, a) in v.iter().enumerate() {
            prop_assert!(a.to_bits() != 0 && a.to_bits() != (-0.0f64).to_bits());
            prop_assert!(v[..i].iter().all(|b| b.to_bits() != a.to_bits()));
        }
        prop_assert_eq!(c.decode().unwrap(), m);
    }

    #[test]
    fn repair_grammar_invariants(m in matrix()) {
        let c = CsrvMatrix::build(&m);
        let g = repair_compress(&c);
        prop_assert!(g.validate().is_empty(), "{:?}", g.validate());
        for (id, r) in g.rules().iter().enumerate() {
            for s in [r.left, r.right] {
                prop_assert!(s != GrammarSymbol::Delimiter);
                if let GrammarSymbol::Nonterminal(j) = s {
                    prop_assert!((j as usize) < id);
                }
            }
        }
        // No delimiter-free adjacent pair repeats in the final string.
        let mut seen: HashMap<(GrammarSymbol, GrammarSymbol), usize> = HashMap::new();
        let f = g.final_string();
        for i in 0..f.len().saturating_sub(1) {
            let p = (f[i], f[i + 1]);
            if p.0 == GrammarSymbol::Delimiter || p.1 == GrammarSymbol::Delimiter {
                continue;
            }
            if let Some(&prev) = seen.get(&p) {
                // Only an overlapping occurrence (a a a) may share a pair.
                prop_assert!(prev + 1 == i && p.0 == p.1, "pair {:?} repeats", p);
            } else {
                seen.insert(p, i);
            }
        }
        prop_assert_eq!(g.expand().unwrap(), c);
        let stats = g.stats();
        prop_assert_eq!(stats.compressed_symbol_count, stats.final_len + 2 * stats.rule_count);
        prop_assert!(stats.compressed_symbol_count <= m.nnz() + m.n_rows());
    }

    #[test]
    fn products_match_dense(m in matrix(), seed in any::<u64>()) {
        let x: Vec<f64> = (0..m.n_cols()).map(|j| ((seed >> (j % 60)) & 7) as f64 - 3.5).collect();
        let y: Vec<f64> = (0..m.n_rows()).map(|i| ((seed >> (i % 60)) & 5) as f64 - 2.0).collect();
        let (wr, sr) = oracle_right(&m, &x);
        let (wl, sl) = oracle_left(&m, &y);
        let g = repair_compress(&CsrvMatrix::build(&m));
        for v in Variant::ALL {
            let cm = CompressedMatrix::from_grammar(&g, v).unwrap();
            prop_assert!(max_rel_err(&cm.right_mult(&x).unwrap(), &wr, &sr) <= 1e-12);
            prop_assert!(max_rel_err(&cm.left_mult(&y).unwrap(), &wl, &sl) <= 1e-12);
        }
    }

    #[test]
    fn blocked_products(m in matrix(), b in 1usize..6, x in vector(10), y in vector(24)) {
        let b = b.min(m.n_rows());
        let x = &x[..m.n_cols()];
        let y = &y[..m.n_rows()];
        let bm = BlockedMatrix::build(&m, b).unwrap();
        prop_assert_eq!(bm.block_count(), b);
        prop_assert_eq!(bm.expand().unwrap().decode().unwrap(), m.clone());
        let (wr, sr) = oracle_right(&m, x);
        let (wl, sl) = oracle_left(&m, y);
        prop_assert!(max_rel_err(&bm.right_mult(x).unwrap(), &wr, &sr) <= 1e-12);
        prop_assert!(max_rel_err(&bm.left_mult(y).unwrap(), &wl, &sl) <= 1e-12);
        let ranges = gramlin::blocked::block_ranges(m.n_rows(), b);
        prop_assert_eq!(ranges.len(), b);
        prop_assert_eq!(ranges[0].start, 0);
        prop_assert_eq!(ranges[b - 1].end, m.n_rows());
        prop_assert!(ranges.windows(2).all(|w| w[0].end == w[1].start));
    }

    #[test]
    fn serialization_round_trip(m in matrix(), b in 1usize..4) {
        let c = CsrvMatrix::build(&m);
        let g = repair_compress(&c);
        prop_assert_eq!(deserialize(&serialize_csrv(&c).unwrap()).unwrap(), Decoded::Csrv(c.clone()));
        for v in Variant::ALL.into_iter().filter(|v| v.is_grammar()) {
            prop_assert_eq!(deserialize(&serialize_grammar(&g, v).unwrap()).unwrap(), Decoded::Grammar(g.clone()));
        }
        let b = b.min(m.n_rows());
        for v in Variant::ALL {
            let cm = CompressedMatrix::encode(&BlockedMatrix::build(&m, b).unwrap(), v).unwrap();
            let bytes = cm.to_bytes();
            prop_assert_eq!(CompressedMatrix::from_bytes(&bytes).unwrap(), cm);
            // Any strict prefix is rejected.
            let cut = bytes.len() * 3 / 4;
            prop_assert!(CompressedMatrix::from_bytes(&bytes[..cut]).is_err());
        }
    }

    #[test]
    fn symbol_codes_invert(v in 0u32..50, col in 0u32..40, id in 0u32..100, extra in 0usize..20) {
        let n_cols = 40;
        let base = terminal_codes_end(50, n_cols);
        let rules = id as usize + 1 + extra;
        for s in [GrammarSymbol::Delimiter, GrammarSymbol::Terminal { value: v, col }, GrammarSymbol::Nonterminal(id)] {
            let code = encode_symbol(s, n_cols, base);
            prop_assert_eq!(decode_symbol(code, n_cols, base, rules).unwrap(), s);
        }
        prop_assert!(decode_symbol(base + rules as u64, n_cols, base, rules).is_err());
    }

    #[test]
    fn csm_scores(m in matrix(), k in 1usize..4) {
        let full = build_csm(&m, CsmMode::Full);
        let hashed = build_csm_csrv(&CsrvMatrix::build(&m), CsmMode::Full, PairCounting::Hash);
        prop_assert_eq!(full.edges(), hashed.edges());
        for &(i, j, s) in full.edges() {
            prop_assert!(i < j && s > 0.0 && s <= 1.0);
            prop_assert_eq!(full.score(i, j), full.score(j, i));
        }
        let local = full.prune(CsmMode::Local(k));
        let mut degree = vec![0usize; m.n_cols()];
        for &(i, j, s) in local.edges() {
            degree[i] += 1;
            degree[j] += 1;
            prop_assert_eq!(s, full.score(i, j));
        }
        prop_assert!(degree.iter().all(|&d| d <= k));
        let global = full.prune(CsmMode::Global(k));
        prop_assert!(global.edges().len() <= m.n_cols() * k);
        // The kept global edges are the highest scores.
        if let Some(min_kept) = global.edges().iter().map(|e| e.2).reduce(f64::min) {
            let dropped = full.edges().iter().filter(|e| !global.edges().contains(e));
            for e in dropped {
                prop_assert!(e.2 <= min_kept);
            }
        }
    }

    #[test]
    fn reorderings_are_bijections(m in matrix()) {
        let c = CsrvMatrix::build(&m);
        let s = build_csm(&m, CsmMode::Full);
        for a in Algorithm::ALL {
            let p = a.run(&s);
            let mut sorted = p.order().to_vec();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..m.n_cols()).collect::<Vec<_>>());
            let moved = apply_permutation(&c, &p).unwrap();
            prop_assert_eq!(moved.decode().unwrap(), m.clone());
            prop_assert_eq!(moved.symbols().len(), c.symbols().len());
            let ranks = p.ranks();
            for row in moved.rows() {
                let cols: Vec<usize> = row
                    .iter()
                    .filter_map(|s| match *s {
                        CsrvSymbol::Pair { col, .. } => Some(ranks[col as usize]),
                        CsrvSymbol::RowDelimiter => None,
                    })
                    .collect();
                prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
            }
        }
        prop_assert!(ColumnPermutation::new(vec![0, 0]).is_err());
    }
}
