//! Right and left matrix-vector multiplication on a grammar, without expanding it.
//!
//! Both directions run in `O(|C| + |R|)` time with one auxiliary `f64` per rule.
//!
//! Right multiplication (`y = M x`) fills `W[i]` with the dot product of the
//! expansion of rule `i` against `x`, scanning the rules forward, then sums the
//! final string row by row.
//!
//! Left multiplication (`x^t = y^t M`) first scans the final string, adding
//! `y[r]` to `W[id]` for every nonterminal in row `r` (terminals in the final
//! string go straight to `x`). Scanning the rules backward then pushes each
//! `W[j]` down into the body symbols: into `W[i]` for a nonterminal, into
//! `x[col]` scaled by the value for a terminal. When rule `j` is reached no
//! higher rule can still add to `W[j]`, so it already holds the sum of `y`
//! over every row that uses it.

use crate::error::{check_len, Result};
use crate::grammar::{Grammar, GrammarSymbol};
use crate::matrix::ValueDictionary;

/// Read access to a grammar: random access to rule bodies plus a forward scan
/// of the final string. Implemented by [`Grammar`] and by every encoded block.
pub trait GrammarView {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn rule_count(&self) -> usize;
    fn rule(&self, id: usize) -> (GrammarSymbol, GrammarSymbol);
    fn final_len(&self) -> usize;
    fn for_each_final<F: FnMut(GrammarSymbol)>(&self, f: F);
}

impl GrammarView for Grammar {
    fn n_rows(&self) -> usize {
        Grammar::n_rows(self)
    }

    fn n_cols(&self) -> usize {
        Grammar::n_cols(self)
    }

    fn rule_count(&self) -> usize {
        self.rules().len()
    }

    #[inline]
    fn rule(&self, id: usize) -> (GrammarSymbol, GrammarSymbol) {
        let r = self.rules()[id];
        (r.left, r.right)
    }

    fn final_len(&self) -> usize {
        self.final_string().len()
    }

    fn for_each_final<F: FnMut(GrammarSymbol)>(&self, f: F) {
        self.final_string().iter().copied().for_each(f)
    }
}

/// Scratch array with one entry per rule, reusable across calls.
#[derive(Clone, Debug, Default)]
pub struct EvalTable {
    w: Vec<f64>,
}

impl EvalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    fn reset(&mut self, len: usize) {
        self.w.clear();
        self.w.resize(len, 0.0);
    }
}

/// Number of rule bodies and final-string symbols visited by one multiplication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Visits {
    pub rule_visits: usize,
    pub final_visits: usize,
}

impl std::ops::AddAssign for Visits {
    fn add_assign(&mut self, rhs: Self) {
        self.rule_visits += rhs.rule_visits;
        self.final_visits += rhs.final_visits;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpCounts {
    pub right: Visits,
    pub left: Visits,
}

#[inline]
fn eval(sym: GrammarSymbol, v: &[f64], x: &[f64], w: &[f64]) -> f64 {
    match sym {
        GrammarSymbol::Terminal { value, col } => v[value as usize] * x[col as usize],
        GrammarSymbol::Nonterminal(id) => w[id as usize],
        GrammarSymbol::Delimiter => 0.0,
    }
}

/// Writes `M x` into `y`.
pub fn right_mult_into<G: GrammarView>(
    g: &G,
    dict: &ValueDictionary,
    x: &[f64],
    y: &mut [f64],
    table: &mut EvalTable,
) -> Result<Visits> {
    check_len(g.n_cols(), x.len())?;
    check_len(g.n_rows(), y.len())?;
    let v = dict.values();
    let q = g.rule_count();
    table.reset(q);
    let w = &mut table.w;
    for i in 0..q {
        let (a, b) = g.rule(i);
        w[i] = eval(a, v, x, w) + eval(b, v, x, w);
    }

    let w = &table.w;
    let mut row = 0usize;
    let mut acc = 0.0;
    let mut final_visits = 0usize;
    g.for_each_final(|sym| {
        final_visits += 1;
        match sym {
            GrammarSymbol::Delimiter => {
                y[row] = acc;
                row += 1;
                acc = 0.0;
            }
            s => acc += eval(s, v, x, w),
        }
    });
    Ok(Visits {
        rule_visits: q,
        final_visits,
    })
}

/// Writes `y^t M` into `x`.
pub fn left_mult_into<G: GrammarView>(
    g: &G,
    dict: &ValueDictionary,
    y: &[f64],
    x: &mut [f64],
    table: &mut EvalTable,
) -> Result<Visits> {
    check_len(g.n_rows(), y.len())?;
    check_len(g.n_cols(), x.len())?;
    let v = dict.values();
    let q = g.rule_count();
    table.reset(q);
    x.fill(0.0);
    let w = &mut table.w;

    let mut row = 0usize;
    let mut final_visits = 0usize;
    g.for_each_final(|sym| {
        final_visits += 1;
        match sym {
            GrammarSymbol::Delimiter => row += 1,
            GrammarSymbol::Nonterminal(id) => w[id as usize] += y[row],
            GrammarSymbol::Terminal { value, col } => x[col as usize] += y[row] * v[value as usize],
        }
    });

    for j in (0..q).rev() {
        let wj = w[j];
        let (a, b) = g.rule(j);
        for sym in [a, b] {
            match sym {
                GrammarSymbol::Nonterminal(i) => w[i as usize] += wj,
                GrammarSymbol::Terminal { value, col } => x[col as usize] += v[value as usize] * wj,
                GrammarSymbol::Delimiter => {}
            }
        }
    }
    Ok(Visits {
        rule_visits: q,
        final_visits,
    })
}

impl Grammar {
    pub fn right_mult(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows()];
        right_mult_into(self, self.dict(), x, &mut y, &mut EvalTable::new())?;
        Ok(y)
    }

    pub fn left_mult(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_cols()];
        left_mult_into(self, self.dict(), y, &mut x, &mut EvalTable::new())?;
        Ok(x)
    }

    /// Runs one multiplication in each direction and reports the work done.
    pub fn op_counter(&self) -> OpCounts {
        let mut table = EvalTable::new();
        let mut y = vec![0.0; self.n_rows()];
        let mut x = vec![0.0; self.n_cols()];
        let right = right_mult_into(
            self,
            self.dict(),
            &vec![1.0; self.n_cols()],
            &mut y,
            &mut table,
        )
        .expect("dimensions match by construction");
        let left = left_mult_into(
            self,
            self.dict(),
            &vec![1.0; self.n_rows()],
            &mut x,
            &mut table,
        )
        .expect("dimensions match by construction");
        OpCounts { right, left }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::{example_sorted_csrv, reference_grammar};
    use crate::matrix::CsrvMatrix;
    use crate::repair::repair_compress;

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn reference_grammar_right_all_ones() {
        let g = reference_grammar();
        let mut table = EvalTable::new();
        let mut y = vec![0.0; 6];
        right_mult_into(&g, g.dict(), &[1.0; 5], &mut y, &mut table).unwrap();
        // N2 -> <1.2,c1><3.4,c2>
        assert_eq!(table.values()[1], 1.2 + 3.4);
        close(&y, &[12.5, 10.8, 11.4, 11.3, 9.1, 14.8]);
    }

    #[test]
    fn reference_grammar_left() {
        let g = reference_grammar();
        assert_eq!(
            g.left_mult(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(),
            vec![1.2, 3.4, 5.6, 0.0, 2.3]
        );
        close(
            &g.left_mult(&[1.0; 6]).unwrap(),
            &[11.6, 10.2, 20.4, 18.0, 9.7],
        );
    }

    #[test]
    fn reference_grammar_left_rows_sum() {
        // y = e2 + e5 (1-based): N3 -> <2.3,c1> N1 is used by rows 2 and 5.
        let g = reference_grammar();
        let mut table = EvalTable::new();
        let mut x = vec![0.0; 5];
        let y = [0.0, 1.0, 0.0, 0.0, 1.0, 0.0];
        left_mult_into(&g, g.dict(), &y, &mut x, &mut table).unwrap();
        assert_eq!(table.values()[2], 2.0);
        // N1 -> <2.3,c3><4.5,c4> is reached only through N3 for these rows.
        assert_eq!(table.values()[0], 2.0);
        close(&x, &[4.6, 0.0, 4.6, 9.0, 1.7]);
    }

    #[test]
    fn zero_vector() {
        let g = reference_grammar();
        let mut table = EvalTable::new();
        let mut y = vec![1.0; 6];
        right_mult_into(&g, g.dict(), &[0.0; 5], &mut y, &mut table).unwrap();
        assert_eq!(y, vec![0.0; 6]);
        assert!(table.values().iter().all(|w| *w == 0.0));
        assert_eq!(g.left_mult(&[0.0; 6]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn identity_grammar_matches_csrv_bitwise() {
        let c = example_sorted_csrv();
        let g = Grammar::identity(&c);
        let x = [0.3, -1.7, 2.5, 1e-3, 7.0];
        let y = [1.0, -2.0, 0.5, 3.25, -0.125, 9.0];
        assert_eq!(g.right_mult(&x).unwrap(), c.right_mult(&x).unwrap());
        assert_eq!(g.left_mult(&y).unwrap(), c.left_mult(&y).unwrap());
        assert_eq!(g.op_counter().right.rule_visits, 0);
    }

    #[test]
    fn op_counter_matches_sizes() {
        let counts = reference_grammar().op_counter();
        for v in [counts.right, counts.left] {
            assert_eq!(
                v,
                Visits {
                    rule_visits: 9,
                    final_visits: 12
                }
            );
        }
        let g = repair_compress(&CsrvMatrix::build(&crate::matrix::tests::example_matrix()));
        let s = g.stats();
        let counts = g.op_counter();
        assert_eq!(counts.right.rule_visits, s.rule_count);
        assert_eq!(counts.left.final_visits, s.final_len);
    }

    #[test]
    fn dimension_checks() {
        let g = reference_grammar();
        assert!(g.right_mult(&[1.0; 6]).is_err());
        assert!(g.left_mult(&[1.0; 5]).is_err());
    }

    #[test]
    fn table_reuse_is_reset() {
        let g = reference_grammar();
        let mut table = EvalTable::new();
        let mut y = vec![0.0; 6];
        right_mult_into(&g, g.dict(), &[5.0; 5], &mut y, &mut table).unwrap();
        let mut x = vec![0.0; 5];
        left_mult_into(&g, g.dict(), &[1.0; 6], &mut x, &mut table).unwrap();
        close(&x, &[11.6, 10.2, 20.4, 18.0, 9.7]);
    }
}
