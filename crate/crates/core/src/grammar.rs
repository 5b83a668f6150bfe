//! Straight-line programs over CSRV symbols.
//!
//! A [`Grammar`] is a list of binary rules plus a final string. Rule `i`
//! defines nonterminal `i`; its body may only reference nonterminals with a
//! smaller id. Row delimiters appear only in the final string.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{CsrvMatrix, CsrvSymbol, ValueDictionary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GrammarSymbol {
    Terminal { value: u32, col: u32 },
    Delimiter,
    Nonterminal(u32),
}

impl From<CsrvSymbol> for GrammarSymbol {
    fn from(s: CsrvSymbol) -> Self {
        match s {
            CsrvSymbol::Pair { value, col } => GrammarSymbol::Terminal { value, col },
            CsrvSymbol::RowDelimiter => GrammarSymbol::Delimiter,
        }
    }
}

/// Body of a binary rule `N -> left right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub left: GrammarSymbol,
    pub right: GrammarSymbol,
}

impl Rule {
    pub fn new(left: GrammarSymbol, right: GrammarSymbol) -> Self {
        Self { left, right }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    n_rows: usize,
    n_cols: usize,
    dict: Arc<ValueDictionary>,
    rules: Vec<Rule>,
    final_string: Vec<GrammarSymbol>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrammarStats {
    pub rule_count: usize,
    pub final_len: usize,
    /// `|C| + 2|R|`, the number of integers in a flat encoding.
    pub compressed_symbol_count: usize,
}

/// A violated grammar invariant, as reported by [`Grammar::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    DelimiterInRule {
        rule: usize,
    },
    ForwardReference {
        rule: usize,
        target: u32,
    },
    UnknownNonterminal {
        position: usize,
        id: u32,
    },
    TerminalOutOfRange {
        symbol: GrammarSymbol,
    },
    DelimiterCount {
        expected: usize,
        found: usize,
    },
    TrailingSymbols,
    UselessRule {
        rule: usize,
    },
    RepeatedPair {
        pair: (GrammarSymbol, GrammarSymbol),
        count: usize,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DelimiterInRule { rule } => write!(f, "delimiter in rule {rule}"),
            Diagnostic::ForwardReference { rule, target } => {
                write!(
                    f,
                    "rule {rule} references nonterminal {target} (forward reference)"
                )
            }
            Diagnostic::UnknownNonterminal { position, id } => {
                write!(
                    f,
                    "final string position {position} references unknown nonterminal {id}"
                )
            }
            Diagnostic::TerminalOutOfRange { symbol } => {
                write!(f, "terminal {symbol:?} out of range")
            }
            Diagnostic::DelimiterCount { expected, found } => {
                write!(
                    f,
                    "final string has {found} delimiters, expected {expected}"
                )
            }
            Diagnostic::TrailingSymbols => write!(f, "symbols after the final delimiter"),
            Diagnostic::UselessRule { rule } => write!(f, "useless rule {rule}"),
            Diagnostic::RepeatedPair { pair, count } => {
                write!(f, "pair {:?} {:?} repeats {count} times", pair.0, pair.1)
            }
        }
    }
}

impl Diagnostic {
    /// True for violations that make expansion or multiplication unsound.
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            Diagnostic::UselessRule { .. } | Diagnostic::RepeatedPair { .. }
        )
    }
}

impl Grammar {
    /// Builds a grammar, rejecting it if any structural invariant fails.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        dict: Arc<ValueDictionary>,
        rules: Vec<Rule>,
        final_string: Vec<GrammarSymbol>,
    ) -> Result<Self> {
        let g = Self::from_parts_unchecked(n_rows, n_cols, dict, rules, final_string);
        if let Some(d) = g.structural_diagnostics().into_iter().next() {
            return Err(Error::MalformedGrammar(d.to_string()));
        }
        Ok(g)
    }

    /// Builds a grammar without any checks. Run [`Grammar::validate`] before
    /// multiplying with a grammar obtained this way.
    pub fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        dict: Arc<ValueDictionary>,
        rules: Vec<Rule>,
        final_string: Vec<GrammarSymbol>,
    ) -> Self {
        Self {
            n_rows,
            n_cols,
            dict,
            rules,
            final_string,
        }
    }

    /// The trivial grammar: no rules, final string equal to the CSRV sequence.
    pub fn identity(c: &CsrvMatrix) -> Self {
        Self {
            n_rows: c.n_rows(),
            n_cols: c.n_cols(),
            dict: c.shared_dict().clone(),
            rules: Vec::new(),
            final_string: c.symbols().iter().map(|&s| s.into()).collect(),
        }
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

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn final_string(&self) -> &[GrammarSymbol] {
        &self.final_string
    }

    pub fn stats(&self) -> GrammarStats {
        GrammarStats {
            rule_count: self.rules.len(),
            final_len: self.final_string.len(),
            compressed_symbol_count: self.final_string.len() + 2 * self.rules.len(),
        }
    }

    /// Expands every nonterminal of the final string back to the CSRV sequence.
    pub fn expand(&self) -> Result<CsrvMatrix> {
        if let Some(d) = self.structural_diagnostics().into_iter().next() {
            return Err(Error::MalformedGrammar(d.to_string()));
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for &sym in &self.final_string {
            stack.push(sym);
            while let Some(s) = stack.pop() {
                match s {
                    GrammarSymbol::Terminal { value, col } => {
                        out.push(CsrvSymbol::Pair { value, col })
                    }
                    GrammarSymbol::Delimiter => out.push(CsrvSymbol::RowDelimiter),
                    GrammarSymbol::Nonterminal(id) => {
                        let r = self.rules[id as usize];
                        stack.push(r.right);
                        stack.push(r.left);
                    }
                }
            }
        }
        CsrvMatrix::from_parts(self.n_rows, self.n_cols, self.dict.clone(), out)
    }

    /// Checks every invariant and returns the violations found (empty when valid).
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = self.structural_diagnostics();
        if !diags.is_empty() {
            return diags;
        }

        let mut used = vec![false; self.rules.len()];
        let bodies = self.rules.iter().flat_map(|r| [r.left, r.right]);
        for sym in bodies.chain(self.final_string.iter().copied()) {
            if let GrammarSymbol::Nonterminal(id) = sym {
                used[id as usize] = true;
            }
        }
        diags.extend(
            used.iter()
                .enumerate()
                .filter(|(_, u)| !**u)
                .map(|(rule, _)| Diagnostic::UselessRule { rule }),
        );

        let mut repeated: Vec<_> = repeated_pairs(&self.final_string).into_iter().collect();
        repeated.sort();
        diags.extend(
            repeated
                .into_iter()
                .map(|(pair, count)| Diagnostic::RepeatedPair { pair, count }),
        );
        diags
    }

    fn terminal_in_range(&self, sym: GrammarSymbol) -> bool {
        match sym {
            GrammarSymbol::Terminal { value, col } => {
                (value as usize) < self.dict.len() && (col as usize) < self.n_cols
            }
            _ => true,
        }
    }

    fn structural_diagnostics(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            for sym in [rule.left, rule.right] {
                match sym {
                    GrammarSymbol::Delimiter => diags.push(Diagnostic::DelimiterInRule { rule: i }),
                    GrammarSymbol::Nonterminal(t) if t as usize >= i => {
                        diags.push(Diagnostic::ForwardReference { rule: i, target: t })
                    }
                    s if !self.terminal_in_range(s) => {
                        diags.push(Diagnostic::TerminalOutOfRange { symbol: s })
                    }
                    _ => {}
                }
            }
        }
        let mut delims = 0usize;
        let mut trailing = false;
        for (position, &sym) in self.final_string.iter().enumerate() {
            match sym {
                GrammarSymbol::Delimiter => delims += 1,
                GrammarSymbol::Nonterminal(id) if id as usize >= self.rules.len() => {
                    diags.push(Diagnostic::UnknownNonterminal { position, id })
                }
                s if !self.terminal_in_range(s) => {
                    diags.push(Diagnostic::TerminalOutOfRange { symbol: s })
                }
                _ => {}
            }
            if delims == self.n_rows && sym != GrammarSymbol::Delimiter {
                trailing = true;
            }
        }
        if delims != self.n_rows {
            diags.push(Diagnostic::DelimiterCount {
                expected: self.n_rows,
                found: delims,
            });
        }
        if trailing {
            diags.push(Diagnostic::TrailingSymbols);
        }
        diags
    }
}

/// Delimiter-free adjacent pairs with a non-overlapping occurrence count of at least two.
pub(crate) fn repeated_pairs<T>(seq: &[T]) -> HashMap<(T, T), usize>
where
    T: Copy + Eq + std::hash::Hash + IsDelimiter,
{
    // (count, start of the last counted occurrence)
    let mut counts: HashMap<(T, T), (usize, usize)> = HashMap::new();
    for (i, w) in seq.windows(2).enumerate() {
        if w[0].is_delimiter() || w[1].is_delimiter() {
            continue;
        }
        let e = counts.entry((w[0], w[1])).or_insert((0, usize::MAX));
        if e.0 == 0 || e.1 + 1 != i {
            e.0 += 1;
            e.1 = i;
        }
    }
    counts
        .into_iter()
        .filter(|(_, (c, _))| *c >= 2)
        .map(|(k, (c, _))| (k, c))
        .collect()
}

pub(crate) trait IsDelimiter {
    fn is_delimiter(&self) -> bool;
}

impl IsDelimiter for GrammarSymbol {
    fn is_delimiter(&self) -> bool {
        *self == GrammarSymbol::Delimiter
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    pub(crate) fn t(value: u32, col: u32) -> GrammarSymbol {
        GrammarSymbol::Terminal { value, col }
    }

    pub(crate) fn n(id: u32) -> GrammarSymbol {
        GrammarSymbol::Nonterminal(id)
    }

    pub(crate) const Z: GrammarSymbol = GrammarSymbol::Delimiter;

    /// A hand-built 9-rule grammar for the 6x5 example, with 1-based value
    /// indices into the sorted dictionary and 1-based columns shifted to 0-based.
    pub(crate) fn reference_grammar() -> Grammar {
        let dict = ValueDictionary::from_values(vec![1.2, 1.7, 2.3, 3.4, 4.5, 5.6]).unwrap();
        let p = |v: u32, c: u32| t(v - 1, c - 1);
        let rules = vec![
            Rule::new(p(3, 3), p(5, 4)), // N1
            Rule::new(p(1, 1), p(4, 2)), // N2
            Rule::new(p(3, 1), n(0)),    // N3
            Rule::new(p(6, 3), p(3, 5)), // N4
            Rule::new(n(1), n(3)),       // N5
            Rule::new(n(2), p(2, 5)),    // N6
            Rule::new(n(1), n(0)),       // N7
            Rule::new(p(4, 1), n(3)),    // N8
            Rule::new(n(6), p(4, 5)),    // N9
        ];
        let c = vec![n(4), Z, n(5), Z, n(6), Z, n(7), Z, n(2), Z, n(8), Z];
        Grammar::new(6, 5, Arc::new(dict), rules, c).unwrap()
    }

    pub(crate) fn example_sorted_csrv() -> CsrvMatrix {
        let dict = ValueDictionary::from_values(vec![1.2, 1.7, 2.3, 3.4, 4.5, 5.6]).unwrap();
        let p = |v: u32, c: u32| CsrvSymbol::Pair {
            value: v - 1,
            col: c - 1,
        };
        let d = CsrvSymbol::RowDelimiter;
        #[rustfmt::skip]
        let s = vec![
            p(1, 1), p(4, 2), p(6, 3), p(3, 5), d,
            p(3, 1), p(3, 3), p(5, 4), p(2, 5), d,
            p(1, 1), p(4, 2), p(3, 3), p(5, 4), d,
            p(4, 1), p(6, 3), p(3, 5), d,
            p(3, 1), p(3, 3), p(5, 4), d,
            p(1, 1), p(4, 2), p(3, 3), p(5, 4), p(4, 5), d,
        ];
        CsrvMatrix::from_parts(6, 5, Arc::new(dict), s).unwrap()
    }

    #[test]
    fn reference_grammar_expands_to_example_sequence() {
        assert_eq!(reference_grammar().expand().unwrap(), example_sorted_csrv());
    }

    #[test]
    fn reference_grammar_is_valid() {
        assert!(
            reference_grammar().validate().is_empty(),
            "{:?}",
            reference_grammar().validate()
        );
    }

    #[test]
    fn reference_grammar_stats() {
        let s = reference_grammar().stats();
        assert_eq!(
            (s.rule_count, s.final_len, s.compressed_symbol_count),
            (9, 12, 30)
        );
    }

    #[test]
    fn reference_grammar_decodes_to_example_matrix() {
        let m = reference_grammar().expand().unwrap().decode().unwrap();
        assert_eq!(m, crate::matrix::tests::example_matrix());
    }

    #[test]
    fn identity_grammar() {
        let c =
            CsrvMatrix::build(&DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 2.0]]).unwrap());
        let g = Grammar::identity(&c);
        assert_eq!(g.expand().unwrap(), c);
        assert_eq!(g.stats().rule_count, 0);
        assert_eq!(g.stats().final_len, c.symbols().len());
    }

    #[test]
    fn forward_reference_rejected() {
        let dict = Arc::new(ValueDictionary::from_values(vec![1.0]).unwrap());
        let rules = vec![Rule::new(n(1), t(0, 0)), Rule::new(t(0, 0), t(0, 1))];
        let c = vec![n(0), Z];
        assert!(matches!(
            Grammar::new(1, 2, dict.clone(), rules.clone(), c.clone()),
            Err(Error::MalformedGrammar(_))
        ));
        let g = Grammar::from_parts_unchecked(1, 2, dict, rules, c);
        assert!(matches!(g.expand(), Err(Error::MalformedGrammar(_))));
    }

    #[test]
    fn delimiter_in_rule_diagnosed() {
        let dict = Arc::new(ValueDictionary::from_values(vec![1.0]).unwrap());
        let g = Grammar::from_parts_unchecked(1, 1, dict, vec![Rule::new(t(0, 0), Z)], vec![n(0)]);
        let diags = g.validate();
        assert!(diags.contains(&Diagnostic::DelimiterInRule { rule: 0 }));
        assert!(diags
            .iter()
            .any(|d| d.to_string().contains("delimiter in rule")));
    }

    #[test]
    fn useless_rule_diagnosed() {
        let dict = Arc::new(ValueDictionary::from_values(vec![1.0]).unwrap());
        let g = Grammar::new(
            1,
            2,
            dict,
            vec![Rule::new(t(0, 0), t(0, 1))],
            vec![t(0, 0), t(0, 1), Z],
        )
        .unwrap();
        let diags = g.validate();
        assert_eq!(diags, vec![Diagnostic::UselessRule { rule: 0 }]);
        assert!(diags[0].to_string().contains("useless rule"));
    }

    #[test]
    fn repeated_pair_diagnosed() {
        let dict = Arc::new(ValueDictionary::from_values(vec![1.0]).unwrap());
        let c = vec![t(0, 0), t(0, 1), Z, t(0, 0), t(0, 1), Z];
        let g = Grammar::new(2, 2, dict, vec![], c).unwrap();
        assert_eq!(
            g.validate(),
            vec![Diagnostic::RepeatedPair {
                pair: (t(0, 0), t(0, 1)),
                count: 2
            }]
        );
    }

    #[test]
    fn overlapping_pairs_count_once() {
        let a = n(0);
        assert!(repeated_pairs(&[a, a, a]).is_empty());
        assert_eq!(repeated_pairs(&[a, a, a, a]).get(&(a, a)), Some(&2));
    }
}
