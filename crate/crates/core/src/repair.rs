//! Delimiter-aware RePair.
//!
//! Repeatedly replaces the most frequent adjacent pair of symbols with a
//! fresh nonterminal until no pair occurs twice. Pairs touching a row
//! delimiter are never counted, so no rule spans two rows.
//!
//! The working sequence is a doubly linked list over the original positions.
//! Occurrences of each pair are threaded through a second linked list kept in
//! position order, so the head of a pair's list is its leftmost occurrence.
//! A max-heap keyed by `(count, leftmost position)` selects the next pair;
//! stale heap entries are discarded when popped.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::grammar::{repeated_pairs, Grammar, GrammarSymbol, IsDelimiter, Rule};
use crate::matrix::{CsrvMatrix, CsrvSymbol};

const NONE: u32 = u32::MAX;
const HOLE: u32 = u32::MAX;
const DELIM: u32 = 0;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Sym(u32);

impl IsDelimiter for Sym {
    fn is_delimiter(&self) -> bool {
        self.0 == DELIM
    }
}

#[inline]
fn pair_key(a: u32, b: u32) -> u64 {
    (u64::from(a) << 32) | u64::from(b)
}

struct PairRecord {
    count: u32,
    head: u32,
    tail: u32,
}

struct Workspace {
    sym: Vec<u32>,
    next: Vec<u32>,
    prev: Vec<u32>,
    occ_next: Vec<u32>,
    occ_prev: Vec<u32>,
    listed: Vec<bool>,
    index: HashMap<u64, u32>,
    records: Vec<PairRecord>,
    keys: Vec<u64>,
    stamp: Vec<u32>,
    touched: Vec<u32>,
    round: u32,
    heap: BinaryHeap<(u32, Reverse<u32>, u32)>,
}

impl Workspace {
    fn new(seq: Vec<u32>) -> Self {
        let n = seq.len();
        let next = (0..n as u32)
            .map(|i| if i as usize + 1 < n { i + 1 } else { NONE })
            .collect();
        let prev = (0..n as u32)
            .map(|i| if i == 0 { NONE } else { i - 1 })
            .collect();
        let mut ws = Self {
            sym: seq,
            next,
            prev,
            occ_next: vec![NONE; n],
            occ_prev: vec![NONE; n],
            listed: vec![false; n],
            index: HashMap::new(),
            records: Vec::new(),
            keys: Vec::new(),
            stamp: Vec::new(),
            touched: Vec::new(),
            round: 1,
            heap: BinaryHeap::new(),
        };
        for p in 0..n as u32 {
            ws.add_occurrence(p);
        }
        ws.flush_touched();
        ws
    }

    fn record_for(&mut self, key: u64) -> u32 {
        if let Some(&r) = self.index.get(&key) {
            return r;
        }
        let r = self.records.len() as u32;
        self.records.push(PairRecord {
            count: 0,
            head: NONE,
            tail: NONE,
        });
        self.keys.push(key);
        self.stamp.push(0);
        self.index.insert(key, r);
        r
    }

    fn touch(&mut self, r: u32) {
        if self.stamp[r as usize] != self.round {
            self.stamp[r as usize] = self.round;
            self.touched.push(r);
        }
    }

    fn flush_touched(&mut self) {
        for r in std::mem::take(&mut self.touched) {
            let rec = &self.records[r as usize];
            if rec.count >= 2 {
                self.heap.push((rec.count, Reverse(rec.head), r));
            }
        }
        self.round += 1;
    }

    /// Threads the pair starting at `p` onto its occurrence list. Positions are
    /// always added in increasing order, so lists stay sorted.
    fn add_occurrence(&mut self, p: u32) {
        let q = self.next[p as usize];
        if q == NONE {
            return;
        }
        let (a, b) = (self.sym[p as usize], self.sym[q as usize]);
        if a == DELIM || b == DELIM {
            return;
        }
        let r = self.record_for(pair_key(a, b));
        let rec = &mut self.records[r as usize];
        if rec.count > 0 {
            debug_assert!(rec.tail < p);
            if self.next[rec.tail as usize] == p {
                // overlaps the previous occurrence, as in `x x x`
                return;
            }
            self.occ_next[rec.tail as usize] = p;
            self.occ_prev[p as usize] = rec.tail;
        } else {
            rec.head = p;
            self.occ_prev[p as usize] = NONE;
        }
        self.occ_next[p as usize] = NONE;
        rec.tail = p;
        rec.count += 1;
        self.listed[p as usize] = true;
        self.touch(r);
    }

    /// Unthreads the pair starting at `p`, if it is listed.
    fn remove_occurrence(&mut self, p: u32) {
        if !self.listed[p as usize] {
            return;
        }
        let q = self.next[p as usize];
        let key = pair_key(self.sym[p as usize], self.sym[q as usize]);
        let r = self.index[&key];
        let (op, on) = (self.occ_prev[p as usize], self.occ_next[p as usize]);
        let rec = &mut self.records[r as usize];
        if op == NONE {
            rec.head = on;
        } else {
            self.occ_next[op as usize] = on;
        }
        if on == NONE {
            rec.tail = op;
        } else {
            self.occ_prev[on as usize] = op;
        }
        rec.count -= 1;
        self.listed[p as usize] = false;
        self.touch(r);
    }

    fn pop_best(&mut self) -> Option<u32> {
        while let Some((count, Reverse(head), r)) = self.heap.pop() {
            let rec = &self.records[r as usize];
            if rec.count == count && rec.head == head && count >= 2 {
                return Some(r);
            }
        }
        None
    }

    /// Replaces every listed occurrence of pair `r` with `fresh`.
    fn replace(&mut self, r: u32, fresh: u32) {
        let key = self.keys[r as usize];
        let (a, b) = ((key >> 32) as u32, key as u32);
        let mut positions = Vec::with_capacity(self.records[r as usize].count as usize);
        let mut p = self.records[r as usize].head;
        while p != NONE {
            positions.push(p);
            self.listed[p as usize] = false;
            p = self.occ_next[p as usize];
        }
        let rec = &mut self.records[r as usize];
        rec.count = 0;
        rec.head = NONE;
        rec.tail = NONE;

        for p in positions {
            let q = self.next[p as usize];
            if self.sym[p as usize] != a || q == NONE || self.sym[q as usize] != b {
                continue;
            }
            let left = self.prev[p as usize];
            let right = self.next[q as usize];
            if left != NONE {
                self.remove_occurrence(left);
            }
            self.remove_occurrence(q);

            self.sym[p as usize] = fresh;
            self.sym[q as usize] = HOLE;
            self.next[p as usize] = right;
            if right != NONE {
                self.prev[right as usize] = p;
            }

            if left != NONE {
                self.add_occurrence(left);
            }
            self.add_occurrence(p);
        }
        self.flush_touched();
    }

    fn into_sequence(self) -> Vec<u32> {
        let mut out = Vec::new();
        if self.sym.is_empty() {
            return out;
        }
        let mut p = 0u32;
        while p != NONE {
            out.push(self.sym[p as usize]);
            p = self.next[p as usize];
        }
        out
    }
}

/// Runs RePair over an integer sequence in which `0` is the row delimiter and
/// every id `>= first_fresh` is free for new nonterminals. Returns the rules,
/// as pairs of ids, and the final sequence.
pub(crate) fn repair_ids(seq: Vec<u32>, first_fresh: u32) -> (Vec<(u32, u32)>, Vec<u32>) {
    let mut rules: Vec<(u32, u32)> = Vec::new();
    let mut seq = seq;
    loop {
        let mut ws = Workspace::new(seq);
        while let Some(r) = ws.pop_best() {
            let key = ws.keys[r as usize];
            let fresh = first_fresh + rules.len() as u32;
            rules.push(((key >> 32) as u32, key as u32));
            ws.replace(r, fresh);
        }
        seq = ws.into_sequence();
        // Overlap bookkeeping in runs can leave a repeat uncounted; rescan.
        let wrapped: Vec<Sym> = seq.iter().map(|&s| Sym(s)).collect();
        if repeated_pairs(&wrapped).is_empty() {
            return (rules, seq);
        }
    }
}

/// Compresses a CSRV matrix into a grammar.
pub fn repair_compress(c: &CsrvMatrix) -> Grammar {
    let mut terminals: Vec<(u32, u32)> = Vec::new();
    let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
    let seq: Vec<u32> = c
        .symbols()
        .iter()
        .map(|s| match *s {
            CsrvSymbol::RowDelimiter => DELIM,
            CsrvSymbol::Pair { value, col } => *ids.entry((value, col)).or_insert_with(|| {
                terminals.push((value, col));
                terminals.len() as u32
            }),
        })
        .collect();
    let first_fresh = terminals.len() as u32 + 1;
    let (rules, seq) = repair_ids(seq, first_fresh);

    let to_symbol = |id: u32| -> GrammarSymbol {
        if id == DELIM {
            GrammarSymbol::Delimiter
        } else if id < first_fresh {
            let (value, col) = terminals[id as usize - 1];
            GrammarSymbol::Terminal { value, col }
        } else {
            GrammarSymbol::Nonterminal(id - first_fresh)
        }
    };
    let rules = rules
        .into_iter()
        .map(|(a, b)| Rule::new(to_symbol(a), to_symbol(b)))
        .collect();
    let final_string = seq.into_iter().map(to_symbol).collect();
    Grammar::from_parts_unchecked(
        c.n_rows(),
        c.n_cols(),
        c.shared_dict().clone(),
        rules,
        final_string,
    )
}
