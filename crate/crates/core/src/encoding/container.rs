//! The `GRLM` container and the in-memory encoded blocks it holds.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "GRLM" | u8 version | u8 variant | u64 n_rows | u64 n_cols | u32 block_count
//! | u64 |V| | |V| x f64 | block_count x u64 payload offset | payloads
//! ```
//!
//! Every payload starts with `u8 variant | u64 block_rows`, followed by:
//!
//! - csrv: `u64 |S|`, `|S| x u32`
//! - re32: `u64 |C|`, `u64 |R|`, `|C| x u32`, `2|R| x u32`
//! - reiv: `u64 |C|`, `u64 |R|`, `u8 width`, packed C, packed R
//! - reans: `u64 |R|`, `u8 width`, packed R, `u8 mode`, then either an
//!   entropy-coded C (mode 0) or `u64 |C|`, `u8 width`, packed C (mode 1)

use std::sync::Arc;

use rayon::prelude::*;

use super::{
    decode_unchecked, encode_symbol, terminal_codes_end, width_for, AnsStream, IntVector, Reader,
    Variant,
};
use crate::blocked::{par_left_mult, par_right_mult, BlockedMatrix, RowBlock, Scratch};
use crate::error::{check_len, Error, Result};
use crate::grammar::{Grammar, GrammarSymbol, Rule};
use crate::matrix::{CsrvMatrix, CsrvSymbol, ValueDictionary};
use crate::multiply::{left_mult_into, right_mult_into, EvalTable, GrammarView, Visits};

pub const MAGIC: [u8; 4] = *b"GRLM";
pub const FORMAT_VERSION: u8 = 1;

const HEADER_BYTES: usize = 4 + 1 + 1 + 8 + 8 + 4 + 8;
const MODE_ANS: u8 = 0;
const MODE_PACKED: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
enum FinalCodes {
    Ans(AnsStream),
    Packed(IntVector),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Payload {
    Csrv(Vec<u32>),
    Re32 { c: Vec<u32>, r: Vec<u32> },
    ReIv { c: IntVector, r: IntVector },
    ReAns { c: FinalCodes, r: IntVector },
}

/// One row block stored as integer codes in one of the variant layouts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedBlock {
    n_rows: usize,
    n_cols: u64,
    base: u64,
    payload: Payload,
}

fn to_u32(codes: &[u64]) -> Result<Vec<u32>> {
    codes
        .iter()
        .map(|&c| u32::try_from(c).map_err(|_| Error::CodeOverflow { code: c }))
        .collect()
}

fn packed(codes: &[u64]) -> IntVector {
    IntVector::from_values(codes)
}

impl EncodedBlock {
    fn grammar_codes(g: &Grammar, base: u64) -> (Vec<u64>, Vec<u64>) {
        let m = g.n_cols();
        let c = g
            .final_string()
            .iter()
            .map(|&s| encode_symbol(s, m, base))
            .collect();
        let r = g
            .rules()
            .iter()
            .flat_map(|r| [r.left, r.right])
            .map(|s| encode_symbol(s, m, base))
            .collect();
        (c, r)
    }

    /// Encodes a grammar block. The csrv variant stores its expansion.
    pub fn from_grammar(g: &Grammar, variant: Variant) -> Result<Self> {
        let base = terminal_codes_end(g.dict().len(), g.n_cols());
        if variant == Variant::Csrv {
            return Self::from_csrv(&g.expand()?);
        }
        let (c, r) = Self::grammar_codes(g, base);
        let payload = match variant {
            Variant::Csrv => unreachable!(),
            Variant::Re32 => Payload::Re32 {
                c: to_u32(&c)?,
                r: to_u32(&r)?,
            },
            Variant::ReIv => {
                let max = c.iter().chain(&r).copied().max().unwrap_or(0);
                let w = width_for(max);
                Payload::ReIv {
                    c: IntVector::with_width(w, &c),
                    r: IntVector::with_width(w, &r),
                }
            }
            Variant::ReAns => {
                let ans = AnsStream::encode(&c);
                let flat = packed(&c);
                let c = if ans.byte_len() < 8 + 1 + flat.byte_len() {
                    FinalCodes::Ans(ans)
                } else {
                    FinalCodes::Packed(flat)
                };
                Payload::ReAns { c, r: packed(&r) }
            }
        };
        Ok(Self {
            n_rows: g.n_rows(),
            n_cols: g.n_cols() as u64,
            base,
            payload,
        })
    }

    pub fn from_csrv(c: &CsrvMatrix) -> Result<Self> {
        let base = terminal_codes_end(c.dict().len(), c.n_cols());
        let codes: Vec<u64> = c
            .symbols()
            .iter()
            .map(|&s| encode_symbol(s.into(), c.n_cols(), base))
            .collect();
        Ok(Self {
            n_rows: c.n_rows(),
            n_cols: c.n_cols() as u64,
            base,
            payload: Payload::Csrv(to_u32(&codes)?),
        })
    }

    pub fn variant(&self) -> Variant {
        match self.payload {
            Payload::Csrv(_) => Variant::Csrv,
            Payload::Re32 { .. } => Variant::Re32,
            Payload::ReIv { .. } => Variant::ReIv,
            Payload::ReAns { .. } => Variant::ReAns,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn rule_code(&self, i: usize) -> u64 {
        match &self.payload {
            Payload::Csrv(_) => unreachable!("csrv blocks have no rules"),
            Payload::Re32 { r, .. } => u64::from(r[i]),
            Payload::ReIv { r, .. } | Payload::ReAns { r, .. } => r.get(i),
        }
    }

    fn for_each_final_code<F: FnMut(u64)>(&self, mut f: F) {
        match &self.payload {
            Payload::Csrv(c) | Payload::Re32 { c, .. } => c.iter().for_each(|&x| f(u64::from(x))),
            Payload::ReIv { c, .. }
            | Payload::ReAns {
                c: FinalCodes::Packed(c),
                ..
            } => c.iter().for_each(f),
            Payload::ReAns {
                c: FinalCodes::Ans(a),
                ..
            } => a.for_each(f),
        }
    }

    fn final_codes(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(GrammarView::final_len(self));
        self.for_each_final_code(|c| out.push(c));
        out
    }

    /// Bytes of symbol data, excluding length fields and tags.
    pub fn code_bytes(&self) -> usize {
        match &self.payload {
            Payload::Csrv(c) => 4 * c.len(),
            Payload::Re32 { c, r } => 4 * (c.len() + r.len()),
            Payload::ReIv { c, r } => c.byte_len() + r.byte_len(),
            Payload::ReAns { c, r } => {
                r.byte_len()
                    + match c {
                        FinalCodes::Ans(a) => a.byte_len(),
                        FinalCodes::Packed(p) => p.byte_len(),
                    }
            }
        }
    }

    /// Length of this block's payload inside a container.
    pub fn serialized_len(&self) -> usize {
        let mut out = Vec::new();
        self.write(&mut out);
        out.len()
    }

    /// Number of integer codes: `|S|` for csrv, `|C| + 2|R|` otherwise.
    pub fn code_count(&self) -> usize {
        GrammarView::final_len(self) + 2 * GrammarView::rule_count(self)
    }

    /// Bit width of the packed entries, for the reiv variant.
    pub fn packed_width(&self) -> Option<u8> {
        match &self.payload {
            Payload::ReIv { c, .. } => Some(c.width()),
            _ => None,
        }
    }

    /// Largest code stored in C or R.
    pub fn max_code(&self) -> u64 {
        let mut max = 0;
        self.for_each_final_code(|c| max = max.max(c));
        (0..2 * GrammarView::rule_count(self))
            .map(|i| self.rule_code(i))
            .fold(max, u64::max)
    }

    fn symbol(&self, code: u64) -> GrammarSymbol {
        decode_unchecked(code, self.n_cols, self.base)
    }

    fn to_grammar(&self, dict: &Arc<ValueDictionary>) -> Grammar {
        let rules = (0..GrammarView::rule_count(self))
            .map(|i| {
                let (a, b) = self.rule(i);
                Rule::new(a, b)
            })
            .collect();
        let c = self
            .final_codes()
            .into_iter()
            .map(|c| self.symbol(c))
            .collect();
        Grammar::from_parts_unchecked(self.n_rows, self.n_cols as usize, dict.clone(), rules, c)
    }

    fn csrv_symbols(&self) -> Vec<CsrvSymbol> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.for_each_final(|s| {
            stack.push(s);
            while let Some(s) = stack.pop() {
                match s {
                    GrammarSymbol::Delimiter => out.push(CsrvSymbol::RowDelimiter),
                    GrammarSymbol::Terminal { value, col } => {
                        out.push(CsrvSymbol::Pair { value, col })
                    }
                    GrammarSymbol::Nonterminal(id) => {
                        let (a, b) = self.rule(id as usize);
                        stack.push(b);
                        stack.push(a);
                    }
                }
            }
        });
        out
    }

    /// Checks code ranges, rule ordering and row structure.
    fn check(&self) -> Result<()> {
        let corrupt = |m: String| Err(Error::CorruptContainer(m));
        let q = GrammarView::rule_count(self) as u64;
        for i in 0..2 * q {
            let code = self.rule_code(i as usize);
            if code == 0 {
                return corrupt(format!("rule {} contains a delimiter", i / 2));
            }
            if code >= self.base + i / 2 {
                return corrupt(format!("rule {} references code {code}", i / 2));
            }
        }
        let limit = self.base + q;
        let (mut rows, mut bad, mut last) = (0usize, None, None);
        self.for_each_final_code(|c| {
            if c >= limit && bad.is_none() {
                bad = Some(c);
            }
            if c == 0 {
                rows += 1;
            }
            last = Some(c);
        });
        if let Some(c) = bad {
            return corrupt(format!("final-string code {c} out of range"));
        }
        if rows != self.n_rows || last.is_some_and(|c| c != 0) {
            return corrupt(format!(
                "block declares {} rows but its final string has {rows} delimiters",
                self.n_rows
            ));
        }
        Ok(())
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.push(self.variant().tag());
        put_u64(out, self.n_rows as u64);
        match &self.payload {
            Payload::Csrv(c) => {
                put_u64(out, c.len() as u64);
                c.iter()
                    .for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
            }
            Payload::Re32 { c, r } => {
                put_u64(out, c.len() as u64);
                put_u64(out, (r.len() / 2) as u64);
                c.iter()
                    .chain(r)
                    .for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
            }
            Payload::ReIv { c, r } => {
                put_u64(out, c.len() as u64);
                put_u64(out, (r.len() / 2) as u64);
                out.push(c.width());
                c.write_bits(out);
                r.write_bits(out);
            }
            Payload::ReAns { c, r } => {
                put_u64(out, (r.len() / 2) as u64);
                out.push(r.width());
                r.write_bits(out);
                match c {
                    FinalCodes::Ans(a) => {
                        out.push(MODE_ANS);
                        a.write_to(out);
                    }
                    FinalCodes::Packed(p) => {
                        out.push(MODE_PACKED);
                        put_u64(out, p.len() as u64);
                        out.push(p.width());
                        p.write_bits(out);
                    }
                }
            }
        }
    }

    fn read(r: &mut Reader<'_>, variant: Variant, n_cols: u64, base: u64) -> Result<Self> {
        let tag = Variant::from_tag(r.u8()?)?;
        if tag != variant {
            return Err(Error::CorruptContainer(format!(
                "block variant {tag} differs from container variant {variant}"
            )));
        }
        let n_rows = r.u64()? as usize;
        let payload = match variant {
            Variant::Csrv => {
                let n = r.len_prefix(4)?;
                Payload::Csrv(read_u32s(r, n)?)
            }
            Variant::Re32 => {
                let nc = r.len_prefix(4)?;
                let nr = r.len_prefix(8)?;
                let c = read_u32s(r, nc)?;
                Payload::Re32 {
                    c,
                    r: read_u32s(r, 2 * nr)?,
                }
            }
            Variant::ReIv => {
                let nc = r.len_prefix(0)?;
                let nr = r.len_prefix(0)?;
                let w = r.u8()?;
                let c = read_packed(r, w, nc)?;
                Payload::ReIv {
                    c,
                    r: read_packed(r, w, nr.checked_mul(2).ok_or_else(too_long)?)?,
                }
            }
            Variant::ReAns => {
                let nr = r.len_prefix(0)?;
                let w = r.u8()?;
                let rules = read_packed(r, w, nr.checked_mul(2).ok_or_else(too_long)?)?;
                let c = match r.u8()? {
                    MODE_ANS => FinalCodes::Ans(AnsStream::read_from(r)?),
                    MODE_PACKED => {
                        let nc = r.len_prefix(0)?;
                        let w = r.u8()?;
                        FinalCodes::Packed(read_packed(r, w, nc)?)
                    }
                    m => return Err(Error::CorruptContainer(format!("unknown C mode {m}"))),
                };
                Payload::ReAns { c, r: rules }
            }
        };
        let block = Self {
            n_rows,
            n_cols,
            base,
            payload,
        };
        block.check()?;
        Ok(block)
    }
}

fn too_long() -> Error {
    Error::CorruptContainer("length overflow".into())
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn read_u32s(r: &mut Reader<'_>, n: usize) -> Result<Vec<u32>> {
    let bytes = r.bytes(n.checked_mul(4).ok_or_else(too_long)?)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("chunk of 4")))
        .collect())
}

fn read_packed(r: &mut Reader<'_>, width: u8, len: usize) -> Result<IntVector> {
    if !(1..=64).contains(&width) {
        return Err(Error::CorruptContainer(format!(
            "invalid packed width {width}"
        )));
    }
    let bits = len.checked_mul(width as usize).ok_or_else(too_long)?;
    let bytes = r.bytes(bits.div_ceil(8))?;
    IntVector::from_bits(width, len, bytes)
        .ok_or_else(|| Error::CorruptContainer("bad packed array".into()))
}

impl GrammarView for EncodedBlock {
    fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn n_cols(&self) -> usize {
        self.n_cols as usize
    }

    fn rule_count(&self) -> usize {
        match &self.payload {
            Payload::Csrv(_) => 0,
            Payload::Re32 { r, .. } => r.len() / 2,
            Payload::ReIv { r, .. } | Payload::ReAns { r, .. } => r.len() / 2,
        }
    }

    #[inline]
    fn rule(&self, id: usize) -> (GrammarSymbol, GrammarSymbol) {
        (
            self.symbol(self.rule_code(2 * id)),
            self.symbol(self.rule_code(2 * id + 1)),
        )
    }

    fn final_len(&self) -> usize {
        match &self.payload {
            Payload::Csrv(c) | Payload::Re32 { c, .. } => c.len(),
            Payload::ReIv { c, .. }
            | Payload::ReAns {
                c: FinalCodes::Packed(c),
                ..
            } => c.len(),
            Payload::ReAns {
                c: FinalCodes::Ans(a),
                ..
            } => a.len(),
        }
    }

    fn for_each_final<F: FnMut(GrammarSymbol)>(&self, mut f: F) {
        let (m, base) = (self.n_cols, self.base);
        self.for_each_final_code(|c| f(decode_unchecked(c, m, base)))
    }
}

impl RowBlock for EncodedBlock {
    fn block_rows(&self) -> usize {
        self.n_rows
    }

    fn right_into(
        &self,
        dict: &ValueDictionary,
        x: &[f64],
        y: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits> {
        right_mult_into(self, dict, x, y, table)
    }

    fn left_into(
        &self,
        dict: &ValueDictionary,
        y: &[f64],
        x: &mut [f64],
        table: &mut EvalTable,
    ) -> Result<Visits> {
        left_mult_into(self, dict, y, x, table)
    }
}

/// A whole matrix in one storage variant: shared dictionary plus encoded row blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedMatrix {
    variant: Variant,
    n_rows: usize,
    n_cols: usize,
    dict: Arc<ValueDictionary>,
    blocks: Vec<EncodedBlock>,
}

impl CompressedMatrix {
    /// Encodes every block of `m`, in parallel.
    pub fn encode(m: &BlockedMatrix, variant: Variant) -> Result<Self> {
        let blocks = m
            .blocks()
            .par_iter()
            .map(|g| EncodedBlock::from_grammar(g, variant))
            .collect::<Result<_>>()?;
        Ok(Self {
            variant,
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            dict: m.shared_dict().clone(),
            blocks,
        })
    }

    pub fn from_grammar(g: &Grammar, variant: Variant) -> Result<Self> {
        Ok(Self {
            variant,
            n_rows: g.n_rows(),
            n_cols: g.n_cols(),
            dict: g.shared_dict().clone(),
            blocks: vec![EncodedBlock::from_grammar(g, variant)?],
        })
    }

    pub fn from_csrv(c: &CsrvMatrix) -> Result<Self> {
        Ok(Self {
            variant: Variant::Csrv,
            n_rows: c.n_rows(),
            n_cols: c.n_cols(),
            dict: c.shared_dict().clone(),
            blocks: vec![EncodedBlock::from_csrv(c)?],
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
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

    pub fn blocks(&self) -> &[EncodedBlock] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// `8|V|` plus the bytes of every block's symbol data.
    pub fn payload_bytes(&self) -> usize {
        8 * self.dict.len()
            + self
                .blocks
                .iter()
                .map(EncodedBlock::code_bytes)
                .sum::<usize>()
    }

    pub fn code_count(&self) -> usize {
        self.blocks.iter().map(EncodedBlock::code_count).sum()
    }

    pub fn rule_count(&self) -> usize {
        self.blocks.iter().map(GrammarView::rule_count).sum()
    }

    pub fn final_len(&self) -> usize {
        self.blocks.iter().map(GrammarView::final_len).sum()
    }

    /// Decodes every block back to a grammar (csrv blocks become rule-free grammars).
    pub fn to_grammars(&self) -> Vec<Grammar> {
        self.blocks
            .iter()
            .map(|b| b.to_grammar(&self.dict))
            .collect()
    }

    pub fn to_blocked(&self) -> Result<BlockedMatrix> {
        BlockedMatrix::from_grammars(self.to_grammars())
    }

    /// Full expansion to one CSRV sequence.
    pub fn to_csrv(&self) -> Result<CsrvMatrix> {
        let symbols = self
            .blocks
            .par_iter()
            .map(EncodedBlock::csrv_symbols)
            .collect::<Vec<_>>()
            .concat();
        CsrvMatrix::from_parts(self.n_rows, self.n_cols, self.dict.clone(), symbols)
    }

    pub fn right_mult_into(
        &self,
        x: &[f64],
        y: &mut [f64],
        scratch: &mut Scratch,
    ) -> Result<Visits> {
        check_len(self.n_cols, x.len())?;
        par_right_mult(&self.blocks, &self.dict, x, y, scratch)
    }

    pub fn left_mult_into(
        &self,
        y: &[f64],
        x: &mut [f64],
        scratch: &mut Scratch,
    ) -> Result<Visits> {
        check_len(self.n_cols, x.len())?;
        par_left_mult(&self.blocks, &self.dict, y, x, scratch)
    }

    pub fn right_mult(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.right_mult_into(x, &mut y, &mut Scratch::new())?;
        Ok(y)
    }

    pub fn left_mult(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_cols];
        self.left_mult_into(y, &mut x, &mut Scratch::new())?;
        Ok(x)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payloads: Vec<Vec<u8>> = self
            .blocks
            .par_iter()
            .map(|b| {
                let mut out = Vec::new();
                b.write(&mut out);
                out
            })
            .collect();
        let head = HEADER_BYTES + 8 * self.dict.len() + 8 * self.blocks.len();
        let mut out = Vec::with_capacity(head + payloads.iter().map(Vec::len).sum::<usize>());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(self.variant.tag());
        put_u64(&mut out, self.n_rows as u64);
        put_u64(&mut out, self.n_cols as u64);
        out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        put_u64(&mut out, self.dict.len() as u64);
        for v in self.dict.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let mut offset = head as u64;
        for p in &payloads {
            put_u64(&mut out, offset);
            offset += p.len() as u64;
        }
        for p in payloads {
            out.extend_from_slice(&p);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let h = Header::read(bytes)?;
        let mut r = Reader::new(bytes);
        r.seek(h.offsets_at)?;
        let mut offsets = Vec::with_capacity(h.block_count);
        for _ in 0..h.block_count {
            let off = r.u64()?;
            let off = usize::try_from(off)
                .ok()
                .filter(|o| *o >= h.offsets_at + 8 * h.block_count && *o <= bytes.len())
                .ok_or_else(|| {
                    Error::CorruptContainer(format!("block offset {off} out of range"))
                })?;
            offsets.push(off);
        }
        let base = terminal_codes_end(h.dict.len(), h.n_cols);
        let blocks: Vec<EncodedBlock> = offsets
            .par_iter()
            .map(|&off| {
                let mut r = Reader::new(bytes);
                r.seek(off)?;
                EncodedBlock::read(&mut r, h.variant, h.n_cols as u64, base)
            })
            .collect::<Result<_>>()?;
        let rows: usize = blocks.iter().map(EncodedBlock::n_rows).sum();
        if rows != h.n_rows {
            return Err(Error::CorruptContainer(format!(
                "blocks hold {rows} rows, header declares {}",
                h.n_rows
            )));
        }
        Ok(Self {
            variant: h.variant,
            n_rows: h.n_rows,
            n_cols: h.n_cols,
            dict: Arc::new(h.dict),
            blocks,
        })
    }
}

struct Header {
    variant: Variant,
    n_rows: usize,
    n_cols: usize,
    block_count: usize,
    dict: ValueDictionary,
    offsets_at: usize,
}

impl Header {
    fn read(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::CorruptContainer(m.into());
        let mut r = Reader::new(bytes);
        if r.bytes(4).map_err(|_| corrupt("missing magic"))? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.u8()?;
        if version != FORMAT_VERSION {
            return Err(Error::CorruptContainer(format!(
                "unsupported format version {version}"
            )));
        }
        let variant = Variant::from_tag(r.u8()?)?;
        let n_rows = usize::try_from(r.u64()?).map_err(|_| corrupt("row count too large"))?;
        let n_cols = usize::try_from(r.u64()?).map_err(|_| corrupt("column count too large"))?;
        let block_count = r.u32()? as usize;
        if n_rows == 0 || n_cols == 0 {
            return Err(corrupt("empty dimensions"));
        }
        if block_count == 0 || block_count > n_rows {
            return Err(Error::CorruptContainer(format!(
                "block count {block_count} invalid for {n_rows} rows"
            )));
        }
        let nv = r.len_prefix(8)?;
        let values = (0..nv).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        if (nv as u64)
            .checked_mul(n_cols as u64)
            .and_then(|t| t.checked_add(1))
            .is_none()
        {
            return Err(corrupt("terminal code space overflows"));
        }
        let dict = ValueDictionary::from_values(values)
            .map_err(|e| Error::CorruptContainer(e.to_string()))?;
        Ok(Self {
            variant,
            n_rows,
            n_cols,
            block_count,
            dict,
            offsets_at: r.position(),
        })
    }
}

/// Result of [`deserialize`].
#[derive(Clone, Debug, PartialEq)]
pub enum Decoded {
    Csrv(CsrvMatrix),
    Grammar(Grammar),
    Blocked(BlockedMatrix),
}

pub fn serialize_grammar(g: &Grammar, variant: Variant) -> Result<Vec<u8>> {
    Ok(CompressedMatrix::from_grammar(g, variant)?.to_bytes())
}

pub fn serialize_csrv(c: &CsrvMatrix) -> Result<Vec<u8>> {
    Ok(CompressedMatrix::from_csrv(c)?.to_bytes())
}

/// Csrv containers decode to one CSRV matrix, single-block grammars to a
/// grammar, and multi-block grammars to a blocked matrix.
pub fn deserialize(bytes: &[u8]) -> Result<Decoded> {
    let cm = CompressedMatrix::from_bytes(bytes)?;
    if cm.variant == Variant::Csrv {
        return cm.to_csrv().map(Decoded::Csrv);
    }
    let mut grammars = cm.to_grammars();
    if grammars.len() == 1 {
        Ok(Decoded::Grammar(grammars.pop().expect("one block")))
    } else {
        BlockedMatrix::from_grammars(grammars).map(Decoded::Blocked)
    }
}

/// Sizes of a serialized container, relative to dense `f64` storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeReport {
    pub variant: Variant,
    pub n_rows: usize,
    pub n_cols: usize,
    pub bytes_total: usize,
    pub dense_bytes: u64,
    /// `bytes_total / dense_bytes`.
    pub ratio: f64,
}

pub fn compressed_size_report(bytes: &[u8]) -> Result<SizeReport> {
    let h = Header::read(bytes)?;
    let dense_bytes = h.n_rows as u64 * h.n_cols as u64 * 8;
    Ok(SizeReport {
        variant: h.variant,
        n_rows: h.n_rows,
        n_cols: h.n_cols,
        bytes_total: bytes.len(),
        dense_bytes,
        ratio: bytes.len() as f64 / dense_bytes as f64,
    })
}
