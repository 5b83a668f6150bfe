//! Integer codes for grammar symbols and the on-disk container.
//!
//! Symbols are numbered densely: `0` is the row delimiter, the terminal
//! `(value, col)` is `1 + value * n_cols + col`, and nonterminal `id` is
//! `1 + |V| * n_cols + id`.

mod ans;
mod container;
mod intvec;

use std::fmt;
use std::str::FromStr;

pub use ans::AnsStream;
pub use container::{
    compressed_size_report, deserialize, serialize_csrv, serialize_grammar, CompressedMatrix,
    Decoded, EncodedBlock, SizeReport, FORMAT_VERSION, MAGIC,
};
pub use intvec::{width_for, IntVector};

use crate::error::{Error, Result};
use crate::grammar::GrammarSymbol;

/// Storage layout for the final string and rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Uncompressed CSRV sequence as 32-bit codes.
    Csrv,
    /// Final string and rules as 32-bit codes.
    Re32,
    /// Final string and rules bit-packed at `1 + floor(log2 N_max)` bits.
    ReIv,
    /// Rules bit-packed, final string entropy coded.
    ReAns,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Csrv, Variant::Re32, Variant::ReIv, Variant::ReAns];

    pub fn tag(self) -> u8 {
        match self {
            Variant::Csrv => 0,
            Variant::Re32 => 1,
            Variant::ReIv => 2,
            Variant::ReAns => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.tag() == tag)
            .ok_or_else(|| Error::CorruptContainer(format!("unknown variant tag {tag}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Csrv => "csrv",
            Variant::Re32 => "re32",
            Variant::ReIv => "reiv",
            Variant::ReAns => "reans",
        }
    }

    pub fn is_grammar(self) -> bool {
        self != Variant::Csrv
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "csrv" => Ok(Variant::Csrv),
            "re32" => Ok(Variant::Re32),
            "reiv" => Ok(Variant::ReIv),
            "reans" => Ok(Variant::ReAns),
            _ => Err(Error::InvalidArgument(format!("unknown variant '{s}'"))),
        }
    }
}

/// First nonterminal code: one past the dense terminal range.
pub fn terminal_codes_end(dict_len: usize, n_cols: usize) -> u64 {
    1 + dict_len as u64 * n_cols as u64
}

pub fn encode_symbol(sym: GrammarSymbol, n_cols: usize, base: u64) -> u64 {
    match sym {
        GrammarSymbol::Delimiter => 0,
        GrammarSymbol::Terminal { value, col } => {
            1 + u64::from(value) * n_cols as u64 + u64::from(col)
        }
        GrammarSymbol::Nonterminal(id) => base + u64::from(id),
    }
}

/// Inverse of [`encode_symbol`]; nonterminal ids must be below `rule_count`.
pub fn decode_symbol(
    code: u64,
    n_cols: usize,
    base: u64,
    rule_count: usize,
) -> Result<GrammarSymbol> {
    if code != 0 && code >= base && code - base >= rule_count as u64 {
        return Err(Error::MalformedInput(format!(
            "symbol code {code} out of range (limit {})",
            base + rule_count as u64
        )));
    }
    Ok(decode_unchecked(code, n_cols as u64, base))
}

#[inline]
pub(crate) fn decode_unchecked(code: u64, n_cols: u64, base: u64) -> GrammarSymbol {
    if code == 0 {
        GrammarSymbol::Delimiter
    } else if code < base {
        let t = code - 1;
        GrammarSymbol::Terminal {
            value: (t / n_cols) as u32,
            col: (t % n_cols) as u32,
        }
    } else {
        GrammarSymbol::Nonterminal((code - base) as u32)
    }
}

/// Little-endian cursor that reports truncation as a corrupt container.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn seek(&mut self, pos: usize) -> Result<()> {
        if pos > self.buf.len() {
            return Err(Error::CorruptContainer(format!(
                "offset {pos} past end of file"
            )));
        }
        self.pos = pos;
        Ok(())
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|e| *e <= self.buf.len())
            .ok_or_else(|| Error::CorruptContainer("truncated stream".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.bytes(N)?.try_into().expect("length checked"))
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    /// Reads a length and refuses values that could not fit in the rest of the buffer.
    pub fn len_prefix(&mut self, min_item_bytes: usize) -> Result<usize> {
        let n = self.u64()?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if min_item_bytes > 0 && n > remaining / min_item_bytes as u64 {
            return Err(Error::CorruptContainer(format!(
                "length {n} exceeds remaining {remaining} bytes"
            )));
        }
        Ok(n as usize)
    }
}
