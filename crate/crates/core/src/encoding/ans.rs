//! Static rANS coder for large integer alphabets.
//!
//! Values are folded into at most [`ALPHABET`] buckets: values below 64 keep
//! their own bucket, larger values are bucketed by bit length and their four
//! bits after the leading one, with the remaining low bits written verbatim
//! to a side stream. Bucket frequencies, quantized to `2^SCALE_BITS`, travel
//! with the stream. Decoding is a single forward pass.

use std::cmp::Reverse;

const DIRECT: u64 = 64;
const MANTISSA_BITS: u32 = 4;
const ALPHABET: usize = 64 + 58 * 16;
const SCALE_BITS: u32 = 15;
const SCALE: u32 = 1 << SCALE_BITS;
const STATE_LOW: u32 = 1 << 23;

#[inline]
fn fold(v: u64) -> (u16, u32, u64) {
    if v < DIRECT {
        return (v as u16, 0, 0);
    }
    let e = 63 - v.leading_zeros();
    let raw_bits = e - MANTISSA_BITS;
    let mantissa = (v >> raw_bits) & ((1 << MANTISSA_BITS) - 1);
    let bucket = DIRECT + u64::from(e - 6) * 16 + mantissa;
    (bucket as u16, raw_bits, v & ((1u64 << raw_bits) - 1))
}

#[inline]
fn unfold_bits(bucket: u16) -> u32 {
    if u64::from(bucket) < DIRECT {
        0
    } else {
        (u32::from(bucket) - DIRECT as u32) / 16 + 6 - MANTISSA_BITS
    }
}

#[inline]
fn unfold(bucket: u16, raw: u64) -> u64 {
    let b = u64::from(bucket);
    if b < DIRECT {
        return b;
    }
    let mantissa = (b - DIRECT) % 16;
    let raw_bits = unfold_bits(bucket);
    ((16 | mantissa) << raw_bits) | raw
}

/// An entropy-coded sequence of `u64` values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsStream {
    len: usize,
    /// `(bucket, quantized frequency)` for every bucket in use, by bucket.
    table: Vec<(u16, u16)>,
    bytes: Vec<u8>,
    raw: Vec<u64>,
    raw_bits: usize,
}

struct Model {
    freq: Vec<u32>,
    cum: Vec<u32>,
    slots: Vec<u16>,
}

impl Model {
    fn new(table: &[(u16, u16)]) -> Self {
        let mut freq = vec![0u32; ALPHABET];
        let mut cum = vec![0u32; ALPHABET];
        let mut slots = vec![0u16; if table.is_empty() { 0 } else { SCALE as usize }];
        let mut start = 0u32;
        for &(b, f) in table {
            freq[b as usize] = u32::from(f);
            cum[b as usize] = start;
            for s in &mut slots[start as usize..(start + u32::from(f)) as usize] {
                *s = b;
            }
            start += u32::from(f);
        }
        Self { freq, cum, slots }
    }
}

fn quantize(counts: &[u64]) -> Vec<(u16, u16)> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Vec::new();
    }
    let mut table: Vec<(u16, u32)> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(b, &c)| {
            let f = ((c as u128 * SCALE as u128) / total as u128) as u32;
            (b as u16, f.max(1))
        })
        .collect();
    let sum: u32 = table.iter().map(|t| t.1).sum();
    if sum < SCALE {
        let top = (0..table.len())
            .max_by_key(|&i| (counts[table[i].0 as usize], Reverse(i)))
            .unwrap();
        table[top].1 += SCALE - sum;
    } else {
        let mut excess = sum - SCALE;
        let mut order: Vec<usize> = (0..table.len()).collect();
        order.sort_by_key(|&i| (Reverse(table[i].1), i));
        while excess > 0 {
            for &i in &order {
                if excess == 0 {
                    break;
                }
                if table[i].1 > 1 {
                    table[i].1 -= 1;
                    excess -= 1;
                }
            }
        }
    }
    table.into_iter().map(|(b, f)| (b, f as u16)).collect()
}

impl AnsStream {
    pub fn encode(values: &[u64]) -> Self {
        let mut counts = vec![0u64; ALPHABET];
        for &v in values {
            counts[fold(v).0 as usize] += 1;
        }
        let table = quantize(&counts);
        let model = Model::new(&table);

        let mut raw = Vec::new();
        let mut raw_bits = 0usize;
        for &v in values {
            let (_, nbits, bits) = fold(v);
            push_bits(&mut raw, &mut raw_bits, bits, nbits);
        }

        let mut out = Vec::new();
        let mut x: u32 = STATE_LOW;
        for &v in values.iter().rev() {
            let b = fold(v).0 as usize;
            let f = model.freq[b];
            let x_max = ((STATE_LOW >> SCALE_BITS) << 8) * f;
            while x >= x_max {
                out.push(x as u8);
                x >>= 8;
            }
            x = ((x / f) << SCALE_BITS) + (x % f) + model.cum[b];
        }
        out.extend_from_slice(&x.to_le_bytes());
        out.reverse();

        Self {
            len: values.len(),
            table,
            bytes: out,
            raw,
            raw_bits,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Decodes every value in order, passing each to `f`.
    pub fn for_each<F: FnMut(u64)>(&self, mut f: F) {
        if self.len == 0 {
            return;
        }
        let model = Model::new(&self.table);
        let mut pos = 4usize;
        let b = &self.bytes;
        let mut x = u32::from_be_bytes([b[0], b[1], b[2], b[3]]);
        let mut raw_pos = 0usize;
        for _ in 0..self.len {
            let slot = x & (SCALE - 1);
            let bucket = model.slots[slot as usize];
            let bi = bucket as usize;
            x = model.freq[bi] * (x >> SCALE_BITS) + slot - model.cum[bi];
            while x < STATE_LOW {
                x = (x << 8) | u32::from(b[pos]);
                pos += 1;
            }
            let nbits = unfold_bits(bucket);
            let raw = read_bits(&self.raw, raw_pos, nbits);
            raw_pos += nbits as usize;
            f(unfold(bucket, raw));
        }
    }

    pub fn decode(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len);
        self.for_each(|v| out.push(v));
        out
    }

    /// Serialized size in bytes, as written by [`AnsStream::write_to`].
    pub fn byte_len(&self) -> usize {
        8 + 2 + 4 * self.table.len() + 8 + self.bytes.len() + 8 + self.raw_bits.div_ceil(8)
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        out.extend_from_slice(&(self.table.len() as u16).to_le_bytes());
        for &(b, f) in &self.table {
            out.extend_from_slice(&b.to_le_bytes());
            out.extend_from_slice(&f.to_le_bytes());
        }
        out.extend_from_slice(&(self.bytes.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.bytes);
        out.extend_from_slice(&(self.raw_bits as u64).to_le_bytes());
        let n = self.raw_bits.div_ceil(8);
        out.extend(self.raw.iter().flat_map(|w| w.to_le_bytes()).take(n));
    }

    /// Parses a stream and checks that it decodes within its own bounds.
    pub fn read_from(r: &mut super::Reader<'_>) -> crate::Result<Self> {
        use crate::Error::CorruptContainer as Corrupt;
        let len = r.u64()? as usize;
        let entries = r.u16()? as usize;
        let mut table = Vec::with_capacity(entries);
        let mut total = 0u32;
        let mut last: Option<u16> = None;
        for _ in 0..entries {
            let b = r.u16()?;
            let f = r.u16()?;
            if b as usize >= ALPHABET || f == 0 || last.is_some_and(|l| l >= b) {
                return Err(Corrupt("invalid entropy-coder table".into()));
            }
            last = Some(b);
            total += u32::from(f);
            table.push((b, f));
        }
        if (len > 0 && total != SCALE) || (len == 0 && !table.is_empty()) {
            return Err(Corrupt(
                "entropy-coder frequencies do not sum to scale".into(),
            ));
        }
        let nbytes = r.u64()? as usize;
        let bytes = r.bytes(nbytes)?.to_vec();
        let raw_bits = r.u64()? as usize;
        let raw_bytes = r.bytes(raw_bits.div_ceil(8))?;
        let mut raw = vec![0u64; raw_bits.div_ceil(64)];
        for (i, b) in raw_bytes.iter().enumerate() {
            raw[i / 8] |= u64::from(*b) << (8 * (i % 8));
        }
        let s = Self {
            len,
            table,
            bytes,
            raw,
            raw_bits,
        };
        s.check()?;
        Ok(s)
    }

    /// Dry-run decode that verifies no read goes past the stored bytes and bits.
    fn check(&self) -> crate::Result<()> {
        use crate::Error::CorruptContainer as Corrupt;
        if self.len == 0 {
            return Ok(());
        }
        if self.bytes.len() < 4 {
            return Err(Corrupt("entropy-coded stream too short".into()));
        }
        let model = Model::new(&self.table);
        let b = &self.bytes;
        let mut pos = 4usize;
        let mut x = u32::from_be_bytes([b[0], b[1], b[2], b[3]]);
        let mut raw_pos = 0usize;
        for _ in 0..self.len {
            let slot = x & (SCALE - 1);
            let bi = model.slots[slot as usize] as usize;
            x = model.freq[bi] * (x >> SCALE_BITS) + slot - model.cum[bi];
            while x < STATE_LOW {
                let byte = *b
                    .get(pos)
                    .ok_or_else(|| Corrupt("entropy-coded stream truncated".into()))?;
                x = (x << 8) | u32::from(byte);
                pos += 1;
            }
            raw_pos += unfold_bits(bi as u16) as usize;
            if raw_pos > self.raw_bits {
                return Err(Corrupt("entropy-coded side bits truncated".into()));
            }
        }
        Ok(())
    }
}

fn push_bits(words: &mut Vec<u64>, len: &mut usize, bits: u64, n: u32) {
    if n == 0 {
        return;
    }
    let off = *len % 64;
    if off == 0 {
        words.push(0);
    }
    let last = words.len() - 1;
    words[last] |= bits << off;
    if off + n as usize > 64 {
        words.push(bits >> (64 - off));
    }
    *len += n as usize;
}

#[inline]
fn read_bits(words: &[u64], pos: usize, n: u32) -> u64 {
    if n == 0 {
        return 0;
    }
    let (w, off) = (pos / 64, pos % 64);
    let mut x = words[w] >> off;
    if off + n as usize > 64 {
        x |= words[w + 1] << (64 - off);
    }
    if n == 64 {
        x
    } else {
        x & ((1u64 << n) - 1)
    }
}
