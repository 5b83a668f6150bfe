//! Fixed-width bit-packed integer arrays.

/// An array of unsigned integers, each stored in exactly `width` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntVector {
    width: u8,
    len: usize,
    words: Vec<u64>,
}

/// Bits needed for `max`: `1 + floor(log2 max)`, and 1 for zero.
pub fn width_for(max: u64) -> u8 {
    if max == 0 {
        1
    } else {
        (64 - max.leading_zeros()) as u8
    }
}

impl IntVector {
    pub fn with_width(width: u8, values: &[u64]) -> Self {
        assert!((1..=64).contains(&width));
        let bits = values.len() * width as usize;
        let mut v = Self {
            width,
            len: values.len(),
            words: vec![0; bits.div_ceil(64)],
        };
        for (i, &x) in values.iter().enumerate() {
            v.set(i, x);
        }
        v
    }

    /// Uses the smallest width able to hold every value.
    pub fn from_values(values: &[u64]) -> Self {
        let max = values.iter().copied().max().unwrap_or(0);
        Self::with_width(width_for(max), values)
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    fn set(&mut self, i: usize, x: u64) {
        let w = self.width as usize;
        debug_assert!(x & !self.mask() == 0);
        let bit = i * w;
        let (word, off) = (bit / 64, bit % 64);
        self.words[word] |= x << off;
        if off + w > 64 {
            self.words[word + 1] |= x >> (64 - off);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        debug_assert!(i < self.len);
        let w = self.width as usize;
        let bit = i * w;
        let (word, off) = (bit / 64, bit % 64);
        let mut x = self.words[word] >> off;
        if off + w > 64 {
            x |= self.words[word + 1] << (64 - off);
        }
        x & self.mask()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Number of bytes used by [`IntVector::write_bits`].
    pub fn byte_len(&self) -> usize {
        (self.len * self.width as usize).div_ceil(8)
    }

    /// Appends the packed bits, little-endian, trimmed to whole bytes.
    pub fn write_bits(&self, out: &mut Vec<u8>) {
        let n = self.byte_len();
        out.extend(self.words.iter().flat_map(|w| w.to_le_bytes()).take(n));
    }

    /// Inverse of [`IntVector::write_bits`]; `bytes` must hold exactly `byte_len` bytes.
    pub fn from_bits(width: u8, len: usize, bytes: &[u8]) -> Option<Self> {
        if !(1..=64).contains(&width) {
            return None;
        }
        let bits = len.checked_mul(width as usize)?;
        if bytes.len() != bits.div_ceil(8) {
            return None;
        }
        let mut words = vec![0u64; bits.div_ceil(64)];
        for (i, b) in bytes.iter().enumerate() {
            words[i / 8] |= u64::from(*b) << (8 * (i % 8));
        }
        Some(Self { width, len, words })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(width_for(0), 1);
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(2), 2);
        assert_eq!(width_for(255), 8);
        assert_eq!(width_for(256), 9);
        assert_eq!(width_for(u64::MAX), 64);
    }

    #[test]
    fn straddles_words() {
        let vals: Vec<u64> = (0..100).map(|i| (i * 37) % 128).collect();
        let v = IntVector::with_width(7, &vals);
        assert_eq!(v.iter().collect::<Vec<_>>(), vals);
        assert_eq!(v.byte_len(), 88);
    }

    proptest! {
        #[test]
        fn bits_roundtrip(vals in proptest::collection::vec(any::<u64>(), 0..64), shift in 0u32..64) {
            let vals: Vec<u64> = vals.into_iter().map(|v| v >> shift).collect();
            let v = IntVector::from_values(&vals);
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), vals.clone());
            let mut bytes = Vec::new();
            v.write_bits(&mut bytes);
            let back = IntVector::from_bits(v.width(), vals.len(), &bytes).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
