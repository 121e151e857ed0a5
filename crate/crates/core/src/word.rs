use std::fmt;

use thiserror::Error;

/// Geometry of a machine word.
///
/// Cells are `word_size` bits wide and the word size is a power of two, so a
/// bit address splits into a cell index (bits `k` and up) and an in-cell
/// offset (bits below `k`). Values wider than 64 bits are not supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordSpec {
    word_size: u32,
    k: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("word size {0} is not a power of two between 8 and 64")]
pub struct InvalidWordSize(pub u64);

impl WordSpec {
    pub const DEFAULT_SIZE: u32 = 32;

    pub fn new(word_size: u32) -> Result<Self, InvalidWordSize> {
        if !word_size.is_power_of_two() || !(8..=64).contains(&word_size) {
            return Err(InvalidWordSize(word_size.into()));
        }
        Ok(WordSpec {
            word_size,
            k: word_size.trailing_zeros(),
        })
    }

    #[inline]
    pub fn word_size(self) -> u32 {
        self.word_size
    }

    /// Highest bit index inside a word.
    #[inline]
    pub fn w(self) -> u32 {
        self.word_size - 1
    }

    /// Exponent with `2^k == word_size`.
    #[inline]
    pub fn k(self) -> u32 {
        self.k
    }

    /// The all-ones word: the halt target and the I/O address.
    #[inline]
    pub fn neg_one(self) -> u64 {
        self.mask()
    }

    #[inline]
    pub fn mask(self) -> u64 {
        u64::MAX >> (64 - self.word_size)
    }

    /// Top bit of a word, `2^(word_size-1)`.
    #[inline]
    pub fn sign_bit(self) -> u64 {
        1u64 << self.w()
    }

    /// Bit address of cell `index`.
    #[inline]
    pub fn cell_addr(self, index: u64) -> u64 {
        index * u64::from(self.word_size)
    }

    /// Reduces an arbitrary integer into `[0, 2^word_size)`.
    pub fn reduce(self, value: i128) -> u64 {
        let modulus = 1i128 << self.word_size;
        value.rem_euclid(modulus) as u64
    }

    /// Two's complement reading of a word.
    pub fn to_signed(self, value: u64) -> i64 {
        let shift = 64 - self.word_size;
        ((value << shift) as i64) >> shift
    }

    pub fn contains(self, value: u64) -> bool {
        value & !self.mask() == 0
    }
}

impl Default for WordSpec {
    fn default() -> Self {
        WordSpec::new(Self::DEFAULT_SIZE).expect("default word size is valid")
    }
}

impl fmt::Display for WordSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-bit words", self.word_size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let s = WordSpec::new(32).unwrap();
        assert_eq!(s.w(), 31);
        assert_eq!(s.k(), 5);
        assert_eq!(1u32 << s.k(), s.w() + 1);
        assert_eq!(s.neg_one(), 0xFFFF_FFFF);

        let s = WordSpec::new(8).unwrap();
        assert_eq!((s.w(), s.k(), s.neg_one()), (7, 3, 255));

        let s = WordSpec::new(64).unwrap();
        assert_eq!(s.neg_one(), u64::MAX);
        assert_eq!(s.k(), 6);
    }

    #[test]
    fn rejects_bad_sizes() {
        for ws in [0, 1, 4, 12, 24, 128] {
            assert_eq!(WordSpec::new(ws), Err(InvalidWordSize(ws.into())));
        }
    }

    #[test]
    fn reduce_and_sign() {
        let s = WordSpec::new(16).unwrap();
        assert_eq!(s.reduce(-1), 0xFFFF);
        assert_eq!(s.reduce(65536 + 3), 3);
        assert_eq!(s.to_signed(0xFFFD), -3);
        assert_eq!(s.to_signed(0x7FFF), 32767);
        let s = WordSpec::new(64).unwrap();
        assert_eq!(s.reduce(-2), u64::MAX - 1);
        assert_eq!(s.to_signed(u64::MAX), -1);
    }
}
