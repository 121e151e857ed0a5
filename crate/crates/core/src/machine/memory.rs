use crate::word::WordSpec;

use super::MachineError;

/// Zero-filled, one-side infinite bit array.
///
/// Only the allocated prefix is stored; its length is always a whole number
/// of words. Bits at or past `len_bits` read as zero, and storage past
/// `len_bits` is kept zero so unaligned reads can ignore the boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMemory {
    spec: WordSpec,
    chunks: Vec<u64>,
    len_bits: u64,
    cap_bits: u64,
}

impl BitMemory {
    pub fn new(spec: WordSpec, cap_bits: u64) -> Self {
        BitMemory {
            spec,
            chunks: Vec::new(),
            len_bits: 0,
            cap_bits,
        }
    }

    /// Builds memory holding `words` at cells `0..words.len()`.
    pub fn from_words(spec: WordSpec, words: &[u64], cap_bits: u64) -> Result<Self, MachineError> {
        let mut mem = BitMemory::new(spec, cap_bits);
        if let Some(last) = words.len().checked_sub(1) {
            let top = spec.cell_addr(last as u64);
            mem.grow_to(top)?;
            for (i, &w) in words.iter().enumerate() {
                mem.write_word(spec.cell_addr(i as u64), w)?;
            }
        }
        Ok(mem)
    }

    #[inline]
    pub fn spec(&self) -> WordSpec {
        self.spec
    }

    #[inline]
    pub fn len_bits(&self) -> u64 {
        self.len_bits
    }

    pub fn cap_bits(&self) -> u64 {
        self.cap_bits
    }

    pub fn len_words(&self) -> u64 {
        self.len_bits / u64::from(self.spec.word_size())
    }

    #[inline]
    fn chunk(&self, index: u64) -> u64 {
        self.chunks.get(index as usize).copied().unwrap_or(0)
    }

    #[inline]
    pub fn get_bit(&self, addr: u64) -> bool {
        if addr >= self.len_bits {
            return false;
        }
        (self.chunks[(addr >> 6) as usize] >> (addr & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, addr: u64, bit: bool) -> Result<(), MachineError> {
        // Any write past the end allocates, even a zero.
        self.grow_to(addr)?;
        let slot = &mut self.chunks[(addr >> 6) as usize];
        let m = 1u64 << (addr & 63);
        if bit {
            *slot |= m;
        } else {
            *slot &= !m;
        }
        Ok(())
    }

    /// Reads `word_size` bits starting at any bit address, LSB first.
    #[inline]
    pub fn read_word(&self, addr: u64) -> u64 {
        if addr >= self.len_bits {
            return 0;
        }
        let idx = addr >> 6;
        let off = (addr & 63) as u32;
        let mut v = self.chunk(idx) >> off;
        if off != 0 && off + self.spec.word_size() > 64 {
            v |= self.chunk(idx + 1) << (64 - off);
        }
        v & self.spec.mask()
    }

    /// Writes a word at any bit address; bits outside the window are kept.
    pub fn write_word(&mut self, addr: u64, value: u64) -> Result<(), MachineError> {
        let ws = u64::from(self.spec.word_size());
        let last = addr
            .checked_add(ws - 1)
            .ok_or(MachineError::MemoryLimit { addr })?;
        self.grow_to(last)?;
        let value = value & self.spec.mask();
        let idx = (addr >> 6) as usize;
        let off = (addr & 63) as u32;
        let mask = self.spec.mask();
        self.chunks[idx] = (self.chunks[idx] & !(mask << off)) | (value << off);
        if off != 0 && off + self.spec.word_size() > 64 {
            let spill = 64 - off;
            let hi_mask = mask >> spill;
            self.chunks[idx + 1] = (self.chunks[idx + 1] & !hi_mask) | (value >> spill);
        }
        Ok(())
    }

    /// Extends the allocation so that bit `addr` exists.
    fn grow_to(&mut self, addr: u64) -> Result<(), MachineError> {
        if addr < self.len_bits {
            return Ok(());
        }
        let ws = u64::from(self.spec.word_size());
        let new_len = (addr / ws)
            .checked_add(1)
            .and_then(|cells| cells.checked_mul(ws))
            .filter(|&n| n <= self.cap_bits)
            .ok_or(MachineError::MemoryLimit { addr })?;
        self.len_bits = new_len;
        let chunks = new_len.div_ceil(64) as usize;
        if chunks > self.chunks.len() {
            self.chunks.resize(chunks, 0);
        }
        Ok(())
    }

    /// Snapshot of every allocated cell, cell `i` at index `i`.
    pub fn words(&self) -> Vec<u64> {
        let ws = u64::from(self.spec.word_size());
        (0..self.len_words()).map(|i| self.read_word(i * ws)).collect()
    }
}
