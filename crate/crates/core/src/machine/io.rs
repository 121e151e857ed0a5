use std::io::{self, ErrorKind, Read, Write};

use super::{EofPolicy, MachineError};

/// Bit-stream adapter between the machine and byte streams.
///
/// Bits travel least-significant first in both directions. Output bits
/// accumulate until eight are available, then leave as one byte.
#[derive(Debug)]
pub struct BitIo<R, W> {
    input: R,
    output: W,
    in_byte: u8,
    in_left: u8,
    out_acc: u8,
    out_len: u8,
    bytes_out: u64,
}

impl<R: Read, W: Write> BitIo<R, W> {
    pub fn new(input: R, output: W) -> Self {
        BitIo {
            input,
            output,
            in_byte: 0,
            in_left: 0,
            out_acc: 0,
            out_len: 0,
            bytes_out: 0,
        }
    }

    pub fn read_bit(&mut self, eof: EofPolicy) -> Result<bool, MachineError> {
        if self.in_left == 0 {
            match self.next_byte()? {
                Some(b) => {
                    self.in_byte = b;
                    self.in_left = 8;
                }
                None => {
                    return match eof {
                        EofPolicy::Halt => Err(MachineError::InputExhausted),
                        EofPolicy::FeedZero => Ok(false),
                    }
                }
            }
        }
        let bit = self.in_byte & 1 == 1;
        self.in_byte >>= 1;
        self.in_left -= 1;
        Ok(bit)
    }

    fn next_byte(&mut self) -> io::Result<Option<u8>> {
        let mut buf = [0u8; 1];
        loop {
            match self.input.read(&mut buf) {
                Ok(0) => return Ok(None),
                Ok(_) => return Ok(Some(buf[0])),
                Err(e) if e.kind() == ErrorKind::Interrupted => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn write_bit(&mut self, bit: bool) -> io::Result<()> {
        self.out_acc |= u8::from(bit) << self.out_len;
        self.out_len += 1;
        if self.out_len == 8 {
            let byte = self.out_acc;
            self.out_acc = 0;
            self.out_len = 0;
            self.bytes_out += 1;
            self.output.write_all(&[byte])?;
        }
        Ok(())
    }

    /// Output bits waiting for a full byte.
    pub fn pending_out_bits(&self) -> u8 {
        self.out_len
    }

    /// Input bits already read from the stream but not yet consumed.
    pub fn pending_in_bits(&self) -> u8 {
        self.in_left
    }

    pub fn bytes_out(&self) -> u64 {
        self.bytes_out
    }

    /// Drops any partial output byte and flushes the sink.
    /// Returns how many bits were dropped.
    pub fn finish(&mut self) -> io::Result<u8> {
        let dropped = self.out_len;
        self.out_acc = 0;
        self.out_len = 0;
        self.output.flush()?;
        Ok(dropped)
    }

    pub fn output(&self) -> &W {
        &self.output
    }

    pub fn into_output(self) -> W {
        self.output
    }
}
