//! Offset-tracking reader shared by the binary file formats, so truncation
//! and corruption errors can name the exact byte.
//!
//! Payload sizes come from untrusted headers, so bulk reads grow their
//! buffers chunk by chunk: a header claiming terabytes of payload fails
//! with a truncation error at the real end of input instead of attempting
//! the allocation up front.

use std::io::Read;

use crate::error::{Error, Result};

/// Upper bound on a single up-front allocation driven by a header field.
const CHUNK: usize = 64 * 1024;

pub(crate) struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    pub(crate) fn new(inner: R) -> Self {
        Cursor { inner, offset: 0 }
    }

    pub(crate) fn offset(&self) -> u64 {
        self.offset
    }

    pub(crate) fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Format {
                        offset: start + filled as u64,
                        message: format!(
                            "truncated while reading {what} (needed {} more bytes)",
                            buf.len() - filled
                        ),
                    })
                }
                Ok(k) => {
                    filled += k;
                    self.offset += k as u64;
                }
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }

    /// Reads exactly `count` bytes, growing the buffer chunkwise so a lying
    /// length field cannot force a huge allocation.
    pub(crate) fn read_bytes(&mut self, count: usize, what: &str) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(count.min(CHUNK));
        let mut remaining = count;
        let mut chunk = [0u8; CHUNK];
        while remaining > 0 {
            let take = remaining.min(CHUNK);
            self.read_exact(&mut chunk[..take], what)?;
            out.extend_from_slice(&chunk[..take]);
            remaining -= take;
        }
        Ok(out)
    }

    pub(crate) fn read_u32(&mut self, what: &str) -> Result<u32> {
        let mut buf = [0u8; 4];
        self.read_exact(&mut buf, what)?;
        Ok(u32::from_le_bytes(buf))
    }

    pub(crate) fn read_f32s(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let byte_count = count
            .checked_mul(4)
            .ok_or_else(|| Error::Format {
                offset: self.offset,
                message: format!("{what} length overflows"),
            })?;
        let buf = self.read_bytes(byte_count, what)?;
        Ok(buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }

    pub(crate) fn read_f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let byte_count = count
            .checked_mul(8)
            .ok_or_else(|| Error::Format {
                offset: self.offset,
                message: format!("{what} length overflows"),
            })?;
        let buf = self.read_bytes(byte_count, what)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
