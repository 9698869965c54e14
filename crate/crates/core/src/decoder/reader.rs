use super::DecodeError;

/// Decodes an unsigned LEB128 integer of at most 10 bytes starting at `offset`.
///
/// Returns the value and the number of bytes consumed.
pub fn decode_uleb128(bytes: &[u8], offset: usize) -> Result<(u64, usize), DecodeError> {
    let mut result = 0u64;
    let mut shift = 0u32;
    let mut pos = offset;
    loop {
        let Some(&byte) = bytes.get(pos) else {
            return Err(DecodeError::malformed(pos, "unexpected end of LEB128 integer"));
        };
        pos += 1;
        if shift == 63 && byte & 0x7E != 0 {
            return Err(DecodeError::malformed(pos - 1, "LEB128 integer too large"));
        }
        result |= u64::from(byte & 0x7F) << shift;
        if byte & 0x80 == 0 {
            return Ok((result, pos - offset));
        }
        shift += 7;
        if shift > 63 {
            return Err(DecodeError::malformed(pos, "LEB128 integer too long"));
        }
    }
}

/// Decodes a signed LEB128 integer of at most 10 bytes starting at `offset`,
/// sign-extending from the final group.
pub fn decode_sleb128(bytes: &[u8], offset: usize) -> Result<(i64, usize), DecodeError> {
    let mut result = 0i64;
    let mut shift = 0u32;
    let mut pos = offset;
    loop {
        let Some(&byte) = bytes.get(pos) else {
            return Err(DecodeError::malformed(pos, "unexpected end of LEB128 integer"));
        };
        pos += 1;
        if shift == 63 && byte != 0x00 && byte != 0x7F {
            return Err(DecodeError::malformed(pos - 1, "LEB128 integer too large"));
        }
        result |= i64::from(byte & 0x7F) << shift;
        shift += 7;
        if byte & 0x80 == 0 {
            if shift < 64 && byte & 0x40 != 0 {
                result |= -1i64 << shift;
            }
            return Ok((result, pos - offset));
        }
        if shift > 63 {
            return Err(DecodeError::malformed(pos, "LEB128 integer too long"));
        }
    }
}

/// Cursor over a byte slice. Every read consumes at least one byte or fails.
#[derive(Debug, Clone)]
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    /// Absolute offset of `bytes[0]` in the module, for diagnostics.
    base: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], base: usize) -> Self {
        Reader { bytes, pos: 0, base }
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    pub fn malformed(&self, reason: impl Into<String>) -> DecodeError {
        DecodeError::malformed(self.offset(), reason)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        let byte = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| self.malformed("unexpected end of input"))?;
        self.pos += 1;
        Ok(byte)
    }

    pub fn bytes(&mut self, len: usize) -> Result<&'a [u8], DecodeError> {
        if len > self.remaining() {
            return Err(self.malformed(format!(
                "need {len} bytes, only {} remain",
                self.remaining()
            )));
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    /// Splits off the next `len` bytes as their own reader.
    pub fn sub(&mut self, len: usize) -> Result<Reader<'a>, DecodeError> {
        let base = self.offset();
        let bytes = self.bytes(len)?;
        Ok(Reader::new(bytes, base))
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        let start = self.offset();
        let (value, used) = decode_uleb128(self.bytes, self.pos).map_err(|e| e.rebase(self.base))?;
        if used > 5 || value > u64::from(u32::MAX) {
            return Err(DecodeError::malformed(start, "u32 out of range"));
        }
        self.pos += used;
        Ok(value as u32)
    }

    pub fn i32(&mut self) -> Result<i32, DecodeError> {
        let start = self.offset();
        let (value, used) = decode_sleb128(self.bytes, self.pos).map_err(|e| e.rebase(self.base))?;
        if used > 5 || i32::try_from(value).is_err() {
            return Err(DecodeError::malformed(start, "i32 out of range"));
        }
        self.pos += used;
        Ok(value as i32)
    }

    pub fn i64(&mut self) -> Result<i64, DecodeError> {
        let (value, used) = decode_sleb128(self.bytes, self.pos).map_err(|e| e.rebase(self.base))?;
        self.pos += used;
        Ok(value)
    }

    /// A vector length, capped by the bytes left so a bogus count cannot
    /// drive a huge allocation.
    pub fn count(&mut self) -> Result<u32, DecodeError> {
        let n = self.u32()?;
        if n as usize > self.remaining() {
            return Err(self.malformed(format!("vector length {n} exceeds remaining input")));
        }
        Ok(n)
    }

    pub fn name(&mut self) -> Result<String, DecodeError> {
        let len = self.u32()? as usize;
        let at = self.offset();
        let raw = self.bytes(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::malformed(at, "name is not UTF-8"))
    }
}
