use crate::decoder::PAGE_SIZE;
use crate::taint::Shadow;

use super::Trap;

/// Linear memory bytes plus one shadow label per byte.
#[derive(Debug, Clone, Default)]
pub struct LinearMemory {
    bytes: Vec<u8>,
    shadow: Shadow,
    max_pages: Option<u32>,
    /// Host-side cap on pages, below the module's own maximum.
    limit_pages: u32,
}

impl LinearMemory {
    pub fn new(initial: u32, max_pages: Option<u32>, limit_pages: u32) -> Result<Self, Trap> {
        if initial > limit_pages {
            return Err(Trap::MemoryLimit { pages: initial });
        }
        let len = initial as usize * PAGE_SIZE;
        Ok(LinearMemory {
            bytes: vec![0; len],
            shadow: Shadow::new(len),
            max_pages,
            limit_pages,
        })
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn pages(&self) -> u32 {
        (self.bytes.len() / PAGE_SIZE) as u32
    }

    pub fn max_pages(&self) -> Option<u32> {
        self.max_pages
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn shadow(&self) -> &Shadow {
        &self.shadow
    }

    pub fn shadow_mut(&mut self) -> &mut Shadow {
        &mut self.shadow
    }

    /// Effective address of a `width`-byte access, or an out-of-bounds trap.
    /// Alignment is not checked.
    #[inline]
    pub fn check(&self, addr: u32, offset: u32, width: usize) -> Result<usize, Trap> {
        let ea = u64::from(addr) + u64::from(offset);
        if ea + width as u64 > self.bytes.len() as u64 {
            return Err(Trap::OutOfBounds {
                addr: ea,
                width,
                len: self.bytes.len(),
            });
        }
        Ok(ea as usize)
    }

    /// Little-endian read of a checked range.
    #[inline]
    pub fn read(&self, ea: usize, width: usize) -> u64 {
        let mut raw = [0u8; 8];
        raw[..width].copy_from_slice(&self.bytes[ea..ea + width]);
        u64::from_le_bytes(raw)
    }

    /// Little-endian write of the low `width` bytes of `bits`.
    #[inline]
    pub fn write(&mut self, ea: usize, width: usize, bits: u64) {
        self.bytes[ea..ea + width].copy_from_slice(&bits.to_le_bytes()[..width]);
    }

    /// Copies bytes in with clean labels (data segments).
    pub fn init(&mut self, ea: usize, data: &[u8]) -> Result<(), Trap> {
        let end = ea
            .checked_add(data.len())
            .filter(|&e| e <= self.bytes.len())
            .ok_or(Trap::OutOfBounds {
                addr: ea as u64,
                width: data.len(),
                len: self.bytes.len(),
            })?;
        self.bytes[ea..end].copy_from_slice(data);
        self.shadow.store(ea, data.len(), crate::taint::TaintLabel::EMPTY);
        Ok(())
    }

    /// Grows by `delta` pages. Returns the previous page count, or `None`
    /// (memory unchanged) when the maximum would be exceeded.
    pub fn grow(&mut self, delta: u32) -> Option<u32> {
        let old = self.pages();
        let new = u64::from(old) + u64::from(delta);
        let cap = self
            .max_pages
            .unwrap_or(crate::decoder::MAX_PAGES)
            .min(self.limit_pages);
        if new > u64::from(cap) {
            return None;
        }
        let extra = delta as usize * PAGE_SIZE;
        self.bytes.resize(self.bytes.len() + extra, 0);
        self.shadow.grow(extra);
        Some(old)
    }
}
