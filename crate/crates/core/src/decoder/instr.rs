//! Decoded instructions.
//!
//! Function bodies are decoded once into a flat [`InstrSeq`]. Structured
//! control instructions carry the indices of their matching `else`/`end`, so
//! the interpreter can branch without rescanning.

use std::fmt;

use super::reader::Reader;
use super::{BlockType, DecodeError, ValType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemArg {
    /// Parsed and ignored at runtime.
    pub align: u32,
    pub offset: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    I32,
    I64,
    I32S8,
    I32U8,
    I32S16,
    I32U16,
    I64S8,
    I64U8,
    I64S16,
    I64U16,
    I64S32,
    I64U32,
}

impl LoadKind {
    pub fn width(self) -> usize {
        use LoadKind::*;
        match self {
            I32S8 | I32U8 | I64S8 | I64U8 => 1,
            I32S16 | I32U16 | I64S16 | I64U16 => 2,
            I32 | I64S32 | I64U32 => 4,
            I64 => 8,
        }
    }

    pub fn result_type(self) -> ValType {
        use LoadKind::*;
        match self {
            I32 | I32S8 | I32U8 | I32S16 | I32U16 => ValType::I32,
            _ => ValType::I64,
        }
    }

    pub fn signed(self) -> bool {
        use LoadKind::*;
        matches!(self, I32S8 | I32S16 | I64S8 | I64S16 | I64S32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreKind {
    I32,
    I64,
    I32As8,
    I32As16,
    I64As8,
    I64As16,
    I64As32,
}

impl StoreKind {
    pub fn width(self) -> usize {
        use StoreKind::*;
        match self {
            I32As8 | I64As8 => 1,
            I32As16 | I64As16 => 2,
            I32 | I64As32 => 4,
            I64 => 8,
        }
    }

    pub fn value_type(self) -> ValType {
        use StoreKind::*;
        match self {
            I32 | I32As8 | I32As16 => ValType::I32,
            _ => ValType::I64,
        }
    }
}

macro_rules! numeric_ops {
    ($($variant:ident = $byte:literal $name:literal,)*) => {
        /// Integer numeric instructions (single-byte opcodes).
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum NumOp {
            $($variant,)*
        }

        impl NumOp {
            pub fn from_opcode(byte: u8) -> Option<NumOp> {
                match byte {
                    $($byte => Some(NumOp::$variant),)*
                    _ => None,
                }
            }

            pub fn opcode(self) -> u8 {
                match self {
                    $(NumOp::$variant => $byte,)*
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $(NumOp::$variant => $name,)*
                }
            }

            pub const ALL: &'static [NumOp] = &[$(NumOp::$variant,)*];
        }
    };
}

numeric_ops! {
    I32Eqz = 0x45 "i32.eqz",
    I32Eq = 0x46 "i32.eq",
    I32Ne = 0x47 "i32.ne",
    I32LtS = 0x48 "i32.lt_s",
    I32LtU = 0x49 "i32.lt_u",
    I32GtS = 0x4A "i32.gt_s",
    I32GtU = 0x4B "i32.gt_u",
    I32LeS = 0x4C "i32.le_s",
    I32LeU = 0x4D "i32.le_u",
    I32GeS = 0x4E "i32.ge_s",
    I32GeU = 0x4F "i32.ge_u",
    I64Eqz = 0x50 "i64.eqz",
    I64Eq = 0x51 "i64.eq",
    I64Ne = 0x52 "i64.ne",
    I64LtS = 0x53 "i64.lt_s",
    I64LtU = 0x54 "i64.lt_u",
    I64GtS = 0x55 "i64.gt_s",
    I64GtU = 0x56 "i64.gt_u",
    I64LeS = 0x57 "i64.le_s",
    I64LeU = 0x58 "i64.le_u",
    I64GeS = 0x59 "i64.ge_s",
    I64GeU = 0x5A "i64.ge_u",
    I32Clz = 0x67 "i32.clz",
    I32Ctz = 0x68 "i32.ctz",
    I32Popcnt = 0x69 "i32.popcnt",
    I32Add = 0x6A "i32.add",
    I32Sub = 0x6B "i32.sub",
    I32Mul = 0x6C "i32.mul",
    I32DivS = 0x6D "i32.div_s",
    I32DivU = 0x6E "i32.div_u",
    I32RemS = 0x6F "i32.rem_s",
    I32RemU = 0x70 "i32.rem_u",
    I32And = 0x71 "i32.and",
    I32Or = 0x72 "i32.or",
    I32Xor = 0x73 "i32.xor",
    I32Shl = 0x74 "i32.shl",
    I32ShrS = 0x75 "i32.shr_s",
    I32ShrU = 0x76 "i32.shr_u",
    I32Rotl = 0x77 "i32.rotl",
    I32Rotr = 0x78 "i32.rotr",
    I64Clz = 0x79 "i64.clz",
    I64Ctz = 0x7A "i64.ctz",
    I64Popcnt = 0x7B "i64.popcnt",
    I64Add = 0x7C "i64.add",
    I64Sub = 0x7D "i64.sub",
    I64Mul = 0x7E "i64.mul",
    I64DivS = 0x7F "i64.div_s",
    I64DivU = 0x80 "i64.div_u",
    I64RemS = 0x81 "i64.rem_s",
    I64RemU = 0x82 "i64.rem_u",
    I64And = 0x83 "i64.and",
    I64Or = 0x84 "i64.or",
    I64Xor = 0x85 "i64.xor",
    I64Shl = 0x86 "i64.shl",
    I64ShrS = 0x87 "i64.shr_s",
    I64ShrU = 0x88 "i64.shr_u",
    I64Rotl = 0x89 "i64.rotl",
    I64Rotr = 0x8A "i64.rotr",
    I32WrapI64 = 0xA7 "i32.wrap_i64",
    I64ExtendI32S = 0xAC "i64.extend_i32_s",
    I64ExtendI32U = 0xAD "i64.extend_i32_u",
}

impl NumOp {
    /// Operand type (all operands share one type) and operand count.
    pub fn operands(self) -> (ValType, usize) {
        use NumOp::*;
        match self {
            I32Eqz | I32Clz | I32Ctz | I32Popcnt | I64ExtendI32S | I64ExtendI32U => {
                (ValType::I32, 1)
            }
            I64Eqz | I64Clz | I64Ctz | I64Popcnt | I32WrapI64 => (ValType::I64, 1),
            op if (op.opcode() >= 0x46 && op.opcode() <= 0x4F)
                || (op.opcode() >= 0x6A && op.opcode() <= 0x78) =>
            {
                (ValType::I32, 2)
            }
            _ => (ValType::I64, 2),
        }
    }

    pub fn result_type(self) -> ValType {
        use NumOp::*;
        match self {
            I64Clz | I64Ctz | I64Popcnt | I64ExtendI32S | I64ExtendI32U => ValType::I64,
            op if op.opcode() >= 0x7C && op.opcode() <= 0x8A => ValType::I64,
            _ => ValType::I32,
        }
    }
}

/// Floating-point opcodes. Decoded so offsets stay right; executing one traps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloatOp {
    pub opcode: u8,
}

impl FloatOp {
    pub fn name(self) -> &'static str {
        float_name(self.opcode).unwrap_or("float")
    }
}

fn float_name(byte: u8) -> Option<&'static str> {
    const CMP: [&str; 12] = [
        "f32.eq", "f32.ne", "f32.lt", "f32.gt", "f32.le", "f32.ge", "f64.eq", "f64.ne", "f64.lt",
        "f64.gt", "f64.le", "f64.ge",
    ];
    const ARITH: [&str; 28] = [
        "f32.abs", "f32.neg", "f32.ceil", "f32.floor", "f32.trunc", "f32.nearest", "f32.sqrt",
        "f32.add", "f32.sub", "f32.mul", "f32.div", "f32.min", "f32.max", "f32.copysign",
        "f64.abs", "f64.neg", "f64.ceil", "f64.floor", "f64.trunc", "f64.nearest", "f64.sqrt",
        "f64.add", "f64.sub", "f64.mul", "f64.div", "f64.min", "f64.max", "f64.copysign",
    ];
    const CONV: [&str; 24] = [
        "i32.trunc_f32_s",
        "i32.trunc_f32_u",
        "i32.trunc_f64_s",
        "i32.trunc_f64_u",
        "",
        "",
        "i64.trunc_f32_s",
        "i64.trunc_f32_u",
        "i64.trunc_f64_s",
        "i64.trunc_f64_u",
        "f32.convert_i32_s",
        "f32.convert_i32_u",
        "f32.convert_i64_s",
        "f32.convert_i64_u",
        "f32.demote_f64",
        "f64.convert_i32_s",
        "f64.convert_i32_u",
        "f64.convert_i64_s",
        "f64.convert_i64_u",
        "f64.promote_f32",
        "i32.reinterpret_f32",
        "i64.reinterpret_f64",
        "f32.reinterpret_i32",
        "f64.reinterpret_i64",
    ];
    match byte {
        0x2A => Some("f32.load"),
        0x2B => Some("f64.load"),
        0x38 => Some("f32.store"),
        0x39 => Some("f64.store"),
        0x43 => Some("f32.const"),
        0x44 => Some("f64.const"),
        0x5B..=0x66 => Some(CMP[(byte - 0x5B) as usize]),
        0x8B..=0xA6 => Some(ARITH[(byte - 0x8B) as usize]),
        0xA8..=0xBF => Some(CONV[(byte - 0xA8) as usize]).filter(|s| !s.is_empty()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Unreachable,
    Nop,
    Block { ty: BlockType, end: u32 },
    Loop { ty: BlockType, end: u32 },
    /// `else_at` equals `end` when there is no else arm.
    If { ty: BlockType, else_at: u32, end: u32 },
    Else { end: u32 },
    End,
    Br(u32),
    BrIf(u32),
    BrTable { targets: Box<[u32]>, default: u32 },
    Return,
    Call(u32),
    CallIndirect(u32),
    Drop,
    Select,
    LocalGet(u32),
    LocalSet(u32),
    LocalTee(u32),
    GlobalGet(u32),
    GlobalSet(u32),
    Load(LoadKind, MemArg),
    Store(StoreKind, MemArg),
    MemorySize,
    MemoryGrow,
    I32Const(i32),
    I64Const(i64),
    Num(NumOp),
    Float(FloatOp),
}

impl Instr {
    pub fn name(&self) -> &'static str {
        use Instr::*;
        match self {
            Unreachable => "unreachable",
            Nop => "nop",
            Block { .. } => "block",
            Loop { .. } => "loop",
            If { .. } => "if",
            Else { .. } => "else",
            End => "end",
            Br(_) => "br",
            BrIf(_) => "br_if",
            BrTable { .. } => "br_table",
            Return => "return",
            Call(_) => "call",
            CallIndirect(_) => "call_indirect",
            Drop => "drop",
            Select => "select",
            LocalGet(_) => "local.get",
            LocalSet(_) => "local.set",
            LocalTee(_) => "local.tee",
            GlobalGet(_) => "global.get",
            GlobalSet(_) => "global.set",
            Load(kind, _) => match kind {
                LoadKind::I32 => "i32.load",
                LoadKind::I64 => "i64.load",
                LoadKind::I32S8 => "i32.load8_s",
                LoadKind::I32U8 => "i32.load8_u",
                LoadKind::I32S16 => "i32.load16_s",
                LoadKind::I32U16 => "i32.load16_u",
                LoadKind::I64S8 => "i64.load8_s",
                LoadKind::I64U8 => "i64.load8_u",
                LoadKind::I64S16 => "i64.load16_s",
                LoadKind::I64U16 => "i64.load16_u",
                LoadKind::I64S32 => "i64.load32_s",
                LoadKind::I64U32 => "i64.load32_u",
            },
            Store(kind, _) => match kind {
                StoreKind::I32 => "i32.store",
                StoreKind::I64 => "i64.store",
                StoreKind::I32As8 => "i32.store8",
                StoreKind::I32As16 => "i32.store16",
                StoreKind::I64As8 => "i64.store8",
                StoreKind::I64As16 => "i64.store16",
                StoreKind::I64As32 => "i64.store32",
            },
            MemorySize => "memory.size",
            MemoryGrow => "memory.grow",
            I32Const(_) => "i32.const",
            I64Const(_) => "i64.const",
            Num(op) => op.name(),
            Float(op) => op.name(),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            Instr::Br(d) | Instr::BrIf(d) => write!(f, " {d}"),
            Instr::BrTable { targets, default } => {
                for t in targets.iter() {
                    write!(f, " {t}")?;
                }
                write!(f, " {default}")
            }
            Instr::Call(i)
            | Instr::CallIndirect(i)
            | Instr::LocalGet(i)
            | Instr::LocalSet(i)
            | Instr::LocalTee(i)
            | Instr::GlobalGet(i)
            | Instr::GlobalSet(i) => write!(f, " {i}"),
            Instr::Load(_, m) | Instr::Store(_, m) if m.offset != 0 => {
                write!(f, " offset={}", m.offset)
            }
            Instr::I32Const(v) => write!(f, " {v}"),
            Instr::I64Const(v) => write!(f, " {v}"),
            _ => Ok(()),
        }
    }
}

/// A function body: flat instructions, the last of which is the function's `end`.
pub type InstrSeq = Vec<Instr>;

/// What the body decoder needs to know about the enclosing module.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BodyContext {
    pub num_locals: u32,
    pub num_globals: u32,
    pub num_functions: u32,
    pub num_types: u32,
    pub has_memory: bool,
    pub has_table: bool,
}

impl BodyContext {
    /// Permissive context for decoding a body outside any module.
    pub fn unbounded() -> Self {
        BodyContext {
            num_locals: u32::MAX,
            num_globals: u32::MAX,
            num_functions: u32::MAX,
            num_types: u32::MAX,
            has_memory: true,
            has_table: true,
        }
    }
}

fn block_type(r: &mut Reader<'_>) -> Result<BlockType, DecodeError> {
    let at = r.offset();
    match r.u8()? {
        0x40 => Ok(BlockType::Empty),
        b => match ValType::from_byte(b) {
            Some(t) => Ok(BlockType::Value(t)),
            None if b & 0x80 == 0 && b & 0x40 == 0 => Err(DecodeError::Unsupported(format!(
                "multi-value block type at byte {at}"
            ))),
            None => Err(DecodeError::malformed(at, format!("invalid block type 0x{b:02x}"))),
        },
    }
}

fn memarg(r: &mut Reader<'_>) -> Result<MemArg, DecodeError> {
    Ok(MemArg {
        align: r.u32()?,
        offset: r.u32()?,
    })
}

/// Decodes an instruction sequence up to and including the `end` closing the
/// function, which must be the last byte of `r`.
pub(crate) fn decode_instrs(r: &mut Reader<'_>, cx: &BodyContext) -> Result<InstrSeq, DecodeError> {
    let mut out: InstrSeq = Vec::new();
    // Indices of open block/loop/if instructions.
    let mut open: Vec<usize> = Vec::new();

    loop {
        let at = r.offset();
        let op = r.u8()?;
        let depth_ok = |d: u32, open: &Vec<usize>| -> Result<u32, DecodeError> {
            // +1 for the implicit function block
            if (d as usize) < open.len() + 1 {
                Ok(d)
            } else {
                Err(DecodeError::malformed(at, format!("branch depth {d} out of range")))
            }
        };
        let need_memory = || {
            if cx.has_memory {
                Ok(())
            } else {
                Err(DecodeError::malformed(at, "memory instruction without a memory"))
            }
        };
        let instr = match op {
            0x00 => Instr::Unreachable,
            0x01 => Instr::Nop,
            0x02..=0x04 => {
                let ty = block_type(r)?;
                open.push(out.len());
                match op {
                    0x02 => Instr::Block { ty, end: 0 },
                    0x03 => Instr::Loop { ty, end: 0 },
                    _ => Instr::If { ty, else_at: 0, end: 0 },
                }
            }
            0x05 => {
                let Some(&opener) = open.last() else {
                    return Err(DecodeError::malformed(at, "else outside if"));
                };
                let here = out.len() as u32;
                match &mut out[opener] {
                    Instr::If { else_at, .. } if *else_at == 0 => *else_at = here,
                    _ => return Err(DecodeError::malformed(at, "else without matching if")),
                }
                Instr::Else { end: 0 }
            }
            0x0B => {
                let here = out.len() as u32;
                match open.pop() {
                    None => {
                        out.push(Instr::End);
                        if !r.is_empty() {
                            return Err(r.malformed("bytes after the function's final end"));
                        }
                        return Ok(out);
                    }
                    Some(opener) => {
                        let else_index = match &mut out[opener] {
                            Instr::Block { end, .. } | Instr::Loop { end, .. } => {
                                *end = here;
                                None
                            }
                            Instr::If { else_at, end, .. } => {
                                *end = here;
                                if *else_at == 0 {
                                    *else_at = here;
                                    None
                                } else {
                                    Some(*else_at as usize)
                                }
                            }
                            _ => unreachable!("only block openers are pushed"),
                        };
                        if let Some(i) = else_index {
                            out[i] = Instr::Else { end: here };
                        }
                        Instr::End
                    }
                }
            }
            0x0C => Instr::Br(depth_ok(r.u32()?, &open)?),
            0x0D => Instr::BrIf(depth_ok(r.u32()?, &open)?),
            0x0E => {
                let n = r.count()?;
                let mut targets = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    targets.push(depth_ok(r.u32()?, &open)?);
                }
                let default = depth_ok(r.u32()?, &open)?;
                Instr::BrTable {
                    targets: targets.into_boxed_slice(),
                    default,
                }
            }
            0x0F => Instr::Return,
            0x10 => {
                let f = r.u32()?;
                if f >= cx.num_functions {
                    return Err(DecodeError::malformed(at, format!("call to unknown function {f}")));
                }
                Instr::Call(f)
            }
            0x11 => {
                let ty = r.u32()?;
                if ty >= cx.num_types {
                    return Err(DecodeError::malformed(at, format!("unknown type {ty}")));
                }
                if r.u8()? != 0x00 {
                    return Err(DecodeError::malformed(at, "call_indirect reserved byte must be zero"));
                }
                if !cx.has_table {
                    return Err(DecodeError::malformed(at, "call_indirect without a table"));
                }
                Instr::CallIndirect(ty)
            }
            0x1A => Instr::Drop,
            0x1B => Instr::Select,
            0x20..=0x22 => {
                let i = r.u32()?;
                if i >= cx.num_locals {
                    return Err(DecodeError::malformed(at, format!("unknown local {i}")));
                }
                match op {
                    0x20 => Instr::LocalGet(i),
                    0x21 => Instr::LocalSet(i),
                    _ => Instr::LocalTee(i),
                }
            }
            0x23 | 0x24 => {
                let i = r.u32()?;
                if i >= cx.num_globals {
                    return Err(DecodeError::malformed(at, format!("unknown global {i}")));
                }
                if op == 0x23 {
                    Instr::GlobalGet(i)
                } else {
                    Instr::GlobalSet(i)
                }
            }
            0x28..=0x35 | 0x36 | 0x37 | 0x3A..=0x3E => {
                need_memory()?;
                let m = memarg(r)?;
                match op {
                    0x28 => Instr::Load(LoadKind::I32, m),
                    0x29 => Instr::Load(LoadKind::I64, m),
                    0x2A | 0x2B => Instr::Float(FloatOp { opcode: op }),
                    0x2C => Instr::Load(LoadKind::I32S8, m),
                    0x2D => Instr::Load(LoadKind::I32U8, m),
                    0x2E => Instr::Load(LoadKind::I32S16, m),
                    0x2F => Instr::Load(LoadKind::I32U16, m),
                    0x30 => Instr::Load(LoadKind::I64S8, m),
                    0x31 => Instr::Load(LoadKind::I64U8, m),
                    0x32 => Instr::Load(LoadKind::I64S16, m),
                    0x33 => Instr::Load(LoadKind::I64U16, m),
                    0x34 => Instr::Load(LoadKind::I64S32, m),
                    0x35 => Instr::Load(LoadKind::I64U32, m),
                    0x36 => Instr::Store(StoreKind::I32, m),
                    0x37 => Instr::Store(StoreKind::I64, m),
                    0x3A => Instr::Store(StoreKind::I32As8, m),
                    0x3B => Instr::Store(StoreKind::I32As16, m),
                    0x3C => Instr::Store(StoreKind::I64As8, m),
                    0x3D => Instr::Store(StoreKind::I64As16, m),
                    _ => Instr::Store(StoreKind::I64As32, m),
                }
            }
            0x38 | 0x39 => {
                need_memory()?;
                memarg(r)?;
                Instr::Float(FloatOp { opcode: op })
            }
            0x3F | 0x40 => {
                need_memory()?;
                if r.u8()? != 0x00 {
                    return Err(DecodeError::malformed(at, "memory index must be zero"));
                }
                if op == 0x3F {
                    Instr::MemorySize
                } else {
                    Instr::MemoryGrow
                }
            }
            0x41 => Instr::I32Const(r.i32()?),
            0x42 => Instr::I64Const(r.i64()?),
            0x43 => {
                r.bytes(4)?;
                Instr::Float(FloatOp { opcode: op })
            }
            0x44 => {
                r.bytes(8)?;
                Instr::Float(FloatOp { opcode: op })
            }
            _ => {
                if let Some(num) = NumOp::from_opcode(op) {
                    Instr::Num(num)
                } else if float_name(op).is_some() {
                    Instr::Float(FloatOp { opcode: op })
                } else {
                    return Err(DecodeError::UnknownOpcode { opcode: op, offset: at });
                }
            }
        };
        out.push(instr);
        if r.is_empty() {
            return Err(r.malformed("function body ends without a final end"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode(bytes: &[u8]) -> Result<InstrSeq, DecodeError> {
        decode_instrs(&mut Reader::new(bytes, 0), &BodyContext::unbounded())
    }

    #[test]
    fn block_targets_are_patched() {
        // block; loop; br 1; end; end; end
        let seq = decode(&[0x02, 0x40, 0x03, 0x40, 0x0C, 0x01, 0x0B, 0x0B, 0x0B]).unwrap();
        assert_eq!(seq[0], Instr::Block { ty: BlockType::Empty, end: 4 });
        assert_eq!(seq[1], Instr::Loop { ty: BlockType::Empty, end: 3 });
        assert_eq!(seq[2], Instr::Br(1));
        assert_eq!(seq.len(), 6);
    }

    #[test]
    fn if_else_targets() {
        // local.get 0; if (result i32); i32.const 1; else; i32.const 2; end; end
        let seq = decode(&[0x20, 0x00, 0x04, 0x7F, 0x41, 0x01, 0x05, 0x41, 0x02, 0x0B, 0x0B]).unwrap();
        assert_eq!(
            seq[1],
            Instr::If { ty: BlockType::Value(ValType::I32), else_at: 3, end: 5 }
        );
        assert_eq!(seq[3], Instr::Else { end: 5 });
        // without else
        let seq = decode(&[0x20, 0x00, 0x04, 0x40, 0x0B, 0x0B]).unwrap();
        assert_eq!(seq[1], Instr::If { ty: BlockType::Empty, else_at: 2, end: 2 });
    }

    #[test]
    fn branch_depth_checked() {
        assert!(decode(&[0x0C, 0x00, 0x0B]).is_ok());
        assert!(decode(&[0x0C, 0x01, 0x0B]).is_err());
        assert!(decode(&[0x02, 0x40, 0x0C, 0x02, 0x0B, 0x0B]).is_err());
    }

    #[test]
    fn unbalanced_and_trailing() {
        assert!(decode(&[0x02, 0x40, 0x0B]).is_err(), "missing final end");
        assert!(decode(&[0x0B, 0x01]).is_err(), "bytes after final end");
        assert!(decode(&[0x05, 0x0B]).is_err(), "stray else");
        assert!(decode(&[0x02, 0x40, 0x05, 0x0B, 0x0B]).is_err(), "else in block");
        assert!(decode(&[0x04, 0x40, 0x05, 0x05, 0x0B, 0x0B]).is_err(), "double else");
    }

    #[test]
    fn unknown_and_float_opcodes() {
        assert!(matches!(
            decode(&[0xC0, 0x0B]),
            Err(DecodeError::UnknownOpcode { opcode: 0xC0, offset: 0 })
        ));
        let seq = decode(&[0x43, 0, 0, 0x80, 0x3F, 0x1A, 0x0B]).unwrap();
        assert_eq!(seq[0].name(), "f32.const");
        assert_eq!(seq[1], Instr::Drop);
        let seq = decode(&[0x92, 0x0B]).unwrap();
        assert_eq!(seq[0].name(), "f32.add");
    }

    #[test]
    fn numeric_table_is_consistent() {
        for &op in NumOp::ALL {
            assert_eq!(NumOp::from_opcode(op.opcode()), Some(op));
            assert!(float_name(op.opcode()).is_none(), "{} overlaps floats", op.name());
        }
        assert_eq!(NumOp::I32Add.operands(), (ValType::I32, 2));
        assert_eq!(NumOp::I64LtS.operands(), (ValType::I64, 2));
        assert_eq!(NumOp::I64LtS.result_type(), ValType::I32);
        assert_eq!(NumOp::I64Rotr.result_type(), ValType::I64);
        assert_eq!(NumOp::I32WrapI64.operands(), (ValType::I64, 1));
        assert_eq!(NumOp::I32WrapI64.result_type(), ValType::I32);
        assert_eq!(NumOp::I64ExtendI32U.result_type(), ValType::I64);
    }
}
