//! Binary decoder: turns a WebAssembly (MVP, version 1) binary into a
//! [`ModuleDef`].
//!
//! Decoding is single-pass. Structural checks (section order, nesting,
//! index bounds, constant initializers) happen here; operand-stack typing is
//! left to runtime traps.

mod instr;
mod reader;

use std::collections::BTreeMap;

use thiserror::Error;

pub use instr::{FloatOp, Instr, InstrSeq, LoadKind, MemArg, NumOp, StoreKind};
pub use reader::{decode_sleb128, decode_uleb128};

use instr::{decode_instrs, BodyContext};
use reader::Reader;

pub const MAGIC: [u8; 4] = [0x00, 0x61, 0x73, 0x6D];
pub const VERSION: u32 = 1;
pub const PAGE_SIZE: usize = 65536;
/// Largest page count addressable with 32-bit memory.
pub const MAX_PAGES: u32 = 65536;
/// Upper bound on declared locals per function.
pub const MAX_LOCALS: u64 = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad magic number")]
    BadMagic,
    #[error("unsupported binary version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed module at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("unknown opcode 0x{opcode:02x} at byte {offset}")]
    UnknownOpcode { opcode: u8, offset: usize },
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

impl DecodeError {
    pub(crate) fn malformed(offset: usize, reason: impl Into<String>) -> Self {
        DecodeError::Malformed {
            offset,
            reason: reason.into(),
        }
    }

    pub(crate) fn rebase(self, base: usize) -> Self {
        match self {
            DecodeError::Malformed { offset, reason } => DecodeError::Malformed {
                offset: offset + base,
                reason,
            },
            DecodeError::UnknownOpcode { opcode, offset } => DecodeError::UnknownOpcode {
                opcode,
                offset: offset + base,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValType {
    I32,
    I64,
    F32,
    F64,
}

impl ValType {
    pub fn from_byte(b: u8) -> Option<ValType> {
        match b {
            0x7F => Some(ValType::I32),
            0x7E => Some(ValType::I64),
            0x7D => Some(ValType::F32),
            0x7C => Some(ValType::F64),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ValType::I32 => "i32",
            ValType::I64 => "i64",
            ValType::F32 => "f32",
            ValType::F64 => "f64",
        }
    }
}

impl std::fmt::Display for ValType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockType {
    Empty,
    Value(ValType),
}

impl BlockType {
    pub fn arity(self) -> usize {
        match self {
            BlockType::Empty => 0,
            BlockType::Value(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FuncType {
    pub params: Vec<ValType>,
    /// At most one entry.
    pub results: Vec<ValType>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub type_index: u32,
    /// Run-length local declarations, as in the binary.
    pub locals: Vec<(u32, ValType)>,
    pub body: InstrSeq,
}

impl Function {
    /// Declared locals expanded, excluding parameters.
    pub fn local_types(&self) -> impl Iterator<Item = ValType> + '_ {
        self.locals
            .iter()
            .flat_map(|&(n, t)| std::iter::repeat_n(t, n as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternKind {
    Func,
    Table,
    Memory,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Export {
    pub kind: ExternKind,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub min: u32,
    pub max: Option<u32>,
}

/// Constant initializer: a single `t.const` followed by `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstExpr {
    I32(i32),
    I64(i64),
    F32(u32),
    F64(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSegment {
    pub memory: u32,
    pub offset: ConstExpr,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSegment {
    pub table: u32,
    pub offset: ConstExpr,
    pub functions: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableDef {
    /// Always `funcref` (0x70) in MVP.
    pub element_type: u8,
    pub limits: Limits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalDef {
    pub ty: ValType,
    pub mutable: bool,
    pub init: ConstExpr,
}

/// The decoded static image of a module.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModuleDef {
    pub types: Vec<FuncType>,
    pub functions: Vec<Function>,
    pub exports: BTreeMap<String, Export>,
    pub memories: Vec<Limits>,
    pub data_segments: Vec<DataSegment>,
    pub tables: Vec<TableDef>,
    pub element_segments: Vec<ElementSegment>,
    pub globals: Vec<GlobalDef>,
    pub start: Option<u32>,
}

impl ModuleDef {
    pub fn func_type(&self, function: u32) -> &FuncType {
        &self.types[self.functions[function as usize].type_index as usize]
    }

    /// Exported function index by name.
    pub fn exported_function(&self, name: &str) -> Option<u32> {
        match self.exports.get(name) {
            Some(Export { kind: ExternKind::Func, index }) => Some(*index),
            _ => None,
        }
    }
}

/// Checks magic and version; returns the version.
pub fn validate_header(bytes: &[u8]) -> Result<u32, DecodeError> {
    if bytes.len() < 8 {
        let prefix = &bytes[..bytes.len().min(4)];
        if !MAGIC.starts_with(prefix) {
            return Err(DecodeError::BadMagic);
        }
        return Err(DecodeError::malformed(bytes.len(), "truncated header"));
    }
    if bytes[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    if version != VERSION {
        return Err(DecodeError::UnsupportedVersion(version));
    }
    Ok(version)
}

mod section {
    pub const CUSTOM: u8 = 0;
    pub const TYPE: u8 = 1;
    pub const IMPORT: u8 = 2;
    pub const FUNCTION: u8 = 3;
    pub const TABLE: u8 = 4;
    pub const MEMORY: u8 = 5;
    pub const GLOBAL: u8 = 6;
    pub const EXPORT: u8 = 7;
    pub const START: u8 = 8;
    pub const ELEMENT: u8 = 9;
    pub const CODE: u8 = 10;
    pub const DATA: u8 = 11;
}

fn val_type(r: &mut Reader<'_>) -> Result<ValType, DecodeError> {
    let at = r.offset();
    let b = r.u8()?;
    ValType::from_byte(b).ok_or_else(|| DecodeError::malformed(at, format!("invalid value type 0x{b:02x}")))
}

fn limits(r: &mut Reader<'_>) -> Result<Limits, DecodeError> {
    let at = r.offset();
    let limits = match r.u8()? {
        0x00 => Limits { min: r.u32()?, max: None },
        0x01 => Limits {
            min: r.u32()?,
            max: Some(r.u32()?),
        },
        b => return Err(DecodeError::malformed(at, format!("invalid limits flag 0x{b:02x}"))),
    };
    if let Some(max) = limits.max {
        if limits.min > max {
            return Err(DecodeError::malformed(at, "limits minimum exceeds maximum"));
        }
    }
    Ok(limits)
}

fn const_expr(r: &mut Reader<'_>) -> Result<ConstExpr, DecodeError> {
    let at = r.offset();
    let expr = match r.u8()? {
        0x41 => ConstExpr::I32(r.i32()?),
        0x42 => ConstExpr::I64(r.i64()?),
        0x43 => {
            let b = r.bytes(4)?;
            ConstExpr::F32(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        }
        0x44 => {
            let b = r.bytes(8)?;
            let mut raw = [0u8; 8];
            raw.copy_from_slice(b);
            ConstExpr::F64(u64::from_le_bytes(raw))
        }
        op => {
            return Err(DecodeError::malformed(
                at,
                format!("initializer must be a single constant, found opcode 0x{op:02x}"),
            ))
        }
    };
    if r.u8()? != 0x0B {
        return Err(DecodeError::malformed(at, "initializer must end after one constant"));
    }
    Ok(expr)
}

fn offset_expr(r: &mut Reader<'_>) -> Result<ConstExpr, DecodeError> {
    let at = r.offset();
    match const_expr(r)? {
        e @ ConstExpr::I32(_) => Ok(e),
        _ => Err(DecodeError::malformed(at, "segment offset must be an i32 constant")),
    }
}

/// Decodes one code-section entry body (locals + instructions) of `length`
/// bytes at `offset`, with no module context for index checks.
pub fn decode_function_body(
    bytes: &[u8],
    offset: usize,
    length: usize,
) -> Result<(Vec<(u32, ValType)>, InstrSeq), DecodeError> {
    let end = offset
        .checked_add(length)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| DecodeError::malformed(offset, "function body overruns input"))?;
    let mut r = Reader::new(&bytes[offset..end], offset);
    body(&mut r, &BodyContext::unbounded(), 0)
}

fn body(
    r: &mut Reader<'_>,
    cx: &BodyContext,
    num_params: u32,
) -> Result<(Vec<(u32, ValType)>, InstrSeq), DecodeError> {
    let groups = r.count()?;
    let mut locals = Vec::with_capacity(groups as usize);
    let mut total = u64::from(num_params);
    for _ in 0..groups {
        let at = r.offset();
        let n = r.u32()?;
        let t = val_type(r)?;
        total += u64::from(n);
        if total > MAX_LOCALS {
            return Err(DecodeError::malformed(at, "too many locals"));
        }
        locals.push((n, t));
    }
    let cx = BodyContext {
        num_locals: total as u32,
        ..*cx
    };
    let instrs = decode_instrs(r, &cx)?;
    Ok((locals, instrs))
}

/// Decodes a complete module.
pub fn decode_module(bytes: &[u8]) -> Result<ModuleDef, DecodeError> {
    validate_header(bytes)?;
    let mut r = Reader::new(&bytes[8..], 8);
    let mut module = ModuleDef::default();
    let mut function_types: Vec<u32> = Vec::new();
    let mut last_id = 0u8;
    let mut saw_code = false;

    while !r.is_empty() {
        let at = r.offset();
        let id = r.u8()?;
        let len = r.u32()? as usize;
        let mut s = r.sub(len)?;
        if id == section::CUSTOM {
            continue;
        }
        if id > section::DATA {
            return Err(DecodeError::malformed(at, format!("unknown section id {id}")));
        }
        if id <= last_id {
            return Err(DecodeError::malformed(
                at,
                format!("section {id} out of order or repeated"),
            ));
        }
        last_id = id;

        match id {
            section::TYPE => {
                for _ in 0..s.count()? {
                    let form_at = s.offset();
                    if s.u8()? != 0x60 {
                        return Err(DecodeError::malformed(form_at, "expected function type"));
                    }
                    let mut ft = FuncType::default();
                    for _ in 0..s.count()? {
                        ft.params.push(val_type(&mut s)?);
                    }
                    for _ in 0..s.count()? {
                        ft.results.push(val_type(&mut s)?);
                    }
                    if ft.results.len() > 1 {
                        return Err(DecodeError::Unsupported(format!(
                            "multi-value function type at byte {form_at}"
                        )));
                    }
                    module.types.push(ft);
                }
            }
            section::IMPORT => {
                return Err(DecodeError::Unsupported("import section".into()));
            }
            section::FUNCTION => {
                for _ in 0..s.count()? {
                    let ty_at = s.offset();
                    let ty = s.u32()?;
                    if ty as usize >= module.types.len() {
                        return Err(DecodeError::malformed(ty_at, format!("unknown type {ty}")));
                    }
                    function_types.push(ty);
                }
            }
            section::TABLE => {
                for _ in 0..s.count()? {
                    let t_at = s.offset();
                    let element_type = s.u8()?;
                    if element_type != 0x70 {
                        return Err(DecodeError::malformed(t_at, "table element type must be funcref"));
                    }
                    module.tables.push(TableDef {
                        element_type,
                        limits: limits(&mut s)?,
                    });
                }
                if module.tables.len() > 1 {
                    return Err(DecodeError::Unsupported("multiple tables".into()));
                }
            }
            section::MEMORY => {
                for _ in 0..s.count()? {
                    let m_at = s.offset();
                    let l = limits(&mut s)?;
                    if l.min > MAX_PAGES || l.max.is_some_and(|m| m > MAX_PAGES) {
                        return Err(DecodeError::malformed(m_at, "memory size exceeds 4 GiB"));
                    }
                    module.memories.push(l);
                }
                if module.memories.len() > 1 {
                    return Err(DecodeError::Unsupported("multiple memories".into()));
                }
            }
            section::GLOBAL => {
                for _ in 0..s.count()? {
                    let ty = val_type(&mut s)?;
                    let m_at = s.offset();
                    let mutable = match s.u8()? {
                        0 => false,
                        1 => true,
                        b => return Err(DecodeError::malformed(m_at, format!("invalid mutability 0x{b:02x}"))),
                    };
                    let init_at = s.offset();
                    let init = const_expr(&mut s)?;
                    let matches = matches!(
                        (ty, init),
                        (ValType::I32, ConstExpr::I32(_))
                            | (ValType::I64, ConstExpr::I64(_))
                            | (ValType::F32, ConstExpr::F32(_))
                            | (ValType::F64, ConstExpr::F64(_))
                    );
                    if !matches {
                        return Err(DecodeError::malformed(init_at, "global initializer type mismatch"));
                    }
                    module.globals.push(GlobalDef { ty, mutable, init });
                }
            }
            section::EXPORT => {
                for _ in 0..s.count()? {
                    let name_at = s.offset();
                    let name = s.name()?;
                    let kind_at = s.offset();
                    let kind = match s.u8()? {
                        0 => ExternKind::Func,
                        1 => ExternKind::Table,
                        2 => ExternKind::Memory,
                        3 => ExternKind::Global,
                        b => return Err(DecodeError::malformed(kind_at, format!("invalid export kind 0x{b:02x}"))),
                    };
                    let index = s.u32()?;
                    let bound = match kind {
                        ExternKind::Func => function_types.len(),
                        ExternKind::Table => module.tables.len(),
                        ExternKind::Memory => module.memories.len(),
                        ExternKind::Global => module.globals.len(),
                    };
                    if index as usize >= bound {
                        return Err(DecodeError::malformed(kind_at, format!("export `{name}` refers to missing index {index}")));
                    }
                    if module.exports.insert(name.clone(), Export { kind, index }).is_some() {
                        return Err(DecodeError::malformed(name_at, format!("duplicate export `{name}`")));
                    }
                }
            }
            section::START => {
                let f_at = s.offset();
                let f = s.u32()?;
                let Some(&ty) = function_types.get(f as usize) else {
                    return Err(DecodeError::malformed(f_at, format!("start refers to missing function {f}")));
                };
                let ft = &module.types[ty as usize];
                if !ft.params.is_empty() || !ft.results.is_empty() {
                    return Err(DecodeError::malformed(f_at, "start function must take and return nothing"));
                }
                module.start = Some(f);
            }
            section::ELEMENT => {
                for _ in 0..s.count()? {
                    let e_at = s.offset();
                    let table = s.u32()?;
                    if table != 0 {
                        return Err(DecodeError::Unsupported(format!("element segment flags {table} at byte {e_at}")));
                    }
                    if module.tables.is_empty() {
                        return Err(DecodeError::malformed(e_at, "element segment without a table"));
                    }
                    let offset = offset_expr(&mut s)?;
                    let mut functions = Vec::new();
                    for _ in 0..s.count()? {
                        let f_at = s.offset();
                        let f = s.u32()?;
                        if f as usize >= function_types.len() {
                            return Err(DecodeError::malformed(f_at, format!("element refers to missing function {f}")));
                        }
                        functions.push(f);
                    }
                    module.element_segments.push(ElementSegment { table, offset, functions });
                }
            }
            section::CODE => {
                saw_code = true;
                let n = s.count()?;
                if n as usize != function_types.len() {
                    return Err(DecodeError::malformed(at, "code and function section counts differ"));
                }
                let cx = BodyContext {
                    num_locals: 0,
                    num_globals: module.globals.len() as u32,
                    num_functions: function_types.len() as u32,
                    num_types: module.types.len() as u32,
                    has_memory: !module.memories.is_empty(),
                    has_table: !module.tables.is_empty(),
                };
                for &type_index in &function_types {
                    let size = s.u32()? as usize;
                    let mut b = s.sub(size)?;
                    let params = module.types[type_index as usize].params.len() as u32;
                    let (locals, body) = body(&mut b, &cx, params)?;
                    module.functions.push(Function { type_index, locals, body });
                }
            }
            section::DATA => {
                for _ in 0..s.count()? {
                    let d_at = s.offset();
                    let memory = s.u32()?;
                    if memory != 0 {
                        return Err(DecodeError::Unsupported(format!("data segment flags {memory} at byte {d_at}")));
                    }
                    if module.memories.is_empty() {
                        return Err(DecodeError::malformed(d_at, "data segment without a memory"));
                    }
                    let offset = offset_expr(&mut s)?;
                    let len = s.u32()? as usize;
                    let bytes = s.bytes(len)?.to_vec();
                    module.data_segments.push(DataSegment { memory, offset, bytes });
                }
            }
            _ => unreachable!(),
        }
        if !s.is_empty() {
            return Err(s.malformed(format!("section {id} has trailing bytes")));
        }
    }

    if !saw_code && !function_types.is_empty() {
        return Err(DecodeError::malformed(bytes.len(), "function section without code section"));
    }
    Ok(module)
}
