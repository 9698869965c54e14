use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decoder::ValType;
use crate::taint::{SourceId, TaintLabel};

/// A typed scalar and its taint label.
///
/// `i32` payloads live in the low 32 bits; the upper 32 bits are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Value {
    ty: ValType,
    bits: u64,
    taint: TaintLabel,
}

impl Value {
    pub fn i32(v: i32) -> Self {
        Value {
            ty: ValType::I32,
            bits: u64::from(v as u32),
            taint: TaintLabel::EMPTY,
        }
    }

    pub fn i64(v: i64) -> Self {
        Value {
            ty: ValType::I64,
            bits: v as u64,
            taint: TaintLabel::EMPTY,
        }
    }

    /// Builds a value from a raw payload, normalizing `i32`/`f32` to 32 bits.
    pub fn from_bits(ty: ValType, bits: u64, taint: TaintLabel) -> Self {
        let bits = match ty {
            ValType::I32 | ValType::F32 => bits & 0xFFFF_FFFF,
            ValType::I64 | ValType::F64 => bits,
        };
        Value { ty, bits, taint }
    }

    pub fn zero(ty: ValType) -> Self {
        Value {
            ty,
            bits: 0,
            taint: TaintLabel::EMPTY,
        }
    }

    pub fn ty(&self) -> ValType {
        self.ty
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn taint(&self) -> TaintLabel {
        self.taint
    }

    pub fn as_i32(&self) -> i32 {
        self.bits as u32 as i32
    }

    pub fn as_u32(&self) -> u32 {
        self.bits as u32
    }

    pub fn as_i64(&self) -> i64 {
        self.bits as i64
    }

    pub fn with_taint(mut self, taint: TaintLabel) -> Self {
        self.taint = taint;
        self
    }

    /// Marks this value as a taint source.
    pub fn tainted_by(self, id: SourceId) -> Self {
        self.with_taint(self.taint.merge(TaintLabel::source(id)))
    }

    /// Signed decimal rendering of the payload.
    pub fn display_value(&self) -> String {
        match self.ty {
            ValType::I32 => self.as_i32().to_string(),
            ValType::I64 => self.as_i64().to_string(),
            ValType::F32 => f32::from_bits(self.bits as u32).to_string(),
            ValType::F64 => f64::from_bits(self.bits).to_string(),
        }
    }
}

/// `i32:120`
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ty, self.display_value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid literal `{0}`: expected i32:<int> or i64:<int>")]
pub struct LiteralError(pub String);

fn parse_int(s: &str) -> Option<i128> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v = match digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        Some(hex) => i128::from_str_radix(hex, 16).ok()?,
        None => digits.parse::<i128>().ok()?,
    };
    Some(if neg { -v } else { v })
}

/// Parses typed literals such as `i32:5`, `i64:-3` or `i32:0xff`.
///
/// Unsigned spellings up to the type's width are accepted and reinterpreted,
/// so `i32:4294967295` is `-1`.
impl FromStr for Value {
    type Err = LiteralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LiteralError(s.to_string());
        let (ty, raw) = s.trim().split_once(':').ok_or_else(err)?;
        let v = parse_int(raw.trim()).ok_or_else(err)?;
        match ty {
            "i32" if (i128::from(i32::MIN)..=i128::from(u32::MAX)).contains(&v) => Ok(Value::i32(v as i64 as i32)),
            "i64" if (i128::from(i64::MIN)..=i128::from(u64::MAX)).contains(&v) => Ok(Value::i64(v as i64)),
            _ => Err(err()),
        }
    }
}
