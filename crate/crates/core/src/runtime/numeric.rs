//! Integer arithmetic on raw payloads.
//!
//! Signed operations reinterpret the two's-complement payload; add, sub and
//! mul wrap; comparisons produce `i32` 0 or 1.

use crate::decoder::NumOp;
use crate::taint::TaintLabel;

use super::{Trap, Value};

#[inline]
fn b(v: bool) -> u64 {
    v as u64
}

#[inline]
fn w32(v: u32) -> u64 {
    u64::from(v)
}

/// Single-operand ops. Never trap.
#[inline]
pub(crate) fn unary(op: NumOp, a: u64) -> u64 {
    use NumOp::*;
    let a32 = a as u32;
    match op {
        I32Eqz => b(a32 == 0),
        I32Clz => w32(a32.leading_zeros()),
        I32Ctz => w32(a32.trailing_zeros()),
        I32Popcnt => w32(a32.count_ones()),
        I64Eqz => b(a == 0),
        I64Clz => u64::from(a.leading_zeros()),
        I64Ctz => u64::from(a.trailing_zeros()),
        I64Popcnt => u64::from(a.count_ones()),
        I32WrapI64 => w32(a as u32),
        I64ExtendI32S => a32 as i32 as i64 as u64,
        I64ExtendI32U => w32(a32),
        _ => unreachable!("{} is not unary", op.name()),
    }
}

/// Two-operand ops; `a` is the deeper operand.
#[inline]
pub(crate) fn binary(op: NumOp, a: u64, bv: u64) -> Result<u64, Trap> {
    use NumOp::*;
    let (x, y) = (a as u32, bv as u32);
    let (sx, sy) = (x as i32, y as i32);
    let (sa, sb) = (a as i64, bv as i64);
    Ok(match op {
        I32Eq => b(x == y),
        I32Ne => b(x != y),
        I32LtS => b(sx < sy),
        I32LtU => b(x < y),
        I32GtS => b(sx > sy),
        I32GtU => b(x > y),
        I32LeS => b(sx <= sy),
        I32LeU => b(x <= y),
        I32GeS => b(sx >= sy),
        I32GeU => b(x >= y),
        I64Eq => b(a == bv),
        I64Ne => b(a != bv),
        I64LtS => b(sa < sb),
        I64LtU => b(a < bv),
        I64GtS => b(sa > sb),
        I64GtU => b(a > bv),
        I64LeS => b(sa <= sb),
        I64LeU => b(a <= bv),
        I64GeS => b(sa >= sb),
        I64GeU => b(a >= bv),

        I32Add => w32(x.wrapping_add(y)),
        I32Sub => w32(x.wrapping_sub(y)),
        I32Mul => w32(x.wrapping_mul(y)),
        I32DivS => {
            if y == 0 {
                return Err(Trap::DivisionByZero);
            }
            if sx == i32::MIN && sy == -1 {
                return Err(Trap::IntegerOverflow);
            }
            w32((sx / sy) as u32)
        }
        I32DivU => w32(x.checked_div(y).ok_or(Trap::DivisionByZero)?),
        I32RemS => {
            if y == 0 {
                return Err(Trap::DivisionByZero);
            }
            w32(sx.wrapping_rem(sy) as u32)
        }
        I32RemU => w32(x.checked_rem(y).ok_or(Trap::DivisionByZero)?),
        I32And => w32(x & y),
        I32Or => w32(x | y),
        I32Xor => w32(x ^ y),
        I32Shl => w32(x.wrapping_shl(y)),
        I32ShrS => w32(sx.wrapping_shr(y) as u32),
        I32ShrU => w32(x.wrapping_shr(y)),
        I32Rotl => w32(x.rotate_left(y % 32)),
        I32Rotr => w32(x.rotate_right(y % 32)),

        I64Add => a.wrapping_add(bv),
        I64Sub => a.wrapping_sub(bv),
        I64Mul => a.wrapping_mul(bv),
        I64DivS => {
            if bv == 0 {
                return Err(Trap::DivisionByZero);
            }
            if sa == i64::MIN && sb == -1 {
                return Err(Trap::IntegerOverflow);
            }
            (sa / sb) as u64
        }
        I64DivU => a.checked_div(bv).ok_or(Trap::DivisionByZero)?,
        I64RemS => {
            if bv == 0 {
                return Err(Trap::DivisionByZero);
            }
            sa.wrapping_rem(sb) as u64
        }
        I64RemU => a.checked_rem(bv).ok_or(Trap::DivisionByZero)?,
        I64And => a & bv,
        I64Or => a | bv,
        I64Xor => a ^ bv,
        I64Shl => a.wrapping_shl(bv as u32),
        I64ShrS => sa.wrapping_shr(bv as u32) as u64,
        I64ShrU => a.wrapping_shr(bv as u32),
        I64Rotl => a.rotate_left((bv % 64) as u32),
        I64Rotr => a.rotate_right((bv % 64) as u32),
        _ => unreachable!("{} is not binary", op.name()),
    })
}

/// Applies `op` to explicit operands (deepest first). The result label is the
/// merge of the operand labels; the caller adds control context.
pub fn exec_numeric(op: NumOp, operands: &[Value]) -> Result<Value, Trap> {
    let (ty, arity) = op.operands();
    if operands.len() < arity {
        return Err(Trap::StackUnderflow);
    }
    if operands.len() > arity {
        return Err(Trap::ArityMismatch {
            expected: arity,
            found: operands.len(),
        });
    }
    for v in operands {
        if v.ty() != ty {
            return Err(Trap::TypeMismatch {
                expected: ty,
                found: v.ty(),
            });
        }
    }
    let taint = operands
        .iter()
        .fold(TaintLabel::EMPTY, |acc, v| acc.merge(v.taint()));
    let bits = if arity == 1 {
        unary(op, operands[0].bits())
    } else {
        binary(op, operands[0].bits(), operands[1].bits())?
    };
    Ok(Value::from_bits(op.result_type(), bits, taint))
}
