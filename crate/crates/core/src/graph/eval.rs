//! Pure semantics of the compute node kinds, shared by the simulator, the
//! reference evaluator and constant folding.

use super::{ArithOp, CmpOp, ControlOp, FloatOp, NodeKind, SpecialOp};
use crate::scalar::{Scalar, ValueType};

pub fn arith(op: ArithOp, a: i64, b: i64) -> i64 {
    match op {
        ArithOp::Add => a.wrapping_add(b),
        ArithOp::Sub => a.wrapping_sub(b),
        ArithOp::Mul => a.wrapping_mul(b),
        // no traps inside kernels: division by zero yields 0
        ArithOp::Div => a.checked_div(b).unwrap_or(0),
        ArithOp::Rem => a.checked_rem(b).unwrap_or(0),
        ArithOp::Min => a.min(b),
        ArithOp::Max => a.max(b),
        ArithOp::Neg => a.wrapping_neg(),
    }
}

pub fn float(op: FloatOp, a: Scalar, b: Scalar) -> Scalar {
    let (x, y) = (a.as_float(), b.as_float());
    match op {
        FloatOp::Add => Scalar::Float(x + y),
        FloatOp::Sub => Scalar::Float(x - y),
        FloatOp::Mul => Scalar::Float(x * y),
        FloatOp::Div => Scalar::Float(x / y),
        FloatOp::Min => Scalar::Float(x.min(y)),
        FloatOp::Max => Scalar::Float(x.max(y)),
        FloatOp::Neg => Scalar::Float(-x),
        FloatOp::FromInt => Scalar::Float(a.as_int() as f64),
        FloatOp::ToInt => Scalar::Int(x as i64),
    }
}

pub fn compare(op: CmpOp, a: Scalar, b: Scalar) -> bool {
    match (a, b) {
        (Scalar::Int(x), Scalar::Int(y)) => match op {
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
        },
        _ => {
            let (x, y) = (a.as_float(), b.as_float());
            match op {
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
    }
}

/// Evaluates a compute kind whose operands are all present. Returns `None`
/// for kinds that are not pure functions of their operands (memory,
/// communication, `Merge`, `GateFalse`, sources).
pub fn evaluate(kind: &NodeKind, ty: ValueType, ops: &[Scalar]) -> Option<Scalar> {
    let arg = |i: usize| ops[i];
    let v = match kind {
        NodeKind::Arith(op) => {
            let b = if *op == ArithOp::Neg { 0 } else { arg(1).as_int() };
            Scalar::Int(arith(*op, arg(0).as_int(), b))
        }
        NodeKind::Float(op) => {
            let b = if ops.len() > 1 { arg(1) } else { Scalar::Float(0.0) };
            float(*op, arg(0), b)
        }
        NodeKind::Special(op) => {
            let x = arg(0).as_float();
            Scalar::Float(match op {
                SpecialOp::Sqrt => x.sqrt(),
                SpecialOp::Exp => x.exp(),
                SpecialOp::Log => x.ln(),
            })
        }
        NodeKind::Control(op) => match op {
            ControlOp::Select => {
                if arg(0).truthy() {
                    arg(1)
                } else {
                    arg(2)
                }
            }
            ControlOp::Cmp(c) => Scalar::from_bool(compare(*c, arg(0), arg(1))),
            ControlOp::And => Scalar::from_bool(arg(0).truthy() && arg(1).truthy()),
            ControlOp::Or => Scalar::from_bool(arg(0).truthy() || arg(1).truthy()),
            ControlOp::Not => Scalar::from_bool(!arg(0).truthy()),
            ControlOp::BitAnd => Scalar::Int(arg(0).as_int() & arg(1).as_int()),
            ControlOp::BitOr => Scalar::Int(arg(0).as_int() | arg(1).as_int()),
            ControlOp::BitXor => Scalar::Int(arg(0).as_int() ^ arg(1).as_int()),
            ControlOp::Shl => Scalar::Int(arg(0).as_int().wrapping_shl(arg(1).as_int() as u32)),
            ControlOp::Shr => Scalar::Int(arg(0).as_int().wrapping_shr(arg(1).as_int() as u32)),
            ControlOp::Merge | ControlOp::GateFalse => return None,
        },
        NodeKind::SplitJoin => arg(0),
        _ => return None,
    };
    Some(v.cast(ty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_division_by_zero_is_zero() {
        assert_eq!(arith(ArithOp::Div, 7, 0), 0);
        assert_eq!(arith(ArithOp::Rem, 7, 0), 0);
        assert_eq!(arith(ArithOp::Div, i64::MIN, -1), 0);
    }

    #[test]
    fn select_and_compare() {
        let k = NodeKind::Control(ControlOp::Select);
        let ops = [Scalar::Int(0), Scalar::Int(4), Scalar::Int(9)];
        assert_eq!(evaluate(&k, ValueType::Int, &ops), Some(Scalar::Int(9)));
        let c = NodeKind::Control(ControlOp::Cmp(CmpOp::Lt));
        assert_eq!(evaluate(&c, ValueType::Int, &[Scalar::Float(1.0), Scalar::Float(2.0)]), Some(Scalar::Int(1)));
    }
}
