//! Operator typing shared by constant folding, lowering and the AST
//! interpreter, so all three agree on every result bit.

use super::ast::{BinOp, Builtin, Expr, UnOp};
use super::{FrontendError, Pos};
use crate::graph::eval::evaluate;
use crate::graph::{ArithOp, CmpOp, ControlOp, FloatOp, NodeKind, SpecialOp};
use crate::scalar::{Scalar, ValueType};

#[derive(Debug, Clone, PartialEq)]
pub struct TypeError(pub String);

impl TypeError {
    pub fn at(self, pos: Pos) -> FrontendError {
        FrontendError::Type { pos, msg: self.0 }
    }
}

pub fn join(a: ValueType, b: ValueType) -> ValueType {
    if a == ValueType::Float || b == ValueType::Float {
        ValueType::Float
    } else {
        ValueType::Int
    }
}

pub fn binary_kind(op: BinOp, l: ValueType, r: ValueType) -> Result<(NodeKind, ValueType), TypeError> {
    let ty = join(l, r);
    let int_only = |name: &str| -> Result<(), TypeError> {
        if ty == ValueType::Float {
            Err(TypeError(format!("`{name}` needs integer operands")))
        } else {
            Ok(())
        }
    };
    let numeric = |a: ArithOp, f: FloatOp| match ty {
        ValueType::Int => (NodeKind::Arith(a), ValueType::Int),
        ValueType::Float => (NodeKind::Float(f), ValueType::Float),
    };
    let cmp = |c: CmpOp| (NodeKind::Control(ControlOp::Cmp(c)), ValueType::Int);
    let ctl = |c: ControlOp| (NodeKind::Control(c), ValueType::Int);
    Ok(match op {
        BinOp::Add => numeric(ArithOp::Add, FloatOp::Add),
        BinOp::Sub => numeric(ArithOp::Sub, FloatOp::Sub),
        BinOp::Mul => numeric(ArithOp::Mul, FloatOp::Mul),
        BinOp::Div => numeric(ArithOp::Div, FloatOp::Div),
        BinOp::Rem => {
            int_only("%")?;
            (NodeKind::Arith(ArithOp::Rem), ValueType::Int)
        }
        BinOp::Shl => {
            int_only("<<")?;
            ctl(ControlOp::Shl)
        }
        BinOp::Shr => {
            int_only(">>")?;
            ctl(ControlOp::Shr)
        }
        BinOp::BitAnd => {
            int_only("&")?;
            ctl(ControlOp::BitAnd)
        }
        BinOp::BitOr => {
            int_only("|")?;
            ctl(ControlOp::BitOr)
        }
        BinOp::BitXor => {
            int_only("^")?;
            ctl(ControlOp::BitXor)
        }
        BinOp::Lt => cmp(CmpOp::Lt),
        BinOp::Le => cmp(CmpOp::Le),
        BinOp::Gt => cmp(CmpOp::Gt),
        BinOp::Ge => cmp(CmpOp::Ge),
        BinOp::Eq => cmp(CmpOp::Eq),
        BinOp::Ne => cmp(CmpOp::Ne),
        BinOp::And => ctl(ControlOp::And),
        BinOp::Or => ctl(ControlOp::Or),
    })
}

pub fn unary_kind(op: UnOp, t: ValueType) -> (NodeKind, ValueType) {
    match (op, t) {
        (UnOp::Neg, ValueType::Int) => (NodeKind::Arith(ArithOp::Neg), ValueType::Int),
        (UnOp::Neg, ValueType::Float) => (NodeKind::Float(FloatOp::Neg), ValueType::Float),
        (UnOp::Not, _) => (NodeKind::Control(ControlOp::Not), ValueType::Int),
    }
}

/// `None` means the call is the identity on this operand type.
pub fn builtin_kind(b: Builtin, args: &[ValueType]) -> Option<(NodeKind, ValueType)> {
    match b {
        Builtin::Min | Builtin::Max => {
            let ty = join(args[0], args[1]);
            let kind = match (b, ty) {
                (Builtin::Min, ValueType::Int) => NodeKind::Arith(ArithOp::Min),
                (Builtin::Max, ValueType::Int) => NodeKind::Arith(ArithOp::Max),
                (Builtin::Min, ValueType::Float) => NodeKind::Float(FloatOp::Min),
                _ => NodeKind::Float(FloatOp::Max),
            };
            Some((kind, ty))
        }
        Builtin::Sqrt => Some((NodeKind::Special(SpecialOp::Sqrt), ValueType::Float)),
        Builtin::Exp => Some((NodeKind::Special(SpecialOp::Exp), ValueType::Float)),
        Builtin::Log => Some((NodeKind::Special(SpecialOp::Log), ValueType::Float)),
        Builtin::ToFloat => match args[0] {
            ValueType::Int => Some((NodeKind::Float(FloatOp::FromInt), ValueType::Float)),
            ValueType::Float => None,
        },
        Builtin::ToInt => match args[0] {
            ValueType::Float => Some((NodeKind::Float(FloatOp::ToInt), ValueType::Int)),
            ValueType::Int => None,
        },
    }
}

pub fn select_type(a: ValueType, b: ValueType) -> (NodeKind, ValueType) {
    (NodeKind::Control(ControlOp::Select), join(a, b))
}

pub fn apply(kind: &NodeKind, ty: ValueType, ops: &[Scalar]) -> Scalar {
    evaluate(kind, ty, ops).expect("pure kind")
}

pub fn apply_binary(op: BinOp, a: Scalar, b: Scalar) -> Result<Scalar, TypeError> {
    let (kind, ty) = binary_kind(op, a.ty(), b.ty())?;
    Ok(apply(&kind, ty, &[a, b]))
}

pub fn apply_unary(op: UnOp, a: Scalar) -> Scalar {
    let (kind, ty) = unary_kind(op, a.ty());
    apply(&kind, ty, &[a])
}

pub fn apply_builtin(b: Builtin, args: &[Scalar]) -> Scalar {
    let tys: Vec<ValueType> = args.iter().map(|a| a.ty()).collect();
    match builtin_kind(b, &tys) {
        Some((kind, ty)) => apply(&kind, ty, args),
        None => args[0],
    }
}

pub fn apply_select(c: Scalar, a: Scalar, b: Scalar) -> Scalar {
    let (kind, ty) = select_type(a.ty(), b.ty());
    apply(&kind, ty, &[c, a, b])
}

/// Folds an expression made only of literals and names known to `env`.
/// `Ok(None)` means the expression depends on run-time values.
pub fn const_eval(e: &Expr, env: &dyn Fn(&str) -> Option<Scalar>) -> Result<Option<Scalar>, TypeError> {
    Ok(match e {
        Expr::Int(v) => Some(Scalar::Int(*v)),
        Expr::Float(v) => Some(Scalar::Float(*v)),
        Expr::Var(name, _) => env(name),
        Expr::Unary(op, a) => const_eval(a, env)?.map(|a| apply_unary(*op, a)),
        Expr::Binary(op, a, b) => match (const_eval(a, env)?, const_eval(b, env)?) {
            (Some(a), Some(b)) => Some(apply_binary(*op, a, b)?),
            _ => None,
        },
        Expr::Ternary(c, a, b) => match (const_eval(c, env)?, const_eval(a, env)?, const_eval(b, env)?) {
            (Some(c), Some(a), Some(b)) => Some(apply_select(c, a, b)),
            _ => None,
        },
        Expr::Call(b, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match const_eval(a, env)? {
                    Some(v) => vals.push(v),
                    None => return Ok(None),
                }
            }
            Some(apply_builtin(*b, &vals))
        }
        Expr::Tid(_) | Expr::Index { .. } | Expr::FromThreadOrConst { .. } | Expr::FromThreadOrMem { .. } => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_arithmetic_promotes() {
        assert_eq!(apply_binary(BinOp::Add, Scalar::Int(1), Scalar::Float(0.5)).unwrap(), Scalar::Float(1.5));
        assert_eq!(apply_binary(BinOp::Div, Scalar::Int(7), Scalar::Int(2)).unwrap(), Scalar::Int(3));
        assert!(apply_binary(BinOp::Rem, Scalar::Float(1.0), Scalar::Int(2)).is_err());
    }

    #[test]
    fn folding() {
        let e = Expr::Binary(BinOp::Shl, Box::new(Expr::Int(2)), Box::new(Expr::Var("l".into(), Pos::default())));
        let env = |n: &str| (n == "l").then_some(Scalar::Int(3));
        assert_eq!(const_eval(&e, &env).unwrap(), Some(Scalar::Int(16)));
        assert_eq!(const_eval(&Expr::Tid(0), &env).unwrap(), None);
        assert_eq!(apply_builtin(Builtin::ToInt, &[Scalar::Float(2.7)]), Scalar::Int(2));
    }
}
