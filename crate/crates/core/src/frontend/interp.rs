//! Direct sequential interpreter: runs the kernel body once per thread, in
//! thread-id order. Used as an oracle for kernels without communication.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Expr, KernelAst, Stmt};
use super::typing;
use super::Pos;
use crate::graph::ThreadSpace;
use crate::scalar::Scalar;
use crate::ArrayData;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("communication intrinsic at {0} has no sequential meaning")]
    Intrinsic(Pos),
    #[error("index {index} out of range for `{array}` at {pos}")]
    OutOfRange { array: String, index: i64, pos: Pos },
    #[error("array `{0}` has no data")]
    MissingArray(String),
    #[error("undefined variable `{0}` at {1}")]
    Undefined(String, Pos),
    #[error("type error: {0}")]
    Type(String),
}

pub fn interpret(ast: &KernelAst, space: &ThreadSpace, data: &mut ArrayData) -> Result<(), InterpError> {
    for a in &ast.arrays {
        let buf = data.get_mut(&a.name).ok_or_else(|| InterpError::MissingArray(a.name.clone()))?;
        buf.resize(a.len(), a.ty.zero());
    }
    for tid in 0..space.block_size() {
        let coords = space.delinearize(tid).expect("tid in range");
        let mut t = Thread { ast, coords, env: HashMap::new(), data };
        t.block(&ast.body)?;
    }
    Ok(())
}

struct Thread<'a> {
    ast: &'a KernelAst,
    coords: Vec<usize>,
    env: HashMap<String, Scalar>,
    data: &'a mut ArrayData,
}

impl Thread<'_> {
    fn block(&mut self, body: &[Stmt]) -> Result<(), InterpError> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), InterpError> {
        match s {
            Stmt::Assign { var, value, .. } => {
                let v = self.expr(value)?;
                self.env.insert(var.clone(), v);
            }
            Stmt::Store { array, indices, value, pos } => {
                let v = self.expr(value)?;
                let at = self.index(array, indices, *pos)?;
                let ty = self.ast.arrays.iter().find(|a| &a.name == array).expect("declared").ty;
                self.data.get_mut(array).expect("checked")[at] = v.cast(ty);
            }
            Stmt::If { cond, then_body, else_body, .. } => {
                if self.expr(cond)?.truthy() {
                    self.block(then_body)?;
                } else {
                    self.block(else_body)?;
                }
            }
            Stmt::For { var, start, end, step, body, .. } => {
                let mut i = *start;
                while (*step > 0 && i < *end) || (*step < 0 && i > *end) {
                    self.env.insert(var.clone(), Scalar::Int(i));
                    self.block(body)?;
                    i += step;
                }
                self.env.remove(var);
            }
            Stmt::Tag { .. } => {}
        }
        Ok(())
    }

    fn index(&mut self, array: &str, indices: &[Expr], pos: Pos) -> Result<usize, InterpError> {
        let decl = self.ast.arrays.iter().find(|a| a.name == array).expect("parser checked");
        let dims = decl.dims.clone();
        let mut at: i64 = 0;
        for (k, e) in indices.iter().enumerate() {
            let i = self.expr(e)?.as_int();
            if i < 0 || i as usize >= dims[k] {
                return Err(InterpError::OutOfRange { array: array.to_string(), index: i, pos });
            }
            at = at * dims[k] as i64 + i;
        }
        Ok(at as usize)
    }

    fn expr(&mut self, e: &Expr) -> Result<Scalar, InterpError> {
        Ok(match e {
            Expr::Int(v) => Scalar::Int(*v),
            Expr::Float(v) => Scalar::Float(*v),
            Expr::Var(name, pos) => *self.env.get(name).ok_or_else(|| InterpError::Undefined(name.clone(), *pos))?,
            Expr::Tid(axis) => Scalar::Int(self.coords.get(*axis).copied().unwrap_or(0) as i64),
            Expr::Index { array, indices, pos } => {
                let at = self.index(array, indices, *pos)?;
                self.data.get(array).expect("checked")[at]
            }
            Expr::Unary(op, a) => typing::apply_unary(*op, self.expr(a)?),
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.expr(a)?, self.expr(b)?);
                typing::apply_binary(*op, a, b).map_err(|err| InterpError::Type(err.0))?
            }
            Expr::Ternary(c, a, b) => {
                let (c, a, b) = (self.expr(c)?, self.expr(a)?, self.expr(b)?);
                typing::apply_select(c, a, b)
            }
            Expr::Call(b, args) => {
                let vals = args.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                typing::apply_builtin(*b, &vals)
            }
            Expr::FromThreadOrConst { pos, .. } | Expr::FromThreadOrMem { pos, .. } => {
                return Err(InterpError::Intrinsic(*pos))
            }
        })
    }
}
