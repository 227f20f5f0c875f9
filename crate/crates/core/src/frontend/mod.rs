//! Kernel DSL: a small CUDA-like language with the inter-thread
//! communication intrinsics, parsed and lowered to a [`DataflowGraph`].
//!
//! See `docs/dsl.md` for the grammar.

pub mod ast;
pub mod interp;
mod lexer;
mod lower;
mod parser;
mod typing;

use std::fmt;

use thiserror::Error;

pub use ast::KernelAst;
pub use lower::lower;
pub use parser::{parse, parse_with};

use crate::graph::RangeError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("non-constant loop bound at {pos}: `{name}` is not a compile-time constant")]
    NonConstantLoopBound { pos: Pos, name: String },
    #[error("undeclared array `{name}` at {pos}")]
    UndeclaredArray { pos: Pos, name: String },
    #[error("undefined variable `{name}` at {pos}")]
    UndefinedVariable { pos: Pos, name: String },
    #[error("missing tagValue for communicated variable `{var}` (used at {pos})")]
    MissingTag { pos: Pos, var: String },
    #[error("variable `{var}` has multiple reaching definitions at tag point {pos}")]
    MultipleReachingDefinitions { pos: Pos, var: String },
    #[error("communication intrinsic inside a divergent branch at {pos}")]
    DivergentCommunication { pos: Pos },
    #[error("not a compile-time constant at {pos}: {what}")]
    NotCompileTime { pos: Pos, what: String },
    #[error("type error at {pos}: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("delta out of range at {pos}: {source}")]
    Range { pos: Pos, source: RangeError },
}

impl FrontendError {
    pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        FrontendError::Syntax { pos, msg: msg.into() }
    }
}
