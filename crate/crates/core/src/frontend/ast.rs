use super::Pos;
use crate::graph::ArrayDecl;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitOr,
    BitXor,
    And,
    Or,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Min,
    Max,
    Sqrt,
    Exp,
    Log,
    ToFloat,
    ToInt,
}

impl Builtin {
    pub fn from_name(name: &str) -> Option<(Builtin, usize)> {
        Some(match name {
            "min" => (Builtin::Min, 2),
            "max" => (Builtin::Max, 2),
            "sqrt" => (Builtin::Sqrt, 1),
            "exp" => (Builtin::Exp, 1),
            "log" => (Builtin::Log, 1),
            "float" => (Builtin::ToFloat, 1),
            "int" => (Builtin::ToInt, 1),
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Float(f64),
    Var(String, Pos),
    /// `threadIdx.{x,y,z}`.
    Tid(usize),
    Index {
        array: String,
        indices: Vec<Expr>,
        pos: Pos,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Builtin, Vec<Expr>),
    /// Template arguments are compile-time expressions, evaluated per
    /// unrolled loop iteration.
    FromThreadOrConst {
        var: String,
        delta: Vec<Expr>,
        constant: Box<Expr>,
        window: Option<Box<Expr>>,
        pos: Pos,
    },
    FromThreadOrMem {
        delta: Vec<Expr>,
        window: Option<Box<Expr>>,
        array: String,
        indices: Vec<Expr>,
        pred: Box<Expr>,
        pos: Pos,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Assign {
        var: String,
        value: Expr,
        pos: Pos,
    },
    Store {
        array: String,
        indices: Vec<Expr>,
        value: Expr,
        pos: Pos,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
        pos: Pos,
    },
    /// `for (var = start; var < end; var += step)` with folded bounds.
    For {
        var: String,
        start: i64,
        end: i64,
        step: i64,
        body: Vec<Stmt>,
        pos: Pos,
    },
    Tag {
        var: String,
        pos: Pos,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelAst {
    pub name: String,
    pub arrays: Vec<ArrayDecl>,
    pub body: Vec<Stmt>,
}

/// Counts of the constructs a kernel uses; handy for tests and reports.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AstSummary {
    pub loads: usize,
    pub stores: usize,
    pub from_thread_or_const: usize,
    pub from_thread_or_mem: usize,
    pub tags: usize,
    pub loops: usize,
    pub statements: usize,
}

impl KernelAst {
    pub fn summary(&self) -> AstSummary {
        let mut s = AstSummary::default();
        fn expr(e: &Expr, s: &mut AstSummary) {
            match e {
                Expr::Index { indices, .. } => {
                    s.loads += 1;
                    indices.iter().for_each(|i| expr(i, s));
                }
                Expr::Unary(_, a) => expr(a, s),
                Expr::Binary(_, a, b) => {
                    expr(a, s);
                    expr(b, s);
                }
                Expr::Ternary(a, b, c) => {
                    expr(a, s);
                    expr(b, s);
                    expr(c, s);
                }
                Expr::Call(_, args) => args.iter().for_each(|a| expr(a, s)),
                Expr::FromThreadOrConst { .. } => s.from_thread_or_const += 1,
                Expr::FromThreadOrMem { indices, pred, .. } => {
                    s.from_thread_or_mem += 1;
                    indices.iter().for_each(|i| expr(i, s));
                    expr(pred, s);
                }
                Expr::Int(_) | Expr::Float(_) | Expr::Var(..) | Expr::Tid(_) => {}
            }
        }
        fn stmts(body: &[Stmt], s: &mut AstSummary) {
            for st in body {
                s.statements += 1;
                match st {
                    Stmt::Assign { value, .. } => expr(value, s),
                    Stmt::Store { indices, value, .. } => {
                        s.stores += 1;
                        indices.iter().for_each(|i| expr(i, s));
                        expr(value, s);
                    }
                    Stmt::If { cond, then_body, else_body, .. } => {
                        expr(cond, s);
                        stmts(then_body, s);
                        stmts(else_body, s);
                    }
                    Stmt::For { body, .. } => {
                        s.loops += 1;
                        stmts(body, s);
                    }
                    Stmt::Tag { .. } => s.tags += 1,
                }
            }
        }
        stmts(&self.body, &mut s);
        s
    }
}
