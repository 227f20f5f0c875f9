use std::collections::{BTreeMap, HashMap, HashSet};

use super::ast::{BinOp, Builtin, Expr, KernelAst, Stmt, UnOp};
use super::lexer::{tokenize, Tok, Token};
use super::typing;
use super::{FrontendError, Pos};
use crate::graph::ArrayDecl;
use crate::scalar::{Scalar, ValueType};

/// Upper bound on the trip count of a single loop; unrolling beyond this is
/// almost certainly a typo.
const MAX_TRIP: i64 = 1 << 20;

pub fn parse(src: &str) -> Result<KernelAst, FrontendError> {
    parse_with(src, &BTreeMap::new())
}

/// Parses with `const` values replaced by `overrides`. Every override must
/// name a `const` declared in the source.
pub fn parse_with(src: &str, overrides: &BTreeMap<String, i64>) -> Result<KernelAst, FrontendError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        at: 0,
        consts: HashMap::new(),
        overrides: overrides.clone(),
        arrays: Vec::new(),
        defined: HashSet::new(),
        loop_vars: Vec::new(),
    };
    let ast = p.program()?;
    if let Some(name) = p.overrides.keys().find(|k| !p.consts.contains_key(*k)) {
        return Err(FrontendError::syntax(Pos { line: 1, col: 1 }, format!("override for unknown const `{name}`")));
    }
    Ok(ast)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    consts: HashMap<String, Scalar>,
    overrides: BTreeMap<String, i64>,
    arrays: Vec<ArrayDecl>,
    defined: HashSet<String>,
    loop_vars: Vec<String>,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.at + k).min(self.tokens.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> PResult<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn unexpected(&self, wanted: &str) -> FrontendError {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Float(v) => format!("`{v}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        };
        FrontendError::syntax(self.pos(), format!("expected {wanted}, found {found}"))
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn program(&mut self) -> PResult<KernelAst> {
        let mut kernel = None;
        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            if self.is_ident("const") {
                self.bump();
                let (name, npos) = self.ident()?;
                self.check_fresh(&name, npos)?;
                self.expect("=")?;
                let e = self.expr()?;
                let mut v = self.fold(&e, npos)?;
                if let Some(&o) = self.overrides.get(&name) {
                    v = Scalar::Int(o);
                }
                self.expect(";")?;
                self.consts.insert(name, v);
            } else if self.is_ident("global") {
                self.bump();
                let ty = self.value_type()?;
                let (name, npos) = self.ident()?;
                self.check_fresh(&name, npos)?;
                let mut dims = Vec::new();
                while self.eat("[") {
                    let e = self.expr()?;
                    let ext = self.fold(&e, npos)?;
                    match ext {
                        Scalar::Int(n) if n > 0 => dims.push(n as usize),
                        _ => return Err(FrontendError::syntax(npos, format!("array `{name}` needs positive integer extents"))),
                    }
                    self.expect("]")?;
                }
                if dims.is_empty() {
                    return Err(FrontendError::syntax(npos, format!("array `{name}` needs at least one extent")));
                }
                self.expect(";")?;
                self.arrays.push(ArrayDecl { name, ty, dims });
            } else if self.is_ident("kernel") {
                self.bump();
                if kernel.is_some() {
                    return Err(FrontendError::syntax(pos, "only one kernel per file"));
                }
                let (name, _) = self.ident()?;
                self.expect("{")?;
                let mut body = Vec::new();
                while !self.is_punct("}") {
                    body.push(self.stmt()?);
                }
                self.expect("}")?;
                kernel = Some((name, body));
            } else {
                return Err(self.unexpected("`const`, `global` or `kernel`"));
            }
        }
        let (name, body) = kernel.ok_or_else(|| FrontendError::syntax(self.pos(), "no kernel defined"))?;
        Ok(KernelAst { name, arrays: std::mem::take(&mut self.arrays), body })
    }

    fn check_fresh(&self, name: &str, pos: Pos) -> PResult<()> {
        if self.consts.contains_key(name) || self.arrays.iter().any(|a| a.name == name) {
            return Err(FrontendError::syntax(pos, format!("`{name}` is already declared")));
        }
        Ok(())
    }

    fn value_type(&mut self) -> PResult<ValueType> {
        if self.is_ident("int") {
            self.bump();
            Ok(ValueType::Int)
        } else if self.is_ident("float") {
            self.bump();
            Ok(ValueType::Float)
        } else {
            Err(self.unexpected("`int` or `float`"))
        }
    }

    fn fold(&self, e: &Expr, pos: Pos) -> PResult<Scalar> {
        typing::const_eval(e, &|_| None)
            .map_err(|err| err.at(pos))?
            .ok_or_else(|| FrontendError::NotCompileTime { pos, what: "expression depends on run-time values".into() })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat("{") {
            let mut body = Vec::new();
            while !self.is_punct("}") {
                body.push(self.stmt()?);
            }
            self.expect("}")?;
            Ok(body)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        if self.is_ident("if") {
            self.bump();
            self.expect("(")?;
            let cond = self.expr()?;
            self.expect(")")?;
            let then_body = self.block()?;
            let else_body = if self.is_ident("else") {
                self.bump();
                self.block()?
            } else {
                Vec::new()
            };
            return Ok(Stmt::If { cond, then_body, else_body, pos });
        }
        if self.is_ident("for") {
            return self.for_stmt();
        }
        if self.is_ident("tagValue") {
            self.bump();
            self.expect("<")?;
            let (var, _) = self.ident()?;
            self.expect(">")?;
            self.expect("(")?;
            self.expect(")")?;
            self.expect(";")?;
            return Ok(Stmt::Tag { var, pos });
        }
        let decl = if self.is_ident("let") {
            self.bump();
            Some(None)
        } else if (self.is_ident("int") || self.is_ident("float")) && matches!(self.peek_at(1), Tok::Ident(_)) {
            Some(Some(self.value_type()?))
        } else {
            None
        };
        let (name, npos) = self.ident()?;
        if self.is_punct("[") {
            if decl.is_some() {
                return Err(FrontendError::syntax(npos, "cannot declare an array element"));
            }
            let indices = self.indices(&name, npos)?;
            let value = self.assign_rhs(Expr::Index { array: name.clone(), indices: indices.clone(), pos: npos })?;
            return Ok(Stmt::Store { array: name, indices, value, pos });
        }
        if self.consts.contains_key(&name) || self.loop_vars.contains(&name) {
            return Err(FrontendError::syntax(npos, format!("cannot assign to `{name}`")));
        }
        if self.arrays.iter().any(|a| a.name == name) {
            return Err(FrontendError::syntax(npos, format!("array `{name}` needs an index")));
        }
        let value = match decl {
            Some(ty) => {
                self.expect("=")?;
                let e = self.expr()?;
                self.expect(";")?;
                match ty {
                    Some(ValueType::Int) => Expr::Call(Builtin::ToInt, vec![e]),
                    Some(ValueType::Float) => Expr::Call(Builtin::ToFloat, vec![e]),
                    None => e,
                }
            }
            None => {
                if !self.is_punct("=") && !self.defined.contains(&name) {
                    return Err(FrontendError::UndefinedVariable { pos: npos, name });
                }
                self.assign_rhs(Expr::Var(name.clone(), npos))?
            }
        };
        self.defined.insert(name.clone());
        Ok(Stmt::Assign { var: name, value, pos })
    }

    /// Parses `= e;`, `op= e;`, `++;` or `--;` and returns the value to store.
    fn assign_rhs(&mut self, current: Expr) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Punct("=") => None,
            Tok::Punct("+=") | Tok::Punct("++") => Some(BinOp::Add),
            Tok::Punct("-=") | Tok::Punct("--") => Some(BinOp::Sub),
            Tok::Punct("*=") => Some(BinOp::Mul),
            Tok::Punct("/=") => Some(BinOp::Div),
            _ => return Err(self.unexpected("assignment")),
        };
        let incdec = self.is_punct("++") || self.is_punct("--");
        self.bump();
        let rhs = if incdec { Expr::Int(1) } else { self.expr()? };
        self.expect(";")?;
        Ok(match op {
            None => rhs,
            Some(op) => Expr::Binary(op, Box::new(current), Box::new(rhs)),
        })
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        self.bump();
        self.expect("(")?;
        if self.is_ident("int") {
            self.bump();
        }
        let (var, vpos) = self.ident()?;
        if self.consts.contains_key(&var) || self.loop_vars.contains(&var) {
            return Err(FrontendError::syntax(vpos, format!("cannot use `{var}` as a loop variable")));
        }
        self.expect("=")?;
        let start = self.loop_bound()?;
        self.expect(";")?;
        let (cvar, cpos) = self.ident()?;
        if cvar != var {
            return Err(FrontendError::syntax(cpos, format!("loop condition must test `{var}`")));
        }
        let cmp = match self.peek() {
            Tok::Punct(p @ ("<" | "<=" | ">" | ">=" | "!=")) => *p,
            _ => return Err(self.unexpected("comparison")),
        };
        self.bump();
        let bound = self.loop_bound()?;
        self.expect(";")?;
        let step = if self.eat("++") {
            self.expect_ident(&var)?;
            1
        } else if self.eat("--") {
            self.expect_ident(&var)?;
            -1
        } else {
            self.expect_ident(&var)?;
            if self.eat("++") {
                1
            } else if self.eat("--") {
                -1
            } else if self.eat("+=") {
                self.loop_bound()?
            } else if self.eat("-=") {
                -self.loop_bound()?
            } else {
                return Err(self.unexpected("loop increment"));
            }
        };
        self.expect(")")?;
        if step == 0 {
            return Err(FrontendError::syntax(pos, "loop step is zero"));
        }
        let end = match cmp {
            "<" | "!=" if step > 0 => bound,
            "<=" if step > 0 => bound + 1,
            ">" | "!=" if step < 0 => bound,
            ">=" if step < 0 => bound - 1,
            _ => return Err(FrontendError::syntax(pos, "loop does not terminate")),
        };
        if cmp == "!=" && (end - start) % step != 0 {
            return Err(FrontendError::syntax(pos, "loop does not terminate"));
        }
        let trips = if step > 0 { (end - start).max(0) / step } else { (start - end).max(0) / -step };
        if trips > MAX_TRIP {
            return Err(FrontendError::syntax(pos, format!("loop unrolls to {trips} iterations")));
        }
        self.loop_vars.push(var.clone());
        let body = self.block();
        self.loop_vars.pop();
        Ok(Stmt::For { var, start, end, step, body: body?, pos })
    }

    fn expect_ident(&mut self, name: &str) -> PResult<()> {
        if self.is_ident(name) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{name}`")))
        }
    }

    /// A loop bound must fold using literals and `const` declarations only.
    fn loop_bound(&mut self) -> PResult<i64> {
        let pos = self.pos();
        let e = self.expr()?;
        if let Some(name) = first_runtime_name(&e) {
            return Err(FrontendError::NonConstantLoopBound { pos, name });
        }
        match self.fold(&e, pos)? {
            Scalar::Int(v) => Ok(v),
            Scalar::Float(_) => Err(FrontendError::Type { pos, msg: "loop bounds must be integers".into() }),
        }
    }

    fn indices(&mut self, array: &str, pos: Pos) -> PResult<Vec<Expr>> {
        let dims = match self.arrays.iter().find(|a| a.name == array) {
            Some(a) => a.dims.len(),
            None => return Err(FrontendError::UndeclaredArray { pos, name: array.to_string() }),
        };
        let mut out = Vec::new();
        while self.eat("[") {
            out.push(self.expr()?);
            self.expect("]")?;
        }
        if out.len() != dims {
            return Err(FrontendError::syntax(pos, format!("`{array}` takes {dims} indices, got {}", out.len())));
        }
        Ok(out)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat("?") {
            let a = self.expr()?;
            self.expect(":")?;
            let b = self.expr()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    /// Precedence climbing over the binary operator table.
    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("|", BinOp::BitOr)],
            &[("^", BinOp::BitXor)],
            &[("&", BinOp::BitAnd)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[("<", BinOp::Lt), ("<=", BinOp::Le), (">", BinOp::Gt), (">=", BinOp::Ge)],
            &[("<<", BinOp::Shl), (">>", BinOp::Shr)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) => LEVELS[level].iter().find(|(s, _)| s == p).map(|(_, op)| *op),
                _ => None,
            };
            let Some(op) = op else { break };
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    /// Template arguments stop short of the relational operators so that the
    /// closing `>` is not taken as a comparison.
    fn template_arg(&mut self) -> PResult<Expr> {
        self.binary(7)
    }

    fn delta(&mut self) -> PResult<Vec<Expr>> {
        if self.eat("{") {
            let mut parts = vec![self.template_arg()?];
            while self.eat(",") {
                parts.push(self.template_arg()?);
            }
            self.expect("}")?;
            Ok(parts)
        } else {
            Ok(vec![self.template_arg()?])
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Int(v) => Expr::Int(v.wrapping_neg()),
                Expr::Float(v) => Expr::Float(-v),
                e => Expr::Unary(UnOp::Neg, Box::new(e)),
            });
        }
        if self.eat("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.eat("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr::Float(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.ident_expr(name, pos)
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn ident_expr(&mut self, name: String, pos: Pos) -> PResult<Expr> {
        match name.as_str() {
            "threadIdx" => {
                self.expect(".")?;
                let (axis, apos) = self.ident()?;
                return match axis.as_str() {
                    "x" => Ok(Expr::Tid(0)),
                    "y" => Ok(Expr::Tid(1)),
                    "z" => Ok(Expr::Tid(2)),
                    _ => Err(FrontendError::syntax(apos, format!("unknown thread index `{axis}`"))),
                };
            }
            "fromThreadOrConst" => {
                self.expect("<")?;
                let (var, _) = self.ident()?;
                self.expect(",")?;
                let delta = self.delta()?;
                self.expect(",")?;
                let constant = self.template_arg()?;
                let window = if self.eat(",") { Some(Box::new(self.template_arg()?)) } else { None };
                self.expect(">")?;
                self.expect("(")?;
                self.expect(")")?;
                return Ok(Expr::FromThreadOrConst { var, delta, constant: Box::new(constant), window, pos });
            }
            "fromThreadOrMem" => {
                self.expect("<")?;
                let delta = self.delta()?;
                let window = if self.eat(",") { Some(Box::new(self.template_arg()?)) } else { None };
                self.expect(">")?;
                self.expect("(")?;
                let (array, apos) = self.ident()?;
                let indices = self.indices(&array, apos)?;
                self.expect(",")?;
                let pred = self.expr()?;
                self.expect(")")?;
                return Ok(Expr::FromThreadOrMem { delta, window, array, indices, pred: Box::new(pred), pos });
            }
            _ => {}
        }
        if let Some((builtin, arity)) = Builtin::from_name(&name) {
            if self.is_punct("(") {
                self.bump();
                let mut args = Vec::new();
                if !self.is_punct(")") {
                    args.push(self.expr()?);
                    while self.eat(",") {
                        args.push(self.expr()?);
                    }
                }
                self.expect(")")?;
                if args.len() != arity {
                    return Err(FrontendError::syntax(pos, format!("`{name}` takes {arity} argument(s)")));
                }
                return Ok(Expr::Call(builtin, args));
            }
        }
        if self.is_punct("[") {
            let indices = self.indices(&name, pos)?;
            return Ok(Expr::Index { array: name, indices, pos });
        }
        if let Some(v) = self.consts.get(&name) {
            return Ok(match v {
                Scalar::Int(v) => Expr::Int(*v),
                Scalar::Float(v) => Expr::Float(*v),
            });
        }
        if self.arrays.iter().any(|a| a.name == name) {
            return Err(FrontendError::syntax(pos, format!("array `{name}` needs an index")));
        }
        if self.loop_vars.contains(&name) || self.defined.contains(&name) {
            return Ok(Expr::Var(name, pos));
        }
        Err(FrontendError::UndefinedVariable { pos, name })
    }
}

fn first_runtime_name(e: &Expr) -> Option<String> {
    match e {
        Expr::Int(_) | Expr::Float(_) => None,
        Expr::Var(name, _) => Some(name.clone()),
        Expr::Tid(axis) => Some(format!("threadIdx.{}", ["x", "y", "z"][*axis])),
        Expr::Index { array, .. } => Some(array.clone()),
        Expr::Unary(_, a) => first_runtime_name(a),
        Expr::Binary(_, a, b) => first_runtime_name(a).or_else(|| first_runtime_name(b)),
        Expr::Ternary(a, b, c) => first_runtime_name(a).or_else(|| first_runtime_name(b)).or_else(|| first_runtime_name(c)),
        Expr::Call(_, args) => args.iter().find_map(first_runtime_name),
        Expr::FromThreadOrConst { .. } => Some("fromThreadOrConst".into()),
        Expr::FromThreadOrMem { .. } => Some("fromThreadOrMem".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PREFIX: &str = "
        const N = 64;
        global int in[N];
        global int out[N];
        kernel prefix_sum {
            sum = in[threadIdx.x] + fromThreadOrConst<sum, -1, 0>();
            tagValue<sum>();
            out[threadIdx.x] = sum;
        }";

    #[test]
    fn prefix_sum_shape() {
        let ast = parse(PREFIX).unwrap();
        let s = ast.summary();
        assert_eq!((s.loads, s.stores, s.from_thread_or_const, s.tags), (1, 1, 1, 1));
        assert_eq!(ast.arrays[0].dims, vec![64]);
        match &ast.body[0] {
            Stmt::Assign { value: Expr::Binary(BinOp::Add, _, rhs), .. } => match rhs.as_ref() {
                Expr::FromThreadOrConst { var, delta, constant, window, .. } => {
                    assert_eq!(var, "sum");
                    assert_eq!(delta, &vec![Expr::Int(-1)]);
                    assert_eq!(constant.as_ref(), &Expr::Int(0));
                    assert!(window.is_none());
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_kernel() {
        let ast = parse("kernel k { }").unwrap();
        assert_eq!(ast.summary().statements, 0);
    }

    #[test]
    fn runtime_loop_bound_is_rejected() {
        let err = parse("global int a[4]; kernel k { n = a[0]; for (i = 0; i < n; i++) { a[i] = 0; } }").unwrap_err();
        assert!(matches!(err, FrontendError::NonConstantLoopBound { ref name, .. } if name == "n"));
        assert!(err.to_string().starts_with("non-constant loop bound"));
    }

    #[test]
    fn undeclared_array_and_syntax_errors_differ() {
        let err = parse("kernel k { b[0] = 1; }").unwrap_err();
        assert!(matches!(err, FrontendError::UndeclaredArray { .. }));
        let err = parse("kernel k { x = ; }").unwrap_err();
        match err {
            FrontendError::Syntax { pos, .. } => assert_eq!(pos, Pos { line: 1, col: 16 }),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loops_fold_with_consts() {
        let ast = parse("const K = 3; global int a[8]; kernel k { for (int i = K - 1; i >= 0; i--) a[i] = i; }").unwrap();
        match &ast.body[0] {
            Stmt::For { start, end, step, body, .. } => {
                assert_eq!((*start, *end, *step), (2, -1, -1));
                assert_eq!(body.len(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn template_args_with_shifts_and_vectors() {
        let src = "global float A[4][4]; kernel k {
            for (l = 0; l < 2; l++) { v = 1; tagValue<v>(); v = v + fromThreadOrConst<v, 1 << l, 0, 2 << l>(); }
            x = fromThreadOrMem<{-1, 0}, 4>(A[threadIdx.y][0], threadIdx.x == 0);
        }";
        let ast = parse(src).unwrap();
        let s = ast.summary();
        assert_eq!((s.from_thread_or_const, s.from_thread_or_mem, s.loops), (1, 1, 1));
        match &ast.body[1] {
            Stmt::Assign { value: Expr::FromThreadOrMem { delta, window, .. }, .. } => {
                assert_eq!(delta, &vec![Expr::Int(-1), Expr::Int(0)]);
                assert_eq!(window.as_deref(), Some(&Expr::Int(4)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compound_store_reads_the_element() {
        let ast = parse("global int a[2]; kernel k { a[1] += 3; }").unwrap();
        assert_eq!(ast.summary().loads, 1);
        assert_eq!(ast.summary().stores, 1);
    }

    #[test]
    fn undefined_variable() {
        assert!(matches!(parse("kernel k { x = y; }").unwrap_err(), FrontendError::UndefinedVariable { .. }));
        assert!(matches!(parse("kernel k { x += 1; }").unwrap_err(), FrontendError::UndefinedVariable { .. }));
    }

    #[test]
    fn const_overrides() {
        let o = BTreeMap::from([("N".to_string(), 8)]);
        let ast = parse_with(PREFIX, &o).unwrap();
        assert_eq!(ast.arrays[0].dims, vec![8]);
        let bad = BTreeMap::from([("M".to_string(), 8)]);
        assert!(parse_with(PREFIX, &bad).unwrap_err().to_string().contains("unknown const `M`"));
    }
}
