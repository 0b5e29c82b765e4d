//! Expression mini-language for vector fields and output maps.
//!
//! Grammar:
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := ["-"] atom ["^" integer]
//! atom   := number | ident | ident "(" expr {"," expr} ")" | "(" expr ")"
//! ```
//!
//! Identifiers `x1..xn` and `u1..um` are state and input variables; every
//! other identifier is a named parameter, resolved to its numeric value when
//! the enclosing model is loaded. Functions: `hill(r, a, b) = a*r/(1 + b*r)`,
//! `exp`, `sin`, `cos`, `min`, `max`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Hill,
    Exp,
    Sin,
    Cos,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "hill" => (Func::Hill, 3),
            "exp" => (Func::Exp, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    State(usize),
    Input(usize),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Parse against a model signature of `n` states and `m` inputs.
    pub fn parse(text: &str, n: usize, m: usize) -> Result<Expr> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            n,
            m,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            let t = &p.tokens[p.pos];
            return Err(Error::Parse {
                line: t.line,
                col: t.col,
                msg: format!("unexpected trailing token `{}`", t.text()),
            });
        }
        Ok(e)
    }

    /// Replace parameter references with their numeric values.
    pub fn bind(&self, params: &BTreeMap<String, f64>) -> Result<Expr> {
        Ok(match self {
            Expr::Param(name) => {
                let v = params
                    .get(name)
                    .ok_or_else(|| Error::UndeclaredVariable(name.clone()))?;
                Expr::Num(*v)
            }
            Expr::Num(_) | Expr::State(_) | Expr::Input(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.bind(params)?)),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.bind(params)?), Box::new(b.bind(params)?))
            }
            Expr::Pow(e, k) => Expr::Pow(Box::new(e.bind(params)?), *k),
            Expr::Call(f, args) => Expr::Call(
                *f,
                args.iter().map(|a| a.bind(params)).collect::<Result<_>>()?,
            ),
        })
    }

    /// Rewrite variable references through the given substitutions.
    pub fn substitute(
        &self,
        state_sub: &impl Fn(usize) -> Expr,
        input_sub: &impl Fn(usize) -> Expr,
    ) -> Expr {
        match self {
            Expr::State(i) => state_sub(*i),
            Expr::Input(j) => input_sub(*j),
            Expr::Num(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(state_sub, input_sub))),
            Expr::Bin(op, a, b) => Expr::Bin(
                *op,
                Box::new(a.substitute(state_sub, input_sub)),
                Box::new(b.substitute(state_sub, input_sub)),
            ),
            Expr::Pow(e, k) => Expr::Pow(Box::new(e.substitute(state_sub, input_sub)), *k),
            Expr::Call(f, args) => Expr::Call(
                *f,
                args.iter()
                    .map(|a| a.substitute(state_sub, input_sub))
                    .collect(),
            ),
        }
    }

    pub fn negated(&self) -> Expr {
        Expr::Neg(Box::new(self.clone()))
    }

    pub fn eval(&self, x: &[f64], u: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::State(i) => x[*i],
            Expr::Input(j) => u[*j],
            Expr::Param(name) => panic!("unbound parameter `{name}` during evaluation"),
            Expr::Neg(e) => -e.eval(x, u),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, u), b.eval(x, u));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Pow(e, k) => e.eval(x, u).powi(*k),
            Expr::Call(f, args) => match f {
                Func::Hill => {
                    let r = args[0].eval(x, u);
                    let a = args[1].eval(x, u);
                    let b = args[2].eval(x, u);
                    a * r / (1.0 + b * r)
                }
                Func::Exp => args[0].eval(x, u).exp(),
                Func::Sin => args[0].eval(x, u).sin(),
                Func::Cos => args[0].eval(x, u).cos(),
                Func::Min => args[0].eval(x, u).min(args[1].eval(x, u)),
                Func::Max => args[0].eval(x, u).max(args[1].eval(x, u)),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl Token {
    fn text(&self) -> String {
        match &self.tok {
            Tok::Num(v) => format!("{v}"),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Token {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {}
            '+' => push(Tok::Plus),
            '-' => push(Tok::Minus),
            '*' => push(Tok::Star),
            '/' => push(Tok::Slash),
            '^' => push(Tok::Caret),
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            ',' => push(Tok::Comma),
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| Error::Parse {
                    line: tline,
                    col: tcol,
                    msg: format!("invalid number literal `{s}`"),
                })?;
                col += i - start;
                out.push(Token {
                    tok: Tok::Num(v),
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(s),
                    line: tline,
                    col: tcol,
                });
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn eat(&mut self, want: &Tok) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(self.err(format!(
                "expected `{}`, found `{}`",
                Token {
                    tok: want.clone(),
                    line: 0,
                    col: 0
                }
                .text(),
                self.tokens[self.pos].text()
            ))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    e = Expr::Bin(BinOp::Add, Box::new(e), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    e = Expr::Bin(BinOp::Sub, Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    e = Expr::Bin(BinOp::Mul, Box::new(e), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    e = Expr::Bin(BinOp::Div, Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let negate = matches!(self.peek(), Some(Tok::Minus));
        if negate {
            self.pos += 1;
        }
        let mut e = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let sign = if matches!(self.peek(), Some(Tok::Minus)) {
                self.pos += 1;
                -1
            } else {
                1
            };
            match self.peek() {
                Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() < i32::MAX as f64 => {
                    let k = sign * (*v as i32);
                    self.pos += 1;
                    e = Expr::Pow(Box::new(e), k);
                }
                _ => return Err(self.err("exponent must be an integer literal")),
            }
        }
        Ok(if negate { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while matches!(self.peek(), Some(Tok::Comma)) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.eat(&Tok::RParen)?;
                    let Some((f, arity)) = Func::from_name(&name) else {
                        return Err(self.err(format!("unknown function `{name}`")));
                    };
                    if args.len() != arity {
                        return Err(self.err(format!(
                            "function `{name}` takes {arity} arguments, got {}",
                            args.len()
                        )));
                    }
                    return Ok(Expr::Call(f, args));
                }
                self.resolve_ident(&name)
            }
            Some(_) => Err(self.err(format!(
                "unexpected token `{}`",
                self.tokens[self.pos].text()
            ))),
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn resolve_ident(&self, name: &str) -> Result<Expr> {
        if let Some(idx) = variable_index(name, 'x') {
            return if idx >= 1 && idx <= self.n {
                Ok(Expr::State(idx - 1))
            } else {
                Err(Error::UndeclaredVariable(name.into()))
            };
        }
        if let Some(idx) = variable_index(name, 'u') {
            return if idx >= 1 && idx <= self.m {
                Ok(Expr::Input(idx - 1))
            } else {
                Err(Error::UndeclaredVariable(name.into()))
            };
        }
        Ok(Expr::Param(name.into()))
    }
}

/// `x12` -> Some(12) for prefix 'x'; anything else -> None.
fn variable_index(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}
