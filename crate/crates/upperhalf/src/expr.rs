//! A small scalar expression language over coordinates x1..xn.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' integer)?
//! base   := number | 'x' digits | fn '(' expr ')' | '(' expr ')'
//! fn     := exp | log | sin | cos | sqrt
//! ```
//!
//! `^` takes an integer literal exponent (optionally signed) and binds
//! tighter than unary minus, so `-x1^2` is `-(x1^2)`. Implicit
//! multiplication is a syntax error. Numbers are decimal literals with an
//! optional exponent part.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use crate::error::{Error, ParseError};
use crate::geometry::Point;
use crate::jet::{powi_value, Jet2};

const MAX_DEPTH: usize = 64;
const MAX_NODES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. `Coord` holds the 1-based index as written in source.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Coord(usize),
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unary {
        f: UnaryFn,
        arg: Box<Expr>,
    },
    IntPow {
        base: Box<Expr>,
        exp: i32,
    },
    Neg(Box<Expr>),
}

impl Expr {
    /// Largest coordinate index referenced (1-based), 0 for constant trees.
    pub fn max_coord(&self) -> usize {
        match self {
            Expr::Constant(_) => 0,
            Expr::Coord(k) => *k,
            Expr::Binary { lhs, rhs, .. } => lhs.max_coord().max(rhs.max_coord()),
            Expr::Unary { arg, .. } => arg.max_coord(),
            Expr::IntPow { base, .. } => base.max_coord(),
            Expr::Neg(inner) => inner.max_coord(),
        }
    }

    fn check_point(&self, p: &Point) -> Result<(), Error> {
        let need = self.max_coord();
        if need > p.dim() {
            return Err(Error::DimensionMismatch {
                expected: need,
                found: p.dim(),
            });
        }
        Ok(())
    }

    /// Plain evaluation. Division by zero, log/sqrt outside their domains,
    /// and non-finite results are reported as errors.
    pub fn eval_scalar(&self, p: &Point) -> Result<f64, Error> {
        self.check_point(p)?;
        let v = self.eval_value(p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "expression evaluation",
            });
        }
        Ok(v)
    }

    fn eval_value(&self, p: &Point) -> Result<f64, Error> {
        Ok(match self {
            Expr::Constant(c) => *c,
            Expr::Coord(k) => p.coord(k - 1),
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_value(p)?;
                let b = rhs.eval_value(p)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(Error::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Unary { f, arg } => {
                let v = arg.eval_value(p)?;
                match f {
                    UnaryFn::Exp => libm::exp(v),
                    UnaryFn::Log => {
                        if v <= 0.0 {
                            return Err(Error::OutOfDomain {
                                function: "log",
                                value: v,
                            });
                        }
                        libm::log(v)
                    }
                    UnaryFn::Sin => libm::sin(v),
                    UnaryFn::Cos => libm::cos(v),
                    UnaryFn::Sqrt => {
                        if v <= 0.0 {
                            return Err(Error::OutOfDomain {
                                function: "sqrt",
                                value: v,
                            });
                        }
                        libm::sqrt(v)
                    }
                }
            }
            Expr::IntPow { base, exp } => powi_value(base.eval_value(p)?, *exp)?,
            Expr::Neg(inner) => -inner.eval_value(p)?,
        })
    }

    /// Jet evaluation through the same arithmetic path as `eval_scalar`, so
    /// the value slot is bit-identical to the scalar result.
    pub fn eval_jet(&self, p: &Point) -> Result<Jet2, Error> {
        self.check_point(p)?;
        let j = self.eval_jet_inner(p)?;
        if !j.value().is_finite() {
            return Err(Error::NonFinite {
                context: "expression evaluation",
            });
        }
        Ok(j)
    }

    fn eval_jet_inner(&self, p: &Point) -> Result<Jet2, Error> {
        let n = p.dim();
        Ok(match self {
            Expr::Constant(c) => Jet2::constant(n, *c),
            Expr::Coord(k) => Jet2::coordinate(p, k - 1),
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_jet_inner(p)?;
                let b = rhs.eval_jet_inner(p)?;
                match op {
                    BinaryOp::Add => a.add(&b),
                    BinaryOp::Sub => a.sub(&b),
                    BinaryOp::Mul => a.mul(&b),
                    BinaryOp::Div => a.div(&b)?,
                }
            }
            Expr::Unary { f, arg } => {
                let a = arg.eval_jet_inner(p)?;
                match f {
                    UnaryFn::Exp => a.exp(),
                    UnaryFn::Log => a.ln()?,
                    UnaryFn::Sin => a.sin(),
                    UnaryFn::Cos => a.cos(),
                    UnaryFn::Sqrt => a.sqrt()?,
                }
            }
            Expr::IntPow { base, exp } => base.eval_jet_inner(p)?.powi(*exp)?,
            Expr::Neg(inner) => inner.eval_jet_inner(p)?.neg(),
        })
    }
}

/// Pretty-prints fully parenthesized, so re-parsing reconstructs any tree
/// `parse` can produce. Constants use the shortest round-trip float form;
/// a hand-built negative constant re-parses as `Neg` of its magnitude.
impl core::fmt::Display for Expr {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Expr::Constant(c) => write!(f, "{c:?}"),
            Expr::Coord(k) => write!(f, "x{k}"),
            Expr::Binary { op, lhs, rhs } => {
                write!(f, "({lhs} {} {rhs})", op.symbol())
            }
            Expr::Unary { f: func, arg } => write!(f, "{}({arg})", func.name()),
            Expr::IntPow { base, exp } => write!(f, "({base}^{exp})"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
        }
    }
}

/// Parses `text` against dimension `n`; coordinate tokens outside 1..=n are
/// rejected at parse time.
pub fn parse(text: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        dim: n,
        nodes: 0,
    };
    p.skip_ws();
    if p.pos >= p.bytes.len() {
        return Err(p.err("empty expression"));
    }
    let e = p.parse_expr(0)?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
    nodes: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else if self.pos >= self.bytes.len() {
            Err(self.err(format!("at end of input, expected '{}'", c as char)))
        } else {
            Err(self.err(format!(
                "expected '{}', found '{}'",
                c as char, self.bytes[self.pos] as char
            )))
        }
    }

    fn node(&mut self, e: Expr) -> Result<Expr, ParseError> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            Err(self.err("expression has too many nodes"))
        } else {
            Ok(e)
        }
    }

    fn parse_expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        let mut e = self.parse_term(depth + 1)?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_term(depth + 1)?;
            e = self.node(Expr::Binary {
                op,
                lhs: Box::new(e),
                rhs: Box::new(rhs),
            })?;
        }
        Ok(e)
    }

    fn parse_term(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        let mut e = self.parse_factor(depth + 1)?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_factor(depth + 1)?;
            e = self.node(Expr::Binary {
                op,
                lhs: Box::new(e),
                rhs: Box::new(rhs),
            })?;
        }
        Ok(e)
    }

    fn parse_factor(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        self.skip_ws();
        if self.eat(b'-') {
            // '^' binds tighter than unary minus: the recursion picks up an
            // exponent on the operand before negation applies.
            let inner = self.parse_factor(depth + 1)?;
            return self.node(Expr::Neg(Box::new(inner)));
        }
        let base = self.parse_base(depth + 1)?;
        self.skip_ws();
        if self.eat(b'^') {
            let exp = self.parse_exponent()?;
            return self.node(Expr::IntPow {
                base: Box::new(base),
                exp,
            });
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let negative = self.eat(b'-');
        let digits_start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.err("exponent must be an integer literal"));
        }
        // Reject "2.5" style exponents outright.
        if self.peek() == Some(b'.') {
            self.pos = start;
            return Err(self.err("exponent must be an integer literal"));
        }
        let text = core::str::from_utf8(&self.bytes[digits_start..self.pos]).unwrap();
        let mag: i64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: String::from("exponent out of range"),
        })?;
        if mag > 1024 {
            self.pos = start;
            return Err(self.err("exponent magnitude is limited to 1024"));
        }
        Ok(if negative { -(mag as i32) } else { mag as i32 })
    }

    fn parse_base(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nests too deeply"));
        }
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("at end of input, expected a value")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_expr(depth + 1)?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'0'..=b'9' | b'.') => self.parse_number(),
            Some(c) if c.is_ascii_alphabetic() => self.parse_word(depth),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
        }
    }

    fn parse_number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
        }
        if self.pos == start || &self.bytes[start..self.pos] == b"." {
            self.pos = start;
            return Err(self.err("malformed number"));
        }
        // Optional exponent part; only consumed when digits follow, so a
        // trailing identifier like "2exp(..)" is left to fail as implicit
        // multiplication instead of being swallowed by the number.
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            let _ = self.eat(b'+') || self.eat(b'-');
            let ds = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == ds {
                self.pos = mark;
            }
        }
        let text = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("malformed number '{text}'"),
        })?;
        self.node(Expr::Constant(value))
    }

    fn parse_word(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let start = self.pos;
        // Coordinate token: 'x' immediately followed by digits.
        if self.peek() == Some(b'x') && matches!(self.bytes.get(self.pos + 1), Some(b'0'..=b'9')) {
            self.pos += 1;
            let ds = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            let text = core::str::from_utf8(&self.bytes[ds..self.pos]).unwrap();
            let k: usize = text.parse().map_err(|_| ParseError {
                position: start,
                message: String::from("coordinate index out of range"),
            })?;
            if k == 0 || k > self.dim {
                return Err(ParseError {
                    position: start,
                    message: format!(
                        "coordinate index out of range: x{k} (dimension is {})",
                        self.dim
                    ),
                });
            }
            return self.node(Expr::Coord(k));
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let word = core::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let f = match word {
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "sqrt" => UnaryFn::Sqrt,
            _ => {
                return Err(ParseError {
                    position: start,
                    message: format!("unknown identifier '{word}'"),
                })
            }
        };
        self.skip_ws();
        self.expect(b'(')?;
        let arg = self.parse_expr(depth + 1)?;
        self.skip_ws();
        self.expect(b')')?;
        self.node(Expr::Unary {
            f,
            arg: Box::new(arg),
        })
    }
}
