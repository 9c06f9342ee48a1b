use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{BuildError, Node, TransferExpr};
use crate::util::{c, is_finite};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber,
    UnknownIdentifier(String),
    /// `^` must be followed by a real literal, optionally signed or a ratio of
    /// integers in parentheses.
    ExponentNotLiteral,
    ChainedPower,
    Build(BuildError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(ch) => {
                write!(f, "unexpected character '{}' at {}", ch, self.position)
            }
            ParseErrorKind::UnexpectedToken(t) => {
                write!(f, "unexpected '{}' at {}", t, self.position)
            }
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::InvalidNumber => write!(f, "malformed number at {}", self.position),
            ParseErrorKind::UnknownIdentifier(id) => {
                write!(f, "unknown identifier '{}' at {}", id, self.position)
            }
            ParseErrorKind::ExponentNotLiteral => {
                write!(f, "exponent at {} must be a real literal", self.position)
            }
            ParseErrorKind::ChainedPower => {
                write!(f, "chained '^' at {}; parenthesize the base", self.position)
            }
            ParseErrorKind::Build(e) => write!(f, "{} at {}", e, self.position),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
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
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(x) => alloc::format!("{}", x),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber,
                    position: start,
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), position: i });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

/// Parses an expression in `s`. `j` is the imaginary unit.
pub fn parse(src: &str) -> Result<TransferExpr, ParseError> {
    parse_with(src, &BTreeMap::new())
}

/// Like [`parse`], with named constants substituted at parse time.
pub fn parse_with(src: &str, constants: &BTreeMap<String, C64>) -> Result<TransferExpr, ParseError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(ParseError { kind: ParseErrorKind::Empty, position: 0 });
    }
    let mut p = Parser { toks, pos: 0, end: src.len(), constants };
    let e = p.expr()?;
    if let Some((t, at)) = p.toks.get(p.pos) {
        return Err(ParseError { kind: ParseErrorKind::UnexpectedToken(t.text()), position: *at });
    }
    Ok(e)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    constants: &'a BTreeMap<String, C64>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position: self.here() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.err(ParseErrorKind::UnexpectedToken(t.text()))),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }

    fn expr(&mut self) -> Result<TransferExpr, ParseError> {
        let mut terms = alloc::vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(self.term()?.negate());
                }
                _ => break,
            }
        }
        if terms.len() == 1 {
            return Ok(terms.pop().unwrap());
        }
        Ok(fold(TransferExpr::sum(terms)))
    }

    fn term(&mut self) -> Result<TransferExpr, ParseError> {
        let mut cur = self.unary()?;
        // Factors joined by '*' since the last '/' share one product node.
        let mut open_product = false;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    cur = if open_product {
                        match cur.node {
                            Node::Product(mut v) => {
                                v.push(rhs);
                                TransferExpr { node: Node::Product(v) }
                            }
                            other => TransferExpr { node: other }.times(rhs),
                        }
                    } else {
                        cur.times(rhs)
                    };
                    open_product = true;
                }
                Some(Tok::Slash) => {
                    let at = self.here();
                    self.pos += 1;
                    let rhs = self.unary()?;
                    cur = fold(cur);
                    cur = TransferExpr::quotient(cur, rhs)
                        .map_err(|e| ParseError { kind: ParseErrorKind::Build(e), position: at })?;
                    cur = fold(cur);
                    open_product = false;
                }
                _ => break,
            }
        }
        Ok(fold(cur))
    }

    fn unary(&mut self) -> Result<TransferExpr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.negate())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<TransferExpr, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let k = self.exponent_literal()?;
        if self.peek() == Some(&Tok::Caret) {
            return Err(self.err(ParseErrorKind::ChainedPower));
        }
        let at = self.here();
        let p = TransferExpr::power(base, k)
            .map_err(|e| ParseError { kind: ParseErrorKind::Build(e), position: at })?;
        Ok(fold(p))
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.pos += 1;
                }
                Some(Tok::Plus) => self.pos += 1,
                _ => break,
            }
        }
        match self.peek() {
            Some(Tok::Num(x)) => {
                let x = *x;
                self.pos += 1;
                Ok(sign * x)
            }
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
            Some(_) => Err(self.err(ParseErrorKind::ExponentNotLiteral)),
        }
    }

    fn exponent_literal(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let mut k = self.signed_number()?;
                if self.peek() == Some(&Tok::Slash) {
                    self.pos += 1;
                    let d = self.signed_number()?;
                    if d == 0.0 {
                        return Err(self.err(ParseErrorKind::ExponentNotLiteral));
                    }
                    k /= d;
                }
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(k)
                    }
                    None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
                    Some(_) => Err(self.err(ParseErrorKind::ExponentNotLiteral)),
                }
            }
            _ => self.signed_number(),
        }
    }

    fn primary(&mut self) -> Result<TransferExpr, ParseError> {
        let at = self.here();
        match self.bump() {
            None => Err(ParseError { kind: ParseErrorKind::UnexpectedEnd, position: at }),
            Some(Tok::Num(x)) => Ok(TransferExpr::real(x)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(id)) => match id.as_str() {
                "s" => Ok(TransferExpr::var()),
                "j" => Ok(TransferExpr { node: Node::Const(c(0.0, 1.0)) }),
                "exp" => {
                    self.expect(Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(fold(TransferExpr::exp(e)))
                }
                _ => match self.constants.get(&id) {
                    Some(v) => TransferExpr::constant(*v)
                        .map_err(|e| ParseError { kind: ParseErrorKind::Build(e), position: at }),
                    None => Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(id), position: at }),
                },
            },
            Some(t) => Err(ParseError { kind: ParseErrorKind::UnexpectedToken(t.text()), position: at }),
        }
    }
}

/// Collapses a node whose children are all constants into one constant.
/// Folds that would be non-finite (e.g. `0^-1`) are left unevaluated.
fn fold(e: TransferExpr) -> TransferExpr {
    let all_const = match &e.node {
        Node::Const(_) | Node::Var => return e,
        Node::Sum(v) | Node::Product(v) => v.iter().all(|t| t.as_const().is_some()),
        Node::Quotient(a, b) => a.as_const().is_some() && b.as_const().is_some(),
        Node::Power(a, _) | Node::Exp(a) => a.as_const().is_some(),
    };
    if !all_const {
        return e;
    }
    match e.eval(c(0.0, 0.0)) {
        Ok(v) if is_finite(v) => TransferExpr { node: Node::Const(v) },
        _ => e,
    }
}
