//! Recursive descent parser for the chart expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, `* /`, unary minus, `^`
//! (right-associative). Functions are `name(expr)`. Identifiers resolve
//! against the declared coordinate and parameter names; anything else is an
//! error with a byte offset.

use super::{Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Character that cannot start any token.
    Lexical(char),
    /// Malformed structure: unbalanced parens, dangling operator, bad number.
    Syntax(String),
    /// Identifier that is neither a coordinate, parameter, nor function.
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source.
    pub offset: usize,
}

impl ParseError {
    pub fn message(&self) -> String {
        match &self.kind {
            ParseErrorKind::Lexical(c) => {
                format!("unexpected character `{}` at offset {}", c, self.offset)
            }
            ParseErrorKind::Syntax(m) => format!("{} at offset {}", m, self.offset),
            ParseErrorKind::UnknownIdentifier(n) => {
                format!("unknown identifier `{}` at offset {}", n, self.offset)
            }
        }
    }
}

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
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                return Ok(out);
            }
            let start = lx.pos;
            let c = lx.src[lx.pos] as char;
            let tok = match c {
                '+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                '-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                '*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                '/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                '^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                '(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                ')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                c if c.is_ascii_digit() || c == '.' => lx.number(start)?,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while lx.pos < lx.src.len()
                        && ((lx.src[lx.pos] as char).is_ascii_alphanumeric()
                            || lx.src[lx.pos] == b'_')
                    {
                        lx.pos += 1;
                    }
                    Tok::Ident(src[start..lx.pos].to_string())
                }
                other => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Lexical(other),
                        offset: start,
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
                while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `2e` followed by non-digit: the `e` belongs to an identifier,
                // not this literal.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| ParseError {
            kind: ParseErrorKind::Syntax(format!("invalid number literal `{}`", text)),
            offset: start,
        })
    }
}

const FUNCTIONS: &[(&str, UnaryOp)] = &[
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("tan", UnaryOp::Tan),
    ("exp", UnaryOp::Exp),
    ("log", UnaryOp::Log),
    ("sqrt", UnaryOp::Sqrt),
    ("sinh", UnaryOp::Sinh),
    ("cosh", UnaryOp::Cosh),
    ("tanh", UnaryOp::Tanh),
];

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    coords: &'a [&'a str],
    params: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            kind: ParseErrorKind::Syntax(msg.into()),
            offset: self.offset(),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = lhs.add(&rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = lhs.sub(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = lhs.mul(&rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = lhs.div(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    // unary := '-' unary | power   (so -x^2 parses as -(x^2))
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(inner.neg());
        }
        self.power()
    }

    // power := atom ('^' unary)?   right-associative
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let exp = self.unary()?;
            return Ok(base.pow(&exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::constant(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(ParseError {
                        kind: ParseErrorKind::Syntax("expected `)`".into()),
                        offset: self.toks.get(self.pos - 1).map(|(_, o)| *o).unwrap_or(self.end),
                    }),
                }
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    if let Some((_, op)) = FUNCTIONS.iter().find(|(n, _)| *n == name) {
                        self.bump(); // (
                        let arg = self.expr()?;
                        match self.bump() {
                            Some(Tok::RParen) => return Ok(Expr::unary(*op, &arg)),
                            _ => {
                                return Err(ParseError {
                                    kind: ParseErrorKind::Syntax("expected `)`".into()),
                                    offset: self
                                        .toks
                                        .get(self.pos - 1)
                                        .map(|(_, o)| *o)
                                        .unwrap_or(self.end),
                                })
                            }
                        }
                    }
                }
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::coord(i));
                }
                if self.params.iter().any(|p| *p == name) {
                    return Ok(Expr::param(&name));
                }
                Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name),
                    offset,
                })
            }
            Some(other) => Err(ParseError {
                kind: ParseErrorKind::Syntax(format!("unexpected token `{:?}`", other)),
                offset,
            }),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

/// Parses `src` over the declared coordinate and parameter names.
pub fn parse_expression(
    src: &str,
    coords: &[&str],
    params: &[&str],
) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
        coords,
        params,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}
