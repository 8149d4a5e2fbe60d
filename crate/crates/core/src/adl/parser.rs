//! Recursive-descent parser for coordinate expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := NUMBER | 'U' | ('GetX' | 'GetY') '(' REF ')' | '(' expr ')' | '-' factor
//! REF    := [A-Z]{1,4}[0-9]+ ('.L' | '.R')? | 'M'[0-9]+ | 'M_HAIRLINE'
//! ```
//!
//! Whitespace between tokens is ignored. Offsets in errors are byte offsets
//! into the source text.

use std::fmt;

use thiserror::Error;

use super::ast::{is_channel_code, Axis, Expr, PointId, Reference, Side, HAIRLINE_REF};

/// Nesting beyond this is rejected instead of recursing further.
pub const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: found {found}, expected {}", ExpectedList(expected))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("unknown function {name:?} at offset {offset} (only GetX and GetY exist)")]
    UnknownFunction { offset: usize, name: String },
    #[error("expression nested deeper than {MAX_NESTING} levels at offset {offset}")]
    TooDeep { offset: usize },
}

impl ExprError {
    pub fn offset(&self) -> usize {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownFunction { offset, .. }
            | ExprError::TooDeep { offset } => *offset,
        }
    }
}

struct ExpectedList<'a>(&'a [&'static str]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(if i == self.0.len() - 1 { " or " } else { ", " })?;
            }
            f.write_str(e)?;
        }
        Ok(())
    }
}

const FACTOR_START: &[&str] = &["number", "U", "GetX", "GetY", "'('", "'-'"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    /// Identifier plus an optional `.X` qualifier glued to it.
    Ident(String, Option<String>),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    End,
    Bad(char),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s, None) => format!("{s:?}"),
            Tok::Ident(s, Some(q)) => format!("\"{s}.{q}\""),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::End => "end of input".into(),
            Tok::Bad(c) => format!("{c:?}"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek_char() {
            if pred(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek_char() else {
            return Ok((Tok::End, start));
        };
        let single = |t: Tok| Ok((t, start));
        match c {
            '(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            ')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            '+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            '-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            '*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            '0'..='9' | '.' => self.number(start),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                let mut qualifier = None;
                let rest = &self.src[self.pos..];
                if rest.starts_with('.')
                    && rest[1..].starts_with(|c: char| c.is_ascii_alphabetic())
                {
                    self.pos += 1;
                    qualifier = Some(
                        self.take_while(|c| c.is_ascii_alphanumeric())
                            .to_string(),
                    );
                }
                Ok((Tok::Ident(name.to_string(), qualifier), start))
            }
            other => {
                self.pos += other.len_utf8();
                Ok((Tok::Bad(other), start))
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ExprError> {
        let int = self.take_while(|c| c.is_ascii_digit()).len();
        let mut frac = 0;
        if self.peek_char() == Some('.') {
            self.pos += 1;
            frac = self.take_while(|c| c.is_ascii_digit()).len();
        }
        if int == 0 && frac == 0 {
            return Err(ExprError::Syntax {
                offset: start,
                found: "'.'".into(),
                expected: vec!["digit"],
            });
        }
        if matches!(self.peek_char(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_char(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
            _ => Err(ExprError::Syntax {
                offset: start,
                found: format!("{text:?}"),
                expected: vec!["finite number"],
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Self {
            lexer,
            tok,
            at,
            depth: 0,
        })
    }

    fn bump(&mut self) -> Result<Tok, ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.at = at;
        Ok(std::mem::replace(&mut self.tok, tok))
    }

    fn error(&self, expected: &[&'static str]) -> ExprError {
        ExprError::Syntax {
            offset: self.at,
            found: self.tok.describe(),
            expected: expected.to_vec(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ExprError> {
        if self.tok == tok {
            self.bump()?;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ExprError::TooDeep { offset: self.at });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while self.tok == Tok::Star {
            self.bump()?;
            lhs = Expr::mul(lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::Minus => {
                self.enter()?;
                self.bump()?;
                let inner = self.factor()?;
                self.depth -= 1;
                Ok(Expr::neg(inner))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name, qualifier) => {
                let at = self.at;
                self.bump()?;
                if self.tok == Tok::LParen {
                    let axis = match (name.as_str(), &qualifier) {
                        ("GetX", None) => Axis::X,
                        ("GetY", None) => Axis::Y,
                        _ => {
                            return Err(ExprError::UnknownFunction {
                                offset: at,
                                name: match qualifier {
                                    Some(q) => format!("{name}.{q}"),
                                    None => name,
                                },
                            })
                        }
                    };
                    self.bump()?;
                    let reference = self.reference()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::Coord(axis, reference));
                }
                if name == "U" && qualifier.is_none() {
                    return Ok(Expr::Cun);
                }
                Err(ExprError::Syntax {
                    offset: at,
                    found: format!("{name:?}"),
                    expected: FACTOR_START.to_vec(),
                })
            }
            _ => Err(self.error(FACTOR_START)),
        }
    }

    fn reference(&mut self) -> Result<Reference, ExprError> {
        let Tok::Ident(name, qualifier) = self.tok.clone() else {
            return Err(self.error(&["point reference", "mesh reference"]));
        };
        let bad = |p: &Self| p.error(&["point reference", "mesh reference"]);
        let reference = if name == HAIRLINE_REF {
            if qualifier.is_some() {
                return Err(bad(self));
            }
            Reference::Hairline
        } else if let Some(digits) = name
            .strip_prefix('M')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        {
            if qualifier.is_some() {
                return Err(bad(self));
            }
            Reference::Mesh(digits.parse().map_err(|_| bad(self))?)
        } else {
            let split = name
                .find(|c: char| !c.is_ascii_uppercase())
                .unwrap_or(name.len());
            let (code, digits) = name.split_at(split);
            if !is_channel_code(code)
                || digits.is_empty()
                || !digits.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(bad(self));
            }
            let index: u32 = digits.parse().map_err(|_| bad(self))?;
            let id = PointId::new(code, index).map_err(|_| bad(self))?;
            let side = match qualifier.as_deref() {
                None => None,
                Some("L") => Some(Side::Left),
                Some("R") => Some(Side::Right),
                Some(_) => {
                    return Err(ExprError::Syntax {
                        offset: self.at + name.len(),
                        found: format!("{:?}", qualifier.unwrap_or_default()),
                        expected: vec!["'.L'", "'.R'"],
                    })
                }
            };
            Reference::Point { id, side }
        };
        self.bump()?;
        Ok(reference)
    }
}

/// Parses one coordinate expression.
pub fn parse_expression(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.error(&["'+'", "'-'", "'*'", "end of input"]));
    }
    Ok(e)
}
