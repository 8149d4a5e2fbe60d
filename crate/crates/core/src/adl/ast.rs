use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Acupoint identifier: a 1-4 letter channel code and a positive index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointId {
    channel: String,
    index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PointIdError {
    #[error("channel code {0:?} must be 1-4 uppercase letters")]
    BadChannel(String),
    #[error("channel code \"M\" is reserved for mesh references")]
    ReservedChannel,
    #[error("point index must be a positive integer, got {0:?}")]
    BadIndex(String),
}

pub(crate) fn is_channel_code(code: &str) -> bool {
    (1..=4).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_uppercase())
}

impl PointId {
    pub fn new(channel: &str, index: u32) -> Result<Self, PointIdError> {
        if !is_channel_code(channel) {
            return Err(PointIdError::BadChannel(channel.to_string()));
        }
        if channel == "M" {
            return Err(PointIdError::ReservedChannel);
        }
        if index == 0 {
            return Err(PointIdError::BadIndex(index.to_string()));
        }
        Ok(Self {
            channel: channel.to_string(),
            index,
        })
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn index(&self) -> u32 {
        self.index
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.channel, self.index)
    }
}

impl FromStr for PointId {
    type Err = PointIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let split = s
            .find(|c: char| !c.is_ascii_uppercase())
            .unwrap_or(s.len());
        let (channel, digits) = s.split_at(split);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(PointIdError::BadIndex(digits.to_string()));
        }
        let index = digits
            .parse()
            .map_err(|_| PointIdError::BadIndex(digits.to_string()))?;
        Self::new(channel, index)
    }
}

impl Serialize for PointId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PointId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which instance of a point: midline points are `Center`, symmetric
/// definitions produce a `Left` and a `Right` instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Center,
    Left,
    Right,
}

impl Side {
    pub fn suffix(self) -> &'static str {
        match self {
            Side::Center => "",
            Side::Left => ".L",
            Side::Right => ".R",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// The reserved reference resolved from the hairline extractor.
pub const HAIRLINE_REF: &str = "M_HAIRLINE";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Reference {
    /// Another atlas point, optionally pinned to one side.
    Point { id: PointId, side: Option<Side> },
    /// Mesh vertex `M<idx>`.
    Mesh(u32),
    Hairline,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Point { id, side } => {
                write!(f, "{id}{}", side.map(Side::suffix).unwrap_or(""))
            }
            Reference::Mesh(i) => write!(f, "M{i}"),
            Reference::Hairline => f.write_str(HAIRLINE_REF),
        }
    }
}

/// Coordinate expression. Numbers are non-negative; negation is explicit.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The literal `U`.
    Cun,
    Coord(Axis, Reference),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn get(axis: Axis, r: Reference) -> Expr {
        Expr::Coord(axis, r)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            _ => 3,
        }
    }

    /// Visits every reference in the expression.
    pub fn references(&self) -> Vec<&Reference> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a Reference>) {
        match self {
            Expr::Num(_) | Expr::Cun => {}
            Expr::Coord(_, r) => out.push(r),
            Expr::Neg(e) => e.collect_refs(out),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => {
                l.collect_refs(out);
                r.collect_refs(out);
            }
        }
    }

    pub fn uses_cun(&self) -> bool {
        match self {
            Expr::Cun => true,
            Expr::Num(_) | Expr::Coord(..) => false,
            Expr::Neg(e) => e.uses_cun(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) => l.uses_cun() || r.uses_cun(),
        }
    }

    fn write_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_min(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Cun => f.write_str("U"),
            Expr::Coord(Axis::X, r) => write!(f, "GetX({r})"),
            Expr::Coord(Axis::Y, r) => write!(f, "GetY({r})"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_min(f, 3)
            }
            Expr::Add(l, r) => {
                l.write_min(f, 1)?;
                f.write_str("+")?;
                r.write_min(f, 2)
            }
            Expr::Sub(l, r) => {
                l.write_min(f, 1)?;
                f.write_str("-")?;
                r.write_min(f, 2)
            }
            Expr::Mul(l, r) => {
                l.write_min(f, 2)?;
                f.write_str("*")?;
                r.write_min(f, 3)
            }
        }
    }
}

/// Canonical text: no whitespace, minimal parentheses. Reparsing yields an
/// equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_min(f, 0)
    }
}
