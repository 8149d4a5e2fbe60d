use std::fmt;

use thiserror::Error;

use super::ast::{Expr, PointId, PointIdError};
use super::parser::{parse_expression, ExprError};

pub const ATLAS_HEADER: [&str; 8] = [
    "Channel",
    "ID",
    "NameE",
    "Region",
    "FaceMeshX",
    "FaceMeshY",
    "IsSymmetry",
    "Comments",
];

/// One row of an atlas file.
#[derive(Debug, Clone, PartialEq)]
pub struct AcupointDef {
    pub id: PointId,
    pub name_en: String,
    pub region: String,
    pub expr_x: Expr,
    pub expr_y: Expr,
    pub is_symmetric: bool,
    pub comments: String,
    /// 1-based line of the row in its source file.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowErrorKind {
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("bad point id: {0}")]
    BadId(#[from] PointIdError),
    #[error("column {column}: {error}")]
    Expression {
        column: &'static str,
        error: ExprError,
    },
    #[error("IsSymmetry must be TRUE or FALSE, got {0:?}")]
    BadBool(String),
    #[error("duplicate identifier {id} (first defined on line {first_line})")]
    Duplicate { id: PointId, first_line: usize },
    #[error("malformed CSV: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct RowError {
    pub line: usize,
    pub kind: RowErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlasParseError {
    #[error("bad header: {}", describe_header(.missing, .extra))]
    BadHeader {
        missing: Vec<String>,
        extra: Vec<String>,
        found: Vec<String>,
    },
    #[error("{}", RowList(.0))]
    Rows(Vec<RowError>),
}

fn describe_header(missing: &[String], extra: &[String]) -> String {
    let mut parts = Vec::new();
    if !missing.is_empty() {
        parts.push(format!("missing columns {}", missing.join(", ")));
    }
    if !extra.is_empty() {
        parts.push(format!("unexpected columns {}", extra.join(", ")));
    }
    if parts.is_empty() {
        parts.push(format!("columns must be exactly {}", ATLAS_HEADER.join(",")));
    }
    parts.join("; ")
}

struct RowList<'a>(&'a [RowError]);

impl fmt::Display for RowList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} row error(s)", self.0.len())?;
        for e in self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

fn check_header(found: &[String]) -> Result<(), AtlasParseError> {
    if found.iter().map(String::as_str).eq(ATLAS_HEADER.iter().copied()) {
        return Ok(());
    }
    let missing = ATLAS_HEADER
        .iter()
        .filter(|h| !found.iter().any(|f| f == *h))
        .map(|h| h.to_string())
        .collect();
    let extra = found
        .iter()
        .filter(|f| !ATLAS_HEADER.contains(&f.as_str()))
        .cloned()
        .collect();
    Err(AtlasParseError::BadHeader {
        missing,
        extra,
        found: found.to_vec(),
    })
}

fn parse_row(fields: &[&str], line: usize) -> Result<AcupointDef, Vec<RowErrorKind>> {
    let mut errors = Vec::new();
    let channel = fields[0].trim();
    let id_text = fields[1].trim();
    let id = match id_text.parse::<u32>() {
        Ok(index) if id_text.bytes().all(|b| b.is_ascii_digit()) => PointId::new(channel, index)
            .map_err(|e| errors.push(e.into()))
            .ok(),
        _ => {
            errors.push(PointIdError::BadIndex(id_text.to_string()).into());
            None
        }
    };
    let mut expr = |column: &'static str, text: &str| match parse_expression(text) {
        Ok(e) => Some(e),
        Err(error) => {
            errors.push(RowErrorKind::Expression { column, error });
            None
        }
    };
    let expr_x = expr("FaceMeshX", fields[4]);
    let expr_y = expr("FaceMeshY", fields[5]);
    let sym = fields[6].trim();
    let is_symmetric = if sym.eq_ignore_ascii_case("true") {
        Some(true)
    } else if sym.eq_ignore_ascii_case("false") {
        Some(false)
    } else {
        errors.push(RowErrorKind::BadBool(sym.to_string()));
        None
    };
    match (id, expr_x, expr_y, is_symmetric) {
        (Some(id), Some(expr_x), Some(expr_y), Some(is_symmetric)) if errors.is_empty() => {
            let comments = match fields[7].trim() {
                "-" => String::new(),
                other => other.to_string(),
            };
            Ok(AcupointDef {
                id,
                name_en: fields[2].trim().to_string(),
                region: fields[3].trim().to_string(),
                expr_x,
                expr_y,
                is_symmetric,
                comments,
                line,
            })
        }
        _ => Err(errors),
    }
}

/// Parses an atlas CSV document. Every row is checked; all row failures are
/// returned together.
pub fn parse_atlas(text: &str) -> Result<Vec<AcupointDef>, AtlasParseError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header: Vec<String> = match records.next() {
        Some(Ok(rec)) => rec.iter().map(|s| s.trim().to_string()).collect(),
        Some(Err(e)) => {
            return Err(AtlasParseError::Rows(vec![RowError {
                line: 1,
                kind: RowErrorKind::Csv(e.to_string()),
            }]))
        }
        None => Vec::new(),
    };
    check_header(&header)?;

    let mut defs: Vec<AcupointDef> = Vec::new();
    let mut errors = Vec::new();
    for record in records {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                errors.push(RowError {
                    line,
                    kind: RowErrorKind::Csv(e.to_string()),
                });
                continue;
            }
        };
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != ATLAS_HEADER.len() {
            errors.push(RowError {
                line,
                kind: RowErrorKind::FieldCount {
                    expected: ATLAS_HEADER.len(),
                    found: record.len(),
                },
            });
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        match parse_row(&fields, line) {
            Ok(def) => {
                if let Some(first) = defs.iter().find(|d| d.id == def.id) {
                    errors.push(RowError {
                        line,
                        kind: RowErrorKind::Duplicate {
                            id: def.id.clone(),
                            first_line: first.line,
                        },
                    });
                } else {
                    defs.push(def);
                }
            }
            Err(kinds) => errors.extend(kinds.into_iter().map(|kind| RowError { line, kind })),
        }
    }
    if errors.is_empty() {
        Ok(defs)
    } else {
        Err(AtlasParseError::Rows(errors))
    }
}

/// Renders definitions back to the CSV dialect, canonical expressions.
pub fn write_atlas(defs: &[AcupointDef]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ATLAS_HEADER).expect("in-memory write");
    for d in defs {
        let comments = if d.comments.is_empty() {
            "-".to_string()
        } else {
            d.comments.clone()
        };
        w.write_record([
            d.id.channel().to_string(),
            d.id.index().to_string(),
            d.name_en.clone(),
            d.region.clone(),
            d.expr_x.to_string(),
            d.expr_y.to_string(),
            if d.is_symmetric { "TRUE" } else { "FALSE" }.to_string(),
            comments,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
