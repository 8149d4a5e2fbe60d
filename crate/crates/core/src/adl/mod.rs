//! The acupoint definition language: expression grammar, the CSV atlas
//! format, and compilation into an evaluation-ready program.

mod ast;
mod atlas_file;
mod census;
mod compile;
mod parser;

pub use ast::{Axis, Expr, PointId, PointIdError, Reference, Side, HAIRLINE_REF};
pub use atlas_file::{
    parse_atlas, write_atlas, AcupointDef, AtlasParseError, RowError, RowErrorKind, ATLAS_HEADER,
};
pub use census::{census, Census, ClassCounts};
pub use compile::{
    compile_atlas, AtlasProgram, CompileError, CompileErrors, Complexity, REFERENCE_CHANNEL,
};
pub(crate) use ast::is_channel_code;
pub(crate) use compile::{Lowered, Slot};
pub use parser::{parse_expression, ExprError, MAX_NESTING};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error(transparent)]
    Parse(#[from] AtlasParseError),
    #[error(transparent)]
    Compile(#[from] CompileErrors),
}

/// Parses and compiles an atlas document.
pub fn load_atlas(text: &str) -> Result<AtlasProgram, AtlasError> {
    Ok(compile_atlas(parse_atlas(text)?)?)
}
