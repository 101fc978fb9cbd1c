//! Concrete syntax: the `.cqm` model/trace language and the formula surface
//! syntax, with parsers and deterministic serializers for both.

mod directives;
mod formula;
mod lexer;
mod model;

use std::fmt;

use thiserror::Error;

pub use directives::{parse_assignment, parse_context, parse_directives, AssignItem, Directive};
pub use formula::{
    formula_to_string, parse_any, parse_formula, parse_pnf, pnf_to_string, term_to_string, Parsed,
};
pub use model::{parse_model, parse_model_file, serialize_model};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub file: Option<String>,
    /// 1-based
    pub line: usize,
    /// 1-based
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntactic,
    Scoping,
    Sort,
    Reference,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lexical => "lexical",
            ErrorKind::Syntactic => "syntax",
            ErrorKind::Scoping => "scoping",
            ErrorKind::Sort => "sort",
            ErrorKind::Reference => "reference",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {kind} error: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub kind: ErrorKind,
    pub message: String,
}
