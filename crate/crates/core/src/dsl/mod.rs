//! Line-oriented text format for SD/SR models (`.istar` files).
//!
//! ```text
//! model "Birth registration"
//! actor "Customer" kind generic
//! actor "Registration Officer" tags [birth-registration]
//! dep resource "birth registration requirements" from "Registration Officer" to "Customer"
//! scope "staff" ["Registration Officer"]
//! sr "Registration Officer" {
//!   task "process birth registration"
//!   decompose "process birth registration" -> task "verify requirements"
//!   means task "process birth registration" -> goal "registration processed"
//! }
//! ```
//!
//! `from` names the depender and `to` the dependee. Actors are referenced by
//! name and must be declared before use. Actor ids default to a slug of the
//! name and dependency ids to `d<N>` for the N-th `dep` line.

mod lexer;
mod parser;
mod writer;

use crate::diagnostic::{ParseError, ParseErrorCode, SourceSpan};
use crate::model::{validate_model, SdModel};

pub use writer::{serialize_model, SerializeError};

/// Parses DSL text into a model that passes [`validate_model`]. Every
/// problem found in the text is reported; no model is returned alongside
/// errors.
pub fn parse_model(text: &str) -> Result<SdModel, Vec<ParseError>> {
    let (model, spans) = parser::parse(text)?;
    let violations = validate_model(&model);
    if violations.is_empty() {
        return Ok(model);
    }
    let fallback = SourceSpan { line: 1, column: 1, length: 1 };
    Err(violations
        .into_iter()
        .map(|v| {
            let span = spans.locate(&v).unwrap_or(fallback);
            ParseError::at(ParseErrorCode::Invalid, span, format!("{}: {}", v.code, v.message))
        })
        .collect())
}

/// Parses DSL text without running structural validation. Syntax and
/// reference errors are still reported.
pub fn parse_unvalidated(text: &str) -> Result<SdModel, Vec<ParseError>> {
    parser::parse(text).map(|(model, _)| model)
}

/// Like [`parse_model`] for raw bytes; invalid UTF-8 is reported at the
/// offending position.
pub fn parse_bytes(bytes: &[u8]) -> Result<SdModel, Vec<ParseError>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(vec![ParseError::at(
                ParseErrorCode::BadString,
                SourceSpan { line, column, length: 1 },
                "input is not valid UTF-8",
            )])
        }
    }
}
