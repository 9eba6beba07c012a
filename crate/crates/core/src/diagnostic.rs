use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based position of a diagnostic in DSL source, counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorCode {
    Syntax,
    UnknownActor,
    UnknownElement,
    DuplicateId,
    BadKind,
    BadString,
    /// The text decoded but the model breaks a structural invariant.
    Invalid,
}

impl ParseErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Syntax => "SYNTAX",
            Self::UnknownActor => "UNKNOWN_ACTOR",
            Self::UnknownElement => "UNKNOWN_ELEMENT",
            Self::DuplicateId => "DUPLICATE_ID",
            Self::BadKind => "BAD_KIND",
            Self::BadString => "BAD_STRING",
            Self::Invalid => "INVALID",
        }
    }
}

impl fmt::Display for ParseErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a diagnostic points: a span in DSL text, or a path into a
/// structured document such as `$.dependencies[3].depender`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Span(SourceSpan),
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParseError {
    pub code: ParseErrorCode,
    pub message: String,
    #[serde(flatten)]
    pub location: Location,
}

impl ParseError {
    pub fn at(code: ParseErrorCode, span: SourceSpan, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), location: Location::Span(span) }
    }

    pub fn at_path(code: ParseErrorCode, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), location: Location::Path(path.into()) }
    }

    pub fn span(&self) -> Option<SourceSpan> {
        match self.location {
            Location::Span(s) => Some(s),
            Location::Path(_) => None,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Location::Span(s) => write!(f, "{s}: {}: {}", self.code, self.message),
            Location::Path(p) => write!(f, "{p}: {}: {}", self.code, self.message),
        }
    }
}

impl std::error::Error for ParseError {}
