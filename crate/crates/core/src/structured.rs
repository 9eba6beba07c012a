//! Structured document form of a model, the shape used on the service wire.
//!
//! ```json
//! { "format_version": 1, "name": "...", "actors": [...], "dependencies": [...],
//!   "sr": [...], "scopes": { "staff": ["ro1", "ro2"] } }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{ParseError, ParseErrorCode as Code};
use crate::model::{
    validate_model, Actor, ActorId, Decomposition, Dependency, MeansEnd, ModelError, SdModel, SrBoundary,
    SrElement, SubjectKind,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub name: String,
    pub actors: Vec<Actor>,
    pub dependencies: Vec<Dependency>,
    #[serde(default)]
    pub sr: Vec<SrDocument>,
    #[serde(default)]
    pub scopes: BTreeMap<String, Vec<ActorId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrDocument {
    pub actor: ActorId,
    #[serde(default)]
    pub elements: Vec<SrElement>,
    #[serde(default)]
    pub decompositions: Vec<Decomposition>,
    #[serde(default)]
    pub means_ends: Vec<MeansEnd>,
}

impl From<&SdModel> for ModelDocument {
    fn from(model: &SdModel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            name: model.name().to_owned(),
            actors: model.actors().cloned().collect(),
            dependencies: model.dependencies().cloned().collect(),
            sr: model
                .boundaries()
                .map(|b| SrDocument {
                    actor: b.actor().clone(),
                    elements: b.elements().cloned().collect(),
                    decompositions: b.decompositions().cloned().collect(),
                    means_ends: b.means_ends().cloned().collect(),
                })
                .collect(),
            scopes: model
                .scopes()
                .map(|(name, members)| (name.clone(), members.iter().cloned().collect()))
                .collect(),
        }
    }
}

impl ModelDocument {
    /// Builds the model. Duplicate ids and a wrong format version are errors;
    /// structural invariants are not checked here (see [`validate_model`]).
    pub fn into_model(self) -> Result<SdModel, Vec<ParseError>> {
        let mut errors = Vec::new();
        if self.format_version != FORMAT_VERSION {
            errors.push(ParseError::at_path(
                Code::Syntax,
                "$.format_version",
                format!("unsupported format_version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        let mut model = SdModel::new(self.name);
        for (i, actor) in self.actors.into_iter().enumerate() {
            if let Err(e) = model.add_actor(actor) {
                errors.push(ParseError::at_path(Code::DuplicateId, format!("$.actors[{i}].id"), e.to_string()));
            }
        }
        for (i, dep) in self.dependencies.into_iter().enumerate() {
            if let Err(e) = model.add_dependency(dep) {
                errors.push(ParseError::at_path(
                    Code::DuplicateId,
                    format!("$.dependencies[{i}].id"),
                    e.to_string(),
                ));
            }
        }
        for (name, members) in self.scopes {
            let path = format!("$.scopes.{name}");
            if let Err(e) = model.add_scope(name, members) {
                errors.push(ParseError::at_path(Code::DuplicateId, path, e.to_string()));
            }
        }
        for (i, doc) in self.sr.into_iter().enumerate() {
            let mut boundary = SrBoundary::new(doc.actor);
            for (j, element) in doc.elements.into_iter().enumerate() {
                if let Err(e) = boundary.add_element(element) {
                    errors.push(ParseError::at_path(
                        Code::DuplicateId,
                        format!("$.sr[{i}].elements[{j}].name"),
                        e.to_string(),
                    ));
                }
            }
            for d in doc.decompositions {
                boundary.decompose(d.parent, d.child);
            }
            for m in doc.means_ends {
                boundary.means_end(m.means, m.end);
            }
            if let Err(e @ ModelError::DuplicateBoundary(_)) = model.add_boundary(boundary) {
                errors.push(ParseError::at_path(Code::DuplicateId, format!("$.sr[{i}].actor"), e.to_string()));
            }
        }
        if errors.is_empty() {
            Ok(model)
        } else {
            Err(errors)
        }
    }
}

/// Pretty JSON with a trailing newline. Deterministic for a given model.
pub fn to_json(model: &SdModel) -> String {
    let mut text = serde_json::to_string_pretty(&ModelDocument::from(model)).expect("document serializes");
    text.push('\n');
    text
}

/// Decodes a JSON value into a document, reporting the failing path.
pub fn document_from_value(value: serde_json::Value) -> Result<ModelDocument, ParseError> {
    serde_path_to_error::deserialize(value).map_err(path_error)
}

pub(crate) fn path_error<E: std::fmt::Display>(err: serde_path_to_error::Error<E>) -> ParseError {
    let mut path = err.path().to_string();
    let message = err.inner().to_string();
    // missing fields are reported against the enclosing object
    if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
        path = if path == "." { field.to_owned() } else { format!("{path}.{field}") };
    }
    let path = if path == "." { "$".to_owned() } else { format!("$.{path}") };
    let message = message.split(" at line ").next().unwrap_or(&message).to_owned();
    ParseError::at_path(Code::Syntax, path, message)
}

/// Decodes a JSON document without structural validation.
pub fn from_json_unvalidated(text: &str) -> Result<SdModel, Vec<ParseError>> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ModelDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| vec![path_error(e)])?;
    de.end().map_err(|e| vec![ParseError::at_path(Code::Syntax, "$", e.to_string())])?;
    doc.into_model()
}

/// Decodes a JSON document into a model that passes [`validate_model`].
pub fn from_json(text: &str) -> Result<SdModel, Vec<ParseError>> {
    let model = from_json_unvalidated(text)?;
    check(model)
}

/// Turns violations into path-located errors.
pub fn check(model: SdModel) -> Result<SdModel, Vec<ParseError>> {
    let violations = validate_model(&model);
    if violations.is_empty() {
        return Ok(model);
    }
    Err(violations
        .into_iter()
        .map(|v| {
            let path = match v.subject_kind {
                SubjectKind::Actor => format!("$.actors[id={}]", v.subject),
                SubjectKind::Dependency => format!("$.dependencies[id={}]", v.subject),
                SubjectKind::Scope => format!("$.scopes.{}", v.subject),
                SubjectKind::Boundary => format!("$.sr[actor={}]", v.subject),
            };
            ParseError::at_path(Code::Invalid, path, format!("{}: {}", v.code, v.message))
        })
        .collect())
}
