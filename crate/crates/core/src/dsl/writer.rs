use std::fmt::Write;

use thiserror::Error;

use super::lexer::{is_word_char, quote};
use crate::model::{slug, validate_model, SdModel, Tags, Violation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("model has {} violation(s); first: {}", .0.len(), .0[0])]
pub struct SerializeError(pub Vec<Violation>);

fn tag_list(tags: &Tags) -> String {
    let items: Vec<String> = tags
        .iter()
        .map(|t| {
            if !t.is_empty() && t.chars().all(is_word_char) && !t.contains("->") {
                t.clone()
            } else {
                quote(t)
            }
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// Canonical DSL text for a valid model: sections in a fixed order, entries
/// sorted by id, LF line endings.
pub fn serialize_model(model: &SdModel) -> Result<String, SerializeError> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(SerializeError(violations));
    }
    let name_of = |id: &str| model.actor(id).map(|a| quote(&a.name)).expect("validated");

    let mut out = String::new();
    writeln!(out, "model {}", quote(model.name())).unwrap();

    if model.actor_count() > 0 {
        out.push('\n');
    }
    for actor in model.actors() {
        write!(out, "actor {}", quote(&actor.name)).unwrap();
        if actor.id.as_str() != slug(&actor.name) {
            write!(out, " id {}", quote(actor.id.as_str())).unwrap();
        }
        write!(out, " kind {}", actor.kind).unwrap();
        if !actor.tags.is_empty() {
            write!(out, " tags {}", tag_list(&actor.tags)).unwrap();
        }
        out.push('\n');
    }

    let mut scopes = model.scopes().peekable();
    if scopes.peek().is_some() {
        out.push('\n');
    }
    for (name, members) in scopes {
        let names: Vec<String> = members.iter().map(|m| name_of(m.as_str())).collect();
        writeln!(out, "scope {} [{}]", quote(name), names.join(", ")).unwrap();
    }

    if model.dependency_count() > 0 {
        out.push('\n');
    }
    for dep in model.dependencies() {
        write!(
            out,
            "dep {} {} from {} to {} id {}",
            dep.dependum.kind,
            quote(&dep.dependum.name),
            name_of(dep.depender.as_str()),
            name_of(dep.dependee.as_str()),
            quote(dep.id.as_str()),
        )
        .unwrap();
        if !dep.dependum.tags.is_empty() {
            write!(out, " tags {}", tag_list(&dep.dependum.tags)).unwrap();
        }
        out.push('\n');
    }

    for boundary in model.boundaries() {
        writeln!(out, "\nsr {} {{", name_of(boundary.actor().as_str())).unwrap();
        for element in boundary.elements() {
            write!(out, "  {} {}", element.kind, quote(&element.name)).unwrap();
            if !element.tags.is_empty() {
                write!(out, " tags {}", tag_list(&element.tags)).unwrap();
            }
            out.push('\n');
        }
        let kind_of = |name: &str| boundary.element(name).map(|e| e.kind).expect("validated");
        for link in boundary.decompositions() {
            writeln!(out, "  decompose {} -> {} {}", quote(&link.parent), kind_of(&link.child), quote(&link.child))
                .unwrap();
        }
        for link in boundary.means_ends() {
            writeln!(
                out,
                "  means {} {} -> {} {}",
                kind_of(&link.means),
                quote(&link.means),
                kind_of(&link.end),
                quote(&link.end)
            )
            .unwrap();
        }
        out.push_str("}\n");
    }
    Ok(out)
}
