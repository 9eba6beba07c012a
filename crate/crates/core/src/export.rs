//! Deterministic renderings: Graphviz DOT, CSV metric tables and JSON
//! documents.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{metrics_table, Hotspots, MetricsError, MetricsRow, Scope};
use crate::model::{validate_model, ActorId, ElementKind, SdModel, Violation};
use crate::structured::{self, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Dot,
    Csv,
    Structured,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dot" => Ok(Self::Dot),
            "csv" => Ok(Self::Csv),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(format!("unknown export format `{other}` (expected dot, csv or structured)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportOptions {
    pub format: ExportFormat,
    pub include_sr: bool,
    /// One labelled edge per dependency instead of a dependum node.
    pub compact: bool,
    pub scope: Option<Scope>,
}

impl ExportOptions {
    pub fn new(format: ExportFormat) -> Self {
        Self { format, include_sr: false, compact: false, scope: None }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("model has {} violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn dot_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn element_shape(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Goal => "shape=box, style=rounded",
        ElementKind::Softgoal => "shape=octagon, style=rounded",
        ElementKind::Task => "shape=hexagon",
        ElementKind::Resource => "shape=box",
    }
}

/// Graphviz digraph. Actors are ellipses; each dependency becomes a box
/// labelled `kind: name` between depender and dependee.
pub fn to_dot(model: &SdModel, options: &ExportOptions) -> Result<String, ExportError> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(ExportError::Invalid(violations));
    }
    if let Some(scope) = &options.scope {
        scope.ensure_in(model)?;
    }
    let in_scope = |id: &ActorId| options.scope.as_ref().is_none_or(|s| s.contains(id.as_str()));
    let deps: Vec<_> = model.dependencies().filter(|d| in_scope(&d.depender) || in_scope(&d.dependee)).collect();
    let mut shown: BTreeSet<&ActorId> = model.actor_ids().filter(|a| in_scope(a)).collect();
    shown.extend(deps.iter().flat_map(|d| [&d.depender, &d.dependee]));

    let mut out = String::new();
    writeln!(out, "digraph {} {{", dot_str(model.name())).unwrap();
    for id in &shown {
        let actor = model.actor(id.as_str()).expect("validated");
        let style = if in_scope(id) { "" } else { ", style=dashed" };
        writeln!(out, "  {} [shape=ellipse, label={}{style}];", dot_str(&format!("actor:{id}")), dot_str(&actor.name))
            .unwrap();
    }
    for dep in &deps {
        let from = dot_str(&format!("actor:{}", dep.depender));
        let to = dot_str(&format!("actor:{}", dep.dependee));
        let label = dot_str(&format!("{}: {}", dep.dependum.kind, dep.dependum.name));
        if options.compact {
            writeln!(out, "  {from} -> {to} [label={label}];").unwrap();
        } else {
            let node = dot_str(&format!("dep:{}", dep.id));
            writeln!(out, "  {node} [shape=box, label={label}];").unwrap();
            writeln!(out, "  {from} -> {node};").unwrap();
            writeln!(out, "  {node} -> {to};").unwrap();
        }
    }
    if options.include_sr {
        for boundary in model.boundaries().filter(|b| shown.contains(b.actor())) {
            let actor = boundary.actor();
            let node = |name: &str| dot_str(&format!("sr:{actor}:{name}"));
            writeln!(out, "  subgraph {} {{", dot_str(&format!("cluster_{actor}"))).unwrap();
            writeln!(out, "    label={};", dot_str(&model.actor(actor.as_str()).expect("validated").name)).unwrap();
            writeln!(out, "    style=dashed;").unwrap();
            for element in boundary.elements() {
                let label = dot_str(&format!("{}: {}", element.kind, element.name));
                writeln!(out, "    {} [{}, label={label}];", node(&element.name), element_shape(element.kind)).unwrap();
            }
            for link in boundary.decompositions() {
                writeln!(out, "    {} -> {} [arrowhead=tee];", node(&link.child), node(&link.parent)).unwrap();
            }
            for link in boundary.means_ends() {
                writeln!(out, "    {} -> {} [arrowhead=normal];", node(&link.means), node(&link.end)).unwrap();
            }
            writeln!(out, "  }}").unwrap();
        }
    }
    out.push_str("}\n");
    Ok(out)
}

pub const CSV_HEADER: [&str; 7] = ["actor", "out_deps", "dependees", "vm", "in_deps", "dependers", "cm"];

/// CSV with LF line endings; VM to one decimal.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        writer
            .write_record([
                r.actor.as_str(),
                &r.out_deps.to_string(),
                &r.dependees.to_string(),
                &r.vm.one_decimal(),
                &r.in_deps.to_string(),
                &r.dependers.to_string(),
                &r.cm.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
}

/// Metric table and hotspots for one scope, as served by the analysis
/// endpoint and printed by `metrics --format structured`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub format_version: u32,
    pub scope: Scope,
    pub rows: Vec<MetricsRow>,
    pub hotspots: Hotspots,
}

impl Analysis {
    pub fn compute(model: &SdModel, scope: &Scope) -> Result<Self, MetricsError> {
        let rows = metrics_table(model, scope)?;
        Ok(Self { format_version: FORMAT_VERSION, scope: scope.clone(), hotspots: Hotspots::from_rows(&rows), rows })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_document<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    text
}

/// Renders `model` in the chosen format. CSV covers the scope (or every
/// actor); the structured form is the whole model.
pub fn export(model: &SdModel, options: &ExportOptions) -> Result<String, ExportError> {
    match options.format {
        ExportFormat::Dot => to_dot(model, options),
        ExportFormat::Csv => {
            let scope = match &options.scope {
                Some(s) => s.clone(),
                None => Scope::all(model)?,
            };
            Ok(metrics_csv(&metrics_table(model, &scope)?))
        }
        ExportFormat::Structured => {
            let violations = validate_model(model);
            if !violations.is_empty() {
                return Err(ExportError::Invalid(violations));
            }
            Ok(structured::to_json(model))
        }
    }
}
