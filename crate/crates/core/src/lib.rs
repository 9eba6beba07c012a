//! Strategic dependency models of organisations: parsing, vulnerability and
//! criticality measures, and delegation analysis.
//!
//! ```
//! use charter_deps_core::{fixtures, metrics::{hotspots, Scope}};
//!
//! let model = fixtures::civil_registry();
//! let staff = Scope::named(&model, "staff").unwrap();
//! let h = hotspots(&model, &staff).unwrap();
//! assert!(h.most_vulnerable.contains("ro1"));
//! ```

pub mod delegation;
pub mod diagnostic;
pub mod dsl;
pub mod exec;
pub mod export;
pub mod fixtures;
pub mod metrics;
pub mod model;
pub mod structured;

pub use delegation::{
    apply_move, check_delegation, check_feasibility, evaluate_plan, evaluate_plans, recommend, DelegationMove,
    Endpoint, FeasibilityVerdict, Plan, PlanFile, Policy, RecommendConfig,
};
pub use diagnostic::{ParseError, ParseErrorCode, SourceSpan};
pub use dsl::{parse_model, serialize_model};
pub use exec::Execution;
pub use metrics::{hotspots, metrics_table, Hotspots, MetricsRow, Scope, Vulnerability};
pub use model::{validate_model, Actor, ActorId, Dependency, DependencyId, Dependum, SdModel};

/// Reads a model from text, choosing the format by a file name's extension:
/// `.json` is the structured document, anything else the DSL.
pub fn parse_by_extension(path: &std::path::Path, text: &str) -> Result<SdModel, Vec<ParseError>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => structured::from_json(text),
        _ => parse_model(text),
    }
}
