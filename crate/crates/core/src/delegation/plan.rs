use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{apply_move, check_feasibility, diff, AddActorAdvisory, ChangeReport, DelegationError, DelegationMove, FeasibilityVerdict, Policy};
use crate::exec::Execution;
use crate::metrics::{metrics_table, Hotspots, MetricsError, MetricsRow, Scope};
use crate::model::SdModel;
use crate::diagnostic::{ParseError, ParseErrorCode};
use crate::structured::{path_error, FORMAT_VERSION};

/// The on-disk list of moves. Unknown top-level fields are ignored so that
/// a serialized [`Plan`] can be fed back in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub moves: Vec<DelegationMove>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl PlanFile {
    pub fn new(moves: Vec<DelegationMove>) -> Self {
        Self { format_version: FORMAT_VERSION, moves }
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let file: PlanFile = serde_path_to_error::deserialize(&mut de).map_err(path_error)?;
        de.end().map_err(|e| ParseError::at_path(ParseErrorCode::Syntax, "$", e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(ParseError::at_path(
                ParseErrorCode::Syntax,
                "$.format_version",
                format!("unsupported format_version {}, expected {FORMAT_VERSION}", file.format_version),
            ));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plan serializes");
        text.push('\n');
        text
    }
}

/// Result of replaying or recommending a sequence of moves. Serialized, it
/// is also a valid plan file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub format_version: u32,
    pub moves: Vec<DelegationMove>,
    pub verdicts: Vec<FeasibilityVerdict>,
    /// Indices into `moves` that were not applied.
    pub skipped: Vec<usize>,
    pub advisories: Vec<AddActorAdvisory>,
    pub table_before: Vec<MetricsRow>,
    pub table_after: Vec<MetricsRow>,
    pub hotspots_before: Hotspots,
    pub hotspots_after: Hotspots,
    pub changes: ChangeReport,
}

impl Plan {
    pub(crate) fn assemble(
        base: &SdModel,
        after: &SdModel,
        scope: &Scope,
        moves: Vec<DelegationMove>,
        verdicts: Vec<FeasibilityVerdict>,
        skipped: Vec<usize>,
        advisories: Vec<AddActorAdvisory>,
    ) -> Result<Self, MetricsError> {
        let table_before = metrics_table(base, scope)?;
        let table_after = metrics_table(after, scope)?;
        Ok(Self {
            format_version: FORMAT_VERSION,
            hotspots_before: Hotspots::from_rows(&table_before),
            hotspots_after: Hotspots::from_rows(&table_after),
            changes: diff(base, after).expect("delegation keeps the actor set"),
            moves,
            verdicts,
            skipped,
            advisories,
            table_before,
            table_after,
        })
    }

    pub fn all_feasible(&self) -> bool {
        self.verdicts.iter().all(|v| v.feasible)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("move {index}: {source}")]
    Move {
        index: usize,
        #[source]
        source: DelegationError,
    },
}

/// Applies moves in order, judging each against the state at its turn.
/// Returns the plan and the final model.
pub fn replay_plan(
    model: &SdModel,
    scope: &Scope,
    moves: &[DelegationMove],
    policy: &Policy,
) -> Result<(Plan, SdModel), PlanError> {
    scope.ensure_in(model)?;
    let mut current = model.clone();
    let mut verdicts = Vec::with_capacity(moves.len());
    let mut skipped = Vec::new();
    for (index, mv) in moves.iter().enumerate() {
        let at = |source| PlanError::Move { index, source };
        let verdict = check_feasibility(&current, scope, mv, policy).map_err(at)?;
        let structural = verdict.has(super::ReasonCode::InvalidMove);
        if structural || (!verdict.feasible && policy.skip_infeasible) {
            skipped.push(index);
        } else {
            current = apply_move(&current, mv).map_err(at)?;
        }
        verdicts.push(verdict);
    }
    let plan = Plan::assemble(model, &current, scope, moves.to_vec(), verdicts, skipped, Vec::new())?;
    Ok((plan, current))
}

pub fn evaluate_plan(
    model: &SdModel,
    scope: &Scope,
    moves: &[DelegationMove],
    policy: &Policy,
) -> Result<Plan, PlanError> {
    replay_plan(model, scope, moves, policy).map(|(plan, _)| plan)
}

/// Evaluates independent plans against the same base model.
pub fn evaluate_plans(
    model: &SdModel,
    scope: &Scope,
    plans: &[Vec<DelegationMove>],
    policy: &Policy,
    execution: Execution,
) -> Vec<Result<Plan, PlanError>> {
    execution.map(plans, |moves| evaluate_plan(model, scope, moves, policy))
}
