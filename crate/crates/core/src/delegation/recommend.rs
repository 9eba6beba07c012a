//! Greedy rebalancing.
//!
//! Each round looks at the current hotspot actors and tries every service
//! cluster of theirs against every knowledgeable receiver in scope. A
//! cluster is accepted only when each of its moves is feasible in turn, the
//! cluster as a whole is feasible, neither max VM nor max CM gets worse, and
//! the objective strictly improves. The best cluster is applied and the
//! round repeats.

use serde::{Deserialize, Serialize};

use super::{apply_move, check_delegation, check_feasibility, service_clusters, Cluster, DelegationError, FeasibilityVerdict, Plan, Policy};
use crate::exec::Execution;
use crate::metrics::{index_rows, metrics_table, Hotspots, MetricsRow, Scope, Vulnerability};
use crate::model::{ActorId, SdModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommendConfig {
    /// Upper bound on the number of single moves in the result.
    pub max_moves: usize,
    pub policy: Policy,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        Self { max_moves: 10, policy: Policy::default(), execution: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddActorAdvisory {
    pub overloaded_actor: ActorId,
    pub reason: String,
}

/// Compared lexicographically; smaller is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Objective {
    pub max_vm: Vulnerability,
    pub max_cm: u64,
    pub vm_spread: Vulnerability,
}

impl Objective {
    pub fn of(rows: &[MetricsRow]) -> Self {
        let max_vm = rows.iter().map(|r| r.vm).max().unwrap_or(Vulnerability::ZERO);
        let min_vm = rows.iter().map(|r| r.vm).min().unwrap_or(Vulnerability::ZERO);
        Self {
            max_vm,
            max_cm: rows.iter().map(|r| r.cm).max().unwrap_or(0),
            vm_spread: max_vm.saturating_sub(min_vm),
        }
    }

    fn admits(&self, after: &Objective) -> bool {
        after < self && after.max_vm <= self.max_vm && after.max_cm <= self.max_cm
    }
}

struct Outcome {
    model: SdModel,
    verdicts: Vec<FeasibilityVerdict>,
    objective: Objective,
}

fn try_cluster(model: &SdModel, scope: &Scope, cluster: &Cluster, policy: &Policy) -> Result<Option<Outcome>, DelegationError> {
    let mut current = model.clone();
    let mut verdicts = Vec::with_capacity(cluster.moves.len());
    for mv in &cluster.moves {
        let verdict = check_feasibility(&current, scope, mv, policy)?;
        if !verdict.feasible {
            return Ok(None);
        }
        current = apply_move(&current, mv)?;
        verdicts.push(verdict);
    }
    if !check_delegation(model, scope, &cluster.moves, policy)?.feasible {
        return Ok(None);
    }
    let objective = Objective::of(&metrics_table(&current, scope)?);
    Ok(Some(Outcome { model: current, verdicts, objective }))
}

fn clusters_of(model: &SdModel, scope: &Scope, actor: &ActorId, policy: &Policy) -> Vec<Cluster> {
    scope
        .iter()
        .filter(|r| *r != actor)
        .flat_map(|r| service_clusters(model, actor.as_str(), r.as_str(), policy.override_knowledge))
        .collect()
}

fn overloaded(hotspots: &Hotspots, scope: &Scope, actor: &ActorId) -> Option<&'static str> {
    let proper = |set: &std::collections::BTreeSet<ActorId>| set.contains(actor) && set.len() < scope.len();
    match (proper(&hotspots.most_vulnerable), proper(&hotspots.most_critical)) {
        (true, true) => Some("most vulnerable and most critical"),
        (true, false) => Some("most vulnerable"),
        (false, true) => Some("most critical"),
        (false, false) => None,
    }
}

pub fn recommend(model: &SdModel, scope: &Scope, config: &RecommendConfig) -> Result<Plan, DelegationError> {
    let policy = &config.policy;
    let mut current = model.clone();
    let mut moves = Vec::new();
    let mut verdicts = Vec::new();

    loop {
        let rows = metrics_table(&current, scope)?;
        let objective = Objective::of(&rows);
        let index = index_rows(&rows);
        let budget = config.max_moves - moves.len();
        let clusters: Vec<Cluster> = Hotspots::from_rows(&rows)
            .actors()
            .into_iter()
            .flat_map(|h| clusters_of(&current, scope, h, policy))
            .filter(|c| c.moves.len() <= budget)
            .collect();
        let outcomes = config.execution.map(&clusters, |c| try_cluster(&current, scope, c, policy));

        let mut best = None;
        for (cluster, outcome) in clusters.iter().zip(outcomes) {
            let Some(outcome) = outcome? else { continue };
            if !objective.admits(&outcome.objective) {
                continue;
            }
            let receiver = index[&cluster.receiver];
            let key = (outcome.objective, receiver.vm, receiver.cm, &cluster.receiver, &cluster.actor, &cluster.service);
            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                best = Some((key, cluster, outcome));
            }
        }
        let Some((_, cluster, outcome)) = best else { break };
        moves.extend(cluster.moves.iter().cloned());
        verdicts.extend(outcome.verdicts);
        current = outcome.model;
    }

    let rows = metrics_table(&current, scope)?;
    let hotspots = Hotspots::from_rows(&rows);
    let index = index_rows(&rows);
    let mut advisories = Vec::new();
    for actor in hotspots.actors() {
        let Some(position) = overloaded(&hotspots, scope, actor) else { continue };
        let mut relief = false;
        for cluster in clusters_of(&current, scope, actor, policy) {
            if try_cluster(&current, scope, &cluster, policy)?.is_some() {
                relief = true;
                break;
            }
        }
        if relief {
            continue;
        }
        let row = index[actor];
        let name = current.actor(actor.as_str()).map_or(actor.as_str(), |a| a.name.as_str());
        advisories.push(AddActorAdvisory {
            overloaded_actor: actor.clone(),
            reason: format!(
                "{name} is the {position} actor in scope (VM {}, CM {}) and no knowledgeable actor can take over \
                 any of its service clusters without becoming a hotspot itself; add an actor for these services \
                 and benchmark its performance before redistributing",
                row.vm, row.cm
            ),
        });
    }

    Ok(Plan::assemble(model, &current, scope, moves, verdicts, Vec::new(), advisories)?)
}
