//! Delegation moves: reassigning one endpoint of an existing dependency to
//! another actor, and judging whether doing so is acceptable.
//!
//! Moving the dependee endpoint hands the responsibility to someone else
//! (criticality relief). Moving the depender endpoint hands over the act of
//! depending (vulnerability relief). A move is infeasible when the receiver
//! lacks the service knowledge, or when it would push the receiver into the
//! most-vulnerable or most-critical set of the scope.

mod diff;
mod plan;
mod recommend;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{argmax, criticality, metrics_table, vulnerability, MetricsError, MetricsRow, Scope, Vulnerability};
use crate::model::{ActorId, Dependency, DependencyId, ModelError, SdModel};

pub use diff::{diff, ChangeReport, DiffError, EndpointChange};
pub use plan::{evaluate_plan, evaluate_plans, replay_plan, Plan, PlanError, PlanFile};
pub use recommend::{recommend, AddActorAdvisory, Objective, RecommendConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Depender,
    Dependee,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Depender => "depender",
            Endpoint::Dependee => "dependee",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelegationMove {
    pub dependency: DependencyId,
    pub endpoint: Endpoint,
    pub new_actor: ActorId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

impl DelegationMove {
    pub fn new(dependency: impl Into<DependencyId>, endpoint: Endpoint, new_actor: impl Into<ActorId>) -> Self {
        Self { dependency: dependency.into(), endpoint, new_actor: new_actor.into(), rationale: None }
    }

    pub fn with_rationale(mut self, rationale: impl Into<String>) -> Self {
        self.rationale = Some(rationale.into());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DelegationError {
    #[error("unknown dependency `{0}`")]
    UnknownDependency(DependencyId),
    #[error("unknown actor `{0}`")]
    UnknownActor(ActorId),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl From<ModelError> for DelegationError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownActor(a) => Self::UnknownActor(a),
            ModelError::UnknownDependency(d) => Self::UnknownDependency(d),
            other => Self::InvalidMove(other.to_string()),
        }
    }
}

/// The actor currently holding the moved endpoint, and the actor at the
/// other end.
fn endpoints(dep: &Dependency, endpoint: Endpoint) -> (&ActorId, &ActorId) {
    match endpoint {
        Endpoint::Depender => (&dep.depender, &dep.dependee),
        Endpoint::Dependee => (&dep.dependee, &dep.depender),
    }
}

fn lookup<'m>(model: &'m SdModel, mv: &DelegationMove) -> Result<&'m Dependency, DelegationError> {
    let dep = model
        .dependency(mv.dependency.as_str())
        .ok_or_else(|| DelegationError::UnknownDependency(mv.dependency.clone()))?;
    if model.actor(mv.new_actor.as_str()).is_none() {
        return Err(DelegationError::UnknownActor(mv.new_actor.clone()));
    }
    Ok(dep)
}

/// Why a structurally resolvable move still cannot be applied.
fn invalid_reason(dep: &Dependency, mv: &DelegationMove) -> Option<String> {
    let (holder, other) = endpoints(dep, mv.endpoint);
    if *holder == mv.new_actor {
        Some(format!("`{}` already is the {} of `{}`", holder, mv.endpoint, dep.id))
    } else if *other == mv.new_actor {
        Some(format!("moving the {} of `{}` to `{}` would make it a self-dependency", mv.endpoint, dep.id, other))
    } else {
        None
    }
}

/// Returns a new model with one endpoint of one dependency reassigned.
pub fn apply_move(model: &SdModel, mv: &DelegationMove) -> Result<SdModel, DelegationError> {
    let dep = lookup(model, mv)?;
    if let Some(reason) = invalid_reason(dep, mv) {
        return Err(DelegationError::InvalidMove(reason));
    }
    let mut moved = dep.clone();
    match mv.endpoint {
        Endpoint::Depender => moved.depender = mv.new_actor.clone(),
        Endpoint::Dependee => moved.dependee = mv.new_actor.clone(),
    }
    Ok(model.with_dependency(moved)?)
}

/// Feasibility knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Policy {
    /// Skip the service-knowledge check.
    pub override_knowledge: bool,
    /// Only a unique maximum counts as "most"; ties do not.
    pub strict_argmax: bool,
    /// Leave infeasible moves out when evaluating a plan.
    pub skip_infeasible: bool,
}

impl Default for Policy {
    fn default() -> Self {
        Self { override_knowledge: false, strict_argmax: false, skip_infeasible: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReasonCode {
    NotKnowledgeable,
    CreatesMostVulnerable,
    CreatesMostCritical,
    InvalidMove,
}

impl ReasonCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::NotKnowledgeable => "NOT_KNOWLEDGEABLE",
            Self::CreatesMostVulnerable => "CREATES_MOST_VULNERABLE",
            Self::CreatesMostCritical => "CREATES_MOST_CRITICAL",
            Self::InvalidMove => "INVALID_MOVE",
        }
    }
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reason {
    pub code: ReasonCode,
    pub message: String,
}

/// VM and CM of one actor at one point in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standing {
    pub vm: Vulnerability,
    pub cm: u64,
}

impl Standing {
    fn of(model: &SdModel, actor: &str) -> Result<Self, DelegationError> {
        Ok(Self { vm: vulnerability(model, actor)?, cm: criticality(model, actor)? })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub reasons: Vec<Reason>,
    pub receiver: ActorId,
    pub before: Standing,
    pub after: Standing,
}

impl FeasibilityVerdict {
    pub fn has(&self, code: ReasonCode) -> bool {
        self.reasons.iter().any(|r| r.code == code)
    }
}

fn at_top(rows: &[MetricsRow], actor: &ActorId, strict: bool, key: impl Fn(&MetricsRow) -> Vulnerability) -> bool {
    let set = argmax(rows, key);
    set.contains(actor) && (!strict || set.len() == 1)
}

fn at_top_cm(rows: &[MetricsRow], actor: &ActorId, strict: bool) -> bool {
    let set = argmax(rows, |r| r.cm);
    set.contains(actor) && (!strict || set.len() == 1)
}

/// Judges one move against the model as it stands.
pub fn check_feasibility(
    model: &SdModel,
    scope: &Scope,
    mv: &DelegationMove,
    policy: &Policy,
) -> Result<FeasibilityVerdict, DelegationError> {
    check_delegation(model, scope, std::slice::from_ref(mv), policy)
}

/// Judges a group of moves to one receiver as a single delegation: the
/// moves are applied in order and the receiver's position is compared
/// before and after the whole group.
pub fn check_delegation(
    model: &SdModel,
    scope: &Scope,
    moves: &[DelegationMove],
    policy: &Policy,
) -> Result<FeasibilityVerdict, DelegationError> {
    let Some(first) = moves.first() else {
        return Err(DelegationError::InvalidMove("empty delegation".into()));
    };
    let receiver = first.new_actor.clone();
    if let Some(other) = moves.iter().find(|m| m.new_actor != receiver) {
        return Err(DelegationError::InvalidMove(format!(
            "a delegation has one receiver; found `{}` and `{}`",
            receiver, other.new_actor
        )));
    }
    scope.ensure_in(model)?;
    let before = Standing::of(model, receiver.as_str())
        .map_err(|_| DelegationError::UnknownActor(receiver.clone()))?;
    let receiver_tags = &model.actor(receiver.as_str()).expect("checked").tags;

    let mut reasons = Vec::new();
    let mut after_model = model.clone();
    for mv in moves {
        let dep = lookup(&after_model, mv)?;
        if let Some(message) = invalid_reason(dep, mv) {
            return Ok(FeasibilityVerdict {
                feasible: false,
                reasons: vec![Reason { code: ReasonCode::InvalidMove, message }],
                receiver,
                before,
                after: before,
            });
        }
        if !policy.override_knowledge && dep.dependum.tags.is_disjoint(receiver_tags) {
            reasons.push(Reason {
                code: ReasonCode::NotKnowledgeable,
                message: format!(
                    "`{}` shares no service area with \"{}\" ({})",
                    receiver,
                    dep.dependum.name,
                    dep.id
                ),
            });
        }
        after_model = apply_move(&after_model, mv)?;
    }

    let rows_before = metrics_table(model, scope)?;
    let rows_after = metrics_table(&after_model, scope)?;
    let strict = policy.strict_argmax;
    if at_top(&rows_after, &receiver, strict, |r| r.vm) && !at_top(&rows_before, &receiver, strict, |r| r.vm) {
        reasons.push(Reason {
            code: ReasonCode::CreatesMostVulnerable,
            message: format!("`{receiver}` would become the most vulnerable actor in scope"),
        });
    }
    if at_top_cm(&rows_after, &receiver, strict) && !at_top_cm(&rows_before, &receiver, strict) {
        reasons.push(Reason {
            code: ReasonCode::CreatesMostCritical,
            message: format!("`{receiver}` would become the most critical actor in scope"),
        });
    }
    let after = Standing::of(&after_model, receiver.as_str())?;
    Ok(FeasibilityVerdict { feasible: reasons.is_empty(), reasons, receiver, before, after })
}

/// All of one actor's dependencies in one service area, handed to a single
/// receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub actor: ActorId,
    pub service: String,
    pub receiver: ActorId,
    pub moves: Vec<DelegationMove>,
}

/// Every service cluster of `actor` that `receiver` could take over. A
/// service qualifies when the receiver is knowledgeable of it, or for every
/// tagged service when `any_service` is set. Dependencies whose other end is
/// the receiver are left out.
pub fn service_clusters(model: &SdModel, actor: &str, receiver: &str, any_service: bool) -> Vec<Cluster> {
    let Some(receiver_actor) = model.actor(receiver) else {
        return Vec::new();
    };
    if actor == receiver {
        return Vec::new();
    }
    let owned: Vec<(&Dependency, Endpoint)> = model
        .dependencies()
        .filter_map(|d| {
            if d.depender.as_str() == actor && d.dependee.as_str() != receiver {
                Some((d, Endpoint::Depender))
            } else if d.dependee.as_str() == actor && d.depender.as_str() != receiver {
                Some((d, Endpoint::Dependee))
            } else {
                None
            }
        })
        .collect();
    let services: std::collections::BTreeSet<&String> = owned
        .iter()
        .flat_map(|(d, _)| d.dependum.tags.iter())
        .filter(|t| any_service || receiver_actor.tags.contains(*t))
        .collect();

    services
        .into_iter()
        .map(|service| Cluster {
            actor: actor.into(),
            service: service.clone(),
            receiver: receiver.into(),
            moves: owned
                .iter()
                .filter(|(d, _)| d.dependum.tags.contains(service))
                .map(|(d, endpoint)| {
                    DelegationMove::new(d.id.clone(), *endpoint, receiver)
                        .with_rationale(format!("delegate {service} from {actor} to {receiver}"))
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actor, Dependum, ElementKind};

    fn model() -> SdModel {
        let mut m = SdModel::new("t");
        m.add_actor(Actor::new("a", "A").with_tags(["s"])).unwrap();
        m.add_actor(Actor::new("b", "B").with_tags(["s"])).unwrap();
        m.add_actor(Actor::new("c", "C").with_tags(["s"])).unwrap();
        m.add_actor(Actor::new("x", "X")).unwrap();
        let dep = |id: &str, from: &str, to: &str| {
            Dependency::new(id, from, to, Dependum::new(ElementKind::Goal, id).with_tags(["s"]))
        };
        m.add_dependency(dep("d1", "a", "b")).unwrap();
        m.add_dependency(dep("d2", "b", "c")).unwrap();
        m.add_dependency(dep("d3", "c", "a")).unwrap();
        m
    }

    #[test]
    fn apply_move_reassigns_one_endpoint() {
        let m = model();
        let next = apply_move(&m, &DelegationMove::new("d1", Endpoint::Dependee, "c")).unwrap();
        assert_eq!(next.dependency("d1").unwrap().dependee.as_str(), "c");
        assert_eq!(m.dependency("d1").unwrap().dependee.as_str(), "b");
        assert_eq!(next.dependency_count(), m.dependency_count());
    }

    #[test]
    fn structural_errors() {
        let m = model();
        assert_eq!(
            apply_move(&m, &DelegationMove::new("zz", Endpoint::Depender, "a")),
            Err(DelegationError::UnknownDependency("zz".into()))
        );
        assert_eq!(
            apply_move(&m, &DelegationMove::new("d1", Endpoint::Depender, "zz")),
            Err(DelegationError::UnknownActor("zz".into()))
        );
        assert!(matches!(
            apply_move(&m, &DelegationMove::new("d1", Endpoint::Depender, "a")),
            Err(DelegationError::InvalidMove(_))
        ));
        assert!(matches!(
            apply_move(&m, &DelegationMove::new("d1", Endpoint::Depender, "b")),
            Err(DelegationError::InvalidMove(_))
        ));
    }

    #[test]
    fn no_op_move_is_an_invalid_verdict() {
        let m = model();
        let scope = Scope::all(&m).unwrap();
        let v = check_feasibility(&m, &scope, &DelegationMove::new("d1", Endpoint::Depender, "a"), &Policy::default())
            .unwrap();
        assert!(!v.feasible);
        assert!(v.has(ReasonCode::InvalidMove));
    }

    #[test]
    fn knowledge_is_tag_intersection() {
        let m = model();
        let scope = Scope::new(&m, ["a", "b", "c"]).unwrap();
        let mv = DelegationMove::new("d1", Endpoint::Dependee, "x");
        let v = check_feasibility(&m, &scope, &mv, &Policy::default()).unwrap();
        assert!(v.has(ReasonCode::NotKnowledgeable));
        let policy = Policy { override_knowledge: true, ..Policy::default() };
        let v = check_feasibility(&m, &scope, &mv, &policy).unwrap();
        assert!(v.feasible, "{v:?}");
    }

    #[test]
    fn balanced_receiver_already_on_top_is_feasible() {
        // all three actors tie, so the receiver already is in both sets
        let m = model();
        let scope = Scope::new(&m, ["a", "b", "c"]).unwrap();
        let v = check_feasibility(&m, &scope, &DelegationMove::new("d1", Endpoint::Dependee, "c"), &Policy::default())
            .unwrap();
        assert!(v.feasible, "{v:?}");
        assert_eq!(v.before.cm, 1);
        assert_eq!(v.after.cm, 4);
    }

    #[test]
    fn strict_argmax_ignores_ties() {
        // a: 2 goals to b; c takes one of b's two outgoing edges -> c ties a at VM 2
        let mut m = SdModel::new("t");
        for id in ["a", "b", "c", "d"] {
            m.add_actor(Actor::new(id, id).with_tags(["s"])).unwrap();
        }
        let goal = |id: &str| Dependum::new(ElementKind::Goal, id).with_tags(["s"]);
        m.add_dependency(Dependency::new("1", "a", "b", goal("1"))).unwrap();
        m.add_dependency(Dependency::new("2", "a", "b", goal("2"))).unwrap();
        m.add_dependency(Dependency::new("3", "c", "d", goal("3"))).unwrap();
        m.add_dependency(Dependency::new("4", "b", "d", goal("4"))).unwrap();
        let scope = Scope::new(&m, ["a", "b", "c"]).unwrap();
        let mv = DelegationMove::new("4", Endpoint::Depender, "c");
        let weak = check_feasibility(&m, &scope, &mv, &Policy::default()).unwrap();
        assert!(weak.has(ReasonCode::CreatesMostVulnerable));
        let strict = check_feasibility(&m, &scope, &mv, &Policy { strict_argmax: true, ..Policy::default() }).unwrap();
        assert!(!strict.has(ReasonCode::CreatesMostVulnerable));
    }

    #[test]
    fn clusters_group_by_service() {
        let mut m = model();
        m.add_dependency(Dependency::new(
            "d4",
            "a",
            "c",
            Dependum::new(ElementKind::Task, "t").with_tags(["s", "other"]),
        ))
        .unwrap();
        // d3 and d4 have c on the other end
        let to_c = service_clusters(&m, "a", "c", false);
        assert_eq!(to_c.len(), 1);
        let ids: Vec<_> = to_c[0].moves.iter().map(|m| m.dependency.as_str()).collect();
        assert_eq!(ids, vec!["d1"]);
        // d1 has b on the other end; `other` is unknown to b
        let to_b = service_clusters(&m, "a", "b", false);
        assert_eq!(to_b.len(), 1);
        let moves: Vec<_> = to_b[0].moves.iter().map(|m| (m.dependency.as_str(), m.endpoint)).collect();
        assert_eq!(moves, vec![("d3", Endpoint::Dependee), ("d4", Endpoint::Depender)]);
        let any = service_clusters(&m, "a", "b", true);
        assert_eq!(any.iter().map(|c| c.service.as_str()).collect::<Vec<_>>(), vec!["other", "s"]);
        assert!(service_clusters(&m, "a", "a", false).is_empty());
    }

    #[test]
    fn group_needs_one_receiver() {
        let m = model();
        let scope = Scope::all(&m).unwrap();
        let moves = [
            DelegationMove::new("d1", Endpoint::Dependee, "c"),
            DelegationMove::new("d2", Endpoint::Dependee, "a"),
        ];
        assert!(check_delegation(&m, &scope, &moves, &Policy::default()).is_err());
        assert!(check_delegation(&m, &scope, &[], &Policy::default()).is_err());
    }
}
