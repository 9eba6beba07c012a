//! Strategic Dependency (SD) and Strategic Rationale (SR) model types.
//!
//! An [`SdModel`] is an immutable multigraph: actors keyed by id, and
//! dependencies (depender -> dependum -> dependee) keyed by id. Several
//! dependencies between the same pair of actors are distinct edges. SR
//! boundaries hang off the model, one per actor.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(
    /// Stable, author-supplied actor identifier.
    ActorId
);
string_id!(
    /// Stable, author-supplied dependency identifier.
    DependencyId
);

pub type Tags = BTreeSet<String>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown {what} `{value}`")]
pub struct KindParseError {
    what: &'static str,
    value: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActorKind {
    Agent,
    #[default]
    Role,
    Position,
    Generic,
}

impl ActorKind {
    pub const ALL: [ActorKind; 4] = [Self::Agent, Self::Role, Self::Position, Self::Generic];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Agent => "agent",
            Self::Role => "role",
            Self::Position => "position",
            Self::Generic => "generic",
        }
    }
}


impl FromStr for ActorKind {
    type Err = KindParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| KindParseError { what: "actor kind", value: s.to_owned() })
    }
}

impl fmt::Display for ActorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four i* intentional element kinds, used both for dependums and for
/// elements inside an SR boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Goal,
    Softgoal,
    Task,
    Resource,
}

impl ElementKind {
    pub const ALL: [ElementKind; 4] = [Self::Goal, Self::Softgoal, Self::Task, Self::Resource];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Goal => "goal",
            Self::Softgoal => "softgoal",
            Self::Task => "task",
            Self::Resource => "resource",
        }
    }
}

impl FromStr for ElementKind {
    type Err = KindParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| KindParseError { what: "element kind", value: s.to_owned() })
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub id: ActorId,
    pub name: String,
    #[serde(default)]
    pub kind: ActorKind,
    /// Service areas the actor is knowledgeable of.
    #[serde(default)]
    pub tags: Tags,
}

impl Actor {
    pub fn new(id: impl Into<ActorId>, name: impl Into<String>) -> Self {
        Self { id: id.into(), name: name.into(), kind: ActorKind::default(), tags: Tags::new() }
    }

    pub fn with_kind(mut self, kind: ActorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependum {
    pub name: String,
    pub kind: ElementKind,
    /// Service areas this dependum belongs to.
    #[serde(default)]
    pub tags: Tags,
}

impl Dependum {
    pub fn new(kind: ElementKind, name: impl Into<String>) -> Self {
        Self { name: name.into(), kind, tags: Tags::new() }
    }

    pub fn with_tags<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags = tags.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub id: DependencyId,
    pub depender: ActorId,
    pub dependee: ActorId,
    pub dependum: Dependum,
}

impl Dependency {
    pub fn new(
        id: impl Into<DependencyId>,
        depender: impl Into<ActorId>,
        dependee: impl Into<ActorId>,
        dependum: Dependum,
    ) -> Self {
        Self { id: id.into(), depender: depender.into(), dependee: dependee.into(), dependum }
    }
}

/// An element inside an actor's SR boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrElement {
    pub name: String,
    pub kind: ElementKind,
    #[serde(default)]
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Decomposition {
    pub parent: String,
    pub child: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MeansEnd {
    pub means: String,
    pub end: String,
}

/// Internal rationale structure of one actor. Elements are addressed by name
/// and are local to the boundary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SrBoundary {
    actor: ActorId,
    elements: BTreeMap<String, SrElement>,
    decompositions: BTreeSet<Decomposition>,
    means_ends: BTreeSet<MeansEnd>,
}

impl SrBoundary {
    pub fn new(actor: impl Into<ActorId>) -> Self {
        Self { actor: actor.into(), ..Self::default() }
    }

    pub fn actor(&self) -> &ActorId {
        &self.actor
    }

    pub fn add_element(&mut self, element: SrElement) -> Result<(), ModelError> {
        if self.elements.contains_key(&element.name) {
            return Err(ModelError::DuplicateElement {
                actor: self.actor.clone(),
                name: element.name,
            });
        }
        self.elements.insert(element.name.clone(), element);
        Ok(())
    }

    pub fn decompose(&mut self, parent: impl Into<String>, child: impl Into<String>) {
        self.decompositions.insert(Decomposition { parent: parent.into(), child: child.into() });
    }

    pub fn means_end(&mut self, means: impl Into<String>, end: impl Into<String>) {
        self.means_ends.insert(MeansEnd { means: means.into(), end: end.into() });
    }

    pub fn element(&self, name: &str) -> Option<&SrElement> {
        self.elements.get(name)
    }

    pub fn elements(&self) -> impl Iterator<Item = &SrElement> {
        self.elements.values()
    }

    pub fn decompositions(&self) -> impl Iterator<Item = &Decomposition> {
        self.decompositions.iter()
    }

    pub fn means_ends(&self) -> impl Iterator<Item = &MeansEnd> {
        self.means_ends.iter()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate actor id `{0}`")]
    DuplicateActor(ActorId),
    #[error("duplicate dependency id `{0}`")]
    DuplicateDependency(DependencyId),
    #[error("duplicate SR boundary for actor `{0}`")]
    DuplicateBoundary(ActorId),
    #[error("duplicate element `{name}` in the boundary of `{actor}`")]
    DuplicateElement { actor: ActorId, name: String },
    #[error("duplicate scope `{0}`")]
    DuplicateScope(String),
    #[error("unknown actor `{0}`")]
    UnknownActor(ActorId),
    #[error("unknown dependency `{0}`")]
    UnknownDependency(DependencyId),
}

/// A Strategic Dependency model together with its SR boundaries and named
/// analysis scopes. All collections iterate in id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdModel {
    name: String,
    actors: BTreeMap<ActorId, Actor>,
    dependencies: BTreeMap<DependencyId, Dependency>,
    scopes: BTreeMap<String, BTreeSet<ActorId>>,
    sr: BTreeMap<ActorId, SrBoundary>,
}

pub const DEFAULT_MODEL_NAME: &str = "untitled";

impl Default for SdModel {
    fn default() -> Self {
        Self::new(DEFAULT_MODEL_NAME)
    }
}

impl SdModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            actors: BTreeMap::new(),
            dependencies: BTreeMap::new(),
            scopes: BTreeMap::new(),
            sr: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn add_actor(&mut self, actor: Actor) -> Result<(), ModelError> {
        if self.actors.contains_key(&actor.id) {
            return Err(ModelError::DuplicateActor(actor.id));
        }
        self.actors.insert(actor.id.clone(), actor);
        Ok(())
    }

    pub fn add_dependency(&mut self, dependency: Dependency) -> Result<(), ModelError> {
        if self.dependencies.contains_key(&dependency.id) {
            return Err(ModelError::DuplicateDependency(dependency.id));
        }
        self.dependencies.insert(dependency.id.clone(), dependency);
        Ok(())
    }

    pub fn add_scope<I>(&mut self, name: impl Into<String>, members: I) -> Result<(), ModelError>
    where
        I: IntoIterator<Item = ActorId>,
    {
        let name = name.into();
        if self.scopes.contains_key(&name) {
            return Err(ModelError::DuplicateScope(name));
        }
        self.scopes.insert(name, members.into_iter().collect());
        Ok(())
    }

    pub fn add_boundary(&mut self, boundary: SrBoundary) -> Result<(), ModelError> {
        if self.sr.contains_key(&boundary.actor) {
            return Err(ModelError::DuplicateBoundary(boundary.actor));
        }
        self.sr.insert(boundary.actor.clone(), boundary);
        Ok(())
    }

    pub fn actor(&self, id: &str) -> Option<&Actor> {
        self.actors.get(id)
    }

    pub fn actors(&self) -> impl ExactSizeIterator<Item = &Actor> {
        self.actors.values()
    }

    pub fn actor_ids(&self) -> impl Iterator<Item = &ActorId> {
        self.actors.keys()
    }

    pub fn actor_count(&self) -> usize {
        self.actors.len()
    }

    pub fn dependency(&self, id: &str) -> Option<&Dependency> {
        self.dependencies.get(id)
    }

    pub fn dependencies(&self) -> impl ExactSizeIterator<Item = &Dependency> {
        self.dependencies.values()
    }

    pub fn dependency_count(&self) -> usize {
        self.dependencies.len()
    }

    pub fn scope(&self, name: &str) -> Option<&BTreeSet<ActorId>> {
        self.scopes.get(name)
    }

    pub fn scopes(&self) -> impl Iterator<Item = (&String, &BTreeSet<ActorId>)> {
        self.scopes.iter()
    }

    pub fn boundary(&self, actor: &str) -> Option<&SrBoundary> {
        self.sr.get(actor)
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &SrBoundary> {
        self.sr.values()
    }

    /// Looks an actor up by display name.
    pub fn actor_by_name(&self, name: &str) -> Option<&Actor> {
        self.actors.values().find(|a| a.name == name)
    }

    /// Returns a copy of the model with one dependency replaced. The
    /// dependency id must already exist.
    pub(crate) fn with_dependency(&self, dependency: Dependency) -> Result<SdModel, ModelError> {
        if !self.dependencies.contains_key(&dependency.id) {
            return Err(ModelError::UnknownDependency(dependency.id));
        }
        let mut next = self.clone();
        next.dependencies.insert(dependency.id.clone(), dependency);
        Ok(next)
    }

    /// Returns a copy of the model with one actor's display data replaced.
    pub fn with_actor(&self, actor: Actor) -> Result<SdModel, ModelError> {
        if !self.actors.contains_key(&actor.id) {
            return Err(ModelError::UnknownActor(actor.id));
        }
        let mut next = self.clone();
        next.actors.insert(actor.id.clone(), actor);
        Ok(next)
    }
}

/// Lowercase slug of a display name: alphanumeric runs joined with `-`.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_dash = false;
    for c in name.chars() {
        if c.is_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.extend(c.to_lowercase());
        } else {
            pending_dash = true;
        }
    }
    if out.is_empty() {
        out.push_str("actor");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    EmptyId,
    EmptyName,
    DuplicateName,
    UnknownActor,
    SelfDependency,
    EmptyScope,
    UnknownElement,
    BadDecompositionParent,
    BadMeansEndSource,
    BadMeansEndTarget,
    SrCycle,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EmptyId => "EMPTY_ID",
            Self::EmptyName => "EMPTY_NAME",
            Self::DuplicateName => "DUPLICATE_NAME",
            Self::UnknownActor => "UNKNOWN_ACTOR",
            Self::SelfDependency => "SELF_DEPENDENCY",
            Self::EmptyScope => "EMPTY_SCOPE",
            Self::UnknownElement => "UNKNOWN_ELEMENT",
            Self::BadDecompositionParent => "BAD_DECOMPOSITION_PARENT",
            Self::BadMeansEndSource => "BAD_MEANS_END_SOURCE",
            Self::BadMeansEndTarget => "BAD_MEANS_END_TARGET",
            Self::SrCycle => "SR_CYCLE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a violation's `subject` names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubjectKind {
    Actor,
    Dependency,
    Scope,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    pub subject_kind: SubjectKind,
    /// Id of the offending actor, dependency, scope or boundary owner.
    pub subject: String,
}

impl Violation {
    fn new(code: ViolationCode, kind: SubjectKind, subject: &str, message: String) -> Self {
        Self { code, message, subject_kind: kind, subject: subject.to_owned() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Checks every structural invariant of the model. An empty result means the
/// model is well formed. Violations come back in a deterministic order.
pub fn validate_model(model: &SdModel) -> Vec<Violation> {
    use SubjectKind as K;
    use ViolationCode as C;

    let mut out = Vec::new();

    let mut names: HashMap<&str, &ActorId> = HashMap::new();
    for actor in model.actors() {
        if actor.id.as_str().is_empty() {
            out.push(Violation::new(C::EmptyId, K::Actor, "", "actor id is empty".into()));
        }
        if actor.name.trim().is_empty() {
            out.push(Violation::new(
                C::EmptyName,
                K::Actor,
                actor.id.as_str(),
                format!("actor `{}` has an empty name", actor.id),
            ));
        } else if let Some(first) = names.insert(actor.name.as_str(), &actor.id) {
            out.push(Violation::new(
                C::DuplicateName,
                K::Actor,
                actor.id.as_str(),
                format!("actor `{}` reuses the name of `{}`: \"{}\"", actor.id, first, actor.name),
            ));
        }
    }

    for dep in model.dependencies() {
        let id = dep.id.as_str();
        if id.is_empty() {
            out.push(Violation::new(C::EmptyId, K::Dependency, "", "dependency id is empty".into()));
        }
        for (role, actor) in [("depender", &dep.depender), ("dependee", &dep.dependee)] {
            if model.actor(actor.as_str()).is_none() {
                out.push(Violation::new(
                    C::UnknownActor,
                    K::Dependency,
                    id,
                    format!("dependency `{id}` has unknown {role} `{actor}`"),
                ));
            }
        }
        if dep.depender == dep.dependee {
            out.push(Violation::new(
                C::SelfDependency,
                K::Dependency,
                id,
                format!("dependency `{id}` has `{}` as both depender and dependee", dep.depender),
            ));
        }
        if dep.dependum.name.trim().is_empty() {
            out.push(Violation::new(
                C::EmptyName,
                K::Dependency,
                id,
                format!("dependency `{id}` has an unnamed dependum"),
            ));
        }
    }

    for (name, members) in model.scopes() {
        if members.is_empty() {
            out.push(Violation::new(C::EmptyScope, K::Scope, name, format!("scope `{name}` is empty")));
        }
        for member in members {
            if model.actor(member.as_str()).is_none() {
                out.push(Violation::new(
                    C::UnknownActor,
                    K::Scope,
                    name,
                    format!("scope `{name}` names unknown actor `{member}`"),
                ));
            }
        }
    }

    for boundary in model.boundaries() {
        validate_boundary(model, boundary, &mut out);
    }

    out
}

fn validate_boundary(model: &SdModel, boundary: &SrBoundary, out: &mut Vec<Violation>) {
    use SubjectKind as K;
    use ViolationCode as C;

    let owner = boundary.actor.as_str();
    if model.actor(owner).is_none() {
        out.push(Violation::new(
            C::UnknownActor,
            K::Boundary,
            owner,
            format!("SR boundary belongs to unknown actor `{owner}`"),
        ));
    }
    for element in boundary.elements() {
        if element.name.trim().is_empty() {
            out.push(Violation::new(
                C::EmptyName,
                K::Boundary,
                owner,
                format!("boundary of `{owner}` has an unnamed element"),
            ));
        }
    }

    let unknown = |name: &str, out: &mut Vec<Violation>| {
        out.push(Violation::new(
            C::UnknownElement,
            K::Boundary,
            owner,
            format!("boundary of `{owner}` links unknown element \"{name}\""),
        ));
    };

    for link in boundary.decompositions() {
        match boundary.element(&link.parent) {
            None => unknown(&link.parent, out),
            Some(parent) if parent.kind != ElementKind::Task => out.push(Violation::new(
                C::BadDecompositionParent,
                K::Boundary,
                owner,
                format!(
                    "boundary of `{owner}` decomposes {} \"{}\"; only tasks decompose",
                    parent.kind, parent.name
                ),
            )),
            Some(_) => {}
        }
        if boundary.element(&link.child).is_none() {
            unknown(&link.child, out);
        }
    }

    for link in boundary.means_ends() {
        match boundary.element(&link.means) {
            None => unknown(&link.means, out),
            Some(means) if !matches!(means.kind, ElementKind::Task | ElementKind::Resource) => {
                out.push(Violation::new(
                    C::BadMeansEndSource,
                    K::Boundary,
                    owner,
                    format!(
                        "boundary of `{owner}` uses {} \"{}\" as a means; means are tasks or resources",
                        means.kind, means.name
                    ),
                ))
            }
            Some(_) => {}
        }
        match boundary.element(&link.end) {
            None => unknown(&link.end, out),
            Some(end) if end.kind != ElementKind::Goal => out.push(Violation::new(
                C::BadMeansEndTarget,
                K::Boundary,
                owner,
                format!(
                    "boundary of `{owner}` targets {} \"{}\" with a means-end link; ends are goals",
                    end.kind, end.name
                ),
            )),
            Some(_) => {}
        }
    }

    if let Some(element) = find_cycle(boundary) {
        out.push(Violation::new(
            C::SrCycle,
            K::Boundary,
            owner,
            format!("boundary of `{owner}` has a link cycle through \"{element}\""),
        ));
    }
}

/// Depth-first search over decomposition and means-end links. Returns an
/// element on a cycle, if any.
fn find_cycle(boundary: &SrBoundary) -> Option<String> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for d in boundary.decompositions() {
        adjacency.entry(d.parent.as_str()).or_default().push(d.child.as_str());
    }
    for m in boundary.means_ends() {
        adjacency.entry(m.means.as_str()).or_default().push(m.end.as_str());
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();

    for &start in adjacency.keys() {
        if marks.contains_key(start) {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        marks.insert(start, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if let Some(&child) = children.get(*next) {
                *next += 1;
                match marks.get(child) {
                    Some(Mark::Open) => return Some(child.to_owned()),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(child, Mark::Open);
                        stack.push((child, 0));
                    }
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

/// Dependency counts for one actor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct DegreeProfile {
    /// Dependencies where the actor is the depender.
    pub out_deps: u64,
    /// Distinct dependees over the outgoing dependencies.
    pub dependees: u64,
    /// Dependencies where the actor is the dependee.
    pub in_deps: u64,
    /// Distinct dependers over the incoming dependencies.
    pub dependers: u64,
}

pub fn degree_profile(model: &SdModel, actor: &str) -> Result<DegreeProfile, ModelError> {
    if model.actor(actor).is_none() {
        return Err(ModelError::UnknownActor(actor.into()));
    }
    let mut dependees = BTreeSet::new();
    let mut dependers = BTreeSet::new();
    let mut profile = DegreeProfile::default();
    for dep in model.dependencies() {
        if dep.depender.as_str() == actor {
            profile.out_deps += 1;
            dependees.insert(&dep.dependee);
        }
        if dep.dependee.as_str() == actor {
            profile.in_deps += 1;
            dependers.insert(&dep.depender);
        }
    }
    profile.dependees = dependees.len() as u64;
    profile.dependers = dependers.len() as u64;
    Ok(profile)
}

/// Profiles of every actor in one pass over the edge list.
pub fn degree_profiles(model: &SdModel) -> BTreeMap<ActorId, DegreeProfile> {
    let mut partners: BTreeMap<&ActorId, (BTreeSet<&ActorId>, BTreeSet<&ActorId>)> =
        model.actor_ids().map(|id| (id, Default::default())).collect();
    let mut profiles: BTreeMap<ActorId, DegreeProfile> =
        model.actor_ids().map(|id| (id.clone(), DegreeProfile::default())).collect();

    for dep in model.dependencies() {
        if let Some(p) = profiles.get_mut(&dep.depender) {
            p.out_deps += 1;
        }
        if let Some(p) = profiles.get_mut(&dep.dependee) {
            p.in_deps += 1;
        }
        if let Some((dependees, _)) = partners.get_mut(&dep.depender) {
            dependees.insert(&dep.dependee);
        }
        if let Some((_, dependers)) = partners.get_mut(&dep.dependee) {
            dependers.insert(&dep.depender);
        }
    }
    for (id, (dependees, dependers)) in partners {
        let p = profiles.get_mut(id).expect("profile for every actor");
        p.dependees = dependees.len() as u64;
        p.dependers = dependers.len() as u64;
    }
    profiles
}
