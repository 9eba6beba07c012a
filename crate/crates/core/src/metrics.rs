//! Vulnerability and criticality measures.
//!
//! Vulnerability (VM) is outgoing dependencies over distinct dependees and is
//! kept as an exact rational. Criticality (CM) is incoming dependencies times
//! distinct dependers. Both are always computed on the whole model graph; a
//! [`Scope`] only chooses which rows are reported and which actors take part
//! in argmax comparisons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{degree_profile, degree_profiles, ActorId, DegreeProfile, ModelError, SdModel};

/// Exact vulnerability value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vulnerability(Ratio<u64>);

impl Vulnerability {
    pub const ZERO: Vulnerability = Vulnerability(Ratio::new_raw(0, 1));

    /// VM for an actor with `out_deps` outgoing dependencies spread over
    /// `dependees` distinct dependees. An actor that delegates nothing has VM 0.
    pub fn from_counts(out_deps: u64, dependees: u64) -> Self {
        if out_deps == 0 || dependees == 0 {
            Self::ZERO
        } else {
            Self(Ratio::new(out_deps, dependees))
        }
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `self - other`, or zero when `other` is larger.
    pub fn saturating_sub(self, other: Self) -> Self {
        if other >= self {
            Self::ZERO
        } else {
            Self(self.0 - other.0)
        }
    }

    /// Exact form, `"4"` or `"3/2"`.
    pub fn exact(self) -> String {
        if self.denom() == 1 {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    /// One decimal place, rounding half up, computed in integer arithmetic.
    pub fn one_decimal(self) -> String {
        let (n, d) = (self.numer() as u128, self.denom() as u128);
        let tenths = (n * 20 + d) / (2 * d);
        format!("{}.{}", tenths / 10, tenths % 10)
    }

    /// Parses either exact form or a plain decimal such as `"1.5"`.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let (n, d) = (n.parse::<u64>().ok()?, d.parse::<u64>().ok()?);
            return (d != 0).then(|| Self(Ratio::new(n, d)));
        }
        match text.split_once('.') {
            None => text.parse::<u64>().ok().map(|n| Self(Ratio::from_integer(n))),
            Some((whole, frac)) => {
                if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                let scale = 10u64.pow(frac.len() as u32);
                let n = whole.parse::<u64>().ok()?.checked_mul(scale)?.checked_add(frac.parse().ok()?)?;
                Some(Self(Ratio::new(n, scale)))
            }
        }
    }
}

impl Serialize for Vulnerability {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.exact())
    }
}

impl<'de> Deserialize<'de> for Vulnerability {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Self::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("not a vulnerability value: `{text}`")))
    }
}

impl fmt::Display for Vulnerability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.one_decimal())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("scope is empty")]
    EmptyScope,
    #[error("unknown scope `{0}`")]
    UnknownScope(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Non-empty set of actors over which tables and argmax comparisons run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BTreeSet<ActorId>", try_from = "BTreeSet<ActorId>")]
pub struct Scope(BTreeSet<ActorId>);

impl From<Scope> for BTreeSet<ActorId> {
    fn from(scope: Scope) -> Self {
        scope.0
    }
}

impl TryFrom<BTreeSet<ActorId>> for Scope {
    type Error = MetricsError;

    fn try_from(set: BTreeSet<ActorId>) -> Result<Self, MetricsError> {
        if set.is_empty() {
            Err(MetricsError::EmptyScope)
        } else {
            Ok(Self(set))
        }
    }
}

impl Scope {
    pub fn new<I>(model: &SdModel, actors: I) -> Result<Self, MetricsError>
    where
        I: IntoIterator,
        I::Item: Into<ActorId>,
    {
        let set: BTreeSet<ActorId> = actors.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(MetricsError::EmptyScope);
        }
        if let Some(missing) = set.iter().find(|id| model.actor(id.as_str()).is_none()) {
            return Err(ModelError::UnknownActor(missing.clone()).into());
        }
        Ok(Self(set))
    }

    /// Every actor of the model.
    pub fn all(model: &SdModel) -> Result<Self, MetricsError> {
        Self::new(model, model.actor_ids().cloned())
    }

    /// A scope declared in the model, or `all`.
    pub fn named(model: &SdModel, name: &str) -> Result<Self, MetricsError> {
        if name == "all" {
            return Self::all(model);
        }
        let members = model.scope(name).ok_or_else(|| MetricsError::UnknownScope(name.to_owned()))?;
        Self::new(model, members.iter().cloned())
    }

    pub fn contains(&self, actor: &str) -> bool {
        self.0.contains(actor)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActorId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Same scope checked against another model with the same actor set.
    pub(crate) fn ensure_in(&self, model: &SdModel) -> Result<(), MetricsError> {
        match self.0.iter().find(|id| model.actor(id.as_str()).is_none()) {
            Some(missing) => Err(ModelError::UnknownActor(missing.clone()).into()),
            None => Ok(()),
        }
    }
}

/// One row of the combined vulnerability/criticality table. On the wire VM
/// is exact (`"3/2"`) with a rounded `vm_display` next to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RowWire", try_from = "RowWire")]
pub struct MetricsRow {
    pub actor: ActorId,
    pub out_deps: u64,
    pub dependees: u64,
    pub in_deps: u64,
    pub dependers: u64,
    pub vm: Vulnerability,
    pub cm: u64,
}

impl MetricsRow {
    pub fn from_profile(actor: ActorId, p: DegreeProfile) -> Self {
        Self {
            actor,
            out_deps: p.out_deps,
            dependees: p.dependees,
            in_deps: p.in_deps,
            dependers: p.dependers,
            vm: Vulnerability::from_counts(p.out_deps, p.dependees),
            cm: p.in_deps * p.dependers,
        }
    }

    pub fn profile(&self) -> DegreeProfile {
        DegreeProfile {
            out_deps: self.out_deps,
            dependees: self.dependees,
            in_deps: self.in_deps,
            dependers: self.dependers,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RowWire {
    actor: ActorId,
    out_deps: u64,
    dependees: u64,
    vm: Vulnerability,
    vm_display: String,
    in_deps: u64,
    dependers: u64,
    cm: u64,
}

impl From<MetricsRow> for RowWire {
    fn from(r: MetricsRow) -> Self {
        Self {
            vm_display: r.vm.one_decimal(),
            actor: r.actor,
            out_deps: r.out_deps,
            dependees: r.dependees,
            vm: r.vm,
            in_deps: r.in_deps,
            dependers: r.dependers,
            cm: r.cm,
        }
    }
}

impl TryFrom<RowWire> for MetricsRow {
    type Error = String;

    fn try_from(w: RowWire) -> Result<Self, String> {
        let row = MetricsRow {
            actor: w.actor,
            out_deps: w.out_deps,
            dependees: w.dependees,
            in_deps: w.in_deps,
            dependers: w.dependers,
            vm: w.vm,
            cm: w.cm,
        };
        let expected = MetricsRow::from_profile(row.actor.clone(), row.profile());
        if expected != row {
            return Err(format!("row for `{}` is inconsistent with its counts", row.actor));
        }
        Ok(row)
    }
}

pub fn vulnerability(model: &SdModel, actor: &str) -> Result<Vulnerability, ModelError> {
    let p = degree_profile(model, actor)?;
    Ok(Vulnerability::from_counts(p.out_deps, p.dependees))
}

pub fn criticality(model: &SdModel, actor: &str) -> Result<u64, ModelError> {
    let p = degree_profile(model, actor)?;
    Ok(p.in_deps * p.dependers)
}

/// One row per scoped actor, in actor id order.
pub fn metrics_table(model: &SdModel, scope: &Scope) -> Result<Vec<MetricsRow>, MetricsError> {
    scope.ensure_in(model)?;
    let mut profiles = degree_profiles(model);
    Ok(scope
        .iter()
        .map(|id| {
            let p = profiles.remove(id).unwrap_or_default();
            MetricsRow::from_profile(id.clone(), p)
        })
        .collect())
}

/// Argmax sets of VM and CM over a scope. Ties are kept.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Hotspots {
    pub most_vulnerable: BTreeSet<ActorId>,
    pub most_critical: BTreeSet<ActorId>,
}

impl Hotspots {
    pub fn from_rows(rows: &[MetricsRow]) -> Self {
        Self {
            most_vulnerable: argmax(rows, |r| r.vm),
            most_critical: argmax(rows, |r| r.cm),
        }
    }

    /// Every actor in either set, id order.
    pub fn actors(&self) -> BTreeSet<&ActorId> {
        self.most_vulnerable.iter().chain(&self.most_critical).collect()
    }
}

pub(crate) fn argmax<K: Ord + Copy>(rows: &[MetricsRow], key: impl Fn(&MetricsRow) -> K) -> BTreeSet<ActorId> {
    let Some(best) = rows.iter().map(&key).max() else {
        return BTreeSet::new();
    };
    rows.iter().filter(|r| key(r) == best).map(|r| r.actor.clone()).collect()
}

pub fn hotspots(model: &SdModel, scope: &Scope) -> Result<Hotspots, MetricsError> {
    Ok(Hotspots::from_rows(&metrics_table(model, scope)?))
}

/// Rows keyed by actor, for lookups.
pub fn index_rows(rows: &[MetricsRow]) -> BTreeMap<&ActorId, &MetricsRow> {
    rows.iter().map(|r| (&r.actor, r)).collect()
}
