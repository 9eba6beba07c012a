use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Endpoint;
use crate::model::{ActorId, DependencyId, SdModel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EndpointChange {
    pub dependency: DependencyId,
    pub endpoint: Endpoint,
    pub from: ActorId,
    pub to: ActorId,
}

/// Endpoint changes between two versions of a model, in dependency id order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChangeReport(pub Vec<EndpointChange>);

impl ChangeReport {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EndpointChange> {
        self.0.iter()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("actor sets differ")]
    ActorSetMismatch,
    #[error("dependency `{0}` exists in only one model")]
    DependencyMismatch(DependencyId),
}

pub fn diff(before: &SdModel, after: &SdModel) -> Result<ChangeReport, DiffError> {
    if !before.actor_ids().eq(after.actor_ids()) {
        return Err(DiffError::ActorSetMismatch);
    }
    if let Some(d) = after.dependencies().find(|d| before.dependency(d.id.as_str()).is_none()) {
        return Err(DiffError::DependencyMismatch(d.id.clone()));
    }
    let mut changes = Vec::new();
    for old in before.dependencies() {
        let new = after
            .dependency(old.id.as_str())
            .ok_or_else(|| DiffError::DependencyMismatch(old.id.clone()))?;
        let pairs = [(Endpoint::Depender, &old.depender, &new.depender), (Endpoint::Dependee, &old.dependee, &new.dependee)];
        for (endpoint, from, to) in pairs {
            if from != to {
                changes.push(EndpointChange { dependency: old.id.clone(), endpoint, from: from.clone(), to: to.clone() });
            }
        }
    }
    Ok(ChangeReport(changes))
}
