//! Bundled example models.

use crate::delegation::DelegationMove;
use crate::dsl::parse_model;
use crate::model::SdModel;

/// Front-line services of a city civil registry office: 16 actors, 52
/// dependencies, with a `staff` scope over the nine front-line positions.
pub const CIVIL_REGISTRY: &str = include_str!("../../../fixtures/civil-registry.istar");

/// Two delegations: part of RO I's death registration work to Window 26,
/// and two of the verifier's outgoing dependencies to the ARO.
pub const CIVIL_REGISTRY_PLAN: &str = include_str!("../../../fixtures/proposal-plan.json");

/// A small birth registration service with one SR boundary.
pub const BIRTH_REGISTRATION: &str = include_str!("../../../fixtures/birth-registration.istar");

pub fn civil_registry() -> SdModel {
    parse_model(CIVIL_REGISTRY).expect("bundled model parses")
}

pub fn civil_registry_plan() -> Vec<DelegationMove> {
    crate::delegation::PlanFile::from_json(CIVIL_REGISTRY_PLAN).expect("bundled plan parses").moves
}

pub fn birth_registration() -> SdModel {
    parse_model(BIRTH_REGISTRATION).expect("bundled model parses")
}
