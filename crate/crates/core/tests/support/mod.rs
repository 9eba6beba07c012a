//! Random multigraphs, brute-force oracles and property checks shared by the
//! property tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::sample::Index;
use proptest::test_runner::TestCaseError;

use charter_deps_core::delegation::{
    apply_move, check_feasibility, diff, evaluate_plan, recommend, DelegationMove, Endpoint, Policy, ReasonCode,
    RecommendConfig,
};
use charter_deps_core::export::{metrics_csv, to_dot, ExportFormat, ExportOptions};
use charter_deps_core::metrics::{metrics_table, Hotspots, MetricsRow, Scope};
use charter_deps_core::model::{degree_profiles, ActorKind, ElementKind};
use charter_deps_core::{parse_model, serialize_model, structured, Actor, Dependency, Dependum, SdModel};

pub const TAGS: [&str; 4] = ["svc-a", "svc-b", "svc-c", "svc-d"];
const KINDS: [ElementKind; 4] = [ElementKind::Goal, ElementKind::Softgoal, ElementKind::Task, ElementKind::Resource];
const ACTOR_KINDS: [ActorKind; 4] = ActorKind::ALL;

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 #\"\\\\é_.\\-]{0,6}|[a-z]{1,4}\n[a-z]{0,3}"
}

fn tag_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set(prop::sample::select(&TAGS[..]).prop_map(String::from), 0..=2)
}

#[derive(Debug, Clone)]
struct EdgeSpec {
    from: usize,
    offset: usize,
    kind: usize,
    name: String,
    tags: BTreeSet<String>,
}

/// Valid models with up to `max_actors` actors and `max_edges` dependencies.
/// Parallel edges are common; self-loops never occur.
pub fn model(max_actors: usize, max_edges: usize) -> impl Strategy<Value = SdModel> {
    (1..=max_actors)
        .prop_flat_map(move |n| {
            let actors = prop::collection::vec((text(), tag_set(), 0..ACTOR_KINDS.len()), n);
            let edge_count = if n < 2 { 0..=0 } else { 0..=max_edges };
            let edges = prop::collection::vec(
                (0..n, 1..n.max(2), 0..KINDS.len(), text(), tag_set()).prop_map(|(from, offset, kind, name, tags)| {
                    EdgeSpec { from, offset, kind, name, tags }
                }),
                edge_count,
            );
            let scope = prop::collection::btree_set(0..n, 0..=n);
            (Just(n), text(), actors, edges, scope)
        })
        .prop_map(|(n, name, actors, edges, scope)| {
            let mut m = SdModel::new(format!("m {name}"));
            for (i, (base, tags, kind)) in actors.into_iter().enumerate() {
                let actor = Actor::new(format!("a{i}"), format!("{base} {i}")).with_kind(ACTOR_KINDS[kind]).with_tags(tags);
                m.add_actor(actor).unwrap();
            }
            for (i, e) in edges.into_iter().enumerate() {
                let to = (e.from + e.offset) % n;
                let dependum = Dependum::new(KINDS[e.kind], format!("g{}", e.name)).with_tags(e.tags);
                m.add_dependency(Dependency::new(format!("e{i}"), format!("a{}", e.from), format!("a{to}"), dependum))
                    .unwrap();
            }
            if !scope.is_empty() {
                m.add_scope("grp", scope.into_iter().map(|i| charter_deps_core::ActorId::new(format!("a{i}")))).unwrap();
            }
            m
        })
}

/// A move drawn over the model's dependencies and actors. Not necessarily
/// valid.
pub fn pick_move(model: &SdModel, dep: Index, depender: bool, actor: Index) -> Option<DelegationMove> {
    if model.dependency_count() == 0 {
        return None;
    }
    let dep = model.dependencies().nth(dep.index(model.dependency_count())).unwrap();
    let actor = model.actor_ids().nth(actor.index(model.actor_count())).unwrap();
    let endpoint = if depender { Endpoint::Depender } else { Endpoint::Dependee };
    Some(DelegationMove::new(dep.id.clone(), endpoint, actor.clone()))
}

/// Runner settings without on-disk failure persistence.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

pub fn moves() -> impl Strategy<Value = Vec<(Index, bool, Index)>> {
    prop::collection::vec((any::<Index>(), any::<bool>(), any::<Index>()), 0..6)
}

/// Degree counts by direct scanning of the edge list, without any of the
/// library's helpers.
pub fn naive_counts(model: &SdModel, actor: &str) -> (u64, u64, u64, u64) {
    let mut out = 0;
    let mut dependees = Vec::new();
    let mut inc = 0;
    let mut dependers = Vec::new();
    for d in model.dependencies() {
        if d.depender.as_str() == actor {
            out += 1;
            if !dependees.contains(&d.dependee) {
                dependees.push(d.dependee.clone());
            }
        }
        if d.dependee.as_str() == actor {
            inc += 1;
            if !dependers.contains(&d.depender) {
                dependers.push(d.depender.clone());
            }
        }
    }
    (out, dependees.len() as u64, inc, dependers.len() as u64)
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

fn all(model: &SdModel) -> Scope {
    Scope::all(model).unwrap()
}

/// Table values equal brute-force counts; VM compared by cross
/// multiplication, CM exactly.
pub fn check_metric_oracle(model: &SdModel) -> Result<(), TestCaseError> {
    let rows = metrics_table(model, &all(model)).unwrap();
    ensure(rows.len() == model.actor_count(), || "one row per actor".into())?;
    for row in &rows {
        let (out, dependees, inc, dependers) = naive_counts(model, row.actor.as_str());
        ensure((row.out_deps, row.dependees, row.in_deps, row.dependers) == (out, dependees, inc, dependers), || {
            format!("counts for {}", row.actor)
        })?;
        let vm_ok = if out == 0 {
            row.vm.numer() == 0
        } else {
            row.vm.numer() * dependees == out * row.vm.denom()
        };
        ensure(vm_ok, || format!("vm for {}: {} vs {out}/{dependees}", row.actor, row.vm.exact()))?;
        ensure(row.cm == inc * dependers, || format!("cm for {}", row.actor))?;
    }
    Ok(())
}

/// Scoping filters rows and never changes their values.
pub fn check_scope_filter(model: &SdModel) -> Result<(), TestCaseError> {
    let Some(members) = model.scope("grp") else { return Ok(()) };
    let full = metrics_table(model, &all(model)).unwrap();
    let scoped = metrics_table(model, &Scope::named(model, "grp").unwrap()).unwrap();
    let filtered: Vec<MetricsRow> = full.into_iter().filter(|r| members.contains(&r.actor)).collect();
    ensure(scoped == filtered, || "scoped table differs from filtered full table".into())
}

pub fn check_round_trips(model: &SdModel) -> Result<(), TestCaseError> {
    let text = serialize_model(model).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
    ensure(back == *model, || format!("DSL round trip changed the model:\n{text}"))?;
    ensure(serialize_model(&back).unwrap() == text, || "DSL text not stable".into())?;
    let json = structured::to_json(model);
    let back = structured::from_json(&json).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    ensure(back == *model, || "structured round trip changed the model".into())?;
    ensure(structured::to_json(&back) == json, || "structured text not stable".into())
}

/// Conservation, two-row locality and a one-entry diff for a single move.
pub fn check_move(model: &SdModel, mv: &DelegationMove) -> Result<(), TestCaseError> {
    let dep = model.dependency(mv.dependency.as_str()).unwrap();
    let (holder, other) = match mv.endpoint {
        Endpoint::Depender => (dep.depender.clone(), dep.dependee.clone()),
        Endpoint::Dependee => (dep.dependee.clone(), dep.depender.clone()),
    };
    let Ok(next) = apply_move(model, mv) else {
        ensure(mv.new_actor == holder || mv.new_actor == other, || "valid move rejected".into())?;
        return Ok(());
    };
    ensure(next.dependency_count() == model.dependency_count(), || "dependency count changed".into())?;
    ensure(next.actors().eq(model.actors()), || "actor set changed".into())?;
    for d in model.dependencies() {
        let n = next.dependency(d.id.as_str()).unwrap();
        ensure(n.dependum == d.dependum, || format!("dependum of {} changed", d.id))?;
    }
    let total = |m: &SdModel| m.dependencies().count();
    ensure(total(&next) == total(model), || "edge total changed".into())?;

    let before = degree_profiles(model);
    let after = degree_profiles(&next);
    let mut changed = BTreeSet::new();
    for (id, p) in &before {
        let q = &after[id];
        if p == q {
            continue;
        }
        changed.insert(id.clone());
        if *id == other {
            ensure(p.out_deps == q.out_deps && p.in_deps == q.in_deps, || {
                "fixed endpoint's edge counts changed".into()
            })?;
        } else {
            ensure(*id == holder || *id == mv.new_actor, || format!("bystander {id} changed"))?;
        }
    }
    ensure(changed.contains(&holder) && changed.contains(&mv.new_actor), || "endpoint rows unchanged".into())?;
    let (b, a) = (&before[&holder], &after[&holder]);
    ensure(b.out_deps + b.in_deps == a.out_deps + a.in_deps + 1, || "holder lost other than one edge".into())?;
    let out_sum = |m: &BTreeMap<_, charter_deps_core::model::DegreeProfile>| m.values().map(|p| p.out_deps).sum::<u64>();
    ensure(out_sum(&before) == out_sum(&after), || "sum of out_deps changed".into())?;

    let report = diff(model, &next).unwrap();
    ensure(report.len() == 1, || format!("expected one change, got {}", report.len()))?;
    let model_again = apply_move(model, mv).unwrap();
    ensure(model_again == next, || "apply_move not deterministic".into())
}

/// The vulnerability and criticality guards fire exactly when the receiver
/// enters the argmax set.
pub fn check_guard(model: &SdModel, mv: &DelegationMove) -> Result<(), TestCaseError> {
    let Ok(next) = apply_move(model, mv) else { return Ok(()) };
    let scope = all(model);
    let verdict = check_feasibility(model, &scope, mv, &Policy::default()).unwrap();
    let pre = Hotspots::from_rows(&metrics_table(model, &scope).unwrap());
    let post = Hotspots::from_rows(&metrics_table(&next, &scope).unwrap());
    let r = &mv.new_actor;
    let enters_vm = post.most_vulnerable.contains(r) && !pre.most_vulnerable.contains(r);
    let enters_cm = post.most_critical.contains(r) && !pre.most_critical.contains(r);
    ensure(verdict.has(ReasonCode::CreatesMostVulnerable) == enters_vm, || "vm guard mismatch".into())?;
    ensure(verdict.has(ReasonCode::CreatesMostCritical) == enters_cm, || "cm guard mismatch".into())?;
    ensure(verdict.feasible == verdict.reasons.is_empty(), || "feasible iff no reasons".into())
}

/// Plan replay agrees with folding the applied moves by hand, and the
/// non-skipping policy agrees on all-feasible plans.
pub fn check_plan(model: &SdModel, moves: &[DelegationMove]) -> Result<(), TestCaseError> {
    let scope = all(model);
    let policy = Policy::default();
    let plan = evaluate_plan(model, &scope, moves, &policy).unwrap();
    ensure(plan.verdicts.len() == moves.len(), || "verdicts misaligned".into())?;
    let mut folded = model.clone();
    for (i, mv) in moves.iter().enumerate() {
        if !plan.skipped.contains(&i) {
            folded = apply_move(&folded, mv).unwrap();
        }
    }
    ensure(plan.table_after == metrics_table(&folded, &scope).unwrap(), || "table_after mismatch".into())?;
    ensure(plan.table_before == metrics_table(model, &scope).unwrap(), || "table_before mismatch".into())?;
    if plan.all_feasible() {
        let forced = evaluate_plan(model, &scope, moves, &Policy { skip_infeasible: false, ..policy }).unwrap();
        ensure(forced == plan, || "skip policy changed an all-feasible plan".into())?;
    }
    if moves.is_empty() {
        ensure(plan.table_after == plan.table_before, || "empty plan changed the table".into())?;
    }
    Ok(())
}

/// Recommend never worsens max VM or max CM and every move it returns
/// passes its own feasibility check when replayed.
pub fn check_recommend(model: &SdModel) -> Result<(), TestCaseError> {
    let scope = all(model);
    let config = RecommendConfig::default();
    let plan = recommend(model, &scope, &config).unwrap();
    let max_vm = |rows: &[MetricsRow]| rows.iter().map(|r| r.vm).max();
    let max_cm = |rows: &[MetricsRow]| rows.iter().map(|r| r.cm).max();
    ensure(max_vm(&plan.table_after) <= max_vm(&plan.table_before), || "max VM increased".into())?;
    ensure(max_cm(&plan.table_after) <= max_cm(&plan.table_before), || "max CM increased".into())?;
    ensure(plan.moves.len() <= config.max_moves, || "too many moves".into())?;
    let mut current = model.clone();
    for mv in &plan.moves {
        let v = check_feasibility(&current, &scope, mv, &config.policy).unwrap();
        ensure(v.feasible, || format!("recommended move {mv:?} is infeasible: {:?}", v.reasons))?;
        current = apply_move(&current, mv).unwrap();
    }
    ensure(metrics_table(&current, &scope).unwrap() == plan.table_after, || "replay differs".into())?;
    for advisory in &plan.advisories {
        ensure(
            plan.hotspots_after.most_vulnerable.contains(&advisory.overloaded_actor)
                || plan.hotspots_after.most_critical.contains(&advisory.overloaded_actor),
            || "advisory for a non-hotspot".into(),
        )?;
    }
    Ok(())
}

/// Exports are pure: repeated calls give identical bytes. The CSV parses
/// back to the same numbers.
pub fn check_exports(model: &SdModel) -> Result<(), TestCaseError> {
    let scope = all(model);
    for compact in [false, true] {
        let options = ExportOptions { compact, include_sr: true, ..ExportOptions::new(ExportFormat::Dot) };
        let a = to_dot(model, &options).unwrap();
        ensure(a == to_dot(model, &options).unwrap(), || "dot not deterministic".into())?;
        ensure(a.starts_with("digraph ") && a.ends_with("}\n"), || "dot framing".into())?;
    }
    let rows = metrics_table(model, &scope).unwrap();
    let csv_text = metrics_csv(&rows);
    ensure(csv_text == metrics_csv(&rows), || "csv not deterministic".into())?;
    ensure(!csv_text.contains('\r'), || "csv uses CR".into())?;
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    ensure(records.len() == rows.len(), || "csv line count".into())?;
    for (rec, row) in records.iter().zip(&rows) {
        let num = |i: usize| rec[i].parse::<u64>().unwrap();
        ensure(&rec[0] == row.actor.as_str(), || "csv actor".into())?;
        ensure(
            (num(1), num(2), num(4), num(5), num(6)) == (row.out_deps, row.dependees, row.in_deps, row.dependers, row.cm),
            || "csv counts".into(),
        )?;
        let vm: f64 = rec[3].parse().unwrap();
        ensure((vm - row.vm.to_f64()).abs() <= 0.05 + 1e-9, || "csv vm".into())?;
    }
    let json = structured::to_json(model);
    ensure(json == structured::to_json(model), || "json not deterministic".into())
}
