use std::fmt::Write;

use charter_deps_core::delegation::Plan;
use charter_deps_core::metrics::{Hotspots, MetricsRow};
use charter_deps_core::SdModel;

#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub color: bool,
}

impl Style {
    fn paint(self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    fn hot(self, text: &str) -> String {
        self.paint("1;31", text)
    }

    fn bad(self, text: &str) -> String {
        self.paint("33", text)
    }
}

const HEADER: [&str; 8] = ["actor", "out_deps", "dependees", "vm", "in_deps", "dependers", "cm", "hotspot"];

fn cells(row: &MetricsRow, hotspots: &Hotspots) -> [String; 8] {
    let mut marks = Vec::new();
    if hotspots.most_vulnerable.contains(&row.actor) {
        marks.push("VM");
    }
    if hotspots.most_critical.contains(&row.actor) {
        marks.push("CM");
    }
    [
        row.actor.to_string(),
        row.out_deps.to_string(),
        row.dependees.to_string(),
        row.vm.one_decimal(),
        row.in_deps.to_string(),
        row.dependers.to_string(),
        row.cm.to_string(),
        marks.join(" "),
    ]
}

/// Aligned metrics table; hotspot markers are highlighted when colored.
pub fn table(rows: &[MetricsRow], hotspots: &Hotspots, style: Style) -> String {
    let body: Vec<[String; 8]> = rows.iter().map(|r| cells(r, hotspots)).collect();
    let mut widths = HEADER.map(str::len);
    for cells in &body {
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String], paint: bool| {
        let mut parts = Vec::with_capacity(cells.len());
        for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
            parts.push(match i {
                0 => format!("{c:<w$}"),
                7 if paint && !c.is_empty() => style.hot(c),
                7 => c.clone(),
                _ => format!("{c:>w$}"),
            });
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &HEADER.map(str::to_owned), false);
    for cells in &body {
        line(&mut out, cells, true);
    }
    out
}

pub fn rank_csv(rows: &[MetricsRow], hotspots: &Hotspots) -> String {
    let mut out = String::from("set,actor,value\n");
    for row in rows {
        if hotspots.most_vulnerable.contains(&row.actor) {
            let _ = writeln!(out, "most_vulnerable,{},{}", row.actor, row.vm.one_decimal());
        }
    }
    for row in rows {
        if hotspots.most_critical.contains(&row.actor) {
            let _ = writeln!(out, "most_critical,{},{}", row.actor, row.cm);
        }
    }
    out
}

pub fn rank(model: &SdModel, rows: &[MetricsRow], hotspots: &Hotspots, style: Style) -> String {
    let name = |id: &str| model.actor(id).map(|a| a.name.as_str()).unwrap_or("");
    let width = rows.iter().map(|r| r.actor.as_str().len()).max().unwrap_or(0);
    let mut out = String::new();
    let mut section = |title: &str, picked: Vec<(&MetricsRow, String)>| {
        let _ = writeln!(out, "{title}");
        if picked.is_empty() {
            let _ = writeln!(out, "  (empty scope)");
        }
        for (row, value) in picked {
            let _ = writeln!(out, "  {}  {}  {}", style.hot(&format!("{:<width$}", row.actor.as_str())), value, name(row.actor.as_str()));
        }
    };
    section(
        "most vulnerable",
        rows.iter()
            .filter(|r| hotspots.most_vulnerable.contains(&r.actor))
            .map(|r| (r, format!("VM {}", r.vm.one_decimal())))
            .collect(),
    );
    section(
        "most critical",
        rows.iter()
            .filter(|r| hotspots.most_critical.contains(&r.actor))
            .map(|r| (r, format!("CM {}", r.cm)))
            .collect(),
    );
    out
}

/// Moves with verdicts, advisories, and the table after the plan.
pub fn plan(plan: &Plan, style: Style) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "moves: {}", plan.moves.len());
    for (i, (mv, verdict)) in plan.moves.iter().zip(&plan.verdicts).enumerate() {
        let status = if verdict.feasible {
            "feasible".to_owned()
        } else {
            let codes: Vec<&str> = verdict.reasons.iter().map(|r| r.code.as_str()).collect();
            style.bad(&format!("infeasible: {}", codes.join(", ")))
        };
        let skipped = if plan.skipped.contains(&i) { " (skipped)" } else { "" };
        let _ = writeln!(out, "  {i}  {} {} -> {}  {status}{skipped}", mv.dependency, mv.endpoint, mv.new_actor);
        if let Some(rationale) = &mv.rationale {
            let _ = writeln!(out, "     {rationale}");
        }
    }
    if !plan.advisories.is_empty() {
        let _ = writeln!(out, "advisories: {}", plan.advisories.len());
        for a in &plan.advisories {
            let _ = writeln!(out, "  {}: {}", style.hot(a.overloaded_actor.as_str()), a.reason);
        }
    }
    let _ = writeln!(out, "changes: {}", plan.changes.len());
    for c in plan.changes.iter() {
        let _ = writeln!(out, "  {} {}: {} -> {}", c.dependency, c.endpoint, c.from, c.to);
    }
    let _ = writeln!(out);
    out.push_str(&table(&plan.table_after, &plan.hotspots_after, style));
    out
}
