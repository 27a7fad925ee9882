//! Stage reports, as JSON and as plain-text tables.

use std::fmt::Write as _;

use hybridplan::atoms::{Classification, Decomposition, Verdict, ViolationReason};
use hybridplan::planner::{verify_plan_geometric, AtomSpace, EnrichmentReport, Plan};
use hybridplan::{Mode, Primitive};
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Serialize)]
pub struct PrimitiveRow {
    pub symbol: String,
    pub name: String,
    pub mode: Mode,
    pub rate: f64,
    pub raw_stock: bool,
    pub voxels: usize,
    pub volume_mm3: f64,
}

pub fn primitive_rows(prims: &[Primitive]) -> Vec<PrimitiveRow> {
    prims
        .iter()
        .map(|p| PrimitiveRow {
            symbol: p.symbol(),
            name: p.name.clone(),
            mode: p.mode,
            rate: p.rate,
            raw_stock: p.is_raw_stock,
            voxels: p.solid.count(),
            volume_mm3: p.solid.measure(),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct DecompositionReport {
    pub primitives: usize,
    pub nonempty_atoms: usize,
    pub inside: usize,
    pub outside: usize,
    pub partial: usize,
    pub partial_tolerable: usize,
    /// Listed only for up to 24 primitives.
    pub empty_codes: Option<Vec<String>>,
}

pub fn decomposition_report(d: &Decomposition) -> DecompositionReport {
    let count = |c| d.atoms().iter().filter(|a| a.classification == Some(c)).count();
    DecompositionReport {
        primitives: d.n(),
        nonempty_atoms: d.atoms().len(),
        inside: count(Classification::Inside),
        outside: count(Classification::Outside),
        partial: count(Classification::Partial),
        partial_tolerable: count(Classification::PartialTolerable),
        empty_codes: d.empty_codes().ok().map(|v| v.iter().map(|c| c.to_string()).collect()),
    }
}

#[derive(Debug, Serialize)]
pub struct ViolationRow {
    pub code: String,
    pub reason: ViolationReason,
    pub voxels: usize,
    pub inside_mm3: f64,
    pub outside_mm3: f64,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub manufacturable_candidate: bool,
    pub tolerance_mm: f64,
    pub target_mask: Vec<String>,
    pub violations: Vec<ViolationRow>,
}

pub fn check_report(d: &Decomposition, verdict: &Verdict) -> CheckReport {
    let violations = match verdict {
        Verdict::Candidate => Vec::new(),
        Verdict::NotManufacturable(v) => v
            .iter()
            .map(|v| {
                let a = d.atom(v.code).expect("violations name existing atoms");
                ViolationRow {
                    code: v.code.to_string(),
                    reason: v.reason,
                    voxels: a.voxel_count,
                    inside_mm3: a.inside_overlap,
                    outside_mm3: a.outside_overlap,
                }
            })
            .collect(),
    };
    CheckReport {
        manufacturable_candidate: verdict.is_candidate(),
        tolerance_mm: d.tolerance().unwrap_or(0.0),
        target_mask: d.target_mask().iter().map(|c| c.to_string()).collect(),
        violations,
    }
}

#[derive(Debug, Serialize)]
pub struct StepRow {
    pub primitive: String,
    pub name: String,
    pub mode: Mode,
    pub volume_mm3: f64,
    pub cost: f64,
}

#[derive(Debug, Serialize)]
pub struct PlanRow {
    pub rank: usize,
    pub expression: String,
    pub cost: f64,
    pub normalized_cost: f64,
    pub steps: Vec<StepRow>,
}

pub fn plan_rows(plans: &[Plan], prims: &[Primitive]) -> Vec<PlanRow> {
    plans
        .iter()
        .enumerate()
        .map(|(i, p)| PlanRow {
            rank: i + 1,
            expression: p.expression().to_string(),
            cost: p.cost,
            normalized_cost: p.normalized_cost,
            steps: p
                .steps
                .iter()
                .map(|s| StepRow {
                    primitive: format!("P{}", s.primitive),
                    name: prims[s.primitive - 1].name.clone(),
                    mode: s.mode,
                    volume_mm3: s.volume,
                    cost: s.cost,
                })
                .collect(),
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct VerifyRow {
    pub rank: usize,
    pub expression: String,
    /// Voxel evaluation equals the union of the plan's symbolic atoms.
    pub symbolic_matches_geometric: bool,
    /// Voxel evaluation equals the union of the target atoms.
    pub reaches_target: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub all_passed: bool,
    pub plans: Vec<VerifyRow>,
}

pub fn verify_report(plans: &[Plan], d: &Decomposition) -> Result<VerifyReport> {
    let space = AtomSpace::new(d);
    let mut rows = Vec::new();
    for (i, p) in plans.iter().enumerate() {
        let solid = hybridplan::planner::evaluate_geometric(d.primitives(), &p.sequence())?;
        let symbolic = space.evaluate(&p.sequence())?;
        rows.push(VerifyRow {
            rank: i + 1,
            expression: p.expression().to_string(),
            symbolic_matches_geometric: solid == space.state_solid(&symbolic),
            reaches_target: verify_plan_geometric(p, d)?,
        });
    }
    Ok(VerifyReport { all_passed: rows.iter().all(|r| r.symbolic_matches_geometric && r.reaches_target), plans: rows })
}

#[derive(Debug, Serialize)]
pub struct EnrichmentRow {
    pub added: Vec<String>,
    pub plan_ranks: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct EnrichmentSummary {
    pub empty_codes: Vec<String>,
    pub examined: usize,
    pub truncated: bool,
    pub new_plans: usize,
    /// Enrichments that at least one plan is logically equivalent to.
    pub matched: Vec<EnrichmentRow>,
}

pub fn enrichment_summary(r: &EnrichmentReport) -> EnrichmentSummary {
    EnrichmentSummary {
        empty_codes: r.empty_codes.iter().map(|c| c.to_string()).collect(),
        examined: r.entries.len(),
        truncated: r.truncated,
        new_plans: r.new_plans,
        matched: r
            .entries
            .iter()
            .filter(|e| !e.plans.is_empty())
            .map(|e| EnrichmentRow {
                added: e.added.iter().map(|c| c.to_string()).collect(),
                plan_ranks: e.plans.iter().map(|i| i + 1).collect(),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct FullReport {
    pub primitives: Vec<PrimitiveRow>,
    pub decomposition: DecompositionReport,
    pub check: CheckReport,
    pub plans: Vec<PlanRow>,
    pub planning_error: Option<String>,
    pub verify: Option<VerifyReport>,
    pub enrichment: Option<EnrichmentSummary>,
}

/// JSON with an optional `generated_at` (Unix seconds) on top.
pub fn to_json(report: &impl Serialize, timestamp: Option<u64>) -> Result<String> {
    let mut v = serde_json::to_value(report)?;
    if let (Some(t), Some(obj)) = (timestamp, v.as_object_mut()) {
        obj.insert("generated_at".into(), t.into());
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn primitives_text(rows: &[PrimitiveRow]) -> String {
    let mut s =
        format!("{:<6} {:<24} {:<4} {:>6} {:>10} {:>12}\n", "prim", "name", "mode", "rate", "voxels", "volume_mm3");
    for r in rows {
        let name = if r.raw_stock { format!("{} (stock)", r.name) } else { r.name.clone() };
        let _ = writeln!(
            s,
            "{:<6} {:<24} {:<4} {:>6.2} {:>10} {:>12.3}",
            r.symbol, name, r.mode, r.rate, r.voxels, r.volume_mm3
        );
    }
    s
}

pub fn check_text(r: &CheckReport) -> String {
    let mut s = String::new();
    if r.manufacturable_candidate {
        let _ = writeln!(s, "candidate: no atom violates the tolerance of {} mm", r.tolerance_mm);
    } else {
        let _ = writeln!(
            s,
            "not manufacturable: {} violating atom(s) at tolerance {} mm",
            r.violations.len(),
            r.tolerance_mm
        );
        for v in &r.violations {
            let why = match v.reason {
                ViolationReason::Partial => "straddles the target",
                ViolationReason::Undepositable => "needed but outside every AM primitive",
            };
            let _ = writeln!(
                s,
                "  A_{}  {}  voxels {}  inside {:.3} mm3  outside {:.3} mm3",
                v.code, why, v.voxels, v.inside_mm3, v.outside_mm3
            );
        }
    }
    let _ = writeln!(s, "target atoms: {}", r.target_mask.join(" "));
    s
}

pub fn plans_text(rows: &[PlanRow]) -> String {
    let mut s = String::new();
    for p in rows {
        let _ = writeln!(s, "plan {}  cost {:.4}  normalized {:.6}", p.rank, p.cost, p.normalized_cost);
        let _ = writeln!(s, "  {}", p.expression);
        let _ = writeln!(
            s,
            "  {:<4} {:<6} {:<24} {:<4} {:>12} {:>12}",
            "step", "action", "name", "mode", "volume_mm3", "cost"
        );
        for (i, st) in p.steps.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {:<4} {:<6} {:<24} {:<4} {:>12.3} {:>12.4}",
                i + 1,
                st.primitive,
                st.name,
                st.mode,
                st.volume_mm3,
                st.cost
            );
        }
    }
    if rows.is_empty() {
        s.push_str("no plans\n");
    }
    s
}

pub fn verify_text(r: &VerifyReport) -> String {
    let mut s = String::new();
    for p in &r.plans {
        let ok = p.symbolic_matches_geometric && p.reaches_target;
        let _ = writeln!(s, "plan {}  {}  {}", p.rank, if ok { "ok" } else { "MISMATCH" }, p.expression);
    }
    let _ = writeln!(s, "{}", if r.all_passed { "all plans verified" } else { "verification failed" });
    s
}

pub fn full_text(r: &FullReport) -> String {
    let mut s = String::from("== primitives\n");
    s += &primitives_text(&r.primitives);
    let d = &r.decomposition;
    s += "\n== decomposition\n";
    let _ = writeln!(
        s,
        "{} nonempty atoms over {} primitives: {} inside, {} outside, {} partial, {} tolerable",
        d.nonempty_atoms, d.primitives, d.inside, d.outside, d.partial, d.partial_tolerable
    );
    if let Some(e) = &d.empty_codes {
        let _ = writeln!(s, "empty codes ({}): {}", e.len(), e.join(" "));
    }
    s += "\n== check\n";
    s += &check_text(&r.check);
    s += "\n== plans\n";
    if let Some(e) = &r.planning_error {
        let _ = writeln!(s, "planning failed: {e}");
    } else {
        s += &plans_text(&r.plans);
    }
    if let Some(v) = &r.verify {
        s += "\n== verify\n";
        s += &verify_text(v);
    }
    if let Some(e) = &r.enrichment {
        s += "\n== enrichment\n";
        let _ = writeln!(
            s,
            "{} empty codes, {} enriched DNFs examined{}, {} new plans",
            e.empty_codes.len(),
            e.examined,
            if e.truncated { " (budget reached)" } else { "" },
            e.new_plans
        );
        for m in &e.matched {
            let added = if m.added.is_empty() { "minimal DNF".to_string() } else { format!("+ {}", m.added.join(" ")) };
            let ranks: Vec<String> = m.plan_ranks.iter().map(|r| r.to_string()).collect();
            let _ = writeln!(s, "  {added}: plans {}", ranks.join(", "));
        }
    }
    s
}
