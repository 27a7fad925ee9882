//! Matching plans against enriched DNFs.
//!
//! An enriched DNF adds clauses of empty atoms to the minimal DNF. A plan
//! found by the search agrees with the minimal DNF on nonempty atoms, so it
//! is logically equivalent to exactly one enrichment: the one made of the
//! empty codes on which its expression is true.

use serde::Serialize;

use super::search::{search, SearchOptions};
use super::Plan;
use crate::atoms::{AtomCode, Decomposition};
use crate::capability::Mode;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentEntry {
    /// Empty codes united with the minimal DNF; empty for the minimal DNF.
    pub added: Vec<AtomCode>,
    /// Indices into [`EnrichmentReport::plans`] logically equivalent to it.
    pub plans: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentReport {
    pub empty_codes: Vec<AtomCode>,
    pub plans: Vec<Plan>,
    /// Enriched DNFs examined, smallest additions first.
    pub entries: Vec<EnrichmentEntry>,
    /// True when `budget` stopped the enumeration before all 2^e enrichments.
    pub truncated: bool,
    /// Plans equivalent to an enrichment but not to the minimal DNF on
    /// nonempty atoms. Always zero for plans produced by the search; kept as
    /// a cross-check.
    pub new_plans: usize,
}

/// Empty codes on which the plan's expression holds.
fn enrichment_of(plan: &Plan, empty: &[AtomCode]) -> Vec<AtomCode> {
    empty
        .iter()
        .copied()
        .filter(|c| {
            let mut v = false;
            for s in &plan.steps {
                let bit = c.has(s.primitive - 1);
                v = match s.mode {
                    Mode::Am => v || bit,
                    Mode::Sm => v && !bit,
                };
            }
            v
        })
        .collect()
}

/// Examines up to `budget` enriched DNFs, smallest first, and lists which
/// of the searched plans each one is logically equivalent to.
pub fn enrich_and_match(d: &Decomposition, budget: usize, options: &SearchOptions) -> Result<EnrichmentReport> {
    let empty = d.empty_codes()?;
    let plans = search(d, options)?;
    let mask = d.target_mask();
    let signatures: Vec<Vec<AtomCode>> = plans.iter().map(|p| enrichment_of(p, &empty)).collect();

    let space = super::AtomSpace::new(d);
    let new_plans = plans
        .iter()
        .filter(|p| (0..space.len()).any(|k| p.final_state().contains(k) != mask.contains(&space.atom(k).code)))
        .count();

    let e = empty.len();
    let total = if e >= 63 { usize::MAX } else { 1usize << e };
    let mut entries = Vec::new();
    'sizes: for size in 0..=e {
        for combo in Combinations::new(e, size) {
            if entries.len() >= budget {
                break 'sizes;
            }
            let added: Vec<AtomCode> = combo.iter().map(|&i| empty[i]).collect();
            let matched = signatures.iter().enumerate().filter(|(_, s)| **s == added).map(|(i, _)| i).collect();
            entries.push(EnrichmentEntry { added, plans: matched });
        }
    }
    let truncated = entries.len() < total;
    Ok(EnrichmentReport { empty_codes: empty, plans, entries, truncated, new_plans })
}

/// k-subsets of 0..n in lexicographic order.
struct Combinations {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations { n, cur: (k <= n).then(|| (0..k).collect()) }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.cur = Some(next);
                break;
            }
        }
        Some(out)
    }
}
