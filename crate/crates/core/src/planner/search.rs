//! k-best best-first search over action sequences.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{AtomSpace, Plan, State};
use crate::atoms::Decomposition;
use crate::capability::Mode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchOptions {
    pub k_best: usize,
    /// Longest plan considered.
    pub max_depth: usize,
    /// Node expansion budget.
    pub max_expansions: usize,
    /// Plan even when the atom test reports violations.
    pub allow_not_manufacturable: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { k_best: 6, max_depth: 8, max_expansions: 1_000_000, allow_not_manufacturable: false }
    }
}

struct Node {
    f: f64,
    g: f64,
    seq: Vec<usize>,
    state: State,
    /// State before the last action.
    prev: State,
}

impl Node {
    fn key(&self) -> (f64, &[usize]) {
        (self.f, &self.seq)
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // lower f, then lexicographically smaller sequence (a prefix sorts first)
    fn cmp(&self, other: &Self) -> Ordering {
        let (fa, sa) = self.key();
        let (fb, sb) = other.key();
        fa.total_cmp(&fb).then_with(|| sa.cmp(sb))
    }
}

/// Lower bound on the remaining cost: each wrong atom must be toggled at
/// least once more, by a primitive of the right mode that contains it.
struct Heuristic {
    /// Cheapest AM rate × volume per atom.
    add: Vec<f64>,
    /// Cheapest SM rate × volume per atom.
    remove: Vec<f64>,
}

impl Heuristic {
    fn new(space: &AtomSpace) -> Self {
        let m = space.len();
        let mut add = vec![f64::INFINITY; m];
        let mut remove = vec![f64::INFINITY; m];
        for a in space.actions() {
            let slot = if a.mode == Mode::Am { &mut add } else { &mut remove };
            for k in a.mask.ones() {
                slot[k] = slot[k].min(a.rate);
            }
        }
        for k in 0..m {
            add[k] *= space.volumes()[k];
            remove[k] *= space.volumes()[k];
        }
        Heuristic { add, remove }
    }

    fn eval(&self, s: &State, target: &State) -> f64 {
        let mut h = 0.0;
        for k in s.0.symmetric_difference(&target.0) {
            h += if target.contains(k) { self.add[k] } else { self.remove[k] };
        }
        h
    }
}

/// Whether two same-mode actions applied from `prev` commute with equal
/// costs: their effective masks there do not overlap.
fn commute(prev: &State, mode: Mode, a: &State, b: &State) -> bool {
    let mut both = a.0.clone();
    both.intersect_with(&b.0);
    match mode {
        Mode::Sm => both.is_disjoint(&prev.0),
        Mode::Am => both.is_subset(&prev.0),
    }
}

/// Up to `k_best` cheapest valid plans reaching the target mask exactly,
/// cheapest first.
///
/// Adjacent same-mode actions that commute are only explored in increasing
/// id order, so plans differing by such a swap are reported once. Plans
/// never pass through the target before their last action.
pub fn search(d: &Decomposition, options: &SearchOptions) -> Result<Vec<Plan>> {
    if options.k_best == 0 || options.max_depth == 0 {
        return Err(Error::InvalidArgument("k_best and max_depth must be positive".into()));
    }
    if !options.allow_not_manufacturable && !d.manufacturability_test()?.is_candidate() {
        return Err(Error::NotManufacturable);
    }
    let space = AtomSpace::new(d);
    let target = space.target()?.clone();
    if target.is_empty() {
        return Err(Error::InvalidArgument("target contains no atom".into()));
    }
    if space.unreachable > 0 {
        return Err(Error::PlanImpossible);
    }
    let h = Heuristic::new(&space);
    let start = space.start();
    let h0 = h.eval(&start, &target);
    if h0.is_infinite() {
        return Err(Error::PlanImpossible);
    }

    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Node { f: h0, g: 0.0, seq: Vec::new(), state: start.clone(), prev: start }));
    let mut pops: HashMap<(State, State, usize), usize> = HashMap::new();
    let mut plans = Vec::new();
    let mut expansions = 0;
    let mut truncated = false;

    while let Some(Reverse(node)) = heap.pop() {
        if !node.seq.is_empty() && node.state == target {
            plans.push(Plan::from_sequence(&space, &node.seq)?);
            if plans.len() == options.k_best {
                break;
            }
            continue;
        }
        let last = node.seq.last().copied().unwrap_or(0);
        let seen = pops.entry((node.state.clone(), node.prev.clone(), last)).or_default();
        if *seen >= options.k_best {
            continue;
        }
        *seen += 1;
        if node.seq.len() >= options.max_depth {
            truncated = true;
            continue;
        }
        if expansions >= options.max_expansions {
            truncated = true;
            break;
        }
        expansions += 1;

        for a in space.actions() {
            if node.seq.is_empty() {
                if a.mode != Mode::Am {
                    continue;
                }
            } else if a.is_raw_stock || a.primitive == last {
                continue;
            }
            let cost: f64 = a.rate * node.state.toggled_by(a).map(|k| space.volumes()[k]).sum::<f64>();
            if cost <= 0.0 {
                continue;
            }
            if last != 0 {
                let la = &space.actions()[last - 1];
                if la.mode == a.mode && a.primitive < last && commute(&node.prev, a.mode, &la.mask, &a.mask) {
                    continue;
                }
            }
            let next = node.state.apply(a);
            let hn = h.eval(&next, &target);
            if hn.is_infinite() {
                continue;
            }
            let g = node.g + cost;
            let mut seq = node.seq.clone();
            seq.push(a.primitive);
            heap.push(Reverse(Node { f: g + hn, g, seq, state: next, prev: node.state.clone() }));
        }
    }

    if plans.is_empty() {
        let impossible = !truncated || reachable(&space, &target, options.max_expansions) == Some(false);
        return Err(if impossible {
            Error::PlanImpossible
        } else {
            Error::NotFoundWithinBounds { max_depth: options.max_depth, expansions }
        });
    }
    Ok(plans)
}

/// Whether any valid plan of any length reaches `target`, by exhaustive
/// search over states. `None` when more than `limit` states are visited.
fn reachable(space: &AtomSpace, target: &State, limit: usize) -> Option<bool> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = std::collections::VecDeque::new();
    for a in space.actions().iter().filter(|a| a.mode == Mode::Am) {
        let s = space.start().apply(a);
        if seen.insert(s.clone()) {
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        if s == *target {
            return Some(true);
        }
        if seen.len() > limit {
            return None;
        }
        for a in space.actions().iter().filter(|a| !a.is_raw_stock) {
            let n = s.apply(a);
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    Some(false)
}

/// Exposed for the admissibility tests.
#[doc(hidden)]
pub fn heuristic(space: &AtomSpace, s: &State) -> Result<f64> {
    Ok(Heuristic::new(space).eval(s, space.target()?))
}
