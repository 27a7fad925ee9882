//! Generators and brute-force oracles shared by the integration tests and
//! the acceptance suite. Each `check_*` returns `Err` with a description of
//! the first counterexample.
#![allow(dead_code)]

use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use hybridplan::atoms::{decompose, Decomposition};
use hybridplan::morphology::{closing, correlate_direct, correlate_fft, dilate, erode, opening, LatticeSet};
use hybridplan::planner::{action_cost, evaluate_geometric, heuristic, search, AtomSpace, SearchOptions, State};
use hybridplan::{Error, GridSpec, Method, Mode, Primitive, TranslationSet, VoxelSolid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(dims: [usize; 3]) -> GridSpec {
    GridSpec::new(dims, 1.0, [0.0; 3]).unwrap()
}

pub fn random_dims(rng: &mut impl Rng, max: usize) -> [usize; 3] {
    [0; 3].map(|_| rng.gen_range(1..=max))
}

pub fn random_solid(rng: &mut impl Rng, g: GridSpec, density: f64) -> VoxelSolid {
    VoxelSolid::from_fn(g, |_| rng.gen_bool(density))
}

/// Union of up to `k` random axis-aligned boxes.
pub fn random_boxes(rng: &mut impl Rng, g: GridSpec, k: usize) -> VoxelSolid {
    let boxes: Vec<[(usize, usize); 3]> = (0..rng.gen_range(1..=k))
        .map(|_| {
            [0, 1, 2].map(|a| {
                let lo = rng.gen_range(0..g.dims[a]);
                (lo, rng.gen_range(lo + 1..=g.dims[a]))
            })
        })
        .collect();
    VoxelSolid::from_fn(g, |p| boxes.iter().any(|b| (0..3).all(|a| b[a].0 <= p[a] && p[a] < b[a].1)))
}

/// Small connected-ish kernel around the origin, always containing it.
pub fn random_kernel(rng: &mut impl Rng, r: i64) -> LatticeSet {
    let mut pts = vec![[0i64; 3]];
    for _ in 0..rng.gen_range(0..6) {
        pts.push([0; 3].map(|_| rng.gen_range(-r..=r)));
    }
    LatticeSet::from_points(pts)
}

/// `n` primitives, the first AM, built from random boxes.
pub fn random_primitives(rng: &mut impl Rng, g: GridSpec, n: usize) -> Vec<Primitive> {
    (1..=n)
        .map(|id| {
            let mode = if id == 1 || rng.gen_bool(0.5) { Mode::Am } else { Mode::Sm };
            let rate = f64::from(rng.gen_range(10..=40)) / 20.0;
            Primitive::imported(id, &format!("p{id}"), mode, random_boxes(rng, g, 3), rate, "random").unwrap()
        })
        .collect()
}

/// A sequence obeying the plan conditions: first action AM, no raw stock.
pub fn random_sequence(rng: &mut impl Rng, prims: &[Primitive], len: usize) -> Vec<usize> {
    let am: Vec<usize> = prims.iter().filter(|p| p.mode == Mode::Am).map(|p| p.id).collect();
    let mut seq = vec![am[rng.gen_range(0..am.len())]];
    while seq.len() < len {
        seq.push(rng.gen_range(1..=prims.len()));
    }
    seq
}

/// Correlation counts by enumerating member pairs: `c[x − y] += 1`.
pub fn brute_correlation(a: &LatticeSet, b: &LatticeSet) -> HashMap<[i64; 3], u32> {
    let bp: Vec<[i64; 3]> = b.points().collect();
    let mut out = HashMap::new();
    for x in a.points() {
        for y in &bp {
            *out.entry([x[0] - y[0], x[1] - y[1], x[2] - y[2]]).or_insert(0) += 1;
        }
    }
    out
}

pub fn check_correlation(a: &LatticeSet, b: &LatticeSet) -> Check {
    let oracle = brute_correlation(a, b);
    let direct = correlate_direct(a, b);
    let fft = correlate_fft(a, b).map_err(|e| e.to_string())?;
    let (lo, dims) = (direct.min(), direct.dims());
    if oracle.keys().any(|t| (0..3).any(|i| t[i] < lo[i] || t[i] >= lo[i] + dims[i] as i64)) {
        return Err("support box misses a nonzero count".into());
    }
    for z in 0..dims[2] as i64 {
        for y in 0..dims[1] as i64 {
            for x in 0..dims[0] as i64 {
                let t = [lo[0] + x, lo[1] + y, lo[2] + z];
                let want = oracle.get(&t).copied().unwrap_or(0);
                let (d, f) = (direct.get(t), fft.get(t));
                if d != want || f != want {
                    return Err(format!("at {t:?}: oracle {want}, direct {d}, fft {f}"));
                }
            }
        }
    }
    Ok(())
}

/// `complement(dilate(T, B)) == erode(T, complement(B))`, by both methods.
pub fn check_duality(t: &TranslationSet, b: &VoxelSolid) -> Check {
    for m in [Method::Direct, Method::Fft] {
        let lhs = dilate(t, b, m).map_err(|e| e.to_string())?.complement();
        let rhs = erode(t, &b.complement(), m).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("{m:?}: {} vs {} voxels", lhs.count(), rhs.count()));
        }
    }
    Ok(())
}

/// Opening is anti-extensive and closing extensive. Without an assembly
/// both are also idempotent; a nonempty assembly breaks idempotence in
/// general. Both methods must agree.
pub fn check_opening_closing(s: &VoxelSolid, b: &LatticeSet, c: &LatticeSet) -> Check {
    let e = |r: hybridplan::Result<VoxelSolid>| r.map_err(|e| e.to_string());
    let open = e(opening(s, b, c, Method::Direct))?;
    let close = e(closing(s, b, c, Method::Direct))?;
    if open != e(opening(s, b, c, Method::Fft))? || close != e(closing(s, b, c, Method::Fft))? {
        return Err("direct and FFT disagree".into());
    }
    if !open.is_subset_of(s) {
        return Err("opening is not inside the solid".into());
    }
    if !s.is_subset_of(&close) {
        return Err("solid is not inside its closing".into());
    }
    if !c.is_empty() {
        return Ok(());
    }
    if e(opening(&open, b, c, Method::Direct))? != open {
        return Err("opening is not idempotent".into());
    }
    if e(closing(&close, b, c, Method::Direct))? != close {
        return Err("closing is not idempotent".into());
    }
    Ok(())
}

/// Occupied-voxel counts per atom code, straight from primitive membership.
pub fn brute_atoms(prims: &[Primitive], g: &GridSpec) -> BTreeMap<u64, usize> {
    let mut out = BTreeMap::new();
    for k in 0..g.len() {
        let code = prims.iter().enumerate().filter(|(_, p)| p.solid.get_index(k)).map(|(i, _)| 1u64 << i).sum();
        *out.entry(code).or_insert(0) += 1;
    }
    out
}

/// The geometric result of `seq` is a union of whole atoms and equals the
/// symbolic state evaluation.
pub fn check_soundness(d: &Decomposition, seq: &[usize]) -> Check {
    let solid = evaluate_geometric(d.primitives(), seq).map_err(|e| e.to_string())?;
    let mut split: HashMap<u64, (usize, usize)> = HashMap::new();
    for (k, &c) in d.codes().iter().enumerate() {
        let e = split.entry(c).or_default();
        if solid.get_index(k) {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
    }
    if let Some((c, _)) = split.iter().find(|(_, &(i, o))| i > 0 && o > 0) {
        return Err(format!("{seq:?} splits the atom with code bits {c:b}"));
    }
    let space = AtomSpace::new(d);
    let symbolic = space.evaluate(seq).map_err(|e| e.to_string())?;
    if space.state_solid(&symbolic) != solid {
        return Err(format!("{seq:?}: symbolic and geometric results differ"));
    }
    Ok(())
}

/// Every order of `ids` (all one mode, after `prefix`) ends in the same
/// solid, and the occupied-atom count moves monotonically.
pub fn check_unimodal(d: &Decomposition, prefix: &[usize], orders: &[Vec<usize>]) -> Check {
    let space = AtomSpace::new(d);
    let mut finals = Vec::new();
    for ids in orders {
        let mode = space.action(ids[0]).map_err(|e| e.to_string())?.mode;
        let mut s = space.evaluate(prefix).map_err(|e| e.to_string())?;
        for &id in ids {
            let next = s.apply(space.action(id).map_err(|e| e.to_string())?);
            let ok = match mode {
                Mode::Am => next.count() >= s.count() && s.is_subset_of(&next),
                Mode::Sm => next.count() <= s.count() && next.is_subset_of(&s),
            };
            if !ok {
                return Err(format!("{mode} order {ids:?} is not monotone"));
            }
            s = next;
        }
        let mut seq = prefix.to_vec();
        seq.extend(ids);
        finals.push((ids.clone(), evaluate_geometric(d.primitives(), &seq).map_err(|e| e.to_string())?));
    }
    if let Some((ids, _)) = finals.iter().find(|(_, s)| *s != finals[0].1) {
        return Err(format!("order {ids:?} ends differently from {:?}", finals[0].0));
    }
    Ok(())
}

/// Cheapest cost of any valid sequence of at most `depth` actions that ends
/// exactly at the target, by exhaustive enumeration.
pub fn exhaustive_optimum(space: &AtomSpace, depth: usize) -> Option<f64> {
    fn go(space: &AtomSpace, s: &State, g: f64, left: usize, target: &State, best: &mut Option<f64>) {
        if left == 0 {
            return;
        }
        for a in space.actions() {
            let next = s.apply(a);
            let cost = g + action_cost(s, a, space.volumes());
            if &next == target && best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            go(space, &next, cost, left - 1, target, best);
        }
    }
    let target = space.target().ok()?.clone();
    let start = space.start();
    let mut best = None;
    for a in space.actions().iter().filter(|a| a.mode == Mode::Am) {
        let s = start.apply(a);
        let cost = action_cost(&start, a, space.volumes());
        if s == target && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
        go(space, &s, cost, depth - 1, &target, &mut best);
    }
    best
}

#[derive(PartialEq)]
struct Entry(f64, State);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.total_cmp(&self.0).then_with(|| self.1.cmp(&other.1))
    }
}

/// Exact cheapest cost-to-target from every state reachable from the start,
/// by Dijkstra over the reversed transition graph.
pub fn cost_to_go(space: &AtomSpace) -> HashMap<State, f64> {
    let target = space.target().unwrap().clone();
    let mut seen = vec![space.start()];
    let mut index: HashMap<State, usize> = HashMap::from([(space.start(), 0)]);
    let mut rev: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = seen[i].clone();
        for a in space.actions() {
            let next = s.apply(a);
            let j = *index.entry(next.clone()).or_insert_with(|| {
                seen.push(next.clone());
                rev.push(Vec::new());
                queue.push_back(seen.len() - 1);
                seen.len() - 1
            });
            rev[j].push((i, action_cost(&s, a, space.volumes())));
        }
    }
    let mut dist: HashMap<State, f64> = HashMap::new();
    let Some(&t) = index.get(&target) else {
        return dist;
    };
    let mut heap = BinaryHeap::from([Entry(0.0, seen[t].clone())]);
    while let Some(Entry(d, s)) = heap.pop() {
        if dist.contains_key(&s) {
            continue;
        }
        dist.insert(s.clone(), d);
        for &(p, c) in &rev[index[&s]] {
            if !dist.contains_key(&seen[p]) {
                heap.push(Entry(d + c, seen[p].clone()));
            }
        }
    }
    dist
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// What [`check_optimality`] examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OptimalityStats {
    pub plan_found: bool,
    /// Reachable states whose heuristic was compared to the exact cost-to-go.
    pub states: usize,
}

/// Search with `k = 1` matches exhaustive enumeration up to `depth` actions,
/// and the heuristic never exceeds the exact cost-to-go.
pub fn check_optimality(d: &Decomposition, depth: usize) -> Result<OptimalityStats, String> {
    let space = AtomSpace::new(d);
    let oracle = exhaustive_optimum(&space, depth);
    let opts = SearchOptions { k_best: 1, max_depth: depth, ..Default::default() };
    match (search(d, &opts), oracle) {
        (Ok(p), Some(c)) if close(p[0].cost, c) => {}
        (Ok(p), o) => return Err(format!("search found {} ({:?}), exhaustive {o:?}", p[0].cost, p[0].sequence())),
        (Err(Error::PlanImpossible | Error::NotFoundWithinBounds { .. }), None) => {}
        (Err(e), o) => return Err(format!("search failed with {e}, exhaustive {o:?}")),
    }
    let exact = cost_to_go(&space);
    for (s, c) in &exact {
        let h = heuristic(&space, s).map_err(|e| e.to_string())?;
        if h > c + 1e-9 * c.max(1.0) {
            return Err(format!("heuristic {h} exceeds exact cost-to-go {c} at {s}"));
        }
    }
    Ok(OptimalityStats { plan_found: oracle.is_some(), states: exact.len() })
}

/// Returned plans are cheapest first, and each cost equals the sum of
/// `rate × toggled volume` replayed from the empty state.
pub fn check_plan_costs(d: &Decomposition, k: usize) -> Check {
    let Ok(plans) = search(d, &SearchOptions { k_best: k, ..Default::default() }) else {
        return Ok(());
    };
    let space = AtomSpace::new(d);
    for w in plans.windows(2) {
        if w[0].cost > w[1].cost {
            return Err(format!("{} before cheaper {}", w[0].cost, w[1].cost));
        }
    }
    for p in &plans {
        let mut s = space.start();
        let mut total = 0.0;
        for id in p.sequence() {
            let a = space.action(id).map_err(|e| e.to_string())?;
            let next = s.apply(a);
            if next == s {
                return Err(format!("{:?} contains a no-op", p.sequence()));
            }
            total += action_cost(&s, a, space.volumes());
            s = next;
        }
        if !close(total, p.cost) {
            return Err(format!("{:?} reports {} but replays to {total}", p.sequence(), p.cost));
        }
        if p.sequence().windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("{:?} repeats an action", p.sequence()));
        }
    }
    Ok(())
}

/// Classifies `d` against the state reached by a random valid sequence, so
/// the target is reachable, nonempty and exactly a union of atoms.
pub fn reachable_target(rng: &mut impl Rng, d: &mut Decomposition, max_len: usize) -> Vec<usize> {
    loop {
        let len = rng.gen_range(1..=max_len);
        let seq = random_sequence(rng, d.primitives(), len);
        let target = evaluate_geometric(d.primitives(), &seq).unwrap();
        if !target.is_empty() {
            d.classify_target(&target, 0.0).unwrap();
            return seq;
        }
    }
}

/// Classifies `d` against a random nonempty union of depositable atoms,
/// which may be unreachable by any plan.
pub fn random_atom_target(rng: &mut impl Rng, d: &mut Decomposition) {
    let pool: Vec<_> = d.atoms().iter().filter(|a| a.depositable).map(|a| a.code).collect();
    let mut pick: Vec<_> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if pick.is_empty() {
        pick.push(pool[rng.gen_range(0..pool.len())]);
    }
    let target = d.union_of(&pick);
    d.classify_target(&target, 0.0).unwrap();
}

pub fn check_refine(prims: &[Primitive], g: &GridSpec, target: Option<&VoxelSolid>) -> Check {
    let n = prims.len();
    let mut base = decompose(&prims[..n - 1], g).map_err(|e| e.to_string())?;
    let mut full = decompose(prims, g).map_err(|e| e.to_string())?;
    if let Some(t) = target {
        base.classify_target(t, 1.0).map_err(|e| e.to_string())?;
        full.classify_target(t, 1.0).map_err(|e| e.to_string())?;
    }
    let refined = base.refine(&prims[n - 1]).map_err(|e| e.to_string())?;
    if refined != full {
        return Err(format!("refine differs from a fresh decomposition of {n} primitives"));
    }
    let brute = brute_atoms(prims, g);
    let got: BTreeMap<u64, usize> = refined.atoms().iter().map(|a| (a.code.bits(), a.voxel_count)).collect();
    if got != brute {
        return Err("atom table differs from per-voxel membership".into());
    }
    Ok(())
}

/// Four boxes on a 16×16×1 grid, P2 ∩ P4 = ∅, eleven nonempty atoms.
pub fn four_box() -> Decomposition {
    let g = GridSpec::new([16, 16, 1], 1.0, [0.0; 3]).unwrap();
    let b = |x: std::ops::Range<usize>, y: std::ops::Range<usize>| {
        VoxelSolid::from_fn(g, |[i, j, _]| x.contains(&i) && y.contains(&j))
    };
    let p = |id, mode, s| Primitive::imported(id, &format!("p{id}"), mode, s, 1.0, "fixture").unwrap();
    let prims = vec![
        p(1, Mode::Am, b(2..12, 2..12)),
        p(2, Mode::Am, b(4..16, 6..10)),
        p(3, Mode::Sm, b(6..14, 0..16)),
        p(4, Mode::Sm, b(0..10, 10..12)),
    ];
    let mut d = decompose(&prims, &g).unwrap();
    let codes: Vec<_> = ["0100", "1000", "1100"].iter().map(|c| c.parse().unwrap()).collect();
    let target = d.union_of(&codes);
    d.classify_target(&target, 0.0).unwrap();
    d
}

pub const E1: &str = "(((P1 ∪ P2) ∩ ~P3) ∩ ~P4)";
pub const E2: &str = "(((P1 ∪ P2) ∩ ~P4) ∩ ~P3)";
pub const E3: &str = "(((P1 ∩ ~P4) ∪ P2) ∩ ~P3)";
pub const E4: &str = "(((P1 ∩ ~P4) ∩ ~P3) ∪ P2)";
