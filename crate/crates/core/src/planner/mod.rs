//! Symbolic process planning over atom bitsets.
//!
//! A state is the set of depositable atoms currently occupied. An AM action
//! ORs in its primitive's atoms, an SM action clears them, and an action
//! costs its rate times the volume it actually toggles. Plans are left-deep
//! action sequences, so every plan prints as an anti-balanced expression.

mod enrich;
mod expr;
mod search;

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::atoms::Decomposition;
use crate::capability::{Mode, Primitive};
use crate::error::{Error, Result};
use crate::solid::VoxelSolid;

pub use enrich::{enrich_and_match, EnrichmentEntry, EnrichmentReport};
pub use expr::{equivalent, lint, minimal_dnf, plan_from_expression, Expr, LintIssue, Scope};
pub use search::{heuristic, search, SearchOptions};

/// Set of occupied atoms, indexed by [`AtomSpace`] position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(FixedBitSet);

impl State {
    pub fn empty(len: usize) -> Self {
        State(FixedBitSet::with_capacity(len))
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for i in idx {
            s.0.insert(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn is_subset_of(&self, other: &State) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Result of applying `a`.
    pub fn apply(&self, a: &Action) -> State {
        let mut s = self.clone();
        match a.mode {
            Mode::Am => s.0.union_with(&a.mask.0),
            Mode::Sm => s.0.difference_with(&a.mask.0),
        }
        s
    }

    /// Atoms `a` would flip from this state.
    pub fn toggled_by<'s>(&'s self, a: &'s Action) -> impl Iterator<Item = usize> + 's {
        let mask = a.mask.0.ones();
        let sm = a.mode == Mode::Sm;
        mask.filter(move |&i| self.0.contains(i) == sm)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State({self})")
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One primitive as a state transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    /// 1-based primitive id.
    pub primitive: usize,
    pub mode: Mode,
    pub rate: f64,
    pub is_raw_stock: bool,
    /// Depositable atoms inside the primitive.
    pub mask: State,
}

/// The depositable atoms of a decomposition with their volumes and the
/// primitive actions over them.
#[derive(Debug, Clone)]
pub struct AtomSpace<'a> {
    d: &'a Decomposition,
    /// Position in `d.atoms()` of each state bit.
    atoms: Vec<usize>,
    volumes: Vec<f64>,
    actions: Vec<Action>,
    target: Option<State>,
    /// Target atoms no AM primitive reaches.
    unreachable: usize,
}

impl<'a> AtomSpace<'a> {
    pub fn new(d: &'a Decomposition) -> Self {
        let atoms: Vec<usize> = d.atoms().iter().enumerate().filter(|(_, a)| a.depositable).map(|(i, _)| i).collect();
        let m = atoms.len();
        let volumes = atoms.iter().map(|&i| d.atoms()[i].volume).collect();
        let actions = d
            .primitives()
            .iter()
            .enumerate()
            .map(|(p, prim)| Action {
                primitive: prim.id,
                mode: prim.mode,
                rate: prim.rate,
                is_raw_stock: prim.is_raw_stock,
                mask: State::from_indices(m, (0..m).filter(|&k| d.atoms()[atoms[k]].code.has(p))),
            })
            .collect();
        let (target, unreachable) = if d.is_classified() {
            let t = State::from_indices(m, (0..m).filter(|&k| d.atoms()[atoms[k]].included));
            (Some(t), d.atoms().iter().filter(|a| a.included && !a.depositable).count())
        } else {
            (None, 0)
        };
        AtomSpace { d, atoms, volumes, actions, target, unreachable }
    }

    pub fn decomposition(&self) -> &'a Decomposition {
        self.d
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// Action of primitive `P{id}`.
    pub fn action(&self, id: usize) -> Result<&Action> {
        id.checked_sub(1).and_then(|i| self.actions.get(i)).ok_or(Error::UnknownPrimitive(id))
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn start(&self) -> State {
        State::empty(self.len())
    }

    pub fn target(&self) -> Result<&State> {
        self.target.as_ref().ok_or(Error::Unclassified)
    }

    /// Atom of the decomposition behind state bit `k`.
    pub fn atom(&self, k: usize) -> &crate::atoms::Atom {
        &self.d.atoms()[self.atoms[k]]
    }

    /// Symbolic outcome of a primitive sequence from the empty state.
    pub fn evaluate(&self, sequence: &[usize]) -> Result<State> {
        let mut s = self.start();
        for &id in sequence {
            s = s.apply(self.action(id)?);
        }
        Ok(s)
    }

    pub fn state_solid(&self, s: &State) -> VoxelSolid {
        let codes: Vec<_> = s.ones().map(|k| self.atom(k).code).collect();
        self.d.union_of(&codes)
    }

    pub fn state_volume(&self, s: &State) -> f64 {
        s.ones().map(|k| self.volumes[k]).sum()
    }

    /// Volume used to normalize plan costs: the first raw stock, or the
    /// target when there is none.
    pub fn reference_volume(&self) -> f64 {
        match self.d.primitives().iter().find(|p| p.is_raw_stock) {
            Some(p) => p.solid.measure(),
            None => self.target.as_ref().map_or(0.0, |t| self.state_volume(t)),
        }
    }
}

/// Masks of all primitives over the depositable atoms, in id order.
pub fn action_masks(d: &Decomposition) -> Vec<Action> {
    AtomSpace::new(d).actions
}

/// Rate times the volume `a` toggles from `state`.
pub fn action_cost(state: &State, a: &Action, volumes: &[f64]) -> f64 {
    a.rate * state.toggled_by(a).map(|k| volumes[k]).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub primitive: usize,
    pub mode: Mode,
    /// Volume deposited (AM) or removed (SM), mm³.
    pub volume: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub steps: Vec<Step>,
    /// State after each step.
    pub states: Vec<State>,
    /// Σ rate × toggled volume.
    pub cost: f64,
    /// `cost` divided by [`AtomSpace::reference_volume`].
    pub normalized_cost: f64,
}

impl Plan {
    /// Replays `sequence` from the empty state, checking plan validity.
    pub fn from_sequence(space: &AtomSpace, sequence: &[usize]) -> Result<Plan> {
        if sequence.is_empty() {
            return Err(Error::InvalidArgument("a plan needs at least one action".into()));
        }
        let mut s = space.start();
        let mut steps = Vec::new();
        let mut states = Vec::new();
        for (i, &id) in sequence.iter().enumerate() {
            let a = space.action(id)?;
            if i == 0 && a.mode != Mode::Am {
                return Err(Error::InvalidArgument(format!("first action P{id} is not additive")));
            }
            if i > 0 && a.is_raw_stock {
                return Err(Error::InvalidArgument(format!("raw stock P{id} used after the first action")));
            }
            let volume: f64 = s.toggled_by(a).map(|k| space.volumes[k]).sum();
            steps.push(Step { primitive: id, mode: a.mode, volume, cost: a.rate * volume });
            s = s.apply(a);
            states.push(s.clone());
        }
        let cost = steps.iter().map(|s| s.cost).sum();
        let r = space.reference_volume();
        Ok(Plan { steps, states, cost, normalized_cost: if r > 0.0 { cost / r } else { 0.0 } })
    }

    pub fn sequence(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.primitive).collect()
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("plans are nonempty")
    }

    /// Left-deep expression, e.g. `(((P1 ∩ ~P4) ∩ ~P3) ∪ P2)`.
    pub fn expression(&self) -> Expr {
        let mut it = self.steps.iter();
        let first = it.next().expect("plans are nonempty");
        let mut e = Expr::Prim(first.primitive);
        for s in it {
            e = match s.mode {
                Mode::Am => Expr::Or(vec![e, Expr::Prim(s.primitive)]),
                Mode::Sm => Expr::And(vec![e, Expr::Not(Box::new(Expr::Prim(s.primitive)))]),
            };
        }
        e
    }
}

/// Applies a primitive sequence with voxel Booleans, starting from ∅.
pub fn evaluate_geometric(primitives: &[Primitive], sequence: &[usize]) -> Result<VoxelSolid> {
    let first = primitives.first().ok_or_else(|| Error::InvalidArgument("no primitives".into()))?;
    let mut s = VoxelSolid::empty(*first.solid.grid());
    for &id in sequence {
        let p = id.checked_sub(1).and_then(|i| primitives.get(i)).ok_or(Error::UnknownPrimitive(id))?;
        s = match p.mode {
            Mode::Am => s.union(&p.solid)?,
            Mode::Sm => s.subtract(&p.solid)?,
        };
    }
    Ok(s)
}

/// Re-evaluates `plan` on voxels and checks it against both its symbolic
/// final state and the target mask.
pub fn verify_plan_geometric(plan: &Plan, d: &Decomposition) -> Result<bool> {
    let space = AtomSpace::new(d);
    let solid = evaluate_geometric(d.primitives(), &plan.sequence())?;
    let symbolic = space.evaluate(&plan.sequence())?;
    let target = d.union_of(&d.target_mask());
    Ok(solid == space.state_solid(&symbolic) && symbolic == *plan.final_state() && solid == target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::decompose;
    use crate::solid::GridSpec;

    pub(crate) fn four_box() -> Decomposition {
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

    #[test]
    fn four_box_fixture_counts() {
        let d = four_box();
        assert_eq!(d.atoms().len(), 11);
        let empty: Vec<String> = d.empty_codes().unwrap().iter().map(|c| c.to_string()).collect();
        assert_eq!(empty, ["0011", "0101", "0111", "1101", "1111"]);
    }

    #[test]
    fn masks_match_codes() {
        let d = four_box();
        let space = AtomSpace::new(&d);
        for (i, a) in space.actions().iter().enumerate() {
            for k in 0..space.len() {
                assert_eq!(a.mask.contains(k), space.atom(k).code.has(i));
            }
        }
        // the background atom is not a state bit
        assert_eq!(space.len(), d.atoms().iter().filter(|a| a.code.bits() & 0b11 != 0).count());
    }

    #[test]
    fn apply_is_idempotent_and_costs_toggles() {
        let d = four_box();
        let space = AtomSpace::new(&d);
        let a = space.action(1).unwrap();
        let s1 = space.start().apply(a);
        assert_eq!(s1.apply(a), s1);
        assert_eq!(action_cost(&s1, a, space.volumes()), 0.0);
        assert_eq!(action_cost(&space.start(), a, space.volumes()), 100.0);
        // clearing P4 then P3 equals clearing their union
        let (p3, p4) = (space.action(3).unwrap(), space.action(4).unwrap());
        let mut both = p3.mask.clone();
        both.0.union_with(&p4.mask.0);
        let mut direct = s1.clone();
        direct.0.difference_with(&both.0);
        assert_eq!(s1.apply(p4).apply(p3), direct);
        // the two orders differ in cost in general
        let c43 = action_cost(&s1, p4, space.volumes()) * 2.0 + action_cost(&s1.apply(p4), p3, space.volumes());
        let c34 = action_cost(&s1, p3, space.volumes()) + action_cost(&s1.apply(p3), p4, space.volumes()) * 2.0;
        assert_ne!(c43, c34);
    }

    #[test]
    fn plan_validity_and_expression() {
        let d = four_box();
        let space = AtomSpace::new(&d);
        assert!(Plan::from_sequence(&space, &[3, 1]).is_err());
        assert!(Plan::from_sequence(&space, &[]).is_err());
        let p = Plan::from_sequence(&space, &[1, 4, 3, 2]).unwrap();
        assert_eq!(p.expression().to_string(), "(((P1 ∩ ~P4) ∩ ~P3) ∪ P2)");
        assert_eq!(p.cost, p.steps.iter().map(|s| s.cost).sum::<f64>());
        assert!(!verify_plan_geometric(&p, &d).unwrap());
        let good = Plan::from_sequence(&space, &[1, 2, 3, 4]).unwrap();
        assert!(verify_plan_geometric(&good, &d).unwrap());
    }
}
