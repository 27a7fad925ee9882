//! The four-box logic fixture: equivalences, empty codes and recovered plans.

mod common;

use common::*;
use hybridplan::atoms::decompose;
use hybridplan::planner::{
    equivalent, evaluate_geometric, minimal_dnf, search, verify_plan_geometric, AtomSpace, Expr, Plan, Scope,
    SearchOptions,
};
use hybridplan::{Mode, Primitive};

fn e(s: &str) -> Expr {
    s.parse().unwrap()
}

#[test]
fn atom_counts_match_brute_force() {
    let d = four_box();
    let brute = brute_atoms(d.primitives(), d.grid());
    assert_eq!(brute.len(), 11);
    assert_eq!(d.atoms().len(), 11);
    for a in d.atoms() {
        assert_eq!(brute[&a.code.bits()], a.voxel_count);
    }
    assert!(d.primitives()[1].solid.is_disjoint(&d.primitives()[3].solid));
    let empty: Vec<String> = d.empty_codes().unwrap().iter().map(|c| c.to_string()).collect();
    assert_eq!(empty, ["0011", "0101", "0111", "1101", "1111"]);
}

#[test]
fn logical_and_conditional_equivalence() {
    let d = four_box();
    assert!(equivalent(&e(E1), &e(E2), &d, Scope::Logical).unwrap());
    assert!(!equivalent(&e(E1), &e(E3), &d, Scope::Logical).unwrap());
    assert!(equivalent(&e(E1), &e(E3), &d, Scope::Conditional).unwrap());
    assert!(!equivalent(&e(E1), &e(E4), &d, Scope::Conditional).unwrap());
}

#[test]
fn planner_recovers_expected_orders() {
    let d = four_box();
    let plans = search(&d, &SearchOptions { k_best: 12, ..Default::default() }).unwrap();
    let seqs: Vec<Vec<usize>> = plans.iter().map(|p| p.sequence()).collect();
    for want in [[1, 2, 3, 4], [1, 2, 4, 3], [2, 1, 3, 4], [2, 1, 4, 3], [1, 4, 2, 3]] {
        assert!(seqs.contains(&want.to_vec()), "missing {want:?} in {seqs:?}");
    }
    let dnf = minimal_dnf(&d).unwrap();
    for p in &plans {
        assert!(verify_plan_geometric(p, &d).unwrap());
        assert!(equivalent(&p.expression(), &dnf, &d, Scope::Conditional).unwrap());
    }
    for want in [E1, E2, E3] {
        assert!(plans.iter().any(|p| equivalent(&p.expression(), &e(want), &d, Scope::Logical).unwrap()), "{want}");
    }
}

#[test]
fn plan_costs_replay() {
    assert_eq!(check_plan_costs(&four_box(), 12), Ok(()));
}

#[test]
fn corrupted_plans_fail_verification() {
    let d = four_box();
    let space = AtomSpace::new(&d);
    let short = Plan::from_sequence(&space, &[1, 3, 4]).unwrap();
    assert!(!verify_plan_geometric(&short, &d).unwrap());

    // the same sequence with P2 removing instead of depositing
    let flipped: Vec<Primitive> = d
        .primitives()
        .iter()
        .map(|p| if p.id == 2 { Primitive { mode: Mode::Sm, ..p.clone() } } else { p.clone() })
        .collect();
    let good = evaluate_geometric(d.primitives(), &[1, 2, 3, 4]).unwrap();
    assert_eq!(&good, d.target().unwrap());
    assert_ne!(evaluate_geometric(&flipped, &[1, 2, 3, 4]).unwrap(), good);
    let mut fd = decompose(&flipped, d.grid()).unwrap();
    fd.classify_target(d.target().unwrap(), 0.0).unwrap();
    let fspace = AtomSpace::new(&fd);
    let plan = Plan::from_sequence(&fspace, &[1, 2, 3, 4]).unwrap();
    assert!(!verify_plan_geometric(&plan, &fd).unwrap());
}
