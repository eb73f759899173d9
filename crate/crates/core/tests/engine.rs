mod common;

use std::collections::BTreeSet;

use common::*;
use ntt_core::print::print_term;
use ntt_core::rewrite::{canonicalize, explore, replay, step};
use ntt_core::syntax::elab::parse_term_in;
use proptest::prelude::*;

fn terms_for_steps(count: usize) -> Vec<ntt_core::Term> {
    let mut r = rng(7);
    let mut out = Vec::new();
    while out.len() < count {
        let t = if out.len() % 2 == 0 { closed_proc(&mut r, 8) } else { redex_soup(&mut r, 8) };
        if t.size() <= 8 {
            out.push(t);
        }
    }
    out
}

#[test]
fn step_agrees_with_brute_force_splits() {
    let th = rho();
    let mut fired = 0;
    for t in &terms_for_steps(200) {
        let got: BTreeSet<_> = step(&th, t).into_iter().map(|s| s.target).collect();
        let want = brute_successors(&th, t);
        assert_eq!(got, want, "successors of {}", print_term(&th, t));
        fired += usize::from(!want.is_empty());
    }
    assert!(fired >= 40, "too few redexes: {fired}");
}

#[test]
fn steps_replay() {
    let th = rho();
    for t in terms_for_steps(80) {
        for s in step(&th, &t) {
            assert_eq!(replay(&th, &s).unwrap(), s.target);
        }
    }
}

#[test]
fn canonical_forms_are_invariant_under_equations() {
    for run in [false, true] {
        let mut th = rho();
        th.set_flag("run_eq", run).unwrap();
        let mut r = rng(11);
        let mut checked = 0;
        while checked < 300 {
            let t = closed_proc(&mut r, 7);
            if t.depth() > 4 {
                continue;
            }
            checked += 1;
            let c = canonicalize(&th, &t);
            let mut u = t.clone();
            for _ in 0..6 {
                u = equation_move(&mut r, &u, run);
                assert_eq!(canonicalize(&th, &u), c, "{} vs {}", print_term(&th, &t), print_term(&th, &u));
            }
        }
    }
}

#[test]
fn canonical_forms_separate_exactly_the_normal_forms() {
    for run in [false, true] {
        let mut th = rho();
        th.set_flag("run_eq", run).unwrap();
        let mut r = rng(13);
        let mut terms = Vec::new();
        while terms.len() < 120 {
            let t = closed_proc(&mut r, 6);
            if t.depth() <= 4 {
                terms.push(t);
            }
        }
        // equal normal forms need some collisions to mean anything
        for k in 0..40 {
            let once = equation_move(&mut r, &terms[k], run);
            terms.push(equation_move(&mut r, &once, run));
        }
        let canon: Vec<_> = terms.iter().map(|t| canonicalize(&th, t)).collect();
        let normal: Vec<_> = terms.iter().map(|t| ac_normal(t, run)).collect();
        for i in 0..terms.len() {
            assert_eq!(ac_normal(&canon[i], run), normal[i]);
            for j in 0..i {
                assert_eq!(canon[i] == canon[j], normal[i] == normal[j]);
            }
        }
    }
}

#[test]
fn canonicalization_is_idempotent() {
    let th = rho();
    let mut r = rng(17);
    for _ in 0..200 {
        let c = canonicalize(&th, &closed_proc(&mut r, 10));
        assert_eq!(canonicalize(&th, &c), c);
    }
}

#[test]
fn replication_unfolds_with_the_run_equation() {
    let mut th = rho();
    th.set_flag("run_eq", true).unwrap();
    let bang = parse_term_in(&th, "!(0)(n)", None).unwrap();
    let g = explore(&th, &bang, 3, 500);
    let want = canonicalize(&th, &parse_term_in(&th, "!(0)(n) | 0", None).unwrap());
    assert!(g.node_index(&want).is_some());
    let bang = parse_term_in(&th, "!(out(a, 0))(n)", None).unwrap();
    let g = explore(&th, &bang, 3, 500);
    let want = canonicalize(&th, &parse_term_in(&th, "!(out(a, 0))(n) | out(a, 0)", None).unwrap());
    assert!(g.node_index(&want).is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(seed in any::<u64>(), size in 1usize..12) {
        let th = rho();
        let t = canonicalize(&th, &closed_proc(&mut rng(seed), size));
        let s = print_term(&th, &t);
        let back = parse_term_in(&th, &s, Some(&p())).unwrap();
        prop_assert_eq!(canonicalize(&th, &back), t, "{}", s);
    }

    #[test]
    fn explore_is_deterministic(seed in any::<u64>()) {
        let th = rho();
        let t = redex_soup(&mut rng(seed), 10);
        let a = explore(&th, &t, 4, 200);
        let b = explore(&th, &t, 4, 200);
        prop_assert_eq!(a.nodes, b.nodes);
    }
}
