mod common;

use common::*;
use ntt_core::bisim::{bisimilar, bisimilarity, build_lts, distinguishing, mu_iteration, ObsLabel, Pool};
use ntt_core::rewrite::canonicalize;
use ntt_core::syntax::elab::parse_term_in;
use ntt_core::Term;

fn t(s: &str) -> Term {
    parse_term_in(&rho(), s, Some(&p())).unwrap()
}

fn pool(ts: &[Term]) -> Pool {
    Pool::new(&rho(), ts, 2, 2).unwrap()
}

#[test]
fn refinement_matches_naive_iteration() {
    let merged = bisim_suite(50, &mut rng(5)).unwrap();
    assert!(merged > 0);
}

#[test]
fn bisimilarity_is_an_equivalence() {
    let mut r = rng(6);
    for _ in 0..30 {
        let lts = random_lts(&mut r, 60, 2);
        let b = bisimilarity(&lts);
        let n = lts.states;
        for x in 0..n {
            assert!(b[x][x]);
            for y in 0..n {
                assert_eq!(b[x][y], b[y][x]);
                for z in 0..n {
                    assert!(!(b[x][y] && b[y][z]) || b[x][z]);
                }
            }
        }
    }
}

#[test]
fn least_fixpoint_sits_below_bisimilarity() {
    let mut r = rng(8);
    for _ in 0..10 {
        let lts = random_lts(&mut r, 40, 2);
        let m = mu_iteration(&lts);
        let b = bisimilarity(&lts);
        let dead = |s: usize| lts.expanded[s] && !lts.trans.iter().any(|(a, _, _)| *a == s);
        for x in 0..lts.states {
            for y in 0..lts.states {
                assert!(!m[x][y] || b[x][y]);
                if dead(x) && dead(y) {
                    assert!(m[x][y]);
                }
            }
        }
    }
}

#[test]
fn congruent_processes() {
    let (a, b) = (t("0 | 0"), t("0"));
    let r = bisimilar(&rho(), &a, &b, &pool(&[a.clone(), b.clone()]), 4, 2000).unwrap();
    assert!(r.bisimilar);
    let (a, b) = (t("out(a, 0) | in(b, \\x. 0)"), t("in(b, \\x. 0) | out(a, 0)"));
    assert!(bisimilar(&rho(), &a, &b, &pool(&[a.clone()]), 2, 2000).unwrap().bisimilar);
}

#[test]
fn outputs_on_different_names() {
    let (a, b) = (t("out(a, 0)"), t("out(b, 0)"));
    let r = bisimilar(&rho(), &a, &b, &pool(&[a.clone(), b.clone()]), 2, 2000).unwrap();
    assert!(!r.bisimilar);
    assert!(r.bounded);
    match &r.distinguishing[..] {
        [ObsLabel::In { name }] => assert_eq!(*name, Term::free("a", n())),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reflexive_on_processes() {
    let th = rho();
    let mut r = rng(9);
    for _ in 0..5 {
        let p = redex_soup(&mut r, 5);
        let res = bisimilar(&th, &p, &p, &pool(&[p.clone()]), 1, 500).unwrap();
        assert!(res.bisimilar);
    }
}

#[test]
fn silent_steps_are_matched() {
    let th = rho();
    let p = t("out(a, 0) | in(a, \\x. 0)");
    let q = t("0");
    let sys = build_lts(&th, &[p.clone(), q.clone()], &Pool::new(&th, &[p.clone()], 1, 1).unwrap(), 2, 500).unwrap();
    let i = sys.state(&canonicalize(&th, &p)).unwrap();
    let j = sys.state(&canonicalize(&th, &q)).unwrap();
    assert!(distinguishing(&sys.lts, i, j).is_some());
    assert!(sys.lts.trans.iter().any(|(s, l, _)| *s == i && *l == ObsLabel::Identity));
    assert!(!sys.lts.trans.iter().any(|(s, l, _)| *s == j && *l == ObsLabel::Identity));
}
