//! The Nλ to π translation table, step preservation and pullbacks.

use std::sync::Arc;

use ntt_core::predicate::{eval, parse_pred, Env, EvalParams, Pred};
use ntt_core::print::print_term;
use ntt_core::rewrite::{canonicalize, step};
use ntt_core::syntax::elab::parse_term_in;
use ntt_core::theories::morphism::{pullback_predicate, weakly_preserves, Morphism};
use ntt_core::universe::UniverseParams;
use ntt_core::{Sort, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn s(n: &str) -> Sort {
    Sort::base(n)
}

fn proc_fn() -> Sort {
    Sort::func(vec![s("N")], s("P"))
}

fn op(f: &str, args: Vec<Term>) -> Term {
    Term::op(f, args)
}

fn b(i: u32) -> Term {
    Term::Bound(i)
}

fn lam1(body: Term) -> Term {
    Term::lam(vec![s("N")], body)
}

fn same(m: &Morphism, source: Term, expected: Term) -> Result<(), String> {
    let got = canonicalize(&m.target, &m.translate(&source).map_err(|e| e.to_string())?);
    let want = canonicalize(&m.target, &expected);
    if got != want {
        return Err(format!("{} vs {}", print_term(&m.target, &got), print_term(&m.target, &want)));
    }
    Ok(())
}

/// Each clause on symbolic arguments against the table, up to congruence.
pub fn clause_table(m: &Morphism) -> Result<(), String> {
    if let Some(e) = m.validate().into_iter().next() {
        return Err(e);
    }
    let x = Term::free("x", s("V"));
    let q = Term::free("Q", s("T"));
    let r = Term::free("R", s("T"));
    let qx = Term::free("Q", Sort::func(vec![s("V")], s("T")));
    let rx = Term::free("R", Sort::func(vec![s("V")], s("T")));
    let (tx, tq, tr) = (Term::free("x", s("N")), Term::free("Q", proc_fn()), Term::free("R", proc_fn()));
    let tqx = Term::free("Q", Sort::func(vec![s("N")], proc_fn()));
    let trx = Term::free("R", Sort::func(vec![s("N")], proc_fn()));

    // var(x) = \u. out1(x, u)
    same(&m, op("var", vec![x.clone()]), lam1(op("out1", vec![tx.clone(), b(0)])))?;
    // lam(\x. Q) = \u. in2(u, \x. [[Q]]), with [[Q]] uncurried into the binder
    let body = Term::apply(Term::apply(tqx.clone(), vec![b(1)]), vec![b(0)]);
    same(
        &m,
        op("lam", vec![Term::lam(vec![s("V")], Term::apply(qx.clone(), vec![b(0)]))]),
        lam1(op("in2", vec![b(0), Term::lam(vec![s("N"), s("N")], body)])),
    )?;
    // app(Q, x) = \u. nu v. ([[Q]](v) | out2(v; x, u))
    same(
        &m,
        op("app", vec![q.clone(), x.clone()]),
        lam1(op("nu", vec![lam1(op("par", vec![Term::apply(tq.clone(), vec![b(0)]), op("out2", vec![b(0), tx.clone(), b(1)])]))])),
    )?;
    // def(Q, \x. R) = \u. nu x. ([[R]](u) | !in1(x, [[Q]]))
    same(
        &m,
        op("def", vec![q.clone(), Term::lam(vec![s("V")], Term::apply(rx.clone(), vec![b(0)]))]),
        lam1(op(
            "nu",
            vec![lam1(op(
                "par",
                vec![Term::apply(Term::apply(trx.clone(), vec![b(0)]), vec![b(1)]), op("!", vec![op("in1", vec![b(0), tq.clone()])])],
            ))],
        )),
    )?;
    // C(x, Q, R) = \u. ([[R]](u) | in1(x, [[Q]]))
    same(
        &m,
        op("C", vec![x.clone(), q.clone(), r.clone()]),
        lam1(op("par", vec![Term::apply(tr.clone(), vec![b(0)]), op("in1", vec![tx.clone(), tq.clone()])])),
    )
}

pub const REDEXES: [&str; 20] = [
    "app(lam(\\x. var(x)), y)",
    "app(lam(\\x. var(z)), y)",
    "app(lam(\\x. lam(\\w. var(x))), y)",
    "app(lam(\\x. app(var(x), x)), y)",
    "app(lam(\\x. C(x, var(x), var(x))), y)",
    "app(lam(\\x. lam(\\w. var(w))), y)",
    "C(x, var(y), var(x))",
    "C(x, lam(\\w. var(w)), var(x))",
    "C(x, app(var(y), y), var(x))",
    "C(x, var(x), var(x))",
    "C(x, lam(\\w. var(x)), var(x))",
    "C(y, var(x), var(y))",
    "C(x, var(z), C(x, var(y), var(x)))",
    "app(app(lam(\\x. var(x)), y), z)",
    "app(C(x, var(y), var(x)), z)",
    "def(var(y), \\x. C(x, var(z), var(x)))",
    "def(var(y), \\x. app(lam(\\w. var(w)), x))",
    "C(a, var(b), app(lam(\\x. var(x)), y))",
    "C(a, var(b), C(x, var(y), var(x)))",
    "def(lam(\\w. var(w)), \\x. C(y, var(x), var(y)))",
];

/// Every step of every term in `REDEXES` is matched in the target within `depth`.
/// Returns the number of steps checked.
pub fn preservation(m: &Morphism, depth: usize) -> Result<usize, String> {
    let mut n = 0;
    for src in REDEXES {
        let t = parse_term_in(&m.source, src, Some(&s("T"))).map_err(|e| e.to_string())?;
        let steps = step(&m.source, &t);
        if steps.is_empty() {
            return Err(format!("{src} has no redex"));
        }
        for st in &steps {
            let p = weakly_preserves(m, st, depth, 3000).map_err(|e| e.to_string())?;
            if p.steps.is_none() {
                return Err(format!("{src} ~{}~> lost after {} target states", st.rule, p.explored));
            }
            n += 1;
        }
    }
    Ok(n)
}

const ATOMS: [&str; 8] = [
    "hom(top, {out1(N, N) | P})",
    "hom(top, {in2(N, [N, N -> P]) | P})",
    "hom(top, !<0>)",
    "hom(top, {nu([N -> P]) | P})",
    "hom(<n>, {in2(<n>, [N, N -> P]) | P})",
    "hom(top, B!o({out1(N, N) | P}))",
    "top",
    "bot",
];

fn random_pred(r: &mut ChaCha8Rng) -> String {
    let a = ATOMS.choose(r).unwrap();
    let b = ATOMS.choose(r).unwrap();
    match r.gen_range(0..4) {
        0 => a.to_string(),
        1 => format!("({a}) & ({b})"),
        2 => format!("({a}) | ({b})"),
        _ => format!("!({a})"),
    }
}

/// The pullback of `count` random π predicates agrees with evaluating them on
/// translations, over the Nλ universe of depth 2.
pub fn pullbacks(m: &Arc<Morphism>, count: usize, r: &mut ChaCha8Rng) -> Result<(), String> {
    let params = EvalParams { universe: UniverseParams { depth: 2, ..Default::default() }, explore_depth: 3, ..Default::default() };
    let src_env = Env::new(&m.source, params.clone(), &[]);
    let terms = src_env.universe.terms(&s("T")).unwrap();
    let mut seen = [false; 2];
    for _ in 0..count {
        let text = random_pred(r);
        let (phi, _) = parse_pred(&m.target, &text, Some(&proc_fn())).unwrap();
        let pulled = pullback_predicate(m, phi.clone(), &proc_fn(), &s("T")).unwrap();
        for t in terms.iter() {
            let u = m.translate(t).unwrap();
            let tgt_env = Env::new(&m.target, params.clone(), &Env::seeds_for(&phi, &[u.clone()]));
            let want = eval(&tgt_env, &phi, &u).unwrap();
            seen[usize::from(want)] = true;
            if eval(&src_env, &pulled, t).unwrap() != want {
                return Err(format!("{text} at {}", print_term(&m.source, t)));
            }
        }
    }
    if seen != [true, true] {
        return Err("every predicate was constant on the universe".into());
    }
    match pullback_predicate(m, Pred::Bot, &proc_fn(), &s("T")) {
        Ok(Pred::Bot) => Ok(()),
        _ => Err("bot is not preserved".into()),
    }
}
