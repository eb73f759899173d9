//! Native predicates: sieves, images along constructors, Heyting connectives,
//! hom and reification, fixed points and modalities, with bounded semantics.

pub mod ast;
pub mod eval;
pub mod parse;

use std::collections::BTreeSet;

pub use ast::{FixKind, ModalKind, ModalOp, Pred};
pub use eval::{Env, EvalParams};
pub use parse::{parse_pred, parse_raw_pred, RawPred};

use crate::error::{Error, Result};
use crate::sort::{name, Sort};
use crate::term::{Assignment, Term};
use crate::theory::Theory;

/// `∃_f(φ⃗)`: some preimage under `f` satisfies the arguments. A single
/// predicate for a constructor of several arguments applies to the tuple.
pub fn exists_image(f: &str, args: Vec<Pred>) -> Pred {
    Pred::Image(name(f), args)
}

/// `∀_f(φ⃗)`: every preimage under `f` satisfies the arguments.
pub fn secure_image(f: &str, args: Vec<Pred>) -> Pred {
    Pred::Secure(name(f), args)
}

/// `φ[f]`, a predicate on argument tuples of `f`.
pub fn subst_pred(p: Pred, f: &str) -> Pred {
    Pred::Subst(Box::new(p), name(f))
}

pub fn hom_pred(a: Pred, b: Pred) -> Pred {
    Pred::hom(a, b)
}

/// `χ.F` over a finite test family; `var` names χ inside `body`.
pub fn reify(var: &str, body: Pred, family: Vec<Pred>) -> Pred {
    Pred::Reify { var: name(var), body: Box::new(body), family }
}

/// Evaluates `p` on the canonical form of the closed term `t` of sort `sort`.
pub fn eval(env: &Env, p: &Pred, t: &Term) -> Result<bool> {
    if !t.is_closed() {
        return Err(Error::IllSorted("predicates are evaluated on closed terms".into()));
    }
    env.eval(p, &env.canon(t))
}

/// `{ t ∈ U(sort) | φ(t) }`.
pub fn comprehend(env: &Env, p: &Pred, sort: &Sort) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for t in env.universe.terms(sort)?.iter() {
        if env.eval(p, t)? {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// Is every universe term satisfying `a` also satisfying `b`?
pub fn subtype(env: &Env, a: &Pred, b: &Pred, sort: &Sort) -> Result<bool> {
    for t in env.universe.terms(sort)?.iter() {
        if env.eval(a, t)? && !env.eval(b, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The fiber of `f` over `t`: all argument assignments `%i` with `f(..)` congruent to `t`.
pub fn fiber_query(env: &Env, f: &str, t: &Term) -> Result<Vec<Assignment>> {
    let arity = env.th.op(f).ok_or_else(|| Error::UnknownConstructor(f.to_string()))?.args.len();
    let pat = env.op_pattern(&name(f), arity)?;
    Ok(env.matches(&pat, &env.canon(t)))
}

pub fn eval_fix(env: &Env, fix: &Pred) -> Result<BTreeSet<Term>> {
    env.eval_fix(fix)
}

/// Parses `src` at `sort` and checks it against the sort of `t`.
pub fn parse_for(th: &Theory, src: &str, t: &Term) -> Result<Pred> {
    let s = th.sort_of(&[], t)?;
    Ok(parse_pred(th, src, Some(&s))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::elab::parse_term_in;
    use crate::theories::builtin;

    fn p_sort() -> Sort {
        Sort::base("P")
    }

    fn setup(th: &Theory, term: &str, pred: &str) -> (Pred, Term) {
        let t = parse_term_in(th, term, Some(&p_sort())).unwrap();
        let (p, _) = parse_pred(th, pred, Some(&p_sort())).unwrap();
        (p, t)
    }

    fn holds(th: &Theory, term: &str, pred: &str) -> bool {
        let (p, t) = setup(th, term, pred);
        let params = EvalParams { universe: crate::universe::UniverseParams { depth: 2, ..Default::default() }, ..Default::default() };
        let env = Env::new(th, params, &Env::seeds_for(&p, &[t.clone()]));
        eval(&env, &p, &t).unwrap()
    }

    #[test]
    fn principal_sieve_of_replication() {
        let th = builtin("rho-pi").unwrap();
        assert!(holds(&th, "!(0)(n)", "<!(-)(n)>"));
        assert!(!holds(&th, "out(n, 0)", "<!(-)(n)>"));
    }

    #[test]
    fn constructor_images() {
        let th = builtin("rho-pi").unwrap();
        assert!(holds(&th, "out(a, 0)", "out(top, top)"));
        assert!(!holds(&th, "in(a, \\x. 0)", "out(top, top)"));
        assert!(holds(&th, "out(a, 0)", "{out(a, P)}"));
        assert!(!holds(&th, "out(a, 0)", "{out(b, P)}"));
        assert!(holds(&th, "in(a, \\x. 0)", "out*(top, bot)"));
        assert!(!holds(&th, "out(a, 0)", "out*(top, bot)"));
    }

    #[test]
    fn race_out() {
        let th = builtin("rho-pi").unwrap();
        assert!(holds(&th, "out(n, 0) | out(n, 0) | in(n, \\x. 0)", "race.out"));
        assert!(!holds(&th, "out(n, 0) | in(n, \\x. 0)", "race.out"));
    }

    #[test]
    fn single_thread() {
        let th = builtin("rho-pi").unwrap();
        assert!(holds(&th, "out(a, 0)", "s.thr"));
        assert!(!holds(&th, "out(a, 0) | out(b, 0)", "s.thr"));
        assert!(!holds(&th, "0", "s.thr"));
    }

    #[test]
    fn fixed_points() {
        let th = builtin("rho-pi").unwrap();
        let params = EvalParams { universe: crate::universe::UniverseParams { depth: 2, ..Default::default() }, ..Default::default() };
        let env = Env::new(&th, params, &[]);
        let (mu, _) = parse_pred(&th, "mu X. X", Some(&p_sort())).unwrap();
        let (nu, _) = parse_pred(&th, "nu X. X", Some(&p_sort())).unwrap();
        assert!(eval_fix(&env, &mu).unwrap().is_empty());
        assert_eq!(eval_fix(&env, &nu).unwrap().len(), env.universe.terms(&p_sort()).unwrap().len());
        let (zeros, _) = parse_pred(&th, "mu X. <0> | {X | X}", Some(&p_sort())).unwrap();
        assert_eq!(eval_fix(&env, &zeros).unwrap().into_iter().collect::<Vec<_>>(), vec![Term::constant("0")]);
        assert!(matches!(parse_pred(&th, "mu X. !X", Some(&p_sort())), Err(Error::NonMonotoneFix(_))));
    }

    #[test]
    fn hom_and_fiber() {
        let th = builtin("rho-pi").unwrap();
        let params = EvalParams { universe: crate::universe::UniverseParams { depth: 1, ..Default::default() }, ..Default::default() };
        let env = Env::new(&th, params, &[]);
        let lam = parse_term_in(&th, "\\x:P. x | out(a, 0)", None).unwrap();
        let s = th.sort_of(&[], &lam).unwrap();
        let (h, _) = parse_pred(&th, "hom(top, {P | out(a, P)})", Some(&s)).unwrap();
        assert!(eval(&env, &h, &lam).unwrap());
        let (h, _) = parse_pred(&th, "hom(bot, bot)", Some(&s)).unwrap();
        assert!(eval(&env, &h, &lam).unwrap());
        assert!(matches!(eval(&env, &h, &Term::constant("0")), Err(Error::NonAbstraction)));
        let at = parse_term_in(&th, "@0", None).unwrap();
        let f = fiber_query(&env, "@", &at).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0]["%0"], Term::constant("0"));
        assert!(fiber_query(&env, "out", &parse_term_in(&th, "in(a, \\x. 0)", None).unwrap()).unwrap().is_empty());
    }
}
