//! Refined binding for ρπ: receivers restricted to a namespace only take
//! payloads whose reference belongs to it.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::predicate::ast::Pred;
use crate::predicate::eval::{Env, EvalParams};
use crate::sort::{name, Sort};
use crate::term::Term;
use crate::theory::{Fixity, Guard, OpDecl, Rule, Theory};

#[derive(Clone, Debug)]
pub struct RefinedTheory {
    pub base: Arc<Theory>,
    pub namespaces: BTreeMap<String, Pred>,
    /// The base theory with `in_α` receivers and `comm_α` in place of `comm`.
    pub theory: Theory,
}

/// Adds `in_α : N, [N -> P] -> P` and the guarded rule
/// `comm_α(n, q, k) : out(n, q) | in_α(n, k) ~> k(@q)` for every namespace,
/// and removes the unguarded `comm`.
pub fn refine_rho_pi(base: &Theory, namespaces: BTreeMap<String, Pred>) -> Result<RefinedTheory> {
    let n = Sort::base("N");
    let p = Sort::base("P");
    let k = Sort::func(vec![n.clone()], p.clone());
    for op in ["out", "in", "@", "par"] {
        if base.op(op).is_none() {
            return Err(Error::UnknownConstructor(op.to_string()));
        }
    }
    let shared = Arc::new(base.clone());
    let mut th = base.clone();
    th.name = format!("{}-refined", base.name);
    let congruence = base.rules.iter().find(|r| &*r.name == "comm").map(|r| r.congruence.clone()).unwrap_or_default();
    th.rules.retain(|r| &*r.name != "comm");
    for (alpha, pred) in &namespaces {
        let inp = format!("in_{alpha}");
        if th.op(&inp).is_some() {
            return Err(Error::InvalidTheory(format!("duplicate name `{inp}`")));
        }
        th.ops.push(OpDecl { name: name(&inp), args: vec![n.clone(), k.clone()], result: p.clone(), fixity: Fixity::Plain });
        let (mn, mq, mk) = (Term::meta("n", n.clone()), Term::meta("q", p.clone()), Term::meta("k", k.clone()));
        let source = Term::op(
            "par",
            vec![Term::op("out", vec![mn.clone(), mq.clone()]), Term::op(&inp, vec![mn, mk.clone()])],
        );
        let target = Term::apply(mk, vec![Term::op("@", vec![mq.clone()])]);
        let base = shared.clone();
        let pred = Arc::new(pred.clone());
        let test = move |at: &Term| {
            let env = Env::new(&base, EvalParams::default(), &Env::seeds_for(&pred, &[at.clone()]));
            let at = env.canon(at);
            env.eval(&pred, &at).unwrap_or(false)
        };
        th.rules.push(Rule {
            name: name(&format!("comm_{alpha}")),
            params: vec![(name("n"), n.clone()), (name("q"), p.clone()), (name("k"), k.clone())],
            source,
            target,
            congruence: congruence.clone(),
            guard: Some(Guard { pattern: Term::op("@", vec![mq]), label: alpha.clone(), test: Arc::new(test) }),
        });
    }
    th.refresh();
    Ok(RefinedTheory { base: shared, namespaces, theory: th })
}
