//! Bounded satisfaction of predicates by closed canonical terms.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::predicate::ast::{FixKind, Pred};
use crate::rewrite::canon::Canon;
use crate::rewrite::matching::Matcher;
use crate::sort::{name, Name, Sort};
use crate::term::{Assignment, Term};
use crate::theory::Theory;
use crate::universe::{Universe, UniverseParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalParams {
    pub universe: UniverseParams,
    /// Rewrite steps explored by the modalities.
    pub explore_depth: usize,
    pub explore_cap: usize,
    /// Depth of output payloads in act observation contexts.
    pub act_payload_depth: usize,
    /// Act systems branch over every context, so they are explored less deeply.
    pub act_depth: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams { universe: UniverseParams::default(), explore_depth: 6, explore_cap: 2000, act_payload_depth: 1, act_depth: 3 }
    }
}

enum VarState {
    /// Local iteration: values at the terms visited so far.
    Local { kind: FixKind, vals: BTreeMap<Term, bool>, grew: bool },
    /// A fixed extension; terms outside it get `outside`.
    Ext { set: Arc<BTreeSet<Term>>, outside: bool },
}

pub struct Env<'a> {
    pub th: &'a Theory,
    pub params: EvalParams,
    pub universe: Universe<'a>,
    /// Set when some exploration stopped at its depth or node cap.
    pub bounded: Cell<bool>,
    depth: Cell<usize>,
    preimage_cache: RefCell<HashMap<(Name, usize, Term), Arc<Vec<Vec<Term>>>>>,
    memo: RefCell<HashMap<(usize, Term), bool>>,
    closed: RefCell<HashMap<usize, bool>>,
    keep: RefCell<HashMap<(usize, Term), Arc<Pred>>>,
    vars: RefCell<HashMap<Name, VarState>>,
    pub(crate) graphs: RefCell<HashMap<(Term, bool, usize), Arc<crate::behavior::Frame>>>,
}

impl<'a> Env<'a> {
    /// An environment whose name pool includes the free names of `seeds`.
    pub fn new(th: &'a Theory, params: EvalParams, seeds: &[Term]) -> Env<'a> {
        let universe = Universe::new(th, params.universe.clone(), seeds);
        Env {
            th,
            params,
            universe,
            bounded: Cell::new(false),
            depth: Cell::new(0),
            preimage_cache: RefCell::new(HashMap::new()),
            memo: RefCell::new(HashMap::new()),
            closed: RefCell::new(HashMap::new()),
            keep: RefCell::new(HashMap::new()),
            vars: RefCell::new(HashMap::new()),
            graphs: RefCell::new(HashMap::new()),
        }
    }

    /// Seeds for `Env::new`: the subject terms plus names mentioned by the predicate.
    pub fn seeds_for(p: &Pred, terms: &[Term]) -> Vec<Term> {
        let mut names = BTreeSet::new();
        p.term_names(&mut names);
        terms.iter().cloned().chain(names.into_iter().map(|(n, s)| Term::Free(n, s))).collect()
    }

    pub fn canon(&self, t: &Term) -> Term {
        Canon::new(self.th).canon(t)
    }

    pub fn matches(&self, pattern: &Term, t: &Term) -> Vec<Assignment> {
        let c = Canon::new(self.th);
        Matcher::with_canon(&c).matches(pattern, t)
    }

    fn is_closed(&self, p: &Pred) -> bool {
        let key = p as *const Pred as usize;
        if let Some(b) = self.closed.borrow().get(&key) {
            return *b;
        }
        let b = p.free_vars().is_empty();
        self.closed.borrow_mut().insert(key, b);
        b
    }

    /// Keeps derived predicates alive so their addresses stay valid memo keys.
    fn derived(&self, from: &Pred, key: &Term, make: impl FnOnce() -> Pred) -> Arc<Pred> {
        let k = (from as *const Pred as usize, key.clone());
        if let Some(p) = self.keep.borrow().get(&k) {
            return p.clone();
        }
        let p = Arc::new(make());
        self.keep.borrow_mut().insert(k, p.clone());
        p
    }

    /// The pattern `f(%0, .., %k)` over `k` argument positions.
    pub fn op_pattern(&self, f: &Name, k: usize) -> Result<Term> {
        let d = self.th.op(f).ok_or_else(|| Error::UnknownConstructor(f.to_string()))?;
        let args = (0..k.max(d.args.len()))
            .map(|i| Term::Meta(name(&format!("%{i}")), d.args.get(i).unwrap_or(&d.args[0]).clone()))
            .collect();
        Ok(Term::Op(f.clone(), args))
    }

    /// Argument tuples `a` with `f(a)` congruent to `t`.
    pub fn preimages(&self, f: &Name, k: usize, t: &Term) -> Result<Arc<Vec<Vec<Term>>>> {
        let key = (f.clone(), k, t.clone());
        if let Some(p) = self.preimage_cache.borrow().get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(self.compute_preimages(f, k, t)?);
        self.preimage_cache.borrow_mut().insert(key, p.clone());
        Ok(p)
    }

    fn compute_preimages(&self, f: &Name, k: usize, t: &Term) -> Result<Vec<Vec<Term>>> {
        let pat = self.op_pattern(f, k)?;
        let n = match &pat {
            Term::Op(_, a) => a.len(),
            _ => 0,
        };
        Ok(self
            .matches(&pat, t)
            .into_iter()
            .map(|a| (0..n).map(|i| a[&*format!("%{i}")].clone()).collect())
            .collect())
    }

    fn image_args(&self, f: &Name, ps: &[Pred], args: &[Term]) -> Result<bool> {
        let arity = self.th.op(f).map_or(0, |d| d.args.len());
        if ps.len() == 1 && arity > 1 {
            return self.eval(&ps[0], &Term::tuple_of(args.to_vec()));
        }
        for (p, a) in ps.iter().zip(args) {
            if !self.eval(p, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Candidates for a quantified variable: the universe plus closed subterms of `t`.
    fn candidates(&self, sort: &Sort, t: &Term) -> Result<Vec<Term>> {
        let mut out: BTreeSet<Term> = self.universe.terms(sort)?.iter().cloned().collect();
        let mut subs = Vec::new();
        t.closed_subterms(&mut subs);
        for s in subs {
            if self.th.sort_of(&[], &s).ok().as_ref() == Some(sort) {
                out.insert(s);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Memo entries are keyed by predicate address, so they only live for
    /// one outermost call.
    pub fn eval(&self, p: &Pred, t: &Term) -> Result<bool> {
        if self.depth.get() == 0 {
            self.memo.borrow_mut().clear();
            self.closed.borrow_mut().clear();
            self.keep.borrow_mut().clear();
        }
        self.depth.set(self.depth.get() + 1);
        let r = self.eval_memo(p, t);
        self.depth.set(self.depth.get() - 1);
        r
    }

    fn eval_memo(&self, p: &Pred, t: &Term) -> Result<bool> {
        let memo = self.is_closed(p);
        let key = (p as *const Pred as usize, t.clone());
        if memo {
            if let Some(b) = self.memo.borrow().get(&key) {
                return Ok(*b);
            }
        }
        let r = self.eval_node(p, t)?;
        if memo {
            self.memo.borrow_mut().insert(key, r);
        }
        Ok(r)
    }

    fn eval_node(&self, p: &Pred, t: &Term) -> Result<bool> {
        match p {
            Pred::Top => Ok(true),
            Pred::Bot => Ok(false),
            Pred::Principal(pat) => Ok(!self.matches(pat, t).is_empty()),
            Pred::Image(f, ps) => {
                for args in self.preimages(f, ps.len(), t)?.iter() {
                    if self.image_args(f, ps, args)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Pred::Secure(f, ps) => {
                for args in self.preimages(f, ps.len(), t)?.iter() {
                    if !self.image_args(f, ps, args)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Pred::Subst(q, f) => {
                let arity = self.th.op(f).map_or(0, |d| d.args.len());
                let args = match t {
                    Term::Tuple(xs) if arity != 1 => xs.clone(),
                    t => vec![t.clone()],
                };
                self.eval(q, &self.canon(&Term::Op(f.clone(), args)))
            }
            Pred::Along(q, ctx) => self.eval(q, &self.canon(&Term::apply(ctx.clone(), vec![t.clone()]))),
            Pred::And(ps) => {
                for q in ps {
                    if !self.eval(q, t)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Pred::Or(ps) => {
                for q in ps {
                    if self.eval(q, t)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Pred::Implies(a, b) => Ok(!self.eval(a, t)? || self.eval(b, t)?),
            Pred::Not(q) => Ok(!self.eval(q, t)?),
            Pred::Hom(a, b) => {
                let Term::Lam(ds, _) = t else { return Err(Error::NonAbstraction) };
                for x in self.universe.terms(&Sort::tuple_of(ds.clone()))?.iter() {
                    if self.eval(a, x)? && !self.eval(b, &self.apply(t, ds.len(), x))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Pred::Reify { var, body, family } => {
                let Term::Lam(ds, _) = t else { return Err(Error::NonAbstraction) };
                let dom = self.universe.terms(&Sort::tuple_of(ds.clone()))?;
                for (i, chi) in family.iter().enumerate() {
                    let f = self.derived(p, &Term::Bound(i as u32), || body.subst_var(var, chi));
                    for x in dom.iter() {
                        if self.eval(chi, x)? && !self.eval(&f, &self.apply(t, ds.len(), x))? {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            Pred::Fix { kind, var, body, .. } => self.local_fix(*kind, var, body, t),
            Pred::Var(x) => {
                let mut vars = self.vars.borrow_mut();
                match vars.get_mut(x) {
                    Some(VarState::Local { kind, vals, grew }) => Ok(*vals.entry(t.clone()).or_insert_with(|| {
                        *grew = true;
                        *kind == FixKind::Greatest
                    })),
                    Some(VarState::Ext { set, outside }) => {
                        Ok(set.contains(t) || (*outside && !self.universe_has(t)))
                    }
                    None => Err(Error::UnknownPredicate(x.to_string())),
                }
            }
            Pred::Exists { var, sort, body } | Pred::Forall { var, sort, body } => {
                let exists = matches!(p, Pred::Exists { .. });
                for v in self.candidates(sort, t)? {
                    let q = self.derived(p, &v, || body.subst_term(var, &v));
                    let b = self.eval(&q, t)?;
                    if b == exists {
                        return Ok(exists);
                    }
                }
                Ok(!exists)
            }
            Pred::Modal(op, q) => crate::behavior::modal_eval(self, *op, q, t),
            Pred::Pullback(m, q) => {
                let u = m.translate(t)?;
                let target = m.target.clone();
                let env = Env::new(&target, self.params.clone(), &Env::seeds_for(q, &[u.clone()]));
                let u = env.canon(&u);
                let r = env.eval(q, &u)?;
                if env.bounded.get() {
                    self.bounded.set(true);
                }
                Ok(r)
            }
            Pred::Ext(s) => Ok(s.contains(t)),
        }
    }

    fn universe_has(&self, t: &Term) -> bool {
        self.th
            .sort_of(&[], t)
            .ok()
            .and_then(|s| self.universe.terms(&s).ok())
            .map_or(false, |u| u.binary_search(t).is_ok())
    }

    fn apply(&self, lam: &Term, arity: usize, x: &Term) -> Term {
        let args = match x {
            Term::Tuple(xs) if arity > 1 => xs.clone(),
            x => vec![x.clone()],
        };
        self.canon(&Term::apply(lam.clone(), args))
    }

    /// Fixed point at one term: iterate over the terms the body visits until stable.
    fn local_fix(&self, kind: FixKind, var: &Name, body: &Pred, t: &Term) -> Result<bool> {
        if !body.positive_in(var) {
            return Err(Error::NonMonotoneFix(var.to_string()));
        }
        let init = kind == FixKind::Greatest;
        let state = VarState::Local { kind, vals: BTreeMap::from([(t.clone(), init)]), grew: false };
        let saved = self.vars.borrow_mut().insert(var.clone(), state);
        let result = (|| loop {
            let keys: Vec<Term> = match self.vars.borrow().get(var) {
                Some(VarState::Local { vals, .. }) => vals.keys().cloned().collect(),
                _ => unreachable!(),
            };
            let mut changed = false;
            for k in keys {
                let v = self.eval(body, &k)?;
                if let Some(VarState::Local { vals, .. }) = self.vars.borrow_mut().get_mut(var) {
                    if vals[&k] != v {
                        vals.insert(k, v);
                        changed = true;
                    }
                }
            }
            let grew = match self.vars.borrow_mut().get_mut(var) {
                Some(VarState::Local { grew, .. }) => std::mem::replace(grew, false),
                _ => false,
            };
            if !changed && !grew {
                return match self.vars.borrow().get(var) {
                    Some(VarState::Local { vals, .. }) => Ok(vals[t]),
                    _ => unreachable!(),
                };
            }
        })();
        let mut vars = self.vars.borrow_mut();
        match saved {
            Some(s) => vars.insert(var.clone(), s),
            None => vars.remove(var),
        };
        result
    }

    /// Extension of a fixed point over the universe at its sort, by
    /// Knaster–Tarski iteration from the empty set (least) or the whole universe.
    pub fn eval_fix(&self, fix: &Pred) -> Result<BTreeSet<Term>> {
        let Pred::Fix { kind, var, sort, body } = fix else {
            return Err(Error::IllSorted("eval_fix needs a fixed point".into()));
        };
        if !body.positive_in(var) {
            return Err(Error::NonMonotoneFix(var.to_string()));
        }
        let u = self.universe.terms(sort)?;
        let greatest = *kind == FixKind::Greatest;
        let mut ext: BTreeSet<Term> = if greatest { u.iter().cloned().collect() } else { BTreeSet::new() };
        let saved = self.vars.borrow_mut().remove(var);
        let result = (|| loop {
            self.vars
                .borrow_mut()
                .insert(var.clone(), VarState::Ext { set: Arc::new(ext.clone()), outside: greatest });
            let mut next = BTreeSet::new();
            for x in u.iter() {
                if self.eval(body, x)? {
                    next.insert(x.clone());
                }
            }
            if next == ext {
                return Ok(ext.clone());
            }
            ext = next;
        })();
        let mut vars = self.vars.borrow_mut();
        match saved {
            Some(s) => vars.insert(var.clone(), s),
            None => vars.remove(var),
        };
        result
    }
}
