//! Canonical forms modulo the active structural equations.

use std::cell::Cell;

use crate::rewrite::matching::Matcher;
use crate::sort::{name, Name, Sort};
use crate::term::Term;
use crate::theory::{Structure, Theory};

/// Upper bound on oriented-normalizer applications per canonicalization.
const FUEL: usize = 10_000;
/// Binder blocks longer than this are ordered by first occurrence instead of
/// by trying every permutation.
const MAX_PERMUTED: usize = 6;

pub struct Canon<'a> {
    pub th: &'a Theory,
    pub st: &'a Structure,
    fuel: Cell<usize>,
    fresh: Cell<usize>,
}

impl<'a> Canon<'a> {
    pub fn new(th: &'a Theory) -> Canon<'a> {
        Canon { th, st: th.structure(), fuel: Cell::new(FUEL), fresh: Cell::new(0) }
    }

    pub fn canon(&self, t: &Term) -> Term {
        match t {
            Term::Op(f, args) => {
                let args = args.iter().map(|a| self.canon(a)).collect();
                self.build(f, args)
            }
            Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(self.canon(b))),
            Term::Apply(h, args) => {
                let h = self.canon(h);
                let args: Vec<Term> = args.iter().map(|a| self.canon(a)).collect();
                match Term::apply(h, args) {
                    Term::Apply(h, args) => Term::Apply(h, args),
                    reduced => self.canon(&reduced),
                }
            }
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|a| self.canon(a)).collect()),
            _ => t.clone(),
        }
    }

    /// Normalizes `f(args)` given canonical arguments.
    pub fn build(&self, f: &Name, args: Vec<Term>) -> Term {
        let mut t = if self.st.ac.contains_key(f) { self.ac_node(f, args) } else { Term::Op(f.clone(), args) };
        if let Some(r) = &self.st.restriction {
            let needs = match &t {
                Term::Op(g, xs) if *g == r.op => true,
                Term::Op(g, xs) if Some(g) == r.par.as_ref() => xs.iter().any(|x| x.head_op() == Some(&r.op)),
                _ => false,
            };
            if needs {
                t = self.prenex(t);
            }
        }
        if !self.st.oriented.is_empty() && self.fuel.get() > 0 {
            if let Some(u) = self.rewrite_oriented(&t) {
                self.fuel.set(self.fuel.get() - 1);
                return self.canon(&u);
            }
        }
        t
    }

    fn rewrite_oriented(&self, t: &Term) -> Option<Term> {
        let m = Matcher::with_canon(self);
        for (_, l, r) in &self.st.oriented {
            if let Some(a) = m.matches(l, t).into_iter().next() {
                return Some(r.instantiate(&a));
            }
            // an associative head may match a window of a longer sequence
            if let (Term::Op(f, ps), Term::Op(g, xs)) = (l, t) {
                let assoc = self.st.ac.get(f).map_or(false, |a| a.assoc);
                if f == g && assoc && xs.len() > ps.len() {
                    for i in 0..=xs.len() - ps.len() {
                        let window = Term::Op(f.clone(), xs[i..i + ps.len()].to_vec());
                        if let Some(a) = m.matches(l, &window).into_iter().next() {
                            let mut ys = xs[..i].to_vec();
                            ys.push(r.instantiate(&a));
                            ys.extend_from_slice(&xs[i + ps.len()..]);
                            return Some(Term::Op(f.clone(), ys));
                        }
                    }
                }
            }
        }
        None
    }

    /// Flattens, drops units, folds replicated copies and sorts (when commutative).
    pub fn ac_node(&self, f: &Name, args: Vec<Term>) -> Term {
        let info = &self.st.ac[f];
        let mut elems = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Term::Op(g, inner) if info.assoc && g == *f => elems.extend(inner),
                a => elems.push(a),
            }
        }
        if let Some(u) = &info.unit {
            elems.retain(|e| e != u);
        }
        for (g, par) in &self.st.unfold {
            if par != f {
                continue;
            }
            let bodies: Vec<Term> = elems
                .iter()
                .filter_map(|e| match e {
                    Term::Op(h, xs) if h == g && xs.len() == 1 => Some(xs[0].clone()),
                    _ => None,
                })
                .collect();
            if !bodies.is_empty() {
                elems.retain(|e| !bodies.contains(e));
            }
        }
        if info.comm {
            elems.sort();
        }
        match elems.len() {
            0 => info.unit.clone().unwrap_or_else(|| Term::Op(f.clone(), vec![])),
            1 if info.assoc || info.unit.is_some() => elems.pop().unwrap(),
            _ => Term::Op(f.clone(), elems),
        }
    }

    /// Components of a term under the restriction's parallel operator.
    fn components(&self, t: Term, out: &mut Vec<Term>) {
        let r = self.st.restriction.as_ref().unwrap();
        match t {
            Term::Op(g, xs) if Some(&g) == r.par.as_ref() => out.extend(xs),
            t if Some(&t) == r.nil.as_ref() => {}
            t => out.push(t),
        }
    }

    /// Opens restriction blocks with placeholder names, collecting the components.
    fn open(&self, t: Term, names: &mut Vec<(Name, Sort)>, out: &mut Vec<Term>) {
        let r = self.st.restriction.as_ref().unwrap();
        match t {
            Term::Op(g, mut xs) if g == r.op && xs.len() == 1 && matches!(xs[0], Term::Lam(..)) => {
                let Term::Lam(ss, body) = xs.pop().unwrap() else { unreachable!() };
                let mut frees = Vec::new();
                for s in ss {
                    let k = self.fresh.get();
                    self.fresh.set(k + 1);
                    let x = name(&format!("%{k}"));
                    frees.push(Term::Free(x.clone(), s.clone()));
                    names.push((x, s));
                }
                let inner = body.instantiate_bound(&frees);
                let mut parts = Vec::new();
                self.components(inner, &mut parts);
                for p in parts {
                    self.open(p, names, out);
                }
            }
            t => out.push(t),
        }
    }

    /// Prenex form: one block of binders over the parallel composition of
    /// components, unused binders dropped, binder order chosen minimal.
    fn prenex(&self, t: Term) -> Term {
        let r = self.st.restriction.clone().unwrap();
        let mut parts = Vec::new();
        self.components(t, &mut parts);
        let mut names = Vec::new();
        let mut comps = Vec::new();
        for p in parts {
            self.open(p, &mut names, &mut comps);
        }
        let used = comps.iter().fold(std::collections::BTreeSet::new(), |mut acc, c| {
            acc.extend(c.free_names());
            acc
        });
        names.retain(|(x, _)| used.contains(x));
        let body = self.join(&r.par, &r.nil, comps);
        if names.is_empty() {
            return body;
        }
        let close = |order: &[(Name, Sort)]| -> Term {
            let ns: Vec<Name> = order.iter().map(|(x, _)| x.clone()).collect();
            let mut t = self.canon(&body.abstract_frees(&ns));
            for (_, s) in order.iter().rev() {
                t = Term::Op(r.op.clone(), vec![Term::Lam(vec![s.clone()], Box::new(t))]);
            }
            t
        };
        if names.len() > MAX_PERMUTED {
            return close(&names);
        }
        let mut best: Option<Term> = None;
        permutations(names.len(), &mut |perm| {
            let order: Vec<(Name, Sort)> = perm.iter().map(|&i| names[i].clone()).collect();
            let c = close(&order);
            if best.as_ref().map_or(true, |b| c < *b) {
                best = Some(c);
            }
        });
        best.unwrap()
    }

    fn join(&self, par: &Option<Name>, nil: &Option<Term>, mut comps: Vec<Term>) -> Term {
        match (comps.len(), par) {
            (0, _) => nil.clone().unwrap_or_else(|| Term::Op(name("0"), vec![])),
            (1, _) => comps.pop().unwrap(),
            (_, Some(p)) => self.ac_node(p, comps),
            (_, None) => comps.pop().unwrap(),
        }
    }
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
fn permutations(n: usize, f: &mut dyn FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Canonical form of `t` modulo the theory's active structural equations.
pub fn canonicalize(th: &Theory, t: &Term) -> Term {
    Canon::new(th).canon(t)
}
