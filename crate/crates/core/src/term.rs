//! Terms in nameless (de Bruijn) form.
//!
//! `Lam(sorts, body)` binds `sorts.len()` variables at once; inside `body`,
//! `Bound(0)` is the last binder of the innermost abstraction. Surface names
//! only exist in the parser and printer, so α-equivalent terms are equal.

use std::collections::{BTreeMap, BTreeSet};

use crate::sort::{Name, Sort};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    /// Constructor application. Canonical forms of associative constructors
    /// carry a flattened argument list of length ≥ 2.
    Op(Name, Vec<Term>),
    Bound(u32),
    Free(Name, Sort),
    /// Pattern variable.
    Meta(Name, Sort),
    Lam(Vec<Sort>, Box<Term>),
    /// Application whose head is a variable; `Term::apply` β-reduces when the
    /// head is an abstraction, so closed canonical terms never contain this.
    Apply(Box<Term>, Vec<Term>),
    Tuple(Vec<Term>),
}

/// Simultaneous assignment of pattern variables, at the root context of the
/// pattern it was matched against.
pub type Assignment = BTreeMap<Name, Term>;

impl Term {
    pub fn op(name: &str, args: Vec<Term>) -> Term {
        Term::Op(Name::from(name), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::Op(Name::from(name), vec![])
    }

    pub fn free(name: &str, sort: Sort) -> Term {
        Term::Free(Name::from(name), sort)
    }

    pub fn meta(name: &str, sort: Sort) -> Term {
        Term::Meta(Name::from(name), sort)
    }

    pub fn lam(sorts: Vec<Sort>, body: Term) -> Term {
        Term::Lam(sorts, Box::new(body))
    }

    /// Application with β-reduction when `head` is an abstraction of matching arity.
    pub fn apply(head: Term, args: Vec<Term>) -> Term {
        match head {
            Term::Lam(sorts, body) if sorts.len() == args.len() => body.instantiate_bound(&args),
            h => Term::Apply(Box::new(h), args),
        }
    }

    /// Tuple of a list of terms; a singleton list is the term itself.
    pub fn tuple_of(mut ts: Vec<Term>) -> Term {
        if ts.len() == 1 {
            ts.pop().unwrap()
        } else {
            Term::Tuple(ts)
        }
    }

    pub fn head_op(&self) -> Option<&Name> {
        match self {
            Term::Op(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Op(_, args) | Term::Tuple(args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Lam(_, b) => 1 + b.size(),
            Term::Apply(h, args) => 1 + h.size() + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Constructor nesting depth; leaves and abstractions add nothing.
    pub fn depth(&self) -> usize {
        match self {
            Term::Op(_, args) if args.is_empty() => 0,
            Term::Op(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Tuple(args) => args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Lam(_, b) => b.depth(),
            Term::Apply(h, args) => {
                1 + args.iter().map(Term::depth).chain(Some(h.depth())).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Adds `d` to every bound index `>= cutoff`.
    pub fn shift(&self, d: i64, cutoff: u32) -> Term {
        if d == 0 {
            return self.clone();
        }
        self.map_bound(cutoff, &|i, c| {
            if i >= c {
                Term::Bound((i as i64 + d) as u32)
            } else {
                Term::Bound(i)
            }
        })
    }

    fn map_bound(&self, depth: u32, f: &dyn Fn(u32, u32) -> Term) -> Term {
        match self {
            Term::Bound(i) => f(*i, depth),
            Term::Op(n, args) => Term::Op(n.clone(), args.iter().map(|a| a.map_bound(depth, f)).collect()),
            Term::Tuple(args) => Term::Tuple(args.iter().map(|a| a.map_bound(depth, f)).collect()),
            Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(b.map_bound(depth + s.len() as u32, f))),
            Term::Apply(h, args) => Term::apply(
                h.map_bound(depth, f),
                args.iter().map(|a| a.map_bound(depth, f)).collect(),
            ),
            t => t.clone(),
        }
    }

    /// Substitutes the `args.len()` loose indices of an abstraction body.
    /// `args[j]` replaces the j-th binder (so the last one is `Bound(0)`).
    pub fn instantiate_bound(&self, args: &[Term]) -> Term {
        let k = args.len() as u32;
        self.map_bound(0, &|i, depth| {
            if i < depth {
                Term::Bound(i)
            } else if i - depth < k {
                args[(k - 1 - (i - depth)) as usize].shift(depth as i64, 0)
            } else {
                Term::Bound(i - k)
            }
        })
    }

    /// Does the term mention any bound index `< limit` that is loose at the root?
    pub fn has_loose_below(&self, limit: u32) -> bool {
        self.loose_min(0).map_or(false, |m| m < limit)
    }

    /// Smallest loose index (relative to the root), if any.
    pub fn loose_min(&self, depth: u32) -> Option<u32> {
        match self {
            Term::Bound(i) if *i >= depth => Some(i - depth),
            Term::Op(_, args) | Term::Tuple(args) => args.iter().filter_map(|a| a.loose_min(depth)).min(),
            Term::Lam(s, b) => b.loose_min(depth + s.len() as u32),
            Term::Apply(h, args) => args
                .iter()
                .filter_map(|a| a.loose_min(depth))
                .chain(h.loose_min(depth))
                .min(),
            _ => None,
        }
    }

    pub fn loose_indices(&self, depth: u32, out: &mut BTreeSet<u32>) {
        match self {
            Term::Bound(i) if *i >= depth => {
                out.insert(i - depth);
            }
            Term::Op(_, args) | Term::Tuple(args) => args.iter().for_each(|a| a.loose_indices(depth, out)),
            Term::Lam(s, b) => b.loose_indices(depth + s.len() as u32, out),
            Term::Apply(h, args) => {
                h.loose_indices(depth, out);
                args.iter().for_each(|a| a.loose_indices(depth, out));
            }
            _ => {}
        }
    }

    /// Renames loose indices through `f` (applied to root-relative indices).
    pub fn rename_loose(&self, f: &dyn Fn(u32) -> u32) -> Term {
        self.map_bound(0, &|i, depth| if i < depth { Term::Bound(i) } else { Term::Bound(f(i - depth) + depth) })
    }

    pub fn is_closed(&self) -> bool {
        self.loose_min(0).is_none() && !self.has_metas()
    }

    pub fn has_metas(&self) -> bool {
        match self {
            Term::Meta(..) => true,
            Term::Op(_, args) | Term::Tuple(args) => args.iter().any(Term::has_metas),
            Term::Lam(_, b) => b.has_metas(),
            Term::Apply(h, args) => h.has_metas() || args.iter().any(Term::has_metas),
            _ => false,
        }
    }

    pub fn metas(&self, out: &mut BTreeMap<Name, Sort>) {
        match self {
            Term::Meta(n, s) => {
                out.insert(n.clone(), s.clone());
            }
            Term::Op(_, args) | Term::Tuple(args) => args.iter().for_each(|a| a.metas(out)),
            Term::Lam(_, b) => b.metas(out),
            Term::Apply(h, args) => {
                h.metas(out);
                args.iter().for_each(|a| a.metas(out));
            }
            _ => {}
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<(Name, Sort)>) {
        match self {
            Term::Free(n, s) => {
                out.insert((n.clone(), s.clone()));
            }
            Term::Op(_, args) | Term::Tuple(args) => args.iter().for_each(|a| a.free_vars(out)),
            Term::Lam(_, b) => b.free_vars(out),
            Term::Apply(h, args) => {
                h.free_vars(out);
                args.iter().for_each(|a| a.free_vars(out));
            }
            _ => {}
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut vs = BTreeSet::new();
        self.free_vars(&mut vs);
        vs.into_iter().map(|(n, _)| n).collect()
    }

    /// Replaces pattern variables by their assigned terms (β-reducing applied ones).
    pub fn instantiate(&self, asg: &Assignment) -> Term {
        self.inst_at(asg, 0)
    }

    /// Like `instantiate` for a pattern sitting under `depth` binders of the subject.
    pub fn instantiate_at(&self, asg: &Assignment, depth: u32) -> Term {
        self.inst_at(asg, depth)
    }

    /// Turns the free names `names` into bound variables of `names.len()` new
    /// binders (the first name is the outermost one); other loose indices shift up.
    pub fn abstract_frees(&self, names: &[Name]) -> Term {
        let k = names.len() as u32;
        self.shift(k as i64, 0).abs_at(names, 0)
    }

    fn abs_at(&self, names: &[Name], depth: u32) -> Term {
        let k = names.len() as u32;
        match self {
            Term::Free(n, _) => match names.iter().position(|x| x == n) {
                Some(j) => Term::Bound(depth + k - 1 - j as u32),
                None => self.clone(),
            },
            Term::Op(n, args) => Term::Op(n.clone(), args.iter().map(|a| a.abs_at(names, depth)).collect()),
            Term::Tuple(args) => Term::Tuple(args.iter().map(|a| a.abs_at(names, depth)).collect()),
            Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(b.abs_at(names, depth + s.len() as u32))),
            Term::Apply(h, args) => Term::Apply(
                Box::new(h.abs_at(names, depth)),
                args.iter().map(|a| a.abs_at(names, depth)).collect(),
            ),
            t => t.clone(),
        }
    }

    fn inst_at(&self, asg: &Assignment, depth: u32) -> Term {
        match self {
            Term::Meta(n, _) => match asg.get(n) {
                Some(v) => v.shift(depth as i64, 0),
                None => self.clone(),
            },
            Term::Op(n, args) => Term::Op(n.clone(), args.iter().map(|a| a.inst_at(asg, depth)).collect()),
            Term::Tuple(args) => Term::Tuple(args.iter().map(|a| a.inst_at(asg, depth)).collect()),
            Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(b.inst_at(asg, depth + s.len() as u32))),
            Term::Apply(h, args) => Term::apply(
                h.inst_at(asg, depth),
                args.iter().map(|a| a.inst_at(asg, depth)).collect(),
            ),
            t => t.clone(),
        }
    }

    /// Capture-avoiding substitution of free variables (by name).
    pub fn subst_free(&self, asg: &BTreeMap<Name, Term>) -> Term {
        self.subst_free_at(asg, 0)
    }

    fn subst_free_at(&self, asg: &BTreeMap<Name, Term>, depth: u32) -> Term {
        match self {
            Term::Free(n, _) => match asg.get(n) {
                Some(v) => v.shift(depth as i64, 0),
                None => self.clone(),
            },
            Term::Op(n, args) => Term::Op(n.clone(), args.iter().map(|a| a.subst_free_at(asg, depth)).collect()),
            Term::Tuple(args) => Term::Tuple(args.iter().map(|a| a.subst_free_at(asg, depth)).collect()),
            Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(b.subst_free_at(asg, depth + s.len() as u32))),
            Term::Apply(h, args) => Term::apply(
                h.subst_free_at(asg, depth),
                args.iter().map(|a| a.subst_free_at(asg, depth)).collect(),
            ),
            t => t.clone(),
        }
    }

    /// All closed subterms (abstraction bodies with loose indices are skipped).
    pub fn closed_subterms(&self, out: &mut Vec<Term>) {
        if self.is_closed() {
            out.push(self.clone());
        }
        match self {
            Term::Op(_, args) | Term::Tuple(args) => args.iter().for_each(|a| a.closed_subterms(out)),
            Term::Lam(_, b) => b.closed_subterms(out),
            Term::Apply(h, args) => {
                h.closed_subterms(out);
                args.iter().for_each(|a| a.closed_subterms(out));
            }
            _ => {}
        }
    }
}
