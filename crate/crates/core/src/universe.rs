//! Finite carriers for bounded quantification: all closed canonical terms of
//! a sort up to a constructor depth, over a pool of names.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::rewrite::canon::Canon;
use crate::sort::{name, Sort};
use crate::term::Term;
use crate::theory::Theory;

const FRESH: [&str; 4] = ["n", "m", "k", "l"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniverseParams {
    pub depth: usize,
    /// Fresh names added to every name sort.
    pub fresh_names: usize,
    /// Generation fails with a resource error beyond this many terms per sort.
    pub max_terms: usize,
}

impl Default for UniverseParams {
    fn default() -> Self {
        UniverseParams { depth: 3, fresh_names: 2, max_terms: 200_000 }
    }
}

type Key = (Sort, Vec<Sort>, usize);

pub struct Universe<'a> {
    pub th: &'a Theory,
    pub params: UniverseParams,
    /// Leaves per sort: pool names and free variables of the seed terms.
    leaves: Vec<Term>,
    cache: Mutex<HashMap<Key, Arc<Vec<Term>>>>,
}

fn fresh_name(i: usize) -> String {
    if i < FRESH.len() {
        FRESH[i].to_string()
    } else {
        format!("{}{}", FRESH[i % FRESH.len()], i / FRESH.len())
    }
}

impl<'a> Universe<'a> {
    /// A universe whose name pool contains the free variables of `seeds`.
    pub fn new(th: &'a Theory, params: UniverseParams, seeds: &[Term]) -> Universe<'a> {
        let mut vars = BTreeSet::new();
        for t in seeds {
            t.free_vars(&mut vars);
        }
        let taken: BTreeSet<String> = vars
            .iter()
            .map(|(n, _)| n.to_string())
            .chain(th.ops.iter().map(|o| o.name.to_string()))
            .chain(th.macros.iter().map(|m| m.name.clone()))
            .collect();
        let mut leaves: Vec<Term> = vars.into_iter().map(|(n, s)| Term::Free(n, s)).collect();
        for s in th.name_sorts() {
            let mut added = 0;
            let mut i = 0;
            while added < params.fresh_names {
                let x = fresh_name(i);
                i += 1;
                if taken.contains(&x) || leaves.iter().any(|l| matches!(l, Term::Free(n, _) if **n == *x)) {
                    continue;
                }
                leaves.push(Term::Free(name(&x), s.clone()));
                added += 1;
            }
        }
        leaves.sort();
        Universe { th, params, leaves, cache: Mutex::new(HashMap::new()) }
    }

    /// The pool of names of a name sort.
    pub fn names(&self, s: &Sort) -> Vec<Term> {
        self.leaves.iter().filter(|l| matches!(l, Term::Free(_, t) if t == s)).cloned().collect()
    }

    /// Closed terms of sort `s` up to the universe depth.
    pub fn terms(&self, s: &Sort) -> Result<Arc<Vec<Term>>> {
        self.at(s, &[], self.params.depth)
    }

    /// Closed terms of sort `s` up to depth `d`.
    pub fn terms_at(&self, s: &Sort, d: usize) -> Result<Arc<Vec<Term>>> {
        self.at(s, &[], d)
    }

    /// Terms of sort `s` in the bound context `ctx`, up to depth `d`.
    pub fn at(&self, s: &Sort, ctx: &[Sort], d: usize) -> Result<Arc<Vec<Term>>> {
        let key = (s.clone(), ctx.to_vec(), d);
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.generate(s, ctx, d)?);
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    fn generate(&self, s: &Sort, ctx: &[Sort], d: usize) -> Result<Vec<Term>> {
        match s {
            Sort::Func(dom, cod) => {
                let mut inner = ctx.to_vec();
                inner.extend(dom.iter().cloned());
                let body = self.at(cod, &inner, d)?;
                Ok(body.iter().map(|b| Term::Lam(dom.clone(), Box::new(b.clone()))).collect())
            }
            Sort::Product(ss) => {
                let parts: Vec<Arc<Vec<Term>>> = ss.iter().map(|x| self.at(x, ctx, d)).collect::<Result<_>>()?;
                let mut out = Vec::new();
                for combo in cartesian(&parts.iter().map(|p| p.as_slice()).collect::<Vec<_>>()) {
                    out.push(Term::Tuple(combo));
                    self.check(out.len(), s)?;
                }
                Ok(out)
            }
            Sort::Base(_) => {
                let c = Canon::new(self.th);
                let mut set = BTreeSet::new();
                for (i, b) in ctx.iter().rev().enumerate() {
                    if b == s {
                        set.insert(Term::Bound(i as u32));
                    }
                }
                for l in &self.leaves {
                    if matches!(l, Term::Free(_, t) if t == s) {
                        set.insert(l.clone());
                    }
                }
                for o in &self.th.ops {
                    if &o.result != s {
                        continue;
                    }
                    if o.args.is_empty() {
                        set.insert(c.canon(&Term::Op(o.name.clone(), vec![])));
                        continue;
                    }
                    if d == 0 {
                        continue;
                    }
                    let parts: Vec<Arc<Vec<Term>>> =
                        o.args.iter().map(|a| self.at(a, ctx, d - 1)).collect::<Result<_>>()?;
                    let slices: Vec<&[Term]> = parts.iter().map(|p| p.as_slice()).collect();
                    let total: usize = slices.iter().map(|p| p.len()).product();
                    self.check(set.len() + total / 2, s)?;
                    let comm = self.th.structure().ac.get(&o.name).map_or(false, |a| a.comm);
                    for combo in cartesian(&slices) {
                        if comm && combo.len() == 2 && combo[0] > combo[1] {
                            continue;
                        }
                        set.insert(c.canon(&Term::Op(o.name.clone(), combo)));
                    }
                    self.check(set.len(), s)?;
                }
                Ok(set.into_iter().collect())
            }
        }
    }

    fn check(&self, n: usize, s: &Sort) -> Result<()> {
        if n > self.params.max_terms {
            Err(Error::ResourceCap(format!(
                "universe at sort {s} exceeds {} terms (depth {})",
                self.params.max_terms, self.params.depth
            )))
        } else {
            Ok(())
        }
    }
}

/// Cartesian product of the given lists, in lexicographic order.
pub fn cartesian(parts: &[&[Term]]) -> Vec<Vec<Term>> {
    let mut out = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for prefix in &out {
            for x in p.iter() {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}
