//! λ-theory presentations: sorts, constructors, structural equations,
//! rewrite rules, flags and term macros.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sort::{name, Name, Sort};
use crate::syntax::raw::Notation;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixity {
    Plain,
    Infix(String),
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDecl {
    pub name: Name,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub fixity: Fixity,
}

impl OpDecl {
    /// Does argument `i` bind variables?
    pub fn binds(&self, i: usize) -> bool {
        self.args.get(i).map_or(false, Sort::is_func)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortDecl {
    pub name: Name,
    /// Name sorts get fresh free constants in generated universes.
    pub names: bool,
}

#[derive(Clone, Debug)]
pub struct Equation {
    pub name: Name,
    pub vars: BTreeMap<Name, Sort>,
    pub lhs: Term,
    pub rhs: Term,
}

/// Side condition on a rule: `test` must hold of `pattern` instantiated by the match.
#[derive(Clone)]
pub struct Guard {
    pub pattern: Term,
    pub label: String,
    pub test: Arc<dyn Fn(&Term) -> bool + Send + Sync>,
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Guard({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub name: Name,
    pub params: Vec<(Name, Sort)>,
    pub source: Term,
    pub target: Term,
    pub congruence: Vec<(Name, usize)>,
    pub guard: Option<Guard>,
}

#[derive(Clone, Debug)]
pub struct Macro {
    pub name: String,
    /// Curried parameter groups, e.g. `!(p:P)(n:N)` has two.
    pub params: Vec<Vec<(Name, Sort)>>,
    /// Body with parameters as metas of the same name.
    pub body: Term,
    pub sort: Sort,
}

/// Predicate definition kept as source text; elaborated by the predicate layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcInfo {
    pub comm: bool,
    pub assoc: bool,
    pub unit: Option<Term>,
}

/// Binder scope laws for a restriction-like operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub op: Name,
    pub par: Option<Name>,
    pub nil: Option<Term>,
}

/// How the active equations are used by the canonicalizer.
#[derive(Clone, Debug, Default)]
pub struct Structure {
    pub ac: BTreeMap<Name, AcInfo>,
    /// Unfold laws `g(p) = f(p, g(p))`: maps g to f.
    pub unfold: BTreeMap<Name, Name>,
    pub restriction: Option<Restriction>,
    /// Oriented normalizers, larger side first.
    pub oriented: Vec<(Name, Term, Term)>,
}

#[derive(Clone, Debug, Default)]
pub struct Theory {
    pub name: String,
    pub sorts: Vec<SortDecl>,
    pub ops: Vec<OpDecl>,
    pub equations: Vec<Equation>,
    pub rules: Vec<Rule>,
    pub flags: BTreeMap<Name, bool>,
    pub macros: Vec<Macro>,
    pub defs: Vec<PredDef>,
    /// Problems found while building the presentation from text.
    pub build_diagnostics: Vec<Diagnostic>,
    structure: Structure,
}

impl Theory {
    pub fn new(name: &str) -> Theory {
        Theory { name: name.to_string(), ..Default::default() }
    }

    pub fn op(&self, n: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| &*o.name == n)
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        let mut bs = Vec::new();
        s.base_names(&mut bs);
        bs.iter().all(|b| self.sorts.iter().any(|d| d.name == *b))
    }

    pub fn is_name_sort(&self, s: &Sort) -> bool {
        matches!(s, Sort::Base(b) if self.sorts.iter().any(|d| d.name == *b && d.names))
    }

    pub fn name_sorts(&self) -> Vec<Sort> {
        self.sorts.iter().filter(|d| d.names).map(|d| Sort::Base(d.name.clone())).collect()
    }

    pub fn macro_named(&self, n: &str) -> Option<&Macro> {
        self.macros.iter().find(|m| m.name == n)
    }

    pub fn infix_op(&self, sym: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| o.fixity == Fixity::Infix(sym.to_string()))
    }

    pub fn prefix_op(&self, sym: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| o.fixity == Fixity::Prefix && &*o.name == sym)
    }

    pub fn notation(&self) -> Notation {
        let mut nt = Notation::default();
        for o in &self.ops {
            match &o.fixity {
                Fixity::Infix(s) => nt.infix.push(s.clone()),
                Fixity::Prefix => nt.prefix.push(o.name.to_string()),
                Fixity::Plain => {}
            }
        }
        for m in &self.macros {
            if !m.name.starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                nt.symbol_macros.insert(m.name.clone());
            }
        }
        nt
    }

    pub fn flag(&self, n: &str) -> Option<bool> {
        self.flags.get(n).copied()
    }

    /// Is the equation or rule named `n` active under the current flags?
    pub fn active(&self, n: &str) -> bool {
        self.flags.get(n).copied().unwrap_or(true)
    }

    pub fn set_flag(&mut self, n: &str, on: bool) -> Result<()> {
        let known = self.equations.iter().any(|e| &*e.name == n) || self.rules.iter().any(|r| &*r.name == n);
        if !known && !self.flags.contains_key(n) {
            return Err(Error::InvalidTheory(format!("unknown flag `{n}`")));
        }
        self.flags.insert(name(n), on);
        self.refresh();
        Ok(())
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn active_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| self.active(&r.name))
    }

    /// Recomputes the equation classification; call after editing equations or flags.
    pub fn refresh(&mut self) {
        self.structure = classify(self);
    }

    /// Sort of `t` with `ctx` giving the sorts of bound indices (innermost last).
    pub fn sort_of(&self, ctx: &[Sort], t: &Term) -> Result<Sort> {
        match t {
            Term::Op(f, args) => {
                let d = self.op(f).ok_or_else(|| Error::UnknownConstructor(f.to_string()))?;
                let flat = self.structure.ac.get(f).map_or(false, |a| a.assoc) && args.len() > 2;
                if !flat && args.len() != d.args.len() {
                    return Err(Error::IllSorted(format!("`{f}` expects {} arguments, got {}", d.args.len(), args.len())));
                }
                for (i, a) in args.iter().enumerate() {
                    let want = if flat { &d.args[0] } else { &d.args[i] };
                    let got = self.sort_of(ctx, a)?;
                    if &got != want {
                        return Err(Error::IllSorted(format!(
                            "argument {i} of `{f}` has sort {got}, expected {want}"
                        )));
                    }
                }
                Ok(d.result.clone())
            }
            Term::Bound(i) => {
                let i = *i as usize;
                if i < ctx.len() {
                    Ok(ctx[ctx.len() - 1 - i].clone())
                } else {
                    Err(Error::UnboundVariable(format!("#{i}")))
                }
            }
            Term::Free(_, s) | Term::Meta(_, s) => Ok(s.clone()),
            Term::Lam(ss, b) => {
                let mut inner = ctx.to_vec();
                inner.extend(ss.iter().cloned());
                let cod = self.sort_of(&inner, b)?;
                Ok(Sort::func(ss.clone(), cod))
            }
            Term::Apply(h, args) => match self.sort_of(ctx, h)? {
                Sort::Func(dom, cod) if dom.len() == args.len() => {
                    for (a, want) in args.iter().zip(&dom) {
                        let got = self.sort_of(ctx, a)?;
                        if &got != want {
                            return Err(Error::SortMismatch { expected: want.clone(), found: got });
                        }
                    }
                    Ok(*cod)
                }
                s => Err(Error::IllSorted(format!("cannot apply a term of sort {s} to {} arguments", args.len()))),
            },
            Term::Tuple(ts) => Ok(Sort::Product(ts.iter().map(|a| self.sort_of(ctx, a)).collect::<Result<_>>()?)),
        }
    }
}

/// Sort of a term in a context of bound variables.
pub fn check_sort(th: &Theory, ctx: &[Sort], t: &Term) -> Result<Sort> {
    th.sort_of(ctx, t)
}

/// Semantic checks on a presentation; empty iff it is well-formed.
pub fn validate_theory(th: &Theory) -> Vec<Diagnostic> {
    let mut out = th.build_diagnostics.clone();
    let mut diag = |loc: String, reason: String| {
        if !out.iter().any(|d: &Diagnostic| d.location == loc && d.reason == reason) {
            out.push(Diagnostic { location: loc, reason });
        }
    };
    let mut seen = BTreeSet::new();
    for s in &th.sorts {
        if !seen.insert(s.name.clone()) {
            diag(format!("sort {}", s.name), "duplicate name".into());
        }
    }
    let mut seen = BTreeSet::new();
    for o in &th.ops {
        if !seen.insert(o.name.clone()) {
            diag(format!("op {}", o.name), "duplicate name".into());
        }
        for s in o.args.iter().chain(Some(&o.result)) {
            if !th.has_sort(s) {
                diag(format!("op {}", o.name), format!("undeclared sort in {s}"));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for e in &th.equations {
        let loc = format!("eq {}", e.name);
        if !seen.insert(e.name.clone()) {
            diag(loc.clone(), "duplicate name".into());
        }
        match (th.sort_of(&[], &e.lhs), th.sort_of(&[], &e.rhs)) {
            (Ok(a), Ok(b)) if a != b => diag(loc, format!("sides have different sorts {a} and {b}")),
            (Err(err), _) | (_, Err(err)) => diag(loc, err.to_string()),
            _ => {}
        }
    }
    let mut seen = BTreeSet::new();
    for r in &th.rules {
        let loc = format!("rule {}", r.name);
        if !seen.insert(r.name.clone()) {
            diag(loc.clone(), "duplicate name".into());
        }
        match (th.sort_of(&[], &r.source), th.sort_of(&[], &r.target)) {
            (Ok(a), Ok(b)) if a != b => diag(loc.clone(), format!("source and target have different sorts {a} and {b}")),
            (Err(err), _) | (_, Err(err)) => diag(loc.clone(), err.to_string()),
            _ => {}
        }
        let mut allowed: BTreeMap<Name, Sort> = r.params.iter().cloned().collect();
        r.source.metas(&mut allowed);
        let mut used = BTreeMap::new();
        r.target.metas(&mut used);
        for v in used.keys() {
            if !allowed.contains_key(v) {
                diag(loc.clone(), format!("unbound pattern variable `{v}`"));
            }
        }
        for (op, i) in &r.congruence {
            match th.op(op) {
                None => diag(loc.clone(), format!("congruence position {op}.{i} names an unknown constructor")),
                Some(d) if *i >= d.args.len() => {
                    diag(loc.clone(), format!("congruence position {op}.{i} is out of range"))
                }
                _ => {}
            }
        }
    }
    for f in th.flags.keys() {
        let known = th.equations.iter().any(|e| e.name == *f) || th.rules.iter().any(|r| r.name == *f);
        if !known {
            diag(format!("flag {f}"), "flag does not name an equation or rule".into());
        }
    }
    let mut seen = BTreeSet::new();
    for m in &th.macros {
        if !seen.insert(m.name.clone()) {
            diag(format!("macro {}", m.name), "duplicate name".into());
        }
    }
    out
}

fn meta_name(t: &Term) -> Option<&Name> {
    match t {
        Term::Meta(n, _) => Some(n),
        _ => None,
    }
}

fn is_constant(t: &Term) -> bool {
    matches!(t, Term::Op(_, a) if a.is_empty())
}

fn binary<'a>(t: &'a Term) -> Option<(&'a Name, &'a Term, &'a Term)> {
    match t {
        Term::Op(f, a) if a.len() == 2 => Some((f, &a[0], &a[1])),
        _ => None,
    }
}

fn is_comm(l: &Term, r: &Term) -> Option<Name> {
    let (f, a, b) = binary(l)?;
    let (g, c, d) = binary(r)?;
    let (x, y) = (meta_name(a)?, meta_name(b)?);
    (f == g && x != y && meta_name(c)? == y && meta_name(d)? == x).then(|| f.clone())
}

fn is_assoc(l: &Term, r: &Term) -> Option<Name> {
    let check = |l: &Term, r: &Term| -> Option<Name> {
        let (f, ab, c) = binary(l)?;
        let (fa, a, b) = binary(ab)?;
        let (g, a2, bc) = binary(r)?;
        let (gb, b2, c2) = binary(bc)?;
        let ms = [a, b, c].map(meta_name);
        let ok = f == fa && f == g && f == gb && ms.iter().all(Option::is_some) && a == a2 && b == b2 && c == c2;
        ok.then(|| f.clone())
    };
    check(l, r).or_else(|| check(r, l))
}

fn is_unit(l: &Term, r: &Term) -> Option<(Name, Term)> {
    let check = |l: &Term, r: &Term| -> Option<(Name, Term)> {
        let (f, a, b) = binary(l)?;
        meta_name(r)?;
        if a == r && is_constant(b) {
            Some((f.clone(), b.clone()))
        } else if b == r && is_constant(a) {
            Some((f.clone(), a.clone()))
        } else {
            None
        }
    };
    check(l, r).or_else(|| check(r, l))
}

fn is_unfold(l: &Term, r: &Term) -> Option<(Name, Name)> {
    let check = |l: &Term, r: &Term| -> Option<(Name, Name)> {
        let Term::Op(g, ga) = l else { return None };
        if ga.len() != 1 || meta_name(&ga[0]).is_none() {
            return None;
        }
        let (f, a, b) = binary(r)?;
        ((a == &ga[0] && b == l) || (b == &ga[0] && a == l)).then(|| (g.clone(), f.clone()))
    };
    check(l, r).or_else(|| check(r, l))
}

fn binder_op(th: &Theory, t: &Term) -> Option<Name> {
    let Term::Op(b, args) = t else { return None };
    let d = th.op(b)?;
    match d.args.as_slice() {
        [Sort::Func(dom, cod)] if dom.len() == 1 && th.is_name_sort(&dom[0]) && **cod == d.result => {
            let _ = args;
            Some(b.clone())
        }
        _ => None,
    }
}

fn scope_nil(l: &Term, r: &Term) -> Option<Term> {
    let check = |l: &Term, r: &Term| -> Option<Term> {
        let Term::Op(_, args) = l else { return None };
        match args.as_slice() {
            [Term::Lam(_, body)] if is_constant(r) && **body == *r => Some(r.clone()),
            _ => None,
        }
    };
    check(l, r).or_else(|| check(r, l))
}

fn classify(th: &Theory) -> Structure {
    let mut st = Structure::default();
    let mut scope_ops = Vec::new();
    let mut nil = None;
    for e in th.equations.iter().filter(|e| th.active(&e.name)) {
        let (l, r) = (&e.lhs, &e.rhs);
        if let Some(f) = is_comm(l, r) {
            st.ac.entry(f).or_insert(AcInfo { comm: false, assoc: false, unit: None }).comm = true;
        } else if let Some(f) = is_assoc(l, r) {
            st.ac.entry(f).or_insert(AcInfo { comm: false, assoc: false, unit: None }).assoc = true;
        } else if let Some((f, u)) = is_unit(l, r) {
            st.ac.entry(f).or_insert(AcInfo { comm: false, assoc: false, unit: None }).unit = Some(u);
        } else if let Some((g, f)) = is_unfold(l, r) {
            st.unfold.insert(g, f);
        } else if let Some(b) = binder_op(th, l).or_else(|| binder_op(th, r)) {
            if let Some(z) = scope_nil(l, r) {
                nil = Some(z);
            }
            scope_ops.push(b);
        } else {
            let (big, small) = if r.size() > l.size() { (r, l) } else { (l, r) };
            st.oriented.push((e.name.clone(), big.clone(), small.clone()));
        }
    }
    if let Some(b) = scope_ops.first() {
        let result = th.op(b).map(|d| d.result.clone());
        let par = st
            .ac
            .keys()
            .find(|f| th.op(f).map(|d| Some(d.result.clone()) == result).unwrap_or(false))
            .cloned();
        st.restriction = Some(Restriction { op: b.clone(), par, nil });
    }
    st
}
