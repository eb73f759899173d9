//! Theory morphisms: sort and constructor maps, translation of terms, and
//! pullback of predicates along a translation.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::predicate::ast::Pred;
use crate::rewrite::canon::Canon;
use crate::rewrite::explore::explore;
use crate::rewrite::step::RewriteStep;
use crate::sort::{name, Name, Sort};
use crate::syntax::elab::{Elab, Scope};
use crate::syntax::lexer::Cursor;
use crate::syntax::raw::{parse_sort, parse_term};
use crate::syntax::theory_file::{compound_ident, split_decls};
use crate::term::{Assignment, Term};
use crate::theory::Theory;

/// `⟦f(x₁, …, xₙ)⟧ = rhs`, with the parameters as pattern variables of `rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub op: Name,
    pub params: Vec<(Name, Sort)>,
    pub rhs: Term,
}

#[derive(Clone, Debug)]
pub struct Morphism {
    pub name: String,
    pub source: Arc<Theory>,
    pub target: Arc<Theory>,
    /// Images of base sorts; compound sorts map structurally.
    pub sort_map: BTreeMap<Name, Sort>,
    pub clauses: BTreeMap<Name, Clause>,
}

impl Morphism {
    pub fn map_sort(&self, s: &Sort) -> Result<Sort> {
        Ok(match s {
            Sort::Base(b) => match self.sort_map.get(b) {
                Some(t) => t.clone(),
                None if self.target.has_sort(s) => s.clone(),
                None => return Err(Error::SortNotInImage(s.clone())),
            },
            Sort::Product(ss) => Sort::Product(ss.iter().map(|x| self.map_sort(x)).collect::<Result<_>>()?),
            Sort::Func(dom, cod) => {
                Sort::Func(dom.iter().map(|x| self.map_sort(x)).collect::<Result<_>>()?, Box::new(self.map_sort(cod)?))
            }
        })
    }

    /// Translation by structural recursion; constructors without a clause keep
    /// their name when the target declares them.
    pub fn translate(&self, t: &Term) -> Result<Term> {
        Ok(match t {
            Term::Op(f, args) => {
                let args: Vec<Term> = args.iter().map(|a| self.translate(a)).collect::<Result<_>>()?;
                match self.clauses.get(f) {
                    Some(c) => {
                        let asg: Assignment = c.params.iter().map(|(x, _)| x.clone()).zip(args).collect();
                        c.rhs.instantiate(&asg)
                    }
                    None if self.target.op(f).is_some() => Term::Op(f.clone(), args),
                    None => return Err(Error::UnknownConstructor(f.to_string())),
                }
            }
            Term::Bound(i) => Term::Bound(*i),
            Term::Free(n, s) => Term::Free(n.clone(), self.map_sort(s)?),
            Term::Meta(n, s) => Term::Meta(n.clone(), self.map_sort(s)?),
            Term::Lam(ss, b) => {
                Term::Lam(ss.iter().map(|s| self.map_sort(s)).collect::<Result<_>>()?, Box::new(self.translate(b)?))
            }
            Term::Apply(h, args) => {
                Term::apply(self.translate(h)?, args.iter().map(|a| self.translate(a)).collect::<Result<_>>()?)
            }
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|a| self.translate(a)).collect::<Result<_>>()?),
        })
    }

    /// Checks that every clause is well sorted in the target.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for op in &self.source.ops {
            let Some(c) = self.clauses.get(&op.name) else {
                if self.target.op(&op.name).is_none() {
                    out.push(format!("no clause for `{}`", op.name));
                }
                continue;
            };
            let want = self.map_sort(&op.result);
            let ctx: BTreeMap<Name, Sort> = c.params.iter().cloned().collect();
            match (want, sort_with_metas(&self.target, &ctx, &c.rhs)) {
                (Ok(w), Ok(s)) if w == s => {}
                (Ok(w), Ok(s)) => out.push(format!("clause `{}` has sort {s}, expected {w}", op.name)),
                (Err(e), _) | (_, Err(e)) => out.push(format!("clause `{}`: {e}", op.name)),
            }
        }
        out
    }
}

fn sort_with_metas(th: &Theory, metas: &BTreeMap<Name, Sort>, t: &Term) -> Result<Sort> {
    let frees: BTreeMap<Name, Term> = metas.iter().map(|(x, s)| (x.clone(), Term::Free(x.clone(), s.clone()))).collect();
    let mut ms = BTreeMap::new();
    t.metas(&mut ms);
    let asg: Assignment = ms.keys().filter_map(|k| frees.get(k).map(|v| (k.clone(), v.clone()))).collect();
    th.sort_of(&[], &t.instantiate(&asg))
}

/// `pullback(φ)` at source sort `s`: holds of `t` iff `φ` holds of the translation of `t`.
pub fn pullback_predicate(m: &Arc<Morphism>, phi: Pred, phi_sort: &Sort, s: &Sort) -> Result<Pred> {
    let image = m.map_sort(s)?;
    if &image != phi_sort {
        return Err(Error::SortNotInImage(phi_sort.clone()));
    }
    Ok(match phi {
        Pred::Top => Pred::Top,
        Pred::Bot => Pred::Bot,
        p => Pred::Pullback(m.clone(), Box::new(p)),
    })
}

/// Parses a morphism file:
///
/// ```text
/// morphism nlambda-to-pi
/// source nlambda
/// target pi
/// map sort T = [N -> P]
/// map var(x) = \u. out1(x; u)
/// ```
pub fn parse_morphism(src: &str, resolve: &dyn Fn(&str) -> Result<Theory>) -> Result<Morphism> {
    let mut mname = String::from("anonymous");
    let mut source = None;
    let mut target = None;
    let mut maps = Vec::new();
    for d in split_decls(src) {
        let mut c = Cursor::new(&d.text)?;
        let kw = c.ident()?;
        match kw.as_str() {
            "morphism" => mname = compound_ident(&mut c, &["-", "."])?,
            "source" => source = Some(Arc::new(resolve(&compound_ident(&mut c, &["-", "."])?)?)),
            "target" => target = Some(Arc::new(resolve(&compound_ident(&mut c, &["-", "."])?)?)),
            "map" => maps.push(d),
            other => return Err(Error::parse(d.line, format!("unknown declaration `{other}`"))),
        }
    }
    let source = source.ok_or_else(|| Error::parse(1, "missing `source`"))?;
    let target = target.ok_or_else(|| Error::parse(1, "missing `target`"))?;
    let mut m = Morphism { name: mname, source, target, sort_map: BTreeMap::new(), clauses: BTreeMap::new() };
    for d in maps.iter().filter(|d| d.text.starts_with("map sort ")) {
        let mut c = Cursor::new(&d.text)?;
        c.ident()?;
        c.ident()?;
        let s = c.ident()?;
        c.expect_sym("=")?;
        let t = parse_sort(&mut c)?;
        c.expect_eof()?;
        m.sort_map.insert(name(&s), t);
    }
    for d in maps.iter().filter(|d| !d.text.starts_with("map sort ")) {
        let clause = parse_clause(&m, &d.text).map_err(|e| Error::parse(d.line, e.to_string()))?;
        m.clauses.insert(clause.op.clone(), clause);
    }
    let problems = m.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidTheory(problems.join("; ")));
    }
    Ok(m)
}

fn parse_clause(m: &Morphism, text: &str) -> Result<Clause> {
    let mut c = Cursor::new(text)?;
    c.ident()?;
    let f = c.ident()?;
    let decl = m.source.op(&f).ok_or_else(|| Error::UnknownConstructor(f.clone()))?.clone();
    let mut xs = Vec::new();
    if c.eat_sym("(") && !c.eat_sym(")") {
        loop {
            xs.push(c.ident()?);
            if c.eat_sym(")") {
                break;
            }
            if !c.eat_sym(";") {
                c.expect_sym(",")?;
            }
        }
    }
    if xs.len() != decl.args.len() {
        return Err(Error::IllSorted(format!("`{f}` takes {} arguments", decl.args.len())));
    }
    c.expect_sym("=")?;
    let raw = parse_term(&mut c, &m.target.notation())?;
    c.expect_eof()?;
    let params: Vec<(Name, Sort)> =
        xs.iter().zip(&decl.args).map(|(x, s)| Ok((name(x), m.map_sort(s)?))).collect::<Result<_>>()?;
    let mut scope = Scope::terms();
    scope.metas = params.iter().map(|(x, s)| (x.to_string(), s.clone())).collect();
    let mut e = Elab::new(&m.target, scope);
    let (rhs, _) = e.term(&raw, Some(&m.map_sort(&decl.result)?))?;
    Ok(Clause { op: name(&f), params, rhs })
}

pub const NLAMBDA_TO_PI: &str = include_str!("../../theories/nlambda-to-pi.ntm");

/// The translation of the name-passing λ-calculus into the π-calculus.
pub fn nlambda_to_pi() -> Result<Morphism> {
    parse_morphism(NLAMBDA_TO_PI, &|n| super::builtin(n))
}

/// A built-in morphism by name, or a morphism file.
pub fn load_morphism(reference: &str) -> Result<Morphism> {
    if reference == "nlambda-to-pi" {
        return nlambda_to_pi();
    }
    let src = std::fs::read_to_string(reference).map_err(|e| Error::UnknownTheory(format!("{reference}: {e}")))?;
    parse_morphism(&src, &|n| super::load_theory(n))
}

/// Drops parallel components that can never act again: inputs (possibly
/// replicated) on restricted names that nothing else mentions.
pub fn erase_inert(th: &Theory, t: &Term) -> Term {
    let c = Canon::new(th);
    let t = c.canon(t);
    let Some(r) = th.structure().restriction.clone() else { return t };
    let Some(par) = r.par.clone() else { return t };
    // open the prenex of restrictions
    let mut names: Vec<Name> = Vec::new();
    let mut body = t.clone();
    while let Term::Op(f, args) = &body {
        if *f != r.op || args.len() != 1 {
            break;
        }
        let Term::Lam(ss, b) = &args[0] else { break };
        let fresh: Vec<Term> = ss
            .iter()
            .map(|s| {
                names.push(name(&format!("%r{}", names.len())));
                Term::Free(names.last().unwrap().clone(), s.clone())
            })
            .collect();
        body = b.instantiate_bound(&fresh);
    }
    if names.is_empty() {
        return t;
    }
    let mut parts = match &body {
        Term::Op(f, xs) if *f == par => xs.clone(),
        b => vec![b.clone()],
    };
    let restricted: BTreeSet<Name> = names.iter().cloned().collect();
    loop {
        let mut drop: Option<Name> = None;
        for x in &restricted {
            let listeners: Vec<bool> = parts.iter().map(|p| input_subject(th, p).as_ref() == Some(x)).collect();
            if !listeners.iter().any(|l| *l) {
                continue;
            }
            let mentioned = parts.iter().zip(&listeners).any(|(p, l)| !l && p.free_names().contains(x));
            if !mentioned {
                drop = Some(x.clone());
                break;
            }
        }
        match drop {
            Some(x) => parts.retain(|p| input_subject(th, p).as_ref() != Some(&x)),
            None => break,
        }
    }
    let unit = th.structure().ac.get(&par).and_then(|a| a.unit.clone());
    let mut out = match parts.len() {
        0 => match unit {
            Some(u) => u,
            None => return t,
        },
        1 => parts.pop().unwrap(),
        _ => Term::Op(par, parts),
    };
    let sorts: Vec<Sort> = names.iter().map(|_| th.name_sorts().first().cloned().unwrap_or(Sort::base("N"))).collect();
    for (i, n) in names.iter().enumerate().rev() {
        out = Term::op(&r.op, vec![Term::lam(vec![sorts[i].clone()], out.abstract_frees(&[n.clone()]))]);
    }
    c.canon(&out)
}

/// The channel a component waits on, for inputs and replicated inputs.
fn input_subject(th: &Theory, t: &Term) -> Option<Name> {
    let Term::Op(f, args) = t else { return None };
    if th.structure().unfold.contains_key(f) && args.len() == 1 {
        return input_subject(th, &args[0]);
    }
    let d = th.op(f)?;
    if d.args.len() == 2 && th.is_name_sort(&d.args[0]) && d.binds(1) {
        if let Term::Free(n, _) = &args[0] {
            return Some(n.clone());
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct Preservation {
    pub source: Term,
    pub target: Term,
    /// Target steps needed to reach the image of the step's target, if found.
    pub steps: Option<usize>,
    pub explored: usize,
}

/// Weak preservation of one source step: the image of its target is reachable
/// from the image of its source, applied to a fresh continuation name, up to
/// congruence and erasure of inert restricted inputs.
pub fn weakly_preserves(m: &Morphism, step: &RewriteStep, depth: usize, cap: usize) -> Result<Preservation> {
    let th = &*m.target;
    let s = m.translate(&step.source)?;
    let t = m.translate(&step.target)?;
    let (s, t) = saturate(th, &s, &t)?;
    let goal = erase_inert(th, &t);
    let g = explore(th, &s, depth, cap);
    let found = (0..g.nodes.len()).filter(|&v| erase_inert(th, &g.nodes[v]) == goal).map(|v| g.level[v]).min();
    Ok(Preservation { source: g.nodes[0].clone(), target: goal, steps: found, explored: g.nodes.len() })
}

/// Applies abstraction images to fresh names until they are processes.
fn saturate(th: &Theory, s: &Term, t: &Term) -> Result<(Term, Term)> {
    let (mut s, mut t) = (s.clone(), t.clone());
    let mut taken = s.free_names();
    taken.extend(t.free_names());
    let mut k = 0;
    while let Sort::Func(dom, _) = th.sort_of(&[], &s)? {
        let args: Vec<Term> = dom
            .iter()
            .map(|d| {
                let mut x = format!("u{k}");
                while taken.contains(&*x) {
                    k += 1;
                    x = format!("u{k}");
                }
                k += 1;
                Term::Free(name(&x), d.clone())
            })
            .collect();
        s = Term::apply(s, args.clone());
        t = Term::apply(t, args);
    }
    Ok((s, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::print::print_term;
    use crate::syntax::elab::parse_term_in;
    use crate::theories::builtin;

    fn tr(m: &Morphism, src: &str) -> String {
        let t = parse_term_in(&m.source, src, Some(&Sort::base("T"))).unwrap();
        print_term(&m.target, &m.translate(&t).unwrap())
    }

    #[test]
    fn clauses() {
        let m = nlambda_to_pi().unwrap();
        assert!(m.validate().is_empty());
        assert_eq!(tr(&m, "var(x)"), "\\y:N. out1(x, y)");
        assert_eq!(tr(&m, "lam(\\x. var(x))"), "\\x:N. in2(x, \\y z. out1(y, z))");
    }

    #[test]
    fn beta_is_weakly_preserved() {
        let m = nlambda_to_pi().unwrap();
        let s = parse_term_in(&m.source, "app(lam(\\x. var(x)), y)", Some(&Sort::base("T"))).unwrap();
        let steps = crate::rewrite::step(&m.source, &s);
        assert_eq!(steps.len(), 1);
        let p = weakly_preserves(&m, &steps[0], 4, 500).unwrap();
        assert_eq!(p.steps, Some(1));
    }

    #[test]
    fn inert_inputs_are_erased() {
        let pi = builtin("pi").unwrap();
        let t = parse_term_in(&pi, "nu(\\x. !in1(x, \\y. out1(y, y))) | out1(a, b)", None).unwrap();
        let u = parse_term_in(&pi, "out1(a, b)", None).unwrap();
        assert_eq!(erase_inert(&pi, &t), Canon::new(&pi).canon(&u));
        let live = parse_term_in(&pi, "nu(\\x. in1(x, \\y. 0) | out1(x, x))", None).unwrap();
        assert_eq!(erase_inert(&pi, &live), Canon::new(&pi).canon(&live));
    }

    #[test]
    fn pullback_of_constants() {
        let m = Arc::new(nlambda_to_pi().unwrap());
        let t = Sort::base("T");
        let img = m.map_sort(&t).unwrap();
        assert!(matches!(pullback_predicate(&m, Pred::Top, &img, &t).unwrap(), Pred::Top));
        assert!(matches!(pullback_predicate(&m, Pred::Top, &Sort::base("P"), &t), Err(Error::SortNotInImage(_))));
    }
}
