//! Resolution of raw syntax against a theory: names become bound indices,
//! pattern variables, free names or constructors, and sorts are checked.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sort::{name, Sort};
use crate::syntax::raw::{parse_term, Raw};
use crate::syntax::lexer::Cursor;
use crate::term::{Assignment, Term};
use crate::theory::Theory;

/// What unknown identifiers may become.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub metas: BTreeMap<String, Sort>,
    pub free: BTreeMap<String, Sort>,
    /// Unknown identifiers become pattern variables (equations, rules).
    pub infer_metas: bool,
    /// Unknown identifiers become free names of the expected sort.
    pub infer_free: bool,
}

impl Scope {
    pub fn terms() -> Scope {
        Scope { infer_free: true, ..Default::default() }
    }

    pub fn patterns() -> Scope {
        Scope { infer_metas: true, ..Default::default() }
    }
}

pub struct Elab<'a> {
    th: &'a Theory,
    pub scope: Scope,
    bound: Vec<(String, Sort)>,
    holes: usize,
}

impl<'a> Elab<'a> {
    pub fn new(th: &'a Theory, scope: Scope) -> Elab<'a> {
        Elab { th, scope, bound: Vec::new(), holes: 0 }
    }

    /// Elaborates with the given bound variables in scope (outermost first).
    pub fn with_bound(mut self, bound: Vec<(String, Sort)>) -> Elab<'a> {
        self.bound = bound;
        self
    }

    pub fn term(&mut self, raw: &Raw, expected: Option<&Sort>) -> Result<(Term, Sort)> {
        let (t, s) = self.synth(raw, expected)?;
        if let Some(want) = expected {
            if &s != want {
                return Err(Error::IllSorted(format!("expected a term of sort {want}, found sort {s}")));
            }
        }
        Ok((t, s))
    }

    fn need<'s>(&self, what: &str, expected: Option<&'s Sort>) -> Result<&'s Sort> {
        expected.ok_or_else(|| Error::UnboundVariable(format!("{what} (sort cannot be inferred)")))
    }

    fn ident(&mut self, x: &str, expected: Option<&Sort>) -> Result<(Term, Sort)> {
        if let Some(pos) = self.bound.iter().rposition(|(b, _)| b == x) {
            let idx = (self.bound.len() - 1 - pos) as u32;
            return Ok((Term::Bound(idx), self.bound[pos].1.clone()));
        }
        if let Some(s) = self.scope.metas.get(x) {
            return Ok((Term::Meta(name(x), s.clone()), s.clone()));
        }
        if let Some(s) = self.scope.free.get(x) {
            return Ok((Term::Free(name(x), s.clone()), s.clone()));
        }
        if let Some(d) = self.th.op(x) {
            if d.args.is_empty() {
                return Ok((Term::Op(d.name.clone(), vec![]), d.result.clone()));
            }
            return Err(Error::IllSorted(format!("constructor `{x}` expects {} arguments", d.args.len())));
        }
        if let Some(m) = self.th.macro_named(x) {
            if m.params.is_empty() {
                return Ok((m.body.clone(), m.sort.clone()));
            }
            return Err(Error::IllSorted(format!("macro `{x}` needs arguments")));
        }
        if self.scope.infer_metas {
            let s = self.need(x, expected)?.clone();
            self.scope.metas.insert(x.to_string(), s.clone());
            return Ok((Term::Meta(name(x), s.clone()), s));
        }
        if self.scope.infer_free {
            let s = self.need(x, expected)?.clone();
            self.scope.free.insert(x.to_string(), s.clone());
            return Ok((Term::Free(name(x), s.clone()), s));
        }
        Err(Error::UnboundVariable(x.to_string()))
    }

    fn synth(&mut self, raw: &Raw, expected: Option<&Sort>) -> Result<(Term, Sort)> {
        match raw {
            Raw::Ident(x, _) => self.ident(x, expected),
            Raw::PatVar(x) => {
                if let Some(s) = self.scope.metas.get(x) {
                    return Ok((Term::Meta(name(x), s.clone()), s.clone()));
                }
                let s = self.need(x, expected)?.clone();
                self.scope.metas.insert(x.clone(), s.clone());
                Ok((Term::Meta(name(x), s.clone()), s))
            }
            Raw::Hole => {
                let s = self.need("_", expected)?.clone();
                self.holes += 1;
                let n = format!("_{}", self.holes);
                self.scope.metas.insert(n.clone(), s.clone());
                Ok((Term::Meta(name(&n), s.clone()), s))
            }
            Raw::Sym(s) => Err(Error::parse(0, format!("operator `{s}` used without arguments"))),
            Raw::Prefix(sym, a) => {
                let d = self
                    .th
                    .prefix_op(sym)
                    .ok_or_else(|| Error::UnknownConstructor(sym.clone()))?
                    .clone();
                let (t, _) = self.term(a, Some(&d.args[0]))?;
                Ok((Term::Op(d.name.clone(), vec![t]), d.result.clone()))
            }
            Raw::Infix(sym, l, r) => {
                let d = self
                    .th
                    .infix_op(sym)
                    .ok_or_else(|| Error::UnknownConstructor(sym.clone()))?
                    .clone();
                let (a, _) = self.term(l, Some(&d.args[0]))?;
                let (b, _) = self.term(r, Some(&d.args[1]))?;
                Ok((Term::Op(d.name.clone(), vec![a, b]), d.result.clone()))
            }
            Raw::Lam(binders, body) => self.lam(binders, body, expected),
            Raw::Call(..) => self.call(raw, expected),
        }
    }

    fn lam(&mut self, binders: &[(String, Option<Sort>)], body: &Raw, expected: Option<&Sort>) -> Result<(Term, Sort)> {
        let (sorts, rest_expected): (Vec<Sort>, Option<Sort>) = match expected {
            Some(Sort::Func(dom, cod)) => {
                if binders.len() < dom.len() {
                    return Err(Error::IllSorted(format!(
                        "abstraction binds {} variables, sort {} needs {}",
                        binders.len(),
                        expected.unwrap(),
                        dom.len()
                    )));
                }
                for ((_, ann), d) in binders.iter().zip(dom) {
                    if let Some(a) = ann {
                        if a != d {
                            return Err(Error::SortMismatch { expected: d.clone(), found: a.clone() });
                        }
                    }
                }
                (dom.clone(), Some((**cod).clone()))
            }
            Some(s) => return Err(Error::IllSorted(format!("abstraction where a term of sort {s} was expected"))),
            None => {
                let mut ss = Vec::new();
                for (x, ann) in binders {
                    ss.push(ann.clone().ok_or_else(|| Error::UnboundVariable(format!("{x} (annotate the binder)")))?);
                }
                (ss, None)
            }
        };
        let k = sorts.len();
        for ((x, _), s) in binders.iter().zip(&sorts) {
            self.bound.push((x.clone(), s.clone()));
        }
        let res = if binders.len() > k {
            self.lam(&binders[k..], body, rest_expected.as_ref())
        } else {
            self.term(body, rest_expected.as_ref())
        };
        self.bound.truncate(self.bound.len() - k);
        let (b, cod) = res?;
        Ok((Term::lam(sorts.clone(), b), Sort::func(sorts, cod)))
    }

    fn call(&mut self, raw: &Raw, expected: Option<&Sort>) -> Result<(Term, Sort)> {
        let mut groups: Vec<&[Raw]> = Vec::new();
        let mut head = raw;
        while let Raw::Call(h, args) = head {
            groups.push(args);
            head = h;
        }
        groups.reverse();
        let hname = match head {
            Raw::Ident(x, _) => Some(x.as_str()),
            Raw::Sym(s) => Some(s.as_str()),
            _ => None,
        };
        let is_var = |e: &Elab, x: &str| {
            e.bound.iter().any(|(b, _)| b == x) || e.scope.metas.contains_key(x) || e.scope.free.contains_key(x)
        };
        let (mut t, mut s, used) = match hname {
            Some(x) if !is_var(self, x) && self.th.op(x).is_some() => {
                let d = self.th.op(x).unwrap().clone();
                let args = groups[0];
                if args.len() != d.args.len() {
                    return Err(Error::IllSorted(format!(
                        "`{x}` expects {} arguments, got {}",
                        d.args.len(),
                        args.len()
                    )));
                }
                let mut ts = Vec::new();
                for (a, want) in args.iter().zip(&d.args) {
                    ts.push(self.term(a, Some(want))?.0);
                }
                (Term::Op(d.name.clone(), ts), d.result.clone(), 1)
            }
            Some(x) if !is_var(self, x) && self.th.macro_named(x).is_some() => {
                let m = self.th.macro_named(x).unwrap().clone();
                if groups.len() < m.params.len() {
                    return Err(Error::IllSorted(format!("macro `{x}` needs {} argument lists", m.params.len())));
                }
                let mut asg = Assignment::new();
                for (ps, args) in m.params.iter().zip(&groups) {
                    if ps.len() != args.len() {
                        return Err(Error::IllSorted(format!("macro `{x}` argument count mismatch")));
                    }
                    for ((p, ps), a) in ps.iter().zip(args.iter()) {
                        let (v, _) = self.term(a, Some(ps))?;
                        asg.insert(p.clone(), v);
                    }
                }
                (m.body.instantiate(&asg), m.sort.clone(), m.params.len())
            }
            _ => {
                let (h, hs) = self.synth(head, None)?;
                (h, hs, 0)
            }
        };
        for args in &groups[used..] {
            let Sort::Func(dom, cod) = s.clone() else {
                return Err(Error::IllSorted(format!("cannot apply a term of sort {s}")));
            };
            if dom.len() != args.len() {
                return Err(Error::IllSorted(format!("expected {} arguments, got {}", dom.len(), args.len())));
            }
            let mut ts = Vec::new();
            for (a, want) in args.iter().zip(&dom) {
                ts.push(self.term(a, Some(want))?.0);
            }
            t = Term::apply(t, ts);
            s = *cod;
        }
        let _ = expected;
        Ok((t, s))
    }
}

/// Parses and elaborates a closed term (unknown names become free names).
pub fn parse_term_in(th: &Theory, src: &str, expected: Option<&Sort>) -> Result<Term> {
    let mut e = Elab::new(th, Scope::terms());
    let mut c = Cursor::new(src)?;
    let raw = parse_term(&mut c, &th.notation())?;
    c.expect_eof()?;
    Ok(e.term(&raw, expected)?.0)
}

/// Parses a pattern: `x?` and holes are pattern variables, other unknown names are free.
pub fn parse_pattern_in(th: &Theory, src: &str, expected: Option<&Sort>) -> Result<(Term, Sort)> {
    let mut e = Elab::new(th, Scope::terms());
    let mut c = Cursor::new(src)?;
    let raw = parse_term(&mut c, &th.notation())?;
    c.expect_eof()?;
    e.term(&raw, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::builtin;

    #[test]
    fn alpha_equivalent_inputs_are_equal() {
        let th = builtin("rho-pi").unwrap();
        let a = parse_term_in(&th, "in(n, \\x. out(x, *x))", None).unwrap();
        let b = parse_term_in(&th, "in(n, \\y. out(y, *y))", None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ill_sorted_out() {
        let th = builtin("rho-pi").unwrap();
        assert!(matches!(parse_term_in(&th, "out(0, 0)", None), Err(Error::IllSorted(_))));
    }

    #[test]
    fn macro_expansion() {
        let th = builtin("rho-pi").unwrap();
        let t = parse_term_in(&th, "!(0)(n)", None).unwrap();
        let c = parse_term_in(&th, "in(n, \\x. out(n, *x) | *x)", None).unwrap();
        let want = Term::op(
            "par",
            vec![
                Term::op("out", vec![Term::free("n", Sort::base("N")), Term::op("par", vec![c.clone(), Term::constant("0")])]),
                c,
            ],
        );
        assert_eq!(t, want);
    }

    #[test]
    fn curried_binders() {
        let th = builtin("pi").unwrap();
        let t = parse_term_in(&th, "in2(u, \\x w. out1(x; w))", None).unwrap();
        match t {
            Term::Op(_, args) => assert!(matches!(&args[1], Term::Lam(s, _) if s.len() == 2)),
            _ => panic!(),
        }
    }
}
