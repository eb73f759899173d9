//! Predicate surface syntax.
//!
//! Outside braces `|` is disjunction; inside `{ .. }` the theory's infix and
//! prefix operators build constructor images, sort names stand for `top` at
//! that sort, `S -> φ` is `hom(top, φ)` and a bare name is its principal sieve.

use crate::error::{Error, Result};
use crate::predicate::ast::{FixKind, ModalOp, Pred};
use crate::sort::{name, Sort};
use crate::syntax::elab::{Elab, Scope};
use crate::syntax::lexer::{Cursor, Tok};
use crate::syntax::raw::{parse_sort, parse_term, Notation, Raw};
use crate::theory::Theory;

#[derive(Clone, Debug)]
pub enum RawPred {
    Top,
    Bot,
    Principal(Raw),
    Ident(String),
    Call(String, Vec<RawPred>),
    Secure(String, Vec<RawPred>),
    Modal(ModalOp, Box<RawPred>),
    SortTop(Sort),
    Arrow(Sort, Box<RawPred>),
    Infix(String, Box<RawPred>, Box<RawPred>),
    Prefix(String, Box<RawPred>),
    And(Box<RawPred>, Box<RawPred>),
    Or(Box<RawPred>, Box<RawPred>),
    Implies(Box<RawPred>, Box<RawPred>),
    Not(Box<RawPred>),
    Subst(Box<RawPred>, String),
    Along(Box<RawPred>, Raw),
    Fix(FixKind, String, Box<RawPred>),
    Exists(String, Sort, Box<RawPred>),
    Forall(String, Sort, Box<RawPred>),
    Hom(Box<RawPred>, Box<RawPred>),
    Reify(String, Box<RawPred>, Vec<RawPred>),
}

struct Parser<'t> {
    th: &'t Theory,
    nt: Notation,
}

fn b(p: RawPred) -> Box<RawPred> {
    Box::new(p)
}

impl<'t> Parser<'t> {
    fn implies(&self, c: &mut Cursor, brace: bool) -> Result<RawPred> {
        let l = self.or(c, brace)?;
        if c.eat_sym("=>") {
            let r = self.implies(c, brace)?;
            return Ok(RawPred::Implies(b(l), b(r)));
        }
        Ok(l)
    }

    fn or(&self, c: &mut Cursor, brace: bool) -> Result<RawPred> {
        let mut l = self.and(c, brace)?;
        while !brace && c.eat_sym("|") {
            let r = self.and(c, brace)?;
            l = RawPred::Or(b(l), b(r));
        }
        Ok(l)
    }

    fn and(&self, c: &mut Cursor, brace: bool) -> Result<RawPred> {
        let mut l = if brace { self.binfix(c)? } else { self.unary(c)? };
        while !(brace && self.nt.is_infix("&")) && c.eat_sym("&") {
            let r = if brace { self.binfix(c)? } else { self.unary(c)? };
            l = RawPred::And(b(l), b(r));
        }
        Ok(l)
    }

    fn unary(&self, c: &mut Cursor) -> Result<RawPred> {
        if c.eat_sym("!") {
            return Ok(RawPred::Not(b(self.unary(c)?)));
        }
        let a = self.atom(c, false)?;
        self.postfix(c, a)
    }

    fn binfix(&self, c: &mut Cursor) -> Result<RawPred> {
        let mut l = self.bprefix(c)?;
        loop {
            let sym = match c.peek() {
                Tok::Sym(s) if self.nt.is_infix(s) => s.to_string(),
                _ => break,
            };
            c.next();
            let r = self.bprefix(c)?;
            l = RawPred::Infix(sym, b(l), b(r));
        }
        Ok(l)
    }

    fn bprefix(&self, c: &mut Cursor) -> Result<RawPred> {
        if let Tok::Sym(s) = c.peek().clone() {
            if self.nt.is_prefix(s) {
                c.next();
                return Ok(RawPred::Prefix(s.to_string(), b(self.bprefix(c)?)));
            }
            if s == "!" {
                c.next();
                return Ok(RawPred::Not(b(self.bprefix(c)?)));
            }
        }
        let a = self.atom(c, true)?;
        self.postfix(c, a)
    }

    fn postfix(&self, c: &mut Cursor, mut p: RawPred) -> Result<RawPred> {
        while c.is_sym("[") && c.adjacent(0) {
            c.next();
            if c.is_sym("\\") {
                let t = parse_term(c, &self.nt)?;
                p = RawPred::Along(b(p), t);
            } else {
                let f = match c.next() {
                    Tok::Ident(s) => s,
                    Tok::Sym(s) => s.to_string(),
                    Tok::Eof => return Err(c.error("expected a constructor")),
                };
                p = RawPred::Subst(b(p), f);
            }
            c.expect_sym("]")?;
        }
        Ok(p)
    }

    fn args(&self, c: &mut Cursor, brace: bool) -> Result<Vec<RawPred>> {
        c.expect_sym("(")?;
        let mut out = Vec::new();
        if c.eat_sym(")") {
            return Ok(out);
        }
        loop {
            out.push(self.implies(c, brace)?);
            if c.eat_sym(")") {
                return Ok(out);
            }
            if !(c.eat_sym(",") || c.eat_sym(";")) {
                return Err(c.error(format!("expected `,` or `)`, found {}", c.describe())));
            }
        }
    }

    /// `B!o`, `B*b_act`, `F!`, ... spelled as adjacent tokens.
    fn modal(&self, c: &mut Cursor) -> Option<ModalOp> {
        let save = c.save();
        let head = match c.peek() {
            Tok::Ident(s) if s == "B" || s == "F" => s.clone(),
            _ => return None,
        };
        if self.th.op(&head).is_some() || !c.adjacent(1) {
            return None;
        }
        let star = match c.peek_at(1) {
            Tok::Sym("!") => "!",
            Tok::Sym("*") => "*",
            _ => return None,
        };
        c.next();
        c.next();
        let mut n = format!("{head}{star}");
        if let Tok::Ident(s) = c.peek().clone() {
            if c.adjacent(0) {
                c.next();
                n.push_str(&s);
            }
        }
        match ModalOp::from_name(&n) {
            Some(m) if c.is_sym("(") => Some(m),
            _ => {
                c.restore(save);
                None
            }
        }
    }

    fn dotted(&self, c: &mut Cursor, first: String) -> String {
        let mut s = first;
        loop {
            let cand = match (c.peek(), c.peek_at(1)) {
                (Tok::Sym("."), Tok::Ident(next)) if c.adjacent(0) && c.adjacent(1) => format!("{s}.{next}"),
                _ => return s,
            };
            if self.th.defs.iter().any(|d| d.name == cand || d.name.starts_with(&format!("{cand}."))) {
                c.next();
                c.next();
                s = cand;
            } else {
                return s;
            }
        }
    }

    fn atom(&self, c: &mut Cursor, brace: bool) -> Result<RawPred> {
        if let Some(m) = self.modal(c) {
            c.expect_sym("(")?;
            let p = self.implies(c, brace)?;
            c.expect_sym(")")?;
            return Ok(RawPred::Modal(m, b(p)));
        }
        match c.peek().clone() {
            Tok::Sym("(") => {
                c.next();
                let p = self.implies(c, brace)?;
                c.expect_sym(")")?;
                Ok(p)
            }
            Tok::Sym("{") => {
                c.next();
                let p = self.implies(c, true)?;
                c.expect_sym("}")?;
                Ok(p)
            }
            Tok::Sym("<") => {
                c.next();
                let t = parse_term(c, &self.nt)?;
                c.expect_sym(">")?;
                Ok(RawPred::Principal(t))
            }
            Tok::Sym("[") => {
                // `[N -> P]` is a function sort, `[P]` any term of a base sort
                let at = c.save();
                if let Ok(s) = parse_sort(c) {
                    return Ok(RawPred::SortTop(s));
                }
                c.restore(at);
                c.next();
                let s = parse_sort(c)?;
                c.expect_sym("]")?;
                Ok(RawPred::SortTop(s))
            }
            Tok::Ident(id) => {
                c.next();
                match id.as_str() {
                    "top" => return Ok(RawPred::Top),
                    "bot" => return Ok(RawPred::Bot),
                    "mu" | "nu" if matches!(c.peek(), Tok::Ident(_)) => {
                        let x = c.ident()?;
                        c.expect_sym(".")?;
                        let body = self.implies(c, brace)?;
                        let k = if id == "mu" { FixKind::Least } else { FixKind::Greatest };
                        return Ok(RawPred::Fix(k, x, b(body)));
                    }
                    "exists" | "forall" if matches!(c.peek(), Tok::Ident(_)) => {
                        let x = c.ident()?;
                        c.expect_sym(":")?;
                        let s = parse_sort(c)?;
                        c.expect_sym(".")?;
                        let body = self.implies(c, brace)?;
                        return Ok(if id == "exists" {
                            RawPred::Exists(x, s, b(body))
                        } else {
                            RawPred::Forall(x, s, b(body))
                        });
                    }
                    "hom" if c.is_sym("(") => {
                        let mut a = self.args(c, brace)?;
                        if a.len() != 2 {
                            return Err(c.error("hom takes two predicates"));
                        }
                        let r = a.pop().unwrap();
                        let l = a.pop().unwrap();
                        return Ok(RawPred::Hom(b(l), b(r)));
                    }
                    "reify" if c.is_sym("(") => {
                        c.next();
                        let x = c.ident()?;
                        c.expect_sym(".")?;
                        let body = self.implies(c, brace)?;
                        c.expect_sym(";")?;
                        let mut fam = Vec::new();
                        if !c.is_sym(")") {
                            fam.push(self.implies(c, brace)?);
                            while c.eat_sym(",") {
                                fam.push(self.implies(c, brace)?);
                            }
                        }
                        c.expect_sym(")")?;
                        return Ok(RawPred::Reify(x, b(body), fam));
                    }
                    _ => {}
                }
                if c.is_sym("*") && c.adjacent(0) && c.peek_at(1) == &Tok::Sym("(") && c.adjacent(1) {
                    c.next();
                    return Ok(RawPred::Secure(id, self.args(c, brace)?));
                }
                let id = self.dotted(c, id);
                if c.is_sym("->") && self.th.has_sort(&Sort::base(&id)) {
                    c.next();
                    let body = self.implies(c, brace)?;
                    return Ok(RawPred::Arrow(Sort::base(&id), b(body)));
                }
                if c.is_sym("(") && c.adjacent(0) {
                    return Ok(RawPred::Call(id, self.args(c, brace)?));
                }
                Ok(RawPred::Ident(id))
            }
            Tok::Sym(s) if self.nt.is_infix(s) || self.nt.is_prefix(s) => {
                // operator in call position: `|(φ, ψ)`
                c.next();
                if c.is_sym("(") {
                    Ok(RawPred::Call(s.to_string(), self.args(c, brace)?))
                } else {
                    Err(c.error(format!("operator `{s}` needs arguments")))
                }
            }
            _ => Err(c.error(format!("expected a predicate, found {}", c.describe()))),
        }
    }
}

pub fn parse_raw_pred(th: &Theory, src: &str) -> Result<RawPred> {
    let p = Parser { th, nt: th.notation() };
    let mut c = Cursor::new(src)?;
    let r = p.implies(&mut c, false)?;
    c.expect_eof()?;
    Ok(r)
}

/// Elaboration state: fixed-point variables and bound term names in scope.
pub struct PElab<'t> {
    th: &'t Theory,
    fix: Vec<(String, Sort)>,
    terms: Vec<(String, Sort)>,
    expanding: Vec<String>,
}

const MAX_EXPANSION: usize = 32;

fn mismatch(expected: &Sort, found: &Sort) -> Error {
    Error::SortMismatch { expected: expected.clone(), found: found.clone() }
}

fn check(expected: Option<&Sort>, found: Sort) -> Result<Sort> {
    match expected {
        Some(e) if *e != found => Err(mismatch(e, &found)),
        _ => Ok(found),
    }
}

fn no_sort(what: &str) -> Error {
    Error::IllSorted(format!("cannot infer the sort of {what}; give the subject sort"))
}

impl<'t> PElab<'t> {
    pub fn new(th: &'t Theory) -> PElab<'t> {
        PElab { th, fix: Vec::new(), terms: Vec::new(), expanding: Vec::new() }
    }

    fn term(&self, raw: &Raw, expected: Option<&Sort>) -> Result<(crate::term::Term, Sort)> {
        let mut scope = Scope::terms();
        for (x, s) in &self.terms {
            scope.free.insert(x.clone(), s.clone());
        }
        Elab::new(self.th, scope).term(raw, expected)
    }

    fn expand(&mut self, def: &str, args: &[RawPred], expected: Option<&Sort>) -> Result<(Pred, Sort)> {
        let d = self.th.defs.iter().find(|d| d.name == def).unwrap().clone();
        if d.params.len() != args.len() {
            return Err(Error::IllSorted(format!(
                "`{def}` takes {} arguments, got {}",
                d.params.len(),
                args.len()
            )));
        }
        if self.expanding.len() >= MAX_EXPANSION {
            return Err(Error::InvalidTheory(format!("definition `{def}` expands without end")));
        }
        let body = parse_raw_pred(self.th, &d.body)?;
        let body = substitute(&body, &d.params, args);
        self.expanding.push(def.to_string());
        let r = self.pred(&body, expected);
        self.expanding.pop();
        r
    }

    fn op_image(&mut self, f: &str, args: &[RawPred], expected: Option<&Sort>, secure: bool) -> Result<(Pred, Sort)> {
        let d = self.th.op(f).ok_or_else(|| Error::UnknownConstructor(f.to_string()))?.clone();
        let flat = self.th.structure().ac.get(f).map_or(false, |a| a.assoc) && args.len() > 2;
        if !flat && args.len() != d.args.len() {
            return Err(Error::IllSorted(format!("`{f}` expects {} arguments, got {}", d.args.len(), args.len())));
        }
        check(expected, d.result.clone())?;
        let mut ps = Vec::new();
        for (i, a) in args.iter().enumerate() {
            let want = if flat { &d.args[0] } else { &d.args[i] };
            ps.push(self.pred(a, Some(want))?.0);
        }
        let n = name(f);
        Ok((if secure { Pred::Secure(n, ps) } else { Pred::Image(n, ps) }, d.result))
    }

    /// Collects the operands of a chain of one associative infix operator.
    fn chain<'r>(&self, sym: &str, r: &'r RawPred, out: &mut Vec<&'r RawPred>) {
        match r {
            RawPred::Infix(s, l, x) if s == sym => {
                self.chain(sym, l, out);
                self.chain(sym, x, out);
            }
            r => out.push(r),
        }
    }

    /// Elaborates a list of same-sorted predicates, inferring the sort from
    /// the first one that allows it.
    fn same_sort(&mut self, items: &[&RawPred], expected: Option<&Sort>) -> Result<(Vec<Pred>, Sort)> {
        let sort = match expected {
            Some(s) => s.clone(),
            None => {
                let mut found = None;
                let mut first_err = None;
                for it in items {
                    match self.pred(it, None) {
                        Ok((_, s)) => {
                            found = Some(s);
                            break;
                        }
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                match found {
                    Some(s) => s,
                    None => return Err(first_err.unwrap_or_else(|| no_sort("a connective"))),
                }
            }
        };
        let ps = items.iter().map(|it| self.pred(it, Some(&sort)).map(|x| x.0)).collect::<Result<_>>()?;
        Ok((ps, sort))
    }

    pub fn pred(&mut self, r: &RawPred, expected: Option<&Sort>) -> Result<(Pred, Sort)> {
        match r {
            RawPred::Top => Ok((Pred::Top, expected.cloned().ok_or_else(|| no_sort("top"))?)),
            RawPred::Bot => Ok((Pred::Bot, expected.cloned().ok_or_else(|| no_sort("bot"))?)),
            RawPred::Principal(raw) => {
                let (t, s) = self.term(raw, expected)?;
                Ok((Pred::Principal(t), s))
            }
            RawPred::SortTop(s) => Ok((Pred::Top, check(expected, s.clone())?)),
            RawPred::Ident(id) => {
                if let Some((_, s)) = self.fix.iter().rev().find(|(x, _)| x == id) {
                    let s = check(expected, s.clone())?;
                    return Ok((Pred::Var(name(id)), s));
                }
                if let Some((_, s)) = self.terms.iter().rev().find(|(x, _)| x == id) {
                    let s = check(expected, s.clone())?;
                    return Ok((Pred::Principal(crate::term::Term::Free(name(id), s.clone())), s));
                }
                if self.th.defs.iter().any(|d| d.name == *id && d.params.is_empty()) {
                    return self.expand(id, &[], expected);
                }
                if self.th.has_sort(&Sort::base(id)) && self.th.sorts.iter().any(|d| &*d.name == id) {
                    return Ok((Pred::Top, check(expected, Sort::base(id))?));
                }
                if self.th.op(id).map_or(false, |o| o.args.is_empty()) {
                    let (t, s) = self.term(&Raw::Ident(id.clone(), 0), expected)?;
                    return Ok((Pred::Principal(t), s));
                }
                match expected {
                    Some(s) if !self.th.defs.iter().any(|d| d.name == *id) => {
                        Ok((Pred::Principal(crate::term::Term::Free(name(id), s.clone())), s.clone()))
                    }
                    _ => Err(Error::UnknownPredicate(id.clone())),
                }
            }
            RawPred::Call(f, args) => {
                if self.th.defs.iter().any(|d| d.name == *f) {
                    return self.expand(f, args, expected);
                }
                let op = if self.th.op(f).is_some() {
                    f.clone()
                } else if let Some(o) = self.th.infix_op(f).or_else(|| self.th.prefix_op(f)) {
                    o.name.to_string()
                } else {
                    return Err(Error::UnknownPredicate(f.clone()));
                };
                self.op_image(&op, args, expected, false)
            }
            RawPred::Secure(f, args) => self.op_image(f, args, expected, true),
            RawPred::Modal(m, p) => {
                let (q, s) = self.pred(p, expected)?;
                Ok((Pred::modal(*m, q), s))
            }
            RawPred::Arrow(dom, body) => {
                let want = match expected {
                    Some(Sort::Func(d, cod)) if d.len() == 1 && d[0] == *dom => Some((**cod).clone()),
                    Some(s) => return Err(mismatch(s, &Sort::func(vec![dom.clone()], Sort::base("?")))),
                    None => None,
                };
                let (q, cod) = self.pred(body, want.as_ref())?;
                Ok((Pred::hom(Pred::Top, q), Sort::func(vec![dom.clone()], cod)))
            }
            RawPred::Infix(sym, _, _) => {
                let op = self
                    .th
                    .infix_op(sym)
                    .ok_or_else(|| Error::UnknownConstructor(sym.clone()))?
                    .name
                    .to_string();
                let mut items = Vec::new();
                if self.th.structure().ac.get(op.as_str()).map_or(false, |a| a.assoc) {
                    self.chain(sym, r, &mut items);
                } else if let RawPred::Infix(_, l, x) = r {
                    items.push(&**l);
                    items.push(&**x);
                }
                let items: Vec<RawPred> = items.into_iter().cloned().collect();
                self.op_image(&op, &items, expected, false)
            }
            RawPred::Prefix(sym, p) => self.op_image(sym, std::slice::from_ref(&**p), expected, false),
            RawPred::And(a, x) | RawPred::Or(a, x) | RawPred::Implies(a, x) => {
                let (mut ps, s) = self.same_sort(&[&**a, &**x], expected)?;
                let r2 = ps.pop().unwrap();
                let l2 = ps.pop().unwrap();
                let p = match r {
                    RawPred::And(..) => flatten_and(l2, r2),
                    RawPred::Or(..) => flatten_or(l2, r2),
                    _ => Pred::implies(l2, r2),
                };
                Ok((p, s))
            }
            RawPred::Not(p) => {
                let (q, s) = self.pred(p, expected)?;
                Ok((Pred::not(q), s))
            }
            RawPred::Subst(p, f) => {
                let op = self
                    .th
                    .op(f)
                    .or_else(|| self.th.infix_op(f))
                    .or_else(|| self.th.prefix_op(f))
                    .ok_or_else(|| Error::UnknownConstructor(f.clone()))?
                    .clone();
                let (q, _) = self.pred(p, Some(&op.result))?;
                let s = Sort::tuple_of(op.args.clone());
                Ok((Pred::Subst(Box::new(q), op.name.clone()), check(expected, s)?))
            }
            RawPred::Along(p, lam) => {
                let dom = expected.cloned().ok_or_else(|| no_sort("a precomposition"))?;
                let Raw::Lam(binders, body) = lam else {
                    return Err(Error::IllSorted("expected an abstraction after `[`".into()));
                };
                if binders.len() != 1 {
                    return Err(Error::IllSorted("precomposition takes a one-variable context".into()));
                }
                let (q, cod) = match self.pred(p, None) {
                    Ok((q, s)) => (Some(q), Some(s)),
                    Err(_) => (None, None),
                };
                let mut scope = Scope::terms();
                for (x, s) in &self.terms {
                    scope.free.insert(x.clone(), s.clone());
                }
                let mut e = Elab::new(self.th, scope).with_bound(vec![(binders[0].0.clone(), dom.clone())]);
                let (bt, bs) = e.term(body, cod.as_ref())?;
                let q = match q {
                    Some(q) => q,
                    None => self.pred(p, Some(&bs))?.0,
                };
                let ctx = crate::term::Term::lam(vec![dom.clone()], bt);
                Ok((Pred::Along(Box::new(q), ctx), dom))
            }
            RawPred::Fix(kind, x, body) => {
                let s = expected.cloned().ok_or_else(|| no_sort("a fixed point"))?;
                self.fix.push((x.clone(), s.clone()));
                let r = self.pred(body, Some(&s));
                self.fix.pop();
                let (q, _) = r?;
                let var = name(x);
                if !q.positive_in(&var) {
                    return Err(Error::NonMonotoneFix(x.clone()));
                }
                Ok((Pred::Fix { kind: *kind, var, sort: s.clone(), body: Box::new(q) }, s))
            }
            RawPred::Exists(x, s, body) | RawPred::Forall(x, s, body) => {
                self.terms.push((x.clone(), s.clone()));
                let res = self.pred(body, expected);
                self.terms.pop();
                let (q, sort) = res?;
                let (var, sort_v, body) = (name(x), s.clone(), Box::new(q));
                let p = if matches!(r, RawPred::Exists(..)) {
                    Pred::Exists { var, sort: sort_v, body }
                } else {
                    Pred::Forall { var, sort: sort_v, body }
                };
                Ok((p, sort))
            }
            RawPred::Hom(a, x) => {
                let (dom, cod) = match expected {
                    Some(Sort::Func(d, c)) => (Some(Sort::tuple_of(d.clone())), Some((**c).clone())),
                    Some(s) => return Err(Error::IllSorted(format!("hom predicate at non-function sort {s}"))),
                    None => (None, None),
                };
                let (l, ls) = self.pred(a, dom.as_ref())?;
                let (rq, rs) = self.pred(x, cod.as_ref())?;
                let ds = match ls {
                    Sort::Product(ss) => ss,
                    s => vec![s],
                };
                Ok((Pred::hom(l, rq), Sort::func(ds, rs)))
            }
            RawPred::Reify(x, body, fam) => {
                let Some(Sort::Func(d, cod)) = expected else {
                    return Err(no_sort("a reification"));
                };
                let dom = Sort::tuple_of(d.clone());
                let family =
                    fam.iter().map(|f| self.pred(f, Some(&dom)).map(|p| p.0)).collect::<Result<Vec<_>>>()?;
                self.fix.push((x.clone(), dom.clone()));
                let r = self.pred(body, Some(cod));
                self.fix.pop();
                let (q, _) = r?;
                Ok((Pred::Reify { var: name(x), body: Box::new(q), family }, expected.unwrap().clone()))
            }
        }
    }
}

fn flatten_and(a: Pred, b: Pred) -> Pred {
    let mut v = Vec::new();
    for p in [a, b] {
        match p {
            Pred::And(ps) => v.extend(ps),
            p => v.push(p),
        }
    }
    Pred::And(v)
}

fn flatten_or(a: Pred, b: Pred) -> Pred {
    let mut v = Vec::new();
    for p in [a, b] {
        match p {
            Pred::Or(ps) => v.extend(ps),
            p => v.push(p),
        }
    }
    Pred::Or(v)
}

/// Replaces identifiers naming definition parameters by the arguments.
fn substitute(r: &RawPred, params: &[String], args: &[RawPred]) -> RawPred {
    let s = |x: &RawPred| Box::new(substitute(x, params, args));
    let ss = |xs: &[RawPred]| xs.iter().map(|x| substitute(x, params, args)).collect::<Vec<_>>();
    let shadow = |x: &String| -> (Vec<String>, Vec<RawPred>) {
        params.iter().zip(args).filter(|(p, _)| *p != x).map(|(p, a)| (p.clone(), a.clone())).unzip()
    };
    match r {
        RawPred::Ident(id) => match params.iter().position(|p| p == id) {
            Some(i) => args[i].clone(),
            None => r.clone(),
        },
        RawPred::Call(f, xs) => RawPred::Call(f.clone(), ss(xs)),
        RawPred::Secure(f, xs) => RawPred::Secure(f.clone(), ss(xs)),
        RawPred::Modal(m, p) => RawPred::Modal(*m, s(p)),
        RawPred::Arrow(d, p) => RawPred::Arrow(d.clone(), s(p)),
        RawPred::Infix(o, a, b) => RawPred::Infix(o.clone(), s(a), s(b)),
        RawPred::Prefix(o, a) => RawPred::Prefix(o.clone(), s(a)),
        RawPred::And(a, b) => RawPred::And(s(a), s(b)),
        RawPred::Or(a, b) => RawPred::Or(s(a), s(b)),
        RawPred::Implies(a, b) => RawPred::Implies(s(a), s(b)),
        RawPred::Not(a) => RawPred::Not(s(a)),
        RawPred::Subst(a, f) => RawPred::Subst(s(a), f.clone()),
        RawPred::Along(a, t) => RawPred::Along(s(a), t.clone()),
        RawPred::Hom(a, b) => RawPred::Hom(s(a), s(b)),
        RawPred::Fix(k, x, body) => {
            let (ps, xs) = shadow(x);
            RawPred::Fix(*k, x.clone(), Box::new(substitute(body, &ps, &xs)))
        }
        RawPred::Exists(x, so, body) => {
            let (ps, xs) = shadow(x);
            RawPred::Exists(x.clone(), so.clone(), Box::new(substitute(body, &ps, &xs)))
        }
        RawPred::Forall(x, so, body) => {
            let (ps, xs) = shadow(x);
            RawPred::Forall(x.clone(), so.clone(), Box::new(substitute(body, &ps, &xs)))
        }
        RawPred::Reify(x, body, fam) => {
            let (ps, xs) = shadow(x);
            RawPred::Reify(x.clone(), Box::new(substitute(body, &ps, &xs)), ss(fam))
        }
        _ => r.clone(),
    }
}

/// Parses and elaborates a predicate; `expected` is the subject sort when known.
pub fn parse_pred(th: &Theory, src: &str, expected: Option<&Sort>) -> Result<(Pred, Sort)> {
    let raw = parse_raw_pred(th, src)?;
    PElab::new(th).pred(&raw, expected)
}
