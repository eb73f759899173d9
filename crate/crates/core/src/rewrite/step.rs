//! One-step rewriting closed under the declared congruence positions.

use crate::error::{Error, Result};
use crate::rewrite::canon::Canon;
use crate::rewrite::matching::Matcher;
use crate::sort::{name, Name};
use crate::term::{Assignment, Term};
use crate::theory::{Rule, Theory};

/// One basic rewrite. `position` is the path of congruence positions from the
/// root to the redex; `context` is the rest of a parallel composition when the
/// rule matched only part of it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewriteStep {
    pub rule: Name,
    pub assignment: Assignment,
    pub position: Vec<(Name, usize)>,
    pub context: Option<Term>,
    pub source: Term,
    pub target: Term,
}

struct Local {
    rule: usize,
    asg: Assignment,
    pos: Vec<(Name, usize)>,
    ctx: Option<Term>,
    result: Term,
}

const REST: &str = "%rest";

pub struct Stepper<'c, 'a> {
    c: &'c Canon<'a>,
    rules: Vec<&'a Rule>,
}

impl<'c, 'a> Stepper<'c, 'a> {
    pub fn new(c: &'c Canon<'a>) -> Stepper<'c, 'a> {
        Stepper { c, rules: c.th.active_rules().collect() }
    }

    fn guard_ok(&self, r: &Rule, asg: &Assignment) -> bool {
        match &r.guard {
            None => true,
            Some(g) => (g.test)(&g.pattern.instantiate(asg)),
        }
    }

    fn propagates(&self, r: &Rule, f: &Name, i: usize, ac: bool) -> bool {
        r.congruence.iter().any(|(g, j)| g == f && (ac || *j == i))
    }

    fn at(&self, t: &Term) -> Vec<Local> {
        let m = Matcher::with_canon(self.c);
        let mut out = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            for asg in m.matches(&r.source, t) {
                if self.guard_ok(r, &asg) {
                    let result = self.c.canon(&r.target.instantiate(&asg));
                    out.push(Local { rule: ri, asg, pos: vec![], ctx: None, result });
                }
            }
        }
        let Term::Op(f, args) = t else { return out };
        let ac = self.c.st.ac.get(f).cloned();
        if let Some(info) = ac.as_ref().filter(|i| i.assoc && i.comm) {
            // partial matches against part of a parallel composition
            let sort = self.c.th.op(f).map(|d| d.result.clone());
            for (ri, r) in self.rules.iter().enumerate() {
                let (Some(sort), Term::Op(g, ps)) = (&sort, &r.source) else { continue };
                if g != f || !self.propagates(r, f, 0, true) {
                    continue;
                }
                let mut ps = ps.clone();
                ps.push(Term::Meta(name(REST), sort.clone()));
                let pat = Term::Op(f.clone(), ps);
                for mut asg in m.matches(&pat, t) {
                    let rest = asg.remove(REST).unwrap();
                    if Some(&rest) == info.unit.as_ref() || !self.guard_ok(r, &asg) {
                        continue;
                    }
                    let tgt = r.target.instantiate(&asg);
                    let result = self.c.canon(&Term::Op(f.clone(), vec![tgt, rest.clone()]));
                    out.push(Local { rule: ri, asg, pos: vec![], ctx: Some(rest), result });
                }
            }
        }
        let is_ac = ac.is_some();
        if !self.rules.iter().any(|r| r.congruence.iter().any(|(g, _)| g == f)) {
            return out;
        }
        for (i, a) in args.iter().enumerate() {
            if is_ac && args[..i].contains(a) {
                continue;
            }
            if !self.rules.iter().any(|r| self.propagates(r, f, i, is_ac)) {
                continue;
            }
            let (inner, wrap): (&Term, Option<&Vec<crate::sort::Sort>>) = match a {
                Term::Lam(ss, b) => (b, Some(ss)),
                a => (a, None),
            };
            for l in self.at(inner) {
                if !self.propagates(self.rules[l.rule], f, i, is_ac) {
                    continue;
                }
                let sub = match wrap {
                    Some(ss) => Term::Lam(ss.clone(), Box::new(l.result)),
                    None => l.result,
                };
                let mut xs = args.clone();
                xs[i] = sub;
                let result = self.c.build(f, xs);
                let mut pos = vec![(f.clone(), i)];
                pos.extend(l.pos);
                out.push(Local { rule: l.rule, asg: l.asg, pos, ctx: l.ctx, result });
            }
        }
        out
    }

    pub fn steps(&self, t: &Term) -> Vec<RewriteStep> {
        let mut out: Vec<RewriteStep> = self
            .at(t)
            .into_iter()
            .map(|l| RewriteStep {
                rule: self.rules[l.rule].name.clone(),
                assignment: l.asg,
                position: l.pos,
                context: l.ctx,
                source: t.clone(),
                target: l.result,
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// All one-step rewrites of the canonical form of `t`.
pub fn step(th: &Theory, t: &Term) -> Vec<RewriteStep> {
    let c = Canon::new(th);
    let t = c.canon(t);
    Stepper::new(&c).steps(&t)
}

/// Re-applies a step's rule at its position and checks the recorded target.
pub fn replay(th: &Theory, s: &RewriteStep) -> Result<Term> {
    let c = Canon::new(th);
    let rule = th
        .active_rules()
        .find(|r| r.name == s.rule)
        .ok_or_else(|| Error::InvalidTheory(format!("no active rule `{}`", s.rule)))?;
    if let Some(g) = &rule.guard {
        if !(g.test)(&g.pattern.instantiate(&s.assignment)) {
            return Err(Error::NonComposable(format!("guard of `{}` fails", s.rule)));
        }
    }
    let out = replay_at(&c, rule, s, &s.source, &s.position)
        .ok_or_else(|| Error::NonComposable(format!("rule `{}` does not apply at the recorded position", s.rule)))?;
    if out != s.target {
        return Err(Error::NonComposable(format!("replaying `{}` gives a different target", s.rule)));
    }
    Ok(out)
}

fn replay_at(c: &Canon, rule: &Rule, s: &RewriteStep, t: &Term, pos: &[(Name, usize)]) -> Option<Term> {
    match pos.split_first() {
        None => {
            let src = rule.source.instantiate(&s.assignment);
            let tgt = rule.target.instantiate(&s.assignment);
            match (&s.context, t) {
                (None, _) => (c.canon(&src) == *t).then(|| c.canon(&tgt)),
                (Some(ctx), Term::Op(f, _)) => {
                    let whole = c.canon(&Term::Op(f.clone(), vec![src, ctx.clone()]));
                    (whole == *t).then(|| c.canon(&Term::Op(f.clone(), vec![tgt, ctx.clone()])))
                }
                _ => None,
            }
        }
        Some(((f, i), rest)) => {
            let Term::Op(g, args) = t else { return None };
            if g != f {
                return None;
            }
            let is_ac = c.st.ac.contains_key(f);
            if !rule.congruence.iter().any(|(h, j)| h == f && (is_ac || j == i)) {
                return None;
            }
            let a = args.get(*i)?;
            let sub = match a {
                Term::Lam(ss, b) => Term::Lam(ss.clone(), Box::new(replay_at(c, rule, s, b, rest)?)),
                a => replay_at(c, rule, s, a, rest)?,
            };
            let mut xs = args.clone();
            xs[*i] = sub;
            Some(c.build(f, xs))
        }
    }
}
