//! Predicate syntax trees after elaboration.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::sort::{Name, Sort};
use crate::term::Term;
use crate::theories::morphism::Morphism;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FixKind {
    Least,
    Greatest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModalKind {
    /// One step: some successor satisfies φ.
    BBang,
    /// One step: every successor satisfies φ.
    BStar,
    /// Can become φ.
    BBangO,
    /// Always can become φ.
    BBangB,
    /// Will become φ.
    BStarO,
    /// Always φ.
    BStarB,
    /// Some predecessor satisfies φ.
    FBang,
    /// Every predecessor satisfies φ.
    FStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModalOp {
    pub kind: ModalKind,
    /// Evaluate over the labelled act transitions instead of plain rewrites.
    pub act: bool,
}

impl ModalOp {
    pub fn new(kind: ModalKind) -> ModalOp {
        ModalOp { kind, act: false }
    }

    pub fn act(kind: ModalKind) -> ModalOp {
        ModalOp { kind, act: true }
    }

    pub fn from_name(s: &str) -> Option<ModalOp> {
        let (base, act) = match s.strip_suffix("_act") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let kind = match base {
            "B!" => ModalKind::BBang,
            "B*" => ModalKind::BStar,
            "B!o" => ModalKind::BBangO,
            "B!b" => ModalKind::BBangB,
            "B*o" => ModalKind::BStarO,
            "B*b" => ModalKind::BStarB,
            "F!" => ModalKind::FBang,
            "F*" => ModalKind::FStar,
            _ => return None,
        };
        Some(ModalOp { kind, act })
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            ModalKind::BBang => "B!",
            ModalKind::BStar => "B*",
            ModalKind::BBangO => "B!o",
            ModalKind::BBangB => "B!b",
            ModalKind::BStarO => "B*o",
            ModalKind::BStarB => "B*b",
            ModalKind::FBang => "F!",
            ModalKind::FStar => "F*",
        };
        if self.act {
            format!("{base}_act")
        } else {
            base.to_string()
        }
    }
}

#[derive(Clone)]
pub enum Pred {
    Top,
    Bot,
    /// Terms matching the pattern (the principal sieve of a term with holes).
    Principal(Term),
    /// Direct image along a constructor: some preimage satisfies the arguments.
    Image(Name, Vec<Pred>),
    /// Secure image: every preimage satisfies the arguments.
    Secure(Name, Vec<Pred>),
    /// Pattern substitution: holds of an argument tuple when φ holds of `f(tuple)`.
    Subst(Box<Pred>, Name),
    /// Precomposition with a context `\x. t`.
    Along(Box<Pred>, Term),
    And(Vec<Pred>),
    Or(Vec<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Hom(Box<Pred>, Box<Pred>),
    Reify { var: Name, body: Box<Pred>, family: Vec<Pred> },
    Fix { kind: FixKind, var: Name, sort: Sort, body: Box<Pred> },
    Var(Name),
    Exists { var: Name, sort: Sort, body: Box<Pred> },
    Forall { var: Name, sort: Sort, body: Box<Pred> },
    Modal(ModalOp, Box<Pred>),
    Pullback(Arc<Morphism>, Box<Pred>),
    /// An explicit finite extension.
    Ext(Arc<BTreeSet<Term>>),
}

impl fmt::Debug for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Top => write!(f, "top"),
            Pred::Bot => write!(f, "bot"),
            Pred::Principal(t) => write!(f, "<{t:?}>"),
            Pred::Image(g, ps) => write!(f, "{g}{ps:?}"),
            Pred::Secure(g, ps) => write!(f, "{g}*{ps:?}"),
            Pred::Subst(p, g) => write!(f, "{p:?}[{g}]"),
            Pred::Along(p, t) => write!(f, "{p:?}[{t:?}]"),
            Pred::And(ps) => write!(f, "and{ps:?}"),
            Pred::Or(ps) => write!(f, "or{ps:?}"),
            Pred::Implies(a, b) => write!(f, "({a:?} => {b:?})"),
            Pred::Not(p) => write!(f, "!{p:?}"),
            Pred::Hom(a, b) => write!(f, "hom({a:?}, {b:?})"),
            Pred::Reify { var, body, family } => write!(f, "reify({var}. {body:?}; {family:?})"),
            Pred::Fix { kind, var, body, .. } => write!(f, "{kind:?} {var}. {body:?}"),
            Pred::Var(x) => write!(f, "{x}"),
            Pred::Exists { var, sort, body } => write!(f, "exists {var}:{sort}. {body:?}"),
            Pred::Forall { var, sort, body } => write!(f, "forall {var}:{sort}. {body:?}"),
            Pred::Modal(m, p) => write!(f, "{}({p:?})", m.name()),
            Pred::Pullback(m, p) => write!(f, "pullback[{}]({p:?})", m.name),
            Pred::Ext(s) => write!(f, "ext({})", s.len()),
        }
    }
}

impl Pred {
    pub fn not(p: Pred) -> Pred {
        Pred::Not(Box::new(p))
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(vec![a, b])
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(vec![a, b])
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Implies(Box::new(a), Box::new(b))
    }

    pub fn hom(a: Pred, b: Pred) -> Pred {
        Pred::Hom(Box::new(a), Box::new(b))
    }

    pub fn modal(m: ModalOp, p: Pred) -> Pred {
        Pred::Modal(m, Box::new(p))
    }

    pub fn ext(ts: impl IntoIterator<Item = Term>) -> Pred {
        Pred::Ext(Arc::new(ts.into_iter().collect()))
    }

    fn children(&self) -> Vec<&Pred> {
        match self {
            Pred::Image(_, ps) | Pred::Secure(_, ps) | Pred::And(ps) | Pred::Or(ps) => ps.iter().collect(),
            Pred::Subst(p, _) | Pred::Along(p, _) | Pred::Not(p) | Pred::Modal(_, p) | Pred::Pullback(_, p) => {
                vec![p]
            }
            Pred::Implies(a, b) | Pred::Hom(a, b) => vec![a, b],
            Pred::Reify { body, family, .. } => std::iter::once(&**body).chain(family.iter()).collect(),
            Pred::Fix { body, .. } | Pred::Exists { body, .. } | Pred::Forall { body, .. } => vec![body],
            _ => vec![],
        }
    }

    /// Fixed-point variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Pred::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Pred::Fix { var, body, .. } => {
                bound.push(var.clone());
                body.collect_vars(bound, out);
                bound.pop();
            }
            Pred::Reify { var, body, family } => {
                family.iter().for_each(|p| p.collect_vars(bound, out));
                bound.push(var.clone());
                body.collect_vars(bound, out);
                bound.pop();
            }
            p => p.children().into_iter().for_each(|c| c.collect_vars(bound, out)),
        }
    }

    /// Does `x` occur only positively (under an even number of negations)?
    pub fn positive_in(&self, x: &Name) -> bool {
        self.polarity(x, true)
    }

    fn polarity(&self, x: &Name, pos: bool) -> bool {
        match self {
            Pred::Var(y) => y != x || pos,
            Pred::Not(p) => p.polarity(x, !pos),
            Pred::Implies(a, b) | Pred::Hom(a, b) => a.polarity(x, !pos) && b.polarity(x, pos),
            Pred::Secure(_, ps) => ps.iter().all(|p| p.polarity(x, pos)),
            Pred::Fix { var, .. } if var == x => true,
            Pred::Reify { var, body, family } => {
                family.iter().all(|p| p.polarity(x, !pos) && p.polarity(x, pos))
                    && (var == x || body.polarity(x, pos))
            }
            p => p.children().into_iter().all(|c| c.polarity(x, pos)),
        }
    }

    /// Replaces the fixed-point variable `x` by `q`.
    pub fn subst_var(&self, x: &Name, q: &Pred) -> Pred {
        self.map(&|p| match p {
            Pred::Var(y) if y == x => Some(q.clone()),
            Pred::Fix { var, .. } if var == x => Some(p.clone()),
            Pred::Reify { var, .. } if var == x => Some(p.clone()),
            _ => None,
        })
    }

    /// Replaces the free term name `x` by `v` in every embedded term.
    pub fn subst_term(&self, x: &Name, v: &Term) -> Pred {
        let asg = std::collections::BTreeMap::from([(x.clone(), v.clone())]);
        self.map(&|p| match p {
            Pred::Principal(t) => Some(Pred::Principal(t.subst_free(&asg))),
            Pred::Along(q, t) => Some(Pred::Along(Box::new(q.subst_term(x, v)), t.subst_free(&asg))),
            Pred::Exists { var, .. } | Pred::Forall { var, .. } if var == x => Some(p.clone()),
            _ => None,
        })
    }

    /// Bottom-up rebuild; `f` may replace a node outright.
    pub fn map(&self, f: &dyn Fn(&Pred) -> Option<Pred>) -> Pred {
        if let Some(p) = f(self) {
            return p;
        }
        let m = |p: &Pred| Box::new(p.map(f));
        let ms = |ps: &[Pred]| ps.iter().map(|p| p.map(f)).collect::<Vec<_>>();
        match self {
            Pred::Image(g, ps) => Pred::Image(g.clone(), ms(ps)),
            Pred::Secure(g, ps) => Pred::Secure(g.clone(), ms(ps)),
            Pred::Subst(p, g) => Pred::Subst(m(p), g.clone()),
            Pred::Along(p, t) => Pred::Along(m(p), t.clone()),
            Pred::And(ps) => Pred::And(ms(ps)),
            Pred::Or(ps) => Pred::Or(ms(ps)),
            Pred::Implies(a, b) => Pred::Implies(m(a), m(b)),
            Pred::Not(p) => Pred::Not(m(p)),
            Pred::Hom(a, b) => Pred::Hom(m(a), m(b)),
            Pred::Reify { var, body, family } => Pred::Reify { var: var.clone(), body: m(body), family: ms(family) },
            Pred::Fix { kind, var, sort, body } => {
                Pred::Fix { kind: *kind, var: var.clone(), sort: sort.clone(), body: m(body) }
            }
            Pred::Exists { var, sort, body } => Pred::Exists { var: var.clone(), sort: sort.clone(), body: m(body) },
            Pred::Forall { var, sort, body } => Pred::Forall { var: var.clone(), sort: sort.clone(), body: m(body) },
            Pred::Modal(op, p) => Pred::Modal(*op, m(p)),
            Pred::Pullback(mm, p) => Pred::Pullback(mm.clone(), m(p)),
            p => p.clone(),
        }
    }

    /// Free term names used by embedded patterns (they join the name pool).
    pub fn term_names(&self, out: &mut BTreeSet<(Name, Sort)>) {
        match self {
            Pred::Principal(t) | Pred::Along(_, t) => t.free_vars(out),
            _ => {}
        }
        if let Pred::Exists { var, sort, body } | Pred::Forall { var, sort, body } = self {
            let mut inner = BTreeSet::new();
            body.term_names(&mut inner);
            inner.remove(&(var.clone(), sort.clone()));
            out.extend(inner);
            return;
        }
        self.children().into_iter().for_each(|c| c.term_names(out));
    }
}
