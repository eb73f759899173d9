//! Matching modulo the structural equations.
//!
//! Assignments are returned at the root context of the pattern. Subjects are
//! canonical; patterns need not be.

use std::collections::{BTreeSet, HashSet};

use crate::rewrite::canon::Canon;
use crate::sort::{Name, Sort};
use crate::term::{Assignment, Term};
use crate::theory::Theory;

/// How many extra copies a replicated element may contribute to one match.
const MAX_UNFOLD: usize = 2;

pub struct Matcher<'c, 'a> {
    c: &'c Canon<'a>,
}

type K<'k> = &'k mut dyn FnMut(Assignment);

fn is_flex(p: &Term) -> bool {
    match p {
        Term::Meta(..) => true,
        Term::Apply(h, _) => matches!(**h, Term::Meta(..)),
        _ => false,
    }
}

fn flex_name(p: &Term) -> &Name {
    match p {
        Term::Meta(x, _) => x,
        Term::Apply(h, _) => match &**h {
            Term::Meta(x, _) => x,
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

impl<'c, 'a> Matcher<'c, 'a> {
    pub fn with_canon(c: &'c Canon<'a>) -> Matcher<'c, 'a> {
        Matcher { c }
    }

    /// All assignments under which `pattern` equals `subject`, sorted.
    pub fn matches(&self, pattern: &Term, subject: &Term) -> Vec<Assignment> {
        let mut out = BTreeSet::new();
        self.m(pattern, subject, 0, Assignment::new(), &mut |a| {
            out.insert(a);
        });
        out.into_iter().collect()
    }

    /// Binds `x` to the value `v` found under `d` local binders.
    fn bind(&self, x: &Name, v: &Term, d: u32, mut asg: Assignment, k: K) {
        if v.has_loose_below(d) {
            return;
        }
        let v = v.shift(-(d as i64), 0);
        match asg.get(x) {
            Some(old) if *old != v => {}
            Some(_) => k(asg),
            None => {
                asg.insert(x.clone(), v);
                k(asg)
            }
        }
    }

    fn m(&self, p: &Term, s: &Term, d: u32, asg: Assignment, k: K) {
        match p {
            Term::Meta(x, _) => self.bind(x, s, d, asg, k),
            Term::Apply(h, args) if matches!(**h, Term::Meta(..)) => self.m_higher(p, h, args, s, d, asg, k),
            Term::Lam(ss, b) => {
                if let Term::Lam(ss2, sb) = s {
                    if ss == ss2 {
                        self.m(b, sb, d + ss.len() as u32, asg, k)
                    }
                }
            }
            Term::Tuple(ps) => {
                if let Term::Tuple(xs) = s {
                    if xs.len() == ps.len() {
                        self.m_list(ps, xs, d, asg, k)
                    }
                }
            }
            Term::Op(f, ps) if self.c.st.ac.contains_key(f) && !ps.is_empty() => self.m_ac(f, ps, s, d, asg, k),
            Term::Op(f, ps) => {
                if let Term::Op(g, xs) = s {
                    if f == g && xs.len() == ps.len() {
                        self.m_list(ps, xs, d, asg, k)
                    }
                }
            }
            Term::Apply(..) => {
                let inst = self.c.canon(&p.instantiate_at(&asg, d));
                if !inst.has_metas() && &inst == s {
                    k(asg)
                }
            }
            _ => {
                if p == s {
                    k(asg)
                }
            }
        }
    }

    fn m_list(&self, ps: &[Term], xs: &[Term], d: u32, asg: Assignment, k: K) {
        match ps.split_first() {
            None => k(asg),
            Some((p, rest)) => self.m(p, &xs[0], d, asg, &mut |a| self.m_list(rest, &xs[1..], d, a, k)),
        }
    }

    /// `F(args)` with `F` a pattern variable of function sort.
    #[allow(clippy::too_many_arguments)]
    fn m_higher(&self, p: &Term, h: &Term, args: &[Term], s: &Term, d: u32, asg: Assignment, k: K) {
        let Term::Meta(f, sort) = h else { return };
        if asg.contains_key(f) {
            let inst = self.c.canon(&p.instantiate_at(&asg, d));
            if &inst == s {
                k(asg);
            }
            return;
        }
        // higher-order pattern: distinct local variables as arguments
        let mut idx = Vec::new();
        for a in args {
            match a {
                Term::Bound(i) if *i < d && !idx.contains(i) => idx.push(*i),
                _ => return,
            }
        }
        let Sort::Func(dom, _) = sort else { return };
        let n = idx.len() as u32;
        let mut loose = BTreeSet::new();
        s.loose_indices(0, &mut loose);
        if loose.iter().any(|j| *j < d && !idx.contains(j)) {
            return;
        }
        let body = s.rename_loose(&|j| {
            if j < d {
                let pos = idx.iter().position(|i| *i == j).unwrap() as u32;
                n - 1 - pos
            } else {
                j - d + n
            }
        });
        let v = Term::Lam(dom.clone(), Box::new(body));
        let mut asg = asg;
        asg.insert(f.clone(), v);
        k(asg)
    }

    fn elems_of(&self, f: &Name, s: &Term) -> Vec<Term> {
        let info = &self.c.st.ac[f];
        match s {
            Term::Op(g, xs) if g == f && (info.assoc || info.comm) && xs.len() != 1 => xs.clone(),
            s if info.unit.as_ref() == Some(s) => vec![],
            s => vec![s.clone()],
        }
    }

    fn flatten_pattern(&self, f: &Name, ps: &[Term], out: &mut Vec<Term>) {
        let assoc = self.c.st.ac[f].assoc;
        for p in ps {
            match p {
                Term::Op(g, xs) if assoc && g == f => self.flatten_pattern(f, xs, out),
                p => out.push(p.clone()),
            }
        }
    }

    fn m_ac(&self, f: &Name, ps: &[Term], s: &Term, d: u32, asg: Assignment, k: K) {
        let info = self.c.st.ac[f].clone();
        if !info.assoc {
            // commutative binary node
            if let Term::Op(g, xs) = s {
                if g == f && xs.len() == ps.len() {
                    self.m_list(ps, xs, d, asg.clone(), k);
                    if info.comm && ps.len() == 2 && xs[0] != xs[1] {
                        self.m_list(ps, &[xs[1].clone(), xs[0].clone()], d, asg, k);
                    }
                }
            }
            return;
        }
        let mut pe = Vec::new();
        self.flatten_pattern(f, ps, &mut pe);
        let se = self.elems_of(f, s);
        if !info.comm {
            return self.m_seq(f, &pe, &se, d, asg, k);
        }
        let (rigid, flex): (Vec<Term>, Vec<Term>) = pe.into_iter().partition(|p| !is_flex(p));
        for variant in self.unfoldings(f, &se) {
            self.m_rigid(f, &rigid, &flex, variant, d, asg.clone(), k);
        }
    }

    /// The element multiset plus 0..=MAX_UNFOLD extra copies of each replicated body.
    fn unfoldings(&self, f: &Name, se: &[Term]) -> Vec<Vec<Term>> {
        let repl: Vec<(usize, Term)> = se
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e {
                Term::Op(g, xs) if xs.len() == 1 && self.c.st.unfold.get(g) == Some(f) => Some((i, xs[0].clone())),
                _ => None,
            })
            .collect();
        let mut out = vec![se.to_vec()];
        for (_, body) in repl {
            let parts = self.elems_of(f, &body);
            let mut next = Vec::new();
            for v in &out {
                let mut w = v.clone();
                next.push(w.clone());
                for _ in 0..MAX_UNFOLD {
                    w.extend(parts.iter().cloned());
                    next.push(w.clone());
                }
            }
            out = next;
        }
        for v in &mut out {
            v.sort();
        }
        out.sort();
        out.dedup();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn m_rigid(&self, f: &Name, rigid: &[Term], flex: &[Term], rest: Vec<Term>, d: u32, asg: Assignment, k: K) {
        let Some((p, more)) = rigid.split_first() else {
            return self.m_flex(f, flex, rest, d, asg, k);
        };
        let mut tried: HashSet<&Term> = HashSet::new();
        for (i, e) in rest.iter().enumerate() {
            if !tried.insert(e) {
                continue;
            }
            let mut left = rest.clone();
            left.remove(i);
            self.m(p, e, d, asg.clone(), &mut |a| self.m_rigid(f, more, flex, left.clone(), d, a, k));
        }
    }

    fn value(&self, f: &Name, group: Vec<Term>) -> Option<Term> {
        let info = &self.c.st.ac[f];
        match group.len() {
            0 => info.unit.clone(),
            1 => Some(group.into_iter().next().unwrap()),
            _ => Some(self.c.ac_node(f, group)),
        }
    }

    fn m_flex(&self, f: &Name, flex: &[Term], rest: Vec<Term>, d: u32, asg: Assignment, k: K) {
        // already-bound variables consume their value's elements
        if let Some(i) = flex.iter().position(|p| asg.contains_key(flex_name(p))) {
            let inst = self.c.canon(&flex[i].instantiate_at(&asg, d));
            let mut left = rest;
            for e in self.elems_of(f, &inst) {
                match left.iter().position(|x| *x == e) {
                    Some(j) => {
                        left.remove(j);
                    }
                    None => return,
                }
            }
            let mut others = flex.to_vec();
            others.remove(i);
            return self.m_flex(f, &others, left, d, asg, k);
        }
        match flex.len() {
            0 => {
                if rest.is_empty() {
                    k(asg)
                }
            }
            1 => {
                if let Some(v) = self.value(f, rest) {
                    self.m(&flex[0], &v, d, asg, k)
                }
            }
            n => {
                let r = rest.len();
                let mut choice = vec![0usize; r];
                loop {
                    let mut groups: Vec<Vec<Term>> = vec![Vec::new(); n];
                    for (e, &g) in rest.iter().zip(&choice) {
                        groups[g].push(e.clone());
                    }
                    let vals: Option<Vec<Term>> = groups.into_iter().map(|g| self.value(f, g)).collect();
                    if let Some(vals) = vals {
                        self.m_list(flex, &vals, d, asg.clone(), k);
                    }
                    // next assignment of elements to groups
                    let mut j = 0;
                    while j < r {
                        choice[j] += 1;
                        if choice[j] < n {
                            break;
                        }
                        choice[j] = 0;
                        j += 1;
                    }
                    if j == r {
                        break;
                    }
                }
            }
        }
    }

    /// Associative (non-commutative) sequences: flexible variables take runs.
    #[allow(clippy::too_many_arguments)]
    fn m_seq(&self, f: &Name, pe: &[Term], se: &[Term], d: u32, asg: Assignment, k: K) {
        let Some((p, more)) = pe.split_first() else {
            if se.is_empty() {
                k(asg);
            }
            return;
        };
        if is_flex(p) && !asg.contains_key(flex_name(p)) {
            let min = if self.c.st.ac[f].unit.is_some() { 0 } else { 1 };
            for end in min..=se.len() {
                if let Some(v) = self.value(f, se[..end].to_vec()) {
                    self.m(p, &v, d, asg.clone(), &mut |a| self.m_seq(f, more, &se[end..], d, a, k));
                }
            }
        } else if is_flex(p) {
            let inst = self.c.canon(&p.instantiate_at(&asg, d));
            let es = self.elems_of(f, &inst);
            if se.len() >= es.len() && se[..es.len()] == es[..] {
                self.m_seq(f, more, &se[es.len()..], d, asg, k);
            }
        } else if let Some((e, rest)) = se.split_first() {
            self.m(p, e, d, asg, &mut |a| self.m_seq(f, more, rest, d, a, k));
        }
    }
}

/// Complete set of matches of `pattern` against the canonical form of `subject`.
pub fn match_term(th: &Theory, pattern: &Term, subject: &Term) -> Vec<Assignment> {
    let c = Canon::new(th);
    let s = c.canon(subject);
    Matcher::with_canon(&c).matches(pattern, &s)
}
