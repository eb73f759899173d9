//! Observation contexts, the act labelled transition system and bisimilarity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::print::print_term_bare;
use crate::rewrite::canon::Canon;
use crate::rewrite::step::Stepper;
use crate::sort::{name, Sort};
use crate::term::Term;
use crate::theory::Theory;
use crate::universe::{Universe, UniverseParams};

/// Which observation context a transition went through.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObsLabel {
    Identity,
    /// `out(name, payload) | ·`
    Out { name: Term, payload: Term },
    /// `in(name, λy.*y) | ·`
    In { name: Term },
}

impl ObsLabel {
    pub fn render(&self, th: &Theory) -> String {
        match self {
            ObsLabel::Identity => "id".to_string(),
            ObsLabel::Out { name, payload } => {
                format!("out({}, {}) | -", print_term_bare(th, name), print_term_bare(th, payload))
            }
            ObsLabel::In { name } => format!("in({}, \\y. *y) | -", print_term_bare(th, name)),
        }
    }
}

/// The operators an observation context is built from.
#[derive(Clone, Debug)]
struct Shape {
    par: String,
    out: Option<String>,
    inp: Option<(String, Term)>,
}

fn shape(th: &Theory, proc: &Sort) -> Option<Shape> {
    let st = th.structure();
    let par = st.ac.keys().find(|f| th.op(f).map_or(false, |d| &d.result == proc && d.args.len() == 2))?;
    let out = th
        .op("out")
        .filter(|d| d.args.len() == 2 && th.is_name_sort(&d.args[0]) && &d.args[1] == proc)
        .map(|d| d.name.to_string());
    let inp = th.op("in").filter(|d| d.args.len() == 2 && th.is_name_sort(&d.args[0])).and_then(|d| {
        let n = d.args[0].clone();
        let k = Sort::func(vec![n.clone()], proc.clone());
        if d.args[1] != k {
            return None;
        }
        // continuation λy.*y, or λy.0 when the theory cannot run a name
        let body = match th.op("*") {
            Some(s) if s.args == vec![n] && &s.result == proc => Term::op("*", vec![Term::Bound(0)]),
            _ => st.ac[par].unit.clone()?,
        };
        Some((d.name.to_string(), Term::lam(vec![d.args[0].clone()], body)))
    });
    Some(Shape { par: par.to_string(), out, inp })
}

/// Names and payloads the observation contexts range over.
#[derive(Clone, Debug)]
pub struct Pool {
    pub names: Vec<Term>,
    pub payloads: Vec<Term>,
}

impl Pool {
    /// Free names of `seeds` plus `fresh` new names; payloads are the closed
    /// processes of depth at most `payload_depth` over those names.
    pub fn new(th: &Theory, seeds: &[Term], fresh: usize, payload_depth: usize) -> Result<Pool> {
        let proc = process_sort(th, seeds)?;
        let u = Universe::new(th, UniverseParams { depth: payload_depth, fresh_names: fresh, ..Default::default() }, seeds);
        let mut names = Vec::new();
        for s in th.name_sorts() {
            names.extend(u.names(&s));
        }
        let payloads = u.terms(&proc)?.as_ref().clone();
        Ok(Pool { names, payloads })
    }
}

fn process_sort(th: &Theory, seeds: &[Term]) -> Result<Sort> {
    for t in seeds {
        let s = th.sort_of(&[], t)?;
        if !th.is_name_sort(&s) {
            return Ok(s);
        }
    }
    Ok(Sort::base("P"))
}

pub fn obs_labels(th: &Theory, proc: &Sort, pool: &Pool) -> Vec<ObsLabel> {
    let mut out = vec![ObsLabel::Identity];
    let Some(sh) = shape(th, proc) else { return out };
    for n in &pool.names {
        let ns = th.sort_of(&[], n).ok();
        if sh.out.is_some() && ns.as_ref() == th.op("out").map(|d| &d.args[0]) {
            for q in &pool.payloads {
                out.push(ObsLabel::Out { name: n.clone(), payload: q.clone() });
            }
        }
        if sh.inp.is_some() && ns.as_ref() == th.op("in").map(|d| &d.args[0]) {
            out.push(ObsLabel::In { name: n.clone() });
        }
    }
    out
}

/// `c[p/x]` for the context named by `label`.
fn fill(th: &Theory, label: &ObsLabel, p: &Term) -> Term {
    let sh = match label {
        ObsLabel::Identity => return p.clone(),
        _ => shape(th, &th.sort_of(&[], p).unwrap_or(Sort::base("P"))).expect("context needs a parallel operator"),
    };
    let ctx = match label {
        ObsLabel::Out { name, payload } => Term::op(sh.out.as_deref().unwrap(), vec![name.clone(), payload.clone()]),
        ObsLabel::In { name } => {
            let (inp, k) = sh.inp.clone().unwrap();
            Term::op(&inp, vec![name.clone(), k])
        }
        ObsLabel::Identity => unreachable!(),
    };
    Term::op(&sh.par, vec![ctx, p.clone()])
}

/// The context itself as an abstraction `λx.c`.
pub fn obs_context(th: &Theory, label: &ObsLabel, proc: &Sort) -> Term {
    let x = Term::free("%hole", proc.clone());
    let body = fill(th, label, &x);
    Term::lam(vec![proc.clone()], body.abstract_frees(&[name("%hole")]))
}

/// A finite labelled transition system. Unexpanded states have unknown
/// outgoing transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts<L> {
    pub states: usize,
    pub trans: Vec<(usize, L, usize)>,
    pub expanded: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct ProcessLts {
    pub terms: Vec<Term>,
    pub lts: Lts<ObsLabel>,
    index: HashMap<Term, usize>,
}

impl ProcessLts {
    pub fn state(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// True when some state was left unexpanded.
    pub fn bounded(&self) -> bool {
        self.lts.expanded.iter().any(|e| !e)
    }
}

/// Act transitions of one state: `(p, c, q)` whenever `c[p]` takes a basic step to `q`.
pub fn act_transitions(th: &Theory, labels: &[ObsLabel], p: &Term) -> Vec<(ObsLabel, Term)> {
    let c = Canon::new(th);
    let st = Stepper::new(&c);
    let mut out = BTreeSet::new();
    for l in labels {
        let filled = c.canon(&fill(th, l, p));
        for s in st.steps(&filled) {
            out.insert((l.clone(), s.target));
        }
    }
    out.into_iter().collect()
}

fn has_act_transition(th: &Theory, labels: &[ObsLabel], p: &Term) -> bool {
    let c = Canon::new(th);
    let st = Stepper::new(&c);
    // inputs are few and usually fire, so try them before the outputs
    let (outs, rest): (Vec<&ObsLabel>, Vec<&ObsLabel>) = labels.iter().partition(|l| matches!(l, ObsLabel::Out { .. }));
    rest.into_iter().chain(outs).any(|l| !st.steps(&c.canon(&fill(th, l, p))).is_empty())
}

const CHUNK: usize = 32;

/// Closure of `roots` under act transitions, breadth first up to `depth` and `cap` states.
pub fn build_lts(th: &Theory, roots: &[Term], pool: &Pool, depth: usize, cap: usize) -> Result<ProcessLts> {
    let proc = process_sort(th, roots)?;
    let labels = obs_labels(th, &proc, pool);
    let c = Canon::new(th);
    let mut terms = Vec::new();
    let mut index = HashMap::new();
    let mut layer = Vec::new();
    for r in roots {
        if !r.is_closed() {
            return Err(Error::IllSorted("act systems need closed processes".into()));
        }
        let r = c.canon(r);
        if !index.contains_key(&r) {
            index.insert(r.clone(), terms.len());
            layer.push(terms.len());
            terms.push(r);
        }
    }
    let mut expanded = vec![false; terms.len()];
    let mut trans = Vec::new();
    let mut capped = false;
    for _ in 0..depth {
        if layer.is_empty() {
            break;
        }
        let mut next = Vec::new();
        let mut full = false;
        // chunks keep the work bounded once the cap is reached
        'layer: for chunk in layer.chunks(CHUNK) {
            let results: Vec<Vec<(ObsLabel, Term)>> =
                chunk.par_iter().map(|&v| act_transitions(th, &labels, &terms[v])).collect();
            for (&v, ts) in chunk.iter().zip(results) {
                let fresh = ts.iter().map(|(_, q)| q).filter(|q| !index.contains_key(*q)).collect::<BTreeSet<_>>().len();
                if fresh > 0 && terms.len() + fresh > cap {
                    full = true;
                    break 'layer;
                }
                for (l, q) in ts {
                    let to = *index.entry(q.clone()).or_insert_with(|| {
                        terms.push(q);
                        expanded.push(false);
                        next.push(terms.len() - 1);
                        terms.len() - 1
                    });
                    trans.push((v, l, to));
                }
                expanded[v] = true;
            }
        }
        if full {
            capped = true;
            break;
        }
        layer = next;
    }
    // after a cap the frontier is large and stays unexpanded
    let pending: Vec<usize> = if capped { Vec::new() } else { (0..terms.len()).filter(|&v| !expanded[v]).collect() };
    let dead: Vec<bool> =
        pending.par_iter().map(|&v| !has_act_transition(th, &labels, &terms[v])).collect();
    for (v, d) in pending.into_iter().zip(dead) {
        if d {
            expanded[v] = true;
        }
    }
    trans.sort();
    trans.dedup();
    Ok(ProcessLts { lts: Lts { states: terms.len(), trans, expanded }, terms, index })
}

/// Coarsest stable partition, with the block assignment after every round.
/// Unexpanded states start in singleton blocks.
pub fn refine<L: Ord + Clone>(lts: &Lts<L>) -> Vec<Vec<usize>> {
    let n = lts.states;
    let mut labels: BTreeMap<&L, usize> = BTreeMap::new();
    for (_, l, _) in &lts.trans {
        let k = labels.len();
        labels.entry(l).or_insert(k);
    }
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (s, l, t) in &lts.trans {
        succ[*s].push((labels[l], *t));
    }
    let mut block: Vec<usize> = (0..n).map(|s| if lts.expanded[s] { 0 } else { s + 1 }).collect();
    renumber(&mut block);
    let mut hist = vec![block.clone()];
    loop {
        let mut sigs: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let mut sig: Vec<(usize, usize)> = succ[s].iter().map(|(l, t)| (*l, block[*t])).collect();
            sig.sort();
            sig.dedup();
            let k = sigs.len();
            next[s] = *sigs.entry((block[s], sig)).or_insert(k);
        }
        renumber(&mut next);
        if count(&next) == count(&block) {
            return hist;
        }
        block = next;
        hist.push(block.clone());
    }
}

fn count(b: &[usize]) -> usize {
    b.iter().collect::<BTreeSet<_>>().len()
}

/// Block ids in order of first occurrence.
fn renumber(b: &mut [usize]) {
    let mut ids = HashMap::new();
    for x in b.iter_mut() {
        let k = ids.len();
        *x = *ids.entry(*x).or_insert(k);
    }
}

/// Bisimilarity as a relation, by partition refinement.
pub fn bisimilarity<L: Ord + Clone>(lts: &Lts<L>) -> Vec<Vec<bool>> {
    let hist = refine(lts);
    let b = hist.last().unwrap();
    (0..lts.states).map(|s| (0..lts.states).map(|t| b[s] == b[t]).collect()).collect()
}

/// One application of the two-clause step functional to a relation.
pub fn step_relation<L: Ord + Clone>(lts: &Lts<L>, r: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = lts.states;
    let mut succ: Vec<Vec<(&L, usize)>> = vec![Vec::new(); n];
    for (s, l, t) in &lts.trans {
        succ[*s].push((l, *t));
    }
    let sim = |p: usize, q: usize, r: &dyn Fn(usize, usize) -> bool| {
        succ[p].iter().all(|(l, p2)| succ[q].iter().any(|(m, q2)| l == m && r(*p2, *q2)))
    };
    let mut out = vec![vec![false; n]; n];
    for p in 0..n {
        for q in 0..n {
            if p != q && !(lts.expanded[p] && lts.expanded[q]) {
                continue;
            }
            out[p][q] = p == q || (sim(p, q, &|a, b| r[a][b]) && sim(q, p, &|a, b| r[b][a]));
        }
    }
    out
}

/// Naive iteration of the step functional from the full relation (greatest fixpoint).
pub fn nu_iteration<L: Ord + Clone>(lts: &Lts<L>) -> Vec<Vec<bool>> {
    iterate(lts, vec![vec![true; lts.states]; lts.states])
}

/// Naive iteration from the empty relation (least fixpoint). The identity on
/// unexpanded states is kept, as in every relation the functional produces.
pub fn mu_iteration<L: Ord + Clone>(lts: &Lts<L>) -> Vec<Vec<bool>> {
    iterate(lts, vec![vec![false; lts.states]; lts.states])
}

fn iterate<L: Ord + Clone>(lts: &Lts<L>, mut r: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    loop {
        let next = step_relation(lts, &r);
        if next == r {
            return r;
        }
        r = next;
    }
}

/// Labels along which `p` and `q` behave differently, read off the refinement
/// history. `None` when they are bisimilar.
pub fn distinguishing<L: Ord + Clone>(lts: &Lts<L>, p: usize, q: usize) -> Option<Vec<L>> {
    let hist = refine(lts);
    let last = hist.last().unwrap();
    if last[p] == last[q] {
        return None;
    }
    let mut out = Vec::new();
    let (mut p, mut q) = (p, q);
    loop {
        let r = (0..hist.len()).find(|&r| hist[r][p] != hist[r][q]).unwrap();
        if r == 0 {
            // separated from the start: one side was never expanded
            return Some(out);
        }
        let b = &hist[r - 1];
        let sig = |s: usize| -> BTreeSet<(&L, usize)> {
            lts.trans.iter().filter(|(a, _, _)| *a == s).map(|(_, l, t)| (l, b[*t])).collect()
        };
        let (sp, sq) = (sig(p), sig(q));
        let (x, y, (l, blk)) = match sp.difference(&sq).next() {
            Some(e) => (p, q, *e),
            None => (q, p, *sq.difference(&sp).next().unwrap()),
        };
        out.push(l.clone());
        let x2 = lts.trans.iter().find(|(a, m, t)| *a == x && m == l && b[*t] == blk).unwrap().2;
        match lts.trans.iter().find(|(a, m, _)| *a == y && m == l) {
            Some((_, _, y2)) => {
                p = x2;
                q = *y2;
            }
            None => return Some(out),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BisimResult {
    pub bisimilar: bool,
    pub distinguishing: Vec<ObsLabel>,
    pub bounded: bool,
    pub states: usize,
}

pub const DEFAULT_FRESH: usize = 2;
pub const DEFAULT_PAYLOAD_DEPTH: usize = 2;

/// Bisimilarity of two processes on the act system built from both.
pub fn bisimilar(th: &Theory, p: &Term, q: &Term, pool: &Pool, depth: usize, cap: usize) -> Result<BisimResult> {
    let ps = th.sort_of(&[], p)?;
    let qs = th.sort_of(&[], q)?;
    if ps != qs {
        return Err(Error::SortMismatch { expected: ps, found: qs });
    }
    let sys = build_lts(th, &[p.clone(), q.clone()], pool, depth, cap)?;
    let c = Canon::new(th);
    let i = sys.state(&c.canon(p)).unwrap();
    let j = sys.state(&c.canon(q)).unwrap();
    let d = distinguishing(&sys.lts, i, j);
    Ok(BisimResult {
        bisimilar: d.is_none(),
        distinguishing: d.unwrap_or_default(),
        bounded: sys.bounded(),
        states: sys.lts.states,
    })
}
