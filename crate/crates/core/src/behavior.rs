//! Temporal modalities over explored rewrite graphs and act systems.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use crate::bisim::{build_lts, Pool};
use crate::error::Result;
use crate::predicate::ast::{ModalKind, ModalOp, Pred};
use crate::predicate::eval::Env;
use crate::print::print_term_bare;
use crate::rewrite::explore::explore;
use crate::term::Term;

/// A finite transition structure rooted at state 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    /// State terms; empty for abstract graphs.
    pub states: Vec<Term>,
    /// Outgoing edges with a printable label, without duplicates.
    pub succ: Vec<Vec<(usize, String)>>,
    /// False where exploration stopped before listing all successors.
    pub expanded: Vec<bool>,
}

impl Frame {
    pub fn from_edges(n: usize, edges: &[(usize, usize)], expanded: Vec<bool>) -> Frame {
        let mut succ = vec![Vec::new(); n];
        for &(a, b) in edges {
            let e = (b, String::new());
            if !succ[a].contains(&e) {
                succ[a].push(e);
            }
        }
        Frame { states: Vec::new(), succ, expanded }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn complete(&self) -> bool {
        self.expanded.iter().all(|e| *e)
    }

    fn targets(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[v].iter().map(|(w, _)| *w)
    }

    fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for v in 0..self.len() {
            for w in self.targets(v) {
                if !p[w].contains(&v) {
                    p[w].push(v);
                }
            }
        }
        p
    }
}

/// `{ t(e) | s(e) ∈ ext }`.
pub fn step_forward(f: &Frame, ext: &[bool]) -> Vec<bool> {
    let mut out = vec![false; f.len()];
    for v in 0..f.len() {
        if ext[v] {
            for w in f.targets(v) {
                out[w] = true;
            }
        }
    }
    out
}

/// Nodes all of whose incoming edges start in `ext`.
pub fn secure_step_forward(f: &Frame, ext: &[bool]) -> Vec<bool> {
    let preds = f.preds();
    (0..f.len()).map(|v| preds[v].iter().all(|&u| ext[u])).collect()
}

/// Some successor in `ext`.
fn can_step(f: &Frame, ext: &[bool]) -> Vec<bool> {
    (0..f.len()).map(|v| f.targets(v).any(|w| ext[w])).collect()
}

/// Every successor in `ext`; false where successors are unknown.
fn must_step(f: &Frame, ext: &[bool]) -> Vec<bool> {
    (0..f.len()).map(|v| f.expanded[v] && f.targets(v).all(|w| ext[w])).collect()
}

fn reach(f: &Frame, ext: &[bool]) -> Vec<bool> {
    let preds = f.preds();
    let mut out = ext.to_vec();
    let mut queue: VecDeque<usize> = (0..f.len()).filter(|&v| ext[v]).collect();
    while let Some(w) = queue.pop_front() {
        for &v in &preds[w] {
            if !out[v] {
                out[v] = true;
                queue.push_back(v);
            }
        }
    }
    out
}

/// Iterates `step` from `ext` until the sequence repeats, folding with `or` or `and`.
fn iterate_all(ext: &[bool], step: impl Fn(&[bool]) -> Vec<bool>, any: bool) -> Vec<bool> {
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut acc = ext.to_vec();
    let mut x = ext.to_vec();
    while seen.insert(x.clone()) {
        for (a, b) in acc.iter_mut().zip(&x) {
            *a = if any { *a || *b } else { *a && *b };
        }
        x = step(&x);
    }
    acc
}

/// The extension of `kind` applied to `ext` on `f`.
pub fn modal_values(f: &Frame, kind: ModalKind, ext: &[bool]) -> Vec<bool> {
    match kind {
        ModalKind::BBang => can_step(f, ext),
        ModalKind::BStar => must_step(f, ext),
        ModalKind::FBang => step_forward(f, ext),
        ModalKind::FStar => secure_step_forward(f, ext),
        ModalKind::BBangO => reach(f, ext),
        ModalKind::BStarB => {
            let bad: Vec<bool> = ext.iter().map(|b| !b).collect();
            reach(f, &bad).into_iter().map(|b| !b).collect()
        }
        ModalKind::BStarO => iterate_all(ext, |x| must_step(f, x), true),
        ModalKind::BBangB => iterate_all(ext, |x| can_step(f, x), false),
    }
}

/// Shortest path from the root to a node in `target`.
pub fn path_to(f: &Frame, target: &[bool]) -> Option<Vec<usize>> {
    let mut back = vec![usize::MAX; f.len()];
    let mut seen = vec![false; f.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        if target[v] {
            let mut path = vec![v];
            let mut x = v;
            while back[x] != usize::MAX {
                x = back[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        for w in f.targets(v) {
            if !seen[w] {
                seen[w] = true;
                back[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// A path to a φ-node for "can become", or to a ¬φ-node refuting "always".
pub fn witness(f: &Frame, kind: ModalKind, ext: &[bool], value: bool) -> Option<Vec<usize>> {
    match (kind, value) {
        (ModalKind::BBangO, true) => path_to(f, ext),
        (ModalKind::BStarB, false) => path_to(f, &ext.iter().map(|b| !b).collect::<Vec<_>>()),
        _ => None,
    }
}

/// Exploration depth a modality needs: one step for the one-step operators.
fn depth_for(env: &Env, kind: ModalKind) -> usize {
    match kind {
        ModalKind::BBang | ModalKind::BStar => 1,
        _ => env.params.explore_depth,
    }
}

/// The rewrite graph (or act system when `act`) from `t`, cached in `env`.
pub fn frame_for(env: &Env, t: &Term, act: bool, depth: usize) -> Result<Arc<Frame>> {
    let key = (t.clone(), act, depth);
    if let Some(f) = env.graphs.borrow().get(&key) {
        return Ok(f.clone());
    }
    let f = Arc::new(if act { act_frame(env, t, depth)? } else { rewrite_frame(env, t, depth) });
    env.graphs.borrow_mut().insert(key, f.clone());
    Ok(f)
}

fn rewrite_frame(env: &Env, t: &Term, depth: usize) -> Frame {
    let g = explore(env.th, t, depth, env.params.explore_cap);
    let mut succ = vec![Vec::new(); g.nodes.len()];
    for e in &g.edges {
        let s = (e.to, e.step.rule.to_string());
        if !succ[e.from].contains(&s) {
            succ[e.from].push(s);
        }
    }
    Frame { states: g.nodes, succ, expanded: g.expanded }
}

fn act_frame(env: &Env, t: &Term, depth: usize) -> Result<Frame> {
    let mut names = Vec::new();
    for s in env.th.name_sorts() {
        names.extend(env.universe.names(&s));
    }
    let mut seeds = vec![t.clone()];
    seeds.extend(names);
    let pool = Pool::new(env.th, &seeds, 0, env.params.act_payload_depth)?;
    let sys = build_lts(env.th, &[t.clone()], &pool, depth.min(env.params.act_depth), env.params.explore_cap)?;
    let mut succ = vec![Vec::new(); sys.lts.states];
    for (a, l, b) in &sys.lts.trans {
        succ[*a].push((*b, l.render(env.th)));
    }
    Ok(Frame { states: sys.terms, succ, expanded: sys.lts.expanded })
}

/// Evaluates `op(φ)` at `t`, flagging the environment when the explored region was cut off.
pub fn modal_eval(env: &Env, op: ModalOp, phi: &Pred, t: &Term) -> Result<bool> {
    Ok(modal_check(env, op, phi, t)?.value)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModalOutcome {
    pub value: bool,
    pub bounded: bool,
    /// Alternating states and labels: `[(label into state, state)]`, starting at the root.
    pub witness: Option<Vec<(String, Term)>>,
}

pub fn modal_check(env: &Env, op: ModalOp, phi: &Pred, t: &Term) -> Result<ModalOutcome> {
    let f = frame_for(env, t, op.act, depth_for(env, op.kind))?;
    let mut ext = Vec::with_capacity(f.len());
    for s in &f.states {
        ext.push(env.eval(phi, s)?);
    }
    let vals = modal_values(&f, op.kind, &ext);
    let value = vals[0];
    let bounded = match op.kind {
        ModalKind::BBang | ModalKind::BStar => !f.expanded[0],
        _ => !f.complete(),
    };
    if bounded {
        env.bounded.set(true);
    }
    let witness = witness(&f, op.kind, &ext, value).map(|path| {
        let mut out = vec![(String::new(), f.states[path[0]].clone())];
        for w in path.windows(2) {
            let l = f.succ[w[0]].iter().find(|(x, _)| *x == w[1]).map(|(_, l)| l.clone()).unwrap_or_default();
            out.push((l, f.states[w[1]].clone()));
        }
        out
    });
    Ok(ModalOutcome { value, bounded, witness })
}

/// Evaluates `p` at `t`; a modality at the top (possibly negated) also yields a witness path.
pub fn check(env: &Env, p: &Pred, t: &Term) -> Result<ModalOutcome> {
    let t = env.canon(t);
    let out = match p {
        Pred::Modal(op, q) => modal_check(env, *op, q, &t)?,
        Pred::Not(inner) if matches!(**inner, Pred::Modal(..)) => {
            let Pred::Modal(op, q) = &**inner else { unreachable!() };
            let o = modal_check(env, *op, q, &t)?;
            ModalOutcome { value: !o.value, ..o }
        }
        _ => ModalOutcome { value: env.eval(p, &t)?, bounded: false, witness: None },
    };
    Ok(ModalOutcome { bounded: out.bounded || env.bounded.get(), ..out })
}

/// Renders a witness as `t0 ~rule~> t1 ~...`.
pub fn render_witness(env: &Env, w: &[(String, Term)]) -> Vec<String> {
    w.iter()
        .map(|(l, t)| {
            let s = print_term_bare(env.th, t);
            if l.is_empty() {
                s
            } else {
                format!("~{l}~> {s}")
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{parse_pred, EvalParams};
    use crate::sort::Sort;
    use crate::syntax::elab::parse_term_in;
    use crate::theories::builtin;
    use crate::theory::Theory;
    use crate::universe::UniverseParams;

    fn check(th: &Theory, term: &str, pred: &str) -> bool {
        let t = parse_term_in(th, term, Some(&Sort::base("P"))).unwrap();
        let (p, _) = parse_pred(th, pred, Some(&Sort::base("P"))).unwrap();
        let params = EvalParams { universe: UniverseParams { depth: 1, ..Default::default() }, ..Default::default() };
        let env = Env::new(th, params, &Env::seeds_for(&p, &[t.clone()]));
        crate::predicate::eval(&env, &p, &t).unwrap()
    }

    #[test]
    fn step_operators() {
        let f = Frame::from_edges(3, &[(0, 2), (1, 2)], vec![true; 3]);
        assert_eq!(step_forward(&f, &[true, false, false]), vec![false, false, true]);
        assert_eq!(step_forward(&f, &[false; 3]), vec![false; 3]);
        assert_eq!(secure_step_forward(&f, &[true, false, false]), vec![true, true, false]);
        assert_eq!(secure_step_forward(&f, &[true; 3]), vec![true; 3]);
    }

    #[test]
    fn iterated_modalities_on_a_cycle() {
        // 0 -> 1 -> 2 -> 1, 0 -> 3 (dead end)
        let f = Frame::from_edges(4, &[(0, 1), (1, 2), (2, 1), (0, 3)], vec![true; 4]);
        let phi = [false, false, true, false];
        assert_eq!(modal_values(&f, ModalKind::BBangO, &phi), vec![true, true, true, false]);
        assert_eq!(modal_values(&f, ModalKind::BStarB, &phi), vec![false, false, false, false]);
        // dead ends satisfy every B*^n vacuously
        assert_eq!(modal_values(&f, ModalKind::BStarO, &phi), vec![true; 4]);
        assert_eq!(modal_values(&f, ModalKind::BBangB, &phi), vec![false, false, false, false]);
        assert_eq!(witness(&f, ModalKind::BBangO, &phi, true), Some(vec![0, 1, 2]));
    }

    #[test]
    fn can_become_zero() {
        let mut th = builtin("rho-pi").unwrap();
        assert!(check(&th, "out(n, 0) | in(n, \\x. *x)", "B!o(<0>)"));
        th.set_flag("run_eq", true).unwrap();
        assert!(check(&th, "out(n, 0) | in(n, \\x. *x)", "B!o(<0>)"));
        assert!(check(&th, "out(n, 0)", "B*b(top)"));
    }

    #[test]
    fn safety_and_liveness() {
        let th = builtin("rho-pi").unwrap();
        assert!(check(&th, "in(a, \\x. 0)", "safe(<a>)"));
        assert!(!check(&th, "in(a, \\x. 0)", "safe(bot)"));
        assert!(!check(&th, "in(b, \\x. 0)", "safe(<a>)"));
        assert!(check(&th, "in(a, \\x. 0)", "live(<a>)"));
        assert!(!check(&th, "out(a, 0)", "live(<a>)"));
    }
}
