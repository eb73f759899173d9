//! Generators and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

pub mod translation;

use std::collections::{BTreeMap, BTreeSet};

use ntt_core::behavior::Frame;
use ntt_core::bisim::Lts;
use ntt_core::predicate::ModalKind;
use ntt_core::rewrite::canonicalize;
use ntt_core::theories::builtin;
use ntt_core::{Sort, Term, Theory};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rho() -> Theory {
    builtin("rho-pi").unwrap()
}

pub fn p() -> Sort {
    Sort::base("P")
}

pub fn n() -> Sort {
    Sort::base("N")
}

fn name_term(r: &mut ChaCha8Rng, bound: u32, size: usize) -> Term {
    if size >= 2 && r.gen_bool(0.15) {
        return Term::op("@", vec![proc_term(r, bound, size - 1)]);
    }
    if bound > 0 && r.gen_bool(0.3) {
        return Term::Bound(r.gen_range(0..bound));
    }
    Term::free(["a", "b"][r.gen_range(0..2)], n())
}

/// A random ρπ process of at most `size` constructors, with `bound` name
/// variables in scope.
pub fn proc_term(r: &mut ChaCha8Rng, bound: u32, size: usize) -> Term {
    if size <= 1 {
        return Term::constant("0");
    }
    match r.gen_range(0..10) {
        0 => Term::constant("0"),
        1..=3 => {
            let k = r.gen_range(1..size);
            Term::op("par", vec![proc_term(r, bound, k), proc_term(r, bound, size - k)])
        }
        4 => Term::op("*", vec![name_term(r, bound, size - 1)]),
        5 | 6 => {
            let k = r.gen_range(1..size);
            Term::op("out", vec![name_term(r, bound, k), proc_term(r, bound, size - k)])
        }
        _ => {
            let k = r.gen_range(1..size);
            let body = proc_term(r, bound + 1, size - k);
            Term::op("in", vec![name_term(r, bound, k), Term::lam(vec![n()], body)])
        }
    }
}

/// A closed random process of at most `size` constructors.
pub fn closed_proc(r: &mut ChaCha8Rng, size: usize) -> Term {
    proc_term(r, 0, size)
}

/// Processes with more redexes: parallel soups of outputs, inputs and drops.
pub fn redex_soup(r: &mut ChaCha8Rng, size: usize) -> Term {
    let mut parts = Vec::new();
    let mut left = size;
    while left >= 2 {
        let k = r.gen_range(2..=left.min(4));
        left -= k;
        let x = Term::free(["a", "b"][r.gen_range(0..2)], n());
        let part = match r.gen_range(0..3) {
            0 => Term::op("out", vec![x, proc_term(r, 0, k - 1)]),
            1 => Term::op("in", vec![x, Term::lam(vec![n()], proc_term(r, 1, k - 1))]),
            _ => Term::op("*", vec![Term::op("@", vec![proc_term(r, 0, k - 1)])]),
        };
        parts.push(part);
    }
    parts.into_iter().reduce(|a, b| Term::op("par", vec![a, b])).unwrap_or(Term::constant("0"))
}

pub fn par_components(t: &Term) -> Vec<Term> {
    match t {
        Term::Op(f, args) if &**f == "par" => args.iter().flat_map(par_components).collect(),
        Term::Op(f, args) if &**f == "0" && args.is_empty() => Vec::new(),
        t => vec![t.clone()],
    }
}

fn rebuild_par(parts: Vec<Term>) -> Term {
    parts.into_iter().reduce(|a, b| Term::op("par", vec![a, b])).unwrap_or(Term::constant("0"))
}

/// Successors of a ρπ process by trying every rule at every parallel split.
/// Rewrites only fire at the top of a parallel composition.
pub fn brute_successors(th: &Theory, t: &Term) -> BTreeSet<Term> {
    let t = canonicalize(th, t);
    let parts = par_components(&t);
    let mut out = BTreeSet::new();
    for i in 0..parts.len() {
        let rest = |skip: &[usize], extra: Term| {
            let mut v: Vec<Term> = (0..parts.len()).filter(|k| !skip.contains(k)).map(|k| parts[k].clone()).collect();
            v.push(extra);
            canonicalize(th, &rebuild_par(v))
        };
        if let Term::Op(f, a) = &parts[i] {
            if &**f == "*" {
                if let Term::Op(g, q) = &a[0] {
                    if &**g == "@" {
                        out.insert(rest(&[i], q[0].clone()));
                    }
                }
            }
            if &**f == "out" {
                for j in 0..parts.len() {
                    if let Term::Op(g, b) = &parts[j] {
                        if j != i && &**g == "in" && b[0] == a[0] {
                            let k = Term::apply(b[1].clone(), vec![Term::op("@", vec![a[1].clone()])]);
                            out.insert(rest(&[i, j], k));
                        }
                    }
                }
            }
        }
    }
    out
}

fn sort_key(t: &Term) -> String {
    format!("{t:?}")
}

/// Normal form under the ρπ equations by flattening, dropping units and sorting,
/// bottom up. With `run` the optional `*(@p) = p` is applied as well.
pub fn ac_normal(t: &Term, run: bool) -> Term {
    match t {
        Term::Op(f, args) => {
            let args: Vec<Term> = args.iter().map(|a| ac_normal(a, run)).collect();
            if &**f == "par" {
                let mut parts: Vec<Term> = args.iter().flat_map(par_components).collect();
                parts.sort_by_key(sort_key);
                return match parts.len() {
                    0 => Term::constant("0"),
                    1 => parts.pop().unwrap(),
                    _ => Term::Op(f.clone(), parts),
                };
            }
            if run && &**f == "*" {
                if let Term::Op(g, q) = &args[0] {
                    if &**g == "@" {
                        return q[0].clone();
                    }
                }
            }
            Term::Op(f.clone(), args)
        }
        Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(ac_normal(b, run))),
        t => t.clone(),
    }
}

/// Applies one randomly chosen equation, in a random direction, at a random position.
pub fn equation_move(r: &mut ChaCha8Rng, t: &Term, run: bool) -> Term {
    let mut positions = Vec::new();
    collect_positions(t, &mut Vec::new(), &mut positions);
    let pos = positions.choose(r).unwrap().clone();
    rewrite_at(t, &pos, &mut |s| eq_variant(r, s, run))
}

fn collect_positions(t: &Term, here: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(here.clone());
    match t {
        Term::Op(_, args) => {
            for (i, a) in args.iter().enumerate() {
                here.push(i);
                collect_positions(a, here, out);
                here.pop();
            }
        }
        Term::Lam(_, b) => {
            here.push(0);
            collect_positions(b, here, out);
            here.pop();
        }
        _ => {}
    }
}

fn rewrite_at(t: &Term, pos: &[usize], f: &mut dyn FnMut(&Term) -> Term) -> Term {
    let Some((&i, rest)) = pos.split_first() else { return f(t) };
    match t {
        Term::Op(g, args) => {
            let mut args = args.clone();
            args[i] = rewrite_at(&args[i], rest, f);
            Term::Op(g.clone(), args)
        }
        Term::Lam(s, b) => Term::Lam(s.clone(), Box::new(rewrite_at(b, rest, f))),
        t => t.clone(),
    }
}

fn is_proc(t: &Term) -> bool {
    match t {
        Term::Op(f, _) => matches!(&**f, "0" | "par" | "*" | "out" | "in"),
        _ => false,
    }
}

fn eq_variant(r: &mut ChaCha8Rng, t: &Term, run: bool) -> Term {
    if !is_proc(t) {
        return t.clone();
    }
    let par = |a: Term, b: Term| Term::op("par", vec![a, b]);
    match (r.gen_range(0..5), t) {
        (0, Term::Op(f, a)) if &**f == "par" && a.len() == 2 => par(a[1].clone(), a[0].clone()),
        (1, Term::Op(f, a)) if &**f == "par" && a.len() == 2 => match &a[0] {
            Term::Op(g, b) if &**g == "par" && b.len() == 2 => par(b[0].clone(), par(b[1].clone(), a[1].clone())),
            _ => match &a[1] {
                Term::Op(g, b) if &**g == "par" && b.len() == 2 => par(par(a[0].clone(), b[0].clone()), b[1].clone()),
                _ => t.clone(),
            },
        },
        (2, Term::Op(f, a)) if &**f == "par" && a.len() == 2 && a[1] == Term::constant("0") => a[0].clone(),
        (3, _) if run => Term::op("*", vec![Term::op("@", vec![t.clone()])]),
        _ => par(t.clone(), Term::constant("0")),
    }
}

/// A random frame on at most `max` nodes; a few nodes are left unexpanded
/// when `partial`.
pub fn random_frame(r: &mut ChaCha8Rng, max: usize, partial: bool) -> Frame {
    let n = r.gen_range(1..=max);
    let density = r.gen_range(0.02..0.2);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if r.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    let expanded = (0..n).map(|_| !partial || r.gen_bool(0.85)).collect::<Vec<_>>();
    // unexpanded nodes have no known successors
    edges.retain(|(a, _)| expanded[*a]);
    Frame::from_edges(n, &edges, expanded)
}

pub fn random_ext(r: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let d = r.gen_range(0.1..0.9);
    (0..n).map(|_| r.gen_bool(d)).collect()
}

fn succs(f: &Frame, v: usize) -> Vec<usize> {
    f.succ[v].iter().map(|(w, _)| *w).collect()
}

/// Nodes at the end of paths of exactly `k` steps from `v`, for k = 0, 1, ..,
/// until the sequence of sets repeats. The boolean marks sets reached only
/// through expanded nodes.
fn exact_reach(f: &Frame, v: usize) -> (Vec<(BTreeSet<usize>, bool)>, usize) {
    let mut seq: Vec<(BTreeSet<usize>, bool)> = Vec::new();
    let mut seen: BTreeMap<(BTreeSet<usize>, bool), usize> = BTreeMap::new();
    let mut cur = (BTreeSet::from([v]), true);
    loop {
        if let Some(&i) = seen.get(&cur) {
            return (seq, i);
        }
        seen.insert(cur.clone(), seq.len());
        seq.push(cur.clone());
        let known = cur.1 && cur.0.iter().all(|&u| f.expanded[u]);
        let next: BTreeSet<usize> = cur.0.iter().flat_map(|&u| succs(f, u)).collect();
        cur = (next, known);
    }
}

fn reachable(f: &Frame, v: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([v]);
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for w in succs(f, u) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

/// Modal values computed directly from the readings over paths.
pub fn modal_oracle(f: &Frame, kind: ModalKind, ext: &[bool]) -> Vec<bool> {
    let n = f.len();
    (0..n)
        .map(|v| match kind {
            ModalKind::BBang => succs(f, v).iter().any(|&w| ext[w]),
            ModalKind::BStar => f.expanded[v] && succs(f, v).iter().all(|&w| ext[w]),
            ModalKind::FBang => (0..n).any(|u| ext[u] && succs(f, u).contains(&v)),
            ModalKind::FStar => (0..n).all(|u| !succs(f, u).contains(&v) || ext[u]),
            ModalKind::BBangO => reachable(f, v).iter().any(|&w| ext[w]),
            ModalKind::BStarB => reachable(f, v).iter().all(|&w| ext[w]),
            // some k with every k-step path known and ending in φ
            ModalKind::BStarO => exact_reach(f, v).0.iter().any(|(s, known)| *known && s.iter().all(|&w| ext[w])),
            // every k has some k-step path ending in φ
            ModalKind::BBangB => exact_reach(f, v).0.iter().all(|(s, _)| s.iter().any(|&w| ext[w])),
        })
        .collect()
}

pub const ALL_KINDS: [ModalKind; 8] = [
    ModalKind::BBang,
    ModalKind::BStar,
    ModalKind::BBangO,
    ModalKind::BBangB,
    ModalKind::BStarO,
    ModalKind::BStarB,
    ModalKind::FBang,
    ModalKind::FStar,
];

/// A random labelled transition system over labels `0..labels`.
pub fn random_lts(r: &mut ChaCha8Rng, max: usize, labels: u8) -> Lts<u8> {
    let n = r.gen_range(1..=max);
    let out_deg = r.gen_range(0.5..3.0);
    let mut trans = Vec::new();
    let expanded: Vec<bool> = (0..n).map(|_| r.gen_bool(0.95)).collect();
    for s in 0..n {
        if !expanded[s] {
            continue;
        }
        let k = (out_deg * r.gen::<f64>() * 2.0) as usize;
        for _ in 0..k {
            // a narrow target range keeps some states behaviourally equal
            let t = r.gen_range(0..n.min(8).max(1)) + if r.gen_bool(0.5) { 0 } else { r.gen_range(0..n) };
            trans.push((s, r.gen_range(0..labels), t.min(n - 1)));
        }
    }
    trans.sort();
    trans.dedup();
    Lts { states: n, trans, expanded }
}

/// Bisimilarity by iterating the two matching clauses from the full relation.
/// Unexpanded states are only related to themselves.
pub fn naive_bisim(lts: &Lts<u8>) -> Vec<Vec<bool>> {
    let n = lts.states;
    let mut succ = vec![Vec::new(); n];
    for (s, l, t) in &lts.trans {
        succ[*s].push((*l, *t));
    }
    let mut r: Vec<Vec<bool>> =
        (0..n).map(|p| (0..n).map(|q| p == q || (lts.expanded[p] && lts.expanded[q])).collect()).collect();
    loop {
        let mut next = r.clone();
        for p in 0..n {
            for q in 0..n {
                if !r[p][q] || p == q {
                    continue;
                }
                let fwd = succ[p].iter().all(|(l, p2)| succ[q].iter().any(|(m, q2)| l == m && r[*p2][*q2]));
                let bwd = succ[q].iter().all(|(l, q2)| succ[p].iter().any(|(m, p2)| l == m && r[*p2][*q2]));
                next[p][q] = fwd && bwd;
            }
        }
        if next == r {
            return r;
        }
        r = next;
    }
}

pub mod suites {
    use std::collections::BTreeSet;
    use std::sync::Arc;

    use ntt_core::predicate::{Env, EvalParams, Pred};
    use ntt_core::universe::UniverseParams;
    use ntt_core::{name, Sort, Term, Theory};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub const CONSTRUCTORS: [&str; 5] = ["out", "in", "@", "*", "par"];

    pub fn env(th: &Theory, depth: usize) -> Env<'_> {
        let params = EvalParams { universe: UniverseParams { depth, fresh_names: 2, ..Default::default() }, ..Default::default() };
        Env::new(th, params, &[])
    }

    /// Result terms of `f` in the universe, and every argument tuple mapping into them.
    pub fn carriers(env: &Env, f: &str) -> (Vec<Term>, Vec<Term>) {
        let d = env.th.op(f).unwrap();
        let res = env.universe.terms(&d.result).unwrap();
        let mut args = BTreeSet::new();
        for t in res.iter() {
            for a in env.preimages(&name(f), d.args.len(), t).unwrap().iter() {
                args.insert(Term::tuple_of(a.clone()));
            }
        }
        (res.to_vec(), args.into_iter().collect())
    }

    fn subset(r: &mut ChaCha8Rng, xs: &[Term]) -> BTreeSet<Term> {
        let d = r.gen_range(0.05..0.6);
        xs.iter().filter(|_| r.gen_bool(d)).cloned().collect()
    }

    fn ext(s: &BTreeSet<Term>) -> Pred {
        Pred::Ext(Arc::new(s.clone()))
    }

    fn image_of(env: &Env, f: &str, a: &Term) -> Term {
        let args = match a {
            Term::Tuple(xs) => xs.clone(),
            a => vec![a.clone()],
        };
        env.canon(&Term::op(f, args))
    }

    /// One random pair for both adjunctions along `f`: returns the truth of
    /// the four sides `(∃φ ≤ ψ, φ ≤ ψ[f], ψ[f] ≤ φ, ψ ≤ ∀φ)`.
    pub fn galois_case(env: &Env, f: &str, res: &[Term], args: &[Term], r: &mut ChaCha8Rng) -> [bool; 4] {
        let mut phi = subset(r, args);
        let mut psi = subset(r, res);
        // bias towards pairs where the inclusions can hold
        match r.gen_range(0..3) {
            0 => psi.extend(phi.iter().map(|a| image_of(env, f, a))),
            1 => phi.extend(args.iter().filter(|a| psi.contains(&image_of(env, f, a))).cloned()),
            _ => {}
        }
        let (p, q) = (ext(&phi), ext(&psi));
        let exists = Pred::Image(name(f), vec![p.clone()]);
        let forall = Pred::Secure(name(f), vec![p.clone()]);
        let pulled = Pred::Subst(Box::new(q.clone()), name(f));
        let ev = |x: &Pred, t: &Term| env.eval(x, t).unwrap();
        [
            res.iter().all(|t| !ev(&exists, t) || psi.contains(t)),
            args.iter().all(|a| !phi.contains(a) || ev(&pulled, a)),
            args.iter().all(|a| !ev(&pulled, a) || phi.contains(a)),
            res.iter().all(|t| !psi.contains(t) || ev(&forall, t)),
        ]
    }

    /// Runs `cases` random adjunction checks spread over the constructors.
    /// Returns the number of cases where some side held, or the first failure.
    pub fn adjunctions(th: &Theory, cases: usize, r: &mut ChaCha8Rng) -> Result<usize, String> {
        let env = env(th, 2);
        let mut nontrivial = 0;
        for (i, f) in CONSTRUCTORS.iter().cycle().take(cases).enumerate() {
            let (res, args) = carriers(&env, f);
            let [a, b, c, d] = galois_case(&env, f, &res, &args, r);
            if a != b || c != d {
                return Err(format!("case {i} along {f}: {:?}", [a, b, c, d]));
            }
            nontrivial += usize::from(a || c);
        }
        Ok(nontrivial)
    }

    /// Pulling back along `f` commutes with finite meets and joins, and the
    /// image and secure image preserve joins and meets.
    pub fn substitution_laws(th: &Theory, cases: usize, r: &mut ChaCha8Rng) -> Result<(), String> {
        let env = env(th, 2);
        for (i, f) in CONSTRUCTORS.iter().cycle().take(cases).enumerate() {
            let (res, args) = carriers(&env, f);
            let (a, b) = (ext(&subset(r, &res)), ext(&subset(r, &res)));
            let sub = |x: Pred| Pred::Subst(Box::new(x), name(f));
            let laws = [
                (sub(Pred::and(a.clone(), b.clone())), Pred::and(sub(a.clone()), sub(b.clone()))),
                (sub(Pred::or(a.clone(), b.clone())), Pred::or(sub(a.clone()), sub(b.clone()))),
            ];
            for (l, rhs) in &laws {
                for x in &args {
                    if env.eval(l, x).unwrap() != env.eval(rhs, x).unwrap() {
                        return Err(format!("case {i} along {f} at {x:?}"));
                    }
                }
            }
            let (c, d) = (ext(&subset(r, &args)), ext(&subset(r, &args)));
            let img = |x: Pred| Pred::Image(name(f), vec![x]);
            let sec = |x: Pred| Pred::Secure(name(f), vec![x]);
            let laws = [
                (img(Pred::or(c.clone(), d.clone())), Pred::or(img(c.clone()), img(d.clone()))),
                (sec(Pred::and(c.clone(), d.clone())), Pred::and(sec(c.clone()), sec(d.clone()))),
            ];
            for (l, rhs) in &laws {
                for t in &res {
                    if env.eval(l, t).unwrap() != env.eval(rhs, t).unwrap() {
                        return Err(format!("case {i} along {f} at {t:?}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn universe_size(env: &Env, s: &Sort) -> usize {
        env.universe.terms(s).unwrap().len()
    }
}

/// Checks every modality against the path oracle, and the duality
/// B!o(φ) = ¬B*b(¬φ), on `graphs` random frames.
pub fn modal_suite(graphs: usize, r: &mut ChaCha8Rng) -> Result<(), String> {
    use ntt_core::behavior::modal_values;
    for g in 0..graphs {
        let f = random_frame(r, 30, g % 2 == 1);
        let ext = random_ext(r, f.len());
        for kind in ALL_KINDS {
            let got = modal_values(&f, kind, &ext);
            if got != modal_oracle(&f, kind, &ext) {
                return Err(format!("graph {g}, {kind:?}"));
            }
        }
        let not: Vec<bool> = ext.iter().map(|b| !b).collect();
        let dual: Vec<bool> = modal_values(&f, ModalKind::BStarB, &not).into_iter().map(|b| !b).collect();
        if modal_values(&f, ModalKind::BBangO, &ext) != dual {
            return Err(format!("graph {g}: duality"));
        }
    }
    Ok(())
}

/// Partition refinement against the naive iteration on `count` random systems.
pub fn bisim_suite(count: usize, r: &mut ChaCha8Rng) -> Result<usize, String> {
    use ntt_core::bisim::{bisimilarity, nu_iteration};
    let mut merged = 0;
    for i in 0..count {
        let lts = random_lts(r, 200, 3);
        let fast = bisimilarity(&lts);
        if fast != naive_bisim(&lts) {
            return Err(format!("system {i} with {} states", lts.states));
        }
        if fast != nu_iteration(&lts) {
            return Err(format!("system {i}: library iteration"));
        }
        merged += (0..lts.states).filter(|&p| (0..p).any(|q| fast[p][q])).count();
    }
    Ok(merged)
}
