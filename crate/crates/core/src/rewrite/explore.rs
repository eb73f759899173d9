//! Bounded breadth-first exploration of the rewrite graph.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rewrite::canon::Canon;
use crate::rewrite::step::{RewriteStep, Stepper};
use crate::term::Term;
use crate::theory::Theory;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub step: RewriteStep,
}

/// Nodes are canonical forms; node 0 is the root.
#[derive(Clone, Debug)]
pub struct RewriteGraph {
    pub nodes: Vec<Term>,
    pub edges: Vec<Edge>,
    /// Were all successors of the node computed?
    pub expanded: Vec<bool>,
    /// BFS distance from the root.
    pub level: Vec<usize>,
    pub depth_bound: usize,
    pub cap: usize,
    pub cap_hit: bool,
    index: HashMap<Term, usize>,
}

impl RewriteGraph {
    pub fn root(&self) -> &Term {
        &self.nodes[0]
    }

    pub fn node_index(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// True when every node was expanded: the graph is the full reachable set.
    pub fn exhausted(&self) -> bool {
        self.expanded.iter().all(|e| *e)
    }

    /// Successor lists, without duplicates.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if !succ[e.from].contains(&e.to) {
                succ[e.from].push(e.to);
            }
        }
        succ
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == v)
    }

    /// Shortest path of steps from the root to node `v`.
    pub fn path_to(&self, v: usize) -> Option<Vec<&RewriteStep>> {
        let mut back: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = std::collections::VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            if u == v {
                let mut path = Vec::new();
                let mut x = v;
                while let Some(ei) = back[x] {
                    path.push(&self.edges[ei].step);
                    x = self.edges[ei].from;
                }
                path.reverse();
                return Some(path);
            }
            for (ei, e) in self.edges.iter().enumerate() {
                if e.from == u && !seen[e.to] {
                    seen[e.to] = true;
                    back[e.to] = Some(ei);
                    queue.push_back(e.to);
                }
            }
        }
        None
    }
}

const CHUNK: usize = 64;

/// Explores from `root` up to `depth` steps, stopping once `cap` nodes exist.
pub fn explore(th: &Theory, root: &Term, depth: usize, cap: usize) -> RewriteGraph {
    let root = Canon::new(th).canon(root);
    let mut g = RewriteGraph {
        nodes: vec![root.clone()],
        edges: Vec::new(),
        expanded: vec![false],
        level: vec![0],
        depth_bound: depth,
        cap,
        cap_hit: false,
        index: HashMap::from([(root, 0)]),
    };
    let mut layer = vec![0usize];
    for d in 0..depth {
        if layer.is_empty() {
            break;
        }
        let mut next = Vec::new();
        'layer: for chunk in layer.chunks(CHUNK) {
            let results: Vec<Vec<RewriteStep>> = chunk
                .par_iter()
                .map(|&v| {
                    let c = Canon::new(th);
                    Stepper::new(&c).steps(&g.nodes[v])
                })
                .collect();
            for (&v, steps) in chunk.iter().zip(results) {
                for s in steps {
                    let to = match g.index.get(&s.target) {
                        Some(&i) => i,
                        None => {
                            if g.nodes.len() >= cap {
                                g.cap_hit = true;
                                break 'layer;
                            }
                            let i = g.nodes.len();
                            g.nodes.push(s.target.clone());
                            g.expanded.push(false);
                            g.level.push(d + 1);
                            g.index.insert(s.target.clone(), i);
                            next.push(i);
                            i
                        }
                    };
                    g.edges.push(Edge { from: v, to, step: s });
                }
                g.expanded[v] = true;
            }
        }
        if g.cap_hit {
            break;
        }
        layer = next;
    }
    // unexpanded nodes without any step are dead ends, hence complete
    let pending: Vec<usize> = (0..g.nodes.len()).filter(|&v| !g.expanded[v]).collect();
    let dead: Vec<bool> = pending.par_iter().map(|&v| {
        let c = Canon::new(th);
        Stepper::new(&c).steps(&g.nodes[v]).is_empty()
    }).collect();
    for (v, dead) in pending.into_iter().zip(dead) {
        if dead {
            g.expanded[v] = true;
        }
    }
    g
}

/// A composed sequence of basic steps between two nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub source: Term,
    pub target: Term,
    pub steps: Vec<RewriteStep>,
}

impl Trace {
    pub fn identity(t: Term) -> Trace {
        Trace { source: t.clone(), target: t, steps: vec![] }
    }

    /// `self ; other`.
    pub fn then(&self, other: &Trace) -> Result<Trace> {
        if self.target != other.source {
            return Err(Error::NonComposable("trace endpoints differ".into()));
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Ok(Trace { source: self.source.clone(), target: other.target.clone(), steps })
    }
}

/// Composes consecutive steps; an empty list needs the node to start from.
pub fn compose_trace(at: Option<&Term>, steps: &[RewriteStep]) -> Result<Trace> {
    let Some(first) = steps.first() else {
        return at
            .map(|t| Trace::identity(t.clone()))
            .ok_or_else(|| Error::NonComposable("empty trace without a node".into()));
    };
    if let Some(t) = at {
        if *t != first.source {
            return Err(Error::NonComposable("trace does not start at the given node".into()));
        }
    }
    for w in steps.windows(2) {
        if w[0].target != w[1].source {
            return Err(Error::NonComposable(format!("step `{}` ends where `{}` does not start", w[0].rule, w[1].rule)));
        }
    }
    Ok(Trace { source: first.source.clone(), target: steps.last().unwrap().target.clone(), steps: steps.to_vec() })
}
