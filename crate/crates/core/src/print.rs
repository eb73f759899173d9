//! Surface printing of terms. Output re-parses to the same term.

use std::collections::BTreeSet;

use crate::term::Term;
use crate::theory::{Fixity, Theory};

const BINDER_NAMES: [&str; 6] = ["x", "y", "z", "w", "v", "u"];

struct Printer<'a> {
    th: &'a Theory,
    taken: BTreeSet<String>,
    scope: Vec<String>,
}

impl<'a> Printer<'a> {
    fn fresh(&self) -> String {
        let ok = |s: &str| !self.taken.contains(s) && !self.scope.iter().any(|b| b == s);
        for b in BINDER_NAMES {
            if ok(b) {
                return b.to_string();
            }
        }
        (1..)
            .flat_map(|i| BINDER_NAMES.iter().map(move |b| format!("{b}{i}")))
            .find(|s| ok(s))
            .unwrap()
    }

    fn is_atomic(&self, t: &Term) -> bool {
        match t {
            Term::Bound(_) | Term::Free(..) | Term::Meta(..) => true,
            Term::Op(_, a) => a.is_empty(),
            _ => false,
        }
    }

    fn is_infix(&self, t: &Term) -> bool {
        match t {
            Term::Op(f, a) => a.len() >= 2 && matches!(self.th.op(f).map(|d| &d.fixity), Some(Fixity::Infix(_))),
            _ => false,
        }
    }

    fn term(&mut self, t: &Term, annotate: bool, out: &mut String) {
        match t {
            Term::Bound(i) => {
                let i = *i as usize;
                if i < self.scope.len() {
                    out.push_str(&self.scope[self.scope.len() - 1 - i]);
                } else {
                    out.push_str(&format!("#{i}"));
                }
            }
            Term::Free(n, _) => out.push_str(n),
            Term::Meta(n, _) => {
                out.push_str(n);
                out.push('?');
            }
            Term::Lam(sorts, body) => {
                out.push('\\');
                for (j, s) in sorts.iter().enumerate() {
                    let x = self.fresh();
                    if j > 0 {
                        out.push(' ');
                    }
                    out.push_str(&x);
                    if annotate {
                        out.push(':');
                        out.push_str(&s.to_string());
                    }
                    self.scope.push(x);
                }
                out.push_str(". ");
                let chained = annotate && matches!(**body, Term::Lam(..));
                self.term(body, chained, out);
                self.scope.truncate(self.scope.len() - sorts.len());
            }
            Term::Apply(h, args) => {
                if self.is_atomic(h) || matches!(**h, Term::Apply(..)) {
                    self.term(h, false, out);
                } else {
                    self.paren(h, out);
                }
                self.args(args, out);
            }
            Term::Tuple(ts) => self.args(ts, out),
            Term::Op(f, args) => {
                let fixity = self.th.op(f).map(|d| d.fixity.clone()).unwrap_or(Fixity::Plain);
                match fixity {
                    Fixity::Infix(sym) if args.len() >= 2 => {
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                out.push_str(&format!(" {sym} "));
                            }
                            if matches!(a, Term::Lam(..)) || (i > 0 && self.is_infix(a)) {
                                self.paren(a, out);
                            } else {
                                self.term(a, false, out);
                            }
                        }
                    }
                    Fixity::Prefix if args.len() == 1 => {
                        out.push_str(f);
                        if self.is_atomic(&args[0]) {
                            let before = out.len();
                            self.term(&args[0], false, out);
                            // keep `@0` readable but never glue two symbols into one token
                            if out[before..].starts_with(|c: char| !c.is_alphanumeric() && c != '_') {
                                let arg = out.split_off(before);
                                out.push('(');
                                out.push_str(&arg);
                                out.push(')');
                            }
                        } else {
                            self.paren(&args[0], out);
                        }
                    }
                    _ => {
                        out.push_str(f);
                        if !args.is_empty() {
                            self.args(args, out);
                        }
                    }
                }
            }
        }
    }

    fn paren(&mut self, t: &Term, out: &mut String) {
        out.push('(');
        self.term(t, false, out);
        out.push(')');
    }

    fn args(&mut self, args: &[Term], out: &mut String) {
        out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            self.term(a, false, out);
        }
        out.push(')');
    }
}

fn printer<'a>(th: &'a Theory, t: &Term) -> Printer<'a> {
    let mut taken: BTreeSet<String> = t.free_names().iter().map(|n| n.to_string()).collect();
    let mut ms = Default::default();
    t.metas(&mut ms);
    taken.extend(ms.keys().map(|n| n.to_string()));
    taken.extend(th.ops.iter().map(|o| o.name.to_string()));
    taken.extend(th.macros.iter().map(|m| m.name.clone()));
    Printer { th, taken, scope: Vec::new() }
}

/// Prints a term; a top-level abstraction gets binder annotations so it re-parses
/// without an expected sort.
pub fn print_term(th: &Theory, t: &Term) -> String {
    let mut out = String::new();
    printer(th, t).term(t, true, &mut out);
    out
}

/// Prints a term whose sort will be supplied when re-parsing.
pub fn print_term_bare(th: &Theory, t: &Term) -> String {
    let mut out = String::new();
    printer(th, t).term(t, false, &mut out);
    out
}
