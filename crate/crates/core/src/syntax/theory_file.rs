//! Line-oriented theory format.
//!
//! ```text
//! theory rho-pi
//! sort P
//! sort N names
//! op out : N, P -> P
//! op par : P, P -> P [infix |]
//! eq par_comm : p | q = q | p
//! rule comm(n:N, q:P, k:[N->P]) : out(n,q) | in(n,k) ~> k(@q) [congruence: par.0, par.1]
//! flag run_eq off
//! macro c(n:N) = in(n, \x. out(n, *x) | *x)
//! def safe(a) = B*b(!{in(!a, [N->P]) | P})
//! ```
//!
//! Indented lines continue the previous declaration.

use crate::error::{Error, Result};
use crate::sort::{name, Name, Sort};
use crate::syntax::elab::{Elab, Scope};
use crate::syntax::lexer::{Cursor, Tok};
use crate::syntax::raw::{parse_sort, parse_term, Raw};
use crate::theory::{Diagnostic, Equation, Fixity, Macro, OpDecl, PredDef, Rule, SortDecl, Theory};

/// A declaration with its starting line and source text.
#[derive(Clone, Debug)]
pub struct Decl {
    pub line: usize,
    pub text: String,
}

pub fn split_decls(src: &str) -> Vec<Decl> {
    let mut out: Vec<Decl> = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let stripped = strip_comment(line);
        if stripped.trim().is_empty() {
            continue;
        }
        if line.starts_with(char::is_whitespace) && !out.is_empty() {
            let last = out.last_mut().unwrap();
            last.text.push(' ');
            last.text.push_str(stripped.trim());
        } else {
            out.push(Decl { line: i + 1, text: stripped.trim().to_string() });
        }
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Reads a possibly hyphenated or dotted identifier such as `rho-pi` or `sole.in`.
pub fn compound_ident(c: &mut Cursor, seps: &[&str]) -> Result<String> {
    let mut s = c.ident()?;
    loop {
        let sep = seps.iter().find(|sep| c.is_sym(sep) && c.adjacent(0) && c.adjacent(1)).copied();
        match (sep, c.peek_at(1).clone()) {
            (Some(sep), Tok::Ident(next)) => {
                c.next();
                c.next();
                s.push_str(sep);
                s.push_str(&next);
            }
            _ => return Ok(s),
        }
    }
}

fn op_name(c: &mut Cursor) -> Result<String> {
    match c.peek().clone() {
        Tok::Ident(s) => {
            c.next();
            Ok(s)
        }
        Tok::Sym(s) if !matches!(s, "(" | ")" | ":" | "=") => {
            c.next();
            Ok(s.to_string())
        }
        _ => Err(c.error(format!("expected a name, found {}", c.describe()))),
    }
}

/// `(x:S, y:T)`; returns an empty list when no parenthesis follows.
fn params(c: &mut Cursor) -> Result<Vec<(Name, Sort)>> {
    let mut out = Vec::new();
    if !c.eat_sym("(") {
        return Ok(out);
    }
    if c.eat_sym(")") {
        return Ok(out);
    }
    loop {
        let x = c.ident()?;
        c.expect_sym(":")?;
        out.push((name(&x), parse_sort(c)?));
        if c.eat_sym(")") {
            return Ok(out);
        }
        c.expect_sym(",")?;
    }
}

fn err_at(d: &Decl, e: Error) -> Diagnostic {
    Diagnostic { location: format!("line {}", d.line), reason: e.to_string() }
}

/// Parses a theory. Declaration-level problems are collected as diagnostics
/// on the result; only lexical failures are errors.
pub fn parse_theory(src: &str) -> Result<Theory> {
    let decls = split_decls(src);
    let mut th = Theory::new("anonymous");
    let mut later = Vec::new();
    for d in &decls {
        let mut c = Cursor::new(&d.text)?;
        let kw = c.ident().map_err(|e| Error::parse(d.line, e.to_string()))?;
        let res: Result<()> = (|| match kw.as_str() {
            "theory" => {
                th.name = compound_ident(&mut c, &["-", "."])?;
                c.expect_eof()
            }
            "sort" => {
                let n = c.ident()?;
                let names = c.eat_ident("names");
                c.expect_eof()?;
                th.sorts.push(SortDecl { name: name(&n), names });
                Ok(())
            }
            "op" => {
                let n = op_name(&mut c)?;
                c.expect_sym(":")?;
                let mut args = Vec::new();
                let result;
                if c.eat_sym("->") {
                    result = parse_sort(&mut c)?;
                } else {
                    let first = parse_sort(&mut c)?;
                    if c.is_sym(",") || c.is_sym("->") {
                        args.push(first);
                        while c.eat_sym(",") {
                            args.push(parse_sort(&mut c)?);
                        }
                        c.expect_sym("->")?;
                        result = parse_sort(&mut c)?;
                    } else {
                        result = first;
                    }
                }
                let mut fixity = Fixity::Plain;
                if c.eat_sym("[") {
                    if c.eat_ident("infix") {
                        fixity = Fixity::Infix(op_name(&mut c)?);
                    } else if c.eat_ident("prefix") {
                        fixity = Fixity::Prefix;
                    } else {
                        return Err(c.error("expected `infix` or `prefix`"));
                    }
                    c.expect_sym("]")?;
                }
                c.expect_eof()?;
                th.ops.push(OpDecl { name: name(&n), args, result, fixity });
                Ok(())
            }
            "flag" => {
                let n = c.ident()?;
                let on = if c.eat_ident("on") {
                    true
                } else if c.eat_ident("off") {
                    false
                } else {
                    return Err(c.error("expected `on` or `off`"));
                };
                c.expect_eof()?;
                th.flags.insert(name(&n), on);
                Ok(())
            }
            "def" => {
                let n = compound_ident(&mut c, &["."])?;
                let mut ps = Vec::new();
                if c.eat_sym("(") && !c.eat_sym(")") {
                    loop {
                        ps.push(c.ident()?);
                        if c.eat_sym(")") {
                            break;
                        }
                        c.expect_sym(",")?;
                    }
                }
                c.expect_sym("=")?;
                let body = d.text[c.offset()..].trim().to_string();
                th.defs.push(PredDef { name: n, params: ps, body });
                Ok(())
            }
            "eq" | "rule" | "macro" => {
                later.push((d.clone(), kw.clone()));
                Ok(())
            }
            "map" | "morphism" | "source" | "target" => Ok(()),
            other => Err(c.error(format!("unknown declaration `{other}`"))),
        })();
        if let Err(e) = res {
            th.build_diagnostics.push(err_at(d, e));
        }
    }
    for (d, kw) in later {
        let res = match kw.as_str() {
            "eq" => parse_eq(&th, &d.text).map(|e| th.equations.push(e)),
            "rule" => parse_rule(&th, &d.text).map(|r| th.rules.push(r)),
            _ => parse_macro(&th, &d.text).map(|m| th.macros.push(m)),
        };
        if let Err(e) = res {
            th.build_diagnostics.push(err_at(&d, e));
        }
    }
    th.refresh();
    Ok(th)
}

fn parse_eq(th: &Theory, text: &str) -> Result<Equation> {
    let mut c = Cursor::new(text)?;
    c.ident()?;
    let n = c.ident()?;
    let ps = params(&mut c)?;
    c.expect_sym(":")?;
    let nt = th.notation();
    let l = parse_term(&mut c, &nt)?;
    c.expect_sym("=")?;
    let r = parse_term(&mut c, &nt)?;
    c.expect_eof()?;
    let mut scope = Scope::patterns();
    scope.metas = ps.iter().map(|(x, s)| (x.to_string(), s.clone())).collect();
    let mut e = Elab::new(th, scope);
    let (lt, ls) = elab_either(&mut e, &l, &r)?;
    let (rt, _) = e.term(&r, Some(&ls))?;
    let lt = match lt {
        Some(t) => t,
        None => e.term(&l, Some(&ls))?.0,
    };
    let vars = e.scope.metas.iter().map(|(x, s)| (name(x), s.clone())).collect();
    Ok(Equation { name: name(&n), vars, lhs: lt, rhs: rt })
}

/// Elaborates whichever side has a synthesizable sort first (e.g. `p = p | 0`).
fn elab_either(e: &mut Elab, l: &Raw, r: &Raw) -> Result<(Option<crate::term::Term>, Sort)> {
    match e.term(l, None) {
        Ok((t, s)) => Ok((Some(t), s)),
        Err(first) => match e.term(r, None) {
            Ok((_, s)) => Ok((None, s)),
            Err(_) => Err(first),
        },
    }
}

fn parse_rule(th: &Theory, text: &str) -> Result<Rule> {
    let mut c = Cursor::new(text)?;
    c.ident()?;
    let n = c.ident()?;
    let ps = params(&mut c)?;
    c.expect_sym(":")?;
    let nt = th.notation();
    let src = parse_term(&mut c, &nt)?;
    c.expect_sym("~>")?;
    let tgt = parse_term(&mut c, &nt)?;
    let mut congruence = Vec::new();
    if c.eat_sym("[") {
        if !c.eat_ident("congruence") {
            return Err(c.error("expected `congruence`"));
        }
        c.expect_sym(":")?;
        loop {
            let op = op_name(&mut c)?;
            c.expect_sym(".")?;
            let i = c.ident()?;
            let i: usize = i.parse().map_err(|_| c.error(format!("bad argument index `{i}`")))?;
            congruence.push((name(&op), i));
            if !c.eat_sym(",") {
                break;
            }
        }
        c.expect_sym("]")?;
    }
    c.expect_eof()?;
    let mut scope = Scope::patterns();
    scope.metas = ps.iter().map(|(x, s)| (x.to_string(), s.clone())).collect();
    let mut e = Elab::new(th, scope);
    let (s, sort) = e.term(&src, None)?;
    // Unknown names in the target become fresh pattern variables so that
    // validation can report them instead of failing to parse.
    let (t, _) = e.term(&tgt, Some(&sort))?;
    Ok(Rule { name: name(&n), params: ps, source: s, target: t, congruence, guard: None })
}

fn parse_macro(th: &Theory, text: &str) -> Result<Macro> {
    let mut c = Cursor::new(text)?;
    c.ident()?;
    let n = op_name(&mut c)?;
    let mut groups = Vec::new();
    while c.is_sym("(") {
        groups.push(params(&mut c)?);
    }
    c.expect_sym("=")?;
    let mut nt = th.notation();
    let raw = parse_term(&mut c, &nt)?;
    c.expect_eof()?;
    let mut scope = Scope::terms();
    scope.metas = groups.iter().flatten().map(|(x, s)| (x.to_string(), s.clone())).collect();
    let mut e = Elab::new(th, scope);
    let (body, sort) = e.term(&raw, None)?;
    nt.symbol_macros.insert(n.clone());
    Ok(Macro { name: n, params: groups, body, sort })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::validate_theory;

    const MINI: &str = "theory mini\nsort P\nop 0 : -> P\nop par : P, P -> P [infix |]\n";

    #[test]
    fn duplicate_sort_is_reported() {
        let th = parse_theory(&format!("{MINI}sort P\n")).unwrap();
        let d = validate_theory(&th);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].reason, "duplicate name");
    }

    #[test]
    fn unbound_pattern_variable_in_rule_target() {
        let th = parse_theory(&format!("{MINI}rule r(p:P) : p | 0 ~> q\n")).unwrap();
        let d = validate_theory(&th);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].reason.contains("unbound pattern variable"));
    }

    #[test]
    fn continuation_lines() {
        let th = parse_theory(&format!("{MINI}eq u : p | 0\n   = p\n")).unwrap();
        assert!(validate_theory(&th).is_empty());
        assert_eq!(th.equations.len(), 1);
    }
}
