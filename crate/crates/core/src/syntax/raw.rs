//! Surface syntax of terms and sorts, parsed into an untyped tree that the
//! elaborator resolves against a theory.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::sort::{name, Sort};
use crate::syntax::lexer::{Cursor, Tok};

#[derive(Clone, Debug, PartialEq)]
pub enum Raw {
    Ident(String, usize),
    PatVar(String),
    Hole,
    /// Symbol used as a call head, e.g. the `!` macro in `!(p)(n)`.
    Sym(String),
    Call(Box<Raw>, Vec<Raw>),
    Prefix(String, Box<Raw>),
    Infix(String, Box<Raw>, Box<Raw>),
    Lam(Vec<(String, Option<Sort>)>, Box<Raw>),
}

/// Operator notation the parser needs to know about.
#[derive(Clone, Debug, Default)]
pub struct Notation {
    pub infix: Vec<String>,
    pub prefix: Vec<String>,
    pub symbol_macros: BTreeSet<String>,
}

impl Notation {
    pub fn is_infix(&self, s: &str) -> bool {
        self.infix.iter().any(|x| x == s)
    }
    pub fn is_prefix(&self, s: &str) -> bool {
        self.prefix.iter().any(|x| x == s)
    }
}

pub fn parse_sort(c: &mut Cursor) -> Result<Sort> {
    if c.eat_sym("[") {
        let mut dom = vec![parse_sort(c)?];
        while c.eat_sym(",") {
            dom.push(parse_sort(c)?);
        }
        c.expect_sym("->")?;
        let cod = parse_sort(c)?;
        c.expect_sym("]")?;
        Ok(Sort::func(dom, cod))
    } else if c.eat_sym("(") {
        let mut ss = vec![parse_sort(c)?];
        while c.eat_sym(",") {
            ss.push(parse_sort(c)?);
        }
        c.expect_sym(")")?;
        Ok(Sort::tuple_of(ss))
    } else {
        Ok(Sort::Base(name(&c.ident()?)))
    }
}

pub fn parse_sort_str(src: &str) -> Result<Sort> {
    let mut c = Cursor::new(src)?;
    let s = parse_sort(&mut c)?;
    c.expect_eof()?;
    Ok(s)
}

pub fn parse_term(c: &mut Cursor, nt: &Notation) -> Result<Raw> {
    if c.is_sym("\\") {
        return parse_lam(c, nt);
    }
    let mut lhs = parse_prefix(c, nt)?;
    loop {
        let sym = match c.peek() {
            Tok::Sym(s) if nt.is_infix(s) => s.to_string(),
            _ => break,
        };
        c.next();
        let rhs = if c.is_sym("\\") { parse_lam(c, nt)? } else { parse_prefix(c, nt)? };
        lhs = Raw::Infix(sym, Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_lam(c: &mut Cursor, nt: &Notation) -> Result<Raw> {
    c.expect_sym("\\")?;
    let mut binders = Vec::new();
    loop {
        let x = c.ident()?;
        let ann = if c.eat_sym(":") { Some(parse_sort(c)?) } else { None };
        binders.push((x, ann));
        c.eat_sym(",");
        if c.is_sym(".") {
            break;
        }
    }
    c.expect_sym(".")?;
    let body = parse_term(c, nt)?;
    Ok(Raw::Lam(binders, Box::new(body)))
}

fn parse_prefix(c: &mut Cursor, nt: &Notation) -> Result<Raw> {
    if let Tok::Sym(s) = c.peek().clone() {
        if nt.symbol_macros.contains(s) {
            c.next();
            return parse_calls(c, nt, Raw::Sym(s.to_string()));
        }
        if nt.is_prefix(s) {
            c.next();
            let arg = parse_prefix(c, nt)?;
            return Ok(Raw::Prefix(s.to_string(), Box::new(arg)));
        }
    }
    let atom = parse_atom(c, nt)?;
    parse_calls(c, nt, atom)
}

fn parse_calls(c: &mut Cursor, nt: &Notation, mut head: Raw) -> Result<Raw> {
    while c.is_sym("(") && c.adjacent(0) {
        c.next();
        let mut args = Vec::new();
        if !c.is_sym(")") {
            args.push(parse_term(c, nt)?);
            while c.eat_sym(",") || c.eat_sym(";") {
                args.push(parse_term(c, nt)?);
            }
        }
        c.expect_sym(")")?;
        head = Raw::Call(Box::new(head), args);
    }
    Ok(head)
}

fn parse_atom(c: &mut Cursor, nt: &Notation) -> Result<Raw> {
    let off = c.offset();
    match c.peek().clone() {
        Tok::Ident(s) => {
            c.next();
            if s == "_" {
                return Ok(Raw::Hole);
            }
            if c.is_sym("?") && c.adjacent(0) {
                c.next();
                return Ok(Raw::PatVar(s));
            }
            Ok(Raw::Ident(s, off))
        }
        Tok::Sym("-") => {
            c.next();
            Ok(Raw::Hole)
        }
        Tok::Sym("(") => {
            c.next();
            let t = parse_term(c, nt)?;
            c.expect_sym(")")?;
            Ok(t)
        }
        Tok::Sym(s) if nt.is_prefix(s) || nt.is_infix(s) => {
            // operator used in call position, e.g. `@(0)` or `|(a, b)`
            c.next();
            if c.is_sym("(") {
                Ok(Raw::Sym(s.to_string()))
            } else {
                Err(c.error(format!("operator `{s}` needs arguments")))
            }
        }
        _ => Err(c.error(format!("expected a term, found {}", c.describe()))),
    }
}

pub fn parse_term_str(src: &str, nt: &Notation) -> Result<Raw> {
    let mut c = Cursor::new(src)?;
    let t = parse_term(&mut c, nt)?;
    c.expect_eof()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rho() -> Notation {
        Notation {
            infix: vec!["|".into()],
            prefix: vec!["@".into(), "*".into()],
            symbol_macros: ["!".to_string()].into_iter().collect(),
        }
    }

    #[test]
    fn infix_is_left_assoc() {
        let r = parse_term_str("a | b | c", &rho()).unwrap();
        match r {
            Raw::Infix(_, l, _) => assert!(matches!(*l, Raw::Infix(..))),
            _ => panic!("expected infix"),
        }
    }

    #[test]
    fn macro_call_chain() {
        let r = parse_term_str("!(0)(n)", &rho()).unwrap();
        assert!(matches!(r, Raw::Call(ref h, _) if matches!(**h, Raw::Call(..))));
    }

    #[test]
    fn lambda_and_patvars() {
        let r = parse_term_str("in(n?, \\x y. *x | -)", &rho()).unwrap();
        if let Raw::Call(_, args) = r {
            assert_eq!(args[0], Raw::PatVar("n".into()));
            assert!(matches!(args[1], Raw::Lam(ref bs, _) if bs.len() == 2));
        } else {
            panic!()
        }
    }

    #[test]
    fn sorts() {
        assert_eq!(parse_sort_str("[N, N -> P]").unwrap().to_string(), "[N, N -> P]");
        assert_eq!(parse_sort_str("[N -> [N -> P]]").unwrap().to_string(), "[N -> [N -> P]]");
    }
}
