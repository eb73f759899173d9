use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

const MULTI: [&str; 4] = ["->", "~>", "=>", "|>"];
const SINGLE: [&str; 22] = [
    "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "\\", "|", "&", "!", "@", "*", "+", "=", "<", ">", "?", "-",
];

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = it.peek() {
                if c == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        if c == 'λ' {
            it.next();
            out.push(Token { tok: Tok::Sym("\\"), start: i, end: i + c.len_utf8() });
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut end = i;
            let mut s = String::new();
            while let Some(&(j, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' || d == '\'' {
                    s.push(d);
                    end = j + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), start: i, end });
            continue;
        }
        let rest = &src[i..];
        if let Some(m) = MULTI.iter().find(|m| rest.starts_with(**m)) {
            for _ in 0..m.len() {
                it.next();
            }
            out.push(Token { tok: Tok::Sym(m), start: i, end: i + m.len() });
            continue;
        }
        if let Some(s) = SINGLE.iter().find(|s| rest.starts_with(**s)) {
            it.next();
            out.push(Token { tok: Tok::Sym(s), start: i, end: i + 1 });
            continue;
        }
        return Err(Error::parse(i, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, start: src.len(), end: src.len() });
    Ok(out)
}

/// Cursor over a token stream shared by the term, sort and predicate parsers.
#[derive(Clone)]
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor> {
        Ok(Cursor { toks: lex(src)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    /// True when token `k` ahead starts exactly where token `k-1` ends.
    pub fn adjacent(&self, k: usize) -> bool {
        let i = self.pos + k;
        i > 0 && i < self.toks.len() && self.toks[i - 1].end == self.toks[i].start
    }

    pub fn offset(&self) -> usize {
        self.toks[self.pos].start
    }

    pub fn save(&self) -> usize {
        self.pos
    }

    pub fn restore(&mut self, p: usize) {
        self.pos = p;
    }

    pub fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, s: &str) -> bool {
        if self.is_ident(s) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`, found {}", self.describe())))
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.error(format!("expected identifier, found {}", self.describe()))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn expect_eof(&self) -> Result<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected trailing input {}", self.describe())))
        }
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.offset(), msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_arrows_and_lambda() {
        let toks = lex("rule r : a ~> b # comment\n λx.x -> y").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert!(kinds.contains(&Tok::Sym("~>")));
        assert!(kinds.contains(&Tok::Sym("\\")));
        assert!(kinds.contains(&Tok::Sym("->")));
        assert!(!kinds.iter().any(|k| matches!(k, Tok::Ident(s) if s == "comment")));
    }

    #[test]
    fn adjacency() {
        let c = Cursor::new("race.out race . out").unwrap();
        assert!(c.adjacent(1) && c.adjacent(2));
        assert!(!c.adjacent(4));
    }
}
