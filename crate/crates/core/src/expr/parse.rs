//! Minimal infix grammar for user-supplied functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | '(' expr ')' | func '(' expr ')'
//!          | qK | pK | name '[' K ']' | name
//! ```
//!
//! `qK`/`pK` are 1-based coordinates, `name[K]` a 1-based site parameter.
//! Names listed as placeholders become formal symbols; every other name is a
//! scalar parameter. There is no implicit multiplication.

use super::node::{Expr, UnaryOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && (b[j] as char).is_ascii_digit() {
                    i = j;
                    while i < b.len() && (b[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Parse { pos: start, msg: format!("bad number `{text}`") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()[]".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    placeholders: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        let base = self.primary()?;
        if self.eat('^') {
            let e = self.unary()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn index(&mut self) -> Result<usize> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 1.0 => {
                self.at += 1;
                Ok(v as usize - 1)
            }
            _ => self.err("expected a 1-based index"),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::constant(v))
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if self.eat('(') {
                    let Some(op) = UnaryOp::from_name(&name) else {
                        return self.err(format!("unknown function `{name}`"));
                    };
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::unary(op, arg));
                }
                if self.eat('[') {
                    let i = self.index()?;
                    self.expect(']')?;
                    return Ok(Expr::site_param(&name, i));
                }
                if self.placeholders.contains(&name.as_str()) {
                    return Ok(Expr::symbol(&name));
                }
                if name == "pi" {
                    return Ok(Expr::constant(std::f64::consts::PI));
                }
                if let Some(coord) = coordinate(&name) {
                    return Ok(coord);
                }
                Ok(Expr::param(&name))
            }
            _ => self.err("expected a number, name or `(`"),
        }
    }
}

fn coordinate(name: &str) -> Option<Expr> {
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    if k == 0 {
        return None;
    }
    match head {
        "q" => Some(Expr::q(k - 1)),
        "p" => Some(Expr::p(k - 1)),
        _ => None,
    }
}

/// Parse an infix expression; `placeholders` lists the formal variables.
pub fn parse(src: &str, placeholders: &[&str]) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len(), placeholders };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, ParamSet, PhasePoint};

    #[test]
    fn precedence_and_associativity() {
        let x = PhasePoint::new(vec![2.0], vec![3.0]).unwrap();
        let ps = ParamSet::new();
        let v = |s: &str| evaluate(&parse(s, &[]).unwrap(), &x, &ps).unwrap();
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(v("-q1^2"), -4.0);
        assert_eq!(v("8 / 2 / 2"), 2.0);
        assert_eq!(v("q1*p1 - 1e-1"), 5.9);
        assert_eq!(v("sqrt(q1^2 + p1^2 - 4)"), 3.0);
    }

    #[test]
    fn names_resolve_by_role() {
        let e = parse("omega^2*s/2 + b[2]", &["s"]).unwrap();
        assert_eq!(e.symbols(), vec!["s".to_string()]);
        let mut seen_b = false;
        e.visit(&mut |n| {
            if let crate::expr::Node::Param(r) = n {
                if r.name.as_ref() == "b" {
                    assert_eq!(r.index, Some(1));
                    seen_b = true;
                }
            }
        });
        assert!(seen_b);
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("1 +", &[]), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse("foo(1)", &[]), Err(Error::Parse { .. })));
        assert!(matches!(parse("2 3", &[]), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse("q1 # 2", &[]), Err(Error::Parse { pos: 3, .. })));
    }
}
