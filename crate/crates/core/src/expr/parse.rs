//! Recursive-descent parser for the map grammar:
//!
//! ```text
//! map      := expr (';' expr)*
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := ('-')? power
//! power    := atom ('^' integer)?
//! atom     := number | 'pi' | 'e' | variable | func '(' expr ')' | '(' expr ')'
//! ```

use super::eval::{fold, ScalarDomain};
use super::{Expr, Func, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(f64, &'a str),
    Ident(&'a str),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only if followed by digits, so `2e` is not swallowed.
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value, text),
                pos: start,
            });
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(&src[start..i]),
                pos: start,
            });
        } else if b"+-*/^();".contains(&c) {
            out.push(Token {
                tok: Tok::Sym(c as char),
                pos: i,
            });
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax {
                pos: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        pos: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token<'a>>,
    at: usize,
    arity: usize,
    origin: Vec<f64>,
}

pub(super) fn parse_map(src: &str, arity: usize) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        arity,
        origin: vec![0.0; arity],
    };
    let mut comps = vec![p.expr()?];
    while p.eat(';') {
        comps.push(p.expr()?);
    }
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(p.unexpected(t.pos));
    }
    Ok(comps)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Token<'a> {
        self.toks[self.at].clone()
    }

    fn bump(&mut self) -> Token<'a> {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.toks[self.at].tok == Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, pos: usize) -> ParseError {
        let message = match &self.toks[self.at].tok {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(_, s) => format!("unexpected number `{s}`"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Sym(c) => format!("unexpected `{c}`"),
        };
        ParseError::Syntax { pos, message }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            let pos = self.peek().pos;
            Err(ParseError::Syntax {
                pos,
                message: format!("expected `{c}`"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.toks[self.at].tok == Tok::Sym('/') {
                let pos = self.bump().pos;
                let rhs = self.factor()?;
                let at_origin = self.value_at_origin(&rhs, pos)?;
                if at_origin == 0.0 {
                    return Err(ParseError::NotAnalytic {
                        pos,
                        message: "denominator vanishes at the origin".into(),
                    });
                }
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.power()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let t = self.bump();
        match t.tok {
            Tok::Num(_, text) if text.bytes().all(|b| b.is_ascii_digit()) => {
                let e: u32 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: t.pos,
                    message: format!("exponent `{text}` out of range"),
                })?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                message: "exponent must be a non-negative integer literal".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek();
        match t.tok {
            Tok::Num(v, _) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(name, t.pos)
            }
            _ => Err(self.unexpected(t.pos)),
        }
    }

    fn identifier(&mut self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        match name {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        if let Some(func) = Func::from_name(name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            self.check_function_domain(func, &arg, pos)?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let index = if let Some(digits) = name.strip_prefix('x').filter(|d| {
            !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())
        }) {
            digits.parse::<usize>().ok().filter(|&i| i >= 1)
        } else {
            match name {
                "x" | "y" | "z" | "w" if self.arity <= 4 => {
                    Some(1 + "xyzw".find(name).unwrap_or(0))
                }
                _ => None,
            }
        };
        match index {
            Some(i) if i <= self.arity => Ok(Expr::Var(i - 1)),
            Some(i) => Err(ParseError::ArityMismatch {
                pos,
                index: i,
                arity: self.arity,
            }),
            None => Err(ParseError::UnknownIdentifier {
                pos,
                name: name.to_string(),
            }),
        }
    }

    fn value_at_origin(&self, e: &Expr, pos: usize) -> Result<f64, ParseError> {
        fold(e, &ScalarDomain { x: &self.origin }).map_err(|err| ParseError::NotAnalytic {
            pos,
            message: err.to_string(),
        })
    }

    fn check_function_domain(&self, func: Func, arg: &Expr, pos: usize) -> Result<(), ParseError> {
        let c = self.value_at_origin(arg, pos)?;
        let bad = match func {
            Func::Log | Func::Sqrt => c <= 0.0,
            Func::Tan => c.cos() == 0.0,
            _ => false,
        };
        if bad || !c.is_finite() {
            return Err(ParseError::NotAnalytic {
                pos,
                message: format!("{} argument equals {c} at the origin", func.name()),
            });
        }
        Ok(())
    }
}
