//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr  := lat
//! lat   := add (("\/" | "/\") add)*
//! add   := mul (("+" | "-") mul)*
//! mul   := unary ("*" unary)*
//! unary := "-" unary | atom
//! atom  := number "*" unary | number | ident | "(" expr ")"
//!        | ("pos" | "neg" | "abs") "(" expr ")"
//! ```
//!
//! A numeric literal followed by `*` is a scaling; `a * b` between two
//! non-literal operands is the product. A bare literal must be zero. A minus
//! sign written directly in front of a scaling literal is folded into the
//! coefficient, so `-2*x` reads as `Scale(-2, x)`.

use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at offset {pos}")]
    UnknownToken { pos: usize, ch: char },
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Join,
    Meet,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '\\' if bytes.get(i + 1) == Some(&b'/') => {
                i += 1;
                Tok::Join
            }
            '/' if bytes.get(i + 1) == Some(&b'\\') => {
                i += 1;
                Tok::Meet
            }
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
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
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    msg: format!("malformed number `{lit}`"),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Syntax {
                        pos: start,
                        msg: format!("number `{lit}` is not finite"),
                    });
                }
                out.push((start, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or(c);
                return Err(ParseError::UnknownToken { pos: i, ch });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn lat(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.add()?;
        loop {
            match self.peek() {
                Some(Tok::Join) => {
                    self.at += 1;
                    lhs = Expr::join(lhs, self.add()?);
                }
                Some(Tok::Meet) => {
                    self.at += 1;
                    lhs = Expr::meet(lhs, self.add()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = Expr::add(lhs, self.mul()?);
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = Expr::sub(lhs, self.mul()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.at += 1;
            lhs = Expr::mul(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() != Some(&Tok::Minus) {
            return self.atom();
        }
        self.at += 1;
        if let (Some(Tok::Num(c)), Some(Tok::Star)) = (self.peek_at(0), self.peek_at(1)) {
            let c = *c;
            self.at += 2;
            return Ok(Expr::scale(-c, self.unary()?));
        }
        Ok(Expr::neg(self.unary()?))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(c)) => {
                if self.peek() == Some(&Tok::Star) {
                    self.at += 1;
                    Ok(Expr::scale(c, self.unary()?))
                } else if c == 0.0 {
                    Ok(Expr::Zero)
                } else {
                    Err(ParseError::Syntax {
                        pos,
                        msg: format!("constant {c} is not an expression (only 0 is)"),
                    })
                }
            }
            Some(Tok::Ident(name)) => {
                let sugar = matches!(name.as_str(), "pos" | "neg" | "abs");
                if sugar && self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    let inner = self.lat()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "pos" => Expr::pos(inner),
                        "neg" => Expr::neg_part(inner),
                        _ => Expr::abs(inner),
                    })
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.lat()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(_) => Err(ParseError::Syntax {
                pos,
                msg: "expected an operand".into(),
            }),
            None => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses `text` and returns the desugared expression.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_raw(text).map(|e| e.desugar())
}

/// Parses `text` keeping sugar nodes.
pub fn parse_raw(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
    };
    let e = p.lat()?;
    if p.at < p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
