//! Expression syntax shared by the path-algebra calculator and the Jacobson
//! algebra.
//!
//! ```text
//! expr   := ["-"] term { ("+" | "-") term }
//! term   := factor { ["*"] factor }
//! factor := atom { "'" }
//! atom   := number ["/" number] | "[" scalar "]" | ident | "(" expr ")"
//! ```
//!
//! Juxtaposition is multiplication and `'` is the involution (the ghost edge
//! when applied to an edge). Bracketed scalars carry field literals that
//! would otherwise clash with the grammar, e.g. `[x^2+x+1]` in GF(2^k).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Scalar { text: String, position: usize },
    Symbol { name: String, position: usize },
    Star(Box<Expr>),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Number(String),
    Bracket(String),
    Ident(String),
    Plus,
    Minus,
    Times,
    Prime,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            _ if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Times,
            '\'' => Token::Prime,
            '(' => Token::Open,
            ')' => Token::Close,
            '[' => {
                let close = chars[i..].iter().position(|&d| d == ']').ok_or(ParseError {
                    position: i,
                    message: "unclosed `[`".into(),
                })?;
                let inner: String = chars[i + 1..i + close].iter().collect();
                i += close + 1;
                out.push((Token::Bracket(inner), start));
                continue;
            }
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                i = j;
                out.push((Token::Number(s), start));
                continue;
            }
            _ if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                i = j;
                out.push((Token::Ident(s), start));
                continue;
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let neg = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let first = self.term()?;
        terms.push(if neg { Expr::Neg(Box::new(first)) } else { first });
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::Sum(terms)
        })
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Token::Number(_) | Token::Bracket(_) | Token::Ident(_) | Token::Open)
        )
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.peek() == Some(&Token::Times) {
                self.pos += 1;
                factors.push(self.factor()?);
            } else if self.starts_factor() {
                factors.push(self.factor()?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut atom = self.atom()?;
        while self.peek() == Some(&Token::Prime) {
            self.pos += 1;
            atom = Expr::Star(Box::new(atom));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let position = self.here();
        let Some((tok, _)) = self.tokens.get(self.pos).cloned() else {
            return self.err("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Token::Number(text) | Token::Bracket(text) => Ok(Expr::Scalar { text, position }),
            Token::Ident(name) => Ok(Expr::Symbol { name, position }),
            Token::Open => {
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected token {other:?}"))
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
