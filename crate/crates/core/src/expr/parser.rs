//! Recursive-descent parser for the expression grammar.

use thiserror::Error;

use super::ExprTree;
use crate::poly::Cx;

/// Syntax or name error; `column` is 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at column {column}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num {
        text: String,
        value: f64,
        imaginary: bool,
    },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num { text, .. } => format!("number `{text}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let body: String = chars[start..i].iter().collect();
            let value: f64 = body.parse().map_err(|_| ParseError {
                column: col,
                message: format!("malformed number `{body}`"),
            })?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_alphanumeric() || *n == '_');
            if imaginary {
                i += 1;
            }
            out.push((
                Tok::Num {
                    text: chars[start..i].iter().collect(),
                    value,
                    imaginary,
                },
                col,
            ));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        return Err(ParseError {
            column: col,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allowed: &'a dyn Fn(&str) -> bool,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<ExprTree, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = ExprTree::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = ExprTree::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprTree, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = ExprTree::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = ExprTree::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ExprTree, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(ExprTree::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let column = self.column();
        match self.bump() {
            (
                Tok::Num {
                    text,
                    imaginary: false,
                    ..
                },
                _,
            ) if text.chars().all(|c| c.is_ascii_digit()) => {
                let k: u32 = text.parse().map_err(|_| ParseError {
                    column,
                    message: format!("exponent `{text}` out of range"),
                })?;
                Ok(ExprTree::Pow(Box::new(base), k))
            }
            (t, column) => Err(ParseError {
                column,
                message: format!(
                    "expected non-negative integer exponent, found {}",
                    describe(&t)
                ),
            }),
        }
    }

    fn atom(&mut self) -> Result<ExprTree, ParseError> {
        let column = self.column();
        match self.peek().clone() {
            Tok::Num {
                value, imaginary, ..
            } => {
                self.bump();
                Ok(ExprTree::Const(if imaginary {
                    Cx::new(0.0, value)
                } else {
                    Cx::new(value, 0.0)
                }))
            }
            Tok::Ident(name) if name == "i" => {
                self.bump();
                Ok(ExprTree::Const(Cx::new(0.0, 1.0)))
            }
            Tok::Ident(name) if name == "exp" => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    return self.error(format!(
                        "expected '(' after exp, found {}",
                        describe(self.peek())
                    ));
                }
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(ExprTree::Exp(Box::new(inner)))
            }
            Tok::Ident(name) => {
                if (self.allowed)(&name) {
                    self.bump();
                    Ok(ExprTree::Var(name))
                } else {
                    Err(ParseError {
                        column,
                        message: format!("unknown identifier `{name}`"),
                    })
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            t => self.error(format!("expected operand, found {}", describe(&t))),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected ')', found {}", describe(self.peek())))
        }
    }
}

fn is_indexed_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('x' | 'v' | 'z'))
        && name.len() > 1
        && name[1..].chars().all(|c| c.is_ascii_digit())
        && !name[1..].starts_with('0')
}

/// Parses with the default identifier set: `x<k>`, `v<k>`, `z<k>` for k >= 1.
pub fn parse_expr(text: &str) -> Result<ExprTree, ParseError> {
    parse_with_predicate(text, &is_indexed_name)
}

/// Parses accepting exactly the identifiers in `allowed` (plus `exp` and `i`).
pub fn parse_expr_with(text: &str, allowed: &[impl AsRef<str>]) -> Result<ExprTree, ParseError> {
    let check = |name: &str| allowed.iter().any(|a| a.as_ref() == name);
    parse_with_predicate(text, &check)
}

fn parse_with_predicate(
    text: &str,
    allowed: &dyn Fn(&str) -> bool,
) -> Result<ExprTree, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        allowed,
    };
    let tree = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(tree)
}
