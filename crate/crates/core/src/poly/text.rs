//! Lexer and polynomial-expression parser shared by the polynomial text
//! format and the formula grammar.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::MPoly;

const MAX_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Dot,
    And,
    Or,
    Not,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    End,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Int(n) => return write!(f, "integer {n}"),
            TokenKind::Ident(s) => return write!(f, "identifier `{s}`"),
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::Caret => "`^`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::Dot => "`.`",
            TokenKind::And => "`/\\`",
            TokenKind::Or => "`\\/`",
            TokenKind::Not => "`~`",
            TokenKind::Eq => "`=`",
            TokenKind::Ne => "`!=`",
            TokenKind::Lt => "`<`",
            TokenKind::Le => "`<=`",
            TokenKind::Gt => "`>`",
            TokenKind::Ge => "`>=`",
            TokenKind::End => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        let next = chars.get(i + 1).copied();
        let (kind, width) = match c {
            '\n' => {
                line += 1;
                column = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                column += 1;
                i += 1;
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                column += i - start;
                out.push(Token {
                    kind: TokenKind::Int(digits.parse().expect("digits")),
                    line: tl,
                    column: tc,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                column += i - start;
                out.push(Token {
                    kind: TokenKind::Ident(word),
                    line: tl,
                    column: tc,
                });
                continue;
            }
            '+' => (TokenKind::Plus, 1),
            '-' => (TokenKind::Minus, 1),
            '*' => (TokenKind::Star, 1),
            '^' => (TokenKind::Caret, 1),
            '(' => (TokenKind::LParen, 1),
            ')' => (TokenKind::RParen, 1),
            '.' => (TokenKind::Dot, 1),
            '~' | '¬' => (TokenKind::Not, 1),
            '∧' => (TokenKind::And, 1),
            '∨' => (TokenKind::Or, 1),
            '/' if next == Some('\\') => (TokenKind::And, 2),
            '/' => (TokenKind::Slash, 1),
            '\\' if next == Some('/') => (TokenKind::Or, 2),
            '=' => (TokenKind::Eq, 1),
            '!' if next == Some('=') => (TokenKind::Ne, 2),
            '<' if next == Some('=') => (TokenKind::Le, 2),
            '<' => (TokenKind::Lt, 1),
            '>' if next == Some('=') => (TokenKind::Ge, 2),
            '>' => (TokenKind::Gt, 1),
            other => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token {
            kind,
            line: tl,
            column: tc,
        });
        i += width;
        column += width;
    }
    out.push(Token {
        kind: TokenKind::End,
        line,
        column,
    });
    Ok(out)
}

/// Parses a variable name `x<digits>` into its 1-based index.
pub fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0')
    {
        return None;
    }
    digits.parse().ok().filter(|&v: &usize| v >= 1)
}

/// A polynomial with rational coefficients written as `num / den`, with
/// `den > 0` and `gcd(content(num), den) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    pub num: MPoly,
    pub den: BigInt,
}

impl RatPoly {
    pub fn from_poly(num: MPoly) -> RatPoly {
        RatPoly {
            num,
            den: BigInt::one(),
        }
    }

    fn reduced(num: MPoly, den: BigInt) -> RatPoly {
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.content().gcd(&den);
        if g.is_one() || g.is_zero() {
            RatPoly { num, den }
        } else {
            RatPoly {
                num: num.div_exact_int(&g),
                den: den / g,
            }
        }
    }

    pub fn add(&self, o: &RatPoly) -> RatPoly {
        let num = self.num.scale(&o.den) + o.num.scale(&self.den);
        RatPoly::reduced(num, &self.den * &o.den)
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatPoly) -> RatPoly {
        RatPoly::reduced(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn pow(&self, e: u32) -> RatPoly {
        RatPoly::reduced(self.num.pow(e), num_traits::pow(self.den.clone(), e as usize))
    }

    pub fn div_int(&self, k: &BigInt) -> RatPoly {
        RatPoly::reduced(self.num.clone(), &self.den * k)
    }

    pub fn into_integral(self) -> Option<MPoly> {
        self.den.is_one().then_some(self.num)
    }
}

/// Recursive-descent parser over a token stream.
///
/// The formula parser drives the same instance, so the cursor and
/// backtracking are public.
pub struct PolyParser {
    tokens: Vec<Token>,
    pos: usize,
    max_var: usize,
}

impl PolyParser {
    pub fn new(src: &str) -> Result<PolyParser, ParseError> {
        Ok(PolyParser {
            tokens: tokenize(src)?,
            pos: 0,
            max_var: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub fn peek_kind(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    pub fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn checkpoint(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, cp: usize) {
        self.pos = cp;
    }

    /// Largest variable index mentioned so far.
    pub fn max_var(&self) -> usize {
        self.max_var
    }

    pub fn note_var(&mut self, v: usize) {
        self.max_var = self.max_var.max(v);
    }

    pub fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if *self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            let t = self.peek();
            Err(t.error(format!("expected {kind}, found {}", t.kind)))
        }
    }

    pub fn expect_end(&mut self) -> Result<(), ParseError> {
        self.expect(TokenKind::End).map(|_| ())
    }

    /// `sum := term (("+" | "-") term)*`
    pub fn parse_poly(&mut self) -> Result<RatPoly, ParseError> {
        let mut acc = self.parse_product()?;
        loop {
            match self.peek_kind() {
                TokenKind::Plus => {
                    self.advance();
                    acc = acc.add(&self.parse_product()?);
                }
                TokenKind::Minus => {
                    self.advance();
                    acc = acc.sub(&self.parse_product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_product(&mut self) -> Result<RatPoly, ParseError> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.peek_kind() {
                TokenKind::Star => {
                    self.advance();
                    acc = acc.mul(&self.parse_unary()?);
                }
                TokenKind::Slash => {
                    self.advance();
                    let t = self.advance();
                    match t.kind {
                        TokenKind::Int(ref n) if !n.is_zero() => acc = acc.div_int(n),
                        TokenKind::Int(_) => return Err(t.error("division by zero")),
                        _ => {
                            return Err(t.error(format!(
                                "expected an integer literal after `/`, found {}",
                                t.kind
                            )))
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RatPoly, ParseError> {
        match self.peek_kind() {
            TokenKind::Minus => {
                self.advance();
                Ok(self.parse_unary()?.neg())
            }
            TokenKind::Plus => {
                self.advance();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> Result<RatPoly, ParseError> {
        let base = self.parse_primary()?;
        if *self.peek_kind() != TokenKind::Caret {
            return Ok(base);
        }
        self.advance();
        let t = self.advance();
        match &t.kind {
            TokenKind::Int(n) => match n.to_u32().filter(|&e| e <= MAX_EXPONENT) {
                Some(e) => Ok(base.pow(e)),
                None => Err(t.error(format!("exponent {n} exceeds {MAX_EXPONENT}"))),
            },
            other => Err(t.error(format!(
                "expected a nonnegative integer exponent, found {other}"
            ))),
        }
    }

    fn parse_primary(&mut self) -> Result<RatPoly, ParseError> {
        let t = self.advance();
        match &t.kind {
            TokenKind::Int(n) => Ok(RatPoly::from_poly(MPoly::constant(n.clone()))),
            TokenKind::Ident(name) => match variable_index(name) {
                Some(v) => {
                    self.note_var(v);
                    Ok(RatPoly::from_poly(MPoly::var(v)))
                }
                None => Err(t.error(format!(
                    "unknown identifier `{name}` (variables are x1, x2, ...)"
                ))),
            },
            TokenKind::LParen => {
                let inner = self.parse_poly()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            other => Err(t.error(format!("expected a polynomial, found {other}"))),
        }
    }
}
