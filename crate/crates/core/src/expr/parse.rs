//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | ident "(" expr ")" | "(" expr ")" ;
//! number  = digit { digit } [ "." { digit } ] ;
//! ```
//!
//! `i` is the imaginary unit. Functions: `sin cos cot tan exp sqrt`.
//! Exponents must reduce to rational constants with denominator 1 or 2.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use thiserror::Error;

use super::{Coeff, Expr};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("unknown function `{name}` at position {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("unsupported exponent at position {pos}: {msg}")]
    Exponent { pos: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut int_part = String::new();
            let mut frac_part = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                int_part.push(chars[i]);
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac_part.push(chars[i]);
                    i += 1;
                }
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError::Syntax { pos: start, msg: "malformed number".into() });
            }
            let digits = format!("{int_part}{frac_part}");
            let numer: BigInt = digits.parse().map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            })?;
            let denom = num::pow(BigInt::from(10), frac_part.len());
            out.push((Tok::Num(BigRational::new(numer, denom)), start));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
            }
            out.push((Tok::Ident(s), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    symbols: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.here(), msg: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = &acc * &rhs;
            } else if self.eat('/') {
                let pos = self.here();
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(ParseError::Syntax { pos, msg: "division by zero".into() });
                }
                acc = &acc * &rhs.recip();
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let pos = self.here();
            let e = self.unary()?;
            let c = e.as_constant().filter(|c| c.is_real()).ok_or_else(|| ParseError::Exponent {
                pos,
                msg: "exponent must be a real rational constant".into(),
            })?;
            if base.is_zero() && !c.re.is_zero() {
                return Ok(Expr::zero());
            }
            return base.pow_rational(&c.re).ok_or_else(|| ParseError::Exponent {
                pos,
                msg: "only integer and half-integer exponents are supported".into(),
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.here();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(r), _)) => {
                self.pos += 1;
                Ok(Expr::constant(Coeff::real(r)))
            }
            Some((Tok::Op('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return match name.as_str() {
                        "sin" => Ok(Expr::sin(arg)),
                        "cos" => Ok(Expr::cos(arg)),
                        "cot" => Ok(Expr::cot(arg)),
                        "tan" => Ok(Expr::tan(arg)),
                        "exp" => Ok(Expr::exp(arg)),
                        "sqrt" => Ok(Expr::sqrt(arg)),
                        _ => Err(ParseError::UnknownFunction { name, pos }),
                    };
                }
                if name == "i" {
                    return Ok(Expr::i());
                }
                if self.symbols.contains(&name.as_str()) {
                    Ok(Expr::sym(&name))
                } else {
                    Err(ParseError::UnknownSymbol { name, pos })
                }
            }
            Some((Tok::Op(c), _)) => {
                Err(ParseError::Syntax { pos, msg: format!("unexpected `{c}`") })
            }
            None => Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses `text` over the given coordinate names.
pub fn parse(text: &str, coords: &[&str]) -> Result<Expr, ParseError> {
    parse_with(text, coords, &[])
}

/// Parses `text` over coordinates plus declared constant parameters.
pub fn parse_with(text: &str, coords: &[&str], params: &[&str]) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let symbols: Vec<&str> = coords.iter().chain(params.iter()).copied().collect();
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), symbols: &symbols };
    if p.toks.is_empty() {
        return Err(ParseError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax { pos: p.here(), msg: "trailing input".into() });
    }
    Ok(e)
}
