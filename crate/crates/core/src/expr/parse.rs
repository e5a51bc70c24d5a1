use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use super::{Expr, VARIABLE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset of the offending token (or of the end of input).
    pub offset: usize,
    /// Token classes acceptable at `offset`, sorted.
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at offset {}: found {}, expected one of {}",
            self.offset,
            self.found,
            self.expected.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
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

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_) => "number".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const OPERAND_START: &[&str] = &["`(`", "`-`", "identifier", "number"];

fn err(offset: usize, expected: &[&str], found: String) -> ParseError {
    let mut expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    expected.sort();
    expected.dedup();
    ParseError { offset, expected, found }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let (v, end) = lex_number(text, start)?;
                i = end;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(err(
                    start,
                    &["`(`", "`)`", "`*`", "`+`", "`-`", "`/`", "`^`", "identifier", "number"],
                    format!("character `{ch}`"),
                ));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// Decimal literal to an exact rational.
fn lex_number(text: &str, start: usize) -> Result<(BigRational, usize), ParseError> {
    let bytes = text.as_bytes();
    let digits_from = |mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits_from(start);
    let int_part = &text[start..i];
    let mut frac_part = "";
    if i < bytes.len() && bytes[i] == b'.' {
        let f0 = i + 1;
        let f1 = digits_from(f0);
        if f1 == f0 {
            return Err(err(f0, &["digit"], found_at(text, f0)));
        }
        frac_part = &text[f0..f1];
        i = f1;
    }
    let mut exp10: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let mut neg = false;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            neg = bytes[j] == b'-';
            j += 1;
        }
        let e1 = digits_from(j);
        if e1 == j {
            return Err(err(j, &["digit"], found_at(text, j)));
        }
        exp10 = text[j..e1]
            .parse::<i64>()
            .ok()
            .filter(|e| *e <= 4000)
            .ok_or_else(|| err(j, &["exponent of at most 4000"], text[j..e1].to_string()))?;
        if neg {
            exp10 = -exp10;
        }
        i = e1;
    }
    let mantissa: BigInt = format!("{int_part}{frac_part}").parse().expect("digits");
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let v = if scale >= 0 {
        BigRational::from_integer(mantissa * Pow::pow(&ten, scale as u64))
    } else {
        BigRational::new(mantissa, Pow::pow(&ten, (-scale) as u64))
    };
    Ok((v, i))
}

fn found_at(text: &str, offset: usize) -> String {
    text[offset..]
        .chars()
        .next()
        .map(|c| format!("character `{c}`"))
        .unwrap_or_else(|| "end of input".into())
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        err(self.offset(), expected, self.peek().describe())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            return Ok(Expr::pow(base, self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    VARIABLE => Ok(Expr::Var),
                    "exp" | "ln" => {
                        if *self.peek() != Tok::LParen {
                            return Err(self.fail(&["`(`"]));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.close()?;
                        Ok(if name == "exp" { Expr::exp(arg) } else { Expr::ln(arg) })
                    }
                    _ => Ok(Expr::Param(name)),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            _ => Err(self.fail(OPERAND_START)),
        }
    }

    fn close(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.fail(&["`)`", "`*`", "`+`", "`-`", "`/`", "`^`"]))
        }
    }
}

/// Parses `text` per the module grammar.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.fail(&["`*`", "`+`", "`-`", "`/`", "`^`", "end of input"]));
    }
    Ok(e)
}
