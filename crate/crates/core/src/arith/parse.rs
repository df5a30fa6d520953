//! Prefix text grammar for [`NumberExpr`].
//!
//! ```text
//! expr    := integer | rational | decimal | "(" op expr+ ")"
//! integer := "-"? digit+
//! rational:= integer "/" digit+            e.g. 3/7, -5/2
//! decimal := 'dec"' "-"? digit+ ("." digit+)? '"' ws* "bits=" digit+
//! op      := "+" | "-" | "*" | "/" | "sqrt"
//! ```
//!
//! `(- x)` is negation, `(+ a b c)` folds left, and `(sqrt e)` requires `e`
//! to evaluate exactly to a positive rational. Printing always emits the
//! canonical binary form, so `parse(print(x))` rebuilds the identical tree.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{exact_rational, ArithError, Node, NumberExpr};

pub(super) fn write_expr(expr: &NumberExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match expr.node() {
        Node::Int(n) => write!(f, "{n}"),
        Node::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        Node::Sqrt(r) => {
            if r.is_integer() {
                write!(f, "(sqrt {})", r.numer())
            } else {
                write!(f, "(sqrt {}/{})", r.numer(), r.denom())
            }
        }
        Node::Decimal { digits, bits, .. } => write!(f, "dec\"{digits}\" bits={bits}"),
        Node::Neg(x) => write!(f, "(- {x})"),
        Node::Add(a, b) => write!(f, "(+ {a} {b})"),
        Node::Sub(a, b) => write!(f, "(- {a} {b})"),
        Node::Mul(a, b) => write!(f, "(* {a} {b})"),
        Node::Div(a, b) => write!(f, "(/ {a} {b})"),
    }
}

pub(super) fn parse_decimal_digits(digits: &str) -> Option<BigRational> {
    let (neg, body) = match digits.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, digits),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, fr)) => (i, fr),
        None => (body, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && frac_part.is_empty() {
        return None;
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mantissa: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = BigInt::from(10).pow(frac_part.len() as u32);
    let v = BigRational::new(mantissa, scale);
    Some(if neg { -v } else { v })
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ArithError> {
        Err(ArithError::Parse {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn expr(&mut self) -> Result<NumberExpr, ArithError> {
        self.skip_ws();
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let op_start = self.pos;
                let op = self.atom();
                if op.is_empty() {
                    self.pos = op_start;
                    return self.error("expected operator");
                }
                let mut args = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        None => return self.error("unclosed '('"),
                        _ => args.push(self.expr()?),
                    }
                }
                self.apply(op, op_start, args)
            }
            Some(')') => self.error("unexpected ')'"),
            Some(_) => {
                let start = self.pos;
                if self.src[self.pos..].starts_with("dec\"") {
                    return self.decimal();
                }
                let tok = self.atom();
                literal(tok).ok_or_else(|| ArithError::Parse {
                    offset: start,
                    message: format!("invalid literal {tok:?}"),
                })
            }
        }
    }

    fn decimal(&mut self) -> Result<NumberExpr, ArithError> {
        self.pos += "dec\"".len();
        let start = self.pos;
        let Some(close) = self.src[start..].find('"') else {
            return self.error("unterminated decimal literal");
        };
        let digits = &self.src[start..start + close];
        self.pos = start + close + 1;
        self.skip_ws();
        if !self.src[self.pos..].starts_with("bits=") {
            return self.error("decimal literal needs an explicit bits=N");
        }
        self.pos += "bits=".len();
        let bits_start = self.pos;
        let bits_tok = self.atom();
        let bits: u32 = bits_tok.parse().map_err(|_| ArithError::Parse {
            offset: bits_start,
            message: format!("invalid bit count {bits_tok:?}"),
        })?;
        NumberExpr::decimal(digits, bits).map_err(|e| ArithError::Parse {
            offset: start,
            message: e.to_string(),
        })
    }

    fn apply(
        &self,
        op: &str,
        offset: usize,
        args: Vec<NumberExpr>,
    ) -> Result<NumberExpr, ArithError> {
        let err = |message: String| ArithError::Parse { offset, message };
        match (op, args.len()) {
            (_, 0) => Err(err(format!("operator {op:?} needs arguments"))),
            ("-", 1) => Ok(-&args[0]),
            ("sqrt", 1) => {
                let radicand = exact_rational(&args[0])
                    .filter(|r| r.is_positive())
                    .ok_or_else(|| err("sqrt needs a positive rational argument".into()))?;
                NumberExpr::sqrt_of(radicand).map_err(|e| err(e.to_string()))
            }
            ("sqrt", _) => Err(err("sqrt takes one argument".into())),
            ("+" | "*" | "/", 1) => Err(err(format!("operator {op:?} needs two arguments"))),
            ("+" | "-" | "*" | "/", _) => {
                let mut iter = args.into_iter();
                let mut acc = iter.next().unwrap();
                for rhs in iter {
                    acc = match op {
                        "+" => acc + rhs,
                        "-" => acc - rhs,
                        "*" => acc * rhs,
                        _ => acc.checked_div(&rhs).map_err(|e| err(e.to_string()))?,
                    };
                }
                Ok(acc)
            }
            _ => Err(err(format!("unknown operator {op:?}"))),
        }
    }
}

fn literal(tok: &str) -> Option<NumberExpr> {
    let digits_ok = |s: &str| {
        let body = s.strip_prefix('-').unwrap_or(s);
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if let Some((n, d)) = tok.split_once('/') {
        if !digits_ok(n) || d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(NumberExpr::from_rational(BigRational::new(n, d)));
    }
    if !digits_ok(tok) {
        return None;
    }
    Some(NumberExpr::int(tok.parse::<BigInt>().ok()?))
}

pub(super) fn parse_expr(text: &str) -> Result<NumberExpr, ArithError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.error("trailing input");
    }
    Ok(e)
}
