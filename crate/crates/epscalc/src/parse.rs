//! Expression parser for field elements and coefficient formulas.
//!
//! Grammar: integer literals, `e` (the infinitesimal), `w` (= `e^-1`),
//! user-defined names, index variables like `i`, `j`, `n`, the operators
//! `+ - * / ^`, postfix factorial `!`, and parentheses. Precedence is
//! standard; `^` is right-associative and binds a signed exponent, so
//! `e^-2` parses. Parse errors carry a byte offset into the input.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field::{FieldElement, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: {}",
            self.position, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalError {
    pub message: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation error: {}", self.message)
    }
}

impl std::error::Error for EvalError {}

fn eval_err(message: impl Into<String>) -> EvalError {
    EvalError {
        message: message.into(),
    }
}

/// Parse-or-eval error for one-shot helpers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprError {
    Parse(ParseError),
    Eval(EvalError),
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Parse(e) => write!(f, "{}", e),
            ExprError::Eval(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for ExprError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Factorial(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Bang,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let c = bytes[pos] as char;
        match c {
            ' ' | '\t' => {
                pos += 1;
            }
            '0'..='9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let digits = &text[start..pos];
                let value: BigInt = digits.parse().expect("digits");
                tokens.push((Token::Int(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = pos;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                tokens.push((Token::Ident(text[start..pos].to_string()), start));
            }
            '+' => {
                tokens.push((Token::Plus, pos));
                pos += 1;
            }
            '-' => {
                tokens.push((Token::Minus, pos));
                pos += 1;
            }
            '*' => {
                tokens.push((Token::Star, pos));
                pos += 1;
            }
            '/' => {
                tokens.push((Token::Slash, pos));
                pos += 1;
            }
            '^' => {
                tokens.push((Token::Caret, pos));
                pos += 1;
            }
            '!' => {
                tokens.push((Token::Bang, pos));
                pos += 1;
            }
            '(' => {
                tokens.push((Token::LParen, pos));
                pos += 1;
            }
            ')' => {
                tokens.push((Token::RParen, pos));
                pos += 1;
            }
            other => {
                return Err(ParseError {
                    position: pos,
                    message: format!("unexpected character `{}`", other),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    cursor: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(_, p)| *p)
            .unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.cursor).map(|(t, _)| t);
        self.cursor += 1;
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.cursor += 1;
            Ok(())
        } else {
            Err(ParseError {
                position: self.position(),
                message: format!("expected {}", what),
            })
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = Expr::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Token::Minus) => {
                self.advance();
                Ok(Expr::Neg(Box::new(self.parse_unary()?)))
            }
            Some(Token::Plus) => {
                self.advance();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_postfix()?;
        if self.peek() == Some(&Token::Caret) {
            self.advance();
            // right-associative; the exponent may carry a sign
            let exponent = self.parse_unary()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn parse_postfix(&mut self) -> Result<Expr, ParseError> {
        let mut inner = self.parse_atom()?;
        while self.peek() == Some(&Token::Bang) {
            self.advance();
            inner = Expr::Factorial(Box::new(inner));
        }
        Ok(inner)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let position = self.position();
        match self.advance() {
            Some(Token::Int(v)) => Ok(Expr::Int(v.clone())),
            Some(Token::Ident(name)) => Ok(Expr::Var(name.clone())),
            Some(Token::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(other) => Err(ParseError {
                position,
                message: format!("unexpected token {:?}", other),
            }),
            None => Err(ParseError {
                position,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

/// Parse an expression into its tree; errors carry byte offsets.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        cursor: 0,
        end: text.len(),
    };
    let expr = parser.parse_expr()?;
    if parser.cursor != tokens.len() {
        return Err(ParseError {
            position: parser.position(),
            message: "trailing input".to_string(),
        });
    }
    Ok(expr)
}

/// Name bindings and index-variable assignments for evaluation.
#[derive(Clone, Debug, Default)]
pub struct ExprContext {
    pub names: HashMap<String, FieldElement>,
    pub indices: HashMap<String, i64>,
}

impl ExprContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: &str, value: FieldElement) {
        self.names.insert(name.to_string(), value);
    }

    pub fn with_index(&self, name: &str, value: i64) -> ExprContext {
        let mut ctx = self.clone();
        ctx.indices.insert(name.to_string(), value);
        ctx
    }
}

impl Expr {
    pub fn eval(&self, ctx: &ExprContext) -> Result<FieldElement, EvalError> {
        match self {
            Expr::Int(v) => Ok(FieldElement::from_rational(Rat::from_integer(v.clone()))),
            Expr::Var(name) => {
                if let Some(v) = ctx.indices.get(name) {
                    return Ok(FieldElement::from_int(*v));
                }
                match name.as_str() {
                    "e" => Ok(FieldElement::epsilon()),
                    "w" => Ok(FieldElement::omega()),
                    _ => ctx
                        .names
                        .get(name)
                        .cloned()
                        .ok_or_else(|| eval_err(format!("unknown name `{}`", name))),
                }
            }
            Expr::Neg(inner) => Ok(-inner.eval(ctx)?),
            Expr::Factorial(inner) => {
                let v = inner.eval(ctx)?;
                let k =
                    constant_integer(&v).ok_or_else(|| eval_err("factorial of a non-integer"))?;
                if k.is_negative() {
                    return Err(eval_err("factorial of a negative integer"));
                }
                let k = k
                    .to_u64()
                    .filter(|k| *k <= 5000)
                    .ok_or_else(|| eval_err("factorial argument too large"))?;
                let mut acc = BigInt::one();
                for t in 2..=k {
                    acc *= BigInt::from(t);
                }
                Ok(FieldElement::from_rational(Rat::from_integer(acc)))
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(ctx)?;
                let b = rhs.eval(ctx)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => a.checked_div(&b).map_err(|_| eval_err("division by zero")),
                    BinOp::Pow => {
                        let k = constant_integer(&b)
                            .and_then(|k| k.to_i64())
                            .ok_or_else(|| eval_err("exponent must be an integer"))?;
                        a.checked_pow(k)
                            .map_err(|_| eval_err("zero raised to a negative power"))
                    }
                }
            }
        }
    }
}

/// Constant integer value of an element, if it is one.
pub fn constant_integer(v: &FieldElement) -> Option<BigInt> {
    if v.is_zero() {
        return Some(BigInt::zero());
    }
    let exp = v.expand(1);
    if exp.v0() != 0 || exp.coeffs().len() != 1 {
        return None;
    }
    // Exact constants have an exact single-coefficient expansion.
    let c = exp.coeffs()[0].clone();
    let back = FieldElement::from_rational(c.clone());
    if &back != v || !c.denom().is_one() {
        return None;
    }
    Some(c.numer().clone())
}

/// Parse and evaluate in one step.
pub fn eval_element(text: &str, ctx: &ExprContext) -> Result<FieldElement, ExprError> {
    let expr = parse_expression(text).map_err(ExprError::Parse)?;
    expr.eval(ctx).map_err(ExprError::Eval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str) -> FieldElement {
        eval_element(text, &ExprContext::new()).unwrap()
    }

    #[test]
    fn literal_elements() {
        let e = FieldElement::epsilon();
        let one = FieldElement::one();
        assert_eq!(
            eval("(2*e)/(1 - e)"),
            FieldElement::from_int(2) * &e / (&one - &e)
        );
        assert_eq!(eval("3/2"), FieldElement::from_ratio(3, 2));
        assert_eq!(eval("w"), FieldElement::omega());
        assert_eq!(eval("e^-1"), FieldElement::omega());
        assert_eq!(eval("-e^2"), -e.pow(2));
        assert_eq!(eval("2^3!"), FieldElement::from_int(64));
    }

    #[test]
    fn coefficient_formulas_with_indices() {
        let expr = parse_expression("(-1)^j * e^j").unwrap();
        let ctx = ExprContext::new();
        for j in 0..5i64 {
            let v = expr.eval(&ctx.with_index("j", j)).unwrap();
            let expected = FieldElement::from_int(if j % 2 == 0 { 1 } else { -1 })
                * FieldElement::epsilon().pow(j);
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn unbalanced_paren_reports_offset() {
        let err = parse_expression("1/(1-e").unwrap_err();
        assert_eq!(err.position, 6);
    }

    #[test]
    fn eval_errors() {
        let ctx = ExprContext::new();
        assert!(eval_element("1/0", &ctx).is_err());
        assert!(eval_element("2^e", &ctx).is_err());
        assert!(eval_element("(1/2)!", &ctx).is_err());
        assert!(eval_element("nope", &ctx).is_err());
    }

    #[test]
    fn printed_elements_roundtrip() {
        let e = FieldElement::epsilon();
        let one = FieldElement::one();
        let cases = vec![
            FieldElement::zero(),
            one.clone(),
            -one.clone(),
            FieldElement::from_ratio(-7, 3),
            e.pow(5),
            e.pow(-4) * FieldElement::from_ratio(2, 9),
            (FieldElement::from_int(2) * &e) / (&one - &e),
            (&one + e.pow(2)) / (&one - e.pow(3) * FieldElement::from_ratio(5, 4)),
        ];
        let ctx = ExprContext::new();
        for x in cases {
            let text = x.to_string();
            let back = eval_element(&text, &ctx).unwrap();
            assert_eq!(back, x, "roundtrip failed for `{}`", text);
        }
    }
}
