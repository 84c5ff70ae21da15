//! Scalar expressions in the Poisson-vector components `a1`, `a2`, `a3`.
//!
//! Supported syntax: numbers, the three variables, `+ - * / ^`, parentheses,
//! and the functions `sin`, `cos`, `exp`. `^` binds tighter than unary minus
//! and is right-associative, so `-a1^2^1` is `-(a1^(2^1))`.
//!
//! Gradients are exact, computed by forward-mode differentiation of the tree.

use crate::forms::SphereScalarField;
use nalgebra::Vector3;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column inside the expression.
    pub column: usize,
    pub message: String,
    /// Set when the expression names a variable other than `a1`, `a2`, `a3`.
    pub unknown_identifier: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Value with its gradient in `(a1, a2, a3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vector3<f64>,
}

impl Dual {
    fn constant(value: f64) -> Self {
        Dual {
            value,
            grad: Vector3::zeros(),
        }
    }

    fn variable(value: f64, i: usize) -> Self {
        let mut grad = Vector3::zeros();
        grad[i] = 1.0;
        Dual { value, grad }
    }

    fn chain(self, value: f64, slope: f64) -> Self {
        Dual {
            value,
            grad: self.grad * slope,
        }
    }

    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    fn pow(self, exponent: Dual) -> Self {
        if exponent.grad == Vector3::zeros() {
            let n = exponent.value;
            if n == 0.0 {
                return Dual::constant(1.0);
            }
            let value = powf(self.value, n);
            let slope = n * powf(self.value, n - 1.0);
            return self.chain(value, slope);
        }
        // x^y = exp(y ln x), x > 0
        let value = self.value.powf(exponent.value);
        let ln = self.value.ln();
        Dual {
            value,
            grad: (exponent.grad * ln + self.grad * (exponent.value / self.value)) * value,
        }
    }
}

fn powf(x: f64, n: f64) -> f64 {
    if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
        x.powi(n as i32)
    } else {
        x.powf(n)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual {
            value: self.value + o.value,
            grad: self.grad + o.grad,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual {
            value: self.value - o.value,
            grad: self.grad - o.grad,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            value: self.value * o.value,
            grad: self.grad * o.value + o.grad * self.value,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual {
            value: self.value / o.value,
            grad: (self.grad * o.value - o.grad * self.value) / (o.value * o.value),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            grad: -self.grad,
        }
    }
}

impl Node {
    fn eval(&self, a: &Vector3<f64>) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(i) => a[*i],
            Node::Neg(x) => -x.eval(a),
            Node::Add(x, y) => x.eval(a) + y.eval(a),
            Node::Sub(x, y) => x.eval(a) - y.eval(a),
            Node::Mul(x, y) => x.eval(a) * y.eval(a),
            Node::Div(x, y) => x.eval(a) / y.eval(a),
            Node::Pow(x, y) => powf(x.eval(a), y.eval(a)),
            Node::Call(f, x) => {
                let v = x.eval(a);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    fn eval_dual(&self, a: &Vector3<f64>) -> Dual {
        match self {
            Node::Const(c) => Dual::constant(*c),
            Node::Var(i) => Dual::variable(a[*i], *i),
            Node::Neg(x) => -x.eval_dual(a),
            Node::Add(x, y) => x.eval_dual(a) + y.eval_dual(a),
            Node::Sub(x, y) => x.eval_dual(a) - y.eval_dual(a),
            Node::Mul(x, y) => x.eval_dual(a) * y.eval_dual(a),
            Node::Div(x, y) => x.eval_dual(a) / y.eval_dual(a),
            Node::Pow(x, y) => x.eval_dual(a).pow(y.eval_dual(a)),
            Node::Call(f, x) => {
                let d = x.eval_dual(a);
                match f {
                    Func::Sin => d.sin(),
                    Func::Cos => d.cos(),
                    Func::Exp => d.exp(),
                }
            }
        }
    }

    fn has_variables(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(_) => true,
            Node::Neg(x) | Node::Call(_, x) => x.has_variables(),
            Node::Add(x, y) | Node::Sub(x, y) | Node::Mul(x, y) | Node::Div(x, y) | Node::Pow(x, y) => {
                x.has_variables() || y.has_variables()
            }
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Arc<Node>,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({:?})", self.source)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, ExprError> {
        Expression::parse(s)
    }
}

impl Expression {
    pub fn parse(source: &str) -> Result<Expression, ExprError> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0, len: source.chars().count() };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(ExprError {
                column: t.column,
                message: format!("unexpected {}", t.kind.describe()),
                unknown_identifier: None,
            });
        }
        Ok(Expression {
            source: source.to_string(),
            root: Arc::new(root),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, a: &Vector3<f64>) -> f64 {
        self.root.eval(a)
    }

    pub fn eval_dual(&self, a: &Vector3<f64>) -> Dual {
        self.root.eval_dual(a)
    }

    pub fn gradient(&self, a: &Vector3<f64>) -> Vector3<f64> {
        self.eval_dual(a).grad
    }

    pub fn is_constant(&self) -> bool {
        !self.root.has_variables()
    }

    /// Wraps the expression as a field with its exact gradient.
    pub fn to_field(&self, name: impl Into<String>) -> SphereScalarField {
        let v = self.root.clone();
        let g = self.root.clone();
        SphereScalarField::new(name, move |a| v.eval(a)).with_gradient(move |a| g.eval_dual(a).grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(x) => format!("number {x}"),
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Op(c) => format!("'{c}'"),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = vec![];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ExprError {
                column,
                message: format!("malformed number '{text}'"),
                unknown_identifier: None,
            })?;
            out.push(Token {
                kind: TokenKind::Number(value),
                column,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(chars[start..i].iter().collect()),
                column,
            });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                _ => {
                    return Err(ExprError {
                        column,
                        message: format!("unexpected character '{c}'"),
                        unknown_identifier: None,
                    })
                }
            };
            out.push(Token { kind, column });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_error(&self) -> ExprError {
        ExprError {
            column: self.len + 1,
            message: "unexpected end of expression".into(),
            unknown_identifier: None,
        }
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c), ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let t = self.next().ok_or_else(|| self.end_error())?;
        match t.kind {
            TokenKind::Number(x) => Ok(Node::Const(x)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.close_paren(t.column)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let func = match name.as_str() {
                    "a1" => return Ok(Node::Var(0)),
                    "a2" => return Ok(Node::Var(1)),
                    "a3" => return Ok(Node::Var(2)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(ExprError {
                            column: t.column,
                            message: format!("unknown identifier '{name}' (variables are a1, a2, a3)"),
                            unknown_identifier: Some(name.to_string()),
                        })
                    }
                };
                match self.next() {
                    Some(Token {
                        kind: TokenKind::LParen,
                        column,
                    }) => {
                        let arg = self.expr()?;
                        self.close_paren(column)?;
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                    Some(other) => Err(ExprError {
                        column: other.column,
                        message: format!("expected '(' after '{name}'"),
                        unknown_identifier: None,
                    }),
                    None => Err(self.end_error()),
                }
            }
            other => Err(ExprError {
                column: t.column,
                message: format!("unexpected {}", other.describe()),
                unknown_identifier: None,
            }),
        }
    }

    fn close_paren(&mut self, open_column: usize) -> Result<(), ExprError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::RParen, ..
            }) => Ok(()),
            Some(t) => Err(ExprError {
                column: t.column,
                message: format!("expected ')' to close '(' at column {open_column}"),
                unknown_identifier: None,
            }),
            None => Err(ExprError {
                column: self.len + 1,
                message: format!("unclosed '(' at column {open_column}"),
                unknown_identifier: None,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn eval(s: &str, a: Vector3<f64>) -> f64 {
        Expression::parse(s).unwrap().eval(&a)
    }

    #[test]
    fn precedence_and_associativity() {
        let a = v(2.0, 3.0, 5.0);
        assert_eq!(eval("1 + 2 * 3", a), 7.0);
        assert_eq!(eval("(1 + 2) * 3", a), 9.0);
        assert_eq!(eval("-a1^2", a), -4.0);
        assert_eq!(eval("2^3^2", a), 512.0);
        assert_eq!(eval("a3 - a2 - a1", a), 0.0);
        assert_eq!(eval("a3 / a1 / 5", a), 0.5);
        assert_eq!(eval("2^-1", a), 0.5);
        assert_eq!(eval("1.5e1 + .5", a), 15.5);
        assert!((eval("sin(a1)^2 + cos(a1)^2", a) - 1.0).abs() < 1e-15);
        assert!((eval("exp(0)", a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expression::parse("a1 + * a2").unwrap_err();
        assert_eq!(e.column, 6);
        let e = Expression::parse("a4").unwrap_err();
        assert_eq!(e.column, 1);
        assert!(e.message.contains("unknown identifier"));
        let e = Expression::parse("(a1 + a2").unwrap_err();
        assert!(e.message.contains("unclosed"));
        let e = Expression::parse("sin a1").unwrap_err();
        assert_eq!(e.column, 5);
        let e = Expression::parse("a1 $ a2").unwrap_err();
        assert_eq!(e.column, 4);
        assert!(Expression::parse("").is_err());
        assert!(Expression::parse("a1 a2").is_err());
    }

    #[test]
    fn gradients_are_exact() {
        let e = Expression::parse("a1*a2^2 - sin(a3)*exp(a1) + a2/a3").unwrap();
        let a = v(0.3, -0.4, 0.5);
        let g = e.gradient(&a);
        let expected = v(
            a.y * a.y - a.z.sin() * a.x.exp(),
            2.0 * a.x * a.y + 1.0 / a.z,
            -a.z.cos() * a.x.exp() - a.y / (a.z * a.z),
        );
        assert!((g - expected).norm() < 1e-14);
        let p = Expression::parse("a1^a2").unwrap();
        let a = v(1.5, 0.7, 0.0);
        let g = p.gradient(&a);
        assert!((g.x - 0.7 * 1.5f64.powf(-0.3)).abs() < 1e-14);
        assert!((g.y - 1.5f64.powf(0.7) * 1.5f64.ln()).abs() < 1e-14);
        assert!(Expression::parse("2*3").unwrap().is_constant());
        assert!(!Expression::parse("0*a1").unwrap().is_constant());
    }

    #[test]
    fn field_wraps_gradient() {
        let f = Expression::parse("a3").unwrap().to_field("Pi");
        assert!(f.has_analytic_gradient());
        assert_eq!(f.gradient(&v(0.0, 0.6, 0.8)), v(0.0, 0.0, 1.0));
    }

    proptest! {
        #[test]
        fn dual_gradient_matches_finite_differences(
            c in prop::array::uniform4(-2.0f64..2.0),
            x in -0.9f64..0.9, y in -0.9f64..0.9, z in -0.9f64..0.9,
        ) {
            let src = format!(
                "{}*a1^3 + {}*a2*a3 - {}*sin(a1*a2) + {}*exp(a3)/(2 + a1^2)",
                c[0], c[1], c[2], c[3]
            );
            let e = Expression::parse(&src).unwrap();
            let a = v(x, y, z);
            let g = e.gradient(&a);
            let h = 1e-6;
            for i in 0..3 {
                let mut p = a; p[i] += h;
                let mut m = a; m[i] -= h;
                let fd = (e.eval(&p) - e.eval(&m)) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
            }
            let (d, f) = (e.eval_dual(&a).value, e.eval(&a));
            prop_assert!((d - f).abs() <= 1e-14 * (1.0 + f.abs()));
        }
    }
}
