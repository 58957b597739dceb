//! A minimal arithmetic language for densities such as `1/(1+4*(u^2+v^2))`.
//!
//! Expressions are parsed once into an immutable AST and then evaluated at
//! many points. Variables are the target-plane coordinates `u`, `v` and the
//! reference-square coordinates `x`, `y`; the only named constant is `pi`.

mod parser;

use std::fmt;

use thiserror::Error;

pub use parser::parse_density;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    V,
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Expression tree. Numeric literals produced by the parser are always
/// non-negative; negation is an explicit [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable bindings for one evaluation. Unset variables are unbound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl Point {
    pub fn uv(u: f64, v: f64) -> Self {
        Self { u: Some(u), v: Some(v), ..Self::default() }
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Self { x: Some(x), y: Some(y), ..Self::default() }
    }

    pub fn all(u: f64, v: f64, x: f64, y: f64) -> Self {
        Self { u: Some(u), v: Some(v), x: Some(x), y: Some(y) }
    }

    fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::U => self.u,
            Var::V => self.v,
            Var::X => self.x,
            Var::Y => self.y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: found {found}, expected one of {}", .expected.join(", "))]
    Syntax { offset: usize, found: String, expected: Vec<&'static str> },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("variable `{}` is not bound", .0.name())]
    UnboundVariable(Var),
    #[error("{op} produced a non-finite value")]
    NonFinite { op: &'static str },
}

/// A parsed density expression.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityExpr {
    root: Expr,
}

impl DensityExpr {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_density(text)
    }

    pub fn from_expr(root: Expr) -> Self {
        Self { root }
    }

    /// The constant expression `value` (must be finite and non-negative to
    /// print back as a literal).
    pub fn constant(value: f64) -> Self {
        Self { root: Expr::Num(value) }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn eval(&self, point: &Point) -> Result<f64, EvalError> {
        eval_expr(&self.root, point)
    }

    /// True if evaluation reads `var`.
    pub fn uses(&self, var: Var) -> bool {
        fn walk(e: &Expr, var: Var) -> bool {
            match e {
                Expr::Num(_) | Expr::Pi => false,
                Expr::Var(v) => *v == var,
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, var),
                Expr::Binary(_, a, b) => walk(a, var) || walk(b, var),
            }
        }
        walk(&self.root, var)
    }

    pub fn is_constant(&self) -> bool {
        [Var::U, Var::V, Var::X, Var::Y].iter().all(|v| !self.uses(*v))
    }
}

fn finite(value: f64, op: &'static str) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite { op })
    }
}

fn eval_expr(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    match e {
        Expr::Num(c) => Ok(*c),
        Expr::Pi => Ok(std::f64::consts::PI),
        Expr::Var(v) => p.get(*v).ok_or(EvalError::UnboundVariable(*v)),
        Expr::Neg(a) => Ok(-eval_expr(a, p)?),
        Expr::Binary(op, a, b) => {
            let a = eval_expr(a, p)?;
            let b = eval_expr(b, p)?;
            match op {
                BinOp::Add => finite(a + b, "+"),
                BinOp::Sub => finite(a - b, "-"),
                BinOp::Mul => finite(a * b, "*"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b, "/")
                    }
                }
                BinOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a.powf(b), "^")
                    }
                }
            }
        }
        Expr::Call(f, a) => {
            let a = eval_expr(a, p)?;
            match f {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Exp => finite(a.exp(), "exp"),
                Func::Abs => Ok(a.abs()),
                Func::Sqrt => {
                    if a < 0.0 {
                        Err(EvalError::SqrtOfNegative(a))
                    } else {
                        Ok(a.sqrt())
                    }
                }
            }
        }
    }
}

// Binding strength used by the printer; higher binds tighter.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
        Expr::Num(c) if c.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(c) => write!(f, "{c}"),
        Expr::Pi => write!(f, "pi"),
        Expr::Var(v) => write!(f, "{}", v.name()),
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_child(f, a, precedence(a) < 4)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Expr::Binary(op, a, b) => {
            let (left_parens, right_parens) = match op {
                BinOp::Add | BinOp::Sub => (precedence(a) < 1, precedence(b) <= 1),
                BinOp::Mul | BinOp::Div => (precedence(a) < 2, precedence(b) <= 2),
                BinOp::Pow => (precedence(a) < 5, precedence(b) < 3),
            };
            write_child(f, a, left_parens)?;
            write!(f, "{}", op.symbol())?;
            write_child(f, b, right_parens)
        }
    }
}

impl fmt::Display for DensityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.root)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
