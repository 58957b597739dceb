//! Shared fixtures for the parser tests and the acceptance run.

#![allow(dead_code)]

use drumlab::exprdsl::{BinOp, DensityExpr, Expr, Func, Point, Var};
use proptest::prelude::*;

/// Bindings used by [`PRECEDENCE_TABLE`].
pub const TABLE_POINT: (f64, f64, f64, f64) = (1.5, -0.5, 2.0, 3.0);

/// `(text, value at TABLE_POINT)` pairs, with the value spelled out in Rust.
pub fn precedence_table() -> Vec<(&'static str, f64)> {
    let (u, v, x, y) = TABLE_POINT;
    vec![
        ("x+y*u", x + y * u),
        ("x*y+u", x * y + u),
        ("x-y-u", (x - y) - u),
        ("x/y/u", (x / y) / u),
        ("x-y+u", (x - y) + u),
        ("x/y*u", (x / y) * u),
        ("x^y^u", x.powf(y.powf(u))),
        ("-x^2", -(x.powf(2.0))),
        ("x^-1", x.powf(-1.0)),
        ("2^-x^2", 2f64.powf(-(x.powf(2.0)))),
        ("-x*y", (-x) * y),
        ("x*-y", x * (-y)),
        ("x--y", x - (-y)),
        ("u*x^2", u * x.powf(2.0)),
        ("(x+y)*u", (x + y) * u),
        ("x+y/u-v", x + y / u - v),
        ("sin(x)^2", x.sin().powf(2.0)),
        ("-sqrt(x)", -x.sqrt()),
        ("2*u+v^2^3", 2.0 * u + v.powf(8.0)),
        ("pi*x", std::f64::consts::PI * x),
    ]
}

pub const MALFORMED: [&str; 26] = [
    "", "   ", "1/(", "(1", "1)", "1 +", "* 2", "1 ** 2", "--1", "1 2", "sin", "sin 1", "sin()", "foo(1)", "w",
    "1..2", "1e", "2^", "u v", "abs(1,2)", "1e999", "(", ")", "pi(1)", "x +* y", "3 $ 4",
];

pub fn table_value(text: &str) -> Result<f64, String> {
    let (u, v, x, y) = TABLE_POINT;
    let e = DensityExpr::parse(text).map_err(|e| e.to_string())?;
    e.eval(&Point::all(u, v, x, y)).map_err(|e| e.to_string())
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e3).prop_map(Expr::Num),
        (0u32..20).prop_map(|k| Expr::Num(f64::from(k))),
        (1e-8f64..1e-3).prop_map(Expr::Num),
        Just(Expr::Pi),
        prop_oneof![Just(Var::U), Just(Var::V), Just(Var::X), Just(Var::Y)].prop_map(Expr::Var),
    ]
}

/// Random expression trees of depth at most 6.
pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 64, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Sqrt), Just(Func::Abs)];
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

pub fn points() -> impl Strategy<Value = Vec<Point>> {
    proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 100)
        .prop_map(|v| v.into_iter().map(|(u, v, x, y)| Point::all(u, v, x, y)).collect())
}

/// Checks parse(print(e)) against `e` at every point and that a second
/// print/parse cycle is a fixed point.
pub fn check_round_trip(e: Expr, points: &[Point]) -> Result<(), String> {
    let original = DensityExpr::from_expr(e);
    let text = original.to_string();
    let parsed = DensityExpr::parse(&text).map_err(|err| format!("{text}: {err}"))?;
    let reparsed = DensityExpr::parse(&parsed.to_string()).map_err(|err| format!("{parsed}: {err}"))?;
    if parsed != reparsed {
        return Err(format!("{text} is not a print/parse fixed point"));
    }
    for p in points {
        let same = match (original.eval(p), parsed.eval(p)) {
            (Ok(a), Ok(b)) => a.to_bits() == b.to_bits(),
            (Err(a), Err(b)) => a == b,
            _ => false,
        };
        if !same {
            return Err(format!("{text} differs at {p:?}"));
        }
    }
    Ok(())
}
