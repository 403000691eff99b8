use std::fmt;

use super::Expr;
use crate::cxjet::Cx;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn const_level(c: &Cx) -> u8 {
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            UNARY
        } else {
            ATOM
        }
    } else if c.re == 0.0 && c.im.is_sign_negative() {
        UNARY
    } else {
        ATOM
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) => SUM,
        Expr::Mul(..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::PowInt(..) => POWER,
        Expr::Const(c) => const_level(c),
        _ => ATOM,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: &Cx) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{:?}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{:?}i", c.im)
    } else if c.im.is_sign_negative() {
        write!(f, "({:?}-{:?}i)", c.re, -c.im)
    } else {
        write!(f, "({:?}+{:?}i)", c.re, c.im)
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr) -> fmt::Result {
    write!(f, "{name}(")?;
    write_expr(f, a)?;
    f.write_str(")")
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var(j) => write!(f, "z{}", j + 1),
        Expr::Const(c) => write_const(f, c),
        Expr::Add(a, b) => {
            write_at(f, a, SUM)?;
            match b.as_ref() {
                Expr::Neg(x) => {
                    f.write_str(" - ")?;
                    write_at(f, x, PRODUCT)
                }
                _ => {
                    f.write_str(" + ")?;
                    write_at(f, b, PRODUCT)
                }
            }
        }
        Expr::Mul(a, b) => {
            write_at(f, a, PRODUCT)?;
            f.write_str("*")?;
            write_at(f, b, UNARY)
        }
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_at(f, a, UNARY)
        }
        Expr::PowInt(a, k) => {
            write_at(f, a, ATOM)?;
            write!(f, "^{k}")
        }
        Expr::Exp(a) => write_call(f, "exp", a),
        Expr::Sin(a) => write_call(f, "sin", a),
        Expr::Cos(a) => write_call(f, "cos", a),
        Expr::Sinh(a) => write_call(f, "sinh", a),
        Expr::Cosh(a) => write_call(f, "cosh", a),
    }
}

/// Prints in the textual grammar accepted by [`super::parse_expr`], with
/// constants at full round-trip precision.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
