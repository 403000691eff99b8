//! Expression trees for entire functions of several complex variables.
//!
//! The tree has no division and no fractional powers, so every expression
//! denotes an entire function. Values and jets are produced by one generic
//! evaluator ([`Expr::eval`]), which keeps `eval_jet(e, z).value()` identical
//! to `eval_value(e, z)` bit for bit.

mod parse;
mod print;

pub use parse::{parse_expr, ParseError};

use std::ops;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cxjet::{Analytic, Cx, Jet, JetError, Scalar, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(usize),
    Const(Cx),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    PowInt(Box<Expr>, u32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sinh(Box<Expr>),
    Cosh(Box<Expr>),
}

impl Expr {
    pub fn var(j: usize) -> Expr {
        Expr::Var(j)
    }

    pub fn constant(c: Cx) -> Expr {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Expr {
        Expr::Const(Cx::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::Const(ZERO)
    }

    pub fn one() -> Expr {
        Expr::Const(ONE)
    }

    pub fn pow(self, k: u32) -> Expr {
        Expr::PowInt(Box::new(self), k)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn sinh(self) -> Expr {
        Expr::Sinh(Box::new(self))
    }

    pub fn cosh(self) -> Expr {
        Expr::Cosh(Box::new(self))
    }

    /// Wraps `self` in the analytic function `f`. `Log` is rejected since the
    /// tree only holds entire functions.
    pub fn apply(self, f: Analytic) -> Option<Expr> {
        let b = Box::new(self);
        Some(match f {
            Analytic::Exp => Expr::Exp(b),
            Analytic::Sin => Expr::Sin(b),
            Analytic::Cos => Expr::Cos(b),
            Analytic::Sinh => Expr::Sinh(b),
            Analytic::Cosh => Expr::Cosh(b),
            Analytic::Log => return None,
        })
    }

    /// Linear form Σ coeffs_j · z_j.
    pub fn linear(coeffs: &[Cx]) -> Expr {
        let mut terms = coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| Expr::Const(c) * Expr::Var(j));
        let first = terms.next().unwrap_or_else(Expr::zero);
        terms.fold(first, |acc, t| acc + t)
    }

    /// Smallest dimension this expression can be evaluated in.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Var(j) => j + 1,
            Expr::Const(_) => 0,
            Expr::Add(a, b) | Expr::Mul(a, b) => a.arity().max(b.arity()),
            Expr::Neg(a)
            | Expr::PowInt(a, _)
            | Expr::Exp(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Sinh(a)
            | Expr::Cosh(a) => a.arity(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Add(a, b) | Expr::Mul(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Neg(a)
            | Expr::PowInt(a, _)
            | Expr::Exp(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Sinh(a)
            | Expr::Cosh(a) => 1 + a.depth(),
        }
    }

    /// Errors unless every variable index is below `n`.
    pub fn check_dim(&self, n: usize) -> Result<(), JetError> {
        let a = self.arity();
        if a > n {
            Err(JetError::DimensionMismatch { left: a, right: n })
        } else {
            Ok(())
        }
    }

    pub fn eval_value(&self, z: &[Cx]) -> Result<Cx, JetError> {
        self.check_dim(z.len())?;
        Ok(self.eval(z, 0))
    }

    pub fn eval_jet(&self, z: &[Cx]) -> Result<Jet, JetError> {
        self.check_dim(z.len())?;
        let n = z.len();
        let vars: Vec<Jet> = z
            .iter()
            .enumerate()
            .map(|(j, &v)| Jet::var(j, v, n))
            .collect::<Result<_, _>>()?;
        Ok(self.eval(&vars, n))
    }

    /// Generic evaluator over any [`Scalar`]; `vars` must cover the arity.
    pub fn eval<S: Scalar>(&self, vars: &[S], dim: usize) -> S {
        match self {
            Expr::Var(j) => vars[*j].clone(),
            Expr::Const(c) => S::lift(*c, dim),
            Expr::Add(a, b) => a.eval(vars, dim).plus(&b.eval(vars, dim)),
            Expr::Mul(a, b) => a.eval(vars, dim).times(&b.eval(vars, dim)),
            Expr::Neg(a) => a.eval(vars, dim).negate(),
            Expr::PowInt(a, k) => a.eval(vars, dim).powi(*k),
            Expr::Exp(a) => a.eval(vars, dim).apply(Analytic::Exp),
            Expr::Sin(a) => a.eval(vars, dim).apply(Analytic::Sin),
            Expr::Cos(a) => a.eval(vars, dim).apply(Analytic::Cos),
            Expr::Sinh(a) => a.eval(vars, dim).apply(Analytic::Sinh),
            Expr::Cosh(a) => a.eval(vars, dim).apply(Analytic::Cosh),
        }
    }

    /// Composition: replaces `Var(k)` by `bindings[k]`.
    pub fn substitute(&self, bindings: &[Expr]) -> Result<Expr, JetError> {
        self.check_dim(bindings.len())?;
        Ok(self.subst(bindings))
    }

    fn subst(&self, b: &[Expr]) -> Expr {
        let un = |a: &Expr, f: fn(Box<Expr>) -> Expr| f(Box::new(a.subst(b)));
        match self {
            Expr::Var(j) => b[*j].clone(),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Add(x, y) => Expr::Add(Box::new(x.subst(b)), Box::new(y.subst(b))),
            Expr::Mul(x, y) => Expr::Mul(Box::new(x.subst(b)), Box::new(y.subst(b))),
            Expr::Neg(a) => un(a, Expr::Neg),
            Expr::PowInt(a, k) => Expr::PowInt(Box::new(a.subst(b)), *k),
            Expr::Exp(a) => un(a, Expr::Exp),
            Expr::Sin(a) => un(a, Expr::Sin),
            Expr::Cos(a) => un(a, Expr::Cos),
            Expr::Sinh(a) => un(a, Expr::Sinh),
            Expr::Cosh(a) => un(a, Expr::Cosh),
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(Expr::Neg(Box::new(rhs))))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Expressions serialize as their textual form.
impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse::parse_serialized(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn eval_basic() {
        let e = Expr::var(0) + Expr::var(1);
        assert_eq!(
            e.eval_value(&[c(1.0, 0.0), c(2.0, 0.0)]).unwrap(),
            c(3.0, 0.0)
        );

        let k = Expr::zero().cosh();
        assert_eq!(k.eval_value(&[]).unwrap(), ONE);
        assert_eq!(k.eval_value(&[c(5.0, 1.0)]).unwrap(), ONE);

        let euler = (Expr::constant(c(0.0, 1.0)) * Expr::var(0)).exp();
        let v = euler.eval_value(&[c(PI, 0.0)]).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn eval_rejects_short_points() {
        let e = Expr::var(2);
        assert!(matches!(
            e.eval_value(&[ONE, ONE]),
            Err(JetError::DimensionMismatch { .. })
        ));
        assert!(e.eval_jet(&[ONE]).is_err());
    }

    #[test]
    fn jet_gradients() {
        let sq = Expr::var(0).pow(2);
        let j = sq.eval_jet(&[c(3.0, 0.0)]).unwrap();
        assert_eq!(j.value(), c(9.0, 0.0));
        assert_eq!(j.gradient(), &[c(6.0, 0.0)]);

        let sigma = [c(2.0 / 7.0, 0.0), c(3.0 / 7.0, 0.0), c(6.0 / 7.0, 0.0)];
        let lin = Expr::linear(&sigma);
        let j = lin
            .eval_jet(&[c(1.0, 2.0), c(-0.5, 0.1), c(0.0, -3.0)])
            .unwrap();
        for (g, s) in j.gradient().iter().zip(&sigma) {
            assert!((g - s).norm() < 1e-15);
        }

        let sh = Expr::var(0).sinh();
        let j = sh.eval_jet(&[ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(j.value(), ZERO);
        assert_eq!(j.gradient(), &[ONE, ZERO, ZERO]);
    }

    #[test]
    fn substitution_composes() {
        let sq = Expr::var(0).pow(2);
        let comp = sq.substitute(&[Expr::var(0) + Expr::var(1)]).unwrap();
        assert_eq!(comp.eval_value(&[ONE, c(2.0, 0.0)]).unwrap(), c(9.0, 0.0));

        // exp(σ·z): gradient σ_j exp(σ·z)
        let sigma = [c(0.5, 0.0), c(0.0, 1.0)];
        let g = Expr::linear(&sigma);
        let comp = Expr::var(0).exp().substitute(&[g]).unwrap();
        let z = [c(0.3, -0.2), c(1.1, 0.4)];
        let jet = comp.eval_jet(&z).unwrap();
        let e = (sigma[0] * z[0] + sigma[1] * z[1]).exp();
        for (gj, s) in jet.gradient().iter().zip(&sigma) {
            assert!((gj - s * e).norm() < 1e-14);
        }

        assert!(Expr::var(1).substitute(&[Expr::var(0)]).is_err());
    }

    #[test]
    fn value_and_jet_paths_agree_exactly() {
        let e = (Expr::var(0) * Expr::var(1).sin() + Expr::constant(c(0.2, -1.0)))
            .pow(3)
            .cosh();
        let z = [c(0.4, 0.9), c(-1.2, 0.3)];
        assert_eq!(e.eval_value(&z).unwrap(), e.eval_jet(&z).unwrap().value());
    }
}
