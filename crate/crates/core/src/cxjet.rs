//! Complex scalars and first-order jets over ℂⁿ.
//!
//! A [`Jet`] carries a value together with its gradient with respect to the
//! `n` ambient coordinates. All residual checks in the crate differentiate
//! through jets, so the arithmetic here is the single source of derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Cx = Complex64;

pub const ZERO: Cx = Cx::new(0.0, 0.0);
pub const ONE: Cx = Cx::new(1.0, 0.0);
pub const I: Cx = Cx::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("non-finite complex component ({re}, {im})")]
    NonFinite { re: f64, im: f64 },
}

/// Builds a complex number, rejecting NaN and infinite parts.
pub fn checked_cx(re: f64, im: f64) -> Result<Cx, JetError> {
    if re.is_finite() && im.is_finite() {
        Ok(Cx::new(re, im))
    } else {
        Err(JetError::NonFinite { re, im })
    }
}

pub fn is_finite(z: Cx) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Integer power by repeated squaring. Shared by the value and jet paths so
/// that both produce bit-identical values.
pub fn cx_pow_int(base: Cx, k: u32) -> Cx {
    let mut acc = ONE;
    let mut sq = base;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= sq;
        }
        e >>= 1;
        if e > 0 {
            sq = sq * sq;
        }
    }
    acc
}

/// Built-in analytic functions admitted in jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analytic {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Log,
}

impl Analytic {
    pub fn name(self) -> &'static str {
        match self {
            Analytic::Exp => "exp",
            Analytic::Sin => "sin",
            Analytic::Cos => "cos",
            Analytic::Sinh => "sinh",
            Analytic::Cosh => "cosh",
            Analytic::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Analytic::Exp,
            "sin" => Analytic::Sin,
            "cos" => Analytic::Cos,
            "sinh" => Analytic::Sinh,
            "cosh" => Analytic::Cosh,
            "log" => Analytic::Log,
            _ => return None,
        })
    }

    /// φ(z). Log is the principal branch.
    pub fn apply(self, z: Cx) -> Cx {
        match self {
            Analytic::Exp => z.exp(),
            Analytic::Sin => z.sin(),
            Analytic::Cos => z.cos(),
            Analytic::Sinh => z.sinh(),
            Analytic::Cosh => z.cosh(),
            Analytic::Log => z.ln(),
        }
    }

    /// φ′(z).
    pub fn derivative(self, z: Cx) -> Cx {
        match self {
            Analytic::Exp => z.exp(),
            Analytic::Sin => z.cos(),
            Analytic::Cos => -z.sin(),
            Analytic::Sinh => z.cosh(),
            Analytic::Cosh => z.sinh(),
            Analytic::Log => z.inv(),
        }
    }
}

/// Value plus gradient over ℂⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    value: Cx,
    grad: Vec<Cx>,
}

impl Jet {
    pub fn new(value: Cx, grad: Vec<Cx>) -> Self {
        Jet { value, grad }
    }

    pub fn constant(value: Cx, n: usize) -> Self {
        Jet {
            value,
            grad: vec![ZERO; n],
        }
    }

    /// The j-th coordinate function evaluated at `value`.
    pub fn var(j: usize, value: Cx, n: usize) -> Result<Self, JetError> {
        if j >= n {
            return Err(JetError::IndexOutOfRange { index: j, dim: n });
        }
        let mut grad = vec![ZERO; n];
        grad[j] = ONE;
        Ok(Jet { value, grad })
    }

    pub fn value(&self) -> Cx {
        self.value
    }

    pub fn gradient(&self) -> &[Cx] {
        &self.grad
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn check_dim(&self, other: &Jet) -> Result<(), JetError> {
        if self.dim() != other.dim() {
            Err(JetError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_dim(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_dim(other)?;
        Ok(self.add_unchecked(&other.neg()))
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_dim(other)?;
        Ok(self.mul_unchecked(&other.recip()?))
    }

    pub fn neg(&self) -> Jet {
        Jet {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
        }
    }

    pub fn scale(&self, c: Cx) -> Jet {
        Jet {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
        }
    }

    pub fn add_const(&self, c: Cx) -> Jet {
        Jet {
            value: self.value + c,
            grad: self.grad.clone(),
        }
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        if self.value == ZERO {
            return Err(JetError::Domain("reciprocal of zero"));
        }
        let inv = self.value.inv();
        let d = -(inv * inv);
        Ok(Jet {
            value: inv,
            grad: self.grad.iter().map(|g| d * g).collect(),
        })
    }

    pub fn pow_int(&self, k: u32) -> Jet {
        if k == 0 {
            return Jet::constant(ONE, self.dim());
        }
        let value = cx_pow_int(self.value, k);
        let d = Cx::from(k as f64) * cx_pow_int(self.value, k - 1);
        Jet {
            value,
            grad: self.grad.iter().map(|g| d * g).collect(),
        }
    }

    pub fn analytic(&self, f: Analytic) -> Result<Jet, JetError> {
        if f == Analytic::Log && self.value == ZERO {
            return Err(JetError::Domain("log of zero"));
        }
        Ok(self.analytic_unchecked(f))
    }

    pub(crate) fn add_unchecked(&self, other: &Jet) -> Jet {
        Jet {
            value: self.value + other.value,
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Jet) -> Jet {
        let (a, b) = (self.value, other.value);
        Jet {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
        }
    }

    pub(crate) fn analytic_unchecked(&self, f: Analytic) -> Jet {
        let d = f.derivative(self.value);
        Jet {
            value: f.apply(self.value),
            grad: self.grad.iter().map(|g| d * g).collect(),
        }
    }
}

/// Arithmetic shared by plain complex evaluation and jet evaluation, so an
/// expression tree has one evaluator for both.
pub trait Scalar: Clone {
    fn lift(c: Cx, dim: usize) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negate(&self) -> Self;
    fn powi(&self, k: u32) -> Self;
    fn apply(&self, f: Analytic) -> Self;
    fn value(&self) -> Cx;
}

impl Scalar for Cx {
    fn lift(c: Cx, _dim: usize) -> Self {
        c
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negate(&self) -> Self {
        -self
    }
    fn powi(&self, k: u32) -> Self {
        cx_pow_int(*self, k)
    }
    fn apply(&self, f: Analytic) -> Self {
        f.apply(*self)
    }
    fn value(&self) -> Cx {
        *self
    }
}

impl Scalar for Jet {
    fn lift(c: Cx, dim: usize) -> Self {
        Jet::constant(c, dim)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add_unchecked(other)
    }
    fn times(&self, other: &Self) -> Self {
        self.mul_unchecked(other)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn powi(&self, k: u32) -> Self {
        self.pow_int(k)
    }
    fn apply(&self, f: Analytic) -> Self {
        self.analytic_unchecked(f)
    }
    fn value(&self) -> Cx {
        self.value
    }
}
