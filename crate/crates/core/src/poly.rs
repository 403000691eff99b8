//! Left-hand forms `H`, right-hand polynomials `P`, and an Aberth–Ehrlich
//! root finder.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxjet::{cx_pow_int, Cx, Jet, JetError, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("root finder did not converge after {sweeps} sweeps (last update {last_update:e})")]
    NoConvergence { sweeps: usize, last_update: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// One term `coeff · Π x_j^{exponents_j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: Cx,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// The left side `H` of `H(u_{z1}, …, u_{zn}) = P(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaringForm {
    /// Σ_j x_j^{ℓ_j}; exponents may differ.
    Diagonal(Vec<u32>),
    /// Homogeneous sparse polynomial of total degree ℓ.
    Monomials(Vec<Monomial>),
}

impl WaringForm {
    pub fn diagonal(exponents: Vec<u32>) -> Result<Self, PolyError> {
        let f = WaringForm::Diagonal(exponents);
        f.validate()?;
        Ok(f)
    }

    pub fn uniform(n: usize, ell: u32) -> Result<Self, PolyError> {
        Self::diagonal(vec![ell; n])
    }

    pub fn monomials(terms: Vec<Monomial>) -> Result<Self, PolyError> {
        let f = WaringForm::Monomials(terms);
        f.validate()?;
        Ok(f)
    }

    /// (ρ₁x₁ + ⋯ + ρ_nx_n)^ℓ expanded into monomials.
    pub fn linear_power(rho: &[Cx], ell: u32) -> Result<Self, PolyError> {
        if rho.is_empty() || ell == 0 {
            return Err(PolyError::InvalidForm(
                "linear power needs n ≥ 1 and ℓ ≥ 1".into(),
            ));
        }
        let n = rho.len();
        let mut terms = Vec::new();
        let mut exps = vec![0u32; n];
        compositions(ell, 0, &mut exps, &mut |e| {
            let mut coeff = Cx::from(multinomial(ell, e));
            for (r, &k) in rho.iter().zip(e) {
                coeff *= cx_pow_int(*r, k);
            }
            if coeff != ZERO {
                terms.push(Monomial {
                    coeff,
                    exponents: e.to_vec(),
                });
            }
        });
        if terms.is_empty() {
            return Err(PolyError::InvalidForm("ρ is identically zero".into()));
        }
        Self::monomials(terms)
    }

    pub fn validate(&self) -> Result<(), PolyError> {
        match self {
            WaringForm::Diagonal(e) => {
                if e.is_empty() {
                    return Err(PolyError::InvalidForm("empty exponent list".into()));
                }
                if e.contains(&0) {
                    return Err(PolyError::InvalidForm(
                        "diagonal exponents must be ≥ 1".into(),
                    ));
                }
            }
            WaringForm::Monomials(terms) => {
                let first = terms
                    .first()
                    .ok_or_else(|| PolyError::InvalidForm("no monomials".into()))?;
                let n = first.exponents.len();
                let deg = first.degree();
                if n == 0 || deg == 0 {
                    return Err(PolyError::InvalidForm(
                        "monomials need n ≥ 1 and degree ≥ 1".into(),
                    ));
                }
                for t in terms {
                    if t.exponents.len() != n {
                        return Err(PolyError::InvalidForm(
                            "monomials disagree on the number of variables".into(),
                        ));
                    }
                    if t.degree() != deg {
                        return Err(PolyError::InvalidForm(format!(
                            "form is not homogeneous: degrees {deg} and {}",
                            t.degree()
                        )));
                    }
                    if !crate::cxjet::is_finite(t.coeff) {
                        return Err(PolyError::InvalidForm("non-finite coefficient".into()));
                    }
                }
                if terms.iter().all(|t| t.coeff == ZERO) {
                    return Err(PolyError::InvalidForm("trivial form".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            WaringForm::Diagonal(e) => e.len(),
            WaringForm::Monomials(t) => t.first().map_or(0, |m| m.exponents.len()),
        }
    }

    /// Total degree ℓ when the form is homogeneous.
    pub fn degree(&self) -> Option<u32> {
        match self {
            WaringForm::Diagonal(e) => {
                let first = *e.first()?;
                e.iter().all(|&l| l == first).then_some(first)
            }
            WaringForm::Monomials(t) => t.first().map(Monomial::degree),
        }
    }

    pub fn max_degree(&self) -> u32 {
        match self {
            WaringForm::Diagonal(e) => e.iter().copied().max().unwrap_or(0),
            WaringForm::Monomials(t) => t.first().map_or(0, Monomial::degree),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree().is_some()
    }

    /// Sparse equivalent of a diagonal form.
    pub fn to_monomials(&self) -> Vec<Monomial> {
        match self {
            WaringForm::Diagonal(e) => e
                .iter()
                .enumerate()
                .map(|(j, &l)| {
                    let mut exponents = vec![0; e.len()];
                    exponents[j] = l;
                    Monomial {
                        coeff: ONE,
                        exponents,
                    }
                })
                .collect(),
            WaringForm::Monomials(t) => t.clone(),
        }
    }

    /// H evaluated in jet arithmetic.
    pub fn eval(&self, x: &[Jet]) -> Result<Jet, PolyError> {
        let n = self.dim();
        if x.len() != n {
            return Err(JetError::DimensionMismatch {
                left: n,
                right: x.len(),
            }
            .into());
        }
        let dim = x[0].dim();
        let mut acc = Jet::constant(ZERO, dim);
        match self {
            WaringForm::Diagonal(e) => {
                for (xj, &l) in x.iter().zip(e) {
                    acc = acc.add(&xj.pow_int(l))?;
                }
            }
            WaringForm::Monomials(terms) => {
                for t in terms {
                    let mut term = Jet::constant(t.coeff, dim);
                    for (xj, &k) in x.iter().zip(&t.exponents) {
                        if k > 0 {
                            term = term.mul(&xj.pow_int(k))?;
                        }
                    }
                    acc = acc.add(&term)?;
                }
            }
        }
        Ok(acc)
    }

    pub fn eval_cx(&self, x: &[Cx]) -> Result<Cx, PolyError> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v, 0)).collect();
        Ok(self.eval(&jets)?.value())
    }

    /// ∇H at `x`.
    pub fn gradient(&self, x: &[Cx]) -> Result<Vec<Cx>, PolyError> {
        let n = x.len();
        let jets: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| Jet::var(j, v, n))
            .collect::<Result<_, _>>()?;
        Ok(self.eval(&jets)?.gradient().to_vec())
    }
}

fn compositions(total: u32, idx: usize, exps: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    let n = exps.len();
    if idx == n - 1 {
        exps[idx] = total;
        f(exps);
        return;
    }
    for k in (0..=total).rev() {
        exps[idx] = k;
        compositions(total - k, idx + 1, exps, f);
    }
}

fn multinomial(total: u32, parts: &[u32]) -> f64 {
    let mut acc = 1.0;
    let mut remaining = total;
    for &k in parts {
        acc *= binomial(remaining, k);
        remaining -= k;
    }
    acc
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A root of `P` with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Root {
    pub value: Cx,
    pub mult: u32,
}

/// `P(w) = leading · Π (w − root)^mult`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniPoly {
    pub leading: Cx,
    #[serde(default)]
    pub roots: Vec<Root>,
}

impl UniPoly {
    pub fn new(leading: Cx, roots: Vec<Root>) -> Result<Self, PolyError> {
        let p = UniPoly { leading, roots };
        p.validate()?;
        Ok(p)
    }

    /// Requires every root to be simple and pairwise distinct.
    pub fn with_distinct_roots(leading: Cx, roots: &[Cx]) -> Result<Self, PolyError> {
        for (i, a) in roots.iter().enumerate() {
            if roots[..i].contains(a) {
                return Err(PolyError::InvalidPoly(format!("repeated root {a}")));
            }
        }
        Self::new(
            leading,
            roots.iter().map(|&value| Root { value, mult: 1 }).collect(),
        )
    }

    pub fn constant(c0: Cx) -> Result<Self, PolyError> {
        Self::new(c0, Vec::new())
    }

    /// `c0 · (w − a)^k`.
    pub fn shifted_power(c0: Cx, a: Cx, k: u32) -> Result<Self, PolyError> {
        if k == 0 {
            return Self::constant(c0);
        }
        Self::new(c0, vec![Root { value: a, mult: k }])
    }

    /// `w^k`.
    pub fn power(k: u32) -> Self {
        Self::shifted_power(ONE, ZERO, k).expect("monic power is valid")
    }

    pub fn validate(&self) -> Result<(), PolyError> {
        if self.leading == ZERO {
            return Err(PolyError::ZeroLeading);
        }
        if !crate::cxjet::is_finite(self.leading) {
            return Err(PolyError::InvalidPoly(
                "non-finite leading coefficient".into(),
            ));
        }
        if self.roots.iter().any(|r| r.mult == 0) {
            return Err(PolyError::InvalidPoly(
                "root multiplicity must be ≥ 1".into(),
            ));
        }
        if self.roots.iter().any(|r| !crate::cxjet::is_finite(r.value)) {
            return Err(PolyError::InvalidPoly("non-finite root".into()));
        }
        Ok(())
    }

    pub fn degree(&self) -> u32 {
        self.roots.iter().map(|r| r.mult).sum()
    }

    pub fn has_distinct_roots(&self) -> bool {
        self.roots.iter().all(|r| r.mult == 1)
            && self
                .roots
                .iter()
                .enumerate()
                .all(|(i, a)| self.roots[..i].iter().all(|b| b.value != a.value))
    }

    /// `Some(ħ)` when `P(w) = w^ħ`.
    pub fn as_monic_power(&self) -> Option<u32> {
        if self.leading != ONE {
            return None;
        }
        match self.roots.as_slice() {
            [] => Some(0),
            [r] if r.value == ZERO => Some(r.mult),
            _ => None,
        }
    }

    pub fn eval(&self, w: &Jet) -> Jet {
        let mut acc = Jet::constant(self.leading, w.dim());
        for r in &self.roots {
            let factor = w.add_const(-r.value).pow_int(r.mult);
            acc = acc.mul_unchecked(&factor);
        }
        acc
    }

    pub fn eval_cx(&self, w: Cx) -> Cx {
        self.eval(&Jet::constant(w, 0)).value()
    }

    /// (P(w), P′(w)).
    pub fn eval_with_derivative(&self, w: Cx) -> (Cx, Cx) {
        let j = self.eval(&Jet::new(w, vec![ONE]));
        (j.value(), j.gradient()[0])
    }

    /// Expanded coefficients, ascending degree.
    pub fn coefficients(&self) -> Vec<Cx> {
        let mut c = vec![self.leading];
        for r in &self.roots {
            for _ in 0..r.mult {
                c = mul_linear(&c, r.value);
            }
        }
        c
    }
}

/// Multiplies ascending coefficients by (w − a).
fn mul_linear(c: &[Cx], a: Cx) -> Vec<Cx> {
    let mut out = vec![ZERO; c.len() + 1];
    for (k, &ck) in c.iter().enumerate() {
        out[k + 1] += ck;
        out[k] -= a * ck;
    }
    out
}

/// Coefficients (ascending) of `leading · Π (w − r_k)`.
pub fn expand_roots(leading: Cx, roots: &[Cx]) -> Vec<Cx> {
    roots
        .iter()
        .fold(vec![leading], |acc, &r| mul_linear(&acc, r))
}

/// Horner evaluation of value and first derivative.
pub fn horner(coeffs: &[Cx], z: Cx) -> (Cx, Cx) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

const ABERTH_TOL: f64 = 1e-13;
const ABERTH_SWEEPS: usize = 200;

/// All complex roots of the polynomial with ascending coefficients `coeffs`,
/// sorted lexicographically by (re, im).
pub fn find_roots(coeffs: &[Cx]) -> Result<Vec<Cx>, PolyError> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Err(PolyError::InvalidPoly("degree must be ≥ 1".into()));
    }
    let lead = coeffs[deg];
    if lead == ZERO {
        return Err(PolyError::ZeroLeading);
    }
    if coeffs.iter().any(|c| !crate::cxjet::is_finite(*c)) {
        return Err(PolyError::InvalidPoly("non-finite coefficient".into()));
    }
    if deg == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }

    let radius = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    let mut z: Vec<Cx> = (0..deg)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Cx::from_polar(radius, theta)
        })
        .collect();

    let moduli: Vec<Cx> = coeffs.iter().map(|c| Cx::new(c.norm(), 0.0)).collect();
    // |p(z)| at the rounding level of the evaluation itself
    let at_noise = |w: Cx, p: Cx| {
        let bound = horner(&moduli, Cx::new(w.norm(), 0.0)).0.re;
        p.norm() <= 8.0 * (deg as f64) * f64::EPSILON * bound
    };
    let mut converged = false;
    let mut last = f64::INFINITY;
    for _ in 0..ABERTH_SWEEPS {
        let mut max_step: f64 = 0.0;
        let mut settled = 0;
        let snapshot = z.clone();
        for i in 0..deg {
            let (p, dp) = horner(coeffs, snapshot[i]);
            if at_noise(snapshot[i], p) {
                settled += 1;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Cx = snapshot
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| (snapshot[i] - zj).inv())
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if crate::cxjet::is_finite(step) {
                z[i] = snapshot[i] - step;
                max_step = max_step.max(step.norm() / snapshot[i].norm().max(1.0));
            }
        }
        last = max_step;
        if max_step < ABERTH_TOL || settled == deg {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PolyError::NoConvergence {
            sweeps: ABERTH_SWEEPS,
            last_update: last,
        });
    }

    // one Newton polish per root
    for r in z.iter_mut() {
        let (p, dp) = horner(coeffs, *r);
        if dp != ZERO {
            let step = p / dp;
            if crate::cxjet::is_finite(step) {
                *r -= step;
            }
        }
    }
    z.sort_by(cmp_lex);
    Ok(z)
}

pub fn cmp_lex(a: &Cx, b: &Cx) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}
