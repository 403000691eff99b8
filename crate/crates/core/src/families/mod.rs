//! Closed-form entire solution families.
//!
//! Linear-operator families solve `(ρ·∇u)^ℓ = p(u)`; Waring families solve
//! `Σ u_{zj}^{ℓ_j} = u^ħ`. Each constructor returns the candidate `u`, the
//! PDE instance it should satisfy, and the constraints a verifier has to
//! check. Scalar constraints are evaluated at construction; sampled ones are
//! plain data evaluated pointwise by [`SampledCheck::residual`].

mod examples;
mod null;
mod phi;

pub use examples::{
    cubic_direction_a, cubic_envelope, cubic_linear, cubic_real_root, cubic_roots,
    isotropic_envelope, isotropic_linear, mixed_linear, CUBIC_COEFFS,
};
pub use null::{
    eliminate_linear, null_power_residuals, solve_null_direction, unweighted_power_sums,
    LinearElimination, NullCandidate,
};
pub use phi::{make_phi, PhiSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxjet::{cx_pow_int, Cx, JetError, ONE, ZERO};
use crate::expr::Expr;
use crate::poly::{PolyError, Root, UniPoly, WaringForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("invalid Φ: {0}")]
    Phi(String),
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}")]
    Structure(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("precondition `{name}` violated: residual {residual:e} exceeds {tolerance:e}")]
    PreconditionViolated {
        name: String,
        residual: f64,
        tolerance: f64,
    },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Parameters shared by the four `(ρ·∇u)^ℓ = p(u)` families.
///
/// `root` is a caller-chosen ℓ-th root of `c0`; it is checked, never computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearOpParams {
    pub rho: Vec<Cx>,
    pub sigma: Vec<Cx>,
    pub ell: u32,
    pub c0: Cx,
    pub root: Cx,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearNullParams {
    /// Exponents ℓ_j; they may differ from one another.
    pub exponents: Vec<u32>,
    pub sigma: Vec<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaboloidParams {
    pub c: Vec<Cx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    pub ell: u32,
    pub hbar: u32,
    pub sigma: Vec<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeParams {
    pub ell: u32,
    pub sigma: Vec<Cx>,
    pub psi: PhiSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectParams {
    pub u: Expr,
    pub form: WaringForm,
    pub rhs: UniPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// u = r(σ·z) + Φ, p ≡ c₀.
    T3Case1(LinearOpParams),
    /// u = ((1/k) r(σ·z) + Φ)^k + a₁ with k = ℓ/(ℓ−ħ), p = c₀(w−a₁)^ħ.
    T3Case2(LinearOpParams),
    /// u = Φ e^{r(σ·z)} + a₁, p = c₀(w−a₁)^ℓ.
    T3Case3(LinearOpParams),
    /// u = ((a₁−a₂)/2) cosh(r(σ·z) + Φ) + (a₁+a₂)/2, ℓ even.
    T3Case4(LinearOpParams),
    /// u = σ·z + Φ, right side 1.
    T8Case1(LinearNullParams),
    /// u = Σ (z_j/2 + c_j)², ℓ = 2, right side u.
    T8Case2(ParaboloidParams),
    /// u = ((1/k)σ·z + Φ)^k with k = ℓ/(ℓ−ħ), right side u^ħ.
    T8Case3(PowerParams),
    /// u = Ψ e^{σ·z}, right side u^ℓ.
    T8Case4(EnvelopeParams),
    /// A verbatim candidate with its instance.
    Direct(DirectParams),
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::T3Case1(_) => "t3_case1",
            FamilyKind::T3Case2(_) => "t3_case2",
            FamilyKind::T3Case3(_) => "t3_case3",
            FamilyKind::T3Case4(_) => "t3_case4",
            FamilyKind::T8Case1(_) => "t8_case1",
            FamilyKind::T8Case2(_) => "t8_case2",
            FamilyKind::T8Case3(_) => "t8_case3",
            FamilyKind::T8Case4(_) => "t8_case4",
            FamilyKind::Direct(_) => "direct",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FamilyKind::T3Case1(p)
            | FamilyKind::T3Case2(p)
            | FamilyKind::T3Case3(p)
            | FamilyKind::T3Case4(p) => p.rho.len(),
            FamilyKind::T8Case1(p) => p.sigma.len(),
            FamilyKind::T8Case2(p) => p.c.len(),
            FamilyKind::T8Case3(p) => p.sigma.len(),
            FamilyKind::T8Case4(p) => p.sigma.len(),
            FamilyKind::Direct(p) => p.form.dim(),
        }
    }

    /// The family's own Φ slot, if it has one.
    pub fn phi_mut(&mut self) -> Option<&mut Option<PhiSpec>> {
        match self {
            FamilyKind::T3Case1(p)
            | FamilyKind::T3Case2(p)
            | FamilyKind::T3Case3(p)
            | FamilyKind::T3Case4(p) => Some(&mut p.phi),
            FamilyKind::T8Case1(p) => Some(&mut p.phi),
            FamilyKind::T8Case3(p) => Some(&mut p.phi),
            _ => None,
        }
    }
}

/// A family plus the flag marking it as a claimed example whose validity
/// has not been established.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub unconfirmed: bool,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        FamilySpec {
            kind,
            unconfirmed: false,
        }
    }

    pub fn unconfirmed(kind: FamilyKind) -> Self {
        FamilySpec {
            kind,
            unconfirmed: true,
        }
    }
}

impl From<FamilyKind> for FamilySpec {
    fn from(kind: FamilyKind) -> Self {
        FamilySpec::new(kind)
    }
}

/// Pointwise checks attached to a family.
#[derive(Debug, Clone, PartialEq)]
pub enum SampledCheck {
    /// ρ·∇Φ.
    Annihilation { phi: Expr, rho: Vec<Cx> },
    /// Σ_j [(σ_j + sΦ_{zj})^{ℓ_j} − σ_j^{ℓ_j}].
    NullExpanded {
        phi: Expr,
        sigma: Vec<Cx>,
        exponents: Vec<u32>,
        scale: Cx,
    },
    /// Σ_j Σ_ι σ_j^{ℓ_j−ι} (sΦ_{zj})^ι, without binomial weights.
    NullLiteral {
        phi: Expr,
        sigma: Vec<Cx>,
        exponents: Vec<u32>,
        scale: Cx,
    },
    /// Σ_j [(σ_jΨ + Ψ_{zj})^ℓ − (σ_jΨ)^ℓ].
    EnvelopeExpanded { psi: Expr, sigma: Vec<Cx>, ell: u32 },
    /// Σ_j Σ_ι (σ_jΨ)^{ℓ−ι} Ψ_{zj}^ι, without binomial weights.
    EnvelopeLiteral { psi: Expr, sigma: Vec<Cx>, ell: u32 },
}

impl SampledCheck {
    pub fn residual(&self, z: &[Cx]) -> Result<Cx, JetError> {
        Ok(match self {
            SampledCheck::Annihilation { phi, rho } => {
                let j = phi.eval_jet(z)?;
                rho.iter().zip(j.gradient()).map(|(r, g)| r * g).sum()
            }
            SampledCheck::NullExpanded {
                phi,
                sigma,
                exponents,
                scale,
            } => {
                let j = phi.eval_jet(z)?;
                sigma
                    .iter()
                    .zip(exponents)
                    .zip(j.gradient())
                    .map(|((&s, &l), &g)| cx_pow_int(s + scale * g, l) - cx_pow_int(s, l))
                    .sum()
            }
            SampledCheck::NullLiteral {
                phi,
                sigma,
                exponents,
                scale,
            } => {
                let j = phi.eval_jet(z)?;
                let mut acc = ZERO;
                for ((&s, &l), &g) in sigma.iter().zip(exponents).zip(j.gradient()) {
                    for iota in 1..=l {
                        acc += cx_pow_int(s, l - iota) * cx_pow_int(scale * g, iota);
                    }
                }
                acc
            }
            SampledCheck::EnvelopeExpanded { psi, sigma, ell } => {
                let j = psi.eval_jet(z)?;
                let v = j.value();
                sigma
                    .iter()
                    .zip(j.gradient())
                    .map(|(&s, &g)| cx_pow_int(s * v + g, *ell) - cx_pow_int(s * v, *ell))
                    .sum()
            }
            SampledCheck::EnvelopeLiteral { psi, sigma, ell } => {
                let j = psi.eval_jet(z)?;
                let v = j.value();
                let mut acc = ZERO;
                for (&s, &g) in sigma.iter().zip(j.gradient()) {
                    for iota in 1..=*ell {
                        acc += cx_pow_int(s * v, ell - iota) * cx_pow_int(g, iota);
                    }
                }
                acc
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// A constant that must vanish.
    Scalar(Cx),
    Sampled(SampledCheck),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub check: Check,
    /// Reported for reference only; excluded from the overall verdict.
    pub informational: bool,
    /// Threshold used when the constructor enforces a scalar precondition.
    pub precondition_tol: Option<f64>,
}

impl Constraint {
    fn scalar(name: impl Into<String>, value: Cx, tol: f64) -> Self {
        Constraint {
            name: name.into(),
            check: Check::Scalar(value),
            informational: false,
            precondition_tol: Some(tol),
        }
    }

    fn sampled(name: impl Into<String>, check: SampledCheck) -> Self {
        Constraint {
            name: name.into(),
            check: Check::Sampled(check),
            informational: false,
            precondition_tol: None,
        }
    }

    fn informational(mut self) -> Self {
        self.informational = true;
        self.precondition_tol = None;
        self
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self.check, Check::Scalar(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub family: &'static str,
    pub u: Expr,
    pub form: WaringForm,
    pub rhs: UniPoly,
    pub constraints: Vec<Constraint>,
    pub dim: usize,
    pub unconfirmed: bool,
}

const PRECONDITION_TOL: f64 = 1e-10;
const WITNESS_TOL: f64 = 1e-12;

fn check_len(what: &'static str, v: &[Cx], n: usize) -> Result<(), FamilyError> {
    if v.len() != n {
        return Err(FamilyError::Dimension {
            what,
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

fn dot(a: &[Cx], b: &[Cx]) -> Cx {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// k = ℓ/(ℓ−ħ), required to be a positive integer.
fn power_ratio(ell: u32, hbar: u32) -> Result<u32, FamilyError> {
    if hbar >= ell {
        return Err(FamilyError::Structure(format!(
            "power families need ħ < ℓ, got ħ = {hbar}, ℓ = {ell}"
        )));
    }
    let gap = ell - hbar;
    if !ell.is_multiple_of(gap) {
        return Err(FamilyError::Structure(format!(
            "ℓ/(ℓ−ħ) = {ell}/{gap} is not an integer"
        )));
    }
    Ok(ell / gap)
}

fn require<T: Copy>(v: Option<T>, name: &str, family: &str) -> Result<T, FamilyError> {
    v.ok_or_else(|| FamilyError::Structure(format!("{family} requires `{name}`")))
}

fn forbid<T>(v: &Option<T>, name: &str, family: &str) -> Result<(), FamilyError> {
    if v.is_some() {
        return Err(FamilyError::Structure(format!(
            "{family} does not take `{name}`"
        )));
    }
    Ok(())
}

/// Scalar constraints for Φ = f(d·z) and the literal sums alongside them.
fn null_direction_constraints(phi: &PhiSpec, sigma: &[Cx], exponents: &[u32]) -> Vec<Constraint> {
    let PhiSpec::NullDirection { d, .. } = phi else {
        return Vec::new();
    };
    if d.len() != sigma.len() {
        return Vec::new();
    }
    let scale = d.iter().chain(sigma).map(|v| v.norm()).fold(1.0, f64::max);
    let top = exponents.iter().copied().max().unwrap_or(1);
    let tol = PRECONDITION_TOL * scale.powi(top as i32);
    let mut out: Vec<Constraint> = null_power_residuals(sigma, exponents, d)
        .into_iter()
        .enumerate()
        .map(|(k, r)| Constraint::scalar(format!("null_power_{}", k + 1), r, tol))
        .collect();
    out.extend(
        unweighted_power_sums(sigma, exponents, d)
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                Constraint::scalar(format!("null_power_{}_literal", k + 1), r, tol).informational()
            }),
    );
    out
}

fn linear_op(p: &LinearOpParams, case: u8) -> Result<Construction, FamilyError> {
    let family = ["t3_case1", "t3_case2", "t3_case3", "t3_case4"][case as usize - 1];
    let n = p.rho.len();
    if n == 0 {
        return Err(FamilyError::Structure("dimension must be ≥ 1".into()));
    }
    check_len("σ", &p.sigma, n)?;
    if p.ell == 0 {
        return Err(FamilyError::Structure("ℓ must be ≥ 1".into()));
    }
    let phi_spec = p
        .phi
        .clone()
        .unwrap_or(PhiSpec::Zero {})
        .with_default_rho(&p.rho);
    let phi = make_phi(&phi_spec, n)?;
    let s = Expr::linear(&p.sigma);
    let rs = Expr::constant(p.root) * s;
    let ell = p.ell;

    let (u, rhs) = match case {
        1 => {
            forbid(&p.hbar, "hbar", family)?;
            forbid(&p.a1, "a1", family)?;
            forbid(&p.a2, "a2", family)?;
            (rs + phi.clone(), UniPoly::constant(p.c0)?)
        }
        2 => {
            let hbar = require(p.hbar, "hbar", family)?;
            let a1 = require(p.a1, "a1", family)?;
            forbid(&p.a2, "a2", family)?;
            let k = power_ratio(ell, hbar)?;
            let inner = Expr::constant(ONE / k as f64) * rs + phi.clone();
            (
                inner.pow(k) + Expr::constant(a1),
                UniPoly::shifted_power(p.c0, a1, hbar)?,
            )
        }
        3 => {
            let a1 = require(p.a1, "a1", family)?;
            forbid(&p.a2, "a2", family)?;
            if let Some(h) = p.hbar {
                if h != ell {
                    return Err(FamilyError::Structure(format!(
                        "{family} has ħ = ℓ, got ħ = {h}"
                    )));
                }
            }
            (
                phi.clone() * rs.exp() + Expr::constant(a1),
                UniPoly::shifted_power(p.c0, a1, ell)?,
            )
        }
        _ => {
            let a1 = require(p.a1, "a1", family)?;
            let a2 = require(p.a2, "a2", family)?;
            if !ell.is_multiple_of(2) {
                return Err(FamilyError::Structure(format!(
                    "{family} needs an even ℓ, got {ell}"
                )));
            }
            if let Some(h) = p.hbar {
                if h != ell {
                    return Err(FamilyError::Structure(format!(
                        "{family} has ħ = ℓ, got ħ = {h}"
                    )));
                }
            }
            if a1 == a2 {
                return Err(FamilyError::Structure(format!("{family} needs a₁ ≠ a₂")));
            }
            let half = ell / 2;
            let u = Expr::constant((a1 - a2) / 2.0) * (rs + phi.clone()).cosh()
                + Expr::constant((a1 + a2) / 2.0);
            let rhs = UniPoly::new(
                p.c0,
                vec![
                    Root {
                        value: a1,
                        mult: half,
                    },
                    Root {
                        value: a2,
                        mult: half,
                    },
                ],
            )?;
            (u, rhs)
        }
    };

    let mut constraints = vec![
        Constraint::scalar(
            "rho_dot_sigma",
            dot(&p.rho, &p.sigma) - ONE,
            PRECONDITION_TOL,
        ),
        Constraint::scalar(
            "root_witness",
            cx_pow_int(p.root, ell) - p.c0,
            WITNESS_TOL * p.c0.norm().max(1.0),
        ),
    ];
    if !phi_spec.is_zero() {
        constraints.push(Constraint::sampled(
            "phi_annihilation",
            SampledCheck::Annihilation {
                phi,
                rho: p.rho.clone(),
            },
        ));
    }
    Ok(Construction {
        family,
        u,
        form: WaringForm::linear_power(&p.rho, ell)?,
        rhs,
        constraints,
        dim: n,
        unconfirmed: false,
    })
}

fn sigma_power_sum(sigma: &[Cx], exponents: &[u32]) -> Constraint {
    let s: Cx = sigma
        .iter()
        .zip(exponents)
        .map(|(&x, &l)| cx_pow_int(x, l))
        .sum();
    Constraint::scalar("sigma_power_sum", s - ONE, PRECONDITION_TOL)
}

fn null_constraints(
    phi_spec: &PhiSpec,
    phi: &Expr,
    sigma: &[Cx],
    exponents: &[u32],
    scale: Cx,
) -> Vec<Constraint> {
    let mut out = null_direction_constraints(phi_spec, sigma, exponents);
    if !phi_spec.is_zero() {
        out.push(Constraint::sampled(
            "null_expanded",
            SampledCheck::NullExpanded {
                phi: phi.clone(),
                sigma: sigma.to_vec(),
                exponents: exponents.to_vec(),
                scale,
            },
        ));
        out.push(
            Constraint::sampled(
                "null_literal",
                SampledCheck::NullLiteral {
                    phi: phi.clone(),
                    sigma: sigma.to_vec(),
                    exponents: exponents.to_vec(),
                    scale,
                },
            )
            .informational(),
        );
    }
    out
}

fn waring_phi(phi: &Option<PhiSpec>, n: usize) -> Result<(PhiSpec, Expr), FamilyError> {
    let spec = phi.clone().unwrap_or(PhiSpec::Zero {});
    if spec.is_difference_variant() && spec.rho().is_none() {
        return Err(FamilyError::Phi(
            "difference variants need explicit ρ in Waring families".into(),
        ));
    }
    let e = make_phi(&spec, n)?;
    Ok((spec, e))
}

fn construct_unchecked(spec: &FamilySpec) -> Result<Construction, FamilyError> {
    let mut c = match &spec.kind {
        FamilyKind::T3Case1(p) => linear_op(p, 1)?,
        FamilyKind::T3Case2(p) => linear_op(p, 2)?,
        FamilyKind::T3Case3(p) => linear_op(p, 3)?,
        FamilyKind::T3Case4(p) => linear_op(p, 4)?,
        FamilyKind::T8Case1(p) => {
            let n = p.sigma.len();
            if n == 0 {
                return Err(FamilyError::Structure("dimension must be ≥ 1".into()));
            }
            if p.exponents.len() != n {
                return Err(FamilyError::Dimension {
                    what: "exponents",
                    expected: n,
                    got: p.exponents.len(),
                });
            }
            let (phi_spec, phi) = waring_phi(&p.phi, n)?;
            let mut constraints = vec![sigma_power_sum(&p.sigma, &p.exponents)];
            constraints.extend(null_constraints(
                &phi_spec,
                &phi,
                &p.sigma,
                &p.exponents,
                ONE,
            ));
            Construction {
                family: "t8_case1",
                u: Expr::linear(&p.sigma) + phi,
                form: WaringForm::diagonal(p.exponents.clone())?,
                rhs: UniPoly::constant(ONE)?,
                constraints,
                dim: n,
                unconfirmed: false,
            }
        }
        FamilyKind::T8Case2(p) => {
            let n = p.c.len();
            if n == 0 {
                return Err(FamilyError::Structure("dimension must be ≥ 1".into()));
            }
            let u =
                p.c.iter()
                    .enumerate()
                    .map(|(j, &cj)| (Expr::real(0.5) * Expr::var(j) + Expr::constant(cj)).pow(2))
                    .reduce(|a, b| a + b)
                    .unwrap_or_else(Expr::zero);
            Construction {
                family: "t8_case2",
                u,
                form: WaringForm::uniform(n, 2)?,
                rhs: UniPoly::power(1),
                constraints: Vec::new(),
                dim: n,
                unconfirmed: false,
            }
        }
        FamilyKind::T8Case3(p) => {
            let n = p.sigma.len();
            if n == 0 {
                return Err(FamilyError::Structure("dimension must be ≥ 1".into()));
            }
            let k = power_ratio(p.ell, p.hbar)?;
            let (phi_spec, phi) = waring_phi(&p.phi, n)?;
            let exponents = vec![p.ell; n];
            let mut constraints = vec![sigma_power_sum(&p.sigma, &exponents)];
            constraints.extend(null_constraints(
                &phi_spec,
                &phi,
                &p.sigma,
                &exponents,
                Cx::from(k as f64),
            ));
            let inner = Expr::constant(ONE / k as f64) * Expr::linear(&p.sigma) + phi;
            Construction {
                family: "t8_case3",
                u: inner.pow(k),
                form: WaringForm::uniform(n, p.ell)?,
                rhs: UniPoly::power(p.hbar),
                constraints,
                dim: n,
                unconfirmed: false,
            }
        }
        FamilyKind::T8Case4(p) => {
            let n = p.sigma.len();
            if n == 0 || p.ell == 0 {
                return Err(FamilyError::Structure("need n ≥ 1 and ℓ ≥ 1".into()));
            }
            if p.psi.is_difference_variant() && p.psi.rho().is_none() {
                return Err(FamilyError::Phi(
                    "difference variants need explicit ρ".into(),
                ));
            }
            let psi = make_phi(&p.psi, n)?;
            let exponents = vec![p.ell; n];
            let mut constraints = vec![sigma_power_sum(&p.sigma, &exponents)];
            constraints.extend(null_direction_constraints(&p.psi, &p.sigma, &exponents));
            constraints.push(Constraint::sampled(
                "envelope_expanded",
                SampledCheck::EnvelopeExpanded {
                    psi: psi.clone(),
                    sigma: p.sigma.clone(),
                    ell: p.ell,
                },
            ));
            constraints.push(
                Constraint::sampled(
                    "envelope_literal",
                    SampledCheck::EnvelopeLiteral {
                        psi: psi.clone(),
                        sigma: p.sigma.clone(),
                        ell: p.ell,
                    },
                )
                .informational(),
            );
            Construction {
                family: "t8_case4",
                u: psi * Expr::linear(&p.sigma).exp(),
                form: WaringForm::uniform(n, p.ell)?,
                rhs: UniPoly::power(p.ell),
                constraints,
                dim: n,
                unconfirmed: false,
            }
        }
        FamilyKind::Direct(p) => {
            p.form.validate()?;
            p.rhs.validate()?;
            p.u.check_dim(p.form.dim())?;
            Construction {
                family: "direct",
                u: p.u.clone(),
                form: p.form.clone(),
                rhs: p.rhs.clone(),
                constraints: Vec::new(),
                dim: p.form.dim(),
                unconfirmed: false,
            }
        }
    };
    c.unconfirmed = spec.unconfirmed;
    Ok(c)
}

/// Builds the family without enforcing scalar preconditions; violations
/// show up in the constraint list for a verifier to report.
pub fn construct_lenient(spec: &FamilySpec) -> Result<Construction, FamilyError> {
    construct_unchecked(spec)
}

/// Builds the family and rejects it if any scalar precondition fails.
/// Flagged families are exempt, since their constants are what is being
/// measured.
pub fn construct(spec: &FamilySpec) -> Result<Construction, FamilyError> {
    let c = construct_unchecked(spec)?;
    if !c.unconfirmed {
        for k in &c.constraints {
            if let (Check::Scalar(v), Some(tol)) = (&k.check, k.precondition_tol) {
                if v.norm() > tol {
                    return Err(FamilyError::PreconditionViolated {
                        name: k.name.clone(),
                        residual: v.norm(),
                        tolerance: tol,
                    });
                }
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn r(x: f64) -> Cx {
        Cx::new(x, 0.0)
    }

    fn residual(c: &Construction, z: &[Cx]) -> Cx {
        let j = c.u.eval_jet(z).unwrap();
        c.form.eval_cx(j.gradient()).unwrap() - c.rhs.eval_cx(j.value())
    }

    fn points(n: usize) -> Vec<Vec<Cx>> {
        (0..25)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let t = (k * 7 + j * 3) as f64;
                        Cx::new((0.37 * t).sin() * 1.5, (0.91 * t + 0.2).cos() * 1.5)
                    })
                    .collect()
            })
            .collect()
    }

    fn max_residual(c: &Construction) -> f64 {
        points(c.dim)
            .iter()
            .map(|z| residual(c, z).norm())
            .fold(0.0, f64::max)
    }

    fn linear_op_params(rho: Vec<Cx>, sigma: Vec<Cx>, ell: u32, root: Cx) -> LinearOpParams {
        LinearOpParams {
            rho,
            sigma,
            ell,
            c0: cx_pow_int(root, ell),
            root,
            hbar: None,
            a1: None,
            a2: None,
            phi: None,
        }
    }

    #[test]
    fn paraboloid_is_exact() {
        let spec = FamilySpec::new(FamilyKind::T8Case2(ParaboloidParams {
            c: vec![ZERO, ZERO],
        }));
        let c = construct(&spec).unwrap();
        for z in points(2) {
            assert_eq!(residual(&c, &z), ZERO);
        }
        let z = [Cx::new(1.0, 1.0), r(2.0)];
        let want = (z[0] / 2.0).powi(2) + (z[1] / 2.0).powi(2);
        assert!((c.u.eval_value(&z).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn eikonal_with_isotropic_direction() {
        let d = vec![
            Cx::new(12.0, -21.0) / 13.0,
            Cx::new(18.0, 14.0) / 13.0,
            r(-1.0),
        ];
        let spec = FamilySpec::new(FamilyKind::T8Case1(LinearNullParams {
            exponents: vec![2, 2, 2],
            sigma: vec![r(2.0 / 7.0), r(3.0 / 7.0), r(6.0 / 7.0)],
            phi: Some(PhiSpec::NullDirection {
                d,
                core: parse_expr("sin(w)", 1).unwrap(),
            }),
        }));
        let c = construct(&spec).unwrap();
        assert!(max_residual(&c) < 1e-9);
        let null1 = c
            .constraints
            .iter()
            .find(|k| k.name == "null_power_1")
            .unwrap();
        let null2 = c
            .constraints
            .iter()
            .find(|k| k.name == "null_power_2")
            .unwrap();
        for k in [null1, null2] {
            let Check::Scalar(v) = k.check else { panic!() };
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn linear_op_power_case_single_variable() {
        let mut p = linear_op_params(vec![ONE, ZERO], vec![ONE, ZERO], 2, ONE);
        p.hbar = Some(1);
        p.a1 = Some(ZERO);
        let c = construct(&FamilySpec::new(FamilyKind::T3Case2(p))).unwrap();
        let z = [Cx::new(0.7, -0.3), r(5.0)];
        let want = (z[0] / 2.0).powi(2);
        assert!((c.u.eval_value(&z).unwrap() - want).norm() < 1e-15);
        assert!(max_residual(&c) < 1e-12);
    }

    #[test]
    fn every_linear_op_case_solves_its_instance() {
        let rho = vec![Cx::new(0.5, 0.5), r(1.0), Cx::new(0.0, -0.5)];
        // last component chosen so that ρ·σ = 1
        let head = [ONE, Cx::new(0.5, -0.5)];
        let last = (ONE - dot(&rho[..2], &head)) / rho[2];
        let sigma = vec![head[0], head[1], last];
        let phi = PhiSpec::CyclicDiff {
            rho: None,
            core: parse_expr("0.3*z1^2 + 0.2*z2*z3 - 0.1*sin(z3)", 3).unwrap(),
        };
        let root = Cx::new(0.6, 0.2);
        let cases = [
            (1, 3, None, None),
            (2, 4, Some(2), None),
            (3, 2, None, None),
            (4, 2, None, Some(r(-0.5))),
        ];
        for (case, ell, hbar, a2) in cases {
            let mut p = linear_op_params(rho.clone(), sigma.clone(), ell, root);
            p.phi = Some(phi.clone());
            p.hbar = hbar;
            if case > 1 {
                p.a1 = Some(Cx::new(0.3, 0.1));
            }
            p.a2 = a2;
            let kind = match case {
                1 => FamilyKind::T3Case1(p),
                2 => FamilyKind::T3Case2(p),
                3 => FamilyKind::T3Case3(p),
                _ => FamilyKind::T3Case4(p),
            };
            let c = construct(&FamilySpec::new(kind)).unwrap();
            let scale: f64 = points(3)
                .iter()
                .map(|z| c.rhs.eval_cx(c.u.eval_value(z).unwrap()).norm())
                .fold(1.0, f64::max);
            assert!(
                max_residual(&c) <= 1e-9 * scale,
                "case {case}: {} vs {scale}",
                max_residual(&c)
            );
        }
    }

    #[test]
    fn cosh_case_needs_even_power() {
        let mut p = linear_op_params(vec![ONE], vec![ONE], 3, ONE);
        p.a1 = Some(ONE);
        p.a2 = Some(-ONE);
        assert!(matches!(
            construct(&FamilySpec::new(FamilyKind::T3Case4(p))),
            Err(FamilyError::Structure(_))
        ));
    }

    #[test]
    fn non_integer_power_ratio_is_rejected() {
        let p = PowerParams {
            ell: 3,
            hbar: 1,
            sigma: vec![ONE],
            phi: None,
        };
        assert!(matches!(
            construct(&FamilySpec::new(FamilyKind::T8Case3(p))),
            Err(FamilyError::Structure(_))
        ));
    }

    #[test]
    fn violated_preconditions_are_reported() {
        let p = linear_op_params(vec![ONE, ONE], vec![ONE, ONE], 2, ONE);
        match construct(&FamilySpec::new(FamilyKind::T3Case1(p.clone()))) {
            Err(FamilyError::PreconditionViolated { name, .. }) => {
                assert_eq!(name, "rho_dot_sigma")
            }
            other => panic!("{other:?}"),
        }
        let lenient = construct_lenient(&FamilySpec::new(FamilyKind::T3Case1(p))).unwrap();
        assert_eq!(lenient.constraints.len(), 2);

        let mut p = linear_op_params(vec![ONE], vec![ONE], 2, ONE);
        p.c0 = r(2.0);
        match construct(&FamilySpec::new(FamilyKind::T3Case1(p))) {
            Err(FamilyError::PreconditionViolated { name, .. }) => assert_eq!(name, "root_witness"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scale_covariance_of_linear_family() {
        let lambda: f64 = 2.0;
        let rho = vec![ONE, Cx::new(0.0, 1.0)];
        let sigma = vec![r(0.5), Cx::new(0.0, -0.5)];
        let core = parse_expr("cos(w)", 1).unwrap();
        let base = LinearOpParams {
            phi: Some(PhiSpec::WeightedDiff {
                rho: None,
                core: core.clone(),
            }),
            ..linear_op_params(rho.clone(), sigma.clone(), 3, Cx::new(0.4, 0.3))
        };
        let scaled = LinearOpParams {
            c0: base.c0 * lambda.powi(3),
            root: base.root * lambda,
            phi: Some(PhiSpec::WeightedDiff {
                rho: None,
                core: Expr::real(lambda) * core,
            }),
            ..base.clone()
        };
        let a = construct(&FamilySpec::new(FamilyKind::T3Case1(base))).unwrap();
        let b = construct(&FamilySpec::new(FamilyKind::T3Case1(scaled))).unwrap();
        assert!(max_residual(&a) < 1e-9);
        assert!(max_residual(&b) < 1e-9);
        for z in points(2) {
            let ua = a.u.eval_value(&z).unwrap();
            let ub = b.u.eval_value(&z).unwrap();
            assert!((ub - lambda * ua).norm() < 1e-12 * (1.0 + ub.norm()));
        }
    }

    #[test]
    fn power_family_with_null_direction() {
        // ℓ = 2, ħ = 1, k = 2
        let d = vec![
            Cx::new(12.0, -21.0) / 13.0,
            Cx::new(18.0, 14.0) / 13.0,
            r(-1.0),
        ];
        let p = PowerParams {
            ell: 2,
            hbar: 1,
            sigma: vec![r(2.0 / 7.0), r(3.0 / 7.0), r(6.0 / 7.0)],
            phi: Some(PhiSpec::NullDirection {
                d,
                core: parse_expr("w^3 - sin(w)", 1).unwrap(),
            }),
        };
        let c = construct(&FamilySpec::new(FamilyKind::T8Case3(p))).unwrap();
        let scale: f64 = points(3)
            .iter()
            .map(|z| c.u.eval_value(z).unwrap().norm())
            .fold(1.0, f64::max);
        assert!(max_residual(&c) < 1e-9 * scale);
    }

    #[test]
    fn envelope_family_with_constant_psi() {
        let p = EnvelopeParams {
            ell: 3,
            sigma: vec![r(0.5), r(2.0 / 3.0), r(5.0 / 6.0)],
            psi: PhiSpec::Custom {
                expr: Expr::constant(Cx::new(1.5, -0.5)),
            },
        };
        let c = construct(&FamilySpec::new(FamilyKind::T8Case4(p))).unwrap();
        let scale: f64 = points(3)
            .iter()
            .map(|z| c.u.eval_value(z).unwrap().norm().powi(3))
            .fold(1.0, f64::max);
        assert!(max_residual(&c) < 1e-9 * scale);
    }

    #[test]
    fn structural_errors() {
        let p = LinearNullParams {
            exponents: vec![2, 2],
            sigma: vec![ONE],
            phi: None,
        };
        assert!(matches!(
            construct(&FamilySpec::new(FamilyKind::T8Case1(p))),
            Err(FamilyError::Dimension { .. })
        ));
        let mut p = linear_op_params(vec![ONE], vec![ONE], 2, ONE);
        p.hbar = Some(3);
        p.a1 = Some(ZERO);
        assert!(construct(&FamilySpec::new(FamilyKind::T3Case2(p))).is_err());
    }
}
