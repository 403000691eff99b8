//! Characteristic curves of `H(Du) = P(u)`.
//!
//! With F(z, u, p) = H(p) − P(u) the system reads
//!
//! ```text
//! dz/dτ  = ∇H(Du)
//! dDu/dτ = P′(u) Du
//! du/dτ  = Du·∇H(Du)      (ℓ P(u) when H is homogeneous of degree ℓ)
//! ```
//!
//! and is integrated by fixed-step RK4 along the straight segment 0 → τ_end
//! of the complex τ-plane.

use serde::Serialize;
use thiserror::Error;

use crate::cxjet::{is_finite, Cx, JetError, ZERO};
use crate::families::Construction;
use crate::poly::{PolyError, UniPoly, WaringForm};

/// Trajectories abort once |u| or any |u_{zj}| exceeds this.
pub const BLOW_UP_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharError {
    #[error("state has dimension {got}, system has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("steps must be ≥ 1")]
    NoSteps,
    #[error("right side degree {hbar} exceeds form degree {ell}")]
    DegreeOrder { ell: u32, hbar: u32 },
    #[error("movable singularity at τ = {estimate} lies on the integration segment")]
    SingularityOnPath { estimate: Cx },
    #[error("trajectory blew up near τ = {tau} (singularity estimate {estimate:?})")]
    BlowUp { tau: Cx, estimate: Option<Cx> },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharState {
    pub tau: Cx,
    pub z: Vec<Cx>,
    #[serde(rename = "Du")]
    pub du: Vec<Cx>,
    pub u: Cx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharDerivative {
    pub dz: Vec<Cx>,
    pub ddu: Vec<Cx>,
    pub du: Cx,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharSystem {
    pub form: WaringForm,
    pub rhs: UniPoly,
}

impl CharSystem {
    pub fn new(form: WaringForm, rhs: UniPoly) -> Result<Self, CharError> {
        form.validate()?;
        rhs.validate()?;
        if let (WaringForm::Diagonal(_), Some(ell)) = (&form, form.degree()) {
            if rhs.degree() > ell {
                return Err(CharError::DegreeOrder {
                    ell,
                    hbar: rhs.degree(),
                });
            }
        }
        Ok(CharSystem { form, rhs })
    }

    pub fn dim(&self) -> usize {
        self.form.dim()
    }

    /// H(Du) − P(u); a first integral of the flow.
    pub fn residual(&self, s: &CharState) -> Result<Cx, CharError> {
        Ok(self.form.eval_cx(&s.du)? - self.rhs.eval_cx(s.u))
    }

    /// Location of the movable singularity when P(w) = w^ħ with ħ ≥ 2 and H
    /// homogeneous of degree ℓ: τ* = 1/(ℓ(ħ−1)u₀^{ħ−1}).
    pub fn blow_up_estimate(&self, u0: Cx) -> Option<Cx> {
        let ell = self.form.degree()?;
        let hbar = self.rhs.as_monic_power()?;
        blow_up_tau(ell, hbar, u0)
    }
}

/// τ* = 1/(ℓ(ħ−1)u₀^{ħ−1}) for du/dτ = ℓu^ħ, ħ ≥ 2.
pub fn blow_up_tau(ell: u32, hbar: u32, u0: Cx) -> Option<Cx> {
    if hbar < 2 || u0 == ZERO {
        return None;
    }
    Some(1.0 / (ell as f64 * (hbar - 1) as f64 * u0.powu(hbar - 1)))
}

/// Exact solution of du/dτ = ℓu^ħ with u(0) = u₀.
///
/// For ħ ≥ 3 the (ħ−1)-th root is principal, so it is only meaningful on
/// arcs where 1 − ℓ(ħ−1)u₀^{ħ−1}τ stays near 1.
pub fn pure_power_solution(ell: u32, hbar: u32, u0: Cx, tau: Cx) -> Cx {
    let l = ell as f64;
    match hbar {
        0 => u0 + l * tau,
        1 => u0 * (l * tau).exp(),
        2 => u0 / (1.0 - l * u0 * tau),
        h => {
            let m = (h - 1) as f64;
            u0 / (1.0 - l * m * u0.powu(h - 1) * tau).powf(1.0 / m)
        }
    }
}

pub fn char_rhs(sys: &CharSystem, s: &CharState) -> Result<CharDerivative, CharError> {
    let n = sys.dim();
    if s.z.len() != n || s.du.len() != n {
        return Err(CharError::Dimension {
            expected: n,
            got: s.du.len().max(s.z.len()),
        });
    }
    let grad_h = sys.form.gradient(&s.du)?;
    let (p, dp) = sys.rhs.eval_with_derivative(s.u);
    let du = match sys.form.degree() {
        Some(ell) => ell as f64 * p,
        None => s.du.iter().zip(&grad_h).map(|(a, b)| a * b).sum(),
    };
    Ok(CharDerivative {
        ddu: s.du.iter().map(|v| dp * v).collect(),
        dz: grad_h,
        du,
    })
}

fn advance(s: &CharState, k: &CharDerivative, h: Cx) -> CharState {
    CharState {
        tau: s.tau + h,
        z: s.z.iter().zip(&k.dz).map(|(a, b)| a + h * b).collect(),
        du: s.du.iter().zip(&k.ddu).map(|(a, b)| a + h * b).collect(),
        u: s.u + h * k.du,
    }
}

fn rk4_step(sys: &CharSystem, s: &CharState, h: Cx) -> Result<CharState, CharError> {
    let k1 = char_rhs(sys, s)?;
    let k2 = char_rhs(sys, &advance(s, &k1, h / 2.0))?;
    let k3 = char_rhs(sys, &advance(s, &k2, h / 2.0))?;
    let k4 = char_rhs(sys, &advance(s, &k3, h))?;
    let comb = |a: Cx, b: Cx, c: Cx, d: Cx| (a + 2.0 * b + 2.0 * c + d) * (h / 6.0);
    Ok(CharState {
        tau: s.tau + h,
        z: (0..s.z.len())
            .map(|j| s.z[j] + comb(k1.dz[j], k2.dz[j], k3.dz[j], k4.dz[j]))
            .collect(),
        du: (0..s.du.len())
            .map(|j| s.du[j] + comb(k1.ddu[j], k2.ddu[j], k3.ddu[j], k4.ddu[j]))
            .collect(),
        u: s.u + comb(k1.du, k2.du, k3.du, k4.du),
    })
}

fn escaped(s: &CharState) -> bool {
    let big = |v: &Cx| !is_finite(*v) || v.norm() > BLOW_UP_BOUND;
    big(&s.u) || s.du.iter().any(big) || s.z.iter().any(|v| !is_finite(*v))
}

/// Whether τ* lies on the closed segment from 0 to τ_end.
fn on_segment(estimate: Cx, tau_end: Cx) -> bool {
    if tau_end == ZERO {
        return false;
    }
    let t = estimate / tau_end;
    t.im.abs() <= 1e-12 * t.norm().max(1.0) && t.re > 0.0 && t.re <= 1.0
}

/// RK4 with `steps` equal steps from τ = 0 (taken from `s0.tau`) to
/// `s0.tau + tau_end`; returns every state including the initial one.
pub fn integrate(
    sys: &CharSystem,
    s0: &CharState,
    tau_end: Cx,
    steps: usize,
) -> Result<Vec<CharState>, CharError> {
    if steps == 0 {
        return Err(CharError::NoSteps);
    }
    let n = sys.dim();
    if s0.z.len() != n || s0.du.len() != n {
        return Err(CharError::Dimension {
            expected: n,
            got: s0.du.len().max(s0.z.len()),
        });
    }
    let estimate = sys.blow_up_estimate(s0.u);
    if let Some(t) = estimate {
        if on_segment(t, tau_end) {
            return Err(CharError::SingularityOnPath { estimate: t });
        }
    }
    let h = tau_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s0.clone());
    for _ in 0..steps {
        let next = rk4_step(sys, out.last().expect("non-empty"), h)?;
        if escaped(&next) {
            return Err(CharError::BlowUp {
                tau: next.tau,
                estimate,
            });
        }
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    pub max_deviation: f64,
    pub trajectory: Vec<CharState>,
}

/// Launches a characteristic from (z₀, ∇u(z₀), u(z₀)) of a constructed
/// family and compares the integrated u with the family evaluated along z(τ).
pub fn cross_check(
    family: &Construction,
    z0: &[Cx],
    tau_end: Cx,
    steps: usize,
) -> Result<CrossCheck, CharError> {
    let sys = CharSystem::new(family.form.clone(), family.rhs.clone())?;
    let jet = family.u.eval_jet(z0)?;
    let s0 = CharState {
        tau: ZERO,
        z: z0.to_vec(),
        du: jet.gradient().to_vec(),
        u: jet.value(),
    };
    let trajectory = integrate(&sys, &s0, tau_end, steps)?;
    let mut max_deviation: f64 = 0.0;
    for s in &trajectory {
        let exact = family.u.eval_value(&s.z)?;
        max_deviation = max_deviation.max((exact - s.u).norm());
    }
    Ok(CrossCheck {
        max_deviation,
        trajectory,
    })
}
