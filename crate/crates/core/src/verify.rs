//! Residual engine: samples the polydisc, evaluates `H(∇u) − P(u)` and
//! every attached constraint, and aggregates by maximum.

use serde::Serialize;
use thiserror::Error;

use crate::cxjet::{is_finite, Cx, JetError};
use crate::expr::Expr;
use crate::families::{construct_lenient, Check, Construction, FamilyError, FamilySpec};
use crate::poly::{PolyError, UniPoly, WaringForm};
use crate::sampling::{Sampler, DEFAULT_SEED};

/// Sample points lie in the polydisc |z_j| ≤ this radius.
pub const SAMPLE_RADIUS: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("point has dimension {got}, instance has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unconfirmed,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Unconfirmed => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Scalar,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub name: String,
    pub kind: ConstraintKind,
    pub max_abs_residual: f64,
    /// Max of |r| / (1 + |H(∇u)| + |P(u)|); PDE residual only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_residual: Option<f64>,
    /// The constant itself, for scalar constraints.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cx>,
    pub worst_point: Option<Vec<Cx>>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Excluded from the overall verdict.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceInfo {
    pub family: String,
    pub dimension: usize,
    pub u: String,
    pub form: WaringForm,
    pub rhs: UniPoly,
    pub unconfirmed: bool,
    pub sampling: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub instance: InstanceInfo,
    pub constraints: Vec<ConstraintReport>,
    pub verdict: Verdict,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
}

impl VerificationReport {
    pub fn constraint(&self, name: &str) -> Option<&ConstraintReport> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// H(∇u(z)) − P(u(z)) from one jet evaluation.
pub fn residual_at(
    u: &Expr,
    form: &WaringForm,
    rhs: &UniPoly,
    z: &[Cx],
) -> Result<Cx, VerifyError> {
    Ok(residual_parts(u, form, rhs, z)?.0)
}

/// (residual, |H(∇u)|, |P(u)|).
fn residual_parts(
    u: &Expr,
    form: &WaringForm,
    rhs: &UniPoly,
    z: &[Cx],
) -> Result<(Cx, f64, f64), VerifyError> {
    if z.len() != form.dim() {
        return Err(VerifyError::Dimension {
            expected: form.dim(),
            got: z.len(),
        });
    }
    let j = u.eval_jet(z)?;
    let h = form.eval_cx(j.gradient())?;
    let p = rhs.eval_cx(j.value());
    Ok((h - p, h.norm(), p.norm()))
}

/// max_j |∂u/∂z_j (jet) − central difference with real step h|.
pub fn grad_check(u: &Expr, z: &[Cx], h: f64) -> Result<f64, VerifyError> {
    let jet = u.eval_jet(z)?;
    let mut worst: f64 = 0.0;
    let mut zp = z.to_vec();
    for (j, g) in jet.gradient().iter().enumerate() {
        zp[j] = z[j] + h;
        let up = u.eval_value(&zp)?;
        zp[j] = z[j] - h;
        let um = u.eval_value(&zp)?;
        zp[j] = z[j];
        worst = worst.max(((up - um) / (2.0 * h) - g).norm());
    }
    Ok(worst)
}

struct Accumulator {
    max: f64,
    worst: Option<Vec<Cx>>,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            max: 0.0,
            worst: None,
        }
    }

    fn push(&mut self, r: Cx, z: &[Cx]) {
        let m = if is_finite(r) {
            r.norm()
        } else {
            f64::INFINITY
        };
        if self.worst.is_none() || m > self.max {
            self.max = m;
            self.worst = Some(z.to_vec());
        }
    }
}

fn verdict_for(residual: f64, tol: f64, unconfirmed: bool) -> Verdict {
    if residual <= tol {
        Verdict::Pass
    } else if unconfirmed {
        Verdict::Unconfirmed
    } else {
        Verdict::Fail
    }
}

/// Verifies an already constructed family.
pub fn verify_construction(
    c: &Construction,
    opts: VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let tol = opts.tolerance;
    let mut rng = Sampler::new(opts.seed);
    let points: Vec<Vec<Cx>> = (0..opts.samples)
        .map(|_| rng.polydisc(c.dim, SAMPLE_RADIUS))
        .collect();

    let mut pde = Accumulator::new();
    let mut rel: f64 = 0.0;
    for z in &points {
        let (r, h, p) = residual_parts(&c.u, &c.form, &c.rhs, z)?;
        pde.push(r, z);
        let q = if is_finite(r) {
            r.norm() / (1.0 + h + p)
        } else {
            f64::INFINITY
        };
        rel = rel.max(q);
    }
    let mut reports = vec![ConstraintReport {
        name: "pde_residual".into(),
        kind: ConstraintKind::Sampled,
        max_abs_residual: pde.max,
        max_rel_residual: Some(rel),
        value: None,
        worst_point: pde.worst,
        samples: opts.samples,
        seed: opts.seed,
        tolerance: tol,
        verdict: verdict_for(pde.max, tol, c.unconfirmed),
        informational: false,
    }];

    for k in &c.constraints {
        let report = match &k.check {
            Check::Scalar(v) => {
                let m = if is_finite(*v) {
                    v.norm()
                } else {
                    f64::INFINITY
                };
                ConstraintReport {
                    name: k.name.clone(),
                    kind: ConstraintKind::Scalar,
                    max_abs_residual: m,
                    max_rel_residual: None,
                    value: Some(*v),
                    worst_point: None,
                    samples: 0,
                    seed: opts.seed,
                    tolerance: tol,
                    verdict: verdict_for(m, tol, c.unconfirmed),
                    informational: k.informational,
                }
            }
            Check::Sampled(s) => {
                let mut acc = Accumulator::new();
                for z in &points {
                    acc.push(s.residual(z)?, z);
                }
                ConstraintReport {
                    name: k.name.clone(),
                    kind: ConstraintKind::Sampled,
                    max_abs_residual: acc.max,
                    max_rel_residual: None,
                    value: None,
                    worst_point: acc.worst,
                    samples: opts.samples,
                    seed: opts.seed,
                    tolerance: tol,
                    verdict: verdict_for(acc.max, tol, c.unconfirmed),
                    informational: k.informational,
                }
            }
        };
        reports.push(report);
    }

    let counted = reports.iter().filter(|r| !r.informational);
    let verdict = if counted.clone().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if counted.clone().any(|r| r.verdict == Verdict::Unconfirmed) {
        Verdict::Unconfirmed
    } else {
        Verdict::Pass
    };

    Ok(VerificationReport {
        instance: InstanceInfo {
            family: c.family.to_string(),
            dimension: c.dim,
            u: c.u.to_string(),
            form: c.form.clone(),
            rhs: c.rhs.clone(),
            unconfirmed: c.unconfirmed,
            sampling: format!(
                "uniform re/im in [-{SAMPLE_RADIUS}, {SAMPLE_RADIUS}] per coordinate, \
                 rejected to |z_j| <= {SAMPLE_RADIUS}"
            ),
        },
        constraints: reports,
        verdict,
        seed: opts.seed,
        samples: opts.samples,
        tolerance: tol,
    })
}

/// Constructs `spec` without enforcing preconditions and verifies it, so
/// violated preconditions surface as failing constraints.
pub fn verify_family(
    spec: &FamilySpec,
    opts: VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let c = construct_lenient(spec)?;
    verify_construction(&c, opts)
}
