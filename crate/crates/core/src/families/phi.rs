//! Generators for null functions Φ.
//!
//! The difference-coordinate variants produce Φ with ρ·∇Φ ≡ 0; the
//! null-direction variant produces Φ = f(d·z), which is invisible to a
//! Waring form when d satisfies the per-power conditions of [`super::null`].

use serde::{Deserialize, Serialize};

use super::FamilyError;
use crate::cxjet::{Cx, ONE, ZERO};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Zero {},
    /// core(z₂/ρ₂ − z₁/ρ₁, …, z_n/ρ_n − z_{n−1}/ρ_{n−1}, z₁/ρ₁ − z_n/ρ_n)
    CyclicDiff {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<Vec<Cx>>,
        core: Expr,
    },
    /// core(z_k/ρ_k − z_b/ρ_b for k ≠ b), base index b (0-based).
    BaseDiff {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<Vec<Cx>>,
        #[serde(default)]
        base: usize,
        core: Expr,
    },
    /// core(z₂/ρ₂ − z₁/ρ₁, z₄/ρ₄ − z₃/ρ₃, …), n even.
    PairedDiff {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<Vec<Cx>>,
        core: Expr,
    },
    /// core((n−1)z₁/ρ₁ − z₂/ρ₂ − ⋯ − z_n/ρ_n).
    WeightedDiff {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<Vec<Cx>>,
        core: Expr,
    },
    /// core(d·z).
    NullDirection {
        d: Vec<Cx>,
        core: Expr,
    },
    /// An arbitrary expression in z₁…z_n.
    Custom {
        expr: Expr,
    },
}

impl PhiSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, PhiSpec::Zero {})
    }

    /// Weights used by the difference variants, if given.
    pub fn rho(&self) -> Option<&[Cx]> {
        match self {
            PhiSpec::CyclicDiff { rho, .. }
            | PhiSpec::BaseDiff { rho, .. }
            | PhiSpec::PairedDiff { rho, .. }
            | PhiSpec::WeightedDiff { rho, .. } => rho.as_deref(),
            _ => None,
        }
    }

    /// Fills in missing difference weights with `rho`.
    pub fn with_default_rho(mut self, default: &[Cx]) -> Self {
        match &mut self {
            PhiSpec::CyclicDiff { rho, .. }
            | PhiSpec::BaseDiff { rho, .. }
            | PhiSpec::PairedDiff { rho, .. }
            | PhiSpec::WeightedDiff { rho, .. }
                if rho.is_none() =>
            {
                *rho = Some(default.to_vec());
            }
            _ => {}
        }
        self
    }

    /// Whether the variant is built to satisfy ρ·∇Φ ≡ 0.
    pub fn is_difference_variant(&self) -> bool {
        matches!(
            self,
            PhiSpec::CyclicDiff { .. }
                | PhiSpec::BaseDiff { .. }
                | PhiSpec::PairedDiff { .. }
                | PhiSpec::WeightedDiff { .. }
        )
    }
}

fn reciprocal_weights(rho: Option<&[Cx]>, n: usize) -> Result<Vec<Cx>, FamilyError> {
    let rho = rho.ok_or_else(|| FamilyError::Phi("difference variant needs ρ".into()))?;
    if rho.len() != n {
        return Err(FamilyError::Dimension {
            what: "ρ",
            expected: n,
            got: rho.len(),
        });
    }
    rho.iter()
        .map(|&r| {
            if r == ZERO {
                Err(FamilyError::Phi(
                    "difference variants need every ρ_j ≠ 0".into(),
                ))
            } else {
                Ok(ONE / r)
            }
        })
        .collect()
}

/// Linear coordinate z_a/ρ_a − z_b/ρ_b.
fn difference(inv: &[Cx], a: usize, b: usize) -> Expr {
    let mut coeffs = vec![ZERO; inv.len()];
    coeffs[a] += inv[a];
    coeffs[b] -= inv[b];
    Expr::linear(&coeffs)
}

fn compose(core: &Expr, coords: Vec<Expr>, variant: &str) -> Result<Expr, FamilyError> {
    if core.arity() > coords.len() {
        return Err(FamilyError::Phi(format!(
            "{variant} core uses {} variables but only {} coordinates exist",
            core.arity(),
            coords.len()
        )));
    }
    Ok(core.substitute(&coords)?)
}

/// Builds Φ as an expression over z₁…z_n.
pub fn make_phi(spec: &PhiSpec, n: usize) -> Result<Expr, FamilyError> {
    if n == 0 {
        return Err(FamilyError::Phi("dimension must be ≥ 1".into()));
    }
    match spec {
        PhiSpec::Zero {} => Ok(Expr::zero()),
        PhiSpec::CyclicDiff { rho, core } => {
            let inv = reciprocal_weights(rho.as_deref(), n)?;
            let coords = (0..n).map(|j| difference(&inv, (j + 1) % n, j)).collect();
            compose(core, coords, "cyclic_diff")
        }
        PhiSpec::BaseDiff { rho, base, core } => {
            let inv = reciprocal_weights(rho.as_deref(), n)?;
            if *base >= n {
                return Err(FamilyError::Phi(format!("base index {base} out of range")));
            }
            let coords = (0..n)
                .filter(|&k| k != *base)
                .map(|k| difference(&inv, k, *base))
                .collect();
            compose(core, coords, "base_diff")
        }
        PhiSpec::PairedDiff { rho, core } => {
            if !n.is_multiple_of(2) {
                return Err(FamilyError::Phi(format!(
                    "paired_diff needs an even dimension, got {n}"
                )));
            }
            let inv = reciprocal_weights(rho.as_deref(), n)?;
            let coords = (0..n / 2)
                .map(|k| difference(&inv, 2 * k + 1, 2 * k))
                .collect();
            compose(core, coords, "paired_diff")
        }
        PhiSpec::WeightedDiff { rho, core } => {
            let inv = reciprocal_weights(rho.as_deref(), n)?;
            let mut coeffs: Vec<Cx> = inv.iter().map(|&r| -r).collect();
            coeffs[0] = Cx::from((n - 1) as f64) * inv[0];
            compose(core, vec![Expr::linear(&coeffs)], "weighted_diff")
        }
        PhiSpec::NullDirection { d, core } => {
            if d.len() != n {
                return Err(FamilyError::Dimension {
                    what: "d",
                    expected: n,
                    got: d.len(),
                });
            }
            compose(core, vec![Expr::linear(d)], "null_direction")
        }
        PhiSpec::Custom { expr } => {
            if expr.arity() > n {
                return Err(FamilyError::Phi(format!(
                    "custom Φ uses {} variables in dimension {n}",
                    expr.arity()
                )));
            }
            Ok(expr.clone())
        }
    }
}
