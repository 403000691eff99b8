//! Worked instances: the isotropic eikonal solution, the cubic ones built
//! on the root of 91κ³ − 100κ² + 80κ − 152, the exponential envelopes, and
//! the mixed-exponent instance in seven variables.
//!
//! Instances whose constants have not been shown to satisfy every per-power
//! condition are returned flagged `unconfirmed`.

use super::{EnvelopeParams, FamilyError, FamilyKind, FamilySpec, LinearNullParams, PhiSpec};
use crate::cxjet::{Cx, I, ONE};
use crate::expr::Expr;
use crate::poly::find_roots;

/// 91κ³ − 100κ² + 80κ − 152, ascending.
pub const CUBIC_COEFFS: [f64; 4] = [-152.0, 80.0, -100.0, 91.0];

fn r(x: f64) -> Cx {
    Cx::new(x, 0.0)
}

fn quadratic_sigma() -> Vec<Cx> {
    vec![r(2.0 / 7.0), r(3.0 / 7.0), r(6.0 / 7.0)]
}

fn isotropic_d() -> Vec<Cx> {
    vec![
        Cx::new(12.0, -21.0) / 13.0,
        Cx::new(18.0, 14.0) / 13.0,
        r(-1.0),
    ]
}

fn cubic_sigma() -> Vec<Cx> {
    vec![r(0.5), r(2.0 / 3.0), r(5.0 / 6.0)]
}

pub fn cubic_roots() -> Result<Vec<Cx>, FamilyError> {
    let c: Vec<Cx> = CUBIC_COEFFS.iter().map(|&x| r(x)).collect();
    Ok(find_roots(&c)?)
}

/// The root of the cubic with the smallest imaginary part, snapped to ℝ.
pub fn cubic_real_root() -> Result<Cx, FamilyError> {
    let roots = cubic_roots()?;
    let best = roots
        .iter()
        .min_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
        .copied()
        .ok_or_else(|| FamilyError::NoSolution("cubic has no roots".into()))?;
    Ok(r(best.re))
}

/// a = (25 − 16b)/9.
pub fn cubic_direction_a(b: Cx) -> Cx {
    (r(25.0) - 16.0 * b) / 9.0
}

/// u = (2/7)z₁ + (3/7)z₂ + (6/7)z₃ + f(d·z) with Σu_{zj}² = 1.
pub fn isotropic_linear(core: Expr) -> FamilySpec {
    FamilySpec::new(FamilyKind::T8Case1(LinearNullParams {
        exponents: vec![2, 2, 2],
        sigma: quadratic_sigma(),
        phi: Some(PhiSpec::NullDirection {
            d: isotropic_d(),
            core,
        }),
    }))
}

/// u = (1/2)z₁ + (2/3)z₂ + (5/6)z₃ + f(a z₁ + b z₂ − z₃), claimed to give
/// Σu_{zj}³ = 1 for b the real root of the cubic.
pub fn cubic_linear(core: Expr) -> Result<FamilySpec, FamilyError> {
    let b = cubic_real_root()?;
    Ok(FamilySpec::unconfirmed(FamilyKind::T8Case1(
        LinearNullParams {
            exponents: vec![3, 3, 3],
            sigma: cubic_sigma(),
            phi: Some(PhiSpec::NullDirection {
                d: vec![cubic_direction_a(b), b, r(-1.0)],
                core,
            }),
        },
    )))
}

/// u = f(d·z) e^{σ·z} with the isotropic constants, Σu_{zj}² = u².
pub fn isotropic_envelope(core: Expr) -> FamilySpec {
    FamilySpec::new(FamilyKind::T8Case4(EnvelopeParams {
        ell: 2,
        sigma: quadratic_sigma(),
        psi: PhiSpec::NullDirection {
            d: isotropic_d(),
            core,
        },
    }))
}

/// u = f(a z₁ + b z₂ − z₃) e^{σ·z} with σ = (1/2, 2/3, 5/6) and `b` any root
/// of the cubic, claimed to give Σu_{zj}³ = u³.
pub fn cubic_envelope(core: Expr, b: Cx) -> FamilySpec {
    FamilySpec::unconfirmed(FamilyKind::T8Case4(EnvelopeParams {
        ell: 3,
        sigma: cubic_sigma(),
        psi: PhiSpec::NullDirection {
            d: vec![cubic_direction_a(b), b, r(-1.0)],
            core,
        },
    }))
}

/// Mixed exponents (2,3,2,3,2,3,2) in seven variables with
/// u = σ·z + f(z₁ + iz₃ − z₅ − iz₇, a z₂ + b z₄ − z₆); `core` uses two
/// variables.
pub fn mixed_linear(core: Expr) -> Result<FamilySpec, FamilyError> {
    if core.arity() > 2 {
        return Err(FamilyError::Phi(format!(
            "core uses {} variables, at most 2 allowed",
            core.arity()
        )));
    }
    let b = cubic_real_root()?;
    let a = cubic_direction_a(b);
    let zero = r(0.0);
    let first = Expr::linear(&[ONE, zero, I, zero, -ONE, zero, -I]);
    let second = Expr::linear(&[zero, a, zero, b, zero, r(-1.0), zero]);
    let phi = core.substitute(&[first, second])?;
    Ok(FamilySpec::unconfirmed(FamilyKind::T8Case1(
        LinearNullParams {
            exponents: vec![2, 3, 2, 3, 2, 3, 2],
            sigma: vec![
                r(1.5),
                r(-1.0),
                r(1.5),
                r(-4.0 / 3.0),
                r(1.5),
                r(-5.0 / 3.0),
                r(1.5),
            ],
            phi: Some(PhiSpec::Custom { expr: phi }),
        },
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{construct, Check};
    use crate::poly::horner;

    #[test]
    fn cubic_has_one_real_root_in_bracket() {
        let c: Vec<Cx> = CUBIC_COEFFS.iter().map(|&x| r(x)).collect();
        // sign change by direct evaluation
        assert!(horner(&c, r(1.35)).0.re < 0.0);
        assert!(horner(&c, r(1.36)).0.re > 0.0);
        let roots = cubic_roots().unwrap();
        let real: Vec<_> = roots.iter().filter(|z| z.im.abs() < 1e-9).collect();
        assert_eq!(real.len(), 1);
        assert!(real[0].re > 1.35 && real[0].re < 1.36);
        let b = cubic_real_root().unwrap();
        assert!((b.re - 1.3577).abs() < 1e-3);
    }

    #[test]
    fn linear_condition_holds_for_cubic_constants() {
        let b = cubic_real_root().unwrap();
        let a = cubic_direction_a(b);
        let s = cubic_sigma();
        let lin = s[0] * s[0] * a + s[1] * s[1] * b - s[2] * s[2];
        assert!(lin.norm() < 1e-14);
    }

    #[test]
    fn sigma_power_sums_are_one() {
        for spec in [
            isotropic_linear(Expr::var(0)),
            cubic_linear(Expr::var(0)).unwrap(),
            mixed_linear(Expr::var(0)).unwrap(),
        ] {
            let c = construct(&spec).unwrap();
            let k = c
                .constraints
                .iter()
                .find(|k| k.name == "sigma_power_sum")
                .unwrap();
            let Check::Scalar(v) = k.check else { panic!() };
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn flags() {
        assert!(!isotropic_linear(Expr::zero()).unconfirmed);
        assert!(!isotropic_envelope(Expr::one()).unconfirmed);
        assert!(cubic_linear(Expr::zero()).unwrap().unconfirmed);
        assert!(cubic_envelope(Expr::one(), r(1.0)).unconfirmed);
        assert!(mixed_linear(Expr::zero()).unwrap().unconfirmed);
        assert!(mixed_linear(Expr::var(2)).is_err());
    }
}
