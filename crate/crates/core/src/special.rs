//! Weierstrass ℘ near the origin and the one-variable left-factor ODEs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cxjet::{Analytic, Cx, Jet, JetError, ONE, ZERO};
use crate::poly::{find_roots, PolyError};
use crate::sampling::Sampler;

/// Laurent evaluation is refused at or beyond this modulus.
pub const DEFAULT_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("℘ has a pole at 0")]
    Pole,
    #[error("|z| = {modulus} is outside the series radius {radius}")]
    OutsideRadius { modulus: f64, radius: f64 },
    #[error("invalid parameters: {0}")]
    InvalidCase(String),
    #[error("no admissible sample point found")]
    NoSamples,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassParams {
    pub g2: Cx,
    pub g3: Cx,
}

impl WeierstrassParams {
    pub fn new(g2: Cx, g3: Cx) -> Self {
        WeierstrassParams { g2, g3 }
    }

    /// g₂³ − 27g₃².
    pub fn discriminant(&self) -> Cx {
        self.g2.powu(3) - 27.0 * self.g3 * self.g3
    }

    /// Roots e₁, e₂, e₃ of 4t³ − g₂t − g₃.
    pub fn roots(&self) -> Result<[Cx; 3], SpecialError> {
        let r = find_roots(&[-self.g3, -self.g2, ZERO, Cx::from(4.0)])?;
        Ok([r[0], r[1], r[2]])
    }

    /// c₂ … c_{terms+1} of ℘(z) = z⁻² + Σ c_k z^{2k−2}.
    pub fn laurent_coefficients(&self, terms: usize) -> Vec<Cx> {
        // c[k] for k = 0 … terms+1; c[0], c[1] unused
        let mut c = vec![ZERO; terms + 2];
        if terms >= 1 {
            c[2] = self.g2 / 20.0;
        }
        if terms >= 2 {
            c[3] = self.g3 / 28.0;
        }
        for k in 4..terms + 2 {
            let s: Cx = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
            c[k] = s * 3.0 / ((2 * k + 1) as f64 * (k - 3) as f64);
        }
        c.split_off(2)
    }
}

/// (℘(z), ℘′(z)) from `terms` Laurent coefficients, for 0 < |z| < 1.
pub fn wp(z: Cx, p: &WeierstrassParams, terms: usize) -> Result<(Cx, Cx), SpecialError> {
    wp_within(z, p, terms, DEFAULT_RADIUS)
}

pub fn wp_within(
    z: Cx,
    p: &WeierstrassParams,
    terms: usize,
    radius: f64,
) -> Result<(Cx, Cx), SpecialError> {
    if z == ZERO {
        return Err(SpecialError::Pole);
    }
    if z.norm() >= radius {
        return Err(SpecialError::OutsideRadius {
            modulus: z.norm(),
            radius,
        });
    }
    let c = p.laurent_coefficients(terms);
    let z2 = z * z;
    // Σ c_k t^{k−2} and Σ (k−1) c_k t^{k−2} with t = z², by Horner from the top
    let mut s = ZERO;
    let mut ds = ZERO;
    for (i, &ck) in c.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        s = s * z2 + ck;
        ds = ds * z2 + (k - 1.0) * ck;
    }
    let value = ONE / z2 + s * z2;
    let deriv = -2.0 / (z2 * z) + 2.0 * ds * z;
    Ok((value, deriv))
}

/// ℘ as a one-variable jet.
pub fn wp_jet(z: Cx, p: &WeierstrassParams, terms: usize) -> Result<Jet, SpecialError> {
    let (v, d) = wp(z, p, terms)?;
    Ok(Jet::new(v, vec![d]))
}

/// Left factors f(w) of meromorphic type together with the ODE they satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeftFactorCase {
    /// f = A₁e^{A₀w} + α₁ with f′ = A₀(f − α₁).
    C1Exp { a0: Cx, a1: Cx, alpha1: Cx },
    /// f = (α₂A₁E − α₁)/(A₁E − 1), E = e^{A₀(α₁−α₂)w}, with
    /// f′ = A₀(f − α₁)(f − α₂).
    C2Moebius {
        a0: Cx,
        a1: Cx,
        alpha1: Cx,
        alpha2: Cx,
    },
    /// f = ((α₁−α₂)/2) sin(√(−A₀)w + A₁) + (α₁+α₂)/2 with
    /// (f′)² = A₀(f − α₁)(f − α₂).
    C3Sin {
        a0: Cx,
        a1: Cx,
        alpha1: Cx,
        alpha2: Cx,
    },
    /// f = (m₀℘ + m₁)/(m₂℘ + m₃) tested against
    /// (w−a₁)^{μ₁}(w−a₂)^{μ₂}(f′)² = A₀ Π_{k≤3}(f − α_k).
    C4Elliptic {
        weierstrass: WeierstrassParams,
        mobius: [Cx; 4],
        #[serde(default)]
        m1: u32,
        #[serde(default)]
        m2: u32,
        #[serde(default)]
        a1: Cx,
        #[serde(default)]
        a2: Cx,
        a0: Cx,
        alphas: [Cx; 3],
    },
    /// As above with four α's.
    C5Elliptic4 {
        weierstrass: WeierstrassParams,
        mobius: [Cx; 4],
        #[serde(default)]
        m1: u32,
        #[serde(default)]
        m2: u32,
        #[serde(default)]
        a1: Cx,
        #[serde(default)]
        a2: Cx,
        a0: Cx,
        alphas: [Cx; 4],
    },
}

impl LeftFactorCase {
    /// f = λ℘ + μ, for which α_k = μ + λe_k and A₀ = 4/λ.
    pub fn elliptic_affine(
        weierstrass: WeierstrassParams,
        lambda: Cx,
        mu: Cx,
    ) -> Result<Self, SpecialError> {
        if lambda == ZERO {
            return Err(SpecialError::InvalidCase("λ must be nonzero".into()));
        }
        let e = weierstrass.roots()?;
        Ok(LeftFactorCase::C4Elliptic {
            weierstrass,
            mobius: [lambda, mu, ZERO, ONE],
            m1: 0,
            m2: 0,
            a1: ZERO,
            a2: ZERO,
            a0: 4.0 / lambda,
            alphas: [mu + lambda * e[0], mu + lambda * e[1], mu + lambda * e[2]],
        })
    }

    /// f = α₄ + 1/(λ℘ + μ), for which α_k = α₄ + 1/(μ + λe_k) for k ≤ 3 and
    /// A₀ = 4/(λ Π_{k≤3}(α₄ − α_k)).
    pub fn elliptic_quartic(
        weierstrass: WeierstrassParams,
        lambda: Cx,
        mu: Cx,
        alpha4: Cx,
    ) -> Result<Self, SpecialError> {
        if lambda == ZERO {
            return Err(SpecialError::InvalidCase("λ must be nonzero".into()));
        }
        let e = weierstrass.roots()?;
        let beta = [mu + lambda * e[0], mu + lambda * e[1], mu + lambda * e[2]];
        if beta.contains(&ZERO) {
            return Err(SpecialError::InvalidCase("μ + λe_k must be nonzero".into()));
        }
        let alphas = [
            alpha4 + ONE / beta[0],
            alpha4 + ONE / beta[1],
            alpha4 + ONE / beta[2],
            alpha4,
        ];
        let prod: Cx = alphas[..3].iter().map(|a| alpha4 - a).product();
        Ok(LeftFactorCase::C5Elliptic4 {
            weierstrass,
            mobius: [alpha4 * lambda, alpha4 * mu + ONE, lambda, mu],
            m1: 0,
            m2: 0,
            a1: ZERO,
            a2: ZERO,
            a0: 4.0 / (lambda * prod),
            alphas,
        })
    }

    fn alphas(&self) -> Vec<Cx> {
        match self {
            LeftFactorCase::C1Exp { alpha1, .. } => vec![*alpha1],
            LeftFactorCase::C2Moebius { alpha1, alpha2, .. }
            | LeftFactorCase::C3Sin { alpha1, alpha2, .. } => vec![*alpha1, *alpha2],
            LeftFactorCase::C4Elliptic { alphas, .. } => alphas.to_vec(),
            LeftFactorCase::C5Elliptic4 { alphas, .. } => alphas.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), SpecialError> {
        let alphas = self.alphas();
        for (i, a) in alphas.iter().enumerate() {
            if alphas[..i].contains(a) {
                return Err(SpecialError::InvalidCase(
                    "α's must be pairwise distinct".into(),
                ));
            }
        }
        match self {
            LeftFactorCase::C1Exp { a0, a1, .. } | LeftFactorCase::C2Moebius { a0, a1, .. } => {
                if *a0 * *a1 == ZERO {
                    return Err(SpecialError::InvalidCase("A₀·A₁ must be nonzero".into()));
                }
            }
            // A₁ is only a phase here
            LeftFactorCase::C3Sin { a0, .. } => {
                if *a0 == ZERO {
                    return Err(SpecialError::InvalidCase("A₀ must be nonzero".into()));
                }
            }
            LeftFactorCase::C4Elliptic {
                mobius, a0, m1, m2, ..
            }
            | LeftFactorCase::C5Elliptic4 {
                mobius, a0, m1, m2, ..
            } => {
                if *a0 == ZERO {
                    return Err(SpecialError::InvalidCase("A₀ must be nonzero".into()));
                }
                if mobius[0] * mobius[3] - mobius[1] * mobius[2] == ZERO {
                    return Err(SpecialError::InvalidCase("Möbius map is degenerate".into()));
                }
                if m1 + m2 > 2 {
                    return Err(SpecialError::InvalidCase("m₁ + m₂ must be ≤ 2".into()));
                }
            }
        }
        Ok(())
    }

    fn is_elliptic(&self) -> bool {
        matches!(
            self,
            LeftFactorCase::C4Elliptic { .. } | LeftFactorCase::C5Elliptic4 { .. }
        )
    }

    /// f as a one-variable jet at w, or `None` when w is within `guard` of a
    /// pole of f.
    pub fn f_jet(&self, w: Cx, terms: usize, guard: f64) -> Result<Option<Jet>, SpecialError> {
        let x = Jet::var(0, w, 1)?;
        Ok(Some(match self {
            LeftFactorCase::C1Exp { a0, a1, alpha1 } => x
                .scale(*a0)
                .analytic(Analytic::Exp)?
                .scale(*a1)
                .add_const(*alpha1),
            LeftFactorCase::C2Moebius {
                a0,
                a1,
                alpha1,
                alpha2,
            } => {
                let k = *a0 * (*alpha1 - *alpha2);
                // zeros of A₁E − 1: k w + log A₁ = 2πi m
                let t = k * w + a1.ln();
                let m = (t.im / std::f64::consts::TAU).round();
                let dist = (t - Cx::new(0.0, std::f64::consts::TAU * m)).norm() / k.norm();
                if dist < guard {
                    return Ok(None);
                }
                let e = x.scale(k).analytic(Analytic::Exp)?.scale(*a1);
                let num = e.scale(*alpha2).add_const(-*alpha1);
                let den = e.add_const(-ONE);
                num.div(&den)?
            }
            LeftFactorCase::C3Sin {
                a0,
                a1,
                alpha1,
                alpha2,
            } => x
                .scale((-*a0).sqrt())
                .add_const(*a1)
                .analytic(Analytic::Sin)?
                .scale((*alpha1 - *alpha2) / 2.0)
                .add_const((*alpha1 + *alpha2) / 2.0),
            LeftFactorCase::C4Elliptic {
                weierstrass,
                mobius,
                ..
            }
            | LeftFactorCase::C5Elliptic4 {
                weierstrass,
                mobius,
                ..
            } => {
                let p = wp_jet(w, weierstrass, terms)?;
                let den = p.scale(mobius[2]).add_const(mobius[3]);
                if den.value().norm() < guard * (1.0 + p.value().norm()) {
                    return Ok(None);
                }
                p.scale(mobius[0]).add_const(mobius[1]).div(&den)?
            }
        }))
    }

    /// Defining ODE residual at w, or `None` at excluded points.
    pub fn residual(&self, w: Cx, terms: usize, guard: f64) -> Result<Option<Cx>, SpecialError> {
        let Some(f) = self.f_jet(w, terms, guard)? else {
            return Ok(None);
        };
        let (v, d) = (f.value(), f.gradient()[0]);
        let prod = |alphas: &[Cx]| alphas.iter().map(|a| v - a).product::<Cx>();
        Ok(Some(match self {
            LeftFactorCase::C1Exp { a0, alpha1, .. } => d - *a0 * (v - alpha1),
            LeftFactorCase::C2Moebius {
                a0, alpha1, alpha2, ..
            } => d - *a0 * (v - alpha1) * (v - alpha2),
            LeftFactorCase::C3Sin {
                a0, alpha1, alpha2, ..
            } => d * d - *a0 * (v - alpha1) * (v - alpha2),
            LeftFactorCase::C4Elliptic {
                m1,
                m2,
                a1,
                a2,
                a0,
                alphas,
                ..
            } => (w - a1).powu(*m1) * (w - a2).powu(*m2) * d * d - *a0 * prod(alphas),
            LeftFactorCase::C5Elliptic4 {
                m1,
                m2,
                a1,
                a2,
                a0,
                alphas,
                ..
            } => (w - a1).powu(*m1) * (w - a2).powu(*m2) * d * d - *a0 * prod(alphas),
        }))
    }
}

/// Sampling region and pole guard used by [`verify_left_factor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeSampling {
    /// Closed-form cases: disc |w| ≤ radius.
    pub radius: f64,
    /// Elliptic cases: annulus r_min ≤ |w| ≤ r_max.
    pub annulus: (f64, f64),
    /// Points within this distance of a pole are skipped.
    pub guard: f64,
    pub terms: usize,
}

impl Default for OdeSampling {
    fn default() -> Self {
        OdeSampling {
            radius: 2.0,
            annulus: (0.1, 0.5),
            guard: 1e-3,
            terms: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeReport {
    pub max_residual: f64,
    pub worst_point: Cx,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    pub sampling: OdeSampling,
}

/// Maximum defining-ODE residual of `case` over `samples` admissible points.
pub fn verify_left_factor(
    case: &LeftFactorCase,
    samples: usize,
    seed: u64,
) -> Result<OdeReport, SpecialError> {
    verify_left_factor_with(case, samples, seed, OdeSampling::default())
}

pub fn verify_left_factor_with(
    case: &LeftFactorCase,
    samples: usize,
    seed: u64,
    sampling: OdeSampling,
) -> Result<OdeReport, SpecialError> {
    case.validate()?;
    let mut rng = Sampler::new(seed);
    let mut max_residual: f64 = 0.0;
    let mut worst_point = ZERO;
    let mut taken = 0;
    let mut skipped = 0;
    let budget = 100 * samples.max(1);
    while taken < samples {
        if taken + skipped >= budget {
            return Err(SpecialError::NoSamples);
        }
        let w = if case.is_elliptic() {
            rng.annulus(sampling.annulus.0, sampling.annulus.1)
        } else {
            rng.disc(sampling.radius)
        };
        match case.residual(w, sampling.terms, sampling.guard)? {
            None => skipped += 1,
            Some(r) => {
                taken += 1;
                if r.norm() > max_residual || taken == 1 {
                    max_residual = max_residual.max(r.norm());
                    worst_point = w;
                }
            }
        }
    }
    Ok(OdeReport {
        max_residual,
        worst_point,
        samples,
        skipped,
        seed,
        sampling,
    })
}
