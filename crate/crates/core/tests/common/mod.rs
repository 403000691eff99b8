#![allow(dead_code)]

use waring::sampling::Sampler;
use waring::{Cx, Expr};

/// Random tree of depth ≤ `depth` over z₁…z_n with constants in the unit
/// square and powers 1..=3.
pub fn random_expr(s: &mut Sampler, depth: usize, n: usize) -> Expr {
    if depth <= 1 || s.integer(0, 3) == 0 {
        return if s.integer(0, 2) > 0 {
            Expr::var(s.integer(0, n as u32 - 1) as usize)
        } else {
            Expr::constant(Cx::new(s.real(-1.0, 1.0), s.real(-1.0, 1.0)))
        };
    }
    let sub = |s: &mut Sampler| Box::new(random_expr(s, depth - 1, n));
    match s.integer(0, 8) {
        0 => Expr::Add(sub(s), sub(s)),
        1 => Expr::Mul(sub(s), sub(s)),
        2 => Expr::Neg(sub(s)),
        3 => Expr::PowInt(sub(s), s.integer(1, 3)),
        4 => Expr::Exp(sub(s)),
        5 => Expr::Sin(sub(s)),
        6 => Expr::Cos(sub(s)),
        7 => Expr::Sinh(sub(s)),
        _ => Expr::Cosh(sub(s)),
    }
}

/// max_j |jet − central difference| / max(1, max_j |jet|), step 1e-6.
pub fn relative_gradient_error(u: &Expr, z: &[Cx]) -> Option<f64> {
    let jet = u.eval_jet(z).ok()?;
    let h = 1e-6;
    let mut zp = z.to_vec();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for (j, g) in jet.gradient().iter().enumerate() {
        zp[j] = z[j] + h;
        let up = u.eval_value(&zp).ok()?;
        zp[j] = z[j] - h;
        let um = u.eval_value(&zp).ok()?;
        zp[j] = z[j];
        worst = worst.max(((up - um) / (2.0 * h) - g).norm());
        scale = scale.max(g.norm());
    }
    Some(worst / scale)
}

pub fn dot(a: &[Cx], b: &[Cx]) -> Cx {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// σ with ρ·σ = 1: the minimum-norm solution plus a random multiple of a
/// direction orthogonal to ρ.
pub fn sigma_for(rho: &[Cx], s: &mut Sampler, spread: f64) -> Vec<Cx> {
    let norm2: f64 = rho.iter().map(|r| r.norm_sqr()).sum();
    let base: Vec<Cx> = rho.iter().map(|r| r.conj() / norm2).collect();
    let w = s.polydisc(rho.len(), 1.0);
    let k = dot(rho, &w) / norm2;
    base.iter()
        .zip(&w)
        .zip(rho)
        .map(|((b, wj), r)| b + spread * (wj - k * r.conj()))
        .collect()
}
