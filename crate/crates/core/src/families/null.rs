//! Null directions for Waring forms.
//!
//! For u = σ·z + f(d·z) each gradient component is σ_j + d_j t with
//! t = f′(d·z), so Σ_j (σ_j + d_j t)^{ℓ_j} is a polynomial in t whose
//! coefficient of t^ι is
//!
//! ```text
//! N_ι(d) = Σ_j C(ℓ_j, ι) σ_j^{ℓ_j − ι} d_j^ι,   ι = 1 … max ℓ_j.
//! ```
//!
//! The composite solves the PDE for every entire f exactly when all N_ι
//! vanish. The solver returns every N_ι for each candidate it finds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::FamilyError;
use crate::cxjet::{cx_pow_int, Cx, ONE, ZERO};
use crate::poly::{binomial, cmp_lex, find_roots};

/// N_ι(d) for ι = 1 … max ℓ_j.
pub fn null_power_residuals(sigma: &[Cx], exponents: &[u32], d: &[Cx]) -> Vec<Cx> {
    let top = exponents.iter().copied().max().unwrap_or(0);
    (1..=top)
        .map(|iota| {
            sigma
                .iter()
                .zip(exponents)
                .zip(d)
                .filter(|((_, &l), _)| l >= iota)
                .map(|((&s, &l), &dj)| {
                    Cx::from(binomial(l, iota)) * cx_pow_int(s, l - iota) * cx_pow_int(dj, iota)
                })
                .sum()
        })
        .collect()
}

/// The same sums without binomial weights, Σ_j σ_j^{ℓ_j − ι} d_j^ι.
pub fn unweighted_power_sums(sigma: &[Cx], exponents: &[u32], d: &[Cx]) -> Vec<Cx> {
    let top = exponents.iter().copied().max().unwrap_or(0);
    (1..=top)
        .map(|iota| {
            sigma
                .iter()
                .zip(exponents)
                .zip(d)
                .filter(|((_, &l), _)| l >= iota)
                .map(|((&s, &l), &dj)| cx_pow_int(s, l - iota) * cx_pow_int(dj, iota))
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCandidate {
    pub d: Vec<Cx>,
    /// N_ι(d) for ι = 1 … max ℓ_j.
    pub residuals: Vec<Cx>,
}

impl NullCandidate {
    fn new(sigma: &[Cx], exponents: &[u32], d: Vec<Cx>) -> Self {
        let residuals = null_power_residuals(sigma, exponents, &d);
        NullCandidate { d, residuals }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

/// Affine relation d_p = offset + slope · d_q from the ι = 1 condition, with
/// every other component fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearElimination {
    pub solved: usize,
    pub free: usize,
    pub offset: Cx,
    pub slope: Cx,
}

fn validate(sigma: &[Cx], exponents: &[u32], fixed: &[Option<Cx>]) -> Result<(), FamilyError> {
    let n = sigma.len();
    if exponents.len() != n {
        return Err(FamilyError::Dimension {
            what: "exponents",
            expected: n,
            got: exponents.len(),
        });
    }
    if fixed.len() != n {
        return Err(FamilyError::Dimension {
            what: "fixed assignment",
            expected: n,
            got: fixed.len(),
        });
    }
    if exponents.contains(&0) {
        return Err(FamilyError::Structure("exponents must be ≥ 1".into()));
    }
    Ok(())
}

/// Solves the ι = 1 condition for `solved` in terms of `free`, with every
/// other coordinate taken from `fixed`.
pub fn eliminate_linear(
    sigma: &[Cx],
    exponents: &[u32],
    fixed: &[Option<Cx>],
    solved: usize,
    free: usize,
) -> Result<LinearElimination, FamilyError> {
    validate(sigma, exponents, fixed)?;
    let weight = |j: usize| Cx::from(exponents[j] as f64) * cx_pow_int(sigma[j], exponents[j] - 1);
    let mut known = ZERO;
    for (j, v) in fixed.iter().enumerate() {
        if j == solved || j == free {
            continue;
        }
        let v = v.ok_or_else(|| {
            FamilyError::Structure(format!("component {j} is neither fixed nor free"))
        })?;
        known += weight(j) * v;
    }
    let a = weight(solved);
    if a == ZERO {
        return Err(FamilyError::NoSolution(format!(
            "linear condition does not involve component {solved}"
        )));
    }
    Ok(LinearElimination {
        solved,
        free,
        offset: -known / a,
        slope: -weight(free) / a,
    })
}

fn poly_mul(a: &[Cx], b: &[Cx]) -> Vec<Cx> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_pow(a: &[Cx], k: u32) -> Vec<Cx> {
    (0..k).fold(vec![ONE], |acc, _| poly_mul(&acc, a))
}

fn trim(mut c: Vec<Cx>, scale: f64) -> Vec<Cx> {
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() <= 1e-14 * scale) {
        c.pop();
    }
    c
}

/// Roots of a quadratic c0 + c1 t + c2 t² via the cancellation-free formula.
fn quadratic_roots(c: &[Cx]) -> [Cx; 2] {
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    let disc = (c1 * c1 - 4.0 * c0 * c2).sqrt();
    let sign = if (c1.conj() * disc).re >= 0.0 {
        ONE
    } else {
        -ONE
    };
    let q = -0.5 * (c1 + sign * disc);
    if q == ZERO {
        [ZERO, ZERO]
    } else {
        [q / c2, c0 / q]
    }
}

fn dedup_sorted(mut v: Vec<NullCandidate>, key: usize) -> Vec<NullCandidate> {
    v.sort_by(|a, b| cmp_lex(&a.d[key], &b.d[key]));
    let mut out: Vec<NullCandidate> = Vec::new();
    for c in v {
        let dup = out.iter().any(|o| {
            o.d.iter()
                .zip(&c.d)
                .all(|(x, y)| (x - y).norm() <= 1e-9 * (1.0 + x.norm()))
        });
        if !dup {
            out.push(c);
        }
    }
    out
}

/// Candidate null directions d for weights `sigma` and exponents ℓ_j.
///
/// `fixed[j] = Some(v)` pins d_j = v. With exactly two free components the
/// ι = 1 condition is eliminated and each remaining condition is solved as a
/// univariate polynomial; every root of every condition becomes a candidate.
/// Otherwise a damped Gauss–Newton iteration on the stacked conditions runs
/// from deterministic starts. Candidates always carry all residuals N_ι.
pub fn solve_null_direction(
    sigma: &[Cx],
    exponents: &[u32],
    fixed: &[Option<Cx>],
) -> Result<Vec<NullCandidate>, FamilyError> {
    validate(sigma, exponents, fixed)?;
    if fixed.iter().flatten().all(|v| *v == ZERO) {
        return Err(FamilyError::NoSolution(
            "at least one component of d must be fixed to a nonzero value".into(),
        ));
    }
    let free: Vec<usize> = (0..sigma.len()).filter(|&j| fixed[j].is_none()).collect();
    match free.len() {
        0 => Err(FamilyError::Structure(
            "no free components to solve for".into(),
        )),
        2 => solve_two_free(sigma, exponents, fixed, free[0], free[1]),
        _ => Ok(solve_newton(sigma, exponents, fixed, &free)),
    }
}

fn solve_two_free(
    sigma: &[Cx],
    exponents: &[u32],
    fixed: &[Option<Cx>],
    p: usize,
    q: usize,
) -> Result<Vec<NullCandidate>, FamilyError> {
    let elim = eliminate_linear(sigma, exponents, fixed, p, q)
        .or_else(|_| eliminate_linear(sigma, exponents, fixed, q, p))?;
    let top = exponents.iter().copied().max().unwrap_or(1);
    // d_j as a polynomial in the free parameter t = d_{elim.free}
    let comps: Vec<Vec<Cx>> = (0..sigma.len())
        .map(|j| {
            if j == elim.free {
                vec![ZERO, ONE]
            } else if j == elim.solved {
                vec![elim.offset, elim.slope]
            } else {
                vec![fixed[j].unwrap_or(ZERO)]
            }
        })
        .collect();
    let build = |t: Cx| -> Vec<Cx> {
        let mut d: Vec<Cx> = fixed.iter().map(|v| v.unwrap_or(ZERO)).collect();
        d[elim.free] = t;
        d[elim.solved] = elim.offset + elim.slope * t;
        d
    };

    let mut candidates = Vec::new();
    for iota in 2..=top {
        let mut cond = vec![ZERO];
        for (j, comp) in comps.iter().enumerate() {
            let l = exponents[j];
            if l < iota {
                continue;
            }
            let w = Cx::from(binomial(l, iota)) * cx_pow_int(sigma[j], l - iota);
            let term: Vec<Cx> = poly_pow(comp, iota).iter().map(|c| w * c).collect();
            if term.len() > cond.len() {
                cond.resize(term.len(), ZERO);
            }
            for (k, t) in term.into_iter().enumerate() {
                cond[k] += t;
            }
        }
        let scale = cond.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cond = trim(cond, scale);
        let roots: Vec<Cx> = match cond.len() {
            0 | 1 => Vec::new(),
            2 => vec![-cond[0] / cond[1]],
            3 => quadratic_roots(&cond).to_vec(),
            _ => find_roots(&cond)?,
        };
        candidates.extend(
            roots
                .into_iter()
                .map(|t| NullCandidate::new(sigma, exponents, build(t))),
        );
    }
    if candidates.is_empty() {
        return Err(FamilyError::NoSolution(
            "no remaining condition determines the free component".into(),
        ));
    }
    Ok(dedup_sorted(candidates, elim.free))
}

/// Gaussian elimination with partial pivoting; `a` is row-major k×k.
fn solve_dense(mut a: Vec<Vec<Cx>>, mut b: Vec<Cx>) -> Option<Vec<Cx>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![ZERO; k];
    for row in (0..k).rev() {
        let s: Cx = (row + 1..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

const NEWTON_STARTS: usize = 24;
const NEWTON_ITERS: usize = 200;
const NEWTON_SEED: u64 = 0x5EED_D1EC;

fn solve_newton(
    sigma: &[Cx],
    exponents: &[u32],
    fixed: &[Option<Cx>],
    free: &[usize],
) -> Vec<NullCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(NEWTON_SEED);
    let base: Vec<Cx> = fixed.iter().map(|v| v.unwrap_or(ZERO)).collect();
    let scale = base.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let top = exponents.iter().copied().max().unwrap_or(1) as usize;
    let mut found = Vec::new();
    let mut best: Option<NullCandidate> = None;

    for _ in 0..NEWTON_STARTS {
        let mut d = base.clone();
        for &j in free {
            d[j] = Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        }
        for _ in 0..NEWTON_ITERS {
            let f = null_power_residuals(sigma, exponents, &d);
            // ∂N_ι/∂d_j = C(ℓ_j, ι) σ_j^{ℓ_j−ι} ι d_j^{ι−1}
            let jac: Vec<Vec<Cx>> = (1..=top as u32)
                .map(|iota| {
                    free.iter()
                        .map(|&j| {
                            let l = exponents[j];
                            if l < iota {
                                ZERO
                            } else {
                                Cx::from(binomial(l, iota) * iota as f64)
                                    * cx_pow_int(sigma[j], l - iota)
                                    * cx_pow_int(d[j], iota - 1)
                            }
                        })
                        .collect()
                })
                .collect();
            // normal equations JᴴJ δ = −Jᴴ F, lightly regularized
            let m = free.len();
            let mut a = vec![vec![ZERO; m]; m];
            let mut rhs = vec![ZERO; m];
            for (row, fi) in jac.iter().zip(&f) {
                for p in 0..m {
                    rhs[p] -= row[p].conj() * fi;
                    for q in 0..m {
                        a[p][q] += row[p].conj() * row[q];
                    }
                }
            }
            for (p, row) in a.iter_mut().enumerate() {
                row[p] += Cx::from(1e-14);
            }
            let Some(step) = solve_dense(a, rhs) else {
                break;
            };
            let mut size: f64 = 0.0;
            for (&j, s) in free.iter().zip(&step) {
                d[j] += s;
                size = size.max(s.norm());
            }
            if !d.iter().all(|v| crate::cxjet::is_finite(*v)) || size < 1e-15 * (1.0 + scale) {
                break;
            }
        }
        if !d.iter().all(|v| crate::cxjet::is_finite(*v)) {
            continue;
        }
        let cand = NullCandidate::new(sigma, exponents, d);
        if cand.max_residual() <= 1e-10 * (1.0 + scale.powi(top as i32)) {
            found.push(cand.clone());
        }
        if best
            .as_ref()
            .is_none_or(|b| cand.max_residual() < b.max_residual())
        {
            best = Some(cand);
        }
    }
    if found.is_empty() {
        best.into_iter().collect()
    } else {
        dedup_sorted(found, free[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Cx {
        Cx::new(x, 0.0)
    }

    #[test]
    fn isotropic_direction_for_unit_sigma() {
        let sigma = [r(2.0 / 7.0), r(3.0 / 7.0), r(6.0 / 7.0)];
        let cands = solve_null_direction(&sigma, &[2, 2, 2], &[None, None, Some(r(-1.0))]).unwrap();
        let want = [
            Cx::new(12.0, -21.0) / 13.0,
            Cx::new(18.0, 14.0) / 13.0,
            r(-1.0),
        ];
        // direct arithmetic: (12−21i)² + (18+14i)² = −169
        let s = Cx::new(12.0, -21.0).powi(2) + Cx::new(18.0, 14.0).powi(2);
        assert_eq!(s, r(-169.0));
        assert_eq!(cands.len(), 2);
        let hit = cands
            .iter()
            .find(|c| c.d.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-12))
            .expect("known direction among candidates");
        assert!(hit.max_residual() < 1e-12);
        // the other root is the conjugate direction
        let other = cands.iter().find(|c| *c != hit).unwrap();
        assert!(other.max_residual() < 1e-12);
        assert!((other.d[1] - want[1].conj()).norm() < 1e-12);
    }

    #[test]
    fn cubic_linear_elimination() {
        let sigma = [r(0.5), r(2.0 / 3.0), r(5.0 / 6.0)];
        let e = eliminate_linear(&sigma, &[3, 3, 3], &[None, None, Some(r(-1.0))], 0, 1).unwrap();
        assert!((e.offset - r(25.0 / 9.0)).norm() < 1e-14);
        assert!((e.slope - r(-16.0 / 9.0)).norm() < 1e-14);
    }

    #[test]
    fn cubic_candidates_report_every_condition() {
        let sigma = [r(0.5), r(2.0 / 3.0), r(5.0 / 6.0)];
        let cands = solve_null_direction(&sigma, &[3, 3, 3], &[None, None, Some(r(-1.0))]).unwrap();
        // roots of the quadratic (ι = 2) and of the cubic (ι = 3)
        assert_eq!(cands.len(), 5);
        for c in &cands {
            assert_eq!(c.residuals.len(), 3);
            assert!(c.residuals[0].norm() < 1e-12);
            let vanishing = c.residuals.iter().filter(|r| r.norm() < 1e-9).count();
            assert!(vanishing < 3, "over-determined system solved: {c:?}");
        }
    }

    #[test]
    fn disjoint_support() {
        // σ = (1, 0, 0), d₁ = 0: only Σ_{j≥2} d_j^ℓ survives
        let sigma = [ONE, ZERO, ZERO];
        let cands =
            solve_null_direction(&sigma, &[2, 2, 2], &[Some(ZERO), None, Some(r(-1.0))]).unwrap();
        assert!(!cands.is_empty());
        for c in &cands {
            assert!(c.max_residual() < 1e-10, "{c:?}");
            assert!((c.d[1].powi(2) + ONE).norm() < 1e-10);
        }
        let d = [ZERO, Cx::new(0.0, 1.0), r(-1.0)];
        for ell in 2..6u32 {
            let res = null_power_residuals(&sigma, &[ell; 3], &d);
            for (iota, v) in res.iter().enumerate().take(ell as usize - 1) {
                assert_eq!(*v, ZERO, "ℓ = {ell}, ι = {}", iota + 1);
            }
        }
    }

    #[test]
    fn newton_path_in_higher_dimension() {
        let sigma = [r(0.5), r(0.5), r(0.5), r(0.5)];
        let cands = solve_null_direction(&sigma, &[2; 4], &[None, None, None, Some(ONE)]).unwrap();
        assert!(!cands.is_empty());
        for c in &cands {
            assert!(c.max_residual() < 1e-9, "{c:?}");
            assert_eq!(c.d[3], ONE);
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let sigma = [ONE, ONE];
        assert!(solve_null_direction(&sigma, &[2, 2], &[None, None]).is_err());
        assert!(solve_null_direction(&sigma, &[2, 2], &[Some(ONE), Some(ONE)]).is_err());
        assert!(solve_null_direction(&sigma, &[2], &[None, Some(ONE)]).is_err());
    }
}
