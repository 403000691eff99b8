use proptest::prelude::*;

use waring::cxjet::{cx_pow_int, Jet};
use waring::families::{
    construct, make_phi, null_power_residuals, solve_null_direction, FamilyKind, FamilySpec,
    ParaboloidParams, PhiSpec,
};
use waring::poly::{expand_roots, find_roots, Monomial, UniPoly, WaringForm};
use waring::verify::{residual_at, verify_family, VerifyOptions};
use waring::{parse_expr, Cx, Expr};

mod common;
use common::relative_gradient_error;

fn cx(r: f64) -> impl Strategy<Value = Cx> {
    (-r..r, -r..r).prop_map(|(a, b)| Cx::new(a, b))
}

fn cx_vec(n: usize, r: f64) -> impl Strategy<Value = Vec<Cx>> {
    prop::collection::vec(cx(r), n)
}

fn away_from_zero() -> impl Strategy<Value = Cx> {
    (0.3f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(m, a)| Cx::from_polar(m, a))
}

fn expr_tree(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0..n).prop_map(Expr::var), cx(1.0).prop_map(Expr::constant),];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            inner.clone().prop_map(move |x| Expr::Neg(b(x))),
            (inner.clone(), 1u32..=3).prop_map(move |(x, k)| Expr::PowInt(b(x), k)),
            inner.clone().prop_map(move |x| Expr::Exp(b(x))),
            inner.clone().prop_map(move |x| Expr::Sin(b(x))),
            inner.clone().prop_map(move |x| Expr::Cos(b(x))),
            inner.clone().prop_map(move |x| Expr::Sinh(b(x))),
            inner.prop_map(move |x| Expr::Cosh(b(x))),
        ]
    })
}

fn tree_and_point() -> impl Strategy<Value = (Expr, Vec<Cx>)> {
    (1usize..=4).prop_flat_map(|n| (expr_tree(n), cx_vec(n, 0.7)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jet_gradient_matches_differences((u, z) in tree_and_point()) {
        prop_assert!(u.depth() <= 6);
        let value = u.eval_value(&z);
        prop_assume!(matches!(value, Ok(v) if v.norm() < 1e6));
        let err = relative_gradient_error(&u, &z).unwrap();
        prop_assert!(err <= 1e-6, "{u} at {z:?}: {err}");
    }

    #[test]
    fn value_path_equals_jet_value((u, z) in tree_and_point()) {
        let v = u.eval_value(&z);
        let j = u.eval_jet(&z);
        match (v, j) {
            (Ok(v), Ok(j)) => prop_assert_eq!(v, j.value()),
            (Err(_), Err(_)) => {}
            (v, j) => prop_assert!(false, "paths disagree: {v:?} vs {j:?}"),
        }
    }

    #[test]
    fn printed_trees_parse_back((u, z) in tree_and_point()) {
        let back = parse_expr(&u.to_string(), z.len()).unwrap();
        let (a, b) = (u.eval_value(&z).unwrap(), back.eval_value(&z).unwrap());
        prop_assume!(a.norm() < 1e6);
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{u}: {a} vs {b}");
    }

    #[test]
    fn jet_product_commutes(a in cx_vec(4, 2.0), b in cx_vec(4, 2.0)) {
        let x = Jet::new(a[0], a[1..].to_vec());
        let y = Jet::new(b[0], b[1..].to_vec());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
    }

    #[test]
    fn pow_int_matches_repeated_product(a in cx_vec(3, 1.5), k in 0u32..=8) {
        let x = Jet::new(a[0], a[1..].to_vec());
        let mut want = Jet::constant(Cx::new(1.0, 0.0), 2);
        for _ in 0..k {
            want = want.mul(&x).unwrap();
        }
        let got = x.pow_int(k);
        let tol = 1e-12 * (1.0 + want.value().norm());
        prop_assert!((got.value() - want.value()).norm() <= tol);
        for (g, w) in got.gradient().iter().zip(want.gradient()) {
            prop_assert!((g - w).norm() <= 1e-12 * (1.0 + w.norm()) * (1 + k) as f64);
        }
        prop_assert!((cx_pow_int(a[0], k) - want.value()).norm() <= tol);
    }

    #[test]
    fn roots_reexpand_to_coefficients(
        roots in prop::collection::vec(cx(2.0), 1..=6),
        leading in away_from_zero(),
    ) {
        let coeffs = expand_roots(leading, &roots);
        let found = find_roots(&coeffs).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        let back = expand_roots(leading, &found);
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for (c, b) in coeffs.iter().zip(&back) {
            prop_assert!((c - b).norm() <= 1e-8 * scale, "{coeffs:?} vs {back:?}");
        }
    }

    #[test]
    fn diagonal_matches_its_monomials(
        ell in 1u32..=4,
        n in 1usize..=5,
        z in cx_vec(5, 2.0),
    ) {
        let exps = vec![ell; n];
        let diag = WaringForm::diagonal(exps.clone()).unwrap();
        let terms = exps
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                let mut ex = vec![0; n];
                ex[j] = e;
                Monomial { coeff: Cx::new(1.0, 0.0), exponents: ex }
            })
            .collect();
        let mono = WaringForm::monomials(terms).unwrap();
        let a = diag.eval_cx(&z[..n]).unwrap();
        let b = mono.eval_cx(&z[..n]).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn linear_power_expands_the_power(rho in cx_vec(3, 1.0), x in cx_vec(3, 1.0), ell in 1u32..=4) {
        let form = WaringForm::linear_power(&rho, ell).unwrap();
        let want = cx_pow_int(rho.iter().zip(&x).map(|(r, v)| r * v).sum(), ell);
        prop_assert!((form.eval_cx(&x).unwrap() - want).norm() <= 1e-12 * (1.0 + want.norm()) * 16.0);
    }

    #[test]
    fn substitution_composes(
        outer in expr_tree(2),
        inner1 in expr_tree(3),
        inner2 in expr_tree(3),
        z in cx_vec(3, 0.5),
    ) {
        let composed = outer.substitute(&[inner1.clone(), inner2.clone()]).unwrap();
        let a = composed.eval_value(&z);
        let w = [inner1.eval_value(&z), inner2.eval_value(&z)];
        prop_assume!(a.is_ok() && w.iter().all(|v| v.is_ok()));
        let w: Vec<Cx> = w.into_iter().map(|v| v.unwrap()).collect();
        prop_assume!(w.iter().all(|v| v.norm() < 50.0));
        let b = outer.eval_value(&w);
        prop_assume!(b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assume!(b.norm() < 1e6);
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()), "{a} vs {b}, w = {w:?}");
    }

    #[test]
    fn difference_generators_are_annihilated(
        rho in prop::collection::vec(away_from_zero(), 4),
        which in 0usize..4,
        base in 0usize..4,
        core in expr_tree(3),
        z in cx_vec(4, 1.0),
    ) {
        let n = 4;
        let core_arity = [n, n - 1, n / 2, 1][which];
        prop_assume!(core.arity() <= core_arity);
        let rho_opt = Some(rho.clone());
        let spec = match which {
            0 => PhiSpec::CyclicDiff { rho: rho_opt, core },
            1 => PhiSpec::BaseDiff { rho: rho_opt, base, core },
            2 => PhiSpec::PairedDiff { rho: rho_opt, core },
            _ => PhiSpec::WeightedDiff { rho: rho_opt, core },
        };
        let phi = make_phi(&spec, n).unwrap();
        let jet = phi.eval_jet(&z);
        prop_assume!(matches!(&jet, Ok(j) if j.value().norm() < 1e6));
        let jet = jet.unwrap();
        let d: Cx = rho.iter().zip(jet.gradient()).map(|(r, g)| r * g).sum();
        let g: f64 = jet.gradient().iter().map(|v| v.norm()).sum();
        prop_assert!(d.norm() <= 1e-10 * (1.0 + g), "{d} vs {g}");
    }

    #[test]
    fn isotropic_directions_solve_their_conditions(sigma in prop::collection::vec(away_from_zero(), 3)) {
        let fixed = [None, None, Some(Cx::new(-1.0, 0.0))];
        let cands = solve_null_direction(&sigma, &[2, 2, 2], &fixed).unwrap();
        for c in cands {
            let scale = 1.0 + c.d.iter().map(|v| v.norm_sqr()).sum::<f64>();
            for r in null_power_residuals(&sigma, &[2, 2, 2], &c.d) {
                prop_assert!(r.norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn paraboloid_residual_vanishes(c in cx_vec(3, 2.0), z in cx_vec(3, 2.0)) {
        let built = construct(&FamilySpec::new(FamilyKind::T8Case2(ParaboloidParams { c }))).unwrap();
        let r = residual_at(&built.u, &built.form, &built.rhs, &z).unwrap();
        prop_assert!(r.norm() <= 1e-12);
    }

    #[test]
    fn rhs_factored_matches_coefficients(
        roots in prop::collection::vec(cx(1.5), 0..=4),
        w in cx(2.0),
    ) {
        let p = UniPoly::with_distinct_roots(Cx::new(2.0, -1.0), &roots).unwrap();
        let coeffs = p.coefficients();
        let h: Cx = coeffs.iter().rev().fold(Cx::new(0.0, 0.0), |acc, c| acc * w + c);
        prop_assert!((p.eval_cx(w) - h).norm() <= 1e-10 * (1.0 + h.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verification_is_reproducible(seed in any::<u64>(), c in cx_vec(2, 1.0)) {
        let spec = FamilySpec::new(FamilyKind::T8Case2(ParaboloidParams { c }));
        let opts = VerifyOptions { samples: 30, seed, ..Default::default() };
        let a = serde_json::to_string(&verify_family(&spec, opts).unwrap()).unwrap();
        let b = serde_json::to_string(&verify_family(&spec, opts).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}
