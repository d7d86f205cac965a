use gengauss::exprcalc;
use gengauss::measures::jacobi_measure;
use gengauss::num_complex::Complex64;
use gengauss::potential::solve_support;
use gengauss::quadrature::{apply_fn, norm_estimate, Polynomial};
use gengauss::rulegen::{
    build_rule, free_nodes, left_boundary_poly, reflect_rule, right_boundary_poly,
    taylor_reciprocal, BasisSide,
};
use gengauss::spline::{moment_spline, verify_spline_moments};
use proptest::prelude::*;

const JACOBI_PARAMS: [f64; 4] = [-0.5, 0.0, 0.5, 1.0];

fn expand(roots: &[(f64, u32)]) -> Vec<f64> {
    let mut poly = vec![1.0];
    for &(d, k) in roots {
        for _ in 0..k {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += d * c;
                next[i + 1] -= c;
            }
            poly = next;
        }
    }
    poly
}

fn legendre_moment(k: usize) -> f64 {
    if k % 2 == 0 {
        2.0 / (k as f64 + 1.0)
    } else {
        0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reciprocal_of_factored_polynomial_has_positive_series(
        roots in prop::collection::vec((0.05f64..3.0, 1u32..=3), 1..=5),
        order in 1usize..=12,
    ) {
        let series = taylor_reciprocal(&expand(&roots), order).unwrap();
        prop_assert!(series.iter().all(|&c| c > 0.0), "{series:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn boundary_basis_signs_and_partial_sums(
        r in 1usize..=6,
        s in 1usize..=6,
        n in 1usize..=8,
        ts in prop::collection::vec(-1.0f64..=1.0, 16),
    ) {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        let nodes = free_nodes(&m, -1.0, r, 1.0, s, n).unwrap();
        let polys = (0..r)
            .map(|j| left_boundary_poly(j, -1.0, r, 1.0, s, &nodes).unwrap())
            .chain((0..s).map(|j| right_boundary_poly(j, -1.0, r, 1.0, s, &nodes).unwrap()));
        for poly in polys {
            let sign = match poly.side() {
                BasisSide::Right(j) if j % 2 == 1 => -1.0,
                _ => 1.0,
            };
            for &t in &ts {
                prop_assert!(poly.omega_partial_sum(t).unwrap() > 0.0);
                prop_assert!(sign * poly.eval(t) >= 0.0, "{:?} at {t}", poly.side());
            }
        }
    }

    #[test]
    fn reflection_is_an_involution_and_mirrors_the_measure(
        p in 0usize..4,
        q in 0usize..4,
        r in 0usize..=5,
        s in 0usize..=5,
        n in 1usize..=10,
    ) {
        let (p, q) = (JACOBI_PARAMS[p], JACOBI_PARAMS[q]);
        let rule = build_rule(&jacobi_measure(p, q).unwrap(), -1.0, r, 1.0, s, n).unwrap();
        let once = reflect_rule(&rule).unwrap();
        prop_assert_eq!(&reflect_rule(&once).unwrap(), &rule);

        let mirrored = build_rule(&jacobi_measure(q, p).unwrap(), -1.0, s, 1.0, r, n).unwrap();
        let pairs = [
            (&once.nodes, &mirrored.nodes),
            (&once.interior_weights, &mirrored.interior_weights),
            (&once.left_weights, &mirrored.left_weights),
            (&once.right_weights, &mirrored.right_weights),
        ];
        for (x, y) in pairs {
            prop_assert_eq!(x.len(), y.len());
            for (u, v) in x.iter().zip(y.iter()) {
                prop_assert!((u - v).abs() <= 1e-11, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn apply_is_linear(
        r in 0usize..=4,
        s in 0usize..=4,
        n in 1usize..=8,
        f in prop::collection::vec(-1.0f64..1.0, 1..=12),
        g_seed in -1.0f64..1.0,
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
    ) {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        let rule = build_rule(&m, -1.0, r, 1.0, s, n).unwrap();
        let g: Vec<f64> = f.iter().enumerate().map(|(i, c)| (c + g_seed * i as f64).sin()).collect();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(u, v)| x * u + y * v).collect();
        let qf = apply_fn(&rule, &Polynomial(f)).unwrap();
        let qg = apply_fn(&rule, &Polynomial(g)).unwrap();
        let lhs = apply_fn(&rule, &Polynomial(combo)).unwrap();
        let scale = (1.0 + (x * qf).abs() + (y * qg).abs()) * norm_estimate(&rule);
        prop_assert!((lhs - (x * qf + y * qg)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn rules_integrate_polynomials_of_their_degree(
        r in 0usize..=3,
        s in 0usize..=3,
        n in 1usize..=6,
        coeffs in prop::collection::vec(-1.0f64..1.0, 24),
    ) {
        let m = jacobi_measure(0.0, 0.0).unwrap();
        let rule = build_rule(&m, -1.0, r, 1.0, s, n).unwrap();
        let degree = 2 * n + r + s - 1;
        let poly = coeffs[..=degree].to_vec();
        let exact: f64 = poly.iter().enumerate().map(|(k, c)| c * legendre_moment(k)).sum();
        let q = apply_fn(&rule, &Polynomial(poly)).unwrap();
        prop_assert!((q - exact).abs() <= 1e-11 * (1.0 + exact.abs()), "{q} vs {exact}");
    }

    #[test]
    fn support_of_symmetric_charges_is_symmetric(
        b in 1.05f64..3.0,
        alpha in 0.1f64..2.0,
    ) {
        let spec = solve_support(-b, alpha, b, alpha).unwrap();
        prop_assert!((spec.lo + spec.hi).abs() <= 1e-8, "{} {}", spec.lo, spec.hi);
    }

    #[test]
    fn support_reflects_with_the_charges(
        a in -3.0f64..-1.05,
        b in 1.05f64..3.0,
        alpha in 0.1f64..2.0,
        beta in 0.1f64..2.0,
    ) {
        let spec = solve_support(a, alpha, b, beta).unwrap();
        let mirror = solve_support(-b, beta, -a, alpha).unwrap();
        prop_assert!((spec.lo + mirror.hi).abs() <= 1e-8);
        prop_assert!((spec.hi + mirror.lo).abs() <= 1e-8);
    }

    #[test]
    fn level_sets_grow_with_rho(
        x in -2.5f64..2.5,
        y in -1.5f64..1.5,
        rho in 1.01f64..2.0,
        step in 0.0f64..1.0,
    ) {
        let spec = solve_support(-1.5, 1.0, 1.0, 1.2).unwrap();
        let z = Complex64::new(x, y);
        if spec.membership(z, rho) {
            prop_assert!(spec.membership(z, rho + step));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spline_matches_moments_up_to_its_order(
        m in 1usize..=2,
        n in 1usize..=3,
        c in 0.2f64..2.0,
    ) {
        let f = exprcalc::parse(&format!("exp(-{c}*t)")).unwrap();
        let sd = moment_spline(&f, m, n).unwrap();
        for row in verify_spline_moments(&sd, &f, sd.exact_moments()).unwrap() {
            prop_assert!(row.residual <= 1e-9, "j = {}: {:e}", row.j, row.residual);
        }
    }
}
