use std::sync::OnceLock;

use ifdyn::coords::NormalFrame;
use ifdyn::effective::{integrate_r, ProfileTable};
use ifdyn::grid::ProfileGrid;
use ifdyn::potential::{check_quartic, min_eig};
use ifdyn::spline::{lagrange6, quintic_hermite, CubicSpline};
use ifdyn::{FieldPoint, Potential, PotentialSpec};
use proptest::prelude::*;

fn quartic() -> impl Strategy<Value = PotentialSpec> {
    (0.5f64..4.0, 0.2f64..2.0, 0.1f64..3.0, 0.0f64..2.0, 0.02f64..0.5)
        .prop_filter_map("invalid spec", |(lp, ls, b, d, e)| PotentialSpec::new(lp, ls, b, d, e).ok())
}

fn frame() -> &'static NormalFrame {
    static F: OnceLock<NormalFrame> = OnceLock::new();
    F.get_or_init(|| {
        let spec = PotentialSpec::new(2.0, 1.0, 1.2, 1.0, 0.1).unwrap();
        let grid = ProfileGrid::default_for(&spec, 3.4).unwrap();
        let table = ProfileTable::build(&spec, 0.4, 3.4, 48, &grid).unwrap();
        NormalFrame::new(integrate_r(&table, 3.0, 1.0, 1e-3).unwrap(), table, 1.2).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn potential_is_even_in_each_field(spec in quartic(), phi in -3.0f64..3.0, sigma in -3.0f64..3.0) {
        let v = spec.v(FieldPoint::new(phi, sigma));
        for (a, b) in [(-phi, sigma), (phi, -sigma), (-phi, -sigma)] {
            prop_assert!((spec.v(FieldPoint::new(a, b)) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn w_derivatives_match_finite_differences(
        spec in quartic(),
        phi in -3.0f64..3.0,
        sigma in -3.0f64..3.0,
        r in 0.5f64..10.0,
    ) {
        let h = 1e-5;
        let w = |a: f64, b: f64, r: f64| spec.w_value(FieldPoint::new(a, b), r);
        let g = spec.w_grad(FieldPoint::new(phi, sigma), r);
        let hs = spec.w_hess(FieldPoint::new(phi, sigma), r);
        let close = |fd: f64, exact: f64| (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs());
        let fd_g = [
            (w(phi + h, sigma, r) - w(phi - h, sigma, r)) / (2.0 * h),
            (w(phi, sigma + h, r) - w(phi, sigma - h, r)) / (2.0 * h),
        ];
        prop_assert!(close(fd_g[0], g[0]) && close(fd_g[1], g[1]), "grad {:?} vs {:?}", fd_g, g);
        let gr = |a: f64, b: f64| spec.w_grad(FieldPoint::new(a, b), r);
        for c in 0..2 {
            let d_phi = (gr(phi + h, sigma)[c] - gr(phi - h, sigma)[c]) / (2.0 * h);
            let d_sigma = (gr(phi, sigma + h)[c] - gr(phi, sigma - h)[c]) / (2.0 * h);
            prop_assert!(close(d_phi, hs[c][0]) && close(d_sigma, hs[c][1]));
        }
        let pr = spec.w_partial_r(FieldPoint::new(phi, sigma), r);
        let gp = spec.w_grad(FieldPoint::new(phi, sigma), r + h);
        let gm = spec.w_grad(FieldPoint::new(phi, sigma), r - h);
        for c in 0..2 {
            prop_assert!(close((gp[c] - gm[c]) / (2.0 * h), pr[c]));
        }
    }

    #[test]
    fn vacuum_hessian_respects_the_declared_gap(spec in quartic()) {
        prop_assume!(spec.beta > spec.lambda_sigma);
        for s in [-1.0, 1.0] {
            prop_assert!(min_eig(spec.hess_v(FieldPoint::new(s, 0.0))) >= spec.lambda_star() * (1.0 - 1e-12));
        }
        let report = check_quartic(&spec);
        prop_assert!(report.symmetry && report.hessian_growth);
    }

    #[test]
    fn coordinates_roundtrip(s in 0.05f64..0.95, u in -0.95f64..0.95) {
        let f = frame();
        let y0 = s * f.y0_max;
        let y1 = u * f.y1_max;
        let (t, r) = f.forward(y0, y1).unwrap();
        let (a, b) = f.inverse(t, r).unwrap();
        prop_assert!((a - y0).abs() <= 1e-10 && (b - y1).abs() <= 1e-10);
    }

    #[test]
    fn strip_has_no_focal_points(s in 0.0f64..1.0, u in -1.0f64..1.0) {
        let f = frame();
        let k = f.kinematics(s * f.y0_max).unwrap();
        prop_assert!(k.n(u * f.y1_max) > 0.0);
    }

    #[test]
    fn cubic_spline_interpolates_and_is_c1(
        ys in prop::collection::vec(-5.0f64..5.0, 6..12),
        t in 0.0f64..1.0,
    ) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.3 + 0.01 * (i * i) as f64).collect();
        let sp = CubicSpline::new(xs.clone(), ys.clone());
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((sp.eval(*x) - y).abs() < 1e-12);
        }
        let k = 1 + ((ys.len() - 2) as f64 * t) as usize;
        let x = xs[k.min(ys.len() - 2)];
        let h = 1e-7;
        prop_assert!((sp.deriv(x - h) - sp.deriv(x + h)).abs() < 1e-4);
        prop_assert!((sp.eval(x - h) - sp.eval(x + h)).abs() < 1e-5);
    }

    #[test]
    fn quintic_hermite_matches_random_quintics(c in prop::array::uniform6(-2.0f64..2.0), u in 0.0f64..1.0, h in 0.01f64..2.0) {
        let p = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
        let dp = |x: f64| (1..6).rev().fold(0.0, |acc, i| acc * x + i as f64 * c[i]);
        let d2p = |x: f64| (2..6).rev().fold(0.0, |acc, i| acc * x + (i * (i - 1)) as f64 * c[i]);
        let (v, dv) = quintic_hermite(u, [p(0.0), p(h)], [h * dp(0.0), h * dp(h)], [h * h * d2p(0.0), h * h * d2p(h)]);
        prop_assert!((v - p(u * h)).abs() < 1e-9 * (1.0 + p(u * h).abs()));
        prop_assert!((dv / h - dp(u * h)).abs() < 1e-8 * (1.0 + dp(u * h).abs()));
    }

    #[test]
    fn lagrange6_weights_are_a_partition_of_unity(u in 0.0f64..1.0) {
        let (w, dw) = lagrange6(u);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        prop_assert!(dw.iter().sum::<f64>().abs() < 1e-12);
    }
}
