use std::sync::OnceLock;

use ifdyn::ansatz::{ansatz_at, ansatz_cartesian, to_cartesian, AnsatzTable};
use ifdyn::coords::NormalFrame;
use ifdyn::effective::{integrate_r, ProfileTable};
use ifdyn::grid::ProfileGrid;
use ifdyn::linop::solve_f1;
use ifdyn::profiles::solve_profile;
use ifdyn::PotentialSpec;
use proptest::prelude::*;

const EPS: f64 = 0.1;

fn spec() -> PotentialSpec {
    PotentialSpec::new(2.0, 1.0, 1.2, 1.0, EPS).unwrap()
}

fn grid() -> ProfileGrid {
    let g = ProfileGrid::default_for(&spec(), 3.2).unwrap();
    ProfileGrid::new(g.half_width, 2049).unwrap()
}

fn table() -> &'static AnsatzTable {
    static T: OnceLock<AnsatzTable> = OnceLock::new();
    T.get_or_init(|| AnsatzTable::build(&spec(), 2.6, 3.0, 9, &grid()).unwrap())
}

fn frame() -> &'static NormalFrame {
    static F: OnceLock<NormalFrame> = OnceLock::new();
    F.get_or_init(|| {
        let spec = spec();
        let g = ProfileGrid::default_for(&spec, 3.2).unwrap();
        let pt = ProfileTable::build(&spec, 2.0, 3.2, 32, &g).unwrap();
        NormalFrame::new(integrate_r(&pt, 2.95, 1.0, 1e-3).unwrap(), pt, 1.0).unwrap()
    })
}

#[test]
fn knots_reproduce_the_solved_profiles() {
    let t = table();
    let g = grid();
    let r = t.r_knots[3];
    let sol = solve_profile(&spec(), r, &g, None).unwrap();
    let c = solve_f1(&spec(), &sol, 0.0).unwrap();
    for i in (0..g.n_points - 1).step_by(37) {
        let p = t.eval(g.x(i), r).unwrap();
        assert!((p.f0[0] - sol.f[i]).abs() < 1e-7 && (p.f0[1] - sol.s[i]).abs() < 1e-7, "node {i}");
        assert!((p.f1[0] - c.f1[i]).abs() < 1e-7 && (p.f1[1] - c.s1[i]).abs() < 1e-7, "node {i}");
    }
}

#[test]
fn between_knots_matches_a_direct_solve() {
    let t = table();
    let g = grid();
    let r = 0.5 * (t.r_knots[4] + t.r_knots[5]);
    let sol = solve_profile(&spec(), r, &g, None).unwrap();
    for i in (0..g.n_points).step_by(41) {
        let p = t.eval(g.x(i), r).unwrap();
        assert!((p.f0[0] - sol.f[i]).abs() < 1e-6 && (p.f0[1] - sol.s[i]).abs() < 1e-6);
    }
}

#[test]
fn vacua_beyond_the_grid() {
    let t = table();
    let l = t.grid.half_width;
    let right = t.eval(l + 1.0, 2.8).unwrap();
    let left = t.eval(-l - 3.0, 2.8).unwrap();
    assert_eq!(right.f0, [1.0, 0.0]);
    assert_eq!(left.f0, [-1.0, 0.0]);
    assert_eq!(right.f1, [0.0, 0.0]);
    assert_eq!(left.f0_x, [0.0, 0.0]);
}

#[test]
fn centre_is_a_zero_of_phi() {
    let p = table().eval(0.0, 2.8).unwrap();
    assert!(p.f0[0].abs() < 1e-12);
    assert!(p.f0[1] > 0.0);
}

#[test]
fn radius_outside_the_table_is_rejected() {
    assert!(table().eval(0.0, 3.2).is_err());
    assert!(table().eval(0.0, 2.5).is_err());
}

#[test]
fn without_f1_drops_the_correction() {
    let t = table().without_f1();
    let p = t.eval(0.7, 2.8).unwrap();
    assert_eq!((p.f1, p.f1_x, p.f1_r), ([0.0; 2], [0.0; 2], [0.0; 2]));
    let full = table().eval(0.7, 2.8).unwrap();
    assert_eq!(p.f0, full.f0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_match_finite_differences(x in -8.0f64..8.0, r in 2.65f64..2.95) {
        let t = table();
        let p = t.eval(x, r).unwrap();
        let h = 1e-5;
        let (xp, xm) = (t.eval(x + h, r).unwrap(), t.eval(x - h, r).unwrap());
        let (rp, rm) = (t.eval(x, r + h).unwrap(), t.eval(x, r - h).unwrap());
        for c in 0..2 {
            prop_assert!(((xp.f0[c] - xm.f0[c]) / (2.0 * h) - p.f0_x[c]).abs() < 1e-6);
            prop_assert!(((xp.f1[c] - xm.f1[c]) / (2.0 * h) - p.f1_x[c]).abs() < 1e-6);
            prop_assert!(((rp.f0[c] - rm.f0[c]) / (2.0 * h) - p.f0_r[c]).abs() < 1e-6);
            prop_assert!(((rp.f1[c] - rm.f1[c]) / (2.0 * h) - p.f1_r[c]).abs() < 1e-6);
        }
    }

    #[test]
    fn normal_derivatives_match_finite_differences(y0 in 0.1f64..0.9, y1 in -0.5f64..0.5) {
        let f = frame();
        let t = table();
        let shift = |s: f64| (0.003 * s * s, 0.006 * s);
        let u_at = |s: f64, y: f64| {
            let k = f.kinematics(s).unwrap();
            let (a, ap) = shift(s);
            ansatz_at(t, &k, EPS, y, a, ap).unwrap()
        };
        let v = u_at(y0, y1);
        let h = 1e-5;
        for c in 0..2 {
            let d0 = (u_at(y0 + h, y1).u[c] - u_at(y0 - h, y1).u[c]) / (2.0 * h);
            let d1 = (u_at(y0, y1 + h).u[c] - u_at(y0, y1 - h).u[c]) / (2.0 * h);
            prop_assert!((d0 - v.u_y0[c]).abs() < 1e-5 * (1.0 + v.u_y0[c].abs()), "y0: {} vs {}", d0, v.u_y0[c]);
            prop_assert!((d1 - v.u_y1[c]).abs() < 1e-5 * (1.0 + v.u_y1[c].abs()), "y1: {} vs {}", d1, v.u_y1[c]);
        }
    }

    #[test]
    fn cartesian_derivatives_match_finite_differences(y0 in 0.1f64..0.9, y1 in -0.5f64..0.5) {
        let f = frame();
        let t = table();
        let shift = |s: f64| (0.003 * s * s, 0.006 * s);
        let (tt, rr) = f.forward(y0, y1).unwrap();
        let (_, ut, ur) = ansatz_cartesian(t, f, EPS, tt, rr, &shift).unwrap();
        let h = 1e-5;
        let at = |a: f64, b: f64| ansatz_cartesian(t, f, EPS, a, b, &shift).unwrap().0;
        for c in 0..2 {
            let dt = (at(tt + h, rr)[c] - at(tt - h, rr)[c]) / (2.0 * h);
            let dr = (at(tt, rr + h)[c] - at(tt, rr - h)[c]) / (2.0 * h);
            prop_assert!((dt - ut[c]).abs() < 1e-5 * (1.0 + ut[c].abs()));
            prop_assert!((dr - ur[c]).abs() < 1e-5 * (1.0 + ur[c].abs()));
        }
    }
}

#[test]
fn to_cartesian_inverts_the_normal_frame_derivatives() {
    let f = frame();
    let k = f.kinematics(0.6).unwrap();
    let y1 = 0.3;
    let n = k.n(y1);
    // U = α t + β r has ∂_{y⁰}U = n(α + R′β) and ∂_{y¹}U = m(R′α + β)
    let (alpha, beta) = (0.7, -1.3);
    let (ut, ur) = to_cartesian(&k, n, n * (alpha + k.rp * beta), k.m * (k.rp * alpha + beta));
    assert!((ut - alpha).abs() < 1e-14 && (ur - beta).abs() < 1e-14);
}
