use std::sync::OnceLock;

use ifdyn::coords::NormalFrame;
use ifdyn::effective::{integrate_r, mean_curvature, ProfileTable, TableSample};
use ifdyn::grid::ProfileGrid;
use ifdyn::PotentialSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frame() -> &'static NormalFrame {
    static F: OnceLock<NormalFrame> = OnceLock::new();
    F.get_or_init(|| {
        let spec = PotentialSpec::new(2.0, 1.0, 1.2, 1.0, 0.1).unwrap();
        let grid = ProfileGrid::default_for(&spec, 3.4).unwrap();
        let table = ProfileTable::build(&spec, 0.4, 3.4, 48, &grid).unwrap();
        let traj = integrate_r(&table, 3.0, 1.0, 1e-3).unwrap();
        NormalFrame::new(traj, table, 1.2).unwrap()
    })
}

fn shrinking_circle() -> NormalFrame {
    let knots: Vec<f64> = (0..8).map(|i| 0.1 + 0.5 * i as f64).collect();
    let samples = knots
        .iter()
        .map(|_| TableSample { norm_f0prime_sq: 1.0, norm_s0_sq: 0.0, mu: 1.0, mu_prime: 0.0, w_l1_norm: 0.5 })
        .collect();
    let table = ProfileTable::from_samples(1.0, 0.1, 3.6, None, knots, samples, None).unwrap();
    let traj = integrate_r(&table, 2.0, 2.0, 1e-3).unwrap();
    NormalFrame::new(traj, table, 5.0).unwrap()
}

fn strip_points(f: &NormalFrame, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let y0 = rng.gen_range(0.05..f.y0_max - 0.05);
            let y1 = rng.gen_range(-0.95..0.95) * f.y1_max;
            (y0, y1)
        })
        .collect()
}

#[test]
fn strip_keeps_requested_width_when_curvature_is_small() {
    let f = frame();
    assert!(!f.shrunk());
    assert_eq!(f.y1_max, 1.2);
    assert!(f.focal_distance > 2.4);
}

#[test]
fn strip_shrinks_near_focal_points() {
    let f = shrinking_circle();
    assert!(f.shrunk());
    assert!(f.y1_max <= 0.5 * f.focal_distance);
    for (y0, y1) in strip_points(&f, 50, 3) {
        let (_, n) = f.metric_factors(y0, y1).unwrap();
        assert!(n >= 0.5 - 1e-12);
    }
}

#[test]
fn forward_examples() {
    let f = frame();
    let (t, r) = f.forward(0.0, 0.5).unwrap();
    assert!(t.abs() < 1e-15);
    assert!((r - 3.5).abs() < 1e-12);
    let k = f.kinematics(0.7).unwrap();
    let (t, r) = f.forward(0.7, -0.3).unwrap();
    assert!((t - (0.7 - 0.3 * k.m * k.rp)).abs() < 1e-15);
    assert!((r - (k.r - 0.3 * k.m)).abs() < 1e-15);
    assert!(f.forward(0.7, 2.0).is_err());
    assert!(f.forward(1.5, 0.0).is_err());
}

#[test]
fn roundtrip() {
    let f = frame();
    for (y0, y1) in strip_points(f, 500, 1) {
        let (t, r) = f.forward(y0, y1).unwrap();
        let (s, d) = f.inverse(t, r).unwrap();
        assert!((s - y0).abs() <= 1e-10 && (d - y1).abs() <= 1e-10, "({y0}, {y1}) -> ({s}, {d})");
    }
}

#[test]
fn time_reflection_near_start() {
    let f = frame();
    let a = f.kinematics(0.3).unwrap();
    let b = f.kinematics(-0.3).unwrap();
    assert_eq!(a.r, b.r);
    assert_eq!(a.rp, -b.rp);
    // points below the trajectory at t ≈ 0 have foot points at negative y⁰
    let (t, r) = f.forward(-0.01, 0.8).unwrap();
    let (s, d) = f.inverse(t, r).unwrap();
    assert!((s + 0.01).abs() < 1e-10 && (d - 0.8).abs() < 1e-10);
}

#[test]
fn points_off_the_strip_are_rejected() {
    let f = frame();
    assert!(matches!(f.inverse(0.5, 0.5), Err(ifdyn::Error::OutsideChart { .. })));
    assert!(matches!(f.inverse(0.5, 6.0), Err(ifdyn::Error::OutsideChart { .. })));
    assert!(f.inverse(5.0, 3.0).is_err());
}

#[test]
fn eikonal_identities() {
    let f = frame();
    let h = 1e-5;
    for (y0, y1) in strip_points(f, 1000, 2) {
        let (t, r) = f.forward(y0, y1).unwrap();
        let k = f.kinematics(y0).unwrap();
        let (m, n) = f.metric_factors(y0, y1).unwrap();
        let dt = |i: usize| {
            let p = f.inverse(t + h, r).unwrap();
            let q = f.inverse(t - h, r).unwrap();
            if i == 0 { (p.0 - q.0) / (2.0 * h) } else { (p.1 - q.1) / (2.0 * h) }
        };
        let dr = |i: usize| {
            let p = f.inverse(t, r + h).unwrap();
            let q = f.inverse(t, r - h).unwrap();
            if i == 0 { (p.0 - q.0) / (2.0 * h) } else { (p.1 - q.1) / (2.0 * h) }
        };
        let (ts, td, rs, rd) = (dt(0), dt(1), dr(0), dr(1));
        assert!((td + m * k.rp).abs() <= 1e-6, "∂t d at ({y0}, {y1})");
        assert!((rd - m).abs() <= 1e-6, "∂r d at ({y0}, {y1})");
        assert!((ts - m * m / n).abs() <= 1e-6, "∂t s at ({y0}, {y1})");
        assert!((rs + m * m * k.rp / n).abs() <= 1e-6, "∂r s at ({y0}, {y1})");
        // d is a Minkowski distance function
        assert!((rd * rd - td * td - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn jacobian_determinant_is_n_over_m() {
    let f = frame();
    let h = 1e-5;
    for (y0, y1) in strip_points(f, 200, 4) {
        let a = f.forward(y0 + h, y1).unwrap();
        let b = f.forward(y0 - h, y1).unwrap();
        let c = f.forward(y0, y1 + h).unwrap();
        let d = f.forward(y0, y1 - h).unwrap();
        let (t0, r0) = ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h));
        let (t1, r1) = ((c.0 - d.0) / (2.0 * h), (c.1 - d.1) / (2.0 * h));
        let (m, n) = f.metric_factors(y0, y1).unwrap();
        assert!((t0 * r1 - t1 * r0 - n / m).abs() <= 1e-6);
    }
}

#[test]
fn b1_on_interface_is_minus_mean_curvature() {
    let f = frame();
    for i in 0..=20 {
        let y0 = f.y0_max * i as f64 / 20.0;
        let k = f.kinematics(y0).unwrap();
        let (_, b1) = f.b_coeffs(y0, 0.0).unwrap();
        let h = mean_curvature(k.r, k.rp, k.rpp).unwrap();
        assert!((b1 + h).abs() <= 1e-10, "y0 = {y0}");
    }
}

#[test]
fn m_over_n_derivative_matches_finite_difference() {
    let f = frame();
    let h = 1e-4;
    for (y0, y1) in strip_points(f, 200, 5) {
        let q = |s: f64| {
            let (m, n) = f.metric_factors(s, y1).unwrap();
            m / n
        };
        let fd = (q(y0 + h) - q(y0 - h)) / (2.0 * h);
        let exact = f.d_y0_m_over_n(y0, y1).unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "({y0}, {y1}): {fd} vs {exact}");
    }
}

#[test]
fn chart_dump() {
    let f = frame();
    let csv = f.chart_csv(5, 7).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("y0,y1,t,r,m,n,B0,B1"));
    assert_eq!(lines.count(), 35);
}
