use ifdyn::grid::ProfileGrid;
use ifdyn::linop::*;
use ifdyn::profiles::{solve_profile, ProfileSolution};
use ifdyn::PotentialSpec;

fn allen_cahn() -> PotentialSpec {
    // large β suppresses σ; d = 0 removes the centrifugal term
    PotentialSpec::new(2.0, 1.0, 10.0, 0.0, 0.1).unwrap()
}

fn current_spec() -> PotentialSpec {
    PotentialSpec::new(2.0, 1.0, 1.2, 1.0, 0.1).unwrap()
}

fn profile(spec: &PotentialSpec, r: f64, grid: ProfileGrid) -> ProfileSolution {
    solve_profile(spec, r, &grid, None).unwrap()
}

/// Bound states of −∂² + λ_φ(3tanh²−1) (f-block) and of the σ-block
/// −∂² + (β−λ_σ) − β sech² for λ_φ = 2.
fn poschl_teller_low(beta: f64, lambda_sigma: f64) -> Vec<f64> {
    let nu = (-1.0 + (1.0 + 4.0 * beta).sqrt()) / 2.0;
    let mut v = vec![0.0, 3.0];
    let mut j = 0.0;
    while j < nu {
        let e = beta - lambda_sigma - (nu - j) * (nu - j);
        if e < 4.0 {
            v.push(e);
        }
        j += 1.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn operator_is_exactly_symmetric() {
    let spec = current_spec();
    let sol = profile(&spec, 3.0, ProfileGrid::new(22.0, 257).unwrap());
    assert_eq!(build_l1(&spec, &sol).asymmetry(), 0.0);
}

#[test]
fn tail_quadratic_form_sees_vacuum_hessian() {
    let spec = current_spec();
    let sol = profile(&spec, 3.0, ProfileGrid::new(22.0, 1025).unwrap());
    let a = build_l1(&spec, &sol);
    let n = a.n() / 2;
    // smooth σ-bump supported deep in the right tail
    let mut v = vec![0.0; 2 * n];
    let xs = sol.grid.points();
    for i in 0..n {
        let x = xs[i + 1];
        if x > 14.0 && x < 21.0 {
            v[2 * i + 1] = (std::f64::consts::PI * (x - 14.0) / 7.0).sin().powi(2);
        }
    }
    let q = ifdyn::linalg::dot(&v, &a.matvec(&v)) / ifdyn::linalg::dot(&v, &v);
    let lambda_sigma_vac = spec.beta - spec.lambda_sigma + spec.d * spec.d / 9.0;
    // kinetic part of a bump of width 7 adds about (2π/7)²/3
    assert!(q > lambda_sigma_vac && q < lambda_sigma_vac + 0.35, "{q}");
}

#[test]
fn kernel_residual_is_second_order() {
    let spec = current_spec();
    let coarse = ProfileGrid::new(22.0, 1025).unwrap();
    let r1 = kernel_residual(&spec, &profile(&spec, 3.0, coarse));
    let r2 = kernel_residual(&spec, &profile(&spec, 3.0, coarse.refined()));
    let order = (r1 / r2).log2();
    assert!(order > 1.9 && order < 2.1, "order {order}");
}

#[test]
fn poschl_teller_spectrum_dense_and_lanczos_agree() {
    let spec = allen_cahn();
    let grid = ProfileGrid::new(10.0, 513).unwrap();
    let sol = profile(&spec, 1.0, grid);
    assert!(sol.is_quenched());
    let a = build_l1(&spec, &sol);
    let dense = spectral_report_dense(&spec, &sol, 3, &a).unwrap();
    let lanczos = spectral_report_lanczos(&spec, &sol, 3, &a).unwrap();
    for (d, l) in dense.eigenvalues.iter().zip(&lanczos.eigenvalues) {
        assert!((d - l).abs() < 1e-8, "{d} vs {l}");
    }
    assert!((dense.gap - lanczos.gap).abs() < 1e-8);
    let exact = poschl_teller_low(10.0, 1.0);
    let h2 = grid.h().powi(2);
    for (e, d) in exact.iter().zip(&dense.eigenvalues) {
        assert!((e - d).abs() < 5.0 * h2 + 1e-6, "{e} vs {d}");
    }
}

#[test]
fn production_grid_spectrum_converges_to_analytic() {
    let spec = allen_cahn();
    let exact = poschl_teller_low(10.0, 1.0);
    let errs: Vec<Vec<f64>> = [1025usize, 2049]
        .iter()
        .map(|&n| {
            let sol = profile(&spec, 1.0, ProfileGrid::new(10.0, n).unwrap());
            let rep = spectral_report(&spec, &sol, 3).unwrap();
            rep.eigenvalues.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect()
        })
        .collect();
    assert!(errs[1].iter().all(|e| *e < 2e-4), "{:?}", errs[1]);
    // the zero mode is exact up to the profile's fourth-order error, skip it
    for j in 1..3 {
        let order = (errs[0][j] / errs[1][j]).log2();
        assert!(order > 1.8, "eigenvalue {j}: order {order}");
    }
}

#[test]
fn nondegenerate_on_current_branch_with_coercivity() {
    let spec = current_spec();
    let grid = ProfileGrid::default_for(&spec, 6.0).unwrap();
    for r in [2.0, 3.0, 6.0] {
        let sol = profile(&spec, r, grid);
        assert!(!sol.is_quenched());
        let rep = spectral_report(&spec, &sol, 8).unwrap();
        assert!(rep.nondegenerate(), "R = {r}: {rep:?}");
        assert!(rep.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let audit = coercivity_audit(&spec, &sol, rep.gap, 1000, 7);
        assert_eq!(audit.violations, 0);
        assert!(audit.min_ratio >= 1.0);
    }
}

#[test]
fn g_values() {
    let spec = current_spec();
    let mut sol = profile(&spec, 3.0, ProfileGrid::new(22.0, 257).unwrap());
    assert!(g_mean_curve(&sol, 1.0).is_err());
    let m = 1.0 / (1.0f64 - 0.36).sqrt();
    let g = g_mean_curve(&sol, 0.6).unwrap();
    let rel = (g * sol.norm_f0prime_sq + m * sol.mu_prime).abs() / (m * sol.mu_prime).abs();
    assert!(rel < 1e-6);
    sol.r = 1.0;
    sol.d = 1.0;
    sol.norm_s0_sq = 2.0;
    sol.norm_f0prime_sq = 2.0;
    assert!((g_mean_curve(&sol, 0.0).unwrap() - 1.0).abs() < 1e-15);
    sol.norm_s0_sq = 0.0;
    assert_eq!(g_mean_curve(&sol, 0.3).unwrap(), 0.0);
}

#[test]
fn correction_is_orthogonal_and_decays() {
    let spec = current_spec();
    let grid = ProfileGrid::default_for(&spec, 3.0).unwrap();
    let sol = profile(&spec, 3.0, grid);
    let c = solve_f1(&spec, &sol, 0.0).unwrap();
    assert!(c.solvability <= 1e-6, "solvability {}", c.solvability);
    assert!(c.residual <= 1e-8);
    assert!(c.orthogonality.abs() <= 1e-10, "orthogonality {}", c.orthogonality);
    let rate = c.tail_rate().unwrap();
    assert!((rate - sol.decay_alpha).abs() / sol.decay_alpha < 0.2, "{rate} vs {}", sol.decay_alpha);
}

#[test]
fn perturbed_g_trips_solvability() {
    let spec = current_spec();
    let grid = ProfileGrid::default_for(&spec, 3.0).unwrap();
    let sol = profile(&spec, 3.0, grid);
    let g = g_mean_curve(&sol, 0.0).unwrap();
    let err = solve_f1_with(&spec, &sol, 0.0, 1.1 * g, None).unwrap_err();
    assert!(matches!(err, ifdyn::Error::NotOrthogonal(_)));
}

#[test]
fn homogeneous_problem_gives_zero() {
    let spec = allen_cahn();
    let sol = profile(&spec, 1.0, ProfileGrid::new(10.0, 513).unwrap());
    let c = solve_f1(&spec, &sol, 0.2).unwrap();
    assert!(c.f1.iter().chain(&c.s1).all(|v| *v == 0.0));
}

#[test]
fn unique_from_different_starts_and_linear_in_m() {
    let spec = current_spec();
    let grid = ProfileGrid::default_for(&spec, 3.0).unwrap();
    let sol = profile(&spec, 3.0, grid);
    let base = solve_f1(&spec, &sol, 0.0).unwrap();
    let g = g_mean_curve(&sol, 0.0).unwrap();
    let n = (base.f1.len() - 2) * 2;
    let start: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin()).collect();
    let other = solve_f1_with(&spec, &sol, 0.0, g, Some(&start)).unwrap();
    let diff = base
        .f1
        .iter()
        .zip(&other.f1)
        .chain(base.s1.iter().zip(&other.s1))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-9, "{diff}");

    for v in [0.3, 0.6] {
        let m = 1.0 / (1.0f64 - v * v).sqrt();
        let cv = solve_f1(&spec, &sol, v).unwrap();
        let res = cv
            .f1
            .iter()
            .zip(&base.f1)
            .chain(cv.s1.iter().zip(&base.s1))
            .map(|(a, b)| (a - b - (m - 1.0) * b).abs())
            .fold(0.0, f64::max);
        assert!(res < 1e-8, "v = {v}: {res}");
    }
}

#[test]
fn report_serializes() {
    let spec = current_spec();
    let sol = profile(&spec, 3.0, ProfileGrid::new(22.0, 1025).unwrap());
    let rep = spectral_report(&spec, &sol, 4).unwrap();
    let json = rep.to_json();
    assert!(json.contains("\"kernel_residual\""));
    assert!(json.contains("\"R\""));
    let c = solve_f1(&spec, &sol, 0.0).unwrap();
    assert!(c.to_csv().lines().any(|l| l == "x,f1,s1"));
}
