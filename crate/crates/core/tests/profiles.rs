use ifdyn::grid::ProfileGrid;
use ifdyn::profiles::*;
use ifdyn::PotentialSpec;

fn base(d: f64) -> PotentialSpec {
    PotentialSpec::new(2.0, 1.0, 1.2, d, 0.1).unwrap()
}

#[test]
fn large_beta_gives_scalar_kink() {
    let spec = PotentialSpec::new(2.0, 1.0, 10.0, 0.3, 0.1).unwrap();
    let grid = ProfileGrid::new(6.0, 2049).unwrap();
    let sol = solve_profile(&spec, 1.0, &grid, None).unwrap();
    assert!(sol.s_sup() < 1e-8, "s = {}", sol.s_sup());
    let err = sol
        .x()
        .iter()
        .zip(&sol.f)
        .map(|(x, f)| (x.tanh() - f).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-4, "tanh error {err}");
    assert!(sol.el_residual <= 1e-8);
    assert!(sol.equipartition_error <= 1e-6, "equipartition {}", sol.equipartition_error);
    assert!(sol.mu <= sol.seed_energy + 1e-12);
}

#[test]
fn current_branch_at_large_radius() {
    let spec = base(0.3);
    let grid = ProfileGrid::default_for(&spec, 10.0).unwrap();
    let sol = solve_profile(&spec, 10.0, &grid, None).unwrap();
    assert!(sol.s_sup() > 0.1, "s = {}", sol.s_sup());
    assert!(sol.el_residual <= 1e-8);
    assert!(sol.equipartition_error <= 1e-6, "equipartition {}", sol.equipartition_error);
    let rel = (sol.norm_f0prime_sq - 2.0 * sol.w_integral).abs() / sol.norm_f0prime_sq;
    assert!(rel < 1e-6, "integrated equipartition {rel}");
    let f_bound = sol.f.iter().all(|f| f.abs() <= 1.0 + 1e-10);
    let s_bound = sol.s.iter().all(|s| *s >= -1e-10 && *s <= 1.0 + 1e-10);
    assert!(f_bound && s_bound);
}

#[test]
fn quenched_at_small_radius() {
    let spec = base(0.3);
    let grid = ProfileGrid::default_for(&spec, 10.0).unwrap();
    let sol = solve_profile(&spec, 0.05, &grid, None).unwrap();
    assert!(sol.s_sup() < 1e-8);
    assert_eq!(mu_prime_of_r(&sol), 0.0);
}

#[test]
fn parity_and_pinning() {
    let spec = base(1.0);
    let grid = ProfileGrid::default_for(&spec, 3.0).unwrap();
    let sol = solve_profile(&spec, 3.0, &grid, None).unwrap();
    let n = sol.f.len();
    let mid = n / 2;
    assert_eq!(sol.f[mid], 0.0);
    assert_eq!(sol.f[0], -1.0);
    assert_eq!(sol.f[n - 1], 1.0);
    for i in 0..n {
        assert!((sol.f[i] + sol.f[n - 1 - i]).abs() < 1e-8);
        assert!((sol.s[i] - sol.s[n - 1 - i]).abs() < 1e-8);
    }
}

#[test]
fn mu_prime_matches_finite_difference() {
    let spec = base(1.0);
    let grid = ProfileGrid::default_for(&spec, 4.0).unwrap();
    let r = 3.0;
    let sol = solve_profile(&spec, r, &grid, None).unwrap();
    let dr = 1e-3;
    let plus = solve_profile(&spec, r + dr, &grid, Some(&sol)).unwrap();
    let minus = solve_profile(&spec, r - dr, &grid, Some(&sol)).unwrap();
    let fd = (plus.mu - minus.mu) / (2.0 * dr);
    let rel = (fd - mu_prime_of_r(&sol)).abs() / fd.abs();
    assert!(rel < 1e-4, "fd {fd} vs {} rel {rel}", sol.mu_prime);
}

#[test]
fn winding_free_mu_is_flat() {
    let spec = base(0.0);
    let grid = ProfileGrid::new(30.0, 2049).unwrap();
    let sol = solve_profile(&spec, 2.0, &grid, None).unwrap();
    assert_eq!(mu_prime_of_r(&sol), 0.0);
}

#[test]
fn mu_converges_at_second_order_or_better() {
    let spec = base(1.0);
    let coarse = ProfileGrid::new(20.0, 257).unwrap();
    let mid = coarse.refined();
    let fine = mid.refined();
    let mu = |g: &ProfileGrid| solve_profile(&spec, 3.0, g, None).unwrap().mu;
    let (a, b, c) = (mu(&coarse), mu(&mid), mu(&fine));
    let order = ((a - b) / (b - c)).abs().log2();
    assert!(order >= 1.8, "observed order {order}");
}

#[test]
fn decay_rates() {
    let spec = PotentialSpec::new(2.0, 1.0, 10.0, 0.3, 0.1).unwrap();
    let grid = ProfileGrid::new(12.0, 2049).unwrap();
    let sol = solve_profile(&spec, 1.0, &grid, None).unwrap();
    let fit = fit_decay(&sol);
    assert!((fit.alpha - 2.0).abs() < 0.02, "f tail rate {}", fit.alpha);

    let wide = ProfileGrid::new(24.0, 4097).unwrap();
    let sol2 = solve_profile(&spec, 1.0, &wide, None).unwrap();
    let a2 = fit_decay(&sol2).alpha;
    assert!((a2 - fit.alpha).abs() / fit.alpha < 0.01, "{a2} vs {}", fit.alpha);
}

#[test]
fn s_tail_rate_from_vacuum_linearization() {
    let spec = base(1.0);
    let r = 3.0;
    let grid = ProfileGrid::default_for(&spec, r).unwrap();
    let sol = solve_profile(&spec, r, &grid, None).unwrap();
    let predicted = (spec.beta - spec.lambda_sigma + spec.d * spec.d / (r * r)).sqrt();
    let s_rate = fit_decay(&sol).s_rate.unwrap();
    assert!((s_rate - predicted).abs() / predicted < 0.1, "{s_rate} vs {predicted}");
}

#[test]
fn quench_closed_form_matches_quadrature() {
    for (d, r) in [(0.5, 2.0), (1.0, 1.0), (0.0, 3.0)] {
        let spec = base(d);
        let closed = quench_energy_test(&spec, r);
        let quad = quench_energy_quadrature(&spec, r);
        assert!((closed - quad).abs() < 1e-8, "{closed} vs {quad}");
    }
}

#[test]
fn short_form_values() {
    // d²/R² = 0.05
    let spec = base(0.05f64.sqrt());
    assert!((quench_energy_test_short_form(&spec, 1.0) + 0.05).abs() < 1e-14);
    let threshold = PotentialSpec::new(2.0, 1.0, 1.5, 0.0, 0.1).unwrap();
    assert_eq!(quench_energy_test_short_form(&threshold, 1.0), 0.0);
}

#[test]
fn quench_sign_boundary() {
    // β/3 + B²/3 − 2λ_σ/3 = 0 when β = 2λ_σ − B²
    let spec = PotentialSpec::new(2.0, 1.0, 1.0, 0.0, 0.1).unwrap();
    assert!(quench_energy_test(&spec, 1.0).abs() < 1e-15);
    let with_winding = PotentialSpec::new(2.0, 1.0, 1.0, 0.3, 0.1).unwrap();
    assert!(quench_energy_test(&with_winding, 1.0) > 0.0);
}

#[test]
fn quench_radius_bisection() {
    let spec = base(1.0);
    let grid = ProfileGrid::default_for(&spec, 3.0).unwrap();
    let q = find_quench_radius(&spec, 1.0, 3.0, &grid).unwrap();
    assert!(q.r_hi - q.r_lo <= 1e-3);
    assert!(q.r_star > 1.8 && q.r_star < 1.9, "R_* = {}", q.r_star);
    assert!(q.monotone);
}

#[test]
fn no_sign_change_without_winding() {
    let spec = base(0.0);
    let grid = ProfileGrid::new(30.0, 1025).unwrap();
    assert!(matches!(
        find_quench_radius(&spec, 1.0, 3.0, &grid),
        Err(ifdyn::Error::NoSignChange { .. })
    ));
}

#[test]
fn csv_has_header_and_rows() {
    let spec = base(1.0);
    let grid = ProfileGrid::new(20.0, 129).unwrap();
    let sol = solve_profile(&spec, 3.0, &grid, None).unwrap();
    let csv = sol.to_csv();
    assert!(csv.starts_with("# R = "));
    assert!(csv.lines().any(|l| l == "x,f,s"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 130);
    assert_eq!(sol.file_name(), "profile_R3.csv");
}
