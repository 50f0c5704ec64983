use anyhow::{bail, Context, Result};
use ifdyn::ansatz::AnsatzTable;
use ifdyn::coords::NormalFrame;
use ifdyn::effective::{check_quench_envelopes, integrate_r, ProfileTable};
use ifdyn::grid::ProfileGrid;
use ifdyn::linop::{coercivity_audit, solve_f1, spectral_report, SOLVABILITY_TOL};
use ifdyn::potential::fmt17;
use ifdyn::profiles::{
    find_quench_radius, mu_prime_of_r, quench_energy_quadrature, quench_energy_test, solve_profile, ProfileSolution,
};
use ifdyn::validation::{run_epsilon, work_items, ErrorReport, StudyConfig, StudySetup};
use ifdyn::wavesim::{build_initial_data, interface_position, run, RadialGrid, WaveSolver};
use ifdyn::PotentialSpec;
use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{Artifacts, Check};
use crate::config::{EffectiveRunConfig, FullSimConfig, ProfileSweepConfig, QuenchStudyConfig, SpectrumMapConfig};

fn knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn profile_grid(spec: &PotentialSpec, r_max: f64, half_width: Option<f64>, n_points: usize) -> Result<ProfileGrid> {
    let half = match half_width {
        Some(l) => l,
        None => ProfileGrid::default_for(spec, r_max)?.half_width,
    };
    Ok(ProfileGrid::new(half, n_points)?)
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

pub fn profile_sweep(c: &ProfileSweepConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = c.spec;
    let grid = profile_grid(&spec, c.r_max, c.half_width, c.n_points)?;
    art.stage("profiles");
    let radii = knots(c.r_min, c.r_max, c.knots);
    let sols: Vec<ProfileSolution> = radii
        .par_iter()
        .map(|&r| solve_profile(&spec, r, &grid, None).with_context(|| format!("profile at R = {r}")))
        .collect::<Result<_>>()?;
    art.stage("write");
    let mut curve = String::from(
        "R,mu,mu_prime,mu_prime_envelope,norm_F0prime_sq,norm_s0_sq,s_sup,quenched,decay_alpha,el_residual,equipartition_error,quench_energy_test,quench_energy_quadrature\n",
    );
    for sol in &sols {
        art.write(&format!("profiles/{}", sol.file_name()), sol.to_csv())?;
        curve.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt17(sol.r),
            fmt17(sol.mu),
            fmt17(sol.mu_prime),
            fmt17(mu_prime_of_r(sol)),
            fmt17(sol.norm_f0prime_sq),
            fmt17(sol.norm_s0_sq),
            fmt17(sol.s_sup()),
            sol.is_quenched(),
            fmt17(sol.decay_alpha),
            fmt17(sol.el_residual),
            fmt17(sol.equipartition_error),
            fmt17(quench_energy_test(&spec, sol.r)),
            fmt17(quench_energy_quadrature(&spec, sol.r)),
        ));
    }
    art.write("mu_curve.csv", curve)?;
    let first = sols.first().map_or(false, |s| s.is_quenched());
    let last = sols.last().map_or(false, |s| s.is_quenched());
    if first && !last {
        art.stage("quench-radius");
        let q = find_quench_radius(&spec, c.r_min, c.r_max, &grid)?;
        art.write_json("quench_radius.json", &q)?;
    }
    Ok(vec![
        Check::at_most("euler_lagrange_residual", max_of(sols.iter().map(|s| s.el_residual)), 1e-8),
        Check::at_most("equipartition", max_of(sols.iter().map(|s| s.equipartition_error)), 1e-6),
        Check::at_most(
            "quench_energy_closed_form",
            max_of(radii.iter().map(|&r| (quench_energy_test(&spec, r) - quench_energy_quadrature(&spec, r)).abs())),
            1e-8,
        ),
    ])
}

pub fn spectrum_map(c: &SpectrumMapConfig, seed: u64, art: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = c.spec;
    let grid = profile_grid(&spec, c.r_max, c.half_width, c.n_points)?;
    art.stage("spectra");
    let radii = knots(c.r_min, c.r_max, c.knots);
    let rows: Vec<_> = radii
        .par_iter()
        .enumerate()
        .map(|(i, &r)| -> Result<_> {
            let sol = solve_profile(&spec, r, &grid, None)?;
            let rep = spectral_report(&spec, &sol, c.eigenvalues)?;
            let audit = coercivity_audit(&spec, &sol, rep.gap, c.audit_samples, seed.wrapping_add(i as u64));
            let f1 = solve_f1(&spec, &sol, 0.0)?;
            Ok((rep, audit, f1.solvability, f1.orthogonality, f1.tail_rate(), sol.decay_alpha))
        })
        .collect::<Result<_>>()?;
    art.stage("write");
    let k = c.eigenvalues;
    let mut csv = String::from("R");
    for j in 0..k {
        csv.push_str(&format!(",lambda{j}"));
    }
    csv.push_str(",gap,kernel_residual,lambda_star,kernel_ok,gap_ok,violations,min_ratio,f1_solvability,f1_orthogonality,f1_tail_rate,decay_alpha\n");
    for (rep, audit, solv, orth, tail, alpha) in &rows {
        csv.push_str(&fmt17(rep.r));
        for j in 0..k {
            csv.push(',');
            csv.push_str(&rep.eigenvalues.get(j).map_or(String::new(), |v| fmt17(*v)));
        }
        csv.push_str(&format!(
            ",{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt17(rep.gap),
            fmt17(rep.kernel_residual),
            fmt17(rep.lambda_star),
            rep.kernel_ok,
            rep.gap_ok,
            audit.violations,
            fmt17(audit.min_ratio),
            fmt17(*solv),
            fmt17(*orth),
            tail.map_or(String::new(), fmt17),
            fmt17(*alpha),
        ));
    }
    art.write("spectrum.csv", csv)?;
    let reports: Vec<_> = rows.iter().map(|r| json!({"spectrum": r.0, "audit": r.1})).collect();
    art.write_json("spectrum.json", &reports)?;
    Ok(vec![
        Check::holds("kernel_residual_second_order", rows.iter().all(|r| r.0.kernel_ok)),
        Check::at_least("min_deflated_gap", rows.iter().map(|r| r.0.gap).fold(f64::INFINITY, f64::min), 1e-3),
        Check::at_most("coercivity_violations", rows.iter().map(|r| r.1.violations as f64).sum(), 0.0),
        Check::at_most("f1_solvability", max_of(rows.iter().map(|r| r.2)), SOLVABILITY_TOL),
    ])
}

pub fn effective_run(c: &EffectiveRunConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = c.spec;
    let hi = c.table_r_max.unwrap_or(c.r0 + 0.2);
    art.stage("table");
    let grid = ProfileGrid::default_for(&spec, hi)?;
    let table = ProfileTable::build(&spec, c.table_r_min, hi, c.table_knots, &grid)?;
    art.stage("integrate");
    let traj = integrate_r(&table, c.r0, c.t_max, c.dt)?;
    art.stage("write");
    art.write("table.csv", table.to_csv())?;
    art.write("trajectory.csv", traj.to_csv())?;
    let at_one = (traj.t_end() >= 1.0).then(|| traj.state_at(1.0));
    art.write_json(
        "effective.json",
        &json!({
            "R0": c.r0,
            "R_star": table.r_star,
            "exit_reason": traj.exit_reason,
            "quench_time": traj.quench_time,
            "t_end": traj.t_end(),
            "halvings": traj.halvings,
            "R_at_1": at_one.map(|s| s.0),
            "Rp_at_1": at_one.map(|s| s.1),
        }),
    )?;
    Ok(vec![
        Check::at_most("max_abs_Rp", max_of(traj.rp.iter().map(|v| v.abs())), 1.0),
        Check::holds("R_positive", traj.r.iter().all(|r| *r > 0.0)),
        Check::holds("Rpp_negative", traj.rpp.iter().all(|v| *v < 0.0)),
    ])
}

pub fn quench_study(c: &QuenchStudyConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = c.spec;
    art.stage("table");
    let grid = ProfileGrid::default_for(&spec, c.table_r_max)?;
    let table = ProfileTable::build(&spec, c.table_r_min, c.table_r_max, c.table_knots, &grid)?;
    let Some(r_star) = table.r_star else {
        bail!("the current branch is not lost inside [{}, {}]", c.table_r_min, c.table_r_max);
    };
    art.stage("integrate");
    let traj = integrate_r(&table, r_star + c.delta, c.t_max, c.dt)?;
    let rep = check_quench_envelopes(&traj, r_star, c.delta);
    art.stage("write");
    art.write("table.csv", table.to_csv())?;
    art.write("trajectory.csv", traj.to_csv())?;
    art.write("envelopes.txt", rep.to_text())?;
    art.write_json(
        "quench.json",
        &json!({
            "R_star": r_star,
            "R0": r_star + c.delta,
            "in_paper_regime": spec.in_paper_regime(),
            "quench_time": traj.quench_time,
            "exit_reason": traj.exit_reason,
            "envelopes": rep,
        }),
    )?;
    let worst = rep.max_violation_r.max(rep.max_violation_rp);
    Ok(vec![
        Check::holds("quench_time_finite", traj.quench_time.is_some()),
        Check::holds("quench_before_horizon", rep.quench_before_horizon),
        Check::holds("bracket_hypothesis", rep.hypothesis_holds),
        Check::at_most("envelope_violation", worst, c.envelope_tol),
    ])
}

pub fn full_sim(c: &FullSimConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = c.spec;
    let eps = spec.epsilon;
    art.stage("setup");
    let hi = c.r0 + 0.2;
    let grid = ProfileGrid::default_for(&spec, hi)?;
    let table = ProfileTable::build(&spec, 0.5 * c.r0, hi, c.table_knots, &grid)?;
    let traj = integrate_r(&table, c.r0, c.t_max + 0.2, c.ode_dt)?;
    let r_low = traj.r.iter().copied().fold(c.r0, f64::min);
    let frame = NormalFrame::new(traj, table, c.band)?;
    let ansatz_grid = ProfileGrid::new(grid.half_width, c.ansatz_points)?;
    let ansatz = AnsatzTable::build(&spec, r_low - 0.05, c.r0 + 0.05, c.ansatz_knots, &ansatz_grid)?;
    let rgrid = RadialGrid::for_interface(c.r0, eps, c.dr_over_eps)?;
    let (init, seam) = build_initial_data(&spec, &ansatz, &frame, &rgrid, c.band)?;
    let solver = WaveSolver::new(&spec, rgrid, None)?;
    let stride = (c.snapshot_interval / solver.dt).round().max(1.0) as usize;
    art.stage("evolve");
    let out = run(&solver, init, c.t_max, stride, c.band)?;
    art.stage("write");
    let mut energy = String::from("t,E\n");
    let mut iface = String::from("t,r_interface,R_effective\n");
    let mut track: f64 = 0.0;
    let mut far: f64 = 0.0;
    let lag = 0.5 * eps;
    for (k, s) in out.snapshots.iter().enumerate() {
        art.write(&format!("snapshots/snapshot_{k:04}.csv"), s.to_csv(&rgrid))?;
        let x = interface_position(&rgrid, &s.phi);
        let r_eff = frame.traj.state_at(s.t).0;
        if let Some(x) = x {
            track = track.max((x - r_eff).abs());
        }
        iface.push_str(&format!("{},{},{}\n", fmt17(s.t), x.map_or(String::new(), fmt17), fmt17(r_eff)));
        for j in 0..rgrid.n_r {
            let r = rgrid.r(j);
            if r < c.r0 - c.band - s.t - lag {
                far = far.max((s.phi[j] + 1.0).abs()).max(s.sigma[j].abs());
            } else if r > c.r0 + c.band + s.t + lag {
                far = far.max((s.phi[j] - 1.0).abs()).max(s.sigma[j].abs());
            }
        }
    }
    for (t, e) in &out.energy {
        energy.push_str(&format!("{},{}\n", fmt17(*t), fmt17(*e)));
    }
    art.write("energy.csv", energy)?;
    art.write("interface.csv", iface)?;
    art.write("chart.csv", frame.chart_csv(21, 11)?)?;
    let drift = out.relative_energy_drift();
    let sup_phi = max_of(out.snapshots.iter().flat_map(|s| s.phi.iter().map(|v| v.abs())));
    art.write_json(
        "snapshots.json",
        &json!({
            "times": out.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
            "files": (0..out.snapshots.len()).map(|k| format!("snapshots/snapshot_{k:04}.csv")).collect::<Vec<_>>(),
            "grid": rgrid,
            "spec": spec,
            "dt": out.dt,
            "steps": out.steps,
            "stop_reason": out.stop_reason,
            "seam": seam,
            "band": [c.r0 - c.band, c.r0 + c.band],
            "energy": out.energy,
            "relative_energy_drift": drift,
        }),
    )?;
    Ok(vec![
        Check::at_most("relative_energy_drift", drift, 1e-4),
        Check::at_most("far_field_deviation", far, 1e-12),
        Check::at_most("sup_abs_phi", sup_phi, 1.1),
        Check::at_most("interface_tracking", track, 2.0 * eps * eps),
    ])
}

pub fn convergence_study(c: &StudyConfig, art: &mut Artifacts) -> Result<Vec<Check>> {
    art.stage("setup");
    let setup = StudySetup::build(c)?;
    art.write_json("setup.json", &setup.summary())?;
    art.stage("runs");
    let results: Vec<_> = work_items(c).par_iter().map(|&(eps, f1)| (eps, f1, run_epsilon(&setup, eps, f1))).collect();
    let report = ErrorReport::assemble(&setup, results);
    art.stage("write");
    art.write("report.json", report.to_json()?)?;
    art.write("summary.txt", report.summary_text())?;
    for r in report.runs.iter().chain(&report.control_runs) {
        let tag = format!("runs/eps_{}_{}", r.eps, if r.with_f1 { "f1" } else { "control" });
        art.write(&format!("{tag}_slices.csv"), r.slices_csv())?;
        art.write(&format!("{tag}_shifts.csv"), r.shifts_csv())?;
        art.write(&format!("{tag}_time_norms.csv"), r.time_norms_csv())?;
    }
    let mut norms = String::from("eps,with_f1,L1_H1,L1_dt,sup_xi_L2,sup_E,sup_A_underline,energy_drift,center_offset\n");
    for r in report.runs.iter().chain(&report.control_runs) {
        norms.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt17(r.eps),
            r.with_f1,
            fmt17(r.l1_h1),
            fmt17(r.l1_dt),
            fmt17(r.sup_xi_l2),
            fmt17(r.sup_energy),
            fmt17(r.sup_a_underline),
            fmt17(r.energy_drift),
            fmt17(r.center_offset),
        ));
    }
    art.write("norms.csv", norms)?;
    let mut slopes = String::from("norm,slope,intercept,ci_lo,ci_hi\n");
    let s = &report.slopes;
    for (name, f) in [
        ("L1_H1", &s.l1_h1),
        ("L1_dt", &s.l1_dt),
        ("sup_xi_L2", &s.sup_xi_l2),
        ("control_L1_H1", &s.control_l1_h1),
        ("control_L1_dt", &s.control_l1_dt),
    ] {
        if let Some(f) = f {
            let (lo, hi) = f.ci95.map_or((String::new(), String::new()), |[a, b]| (fmt17(a), fmt17(b)));
            slopes.push_str(&format!("{name},{},{},{lo},{hi}\n", fmt17(f.slope), fmt17(f.intercept)));
        }
    }
    art.write("slopes.csv", slopes)?;
    let slope = |f: &Option<ifdyn::validation::SlopeFit>| f.as_ref().map_or(f64::NAN, |f| f.slope);
    let [lo, hi] = c.slope_band;
    let band = |name: &str, v: f64| Check::within(name, v, lo, hi);
    let mut checks = vec![band("slope_L1_H1", slope(&s.l1_h1)), band("slope_L1_dt", slope(&s.l1_dt))];
    if c.control {
        checks.push(Check::at_most("control_slope_L1_H1", slope(&s.control_l1_h1), c.control_slope_max));
        checks.push(Check::at_most("control_slope_L1_dt", slope(&s.control_l1_dt), c.control_slope_max));
    }
    checks.push(Check::at_most("sup_A_underline", report.sup_a_underline, c.a_bar_bound));
    checks.push(Check::holds("all_runs_complete", report.verdict.complete));
    Ok(checks)
}
