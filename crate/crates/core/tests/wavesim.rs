use std::sync::OnceLock;

use ifdyn::ansatz::{ansatz_cartesian, AnsatzTable};
use ifdyn::coords::NormalFrame;
use ifdyn::effective::{integrate_r, ProfileTable};
use ifdyn::grid::ProfileGrid;
use ifdyn::wavesim::*;
use ifdyn::{Error, PotentialSpec};

const EPS: f64 = 0.1;
const R0: f64 = 3.0;
const DELTA: f64 = 1.2;

fn spec() -> PotentialSpec {
    PotentialSpec::new(2.0, 1.0, 1.2, 1.0, EPS).unwrap()
}

struct Fixture {
    frame: NormalFrame,
    table: AnsatzTable,
    grid: RadialGrid,
    init: FieldState,
    seam: SeamReport,
    run: RunOutput,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let spec = spec();
        let g = ProfileGrid::default_for(&spec, 3.2).unwrap();
        let pt = ProfileTable::build(&spec, 2.0, 3.2, 32, &g).unwrap();
        let traj = integrate_r(&pt, R0, 1.2, 1e-3).unwrap();
        let frame = NormalFrame::new(traj, pt, DELTA).unwrap();
        let table = AnsatzTable::build(&spec, 2.6, 3.05, 9, &ProfileGrid::new(g.half_width, 2049).unwrap()).unwrap();
        let grid = RadialGrid::for_interface(R0, EPS, 0.02).unwrap();
        let (init, seam) = build_initial_data(&spec, &table, &frame, &grid, DELTA).unwrap();
        let solver = WaveSolver::new(&spec, grid, None).unwrap();
        let run = run(&solver, init.clone(), 1.0, 50, DELTA).unwrap();
        Fixture { frame, table, grid, init, seam, run }
    })
}

fn kink(grid: &RadialGrid) -> FieldState {
    let mut st = FieldState::vacuum(grid, 1.0);
    for j in 0..grid.n_r {
        st.phi[j] = ((grid.r(j) - R0) / EPS).tanh();
    }
    st
}

#[test]
fn vacuum_is_a_fixed_point() {
    let spec = spec();
    let grid = RadialGrid::for_interface(R0, EPS, 0.05).unwrap();
    let solver = WaveSolver::new(&spec, grid, None).unwrap();
    let st = FieldState::vacuum(&grid, 1.0);
    let next = solver.step(&st).unwrap();
    for j in 0..grid.n_r {
        assert_eq!(next.phi[j], 1.0);
        assert_eq!(next.sigma[j], 0.0);
        assert_eq!(next.phi_t[j], 0.0);
    }
}

#[test]
fn coarse_grids_are_rejected() {
    assert!(RadialGrid::new(0.1, 9.0, 100, EPS).is_err());
    assert!(RadialGrid::new(0.0, 9.0, 10_000, EPS).is_err());
    assert!(RadialGrid::new(0.1, 9.0, 10_000, EPS).is_ok());
}

#[test]
fn linear_limit_energy_stays_put() {
    let spec = spec().with_d(0.0);
    let grid = RadialGrid::for_interface(R0, EPS, 0.02).unwrap();
    let mut st = FieldState::vacuum(&grid, 1.0);
    for j in 1..grid.n_r - 1 {
        let g = (-((grid.r(j) - 4.5) / 0.3f64).powi(2)).exp();
        st.phi[j] += 1e-4 * g;
        st.sigma[j] = 1e-4 * g;
    }
    let solver = WaveSolver::new(&spec, grid, None).unwrap();
    let mut s = Stepper::new(&solver, st).unwrap();
    let e0 = s.state.discrete_energy;
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        s.advance().unwrap();
        worst = worst.max((s.energy() - e0).abs());
    }
    assert!(worst <= 1e-8, "energy moved by {worst:e}");
}

#[test]
fn energy_error_is_second_order_in_dt() {
    let spec = spec();
    let grid = RadialGrid::for_interface(R0, EPS, 0.02).unwrap();
    let dt0 = WaveSolver::stable_dt(&spec, &grid);
    let drift = |dt: f64| {
        let solver = WaveSolver::new(&spec, grid, Some(dt)).unwrap();
        let out = run(&solver, kink(&grid), 0.5, 10, DELTA).unwrap();
        out.relative_energy_drift()
    };
    let d: Vec<f64> = [1.0, 0.5, 0.25].iter().map(|f| drift(dt0 * f)).collect();
    let o1 = (d[0] / d[1]).log2();
    let o2 = (d[1] / d[2]).log2();
    assert!(o1 >= 1.8 && o2 >= 1.8, "drifts {d:?}, orders {o1} {o2}");
}

#[test]
fn spatial_self_convergence() {
    let spec = spec();
    let r_min = 0.03;
    let base = 898;
    let grids: Vec<RadialGrid> =
        [1, 2, 4].iter().map(|k| RadialGrid::new(r_min, 9.0, k * (base - 1) + 1, EPS).unwrap()).collect();
    let dt = WaveSolver::stable_dt(&spec, &grids[2]);
    let phi: Vec<Vec<f64>> = grids
        .iter()
        .map(|g| {
            let solver = WaveSolver::new(&spec, *g, Some(dt)).unwrap();
            run(&solver, kink(g), 0.2, 1000, 0.0).unwrap().snapshots.last().unwrap().phi.clone()
        })
        .collect();
    let diff = |a: &[f64], fa: usize, b: &[f64], fb: usize| {
        (0..base).map(|j| (a[j * fa] - b[j * fb]).abs()).fold(0.0, f64::max)
    };
    let e1 = diff(&phi[0], 1, &phi[1], 2);
    let e2 = diff(&phi[1], 2, &phi[2], 4);
    let order = (e1 / e2).log2();
    assert!(order >= 1.8, "differences {e1:e} {e2:e}, order {order}");
}

#[test]
fn sigma_free_data_stays_sigma_free() {
    let spec = spec().with_d(0.0);
    let grid = RadialGrid::for_interface(R0, EPS, 0.05).unwrap();
    let solver = WaveSolver::new(&spec, grid, None).unwrap();
    let out = run(&solver, kink(&grid), 0.3, 50, DELTA).unwrap();
    for s in &out.snapshots {
        assert!(s.sigma.iter().chain(&s.sigma_t).all(|v| *v == 0.0));
    }
}

#[test]
fn huge_steps_blow_up_with_last_good_state() {
    let spec = spec();
    let grid = RadialGrid::for_interface(R0, EPS, 0.05).unwrap();
    let dt = 20.0 * WaveSolver::stable_dt(&spec, &grid);
    let solver = WaveSolver::new(&spec, grid, Some(dt)).unwrap();
    match run(&solver, kink(&grid), 50.0, 1, DELTA) {
        Err(Error::BlowUp { t, last }) => {
            assert!(t > 0.0);
            assert!(last.phi.iter().all(|v| v.is_finite()));
        }
        other => panic!("expected blow-up, got {:?}", other.map(|o| o.steps)),
    }
}

#[test]
fn initial_data_is_the_ansatz_inside_and_vacuum_outside() {
    let f = fixture();
    let zero = |_: f64| (0.0, 0.0);
    assert!(f.seam.mismatch <= f.seam.budget);
    for j in 0..f.grid.n_r {
        let r = f.grid.r(j);
        let d = (r - R0).abs();
        if d >= DELTA {
            let vac = if r < R0 { -1.0 } else { 1.0 };
            assert_eq!((f.init.phi[j], f.init.sigma[j], f.init.phi_t[j], f.init.sigma_t[j]), (vac, 0.0, 0.0, 0.0));
        } else if d < DELTA - 2.0 * EPS {
            let (u, _, _) = ansatz_cartesian(&f.table, &f.frame, EPS, 0.0, r, &zero).unwrap();
            assert!((f.init.phi[j] - u[0]).abs() < 1e-14 && (f.init.sigma[j] - u[1]).abs() < 1e-14);
        }
        // the trajectory starts at rest, so ∂_tU(0, ·) vanishes
        assert!(f.init.phi_t[j].abs() < 1e-12 && f.init.sigma_t[j].abs() < 1e-12);
    }
    // φ at the interface is the first-order correction
    let p = f.table.eval(0.0, R0).unwrap();
    let (u, _, _) = ansatz_cartesian(&f.table, &f.frame, EPS, 0.0, R0, &zero).unwrap();
    assert!((u[0] - EPS * p.f1[0]).abs() < 1e-12);
    assert!(p.f0[0].abs() < 1e-12);
}

#[test]
fn interface_run_conserves_energy_and_stays_bounded() {
    let f = fixture();
    assert_eq!(f.run.stop_reason, StopReason::TimeLimit);
    assert!(f.run.relative_energy_drift() <= 1e-4, "drift {:e}", f.run.relative_energy_drift());
    for s in &f.run.snapshots {
        assert!(s.phi.iter().all(|v| v.abs() <= 1.1));
    }
}

#[test]
fn far_field_is_untouched_before_the_light_cone_arrives() {
    let f = fixture();
    let cap = R0 - DELTA - f.grid.r_min;
    // the discrete front is smeared over a fraction of ε
    let lag = 0.5 * EPS;
    for s in &f.run.snapshots {
        assert!(s.t < cap);
        for j in 0..f.grid.n_r {
            let r = f.grid.r(j);
            if r < R0 - DELTA - s.t - lag {
                assert!((s.phi[j] + 1.0).abs() <= 1e-12 && s.sigma[j].abs() <= 1e-12, "t = {}, r = {r}", s.t);
            } else if r > R0 + DELTA + s.t + lag {
                assert!((s.phi[j] - 1.0).abs() <= 1e-12 && s.sigma[j].abs() <= 1e-12, "t = {}, r = {r}", s.t);
            }
        }
        // cells next to the axis
        assert!(s.phi[..20].iter().all(|v| *v == -1.0) && s.sigma[..20].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn interface_follows_the_effective_trajectory() {
    let f = fixture();
    for s in f.run.snapshots.iter().step_by(4) {
        let x = interface_position(&f.grid, &s.phi).unwrap();
        let (r, _) = f.frame.traj.state_at(s.t);
        assert!((x - r).abs() < 2.0 * EPS * EPS, "t = {}: {x} vs {r}", s.t);
    }
}

#[test]
fn snapshot_csv_layout() {
    let f = fixture();
    let csv = f.init.to_csv(&f.grid);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# t = 0.0"));
    assert_eq!(lines.next(), Some("r,phi,sigma,phi_t,sigma_t"));
    assert_eq!(lines.count(), f.grid.n_r);
}

#[test]
fn sigma_decays_after_the_quench() {
    let eps = 0.05;
    let r0 = 2.2;
    let spec = spec().with_epsilon(eps);
    let g = ProfileGrid::default_for(&spec, r0 + 0.2).unwrap();
    let pt = ProfileTable::build(&spec, 0.5, r0 + 0.2, 48, &g).unwrap();
    let tq = integrate_r(&pt, r0, 3.0, 1e-3).unwrap().quench_time.unwrap();
    let frame = NormalFrame::new(integrate_r(&pt, r0, 0.3, 1e-3).unwrap(), pt, 0.9).unwrap();
    let table = AnsatzTable::build(&spec, r0 - 0.1, r0 + 0.05, 5, &ProfileGrid::new(g.half_width, 2049).unwrap()).unwrap();
    let grid = RadialGrid::for_interface(r0, eps, 0.05).unwrap();
    let (init, _) = build_initial_data(&spec, &table, &frame, &grid, 0.9).unwrap();
    let solver = WaveSolver::new(&spec, grid, None).unwrap();
    let out = run(&solver, init, tq + 0.25, 10, 0.3).unwrap();
    let sup: Vec<f64> = out
        .snapshots
        .iter()
        .filter(|s| s.t >= tq + 2.0 * eps)
        .map(|s| s.sigma.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .collect();
    assert!(sup.len() > 5);
    assert!(sup.windows(2).all(|w| w[1] <= w[0]), "{sup:?}");
    assert!(sup.last().unwrap() < &(0.5 * sup[0]));
}
