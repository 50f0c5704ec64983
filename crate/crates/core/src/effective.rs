//! Effective interface dynamics: the ODE for R(y⁰) obtained from the
//! solvability condition of the F₁ problem, current quenching, and the
//! comparison envelopes for the quenching time.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::ProfileGrid;
use crate::potential::{fmt17, Potential};
use crate::profiles::{find_quench_radius_tol, solve_profile, solve_profile_with, ProfileOptions, ProfileSolution};
use crate::spline::{hermite, CubicSpline};

/// Largest |R′| the integrator continues past.
pub const HORIZON_SPEED: f64 = 0.99;
/// Local error bound of the step-halving control.
pub const LOCAL_TOL: f64 = 1e-9;
/// Allowed relative disagreement of the two bracket forms.
pub const BRACKET_TOL: f64 = 1e-5;

/// H(R) for the surface of rotation generated by R(y⁰).
pub fn mean_curvature(r: f64, rp: f64, rpp: f64) -> Result<f64> {
    if !(rp.abs() < 1.0) {
        return domain(format!("|R'| must be below 1, got {rp}"));
    }
    if !(r > 0.0) {
        return domain(format!("R must be positive, got {r}"));
    }
    let w = 1.0 - rp * rp;
    Ok((rpp / w + 1.0 / r) / w.sqrt())
}

/// Profile data at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSample {
    pub norm_f0prime_sq: f64,
    pub norm_s0_sq: f64,
    pub mu: f64,
    pub mu_prime: f64,
    pub w_l1_norm: f64,
}

impl TableSample {
    fn from_solution(sol: &ProfileSolution) -> Self {
        Self {
            norm_f0prime_sq: sol.norm_f0prime_sq,
            norm_s0_sq: sol.norm_s0_sq,
            mu: sol.mu,
            mu_prime: sol.mu_prime,
            w_l1_norm: sol.w_integral,
        }
    }
}

/// Tabulated profile quantities entering the R equation. Above `r_star`
/// (or everywhere when there is no branch switch) values come from clamped
/// cubic splines through the knots; at or below `r_star` the constant
/// s ≡ 0 branch is used.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    pub d: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_star: Option<f64>,
    pub r_knots: Vec<f64>,
    pub samples: Vec<TableSample>,
    pub lower: Option<TableSample>,
    splines: [CubicSpline; 5],
}

impl ProfileTable {
    pub fn from_samples(
        d: f64,
        r_min: f64,
        r_max: f64,
        r_star: Option<f64>,
        r_knots: Vec<f64>,
        samples: Vec<TableSample>,
        lower: Option<TableSample>,
    ) -> Result<Self> {
        if r_knots.len() < 4 || r_knots.len() != samples.len() {
            return domain("a profile table needs at least four knots with one sample each");
        }
        if !r_knots.windows(2).all(|w| w[1] > w[0]) || !(r_min > 0.0) || r_max < r_min {
            return domain("table knots must ascend within (0, r_max]");
        }
        if r_star.is_some() != lower.is_some() {
            return domain("a branch switch needs lower-branch values");
        }
        let col = |f: fn(&TableSample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
        let splines = [
            CubicSpline::new(r_knots.clone(), col(|s| s.norm_f0prime_sq)),
            CubicSpline::new(r_knots.clone(), col(|s| s.norm_s0_sq)),
            CubicSpline::new(r_knots.clone(), col(|s| s.mu)),
            CubicSpline::new(r_knots.clone(), col(|s| s.mu_prime)),
            CubicSpline::new(r_knots.clone(), col(|s| s.w_l1_norm)),
        ];
        Ok(Self { d, r_min, r_max, r_star, r_knots, samples, lower, splines })
    }

    /// Solves the profiles on `n_knots` radii. When the current branch is
    /// lost inside [r_min, r_max], the switch radius is located to 10⁻⁶ and
    /// the knots cover [R_*, r_max], the first one carrying the s ≡ 0 data.
    pub fn build<P: Potential + ?Sized>(
        pot: &P,
        r_min: f64,
        r_max: f64,
        n_knots: usize,
        grid: &ProfileGrid,
    ) -> Result<Self> {
        if n_knots < 4 || !(r_min > 0.0) || !(r_max > r_min) {
            return domain("need at least four knots on a nonempty positive interval");
        }
        let bottom = solve_profile(pot, r_min, grid, None)?;
        let top = solve_profile(pot, r_max, grid, None)?;
        let quenched_opts = ProfileOptions { seeds: [0.0, 0.0], ..ProfileOptions::default() };
        let (lo, r_star, first) = match (bottom.is_quenched(), top.is_quenched()) {
            (true, false) => {
                let q = find_quench_radius_tol(pot, r_min, r_max, grid, 1e-6)?;
                let at = solve_profile_with(pot, q.r_lo, grid, None, &quenched_opts)?;
                (q.r_lo, Some(q.r_lo), Some(at))
            }
            (false, true) => return domain("current present at r_min but lost at r_max"),
            _ => (r_min, None, None),
        };
        let knots: Vec<f64> = (0..n_knots)
            .map(|i| lo + (r_max - lo) * i as f64 / (n_knots - 1) as f64)
            .collect();
        let mut samples = Vec::with_capacity(n_knots);
        for (i, &r) in knots.iter().enumerate() {
            let sol = match (&first, i) {
                (Some(at), 0) => at.clone(),
                _ => solve_profile(pot, r, grid, None)?,
            };
            if r_star.is_some() && i > 0 && sol.is_quenched() {
                return domain(format!("current branch lost again at R = {r}"));
            }
            samples.push(TableSample::from_solution(&sol));
        }
        let lower = first.as_ref().map(TableSample::from_solution);
        Self::from_samples(pot.d(), r_min, r_max, r_star, knots, samples, lower)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    pub fn is_lower_branch(&self, r: f64) -> bool {
        self.r_star.is_some_and(|rs| r <= rs)
    }

    pub fn sample(&self, r: f64) -> Result<TableSample> {
        if !self.contains(r) {
            return Err(Error::TableExhausted(r));
        }
        if self.is_lower_branch(r) {
            return Ok(self.lower.expect("lower branch present with r_star"));
        }
        let s = &self.splines;
        Ok(TableSample {
            norm_f0prime_sq: s[0].eval(r),
            norm_s0_sq: s[1].eval(r).max(0.0),
            mu: s[2].eval(r),
            mu_prime: s[3].eval(r),
            w_l1_norm: s[4].eval(r),
        })
    }

    /// (d²/R²)‖s₀‖²/‖F₀′‖² − 1.
    pub fn bracket(&self, r: f64) -> Result<f64> {
        let t = self.sample(r)?;
        Ok(self.d * self.d / (r * r) * t.norm_s0_sq / t.norm_f0prime_sq - 1.0)
    }

    /// ½(d²/R²)‖s₀‖²/∫W(F₀, R) − 1.
    pub fn bracket_w(&self, r: f64) -> Result<f64> {
        let t = self.sample(r)?;
        Ok(0.5 * self.d * self.d / (r * r) * t.norm_s0_sq / t.w_l1_norm - 1.0)
    }

    /// d/dR of [`ProfileTable::bracket`].
    pub fn bracket_derivative(&self, r: f64) -> Result<f64> {
        if !self.contains(r) {
            return Err(Error::TableExhausted(r));
        }
        if self.is_lower_branch(r) {
            return Ok(0.0);
        }
        let s = &self.splines;
        let (n, dn) = (s[0].eval(r), s[0].deriv(r));
        let (q, dq) = (s[1].eval(r), s[1].deriv(r));
        let d2 = self.d * self.d;
        Ok(d2 * (-2.0 * q / (r * r * r * n) + (dq * n - q * dn) / (r * r * n * n)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(rs) = self.r_star {
            out.push_str(&format!("# R_star = {}\n", fmt17(rs)));
        }
        out.push_str("R,norm_F0prime_sq,norm_s0_sq,mu,mu_prime,W_L1_norm\n");
        for (r, t) in self.r_knots.iter().zip(&self.samples) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt17(*r),
                fmt17(t.norm_f0prime_sq),
                fmt17(t.norm_s0_sq),
                fmt17(t.mu),
                fmt17(t.mu_prime),
                fmt17(t.w_l1_norm)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RppEval {
    pub rpp: f64,
    pub bracket: f64,
    pub bracket_w: f64,
}

/// R″ = [(d²/R²)‖s₀‖²/‖F₀′‖² − 1](1 − R′²)/R, with the W-form bracket
/// evaluated alongside and required to agree within [`BRACKET_TOL`].
pub fn rhs_rpp(table: &ProfileTable, r: f64, rp: f64) -> Result<RppEval> {
    if !(rp.abs() < 1.0) {
        return domain(format!("|R'| must be below 1, got {rp}"));
    }
    let bracket = table.bracket(r)?;
    let bracket_w = table.bracket_w(r)?;
    if (bracket - bracket_w).abs() > BRACKET_TOL * bracket.abs().max(1e-300) {
        return domain(format!("bracket forms disagree at R = {r}: {bracket} vs {bracket_w}"));
    }
    Ok(RppEval { rpp: bracket * (1.0 - rp * rp) / r, bracket, bracket_w })
}

/// R‴ along the flow: the y⁰-derivative of the right-hand side.
pub fn rhs_rppp(table: &ProfileTable, r: f64, rp: f64) -> Result<f64> {
    let b = table.bracket(r)?;
    let db = table.bracket_derivative(r)?;
    let w = 1.0 - rp * rp;
    let rpp = b * w / r;
    let d_r = db * w / r - b * w / (r * r);
    let d_rp = -2.0 * b * rp / r;
    Ok(d_r * rp + d_rp * rpp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitReason {
    Horizon,
    BelowTable,
    TimeLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceTrajectory {
    pub times: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(rename = "Rp")]
    pub rp: Vec<f64>,
    #[serde(rename = "Rpp")]
    pub rpp: Vec<f64>,
    pub bracket: Vec<f64>,
    pub quenched: Vec<bool>,
    pub quench_time: Option<f64>,
    pub exit_reason: ExitReason,
    pub r_star: Option<f64>,
    /// Number of rejected substeps in the halving control.
    pub halvings: usize,
}

impl InterfaceTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// R and R′ at `t` from the cubic Hermite interpolants through
    /// (R, R′) and (R′, R″).
    pub fn state_at(&self, t: f64) -> (f64, f64) {
        let n = self.times.len();
        let k = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let u = (t - self.times[k]) / h;
        let (r, _) = hermite(u, self.r[k], self.r[k + 1], h * self.rp[k], h * self.rp[k + 1]);
        let (rp, _) = hermite(u, self.rp[k], self.rp[k + 1], h * self.rpp[k], h * self.rpp[k + 1]);
        (r, rp)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(q) = self.quench_time {
            out.push_str(&format!("# quench_time = {}\n", fmt17(q)));
        }
        out.push_str(&format!("# exit_reason = {}\n", serde_json::to_string(&self.exit_reason).unwrap_or_default().trim_matches('"')));
        out.push_str("y0,R,Rp,Rpp,bracket,quenched\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt17(self.times[i]),
                fmt17(self.r[i]),
                fmt17(self.rp[i]),
                fmt17(self.rpp[i]),
                fmt17(self.bracket[i]),
                u8::from(self.quenched[i])
            ));
        }
        out
    }
}

/// One classical fourth-order Runge–Kutta step of (R, R′); `h` may be
/// negative.
pub fn rk4_step(table: &ProfileTable, y: [f64; 2], h: f64) -> Result<[f64; 2]> {
    let f = |y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], rhs_rpp(table, y[0], y[1])?.rpp]) };
    let k1 = f(y)?;
    let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
    let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
    let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]])?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Integrates R″ = rhs(R, R′) from (R0, 0) with samples every `dt`.
/// Each sample interval is covered by RK4 substeps; a substep is accepted
/// when one step and two half steps agree to [`LOCAL_TOL`], and the
/// two-half-step value is kept.
pub fn integrate_r(table: &ProfileTable, r0: f64, t_max: f64, dt: f64) -> Result<InterfaceTrajectory> {
    integrate_r_with(table, r0, t_max, dt, LOCAL_TOL)
}

/// [`integrate_r`] with a caller-chosen local error bound; an infinite
/// bound gives plain fixed-step RK4.
pub fn integrate_r_with(
    table: &ProfileTable,
    r0: f64,
    t_max: f64,
    dt: f64,
    local_tol: f64,
) -> Result<InterfaceTrajectory> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return domain("dt must be positive and T_max nonnegative");
    }
    if !table.contains(r0) {
        return Err(Error::TableExhausted(r0));
    }
    let mut traj = InterfaceTrajectory {
        times: Vec::new(),
        r: Vec::new(),
        rp: Vec::new(),
        rpp: Vec::new(),
        bracket: Vec::new(),
        quenched: Vec::new(),
        quench_time: None,
        exit_reason: ExitReason::TimeLimit,
        r_star: table.r_star,
        halvings: 0,
    };
    let push = |traj: &mut InterfaceTrajectory, t: f64, y: [f64; 2]| -> Result<()> {
        let e = rhs_rpp(table, y[0], y[1])?;
        traj.times.push(t);
        traj.r.push(y[0]);
        traj.rp.push(y[1]);
        traj.rpp.push(e.rpp);
        traj.bracket.push(e.bracket);
        traj.quenched.push(table.is_lower_branch(y[0]));
        Ok(())
    };
    let mut y = [r0, 0.0];
    push(&mut traj, 0.0, y)?;
    let n_steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    let mut sub = dt;
    'outer: for k in 1..=n_steps {
        let t0 = (k - 1) as f64 * dt;
        let t1 = (k as f64 * dt).min(t_max);
        let span = t1 - t0;
        let mut done = 0.0;
        let mut z = y;
        sub = sub.min(span);
        while done < span * (1.0 - 1e-14) {
            let s = sub.min(span - done);
            let attempt = if local_tol.is_finite() {
                rk4_step(table, z, s).and_then(|full| {
                    let half = rk4_step(table, rk4_step(table, z, 0.5 * s)?, 0.5 * s)?;
                    Ok((full, half))
                })
            } else {
                rk4_step(table, z, s).map(|full| (full, full))
            };
            let (full, half) = match attempt {
                Ok(v) => v,
                Err(Error::TableExhausted(_)) => {
                    traj.exit_reason = ExitReason::BelowTable;
                    break 'outer;
                }
                Err(Error::Domain(_)) if z[1].abs() >= HORIZON_SPEED * 0.999 => {
                    traj.exit_reason = ExitReason::Horizon;
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            let err = (full[0] - half[0]).abs().max((full[1] - half[1]).abs());
            if err <= local_tol || s <= dt * 1e-6 {
                z = half;
                done += s;
            } else {
                sub = 0.5 * s;
                traj.halvings += 1;
            }
        }
        y = z;
        if !table.contains(y[0]) {
            traj.exit_reason = ExitReason::BelowTable;
            break;
        }
        push(&mut traj, t1, y)?;
        if y[1].abs() >= HORIZON_SPEED {
            traj.exit_reason = ExitReason::Horizon;
            break;
        }
        if y[0] <= table.r_min {
            traj.exit_reason = ExitReason::BelowTable;
            break;
        }
        sub = dt;
    }
    traj.quench_time = table.r_star.and_then(|rs| crossing_time(&traj, rs));
    Ok(traj)
}

/// First time R(y⁰) ≤ `level`, from the Hermite interpolant.
pub fn crossing_time(traj: &InterfaceTrajectory, level: f64) -> Option<f64> {
    if traj.r.first()? <= &level {
        return Some(0.0);
    }
    let k = traj.r.iter().position(|&r| r <= level)?;
    let (mut a, mut b) = (traj.times[k - 1], traj.times[k]);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if traj.state_at(m).0 > level {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    Some(b)
}

/// Sample-by-sample check of the tanh and log-cosh comparison envelopes
/// while R_*/2 ≤ R ≤ R_* + δ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub r_star: f64,
    pub delta: f64,
    /// Rate of R″ = −c(1 − R′²) with c = 2/R_* (fastest admissible decay).
    pub c_lo: f64,
    /// Rate with c = 1/(2(R_* + δ)) (slowest admissible decay).
    pub c_hi: f64,
    pub start_mismatch: f64,
    pub hypothesis_holds: bool,
    pub bracket_min: f64,
    pub bracket_max: f64,
    pub samples_checked: usize,
    pub max_violation_rp: f64,
    pub max_violation_r: f64,
    /// Distance of R′ from the single printed bound −tanh(4y⁰/R_*).
    pub printed_rp_deviation: f64,
    /// Violation of the printed log-cosh pair
    /// (R_*+δ) − (R_*/4)log cosh(4y⁰/R_*) ≤ R ≤ (R_*+δ)[1 − log cosh(y⁰/(R_*+δ))].
    pub printed_r_violation: f64,
    pub quench_time: Option<f64>,
    pub quench_before_horizon: bool,
}

impl BoundReport {
    pub fn envelopes_hold(&self, tol: f64) -> bool {
        self.hypothesis_holds && self.max_violation_rp <= tol && self.max_violation_r <= tol
    }

    pub fn to_text(&self) -> String {
        let q = self.quench_time.map_or("none".to_string(), fmt17);
        let mut out = String::new();
        out.push_str(&format!("R_star = {}\n", fmt17(self.r_star)));
        out.push_str(&format!("delta = {}\n", fmt17(self.delta)));
        out.push_str(&format!("c_lo = {}\n", fmt17(self.c_lo)));
        out.push_str(&format!("c_hi = {}\n", fmt17(self.c_hi)));
        out.push_str(&format!("start_mismatch = {}\n", fmt17(self.start_mismatch)));
        if self.hypothesis_holds {
            out.push_str("hypothesis = holds\n");
        } else {
            out.push_str("hypothesis = hypothesis fails\n");
        }
        out.push_str(&format!("bracket_range = [{}, {}]\n", fmt17(self.bracket_min), fmt17(self.bracket_max)));
        out.push_str(&format!("samples_checked = {}\n", self.samples_checked));
        out.push_str(&format!("max_violation_Rp = {}\n", fmt17(self.max_violation_rp)));
        out.push_str(&format!("max_violation_R = {}\n", fmt17(self.max_violation_r)));
        out.push_str(&format!("printed_Rp_deviation = {}\n", fmt17(self.printed_rp_deviation)));
        out.push_str(&format!("printed_R_violation = {}\n", fmt17(self.printed_r_violation)));
        out.push_str(&format!("quench_time = {q}\n"));
        out.push_str(&format!("quench_before_horizon = {}\n", self.quench_before_horizon));
        out
    }
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

pub fn check_quench_envelopes(traj: &InterfaceTrajectory, r_star: f64, delta: f64) -> BoundReport {
    let r0 = r_star + delta;
    let c_lo = 2.0 / r_star;
    let c_hi = 1.0 / (2.0 * r0);
    let mut rep = BoundReport {
        r_star,
        delta,
        c_lo,
        c_hi,
        start_mismatch: traj.r.first().map_or(f64::INFINITY, |r| (r - r0).abs()),
        hypothesis_holds: true,
        bracket_min: f64::INFINITY,
        bracket_max: f64::NEG_INFINITY,
        samples_checked: 0,
        max_violation_rp: 0.0,
        max_violation_r: 0.0,
        printed_rp_deviation: 0.0,
        printed_r_violation: 0.0,
        quench_time: traj.quench_time,
        quench_before_horizon: false,
    };
    for i in 0..traj.len() {
        let (y, r, rp) = (traj.times[i], traj.r[i], traj.rp[i]);
        if r < 0.5 * r_star || r > r0 + 1e-12 {
            break;
        }
        rep.samples_checked += 1;
        let b = traj.bracket[i];
        rep.bracket_min = rep.bracket_min.min(b);
        rep.bracket_max = rep.bracket_max.max(b);
        if b < -1.0 - 1e-12 || b > -0.5 {
            rep.hypothesis_holds = false;
        }
        let rp_lo = -(c_lo * y).tanh();
        let rp_hi = -(c_hi * y).tanh();
        let r_lo = r0 - log_cosh(c_lo * y) / c_lo;
        let r_hi = r0 - log_cosh(c_hi * y) / c_hi;
        rep.max_violation_rp = rep.max_violation_rp.max(rp_lo - rp).max(rp - rp_hi);
        rep.max_violation_r = rep.max_violation_r.max(r_lo - r).max(r - r_hi);
        let printed = -(4.0 * y / r_star).tanh();
        rep.printed_rp_deviation = rep.printed_rp_deviation.max((rp - printed).abs());
        let pr_lo = r0 - 0.25 * r_star * log_cosh(4.0 * y / r_star);
        let pr_hi = r0 * (1.0 - log_cosh(y / r0));
        rep.printed_r_violation = rep.printed_r_violation.max(pr_lo - r).max(r - pr_hi);
    }
    if let Some(q) = traj.quench_time {
        rep.quench_before_horizon = q <= traj.t_end() && traj.state_at(q).1.abs() < 1.0;
    }
    rep
}
