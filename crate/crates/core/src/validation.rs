//! Modulation shift a(y⁰), the error ξ = Φ − F̃₀ − εF̃₁, its energy E(ξ),
//! the shift functional Ā and the ε-convergence study.
//!
//! A run keeps band-window snapshots (Φ, Φ_t, Φ_tt) at a fixed interval.
//! Values off the snapshot grid come from quintic Hermite interpolation in
//! t and six-point Lagrange interpolation in r. The shift is solved on
//! y⁰-slices of the normal-coordinate strip; the two norms of the main
//! estimate are evaluated on the snapshot time slices.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::ansatz::{ansatz_at, ansatz_cartesian, AnsatzTable};
use crate::coords::{Kinematics, NormalFrame};
use crate::effective::{integrate_r, mean_curvature, InterfaceTrajectory, ProfileTable};
use crate::error::{domain, Error, Result};
use crate::grid::{derivative4, trapezoid, ProfileGrid};
use crate::potential::{fmt17, FieldPoint, Potential, PotentialSpec};
use crate::spline::{lagrange6, quintic_hermite, CubicSpline};
use crate::wavesim::{build_initial_data, RadialGrid, SeamReport, Stepper, WaveSolver};

/// Newton tolerance on the shift equation.
pub const SHIFT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Base potential; its `epsilon` is replaced by each entry of `eps_list`.
    pub spec: PotentialSpec,
    pub r0: f64,
    pub t_bar: f64,
    /// Half-width δ of the data band (b₁ = R0 − δ, b₂ = R0 + δ) and of the
    /// energy window |y¹| ≤ δ.
    pub band: f64,
    /// c in Σ_{c,T̄}; also the window of the shift equation.
    pub norm_band: f64,
    pub dr_over_eps: f64,
    pub eps_list: Vec<f64>,
    /// Snapshots per unit ε of time.
    pub snapshots_per_eps: f64,
    /// y¹ samples per unit ε.
    pub samples_per_eps: f64,
    pub table_knots: usize,
    pub ansatz_knots: usize,
    pub ansatz_points: usize,
    pub ode_dt: f64,
    /// Bound C for sup Ā across the study.
    pub a_bar_bound: f64,
    pub slope_band: [f64; 2],
    pub control_slope_max: f64,
    /// Also run the study with F₁ omitted.
    pub control: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            spec: PotentialSpec { lambda_phi: 2.0, lambda_sigma: 1.0, beta: 1.2, d: 1.0, epsilon: 0.1, offset: 0.0 },
            r0: 3.0,
            t_bar: 1.0,
            band: 1.2,
            norm_band: 0.75,
            dr_over_eps: 0.02,
            eps_list: vec![0.1, 0.05, 0.025],
            snapshots_per_eps: 4.0,
            samples_per_eps: 40.0,
            table_knots: 64,
            ansatz_knots: 17,
            ansatz_points: 4097,
            ode_dt: 1e-3,
            a_bar_bound: 2.0,
            slope_band: [1.5, 2.5],
            control_slope_max: 1.3,
            control: true,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.eps_list.len() < 3 {
            return bad("eps_list needs at least three values".into());
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) || self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return bad("eps_list must be positive and strictly descending".into());
        }
        let positive = [
            ("r0", self.r0),
            ("t_bar", self.t_bar),
            ("band", self.band),
            ("norm_band", self.norm_band),
            ("dr_over_eps", self.dr_over_eps),
            ("snapshots_per_eps", self.snapshots_per_eps),
            ("samples_per_eps", self.samples_per_eps),
            ("ode_dt", self.ode_dt),
            ("a_bar_bound", self.a_bar_bound),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{name} must be positive, got {x}"));
            }
        }
        if self.norm_band > self.band {
            return bad("norm_band must not exceed band".into());
        }
        if self.dr_over_eps > 0.1 {
            return bad("dr_over_eps must be at most 0.1".into());
        }
        if self.table_knots < 4 || self.ansatz_knots < 4 || self.ansatz_points < 5 {
            return bad("too few table knots or ansatz points".into());
        }
        Ok(())
    }
}

/// Everything shared by the runs of a study: the effective trajectory,
/// the chart and the ansatz table.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub config: StudyConfig,
    pub profile_table: ProfileTable,
    pub frame: NormalFrame,
    pub ansatz: AnsatzTable,
    /// Last y⁰-slice on which the shift is solved; every point of Σ_{c,T̄}
    /// has its foot point below it.
    pub s_max: f64,
    /// Simulated time.
    pub t_sim: f64,
    /// R0 − δ − r_min: the light cone of the axis cells reaches the band
    /// after this time.
    pub causality_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetupSummary {
    pub s_max: f64,
    pub t_sim: f64,
    pub causality_cap: f64,
    pub y1_max: f64,
    pub y0_max: f64,
    pub decay_alpha: f64,
    pub f1_solvability: f64,
}

impl StudySetup {
    pub fn build(config: &StudyConfig) -> Result<Self> {
        config.validate()?;
        let c = config;
        let spec = c.spec.with_epsilon(c.eps_list[0]);
        let grid = ProfileGrid::default_for(&spec, c.r0 + 0.2)?;
        let profile_table = ProfileTable::build(&spec, 0.5 * c.r0, c.r0 + 0.2, c.table_knots, &grid)?;
        let speed = |traj: &InterfaceTrajectory, s: f64| {
            let (_, rp) = traj.state_at(s);
            rp.abs() / (1.0 - rp * rp).sqrt()
        };
        let probe = integrate_r(&profile_table, c.r0, 3.0 * c.t_bar, c.ode_dt)?;
        let mut s_max = c.t_bar;
        for _ in 0..200 {
            let next = c.t_bar + c.norm_band * speed(&probe, s_max.min(probe.t_end()));
            if (next - s_max).abs() < 1e-12 {
                break;
            }
            s_max = next;
        }
        if s_max >= probe.t_end() {
            return domain(format!("the trajectory ends at {} before the band is covered", probe.t_end()));
        }
        let margin = 0.02;
        let t_sim = (s_max + c.norm_band * speed(&probe, s_max)).max(c.t_bar + c.band * speed(&probe, c.t_bar)) + margin;
        let r_min = (c.r0 / 100.0).max(1e-3);
        let causality_cap = c.r0 - c.band - r_min;
        if t_sim > causality_cap {
            return Err(Error::Config(format!(
                "simulated time {t_sim} exceeds the causality cap {causality_cap}; reduce band or t_bar"
            )));
        }
        let pad = 4.0 * c.t_bar / (c.t_bar / (c.eps_list[0] / c.snapshots_per_eps)).round().max(1.0);
        let traj = integrate_r(&profile_table, c.r0, s_max + pad, c.ode_dt)?;
        if traj.t_end() < s_max + pad - 1e-9 {
            return domain(format!("the trajectory stops at {} ({:?})", traj.t_end(), traj.exit_reason));
        }
        let frame = NormalFrame::new(traj, profile_table.clone(), c.band)?;
        if frame.shrunk() {
            return domain(format!("chart half-width {} does not cover the band δ = {}", frame.y1_max, c.band));
        }
        let r_end = frame.kinematics(frame.y0_max)?.r;
        let ag = ProfileGrid::new(grid.half_width, c.ansatz_points)?;
        let ansatz = AnsatzTable::build(&spec, r_end - 0.05, c.r0 + 0.05, c.ansatz_knots, &ag)?;
        Ok(Self { config: c.clone(), profile_table, frame, ansatz, s_max, t_sim, causality_cap })
    }

    pub fn summary(&self) -> SetupSummary {
        SetupSummary {
            s_max: self.s_max,
            t_sim: self.t_sim,
            causality_cap: self.causality_cap,
            y1_max: self.frame.y1_max,
            y0_max: self.frame.y0_max,
            decay_alpha: self.ansatz.decay_alpha,
            f1_solvability: self.ansatz.solvability,
        }
    }
}

/// Band-window snapshots of one run at times kΔ, k = 0..len.
#[derive(Debug, Clone)]
pub struct BandHistory {
    pub interval: f64,
    pub r_lo: f64,
    pub dr: f64,
    pub width: usize,
    j0: usize,
    // [snapshot][channel][node]; channels φ, σ, φ_t, σ_t, φ_tt, σ_tt
    data: Vec<f64>,
    len: usize,
}

/// Φ, Φ_t and Φ_r at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldSample {
    pub u: [f64; 2],
    pub ut: [f64; 2],
    pub ur: [f64; 2],
}

impl BandHistory {
    pub fn new(grid: &RadialGrid, r_lo: f64, r_hi: f64, interval: f64) -> Result<Self> {
        let j0 = grid.index_below(r_lo).saturating_sub(3);
        let j1 = (grid.index_below(r_hi) + 4).min(grid.n_r - 1);
        if j1 <= j0 + 6 {
            return domain("band window is too small");
        }
        Ok(Self { interval, r_lo: grid.r(j0), dr: grid.dr(), width: j1 - j0 + 1, j0, data: Vec::new(), len: 0 })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn t_end(&self) -> f64 {
        (self.len.max(1) - 1) as f64 * self.interval
    }

    pub fn r(&self, i: usize) -> f64 {
        self.r_lo + i as f64 * self.dr
    }

    pub fn record(&mut self, st: &crate::wavesim::FieldState, acc_phi: &[f64], acc_sigma: &[f64]) {
        let w = self.width;
        let j0 = self.j0;
        for src in [&st.phi, &st.sigma, &st.phi_t, &st.sigma_t] {
            self.data.extend_from_slice(&src[j0..j0 + w]);
        }
        self.data.extend_from_slice(&acc_phi[j0..j0 + w]);
        self.data.extend_from_slice(&acc_sigma[j0..j0 + w]);
        self.len += 1;
    }

    /// Channel `ch` of snapshot `k` over the window.
    pub fn channel(&self, k: usize, ch: usize) -> &[f64] {
        let b = (k * 6 + ch) * self.width;
        &self.data[b..b + self.width]
    }

    pub fn sample(&self, t: f64, r: f64) -> Result<FieldSample> {
        if self.len < 2 || t < -1e-12 || t > self.t_end() + 1e-12 {
            return domain(format!("t = {t} outside the recorded history"));
        }
        let tp = (t.max(0.0) / self.interval).max(0.0);
        let k = (tp.floor() as usize).min(self.len - 2);
        let ut = tp - k as f64;
        let pos = (r - self.r_lo) / self.dr;
        let j = pos.floor();
        if j < 2.0 || j + 3.0 >= self.width as f64 {
            return domain(format!("r = {r} outside the recorded band window"));
        }
        let j = j as usize;
        let (w, dw) = lagrange6(pos - j as f64);
        let h = self.interval;
        let mut out = FieldSample::default();
        for c in 0..2 {
            let (a, b) = (self.channel(k, c), self.channel(k + 1, c));
            let (va, vb) = (self.channel(k, c + 2), self.channel(k + 1, c + 2));
            let (aa, ab) = (self.channel(k, c + 4), self.channel(k + 1, c + 4));
            for i in 0..6 {
                let n = j + i - 2;
                let (v, dv) = quintic_hermite(ut, [a[n], b[n]], [h * va[n], h * vb[n]], [h * h * aa[n], h * h * ab[n]]);
                out.u[c] += w[i] * v;
                out.ur[c] += dw[i] * v / self.dr;
                out.ut[c] += w[i] * dv / h;
            }
        }
        Ok(out)
    }
}

/// Field samples on one y⁰-slice, trapezoid weights included.
#[derive(Debug, Clone)]
pub struct SliceSamples {
    pub y0: f64,
    pub kin: Kinematics,
    pub y1: Vec<f64>,
    pub weights: Vec<f64>,
    pub psi: Vec<[f64; 2]>,
}

impl SliceSamples {
    /// `n` uniform samples of `field` on |y¹| ≤ `half`.
    pub fn from_fn(y0: f64, kin: Kinematics, half: f64, n: usize, mut field: impl FnMut(f64) -> Result<[f64; 2]>) -> Result<Self> {
        let n = n.max(3);
        let h = 2.0 * half / (n - 1) as f64;
        let mut y1 = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut psi = Vec::with_capacity(n);
        for i in 0..n {
            let y = -half + i as f64 * h;
            y1.push(y);
            weights.push(if i == 0 || i == n - 1 { 0.5 * h } else { h });
            psi.push(field(y)?);
        }
        Ok(Self { y0, kin, y1, weights, psi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSolve {
    pub y0: f64,
    pub a: f64,
    #[serde(rename = "G_residual")]
    pub g_residual: f64,
    pub newton_iters: usize,
    /// ∂_aG at the solution (positive).
    pub d_a_g: f64,
    pub bisected: bool,
    /// |⟨ξ, ∂_{y¹}F̃₀⟩| / (‖ξ‖ ‖∂_{y¹}F̃₀‖) over the slice.
    pub orthogonality: f64,
    /// |⟨ξ, ∂_{y¹}F̃₀⟩| without normalization.
    pub inner_product: f64,
    pub xi_l2: f64,
}

/// Below this ‖ξ‖ the normalized orthogonality ratio is roundoff.
pub const XI_RESOLVED: f64 = 1e-8;

/// G(a) = (2/ε²) Σ w ξ·∂_xF₀ with ξ = Ψ − F̃₀ − εF̃₁, and ∂_aG.
fn shift_equation<P: Potential + ?Sized>(
    pot: &P,
    table: &AnsatzTable,
    eps: f64,
    s: &SliceSamples,
    a: f64,
) -> Result<(f64, f64)> {
    let r = s.kin.r;
    let em = eps * s.kin.m;
    let mut g = 0.0;
    let mut dg = 0.0;
    for ((&y1, &w), psi) in s.y1.iter().zip(&s.weights).zip(&s.psi) {
        let p = table.eval((y1 - a) / eps, r)?;
        let f0xx = pot.w_grad(FieldPoint::new(p.f0[0], p.f0[1]), r);
        for c in 0..2 {
            let xi = psi[c] - p.f0[c] - em * p.f1[c];
            g += w * xi * p.f0_x[c];
            dg += w * ((p.f0_x[c] + em * p.f1_x[c]) * p.f0_x[c] - xi * f0xx[c]);
        }
    }
    Ok((2.0 / (eps * eps) * g, 2.0 / (eps * eps * eps) * dg))
}

/// Solves G(a) = 0 on one slice by Newton from `a_prev`, falling back to
/// bisection on |a| ≤ 5ε.
pub fn solve_shift<P: Potential + ?Sized>(
    pot: &P,
    table: &AnsatzTable,
    eps: f64,
    slice: &SliceSamples,
    a_prev: f64,
) -> Result<ShiftSolve> {
    let limit = 5.0 * eps;
    let mut a = a_prev;
    let mut iters = 0;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut converged = false;
    while iters < 50 {
        let (g, dg) = shift_equation(pot, table, eps, slice, a)?;
        if g.abs() <= SHIFT_TOL {
            converged = true;
            // one polishing step, kept only if it helps
            if dg > 0.0 && g != 0.0 {
                let b = a - g / dg;
                if shift_equation(pot, table, eps, slice, b)?.0.abs() < g.abs() {
                    a = b;
                }
            }
            break;
        }
        if g.abs() < 0.5 * best {
            best = g.abs();
            stalled = 0;
        } else {
            stalled += 1;
        }
        if !(dg > 0.0) || stalled >= 4 {
            break;
        }
        iters += 1;
        a -= g / dg;
        if !(a.abs() <= limit) {
            break;
        }
    }
    let mut bisected = false;
    if !converged {
        bisected = true;
        let (mut lo, mut hi) = (-limit, limit);
        let (glo, _) = shift_equation(pot, table, eps, slice, lo)?;
        let (ghi, _) = shift_equation(pot, table, eps, slice, hi)?;
        if glo.signum() == ghi.signum() {
            return Err(Error::LeftNeighborhood(slice.y0));
        }
        if glo > 0.0 {
            std::mem::swap(&mut lo, &mut hi);
        }
        a = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, _) = shift_equation(pot, table, eps, slice, a)?;
            iters += 1;
            if g.abs() <= SHIFT_TOL || (hi - lo).abs() <= 1e-15 * limit {
                break;
            }
            if g < 0.0 {
                lo = a;
            } else {
                hi = a;
            }
            a = 0.5 * (lo + hi);
        }
    }
    let (g, dg) = shift_equation(pot, table, eps, slice, a)?;
    if !(dg > 0.0) {
        return domain(format!("shift equation is degenerate at y0 = {} (∂aG = {dg})", slice.y0));
    }
    let (inner_product, xi_l2, orthogonality) = orthogonality(table, eps, slice, a)?;
    Ok(ShiftSolve { y0: slice.y0, a, g_residual: g, newton_iters: iters, d_a_g: dg, bisected, orthogonality, inner_product, xi_l2 })
}

/// (|⟨ξ, ∂F̃₀⟩|, ‖ξ‖, normalized ratio).
fn orthogonality(table: &AnsatzTable, eps: f64, s: &SliceSamples, a: f64) -> Result<(f64, f64, f64)> {
    let (mut dot, mut xx, mut ff) = (0.0, 0.0, 0.0);
    for ((&y1, &w), psi) in s.y1.iter().zip(&s.weights).zip(&s.psi) {
        let v = ansatz_at(table, &s.kin, eps, y1, a, 0.0)?;
        for c in 0..2 {
            let xi = psi[c] - v.u[c];
            dot += w * xi * v.f0_y1[c];
            xx += w * xi * xi;
            ff += w * v.f0_y1[c] * v.f0_y1[c];
        }
    }
    if xx == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    Ok((dot.abs(), xx.sqrt(), dot.abs() / (xx * ff).sqrt()))
}

/// Five-point derivative of a uniformly sampled series, one-sided at the
/// ends.
pub fn five_point_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 5, "five-point derivative needs five samples");
    let mut d = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    d[0] = c * (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]);
    d[1] = c * (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]);
    for i in 2..n - 2 {
        d[i] = c * (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]);
    }
    d[n - 2] = -c * (-3.0 * y[n - 1] - 10.0 * y[n - 2] + 18.0 * y[n - 3] - 6.0 * y[n - 4] + y[n - 5]);
    d[n - 1] = -c * (-25.0 * y[n - 1] + 48.0 * y[n - 2] - 36.0 * y[n - 3] + 16.0 * y[n - 4] - 3.0 * y[n - 5]);
    d
}

/// (1 + |a|/ε + |a′|/ε)³.
pub fn a_underline(a: f64, ap: f64, eps: f64) -> f64 {
    (1.0 + a.abs() / eps + ap.abs() / eps).powi(3)
}

/// ξ and its energy on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorFields {
    pub energy: f64,
    pub l2: f64,
    pub h1_band: f64,
    /// ‖F̃₀ + εF̃₁ − vacuum‖₂ beyond the band, from the profile tails.
    pub tail_l2: f64,
    /// (‖ξ‖²/ε²) / (E + ε⁻²e^{−α(δ−|a|)/ε}).
    pub coercivity_ratio: f64,
}

/// Field values and normal derivatives along one slice.
#[derive(Debug, Clone)]
pub struct SliceFields {
    pub slice: SliceSamples,
    pub d_y0: Vec<[f64; 2]>,
    pub d_y1: Vec<[f64; 2]>,
}

/// Samples Φ from the history along the slice y⁰ = `y0`, |y¹| ≤ `half`,
/// with the normal derivatives ∂_{y⁰}Φ = n(Φ_t + R′Φ_r) and
/// ∂_{y¹}Φ = m(R′Φ_t + Φ_r).
pub fn sample_slice(frame: &NormalFrame, hist: &BandHistory, y0: f64, half: f64, n: usize) -> Result<SliceFields> {
    let k = frame.kinematics(y0)?;
    let mut d_y0 = Vec::with_capacity(n);
    let mut d_y1 = Vec::with_capacity(n);
    let slice = SliceSamples::from_fn(y0, k, half, n, |y1| {
        let t = y0 + y1 * k.m * k.rp;
        let r = k.r + y1 * k.m;
        let s = hist.sample(t, r)?;
        let nn = k.n(y1);
        d_y0.push([0, 1].map(|c| nn * (s.ut[c] + k.rp * s.ur[c])));
        d_y1.push([0, 1].map(|c| k.m * (k.rp * s.ut[c] + s.ur[c])));
        Ok(s.u)
    })?;
    Ok(SliceFields { slice, d_y0, d_y1 })
}

fn tail_l2(table: &AnsatzTable, eps: f64, r: f64, m: f64, from: f64) -> Result<f64> {
    let l = table.grid.half_width;
    if from >= l {
        return Ok(0.0);
    }
    let h = table.grid.h();
    let n = ((l - from) / h).ceil().max(1.0) as usize;
    let hx = (l - from) / n as f64;
    let mut acc = 0.0;
    for side in [-1.0, 1.0] {
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let x = side * (from + i as f64 * hx);
                table.eval(x, r).map(|p| {
                    let f = p.f0[0] + eps * m * p.f1[0] - side;
                    let s = p.f0[1] + eps * m * p.f1[1];
                    f * f + s * s
                })
            })
            .collect::<Result<_>>()?;
        acc += eps * trapezoid(&vals, hx);
    }
    Ok(acc.sqrt())
}

/// ξ, E(ξ) and the band norms on a sampled slice for shift (a, a′).
pub fn error_fields<P: Potential + ?Sized>(
    pot: &P,
    table: &AnsatzTable,
    eps: f64,
    fields: &SliceFields,
    a: f64,
    ap: f64,
    band: f64,
) -> Result<ErrorFields> {
    let s = &fields.slice;
    let k = &s.kin;
    let (mut energy, mut l2, mut h1) = (0.0, 0.0, 0.0);
    for i in 0..s.y1.len() {
        let y1 = s.y1[i];
        let w = s.weights[i];
        let v = ansatz_at(table, k, eps, y1, a, ap)?;
        let n = k.n(y1);
        let xi = [0, 1].map(|c| s.psi[i][c] - v.u[c]);
        let x0 = [0, 1].map(|c| fields.d_y0[i][c] - v.u_y0[c]);
        let x1 = [0, 1].map(|c| fields.d_y1[i][c] - v.u_y1[c]);
        let hw = pot.w_hess(FieldPoint::new(v.f0[0], v.f0[1]), k.r);
        let quad = xi[0] * (hw[0][0] * xi[0] + hw[0][1] * xi[1]) + xi[1] * (hw[1][0] * xi[0] + hw[1][1] * xi[1]);
        let q0 = x0[0] * x0[0] + x0[1] * x0[1];
        let q1 = x1[0] * x1[0] + x1[1] * x1[1];
        let qq = xi[0] * xi[0] + xi[1] * xi[1];
        energy += w * (0.5 * (k.m * k.m / (n * n)) * q0 + 0.5 * q1 + 0.5 / (eps * eps) * quad);
        l2 += w * qq;
        h1 += w * (qq + q0 + q1);
    }
    let tail = tail_l2(table, eps, k.r, k.m, (band - a.abs()) / eps)?;
    let decay = (-table.decay_alpha * (band - a.abs()) / eps).exp() / (eps * eps);
    Ok(ErrorFields {
        energy,
        l2: l2.sqrt(),
        h1_band: h1.sqrt(),
        tail_l2: tail,
        coercivity_ratio: l2 / (eps * eps) / (energy + decay),
    })
}

/// L² norms of the three source terms of the ξ equation on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub s_minus1: f64,
    pub s0: f64,
    pub n: f64,
}

/// S₋₁, S₀ and N on a sampled slice. `shift` returns (a, a′) at any y⁰;
/// the second y⁰-derivative of the ansatz is a central difference.
pub fn residual_decomposition<P: Potential + ?Sized>(
    pot: &P,
    frame: &NormalFrame,
    table: &AnsatzTable,
    eps: f64,
    fields: &SliceFields,
    shift: &dyn Fn(f64) -> (f64, f64),
) -> Result<ResidualNorms> {
    let s = &fields.slice;
    let k = s.kin;
    let y0 = s.y0;
    let h = 1e-4;
    let kp = frame.kinematics(y0 + h)?;
    let km = frame.kinematics(y0 - h)?;
    let (a, ap) = shift(y0);
    let (a_p, ap_p) = shift(y0 + h);
    let (a_m, ap_m) = shift(y0 - h);
    let mean = mean_curvature(k.r, k.rp, k.rpp)?;
    let mut out = ResidualNorms::default();
    for i in 0..s.y1.len() {
        let y1 = s.y1[i];
        let w = s.weights[i];
        let v = ansatz_at(table, &k, eps, y1, a, ap)?;
        let p = table.eval(v.x, k.r)?;
        let n = k.n(y1);
        let (b0, b1) = k.b_coeffs(y1);
        let f0 = FieldPoint::new(p.f0[0], p.f0[1]);
        let dr_w = pot.w_partial_r(f0, k.r);
        let vp = ansatz_at(table, &kp, eps, y1, a_p, ap_p)?;
        let vm = ansatz_at(table, &km, eps, y1, a_m, ap_m)?;
        let g0 = pot.w_grad(f0, k.r);
        let hw = pot.w_hess(f0, k.r);
        let fxi = [0, 1].map(|c| v.u[c] - p.f0[c] + s.psi[i][c] - v.u[c]);
        let shifted = FieldPoint::new(p.f0[0] + fxi[0], p.f0[1] + fxi[1]);
        let g1 = pot.w_grad(shifted, k.r + y1 * k.m);
        let (mut sm1, mut s0, mut nn) = (0.0, 0.0, 0.0);
        for c in 0..2 {
            let t1 = (b1 + mean) * p.f0_x[c] / eps + a * k.m / (eps * eps) * dr_w[c];
            let uyy = (vp.u_y0[c] - vm.u_y0[c]) / (2.0 * h);
            let t0 = k.m * k.m / (n * n) * uyy + b0 * v.u_y0[c] + if table.with_f1 { b1 * k.m * p.f1_x[c] } else { 0.0 };
            let lin = hw[c][0] * fxi[0] + hw[c][1] * fxi[1];
            let tn = (g1[c] - g0[c] - lin - y1 * k.m * dr_w[c]) / (eps * eps);
            sm1 += t1 * t1;
            s0 += t0 * t0;
            nn += tn * tn;
        }
        out.s_minus1 += w * sm1;
        out.s0 += w * s0;
        out.n += w * nn;
    }
    out.s_minus1 = out.s_minus1.sqrt();
    out.s0 = out.s0.sqrt();
    out.n = out.n.sqrt();
    Ok(out)
}

/// Per-slice record of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub y0: f64,
    pub a: f64,
    pub a_prime: f64,
    #[serde(rename = "A_underline")]
    pub a_underline: f64,
    pub energy: f64,
    pub xi_l2: f64,
    pub xi_h1_band: f64,
    pub tail_l2: f64,
    pub coercivity_ratio: f64,
    pub s_minus1: f64,
    pub s0: f64,
    pub n: f64,
}

/// Norms of the error on one snapshot time slice of Σ_{c,T̄}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSliceNorm {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    pub dt_l2: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonRun {
    pub eps: f64,
    pub with_f1: bool,
    pub n_r: usize,
    pub dr: f64,
    pub dt: f64,
    pub snapshot_interval: f64,
    pub steps: u64,
    pub energy_drift: f64,
    pub seam: SeamReport,
    /// Interface position minus R at t = T̄.
    pub center_offset: f64,
    pub shifts: Vec<ShiftSolve>,
    pub slices: Vec<SliceRecord>,
    pub time_norms: Vec<TimeSliceNorm>,
    /// ‖Φ − U‖ in L¹_t H¹_r(Σ_{c,T̄}).
    pub l1_h1: f64,
    /// ‖∂_t(Φ − U)‖ in L¹_t L²_r(Σ_{c,T̄}).
    pub l1_dt: f64,
    /// sup over slices of ‖ξ‖₂.
    pub sup_xi_l2: f64,
    pub sup_energy: f64,
    pub sup_a_underline: f64,
    pub max_abs_a_over_eps: f64,
    /// Over slices with ‖ξ‖ ≥ XI_RESOLVED.
    pub max_orthogonality: f64,
    pub max_inner_product: f64,
    pub max_g_residual: f64,
    /// sup ‖S₋₁‖ / (√ε Ā).
    pub s_minus1_ratio: f64,
}

impl EpsilonRun {
    pub fn slices_csv(&self) -> String {
        let mut out =
            String::from("y0,a,a_prime,E,xi_l2,xi_h1_band,A_underline,tail_l2,coercivity_ratio,S_minus1,S_0,N\n");
        for s in &self.slices {
            let row = [
                s.y0,
                s.a,
                s.a_prime,
                s.energy,
                s.xi_l2,
                s.xi_h1_band,
                s.a_underline,
                s.tail_l2,
                s.coercivity_ratio,
                s.s_minus1,
                s.s0,
                s.n,
            ];
            out.push_str(&row.map(fmt17).join(","));
            out.push('\n');
        }
        out
    }

    pub fn shifts_csv(&self) -> String {
        let mut out = String::from("y0,a,G_residual,newton_iters,d_a_G,bisected,orthogonality,inner_product,xi_l2\n");
        for s in &self.shifts {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt17(s.y0),
                fmt17(s.a),
                fmt17(s.g_residual),
                s.newton_iters,
                fmt17(s.d_a_g),
                s.bisected,
                fmt17(s.orthogonality),
                fmt17(s.inner_product),
                fmt17(s.xi_l2)
            ));
        }
        out
    }

    pub fn time_norms_csv(&self) -> String {
        let mut out = String::from("t,l2,h1,dt_l2,nodes\n");
        for s in &self.time_norms {
            out.push_str(&format!("{},{},{},{},{}\n", fmt17(s.t), fmt17(s.l2), fmt17(s.h1), fmt17(s.dt_l2), s.nodes));
        }
        out
    }
}

/// Runs the wave solver for one ε from ansatz data (with or without F₁) and
/// measures the error against the same ansatz.
pub fn run_epsilon(setup: &StudySetup, eps: f64, with_f1: bool) -> Result<EpsilonRun> {
    let c = &setup.config;
    let spec = c.spec.with_epsilon(eps);
    let frame = &setup.frame;
    let stripped;
    let table = if with_f1 {
        &setup.ansatz
    } else {
        stripped = setup.ansatz.without_f1();
        &stripped
    };
    let grid = RadialGrid::for_interface(c.r0, eps, c.dr_over_eps)?;
    let (init, seam) = build_initial_data(&spec, table, frame, &grid, c.band)?;

    // time step commensurate with the snapshot interval
    let interval = c.t_bar / (c.t_bar / (eps / c.snapshots_per_eps)).round().max(1.0);
    let stable = WaveSolver::stable_dt(&spec, &grid);
    let stride = (interval / stable).ceil().max(1.0) as u64;
    let solver = WaveSolver::new(&spec, grid, Some(interval / stride as f64))?;
    let n_snap = (setup.t_sim / interval).ceil() as u64;

    let mut m_max: f64 = 1.0;
    let mut r_low = c.r0;
    for (&r, &rp) in frame.traj.r.iter().zip(&frame.traj.rp) {
        m_max = m_max.max(1.0 / (1.0 - rp * rp).sqrt());
        r_low = r_low.min(r);
    }
    let reach = c.band * m_max + 8.0 * grid.dr();
    let mut hist = BandHistory::new(&grid, r_low - reach, c.r0 + reach, interval)?;
    let mut stepper = Stepper::new(&solver, init)?;
    let e0 = stepper.state.discrete_energy;
    let mut drift: f64 = 0.0;
    hist.record(&stepper.state, &stepper.acc_phi, &stepper.acc_sigma);
    let mut center_offset = f64::NAN;
    for k in 1..=n_snap {
        for _ in 0..stride {
            stepper.advance()?;
        }
        let e = stepper.energy();
        drift = drift.max((e - e0).abs() / e0.abs());
        hist.record(&stepper.state, &stepper.acc_phi, &stepper.acc_sigma);
        if (k as f64 * interval - c.t_bar).abs() < 0.5 * interval {
            let phi = hist.channel(hist.len() - 1, 0);
            if let Some(x) = crossing(phi, hist.r_lo, hist.dr) {
                center_offset = x - frame.traj.state_at(k as f64 * interval).0;
            }
        }
    }

    // shift on y⁰-slices
    let n_y1 = |half: f64| (2.0 * half * c.samples_per_eps / eps).round() as usize + 1;
    let n_slices = (setup.s_max / interval + 1e-9).floor() as usize + 1;
    let mut shifts = Vec::with_capacity(n_slices);
    let mut a_prev = 0.0;
    for i in 0..n_slices {
        let y0 = i as f64 * interval;
        let f = sample_slice(frame, &hist, y0, c.norm_band, n_y1(c.norm_band))?;
        let s = solve_shift(&spec, table, eps, &f.slice, a_prev)?;
        a_prev = s.a;
        shifts.push(s);
    }
    if shifts.len() < 5 {
        return domain("too few shift slices for the five-point derivative");
    }
    let y0s: Vec<f64> = shifts.iter().map(|s| s.y0).collect();
    let a_series: Vec<f64> = shifts.iter().map(|s| s.a).collect();
    let ap_series = five_point_derivative(&a_series, interval);
    let a_spline = CubicSpline::new(y0s.clone(), a_series.clone());
    let ap_spline = CubicSpline::new(y0s.clone(), ap_series.clone());
    let s_hi = *y0s.last().unwrap();
    let shift = move |s: f64| {
        let s = s.clamp(0.0, s_hi);
        (a_spline.eval(s), ap_spline.eval(s))
    };

    // energy, band norms and source terms for y⁰ ≤ T̄
    let mut slices = Vec::new();
    for (i, sh) in shifts.iter().enumerate() {
        if sh.y0 > c.t_bar + 1e-9 {
            break;
        }
        let f = sample_slice(frame, &hist, sh.y0, c.band, n_y1(c.band))?;
        let ef = error_fields(&spec, table, eps, &f, sh.a, ap_series[i], c.band)?;
        let res = residual_decomposition(&spec, frame, table, eps, &f, &shift)?;
        slices.push(SliceRecord {
            y0: sh.y0,
            a: sh.a,
            a_prime: ap_series[i],
            a_underline: a_underline(sh.a, ap_series[i], eps),
            energy: ef.energy,
            xi_l2: ef.l2,
            xi_h1_band: ef.h1_band,
            tail_l2: ef.tail_l2,
            coercivity_ratio: ef.coercivity_ratio,
            s_minus1: res.s_minus1,
            s0: res.s0,
            n: res.n,
        });
    }

    let time_norms = theorem_norms(setup, table, eps, &hist, &shift)?;
    let ts: Vec<f64> = time_norms.iter().map(|n| n.t).collect();
    let l1 = |f: &dyn Fn(&TimeSliceNorm) -> f64| {
        let v: Vec<f64> = time_norms.iter().map(f).collect();
        (1..v.len()).map(|i| 0.5 * (ts[i] - ts[i - 1]) * (v[i] + v[i - 1])).sum::<f64>()
    };
    let l1_h1 = l1(&|n| n.h1);
    let l1_dt = l1(&|n| n.dt_l2);
    let fold = |f: &dyn Fn(&SliceRecord) -> f64| slices.iter().map(f).fold(0.0f64, f64::max);
    Ok(EpsilonRun {
        eps,
        with_f1,
        n_r: grid.n_r,
        dr: grid.dr(),
        dt: solver.dt,
        snapshot_interval: interval,
        steps: stepper.steps,
        energy_drift: drift,
        seam,
        center_offset,
        sup_xi_l2: fold(&|s| s.xi_l2),
        sup_energy: fold(&|s| s.energy),
        sup_a_underline: fold(&|s| s.a_underline),
        s_minus1_ratio: fold(&|s| s.s_minus1 / (eps.sqrt() * s.a_underline)),
        max_abs_a_over_eps: shifts.iter().map(|s| s.a.abs() / eps).fold(0.0, f64::max),
        max_orthogonality: shifts.iter().filter(|s| s.xi_l2 >= XI_RESOLVED).map(|s| s.orthogonality).fold(0.0, f64::max),
        max_inner_product: shifts.iter().map(|s| s.inner_product).fold(0.0, f64::max),
        max_g_residual: shifts.iter().map(|s| s.g_residual.abs()).fold(0.0, f64::max),
        shifts,
        slices,
        time_norms,
        l1_h1,
        l1_dt,
    })
}

fn crossing(phi: &[f64], r_lo: f64, dr: f64) -> Option<f64> {
    (0..phi.len() - 1)
        .find(|&j| phi[j] <= 0.0 && phi[j + 1] > 0.0)
        .map(|j| r_lo + dr * (j as f64 + phi[j] / (phi[j] - phi[j + 1])))
}

/// H¹ and ∂_t-L² norms of Φ − U on the snapshot slices t ≤ T̄ of
/// Σ_{c,T̄}, with measure dr. Φ_r is a fourth-order difference of the grid
/// data; U and its derivatives are exact.
fn theorem_norms(
    setup: &StudySetup,
    table: &AnsatzTable,
    eps: f64,
    hist: &BandHistory,
    shift: &dyn Fn(f64) -> (f64, f64),
) -> Result<Vec<TimeSliceNorm>> {
    let c = &setup.config;
    let frame = &setup.frame;
    let dr = hist.dr;
    let mut out = Vec::new();
    for k in 0..hist.len() {
        let t = k as f64 * hist.interval;
        if t > c.t_bar + 1e-9 {
            break;
        }
        let (r_t, rp_t) = frame.traj.state_at(t);
        let reach = c.norm_band / (1.0 - rp_t * rp_t).sqrt() + 0.5 * c.norm_band * rp_t.abs() + 4.0 * dr;
        let dphi = [derivative4(hist.channel(k, 0), dr), derivative4(hist.channel(k, 1), dr)];
        let (mut l2, mut h1, mut tl2, mut nodes) = (0.0, 0.0, 0.0, 0);
        for j in 2..hist.width - 2 {
            let r = hist.r(j);
            if (r - r_t).abs() > reach {
                continue;
            }
            let (_, d) = match frame.inverse(t, r) {
                Ok(p) => p,
                Err(Error::OutsideChart { .. }) => continue,
                Err(e) => return Err(e),
            };
            if d.abs() > c.norm_band {
                continue;
            }
            let (u, ut, ur) = ansatz_cartesian(table, frame, eps, t, r, shift)?;
            for ch in 0..2 {
                let e = hist.channel(k, ch)[j] - u[ch];
                let er = dphi[ch][j] - ur[ch];
                let et = hist.channel(k, ch + 2)[j] - ut[ch];
                l2 += dr * e * e;
                h1 += dr * (e * e + er * er);
                tl2 += dr * et * et;
            }
            nodes += 1;
        }
        out.push(TimeSliceNorm { t, l2: l2.sqrt(), h1: h1.sqrt(), dt_l2: tl2.sqrt(), nodes });
    }
    Ok(out)
}

/// Least-squares fit of log(norm) against log(ε).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% interval for the slope (Student t, n − 2 dof); absent for two points.
    pub ci95: Option<[f64; 2]>,
    pub residuals: Vec<f64>,
    pub points: usize,
}

pub fn fit_slope(eps: &[f64], values: &[f64]) -> Result<SlopeFit> {
    let n = eps.len();
    if n < 2 || values.len() != n {
        return domain("slope fit needs at least two matching points");
    }
    if eps.iter().chain(values).any(|v| !(*v > 0.0 && v.is_finite())) {
        return domain("slope fit needs positive finite values");
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - (intercept + slope * xi)).collect();
    let ci95 = if n > 2 {
        let dof = nf - 2.0;
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
        let se = (s2 / sxx).sqrt();
        let q = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Domain(e.to_string()))?.inverse_cdf(0.975);
        Some([slope - q * se, slope + q * se])
    } else {
        None
    };
    Ok(SlopeFit { slope, intercept, ci95, residuals, points: n })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exclusion {
    pub eps: f64,
    pub with_f1: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StudySlopes {
    pub l1_h1: Option<SlopeFit>,
    pub l1_dt: Option<SlopeFit>,
    pub sup_xi_l2: Option<SlopeFit>,
    pub control_l1_h1: Option<SlopeFit>,
    pub control_l1_dt: Option<SlopeFit>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyVerdict {
    pub theorem_slopes: bool,
    pub control: bool,
    pub a_underline: bool,
    pub complete: bool,
}

impl StudyVerdict {
    pub fn passed(&self) -> bool {
        self.theorem_slopes && self.control && self.a_underline && self.complete
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: StudyConfig,
    pub setup: SetupSummary,
    pub epsilons: Vec<f64>,
    pub runs: Vec<EpsilonRun>,
    pub control_runs: Vec<EpsilonRun>,
    pub exclusions: Vec<Exclusion>,
    pub slopes: StudySlopes,
    pub sup_a_underline: f64,
    pub max_energy_drift: f64,
    pub verdict: StudyVerdict,
}

impl ErrorReport {
    /// Builds the report from finished (or failed) runs.
    pub fn assemble(setup: &StudySetup, results: Vec<(f64, bool, Result<EpsilonRun>)>) -> Self {
        let c = &setup.config;
        let mut runs = Vec::new();
        let mut control_runs = Vec::new();
        let mut exclusions = Vec::new();
        for (eps, with_f1, r) in results {
            match r {
                Ok(run) if with_f1 => runs.push(run),
                Ok(run) => control_runs.push(run),
                Err(e) => exclusions.push(Exclusion { eps, with_f1, reason: e.to_string() }),
            }
        }
        let by_eps = |v: &mut Vec<EpsilonRun>| v.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        by_eps(&mut runs);
        by_eps(&mut control_runs);
        let fit = |v: &[EpsilonRun], f: fn(&EpsilonRun) -> f64| {
            let e: Vec<f64> = v.iter().map(|r| r.eps).collect();
            let y: Vec<f64> = v.iter().map(f).collect();
            fit_slope(&e, &y).ok()
        };
        let slopes = StudySlopes {
            l1_h1: fit(&runs, |r| r.l1_h1),
            l1_dt: fit(&runs, |r| r.l1_dt),
            sup_xi_l2: fit(&runs, |r| r.sup_xi_l2),
            control_l1_h1: fit(&control_runs, |r| r.l1_h1),
            control_l1_dt: fit(&control_runs, |r| r.l1_dt),
        };
        let in_band = |f: &Option<SlopeFit>| f.as_ref().is_some_and(|f| f.slope >= c.slope_band[0] && f.slope <= c.slope_band[1]);
        let below = |f: &Option<SlopeFit>| f.as_ref().is_some_and(|f| f.slope <= c.control_slope_max);
        let sup_a_underline = runs.iter().map(|r| r.sup_a_underline).fold(0.0, f64::max);
        let max_energy_drift = runs.iter().chain(&control_runs).map(|r| r.energy_drift).fold(0.0, f64::max);
        let expected = c.eps_list.len() * if c.control { 2 } else { 1 };
        let verdict = StudyVerdict {
            theorem_slopes: in_band(&slopes.l1_h1) && in_band(&slopes.l1_dt),
            control: !c.control || (below(&slopes.control_l1_h1) && below(&slopes.control_l1_dt)),
            a_underline: !runs.is_empty() && sup_a_underline.is_finite() && sup_a_underline <= c.a_bar_bound,
            complete: exclusions.is_empty() && runs.len() + control_runs.len() == expected,
        };
        Self {
            config: c.clone(),
            setup: setup.summary(),
            epsilons: c.eps_list.clone(),
            runs,
            control_runs,
            exclusions,
            slopes,
            sup_a_underline,
            max_energy_drift,
            verdict,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One line per slope with its interval and the verdict.
    pub fn summary_text(&self) -> String {
        let line = |name: &str, f: &Option<SlopeFit>| match f {
            Some(f) => match f.ci95 {
                Some([lo, hi]) => format!("{name}: slope {:.4} (95% [{lo:.4}, {hi:.4}])\n", f.slope),
                None => format!("{name}: slope {:.4}\n", f.slope),
            },
            None => format!("{name}: no fit\n"),
        };
        let mut out = String::new();
        out.push_str(&line("L1_t H1 error", &self.slopes.l1_h1));
        out.push_str(&line("L1_t L2 time-derivative error", &self.slopes.l1_dt));
        out.push_str(&line("sup xi L2", &self.slopes.sup_xi_l2));
        out.push_str(&line("control L1_t H1", &self.slopes.control_l1_h1));
        out.push_str(&line("control L1_t L2 time-derivative", &self.slopes.control_l1_dt));
        out.push_str(&format!("sup A_underline: {:.6}\n", self.sup_a_underline));
        out.push_str(&format!("max energy drift: {:.3e}\n", self.max_energy_drift));
        for e in &self.exclusions {
            out.push_str(&format!("excluded eps = {} (F1: {}): {}\n", e.eps, e.with_f1, e.reason));
        }
        let v = &self.verdict;
        let pf = |b: bool| if b { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "theorem slopes in [{}, {}]: {}\ncontrol slopes <= {}: {}\nsup A_underline <= {}: {}\n",
            self.config.slope_band[0],
            self.config.slope_band[1],
            pf(v.theorem_slopes),
            self.config.control_slope_max,
            pf(v.control),
            self.config.a_bar_bound,
            pf(v.a_underline)
        ));
        out
    }
}

/// The work items of a study, largest ε first, F₁ runs before control runs.
pub fn work_items(config: &StudyConfig) -> Vec<(f64, bool)> {
    let mut items: Vec<(f64, bool)> = config.eps_list.iter().map(|&e| (e, true)).collect();
    if config.control {
        items.extend(config.eps_list.iter().map(|&e| (e, false)));
    }
    items
}

/// Runs every ε (and the control runs) in sequence. Failed runs are
/// recorded as exclusions.
pub fn convergence_study(config: &StudyConfig) -> Result<ErrorReport> {
    let setup = StudySetup::build(config)?;
    let results = work_items(config)
        .into_iter()
        .map(|(eps, f1)| (eps, f1, run_epsilon(&setup, eps, f1)))
        .collect();
    Ok(ErrorReport::assemble(&setup, results))
}
