//! The modulated ansatz U = F₀((y¹−a)/ε; R) + ε m F₁⁰((y¹−a)/ε; R) on
//! normal coordinates, where F₁⁰ is the first-order correction at rest
//! (F₁ at speed v equals m·F₁⁰).
//!
//! Profiles and corrections are tabulated at radius knots; between knots
//! each grid node carries a cubic spline in R, and between nodes the
//! profile is a cubic Hermite interpolant in x. Past the grid the fields
//! sit at the vacua.

use serde::{Deserialize, Serialize};

use crate::coords::{Kinematics, NormalFrame};
use crate::error::{domain, Result};
use crate::grid::{derivative4, ProfileGrid};
use crate::linop::solve_f1;
use crate::potential::Potential;
use crate::profiles::{solve_profile, ProfileSolution};
use crate::spline::{hermite, spline_moments, spline_weights};

const CHANNELS: usize = 8;

/// Profile data at one (x, R): values, x-derivatives and R-derivatives of
/// F₀ and F₁⁰.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProfilePoint {
    pub f0: [f64; 2],
    pub f0_x: [f64; 2],
    pub f0_r: [f64; 2],
    pub f1: [f64; 2],
    pub f1_x: [f64; 2],
    pub f1_r: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnsatzTable {
    pub r_knots: Vec<f64>,
    pub grid: ProfileGrid,
    pub with_f1: bool,
    /// Smallest fitted tail rate over the knots.
    pub decay_alpha: f64,
    /// Largest relative solvability defect of the F₁ solves.
    pub solvability: f64,
    // (node · CHANNELS + channel) · K + knot; channels f, s, f′, s′, f₁, s₁, f₁′, s₁′
    vals: Vec<f64>,
    moms: Vec<f64>,
}

impl AnsatzTable {
    /// Solves profiles (with continuation from the largest radius) and F₁⁰
    /// at `n_knots` uniform radii on [r_lo, r_hi].
    pub fn build<P: Potential + ?Sized>(pot: &P, r_lo: f64, r_hi: f64, n_knots: usize, grid: &ProfileGrid) -> Result<Self> {
        if !(r_lo > 0.0 && r_hi > r_lo) || n_knots < 4 {
            return domain("ansatz table needs 0 < r_lo < r_hi and at least four knots");
        }
        let knots: Vec<f64> = (0..n_knots)
            .map(|i| r_lo + (r_hi - r_lo) * i as f64 / (n_knots - 1) as f64)
            .collect();
        let mut sols: Vec<ProfileSolution> = Vec::with_capacity(n_knots);
        for &r in knots.iter().rev() {
            let sol = solve_profile(pot, r, grid, sols.last())?;
            sols.push(sol);
        }
        sols.reverse();
        let quenched = sols.iter().filter(|s| s.is_quenched()).count();
        if quenched != 0 && quenched != n_knots {
            return domain("ansatz table straddles the branch switch");
        }
        let mut columns = Vec::with_capacity(n_knots);
        let mut decay_alpha = f64::INFINITY;
        let mut solvability: f64 = 0.0;
        for sol in &sols {
            let c = solve_f1(pot, sol, 0.0)?;
            solvability = solvability.max(c.solvability);
            decay_alpha = decay_alpha.min(sol.decay_alpha);
            let h = grid.h();
            columns.push([
                sol.f.clone(),
                sol.s.clone(),
                sol.fp.clone(),
                sol.sp.clone(),
                derivative4(&c.f1, h),
                derivative4(&c.s1, h),
                c.f1,
                c.s1,
            ]);
        }
        let np = grid.n_points;
        let k = n_knots;
        let mut vals = vec![0.0; np * CHANNELS * k];
        let mut moms = vec![0.0; np * CHANNELS * k];
        // column order above is f, s, f′, s′, f₁′, s₁′, f₁, s₁; store as f, s, f′, s′, f₁, s₁, f₁′, s₁′
        let order = [0, 1, 2, 3, 6, 7, 4, 5];
        let mut col = vec![0.0; k];
        for node in 0..np {
            for (ch, &src) in order.iter().enumerate() {
                for (kk, c) in columns.iter().enumerate() {
                    col[kk] = c[src][node];
                }
                let base = (node * CHANNELS + ch) * k;
                vals[base..base + k].copy_from_slice(&col);
                moms[base..base + k].copy_from_slice(&spline_moments(&knots, &col));
            }
        }
        Ok(Self { r_knots: knots, grid: *grid, with_f1: true, decay_alpha, solvability, vals, moms })
    }

    /// The same table with the F₁ channels dropped.
    pub fn without_f1(&self) -> Self {
        Self { with_f1: false, ..self.clone() }
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r_knots[0], *self.r_knots.last().unwrap())
    }

    fn channel(&self, node: usize, ch: usize, j: usize, w: &[f64; 4]) -> f64 {
        let b = (node * CHANNELS + ch) * self.r_knots.len() + j;
        w[0] * self.vals[b] + w[1] * self.vals[b + 1] + w[2] * self.moms[b] + w[3] * self.moms[b + 1]
    }

    /// F₀, F₁⁰ and their x- and R-derivatives at (x, R).
    pub fn eval(&self, x: f64, r: f64) -> Result<ProfilePoint> {
        let (lo, hi) = self.r_range();
        if r < lo - 1e-9 || r > hi + 1e-9 {
            return domain(format!("R = {r} outside the ansatz table [{lo}, {hi}]"));
        }
        let l = self.grid.half_width;
        if x.abs() >= l {
            let mut p = ProfilePoint::default();
            p.f0[0] = x.signum();
            return Ok(p);
        }
        let h = self.grid.h();
        let pos = (x + l) / h;
        let node = (pos.floor() as usize).min(self.grid.n_points - 2);
        let u = pos - node as f64;
        let (j, w0) = spline_weights(&self.r_knots, r, 0);
        let (_, w1) = spline_weights(&self.r_knots, r, 1);
        let n_comp = if self.with_f1 { 2 } else { 1 };
        let mut p = ProfilePoint::default();
        for part in 0..n_comp {
            for comp in 0..2 {
                let (cv, cd) = (4 * part + comp, 4 * part + 2 + comp);
                let g = |w: &[f64; 4]| {
                    let y0 = self.channel(node, cv, j, w);
                    let y1 = self.channel(node + 1, cv, j, w);
                    let d0 = self.channel(node, cd, j, w);
                    let d1 = self.channel(node + 1, cd, j, w);
                    hermite(u, y0, y1, h * d0, h * d1)
                };
                let (v, dv) = g(&w0);
                let (vr, _) = g(&w1);
                if part == 0 {
                    p.f0[comp] = v;
                    p.f0_x[comp] = dv / h;
                    p.f0_r[comp] = vr;
                } else {
                    p.f1[comp] = v;
                    p.f1_x[comp] = dv / h;
                    p.f1_r[comp] = vr;
                }
            }
        }
        Ok(p)
    }
}

/// U and its normal-coordinate derivatives at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnsatzValue {
    pub u: [f64; 2],
    pub u_y0: [f64; 2],
    pub u_y1: [f64; 2],
    /// F₀ part alone and its y¹-derivative.
    pub f0: [f64; 2],
    pub f0_y1: [f64; 2],
    pub x: f64,
}

/// Evaluates the ansatz at (y⁰, y¹) for shift `a` and its rate `ap`.
pub fn ansatz_at(table: &AnsatzTable, k: &Kinematics, eps: f64, y1: f64, a: f64, ap: f64) -> Result<AnsatzValue> {
    let x = (y1 - a) / eps;
    let p = table.eval(x, k.r)?;
    let dm = k.m.powi(3) * k.rp * k.rpp;
    let mut out = AnsatzValue { x, ..Default::default() };
    for c in 0..2 {
        out.f0[c] = p.f0[c];
        out.f0_y1[c] = p.f0_x[c] / eps;
        out.u[c] = p.f0[c] + eps * k.m * p.f1[c];
        out.u_y1[c] = p.f0_x[c] / eps + k.m * p.f1_x[c];
        out.u_y0[c] = -ap / eps * p.f0_x[c]
            + k.rp * p.f0_r[c]
            + eps * (dm * p.f1[c] + k.m * p.f1_r[c] * k.rp)
            - ap * k.m * p.f1_x[c];
    }
    Ok(out)
}

/// (∂_t U, ∂_r U) from the normal-coordinate derivatives, using
/// ∂_{y⁰} = n(∂_t + R′∂_r) and ∂_{y¹} = m(R′∂_t + ∂_r).
pub fn to_cartesian(k: &Kinematics, n: f64, u_y0: f64, u_y1: f64) -> (f64, f64) {
    let a = u_y0 / n;
    let b = u_y1 / k.m;
    let ut = k.m * k.m * (a - k.rp * b);
    (ut, b - k.rp * ut)
}

/// U(t, r) and its Cartesian derivatives through the chart, for a shift
/// given as a function of y⁰ returning (a, a′).
pub fn ansatz_cartesian(
    table: &AnsatzTable,
    frame: &NormalFrame,
    eps: f64,
    t: f64,
    r: f64,
    shift: &dyn Fn(f64) -> (f64, f64),
) -> Result<([f64; 2], [f64; 2], [f64; 2])> {
    let (s, d) = frame.inverse(t, r)?;
    let k = frame.kinematics(s)?;
    let n = 1.0 + d * k.m.powi(3) * k.rpp;
    let (a, ap) = shift(s);
    let v = ansatz_at(table, &k, eps, d, a, ap)?;
    let mut ut = [0.0; 2];
    let mut ur = [0.0; 2];
    for c in 0..2 {
        let (x, y) = to_cartesian(&k, n, v.u_y0[c], v.u_y1[c]);
        ut[c] = x;
        ur[c] = y;
    }
    Ok((v.u, ut, ur))
}
