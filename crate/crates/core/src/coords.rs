//! Minkowski normal coordinates (y⁰, y¹) about Γ = {(y⁰, R(y⁰))}:
//! (t, r) = (y⁰ + y¹mR′, R + y¹m) with m = (1 − R′²)^{−1/2}.
//!
//! R and R′ between trajectory samples are cubic Hermite interpolants; R″
//! and R‴ come from the ODE right-hand side. For trajectories starting at
//! rest the chart extends to negative y⁰ by time reflection.

use serde::{Deserialize, Serialize};

use crate::effective::{rhs_rpp, rhs_rppp, InterfaceTrajectory, ProfileTable};
use crate::error::{domain, Error, Result};
use crate::potential::fmt17;

/// R and its first three y⁰-derivatives at one time, with m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub r: f64,
    pub rp: f64,
    pub rpp: f64,
    pub rppp: f64,
    pub m: f64,
}

impl Kinematics {
    pub fn n(&self, y1: f64) -> f64 {
        1.0 + y1 * self.m.powi(3) * self.rpp
    }

    /// ∂_{y⁰}(m/n) using m′ = m³R′R″ and n′ = y¹m³(3m²R′R″² + R‴).
    pub fn d_m_over_n(&self, y1: f64) -> f64 {
        let m3 = self.m.powi(3);
        let n = self.n(y1);
        let dm = m3 * self.rp * self.rpp;
        let dn = y1 * m3 * (3.0 * self.m * self.m * self.rp * self.rpp * self.rpp + self.rppp);
        dm / n - self.m * dn / (n * n)
    }

    /// (B⁰, B¹) at height `y1`; assumes n > 0 and R + y¹m > 0.
    pub fn b_coeffs(&self, y1: f64) -> (f64, f64) {
        let m = self.m;
        let n = self.n(y1);
        let rr = self.r + y1 * m;
        let b0 = m / n * self.d_m_over_n(y1) + m * m * self.rp / (n * rr);
        let b1 = -m.powi(3) * self.rpp / n - m / rr;
        (b0, b1)
    }
}

#[derive(Debug, Clone)]
pub struct NormalFrame {
    pub traj: InterfaceTrajectory,
    pub table: ProfileTable,
    pub y1_max: f64,
    pub y0_max: f64,
    /// Half-width originally asked for; larger than `y1_max` when the strip
    /// had to shrink.
    pub y1_requested: f64,
    /// Smallest distance to a focal point (n = 0) seen along the trajectory.
    pub focal_distance: f64,
    reflect: bool,
    bracket_width: f64,
}

impl NormalFrame {
    /// Builds the chart with half-width min(`y1_max`, ½·focal distance,
    /// ¾·min R/m).
    pub fn new(traj: InterfaceTrajectory, table: ProfileTable, y1_max: f64) -> Result<Self> {
        if traj.len() < 2 {
            return domain("trajectory needs at least two samples");
        }
        if !(y1_max > 0.0) {
            return domain("strip half-width must be positive");
        }
        let mut curv: f64 = 0.0;
        let mut r_over_m = f64::INFINITY;
        let mut speed: f64 = 0.0;
        for i in 0..traj.len() {
            let m = 1.0 / (1.0 - traj.rp[i] * traj.rp[i]).sqrt();
            curv = curv.max((m * m * m * traj.rpp[i]).abs());
            r_over_m = r_over_m.min(traj.r[i] / m);
            speed = speed.max(m * traj.rp[i].abs());
        }
        let focal_distance = if curv > 0.0 { 1.0 / curv } else { f64::INFINITY };
        let half = y1_max.min(0.5 * focal_distance).min(0.75 * r_over_m);
        let reflect = traj.rp[0] == 0.0 && traj.times[0] == 0.0;
        let y0_max = traj.t_end();
        Ok(Self {
            traj,
            table,
            y1_max: half,
            y0_max,
            y1_requested: y1_max,
            focal_distance,
            reflect,
            bracket_width: 1.5 * half * speed + 1e-9,
        })
    }

    pub fn shrunk(&self) -> bool {
        self.y1_max < self.y1_requested
    }

    pub fn y0_min(&self) -> f64 {
        if self.reflect {
            -self.y0_max
        } else {
            self.traj.times[0]
        }
    }

    pub fn kinematics(&self, y0: f64) -> Result<Kinematics> {
        if y0 < self.y0_min() - 1e-12 || y0 > self.y0_max + 1e-12 {
            return domain(format!("y0 = {y0} outside the trajectory range"));
        }
        let sign = if y0 < 0.0 { -1.0 } else { 1.0 };
        let (r, rp) = self.traj.state_at(y0.abs());
        let rp = sign * rp;
        let rpp = rhs_rpp(&self.table, r, rp)?.rpp;
        let rppp = rhs_rppp(&self.table, r, rp)?;
        Ok(Kinematics { r, rp, rpp, rppp, m: 1.0 / (1.0 - rp * rp).sqrt() })
    }

    fn check_strip(&self, y0: f64, y1: f64) -> Result<Kinematics> {
        if y1.abs() > self.y1_max * (1.0 + 1e-12) {
            return domain(format!("|y1| = {} exceeds the strip half-width {}", y1.abs(), self.y1_max));
        }
        self.kinematics(y0)
    }

    pub fn forward(&self, y0: f64, y1: f64) -> Result<(f64, f64)> {
        let k = self.check_strip(y0, y1)?;
        Ok((y0 + y1 * k.m * k.rp, k.r + y1 * k.m))
    }

    /// (s_M, d_M) from the orthogonality equation −(t − s) + (r − R(s))R′(s) = 0,
    /// solved by Newton steps safeguarded with bisection.
    pub fn inverse(&self, t: f64, r: f64) -> Result<(f64, f64)> {
        let lo0 = (t - self.bracket_width).max(self.y0_min());
        let hi0 = (t + self.bracket_width).min(self.y0_max);
        if lo0 >= hi0 {
            return Err(Error::OutsideChart { t, r });
        }
        let g = |s: f64| -> Result<(f64, f64, Kinematics)> {
            let k = self.kinematics(s)?;
            let val = s - t + (r - k.r) * k.rp;
            let der = 1.0 - k.rp * k.rp + (r - k.r) * k.rpp;
            Ok((val, der, k))
        };
        let (glo, _, _) = g(lo0)?;
        let (ghi, _, _) = g(hi0)?;
        if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
            return Err(Error::OutsideChart { t, r });
        }
        let (mut lo, mut hi) = if glo < 0.0 { (lo0, hi0) } else { (hi0, lo0) };
        let mut s = t.clamp(lo0.min(hi0), lo0.max(hi0));
        for _ in 0..100 {
            let (val, der, _) = g(s)?;
            if val == 0.0 {
                break;
            }
            if val < 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let newton = s - val / der;
            let (a, b) = (lo.min(hi), lo.max(hi));
            let next = if der > 0.0 && newton > a && newton < b { newton } else { 0.5 * (lo + hi) };
            let step = (next - s).abs();
            s = next;
            if step <= 1e-13 * s.abs().max(1.0) {
                break;
            }
        }
        let k = self.kinematics(s)?;
        let d = (r - k.r) / k.m;
        if d.abs() > self.y1_max * (1.0 + 1e-9) {
            return Err(Error::OutsideChart { t, r });
        }
        if 1.0 + d * k.m * k.m * k.m * k.rpp <= 0.0 {
            return Err(Error::ChartOverlap { t, r });
        }
        Ok((s, d))
    }

    pub fn metric_factors(&self, y0: f64, y1: f64) -> Result<(f64, f64)> {
        let k = self.check_strip(y0, y1)?;
        let n = 1.0 + y1 * k.m.powi(3) * k.rpp;
        if n <= 0.0 {
            return Err(Error::FocalPoint { y0, y1, n });
        }
        Ok((k.m, n))
    }

    pub fn d_y0_m_over_n(&self, y0: f64, y1: f64) -> Result<f64> {
        Ok(self.check_strip(y0, y1)?.d_m_over_n(y1))
    }

    /// (B⁰, B¹) of the wave operator in normal coordinates.
    pub fn b_coeffs(&self, y0: f64, y1: f64) -> Result<(f64, f64)> {
        let k = self.check_strip(y0, y1)?;
        let rr = k.r + y1 * k.m;
        if rr <= 0.0 {
            return domain(format!("r = {rr} is not positive at (y0, y1) = ({y0}, {y1})"));
        }
        self.metric_factors(y0, y1)?;
        Ok(k.b_coeffs(y1))
    }

    /// Chart samples on an `n0 × n1` grid of the strip.
    pub fn chart(&self, n0: usize, n1: usize) -> Result<Vec<ChartPoint>> {
        let mut out = Vec::with_capacity(n0 * n1);
        for i in 0..n0 {
            let y0 = self.y0_max * i as f64 / (n0.max(2) - 1) as f64;
            for j in 0..n1 {
                let y1 = -self.y1_max + 2.0 * self.y1_max * j as f64 / (n1.max(2) - 1) as f64;
                let (t, r) = self.forward(y0, y1)?;
                let (m, n) = self.metric_factors(y0, y1)?;
                let (b0, b1) = self.b_coeffs(y0, y1)?;
                out.push(ChartPoint { y0, y1, t, r, m, n, b0, b1 });
            }
        }
        Ok(out)
    }

    pub fn chart_csv(&self, n0: usize, n1: usize) -> Result<String> {
        let mut out = String::from("y0,y1,t,r,m,n,B0,B1\n");
        for p in self.chart(n0, n1)? {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt17(p.y0),
                fmt17(p.y1),
                fmt17(p.t),
                fmt17(p.r),
                fmt17(p.m),
                fmt17(p.n),
                fmt17(p.b0),
                fmt17(p.b1)
            ));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub y0: f64,
    pub y1: f64,
    pub t: f64,
    pub r: f64,
    pub m: f64,
    pub n: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
}
