//! Uniform symmetric grid on [−L, L] with trapezoid quadrature and
//! fourth-order differentiation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub half_width: f64,
    pub n_points: usize,
}

impl ProfileGrid {
    pub const DEFAULT_POINTS: usize = 2049;

    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return domain(format!("half width must be positive, got {half_width}"));
        }
        if n_points < 5 || n_points % 2 == 0 {
            return domain(format!("n_points must be odd and at least 5, got {n_points}"));
        }
        Ok(Self { half_width, n_points })
    }

    /// L = ⌈12/√λ⌉ with λ the smallest vacuum Hessian eigenvalue of W at
    /// `r_max` (the slowest decay over radii up to `r_max`).
    pub fn default_for<P: Potential + ?Sized>(pot: &P, r_max: f64) -> Result<Self> {
        let gap = pot.vacuum_gap(r_max);
        if !(gap > 0.0) {
            return domain(format!("vacuum Hessian is not positive at R = {r_max} (λ = {gap})"));
        }
        Self::new((12.0 / gap.sqrt()).ceil(), Self::DEFAULT_POINTS)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn mid(&self) -> usize {
        self.n_points / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.mid() as f64) * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, n_points: 2 * self.n_points - 1 }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.h())
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        derivative4(values, self.h())
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Fourth-order first derivative: centered five-point stencil inside,
/// one-sided five-point stencils at the two nodes nearest each end.
pub fn derivative4(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    assert!(n >= 5, "derivative4 needs at least five samples");
    let mut d = vec![0.0; n];
    for i in 2..n - 2 {
        d[i] = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * u[0] + 48.0 * u[1] - 36.0 * u[2] + 16.0 * u[3] - 3.0 * u[4]) / (12.0 * h);
    d[1] = (-3.0 * u[0] - 10.0 * u[1] + 18.0 * u[2] - 6.0 * u[3] + u[4]) / (12.0 * h);
    let m = n - 1;
    d[m] = (25.0 * u[m] - 48.0 * u[m - 1] + 36.0 * u[m - 2] - 16.0 * u[m - 3] + 3.0 * u[m - 4]) / (12.0 * h);
    d[m - 1] = (3.0 * u[m] + 10.0 * u[m - 1] - 18.0 * u[m - 2] + 6.0 * u[m - 3] - u[m - 4]) / (12.0 * h);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = ProfileGrid::new(6.0, 101).unwrap();
        assert_eq!(g.x(g.mid()), 0.0);
        assert!((g.x(0) + 6.0).abs() < 1e-14);
        assert!((g.x(100) - 6.0).abs() < 1e-14);
        assert!(ProfileGrid::new(6.0, 100).is_err());
    }

    #[test]
    fn derivative_is_fourth_order() {
        let err = |n: usize| {
            let g = ProfileGrid::new(2.0, n).unwrap();
            let u: Vec<f64> = g.points().iter().map(|x| x.sin()).collect();
            let d = g.derivative(&u);
            g.points()
                .iter()
                .zip(&d)
                .map(|(x, v)| (x.cos() - v).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(161) / err(321)).log2();
        assert!(order > 3.8, "order {order}");
    }
}
