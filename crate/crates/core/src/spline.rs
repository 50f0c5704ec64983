//! Cubic splines on ascending knots with end slopes from one-sided cubic
//! fits, plus cubic Hermite helpers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

/// Second derivatives of the clamped cubic spline through (x, y), with end
/// slopes taken from the cubic through the four nearest knots.
pub fn spline_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    if n < 4 {
        // too few knots for end-slope fits: natural spline
        return natural_moments(x, y);
    }
    let s0 = lagrange_slope(&x[..4], &y[..4], x[0]);
    let s1 = lagrange_slope(&x[n - 4..], &y[n - 4..], x[n - 1]);
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut r = vec![0.0; n];
    let h0 = x[1] - x[0];
    b[0] = h0 / 3.0;
    c[0] = h0 / 6.0;
    r[0] = (y[1] - y[0]) / h0 - s0;
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        a[i] = hl / 6.0;
        b[i] = (hl + hr) / 3.0;
        c[i] = hr / 6.0;
        r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
    }
    let hn = x[n - 1] - x[n - 2];
    a[n - 1] = hn / 6.0;
    b[n - 1] = hn / 3.0;
    r[n - 1] = s1 - (y[n - 1] - y[n - 2]) / hn;
    thomas(&a, &b, &c, &r)
}

fn natural_moments(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut a = vec![0.0; n];
    let mut b = vec![1.0; n];
    let mut c = vec![0.0; n];
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        a[i] = hl / 6.0;
        b[i] = (hl + hr) / 3.0;
        c[i] = hr / 6.0;
        r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
    }
    thomas(&a, &b, &c, &r)
}

fn lagrange_slope(x: &[f64], y: &[f64], t: f64) -> f64 {
    let k = x.len();
    let mut s = 0.0;
    for i in 0..k {
        // derivative of the i-th Lagrange basis polynomial at t
        let mut denom = 1.0;
        for j in 0..k {
            if j != i {
                denom *= x[i] - x[j];
            }
        }
        let mut num = 0.0;
        for l in 0..k {
            if l == i {
                continue;
            }
            let mut p = 1.0;
            for j in 0..k {
                if j != i && j != l {
                    p *= t - x[j];
                }
            }
            num += p;
        }
        s += y[i] * num / denom;
    }
    s
}

/// Tridiagonal solve; `a` is the subdiagonal (a[0] unused), `c` the
/// superdiagonal (c[n−1] unused).
pub fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = r[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / den } else { 0.0 };
        dp[i] = (r[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Interval index and basis weights for evaluating a spline at `t`:
/// S(t) = w[0] y_j + w[1] y_{j+1} + w[2] M_j + w[3] M_{j+1}.
/// `order` selects the value (0), first (1) or second (2) derivative.
/// Outside the knot range the end cubic is extended.
pub fn spline_weights(x: &[f64], t: f64, order: u8) -> (usize, [f64; 4]) {
    let n = x.len();
    let j = match x.partition_point(|&k| k <= t) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = x[j + 1] - x[j];
    let a = (x[j + 1] - t) / h;
    let b = (t - x[j]) / h;
    let w = match order {
        0 => [a, b, (a * a * a - a) * h * h / 6.0, (b * b * b - b) * h * h / 6.0],
        1 => [-1.0 / h, 1.0 / h, -(3.0 * a * a - 1.0) * h / 6.0, (3.0 * b * b - 1.0) * h / 6.0],
        _ => [0.0, 0.0, a, b],
    };
    (j, w)
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.windows(2).all(|w| w[1] > w[0]), "spline knots must ascend");
        let m = spline_moments(&x, &y);
        Self { x, y, m }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn apply(&self, t: f64, order: u8) -> f64 {
        let (j, w) = spline_weights(&self.x, t, order);
        w[0] * self.y[j] + w[1] * self.y[j + 1] + w[2] * self.m[j] + w[3] * self.m[j + 1]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.apply(t, 0)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.apply(t, 1)
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        self.apply(t, 2)
    }
}

/// Cubic Hermite interpolation on [0, 1] from end values and end slopes
/// (slopes already scaled by the interval length). Returns value and
/// derivative with respect to the unit parameter.
#[inline]
pub fn hermite(u: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let v = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
    let dv = (6.0 * u2 - 6.0 * u) * (y0 - y1) + (3.0 * u2 - 4.0 * u + 1.0) * d0 + (3.0 * u2 - 2.0 * u) * d1;
    (v, dv)
}

/// Quintic Hermite interpolation on [0, 1] from end values, slopes and
/// second derivatives (scaled by h and h²). Returns value and derivative
/// with respect to the unit parameter.
#[inline]
pub fn quintic_hermite(u: f64, y: [f64; 2], d: [f64; 2], s: [f64; 2]) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    let h3 = 0.5 * u3 - u4 + 0.5 * u5;
    let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let g0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let g1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let g2 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
    let g3 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
    let g4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let v = y[0] * h0 + d[0] * h1 + s[0] * h2 + s[1] * h3 + d[1] * h4 + y[1] * (1.0 - h0);
    let dv = (y[0] - y[1]) * g0 + d[0] * g1 + s[0] * g2 + s[1] * g3 + d[1] * g4;
    (v, dv)
}

/// Weights of the Lagrange interpolant through nodes at offsets −2..=3,
/// and of its derivative, at offset `u` (unit spacing).
pub fn lagrange6(u: f64) -> ([f64; 6], [f64; 6]) {
    let mut w = [0.0; 6];
    let mut dw = [0.0; 6];
    for i in 0..6 {
        let xi = i as f64 - 2.0;
        let mut den = 1.0;
        let mut num = 1.0;
        let mut dnum = 0.0;
        for k in 0..6 {
            if k == i {
                continue;
            }
            let xk = k as f64 - 2.0;
            den *= xi - xk;
            dnum = dnum * (u - xk) + num;
            num *= u - xk;
        }
        w[i] = num / den;
        dw[i] = dnum / den;
    }
    (w, dw)
}
