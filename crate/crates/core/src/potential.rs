//! The two-component potential V, the shifted potential
//! W(Φ, R) = V(Φ) + d²σ²/(2R²), and their derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldPoint {
    pub phi: f64,
    pub sigma: f64,
}

impl FieldPoint {
    pub const fn new(phi: f64, sigma: f64) -> Self {
        Self { phi, sigma }
    }
}

pub type Mat2 = [[f64; 2]; 2];

/// A potential in the admissible class together with the winding constant
/// `d` and the interface width `epsilon`.
///
/// Implementors provide V and its derivatives; the shifted potential and the
/// R-derivative of its gradient are derived from them. The unchecked methods
/// assume `r > 0` and exist for inner loops.
pub trait Potential: Send + Sync {
    fn v(&self, p: FieldPoint) -> f64;
    fn grad_v(&self, p: FieldPoint) -> [f64; 2];
    fn hess_v(&self, p: FieldPoint) -> Mat2;
    fn d(&self) -> f64;
    fn epsilon(&self) -> f64;
    /// Declared lower bound for the Hessian of V at the vacua (±1, 0).
    fn lambda_star(&self) -> f64;

    #[inline]
    fn w_value(&self, p: FieldPoint, r: f64) -> f64 {
        let d = self.d();
        self.v(p) + 0.5 * d * d / (r * r) * p.sigma * p.sigma
    }

    #[inline]
    fn w_grad(&self, p: FieldPoint, r: f64) -> [f64; 2] {
        let d = self.d();
        let g = self.grad_v(p);
        [g[0], g[1] + d * d / (r * r) * p.sigma]
    }

    #[inline]
    fn w_hess(&self, p: FieldPoint, r: f64) -> Mat2 {
        let d = self.d();
        let mut h = self.hess_v(p);
        h[1][1] += d * d / (r * r);
        h
    }

    #[inline]
    fn w_partial_r(&self, p: FieldPoint, r: f64) -> [f64; 2] {
        let d = self.d();
        [0.0, -2.0 * d * d / (r * r * r) * p.sigma]
    }

    /// Smallest Hessian eigenvalue of W over both vacua at radius `r`.
    fn vacuum_gap(&self, r: f64) -> f64 {
        [-1.0, 1.0]
            .iter()
            .map(|&s| min_eig(self.w_hess(FieldPoint::new(s, 0.0), r)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest Hessian eigenvalue of W over both vacua at radius `r`.
    fn vacuum_stiffness(&self, r: f64) -> f64 {
        [-1.0, 1.0]
            .iter()
            .map(|&s| max_eig(self.w_hess(FieldPoint::new(s, 0.0), r)))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn min_eig(h: Mat2) -> f64 {
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt()
}

pub fn max_eig(h: Mat2) -> f64 {
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt()
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        domain(format!("radius must be positive, got {r}"))
    }
}

pub fn eval_v<P: Potential + ?Sized>(pot: &P, p: FieldPoint) -> f64 {
    pot.v(p)
}

pub fn eval_w<P: Potential + ?Sized>(pot: &P, p: FieldPoint, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(pot.w_value(p, r))
}

pub fn grad_w<P: Potential + ?Sized>(pot: &P, p: FieldPoint, r: f64) -> Result<[f64; 2]> {
    check_r(r)?;
    Ok(pot.w_grad(p, r))
}

pub fn hess_w<P: Potential + ?Sized>(pot: &P, p: FieldPoint, r: f64) -> Result<Mat2> {
    check_r(r)?;
    Ok(pot.w_hess(p, r))
}

pub fn partial_r_w<P: Potential + ?Sized>(pot: &P, p: FieldPoint, r: f64) -> Result<[f64; 2]> {
    check_r(r)?;
    Ok(pot.w_partial_r(p, r))
}

/// The quartic reference family
/// V = λ_φ/4 (φ²−1)² + λ_σ/4 (σ²−2)σ² + β/2 φ²σ² + offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub lambda_phi: f64,
    pub lambda_sigma: f64,
    pub beta: f64,
    pub d: f64,
    pub epsilon: f64,
    /// Additive normalization making V(±1, 0) = 0. Zero for the quartic.
    #[serde(skip)]
    pub offset: f64,
}

impl PotentialSpec {
    pub fn new(lambda_phi: f64, lambda_sigma: f64, beta: f64, d: f64, epsilon: f64) -> Result<Self> {
        let spec = Self { lambda_phi, lambda_sigma, beta, d, epsilon, offset: 0.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("lambda_phi", self.lambda_phi),
            ("lambda_sigma", self.lambda_sigma),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ];
        for (name, x) in named {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {x}")));
            }
        }
        if !self.d.is_finite() {
            return Err(Error::Config(format!("d must be finite, got {}", self.d)));
        }
        Ok(())
    }

    /// Copy with a different winding constant.
    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// λ_σ < β < λ_φ.
    pub fn in_paper_regime(&self) -> bool {
        self.lambda_sigma < self.beta && self.beta < self.lambda_phi
    }

    /// √(λ_φ/2), the inverse width of the scalar kink tanh(Bx).
    pub fn kink_rate(&self) -> f64 {
        (0.5 * self.lambda_phi).sqrt()
    }

    /// Config block with keys lambda_phi, lambda_sigma, beta, d, epsilon,
    /// written at 17 significant digits.
    pub fn to_config_block(&self) -> String {
        format!(
            "lambda_phi = {}\nlambda_sigma = {}\nbeta = {}\nd = {}\nepsilon = {}\n",
            fmt17(self.lambda_phi),
            fmt17(self.lambda_sigma),
            fmt17(self.beta),
            fmt17(self.d),
            fmt17(self.epsilon)
        )
    }

    pub fn from_config_block(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// 17-significant-digit decimal rendering, exact under round-trip.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

impl Potential for PotentialSpec {
    #[inline]
    fn v(&self, p: FieldPoint) -> f64 {
        let (f2, s2) = (p.phi * p.phi, p.sigma * p.sigma);
        0.25 * self.lambda_phi * (f2 - 1.0) * (f2 - 1.0)
            + 0.25 * self.lambda_sigma * (s2 - 2.0) * s2
            + 0.5 * self.beta * f2 * s2
            + self.offset
    }

    #[inline]
    fn grad_v(&self, p: FieldPoint) -> [f64; 2] {
        let (f2, s2) = (p.phi * p.phi, p.sigma * p.sigma);
        [
            self.lambda_phi * (f2 - 1.0) * p.phi + self.beta * s2 * p.phi,
            self.lambda_sigma * (s2 - 1.0) * p.sigma + self.beta * f2 * p.sigma,
        ]
    }

    #[inline]
    fn hess_v(&self, p: FieldPoint) -> Mat2 {
        let (f2, s2) = (p.phi * p.phi, p.sigma * p.sigma);
        let off = 2.0 * self.beta * p.phi * p.sigma;
        [
            [self.lambda_phi * (3.0 * f2 - 1.0) + self.beta * s2, off],
            [off, self.lambda_sigma * (3.0 * s2 - 1.0) + self.beta * f2],
        ]
    }

    fn d(&self) -> f64 {
        self.d
    }

    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn lambda_star(&self) -> f64 {
        (2.0 * self.lambda_phi).min(self.beta - self.lambda_sigma)
    }
}

type ScalarFn = Box<dyn Fn(FieldPoint) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(FieldPoint) -> [f64; 2] + Send + Sync>;
type HessFn = Box<dyn Fn(FieldPoint) -> Mat2 + Send + Sync>;

/// A user-supplied potential given by callables. `normalized` shifts V so
/// that V(1, 0) = 0.
pub struct CustomPotential {
    v: ScalarFn,
    grad: GradFn,
    hess: HessFn,
    pub d: f64,
    pub epsilon: f64,
    pub lambda_star: f64,
    pub offset: f64,
}

impl CustomPotential {
    pub fn new(v: ScalarFn, grad: GradFn, hess: HessFn, d: f64, epsilon: f64, lambda_star: f64) -> Self {
        Self { v, grad, hess, d, epsilon, lambda_star, offset: 0.0 }
    }

    pub fn normalized(mut self) -> Self {
        self.offset = 0.0;
        self.offset = -(self.v)(FieldPoint::new(1.0, 0.0));
        self
    }
}

impl std::fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomPotential")
            .field("d", &self.d)
            .field("epsilon", &self.epsilon)
            .field("lambda_star", &self.lambda_star)
            .field("offset", &self.offset)
            .finish()
    }
}

impl Potential for CustomPotential {
    fn v(&self, p: FieldPoint) -> f64 {
        (self.v)(p) + self.offset
    }
    fn grad_v(&self, p: FieldPoint) -> [f64; 2] {
        (self.grad)(p)
    }
    fn hess_v(&self, p: FieldPoint) -> Mat2 {
        (self.hess)(p)
    }
    fn d(&self) -> f64 {
        self.d
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn lambda_star(&self) -> f64 {
        self.lambda_star
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// V(φ, σ) = V(|φ|, |σ|) on the sample grid.
    pub symmetry: bool,
    /// V ≥ 0 with zeros only at (±1, 0) on the sample grid.
    pub positivity: bool,
    /// Hess V(±1, 0) ≥ λ_* I with λ_* > 0.
    pub hessian_growth: bool,
    pub lambda_star: f64,
    /// Smallest Hessian eigenvalue of V measured at the vacua.
    pub measured_vacuum_gap: f64,
    pub in_paper_regime: Option<bool>,
    pub min_sampled_v: f64,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.symmetry && self.positivity && self.hessian_growth
    }
}

/// Sampled check of symmetry, positivity and vacuum Hessian growth on
/// [−2, 2]² with spacing 0.01.
pub fn check_assumptions<P: Potential + ?Sized>(pot: &P) -> AssumptionReport {
    let n = 400;
    let step = 4.0 / n as f64;
    let mut symmetry = true;
    let mut positivity = true;
    let mut min_v = f64::INFINITY;
    for i in 0..=n {
        let phi = -2.0 + step * i as f64;
        for j in 0..=n {
            let sigma = -2.0 + step * j as f64;
            let p = FieldPoint::new(phi, sigma);
            let v = pot.v(p);
            let vr = pot.v(FieldPoint::new(phi.abs(), sigma.abs()));
            if (v - vr).abs() > 1e-12 * (1.0 + v.abs()) {
                symmetry = false;
            }
            min_v = min_v.min(v);
            let near_vacuum = ((phi.abs() - 1.0).powi(2) + sigma * sigma).sqrt() < 0.5 * step;
            if v < -1e-14 || (!near_vacuum && v <= 0.0) {
                positivity = false;
            }
        }
    }
    for s in [-1.0, 1.0] {
        if pot.v(FieldPoint::new(s, 0.0)).abs() > 1e-14 {
            positivity = false;
        }
    }
    let measured = [-1.0, 1.0]
        .iter()
        .map(|&s| min_eig(pot.hess_v(FieldPoint::new(s, 0.0))))
        .fold(f64::INFINITY, f64::min);
    let lambda_star = pot.lambda_star();
    let hessian_growth = lambda_star > 0.0 && measured >= lambda_star * (1.0 - 1e-12);
    AssumptionReport {
        symmetry,
        positivity,
        hessian_growth,
        lambda_star,
        measured_vacuum_gap: measured,
        in_paper_regime: None,
        min_sampled_v: min_v,
    }
}

/// [`check_assumptions`] plus the λ_σ < β < λ_φ regime flag for the quartic.
pub fn check_quartic(spec: &PotentialSpec) -> AssumptionReport {
    let mut report = check_assumptions(spec);
    report.in_paper_regime = Some(spec.in_paper_regime());
    report
}
