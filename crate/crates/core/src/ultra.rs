//! One-dimensional tempered ultradistributions.
//!
//! An ultradistribution is represented by a function `F(z)` analytic off a
//! horizontal strip and acts on an entire test function `φ` through
//!
//! ```text
//! F[φ] = ∮_Γ F(z) φ(z) dz
//! ```
//!
//! where `Γ` is the line `Im z = +ζ` run left to right followed by the line
//! `Im z = -ζ` run right to left. Adding a polynomial to `F` does not change
//! the functional.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qcore::QParam;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UltraError {
    #[error("invalid contour: {0}")]
    Config(String),
    #[error("integrand magnitude {tail:e} at the truncation points exceeds {tol:e}; try truncation >= {suggested}")]
    Truncation { tail: f64, tol: f64, suggested: f64 },
    #[error("non-finite integrand at z = {0}")]
    NonFinite(Complex64),
    #[error("invalid density grid: {0}")]
    Grid(String),
}

type Result<T> = std::result::Result<T, UltraError>;

/// The two-line contour `Im z = ±ζ`, truncated to `|Re z| <= T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub zeta: f64,
    pub truncation: f64,
    pub points_per_line: usize,
    /// Largest acceptable `|F φ|` at the truncation points.
    pub tail_tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec {
            zeta: 1.0,
            truncation: 40.0,
            points_per_line: 4096,
            tail_tol: 1e-12,
        }
    }
}

impl ContourSpec {
    pub fn with_zeta(self, zeta: f64) -> Self {
        ContourSpec { zeta, ..self }
    }

    pub fn with_truncation(self, truncation: f64) -> Self {
        ContourSpec { truncation, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(UltraError::Config(format!("zeta must be positive (got {})", self.zeta)));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(UltraError::Config(format!("truncation must be positive (got {})", self.truncation)));
        }
        if self.points_per_line < 16 {
            return Err(UltraError::Config("points_per_line must be at least 16".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(UltraError::Config("tail_tol must be positive".into()));
        }
        Ok(())
    }
}

type ComplexFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// An analytic representative `F(z)` with its polynomial growth order.
#[derive(Clone)]
pub struct AnalyticRep {
    eval: Arc<ComplexFn>,
    pub growth_order: u32,
}

impl fmt::Debug for AnalyticRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticRep").field("growth_order", &self.growth_order).finish_non_exhaustive()
    }
}

impl AnalyticRep {
    pub fn new<F>(f: F, growth_order: u32) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        AnalyticRep {
            eval: Arc::new(f),
            growth_order,
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    /// `F + P` for the polynomial with coefficients `coeffs` (constant term first).
    pub fn plus_polynomial(&self, coeffs: Vec<f64>) -> AnalyticRep {
        let inner = Arc::clone(&self.eval);
        let degree = coeffs.len().saturating_sub(1) as u32;
        AnalyticRep {
            eval: Arc::new(move |z| inner(z) + horner(&coeffs, z)),
            growth_order: self.growth_order.max(degree),
        }
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Result of the sampled `|F(z)| <= C |z|^p` check.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub c_estimate: f64,
    pub warning: Option<String>,
}

/// Contour functional value with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourEstimate {
    pub value: Complex64,
    pub err: f64,
    pub growth: GrowthReport,
}

const GROWTH_SAMPLES: usize = 64;

/// Sample `|F(z)| / max(1, |z|)^p` along both lines.
pub fn growth_check(f: &AnalyticRep, gamma: &ContourSpec) -> GrowthReport {
    let p = f.growth_order as i32;
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for line in [gamma.zeta, -gamma.zeta] {
        for j in 0..GROWTH_SAMPLES {
            let x = gamma.truncation * (2.0 * j as f64 / (GROWTH_SAMPLES - 1) as f64 - 1.0);
            let z = Complex64::new(x, line);
            let r = f.eval(z).norm() / z.norm().max(1.0).powi(p);
            if x.abs() <= 0.5 * gamma.truncation {
                inner = inner.max(r);
            } else {
                outer = outer.max(r);
            }
        }
    }
    let c_estimate = inner.max(outer);
    let warning = if !c_estimate.is_finite() {
        Some("F is not finite on the contour".to_string())
    } else if outer > 4.0 * inner + 1e-300 {
        Some(format!(
            "|F(z)|/|z|^{p} grows toward the contour ends ({outer:e} vs {inner:e}); growth order may be too small"
        ))
    } else {
        None
    };
    GrowthReport { c_estimate, warning }
}

/// Graded nodes `x = T sinh(αu)/sinh(α)` with trapezoid weights in `u`.
fn graded_line(t: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    const ALPHA: f64 = 3.0;
    let h = 2.0 / (n - 1) as f64;
    let sa = ALPHA.sinh();
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for j in 0..n {
        let u = -1.0 + j as f64 * h;
        xs.push(t * (ALPHA * u).sinh() / sa);
        let end = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        ws.push(end * h * t * ALPHA * (ALPHA * u).cosh() / sa);
    }
    (xs, ws)
}

/// `∫_{-T}^{T} g(x + i y) dx` at full and half resolution.
fn line_integral(g: &(dyn Fn(Complex64) -> Complex64 + Sync), y: f64, t: f64, n: usize) -> Result<(Complex64, Complex64)> {
    let n = if n.is_multiple_of(2) { n + 1 } else { n };
    let (xs, ws) = graded_line(t, n);
    let mut full = Complex64::new(0.0, 0.0);
    let mut half = Complex64::new(0.0, 0.0);
    for (j, (&x, &w)) in xs.iter().zip(&ws).enumerate() {
        let z = Complex64::new(x, y);
        let v = g(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(UltraError::NonFinite(z));
        }
        full += v * w;
        if j % 2 == 0 {
            // every other node with doubled step
            half += v * (2.0 * w);
        }
    }
    Ok((full, half))
}

/// `∮_Γ F(z) φ(z) dz` over the clockwise two-line contour.
pub fn contour_apply(
    f: &AnalyticRep,
    phi: &(dyn Fn(Complex64) -> Complex64 + Sync),
    gamma: &ContourSpec,
) -> Result<ContourEstimate> {
    gamma.validate()?;
    let t = gamma.truncation;
    let g = |z: Complex64| f.eval(z) * phi(z);
    let tail = [
        Complex64::new(-t, gamma.zeta),
        Complex64::new(t, gamma.zeta),
        Complex64::new(-t, -gamma.zeta),
        Complex64::new(t, -gamma.zeta),
    ]
    .iter()
    .map(|&z| g(z).norm())
    .fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) });
    if tail > gamma.tail_tol {
        return Err(UltraError::Truncation {
            tail,
            tol: gamma.tail_tol,
            suggested: suggest_truncation(&g, gamma),
        });
    }
    let n = gamma.points_per_line;
    let (upper, lower) = rayon::join(
        || line_integral(&g, gamma.zeta, t, n),
        || line_integral(&g, -gamma.zeta, t, n),
    );
    let (up_full, up_half) = upper?;
    let (lo_full, lo_half) = lower?;
    let value = up_full - lo_full;
    let coarse = up_half - lo_half;
    let err = (value - coarse).norm() + 2.0 * t * tail + 4.0 * f64::EPSILON * (up_full.norm() + lo_full.norm());
    Ok(ContourEstimate {
        value,
        err,
        growth: growth_check(f, gamma),
    })
}

fn suggest_truncation(g: &dyn Fn(Complex64) -> Complex64, gamma: &ContourSpec) -> f64 {
    let mut t = gamma.truncation;
    for _ in 0..40 {
        t *= 1.5;
        let worst = [t, -t]
            .iter()
            .flat_map(|&x| [Complex64::new(x, gamma.zeta), Complex64::new(x, -gamma.zeta)])
            .map(|z| g(z).norm())
            .fold(0.0f64, f64::max);
        if worst <= gamma.tail_tol {
            break;
        }
    }
    t
}

/// Gaussian test function `exp(-z²)`.
pub fn gaussian_test_fn(z: Complex64) -> Complex64 {
    (-z * z).exp()
}

/// Analytic representative `i/((2-q) z)` of the transform of `f ≡ 1`.
pub fn constant_rep(q: QParam) -> AnalyticRep {
    let scale = 1.0 / (2.0 - q.value());
    AnalyticRep::new(move |z| Complex64::i() / z * scale, 0)
}

/// Weight of `δ(k)` measured by applying `i/((2-q)z)` to `exp(-z²)`.
pub fn measure_delta_weight(q: QParam, gamma: &ContourSpec) -> Result<ContourEstimate> {
    contour_apply(&constant_rep(q), &gaussian_test_fn, gamma)
}

/// Cauchy-integral representative `(1/2πi) ∫ f(t)/(t - z) dt` of a sampled density.
#[derive(Debug, Clone)]
pub struct DiracRep {
    nodes: Arc<Vec<f64>>,
    weights: Arc<Vec<f64>>,
    coarse: Arc<Vec<f64>>,
}

/// Value of a [`DiracRep`] with near-axis diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracValue {
    pub value: Complex64,
    pub err: f64,
    pub near_singular: bool,
}

impl DiracRep {
    /// Evaluate at `z`; within one grid spacing of the real axis the result
    /// is flagged and its error estimated from a half-resolution sum.
    pub fn eval_checked(&self, z: Complex64) -> DiracValue {
        let value = self.sum(&self.weights, z);
        let spacing = self.local_spacing(z.re);
        let near_singular = z.im.abs() < spacing;
        let err = if near_singular {
            (value - self.sum(&self.coarse, z)).norm()
        } else {
            0.0
        };
        DiracValue { value, err, near_singular }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.sum(&self.weights, z)
    }

    fn sum(&self, weights: &[f64], z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&t, &w) in self.nodes.iter().zip(weights) {
            if w != 0.0 {
                acc += w / (Complex64::new(t, 0.0) - z);
            }
        }
        acc / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
    }

    fn local_spacing(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&t| t < x).clamp(1, n - 1);
        self.nodes[i] - self.nodes[i - 1]
    }

    pub fn as_analytic(&self) -> AnalyticRep {
        let rep = self.clone();
        AnalyticRep::new(move |z| rep.eval(z), 0)
    }
}

/// Dirac-formula representative of `f` sampled on `t_grid` (trapezoid rule).
pub fn dirac_rep(f_density: &dyn Fn(f64) -> f64, t_grid: &[f64]) -> Result<DiracRep> {
    let n = t_grid.len();
    if n < 3 {
        return Err(UltraError::Grid("need at least three nodes".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(UltraError::Grid("nodes must be finite and strictly increasing".into()));
    }
    let vals: Vec<f64> = t_grid.iter().map(|&t| f_density(t)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(UltraError::Grid(format!("density is not finite at t = {}", t_grid[i])));
    }
    let trap = |idx: &[usize]| -> Vec<f64> {
        let mut w = vec![0.0; n];
        for pair in idx.windows(2) {
            let h = t_grid[pair[1]] - t_grid[pair[0]];
            w[pair[0]] += 0.5 * h * vals[pair[0]];
            w[pair[1]] += 0.5 * h * vals[pair[1]];
        }
        w
    };
    let all: Vec<usize> = (0..n).collect();
    let mut even: Vec<usize> = (0..n).step_by(2).collect();
    if *even.last().unwrap() != n - 1 {
        even.push(n - 1);
    }
    Ok(DiracRep {
        nodes: Arc::new(t_grid.to_vec()),
        weights: Arc::new(trap(&all)),
        coarse: Arc::new(trap(&even)),
    })
}

/// `|F[φ] - (F + P)[φ]|` for a random polynomial `P` of the given degree
/// with coefficients in `[-1, 1]`.
pub fn pseudo_poly_invariance_check(
    f: &AnalyticRep,
    degree: usize,
    phi: &(dyn Fn(Complex64) -> Complex64 + Sync),
    gamma: &ContourSpec,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let shifted = f.plus_polynomial(coeffs);
    let base = contour_apply(f, phi, gamma)?;
    let moved = contour_apply(&shifted, phi, gamma)?;
    Ok((moved.value - base.value).norm())
}
