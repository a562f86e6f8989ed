//! Inversion through the `q -> 1` slice.
//!
//! At fixed `q > 1` the transform is not one-to-one. Integrating `F(k, q)`
//! against `δ(q - 1 - ε)` and letting `ε -> 0` recovers the classical Fourier
//! transform, which is then inverted by the usual integral
//! `f(x) = (1/2π) ∫ G(k) e^{-ikx} dk`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::qcore::QParam;
use crate::quad::{integrate, QuadratureConfig};
use crate::transform::{qft_real, FunctionSpec, Tail, TransformError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InversionError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("function has no classical Fourier transform to invert: {0}")]
    Domain(String),
    #[error("slice does not settle as eps -> 0 at k = {k}: increments {increments:?}")]
    LimitFailure { k: f64, increments: Vec<f64> },
    #[error("k spacing {dk} is too coarse for |x| up to {x_max} (need dk * x_max <= π)")]
    Aliasing { dk: f64, x_max: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

type Result<T> = std::result::Result<T, InversionError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    None,
    Richardson,
}

/// Decreasing `ε` values at which `F(k, 1 + ε)` is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
    pub extrapolation: Extrapolation,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            eps: vec![1e-2, 1e-3, 1e-4],
            extrapolation: Extrapolation::Richardson,
        }
    }
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>, extrapolation: Extrapolation) -> Result<Self> {
        if eps.is_empty() {
            return Err(InversionError::Schedule("need at least one eps".into()));
        }
        if eps.iter().any(|&e| !(e > 0.0 && e < 0.5)) {
            return Err(InversionError::Schedule(format!("eps values must lie in (0, 0.5): {eps:?}")));
        }
        if eps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(InversionError::Schedule(format!("eps values must be strictly decreasing: {eps:?}")));
        }
        Ok(EpsilonSchedule { eps, extrapolation })
    }

    /// Schedule suited to `f`: functions with jumps need a much smaller `ε`
    /// because the q-kernel damps like `exp(-ε k² x² / 2)` and their spectra
    /// must be followed to large `|k|`.
    pub fn for_function(f: &FunctionSpec) -> Self {
        if f.jumps().is_empty() {
            EpsilonSchedule::default()
        } else {
            EpsilonSchedule {
                eps: vec![1e-6, 1e-7, 1e-8],
                extrapolation: Extrapolation::Richardson,
            }
        }
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    fn combine(&self, vals: &[Complex64]) -> Complex64 {
        let n = vals.len();
        match self.extrapolation {
            Extrapolation::Richardson if n >= 2 => {
                // first order in ε: F(ε) ≈ F(0) + c ε
                let (e1, e2) = (self.eps[n - 2], self.eps[n - 1]);
                vals[n - 1] + (vals[n - 1] - vals[n - 2]) * (e2 / (e1 - e2))
            }
            _ => vals[n - 1],
        }
    }
}

/// `F(k, 1 + ε)` along a schedule and its `ε -> 0` estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Q1Slice {
    pub k_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `per_eps[j][i]` is `F(k_i, 1 + ε_j)`.
    pub per_eps: Vec<Vec<Complex64>>,
    pub err: Vec<f64>,
}

fn check_invertible(f: &FunctionSpec) -> Result<()> {
    f.validate()?;
    if matches!(f.tail(QParam::CLASSICAL, false), Tail::Divergent) {
        return Err(InversionError::Domain(format!("{f:?} is not integrable")));
    }
    Ok(())
}

fn slice_at(f: &FunctionSpec, k: f64, sched: &EpsilonSchedule, cfg: &QuadratureConfig) -> Result<(Vec<Complex64>, f64)> {
    let mut vals = Vec::with_capacity(sched.eps.len());
    let mut errs = 0.0;
    for &e in &sched.eps {
        let q = QParam::new(1.0 + e).map_err(TransformError::from)?;
        let r = qft_real(f, q, k, cfg)?;
        vals.push(r.value);
        errs += r.err;
    }
    let increments: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    if increments.len() >= 2 {
        let noise = 10.0 * errs + 1e-12 * vals[0].norm().max(1e-300);
        if increments[increments.len() - 1] > increments[0] + noise {
            return Err(InversionError::LimitFailure { k, increments });
        }
    }
    Ok((vals, errs))
}

/// Evaluate the q-integral against `δ(q - 1 - ε)` (point evaluation at
/// `q = 1 + ε`) along the schedule, then extrapolate to `ε = 0`.
pub fn q1_slice(f: &FunctionSpec, k_grid: &[f64], sched: &EpsilonSchedule, cfg: &QuadratureConfig) -> Result<Q1Slice> {
    check_invertible(f)?;
    cfg.validate().map_err(TransformError::from)?;
    let cells: Vec<(Vec<Complex64>, f64)> = k_grid
        .par_iter()
        .map(|&k| slice_at(f, k, sched, cfg))
        .collect::<Result<_>>()?;
    let mut per_eps = vec![Vec::with_capacity(k_grid.len()); sched.eps.len()];
    let mut values = Vec::with_capacity(k_grid.len());
    let mut err = Vec::with_capacity(k_grid.len());
    for (vals, e) in cells {
        for (j, v) in vals.iter().enumerate() {
            per_eps[j].push(*v);
        }
        values.push(sched.combine(&vals));
        err.push(e);
    }
    Ok(Q1Slice {
        k_grid: k_grid.to_vec(),
        values,
        per_eps,
        err,
    })
}

/// `∫ F(k, q) ρ(q - 1 - ε) dq` with a smooth bump `ρ` of half-width `width`.
pub fn mollified_slice(f: &FunctionSpec, k: f64, eps: f64, width: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    check_invertible(f)?;
    if !(width > 0.0 && width < eps) {
        return Err(InversionError::Schedule("mollifier width must lie in (0, eps)".into()));
    }
    let bump = |u: f64| if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 };
    let norm_cfg = QuadratureConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-16,
        ..QuadratureConfig::default()
    };
    let norm = integrate(|u| Complex64::new(bump(u), 0.0), -1.0, 1.0, &[], &norm_cfg)
        .map_err(TransformError::from)?
        .value
        .re;
    let center = 1.0 + eps;
    let failure = std::cell::RefCell::new(None);
    let inner = |qv: f64| -> Complex64 {
        match QParam::new(qv).map_err(TransformError::from).and_then(|q| qft_real(f, q, k, cfg)) {
            Ok(v) => v.value * (bump((qv - center) / width) / (norm * width)),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let outer = QuadratureConfig {
        rel_tol: 1e-10,
        ..*cfg
    };
    let r = integrate(inner, center - width, center + width, &[], &outer).map_err(TransformError::from)?;
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(r.value)
}

/// Result of the inverse Fourier integral.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseFt {
    pub values: Vec<f64>,
    /// `max |Im f| / max |Re f|`; near zero for a consistent real input.
    pub imag_residue: f64,
    pub warning: Option<String>,
}

/// Residue above which the reconstructed function is flagged as not real.
pub const IMAG_RESIDUE_TOL: f64 = 1e-6;

/// `(1/2π) ∫ G(k) e^{-ikx} dk` by the trapezoid rule on the sampled grid.
pub fn inverse_ft(g: &[Complex64], k_grid: &[f64], x_grid: &[f64]) -> Result<InverseFt> {
    let n = k_grid.len();
    if g.len() != n || n < 2 {
        return Err(InversionError::Grid("G and k_grid must have equal length >= 2".into()));
    }
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(InversionError::Grid("k_grid must be strictly increasing".into()));
    }
    let kmax = k_grid[n - 1].abs().max(k_grid[0].abs());
    if (0..n).any(|i| (k_grid[i] + k_grid[n - 1 - i]).abs() > 1e-9 * kmax.max(1.0)) {
        return Err(InversionError::Grid("k_grid must be symmetric about 0".into()));
    }
    let dk = k_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let x_max = x_grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if dk * x_max > PI * (1.0 + 1e-12) {
        return Err(InversionError::Aliasing { dk, x_max });
    }
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { k_grid[i] - k_grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { k_grid[i + 1] - k_grid[i] } else { 0.0 };
            0.5 * (left + right) / (2.0 * PI)
        })
        .collect();
    let complex: Vec<Complex64> = x_grid
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&k, &gk), &w) in k_grid.iter().zip(g).zip(&weights) {
                acc += gk * Complex64::new(0.0, -k * x).exp() * w;
            }
            acc
        })
        .collect();
    let re_max = complex.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let im_max = complex.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    let imag_residue = if im_max == 0.0 { 0.0 } else { im_max / re_max.max(f64::MIN_POSITIVE) };
    let warning = (imag_residue > IMAG_RESIDUE_TOL)
        .then(|| format!("imaginary residue {imag_residue:e} suggests G is not the transform of a real function"));
    Ok(InverseFt {
        values: complex.iter().map(|v| v.re).collect(),
        imag_residue,
        warning,
    })
}

/// Spectral window applied to the slice before inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Lanczos for functions with jumps, none otherwise.
    Auto,
    None,
    /// `sinc(k / k_max)` factors; the Gibbs tail then falls off like `1/(K d)²`.
    Lanczos,
}

/// Grids for a round trip. `None` fields are derived from the function.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripConfig {
    pub quad: QuadratureConfig,
    pub k_max: Option<f64>,
    pub x_grid: Option<Vec<f64>>,
    /// Half-width of the windows around jumps excluded from the residual.
    pub jump_window: f64,
    pub window: Window,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        RoundtripConfig {
            quad: QuadratureConfig {
                abs_tol: 1e-10,
                ..QuadratureConfig::default()
            },
            k_max: None,
            x_grid: None,
            jump_window: 0.05,
            window: Window::Auto,
        }
    }
}

/// Slice values and their classical counterpart at one probe wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceProbe {
    pub k: f64,
    pub per_eps: Vec<Complex64>,
    pub extrapolated: Complex64,
    pub classical: Complex64,
    /// `|F(k, 1+ε) - F_classical(k)|` along the schedule.
    pub errors: Vec<f64>,
    /// Whether `errors` is non-increasing (up to quadrature noise).
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    pub x_grid: Vec<f64>,
    pub f_rec: Vec<f64>,
    /// `max |f_rec - f|` outside the jump windows.
    pub residual: f64,
    pub imag_residue: f64,
    pub k_max: f64,
    pub nk: usize,
    pub lanczos: bool,
    pub slice_diagnostics: Vec<SliceProbe>,
    pub warnings: Vec<String>,
}

/// Wavenumbers at which slice diagnostics are recorded.
pub const PROBE_KS: [f64; 3] = [0.5, 1.0, 2.0];

fn default_x_grid(f: &FunctionSpec) -> Vec<f64> {
    let (lo, hi) = match (f.support(), f) {
        ((Some(lo), Some(hi)), _) => {
            let pad = 0.5 * (hi - lo).max(1e-3);
            (lo - pad, hi + pad)
        }
        (_, FunctionSpec::Gaussian { sigma }) => (-6.0 * sigma, 6.0 * sigma),
        (_, FunctionSpec::QGaussian { beta, .. }) => (-8.0 / beta.sqrt(), 8.0 / beta.sqrt()),
        _ => (-6.0, 6.0),
    };
    let n = 241;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn default_k_max(f: &FunctionSpec) -> f64 {
    match *f {
        FunctionSpec::Gaussian { sigma } => 12.0 / sigma,
        FunctionSpec::QGaussian { q, beta } if q <= 1.0 => 12.0 * beta.sqrt(),
        _ if !f.jumps().is_empty() => 600.0,
        _ => 200.0,
    }
}

/// Compare the slice along the schedule with the classical transform at `k`.
pub fn slice_probe(f: &FunctionSpec, k: f64, sched: &EpsilonSchedule, cfg: &QuadratureConfig) -> Result<SliceProbe> {
    check_invertible(f)?;
    let (per_eps, err) = slice_at(f, k, sched, cfg)?;
    let classical = qft_real(f, QParam::CLASSICAL, k, cfg)?;
    let errors: Vec<f64> = per_eps.iter().map(|v| (v - classical.value).norm()).collect();
    let noise = 10.0 * (err + classical.err);
    let monotone = errors.windows(2).all(|w| w[1] <= w[0] + noise);
    Ok(SliceProbe {
        k,
        extrapolated: sched.combine(&per_eps),
        per_eps,
        classical: classical.value,
        errors,
        monotone,
    })
}

/// Forward transform on the `(k, 1 + ε)` lattice, slice, inverse, and
/// compare with `f`.
pub fn roundtrip(f: &FunctionSpec, sched: &EpsilonSchedule, cfg: &RoundtripConfig) -> Result<InversionResult> {
    check_invertible(f)?;
    let x_grid = cfg.x_grid.clone().unwrap_or_else(|| default_x_grid(f));
    if x_grid.is_empty() {
        return Err(InversionError::Grid("x_grid is empty".into()));
    }
    let k_max = cfg.k_max.unwrap_or_else(|| default_k_max(f));
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(InversionError::Grid(format!("k_max must be positive (got {k_max})")));
    }
    let (lo, hi) = f.support();
    let reach = x_grid
        .iter()
        .chain(lo.iter())
        .chain(hi.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1e-3);
    let dk = PI / reach;
    let half = (k_max / dk).ceil() as usize;
    let k_grid: Vec<f64> = (0..=2 * half).map(|i| (i as f64 - half as f64) * dk).collect();

    let slice = q1_slice(f, &k_grid, sched, &cfg.quad)?;
    let lanczos = match cfg.window {
        Window::Auto => !f.jumps().is_empty(),
        Window::None => false,
        Window::Lanczos => true,
    };
    let g: Vec<Complex64> = if lanczos {
        let kk = k_grid[k_grid.len() - 1] + dk;
        slice
            .values
            .iter()
            .zip(&k_grid)
            .map(|(v, &k)| {
                let t = PI * k / kk;
                if t == 0.0 { *v } else { v * (t.sin() / t) }
            })
            .collect()
    } else {
        slice.values.clone()
    };
    let inv = inverse_ft(&g, &k_grid, &x_grid)?;

    let jumps = f.jumps();
    let residual = x_grid
        .iter()
        .zip(&inv.values)
        .filter(|(x, _)| jumps.iter().all(|j| (*x - j).abs() > cfg.jump_window))
        .map(|(&x, &v)| (v - f.eval(x)).abs())
        .fold(0.0f64, f64::max);

    let slice_diagnostics = PROBE_KS
        .iter()
        .map(|&k| slice_probe(f, k, sched, &cfg.quad))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings: Vec<String> = inv.warning.into_iter().collect();
    for p in slice_diagnostics.iter().filter(|p| !p.monotone) {
        warnings.push(format!("slice error does not decrease along the schedule at k = {}", p.k));
    }
    Ok(InversionResult {
        x_grid,
        f_rec: inv.values,
        residual,
        imag_residue: inv.imag_residue,
        k_max,
        nk: k_grid.len(),
        lanczos,
        slice_diagnostics,
        warnings,
    })
}
