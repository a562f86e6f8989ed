//! Complex log-gamma and the Gauss hypergeometric function.
//!
//! `log_gamma` is Stirling's series after an upward shift by the recursion
//! `Γ(z+1) = zΓ(z)`, which yields the branch analytic on `C \ (-inf, 0]` and
//! real on the positive axis.
//!
//! `hyp2f1` tries the Gauss series and the Pfaff, `1-z`, `1/z` and `1/(1-z)`
//! connection formulas in order of transformed argument, skipping any whose
//! terms cancel by more than four digits. When no candidate is left (the
//! neighbourhood of `exp(±iπ/3)`, integer `a-b` or `c-a-b`, or large
//! parameters) it continues the function along a path by re-expanding the
//! hypergeometric ODE in power series about intermediate points.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::qcore::QParam;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("log-gamma pole at z = {0}")]
    GammaPole(Complex64),
    #[error("2F1 is undefined: c = {0} is a non-positive integer")]
    CParamPole(Complex64),
    #[error("z = {0} lies on the branch cut [1, inf); supply CutSide::Above or CutSide::Below")]
    OnCut(Complex64),
    #[error("2F1 diverges at z = 1 (Re(c-a-b) <= 0)")]
    DivergentAtOne,
    #[error("series did not converge within {terms} terms (z = {z})")]
    NoConvergence { terms: usize, z: Complex64 },
    #[error("analytic continuation exceeded {steps} steps")]
    ContinuationStalled { steps: usize },
    #[error("gamma_ratio_collapse requires 1 < q < 2 (got q = {0})")]
    ClassicalQ(f64),
}

type Result<T> = std::result::Result<T, SpecialError>;

const MAX_TERMS: usize = 100_000;
const MAX_STEPS: usize = 100_000;
const TERM_EPS: f64 = 1e-16;
/// Transformed arguments with modulus above this go to ODE continuation.
pub const SERIES_RADIUS: f64 = 0.8;
/// Largest tolerated `sum |term| / |value|` before a route is abandoned.
const MAX_CANCELLATION: f64 = 1e4;
/// Distance to an integer below which a connection formula counts as degenerate.
const DEGENERACY_EPS: f64 = 1e-5;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn near_integer(z: Complex64) -> bool {
    z.im.abs() < DEGENERACY_EPS && (z.re - z.re.round()).abs() < DEGENERACY_EPS
}

// Bernoulli numbers B_2 .. B_20 divided by 2m(2m-1).
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// Principal-branch `ln Γ(z)`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(SpecialError::GammaPole(z));
    }
    const SHIFT_TO: f64 = 15.0;
    let mut w = z;
    let mut shift = c64(0.0, 0.0);
    while w.re < SHIFT_TO && (w.re < 0.0 || w.norm() < SHIFT_TO) {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = c64(0.0, 0.0);
    let mut pow = inv;
    for coef in STIRLING {
        series += pow * coef;
        pow *= inv2;
    }
    let stirling = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
    Ok(stirling - shift)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// `1/Γ(z)`, zero at the poles of `Γ`.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => c64(0.0, 0.0),
    }
}

/// `Γ((2-q)/(q-1)) / Γ(1/(q-1))`, which collapses to `(q-1)/(2-q)`.
pub fn gamma_ratio_collapse(q: QParam) -> Result<f64> {
    if q.is_classical() {
        return Err(SpecialError::ClassicalQ(q.value()));
    }
    let s = q.decay_rate();
    let num = log_gamma(c64(s - 1.0, 0.0))?;
    let den = log_gamma(c64(s, 0.0))?;
    Ok((num - den).exp().re)
}

/// Which side of the cut `[1, inf)` a real argument is approached from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutSide {
    #[default]
    Unspecified,
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub z: Complex64,
    pub side: CutSide,
}

impl Hyp2F1Params {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Self {
        Hyp2F1Params { a, b, c, z, side: CutSide::Unspecified }
    }

    pub fn real(a: f64, b: f64, c: f64, z: Complex64) -> Self {
        Self::new(c64(a, 0.0), c64(b, 0.0), c64(c, 0.0), z)
    }

    pub fn with_side(mut self, side: CutSide) -> Self {
        self.side = side;
        self
    }

    fn on_cut(&self) -> bool {
        self.z.im == 0.0 && self.z.re > 1.0
    }
}

/// Direct Gauss series `sum (a)_n (b)_n / ((c)_n n!) z^n`.
pub fn hyp2f1_series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(series_sum(a, b, c, z)?.0)
}

/// Series value together with `sum |term|`, whose ratio to the value
/// measures the cancellation.
fn series_sum(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
    if is_nonpositive_integer(c) {
        return Err(SpecialError::CParamPole(c));
    }
    let mut sum = c64(1.0, 0.0);
    let mut mag = 1.0;
    let mut term = c64(1.0, 0.0);
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        mag += term.norm();
        if term.norm() == 0.0 {
            return Ok((sum, mag));
        }
        if term.norm() <= TERM_EPS * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok((sum, mag));
            }
        } else {
            small = 0;
        }
    }
    Err(SpecialError::NoConvergence { terms: MAX_TERMS, z })
}

/// Pfaff route: `(1-z)^{-a} F(a, c-b; c; z/(z-1))`, inner function by series.
pub fn hyp2f1_pfaff(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64> {
    Ok(pfaff(a, b, c, z)?.0)
}

fn pfaff(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<(Complex64, f64)> {
    let w = z / (z - 1.0);
    let lead = (-a * crate::qcore::ln_1p_complex(-z)).exp();
    let (f, m) = series_sum(a, c - b, c, w)?;
    Ok((lead * f, lead.norm() * m))
}

/// `ln(-z)` with an explicit side for negative-real results.
fn ln_neg(z: Complex64, side: CutSide) -> Complex64 {
    branch_ln(-z, side)
}

fn ln_one_minus(z: Complex64, side: CutSide) -> Complex64 {
    branch_ln(c64(1.0 - z.re, -z.im), side)
}

/// Principal log, except that a negative real argument coming from a point
/// above (below) the cut of `z` takes argument `-π` (`+π`).
fn branch_ln(w: Complex64, side: CutSide) -> Complex64 {
    if w.im == 0.0 && w.re < 0.0 {
        let arg = match side {
            CutSide::Above => -PI,
            CutSide::Below => PI,
            CutSide::Unspecified => PI,
        };
        return c64((-w.re).ln(), arg);
    }
    w.ln()
}

/// `Γ(n_1)...Γ(n_k) / (Γ(d_1)...Γ(d_m))`; zero when a denominator is at a pole.
fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
    if den.iter().any(|&d| is_nonpositive_integer(d)) {
        return Ok(c64(0.0, 0.0));
    }
    let mut acc = c64(0.0, 0.0);
    for &n in num {
        acc += log_gamma(n)?;
    }
    for &d in den {
        acc -= log_gamma(d)?;
    }
    Ok(acc.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Series,
    Pfaff,
    OneMinus,
    Inverse,
    InverseOneMinus,
}

/// Gauss hypergeometric function on the cut plane `C \ [1, inf)`.
pub fn hyp2f1(p: &Hyp2F1Params) -> Result<Complex64> {
    let Hyp2F1Params { a, b, c, z, side } = *p;
    if is_nonpositive_integer(c) {
        return Err(SpecialError::CParamPole(c));
    }
    if z == c64(0.0, 0.0) {
        return Ok(c64(1.0, 0.0));
    }
    // terminating series: a polynomial in z
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return hyp2f1_series(a, b, c, z);
    }
    if z == c64(1.0, 0.0) {
        let e = c - a - b;
        if e.re <= 0.0 {
            return Err(SpecialError::DivergentAtOne);
        }
        return gamma_ratio(&[c, e], &[c - a, c - b]);
    }
    let on_cut = p.on_cut();
    if on_cut && side == CutSide::Unspecified {
        return Err(SpecialError::OnCut(z));
    }

    let one_minus = c64(1.0 - z.re, -z.im);
    let mut candidates: Vec<(f64, Route)> = Vec::with_capacity(5);
    if !on_cut {
        candidates.push((z.norm(), Route::Series));
        candidates.push(((z / (z - 1.0)).norm(), Route::Pfaff));
    }
    if !near_integer(c - a - b) {
        candidates.push((one_minus.norm(), Route::OneMinus));
    }
    if !near_integer(a - b) {
        candidates.push((1.0 / z.norm(), Route::Inverse));
        candidates.push((1.0 / one_minus.norm(), Route::InverseOneMinus));
    }
    candidates.retain(|&(r, _)| r <= SERIES_RADIUS);
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Take the first route whose terms do not cancel badly; otherwise
    // integrate the ODE, keeping the least-cancelling route as a fallback.
    let mut fallback: Option<(f64, Complex64)> = None;
    for &(_, route) in &candidates {
        let attempt = match route {
            Route::Series => series_sum(a, b, c, z),
            Route::Pfaff => pfaff(a, b, c, z),
            Route::OneMinus => via_one_minus(a, b, c, z, side),
            Route::Inverse => via_inverse(a, b, c, z, side),
            Route::InverseOneMinus => via_inverse_one_minus(a, b, c, z, side),
        };
        let Ok((v, mag)) = attempt else { continue };
        let cond = mag / v.norm();
        if cond <= MAX_CANCELLATION {
            return Ok(v);
        }
        if v.is_finite() && fallback.is_none_or(|(c0, _)| cond < c0) {
            fallback = Some((cond, v));
        }
    }
    match (continue_along_path(a, b, c, z, side), fallback) {
        (Ok(v), _) => Ok(v),
        (Err(_), Some((_, v))) => Ok(v),
        (Err(e), None) => Err(e),
    }
}

/// `z -> 1-z` connection formula.
fn via_one_minus(a: Complex64, b: Complex64, c: Complex64, z: Complex64, side: CutSide) -> Result<(Complex64, f64)> {
    let w = c64(1.0 - z.re, -z.im);
    let e = c - a - b;
    let g1 = gamma_ratio(&[c, e], &[c - a, c - b])?;
    let g2 = gamma_ratio(&[c, -e], &[a, b])? * (e * ln_one_minus(z, side)).exp();
    let (f1, m1) = series_sum(a, b, 1.0 - e, w)?;
    let (f2, m2) = series_sum(c - a, c - b, e + 1.0, w)?;
    Ok((g1 * f1 + g2 * f2, g1.norm() * m1 + g2.norm() * m2))
}

/// `z -> 1/z` connection formula.
fn via_inverse(a: Complex64, b: Complex64, c: Complex64, z: Complex64, side: CutSide) -> Result<(Complex64, f64)> {
    let w = z.inv();
    let ln_mz = ln_neg(z, side);
    let g1 = gamma_ratio(&[c, b - a], &[b, c - a])? * (-a * ln_mz).exp();
    let g2 = gamma_ratio(&[c, a - b], &[a, c - b])? * (-b * ln_mz).exp();
    let (f1, m1) = series_sum(a, a - c + 1.0, a - b + 1.0, w)?;
    let (f2, m2) = series_sum(b, b - c + 1.0, b - a + 1.0, w)?;
    Ok((g1 * f1 + g2 * f2, g1.norm() * m1 + g2.norm() * m2))
}

/// `z -> 1/(1-z)` connection formula.
fn via_inverse_one_minus(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: Complex64,
    side: CutSide,
) -> Result<(Complex64, f64)> {
    let one_minus = c64(1.0 - z.re, -z.im);
    let w = one_minus.inv();
    let ln_1mz = ln_one_minus(z, side);
    let g1 = gamma_ratio(&[c, b - a], &[b, c - a])? * (-a * ln_1mz).exp();
    let g2 = gamma_ratio(&[c, a - b], &[a, c - b])? * (-b * ln_1mz).exp();
    let (f1, m1) = series_sum(a, c - b, a - b + 1.0, w)?;
    let (f2, m2) = series_sum(b, c - a, b - a + 1.0, w)?;
    Ok((g1 * f1 + g2 * f2, g1.norm() * m1 + g2.norm() * m2))
}

/// Analytic continuation of `F` from a point near the origin to `z` by
/// stepping through Taylor expansions of the hypergeometric ODE
/// `z(1-z)w'' + [c - (a+b+1)z]w' - ab w = 0`.
fn continue_along_path(a: Complex64, b: Complex64, c: Complex64, z: Complex64, side: CutSide) -> Result<Complex64> {
    // Points on the cut are reached through a waypoint on the requested side.
    let mut waypoints = Vec::with_capacity(2);
    if z.im == 0.0 && z.re > 1.0 {
        let offset = match side {
            CutSide::Below => -0.5,
            _ => 0.5,
        };
        waypoints.push(c64(z.re, offset));
    }
    waypoints.push(z);

    let start_radius = 0.5;
    let first = waypoints[0];
    let start = if first.norm() <= start_radius {
        first
    } else {
        first * (start_radius / first.norm())
    };
    let mut pos = start;
    let mut val = hyp2f1_series(a, b, c, start)?;
    let mut der = a * b / c * hyp2f1_series(a + 1.0, b + 1.0, c + 1.0, start)?;

    let mut steps = 0;
    for target in waypoints {
        while pos != target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(SpecialError::ContinuationStalled { steps: MAX_STEPS });
            }
            let radius = pos.norm().min((c64(1.0, 0.0) - pos).norm());
            let remaining = target - pos;
            let h = if remaining.norm() <= 0.5 * radius {
                remaining
            } else {
                remaining * (0.5 * radius / remaining.norm())
            };
            let (v, d) = taylor_step(a, b, c, pos, val, der, h)?;
            pos = if h == remaining { target } else { pos + h };
            val = v;
            der = d;
        }
    }
    Ok(val)
}

fn taylor_step(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z0: Complex64,
    w0: Complex64,
    dw0: Complex64,
    h: Complex64,
) -> Result<(Complex64, Complex64)> {
    let p0 = z0 * (1.0 - z0);
    let p1 = 1.0 - 2.0 * z0;
    let p2 = -1.0;
    let r0 = c - (a + b + 1.0) * z0;
    let r1 = -(a + b + 1.0);
    let ab = a * b;
    let h2 = h * h;

    // d_n = c_n h^n
    let mut d_prev = w0;
    let mut d_cur = dw0 * h;
    let mut val = d_prev + d_cur;
    let mut der_h = d_cur; // h * w'(z0 + h) = sum n d_n
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let next = -((p1 * nf + r0) * (nf + 1.0) * d_cur * h + (p2 * nf * (nf - 1.0) + r1 * nf - ab) * d_prev * h2)
            / (p0 * (nf + 2.0) * (nf + 1.0));
        val += next;
        der_h += next * (nf + 2.0);
        if next.norm() <= TERM_EPS * val.norm() {
            small += 1;
            if small >= 3 {
                return Ok((val, der_h / h));
            }
        } else {
            small = 0;
        }
        d_prev = d_cur;
        d_cur = next;
    }
    Err(SpecialError::NoConvergence { terms: MAX_TERMS, z: z0 + h })
}
