//! Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.
//!
//! Subdivision is global: the panel with the largest error estimate is bisected
//! next. Panels are summed in left-to-right order so results are bit-stable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("invalid quadrature configuration: {0}")]
    Config(String),
    #[error("no convergence after {subdivisions} subdivisions (best estimate {estimate}, error {error:e})")]
    NoConvergence {
        estimate: Complex64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

/// Tolerances shared by every integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Explicit truncation point for infinite ranges; `None` picks it from the decay exponent.
    pub tail_cut: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            tail_cut: None,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(QuadError::Config("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::Config("max_subdivisions must be at least 1".into()));
        }
        if let Some(t) = self.tail_cut {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QuadError::Config("tail_cut must be positive and finite".into()));
            }
        }
        Ok(())
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: Complex64::new(0.0, 0.0),
        err: 0.0,
    };
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            err: self.err + other.err,
        }
    }
}

impl std::ops::Neg for Estimate {
    type Output = Estimate;

    fn neg(self) -> Estimate {
        Estimate {
            value: -self.value,
            err: self.err,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.re.is_finite() || !fc.im.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.re.is_finite() || !f1.im.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.re.is_finite() || !f2.im.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    // QUADPACK error heuristic applied to the complex modulus
    let mean = res_k * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let resasc = resasc * half.abs();
    let mut err = ((res_k - res_g) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    Ok(Panel {
        a,
        b,
        value: res_k * half,
        err,
    })
}

/// Adaptive integration of `f` over `[a, b]` with optional interior breakpoints.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], cfg: &QuadratureConfig) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    cfg.validate()?;
    if a == b {
        return Ok(Estimate::ZERO);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::Config(format!("integration limits must be finite ([{a}, {b}])")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(kronrod(&f, w[0], w[1])?);
    }
    let mut subdivisions = heap.len();
    let (mut total, mut err) = summarize(&heap);
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if err <= tol {
            // re-check with an ordered sum before accepting
            let (t, e) = summarize(&heap);
            (total, err) = (t, e);
            if err <= cfg.abs_tol.max(cfg.rel_tol * total.norm()) {
                return Ok(Estimate { value: total * sign, err });
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            let (total, err) = summarize(&heap);
            return Err(QuadError::NoConvergence {
                estimate: total * sign,
                error: err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty panel set");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel at floating-point resolution: keep it and stop refining
            heap.push(worst);
            let (total, err) = summarize(&heap);
            return Err(QuadError::NoConvergence {
                estimate: total * sign,
                error: err,
                subdivisions,
            });
        }
        let left = kronrod(&f, worst.a, mid)?;
        let right = kronrod(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            (total, err) = summarize(&heap);
        }
    }
}

fn summarize(heap: &BinaryHeap<Panel>) -> (Complex64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for p in panels {
        total += p.value;
        err += p.err;
    }
    (total, err)
}

/// `∫_{x0}^{∞} f(x) dx` for an integrand decaying like `|x|^{-p}`, `p > 1`.
///
/// The range is mapped by `x = x0 e^v` and truncated at `v = V`; the remainder
/// is approximated by the power-law asymptote `f(T) T / (p - 1)` with
/// `T = x0 e^V`, and its model error enters the error estimate.
pub fn integrate_power_tail<F>(f: F, x0: f64, decay: f64, cfg: &QuadratureConfig) -> Result<Estimate, QuadError>
where
    F: Fn(f64) -> Complex64,
{
    if !(x0 > 0.0) || !(decay > 1.0) {
        return Err(QuadError::Config(format!(
            "power tail needs x0 > 0 and decay > 1 (got x0 = {x0}, decay = {decay})"
        )));
    }
    // stay clear of f64 overflow in x0 e^V
    let v_max = (f64::MAX.ln() - x0.ln().max(0.0) - 10.0).min(700.0);
    let mut v_end = match cfg.tail_cut {
        Some(t) if t > x0 => (t / x0).ln().min(v_max),
        _ => 40.0f64.min(v_max),
    };
    let tail_at = |v: f64| -> (Complex64, f64) {
        let t = x0 * v.exp();
        let tail = f(t) * (t / (decay - 1.0));
        // observed local exponent versus the assumed one
        let t1 = x0 * (v - 1.0).exp();
        let f1 = f(t1).norm();
        let f0 = f(t).norm();
        let mismatch = if f0 > 0.0 && f1 > 0.0 {
            ((f1 / f0).ln() - decay).abs() / (decay - 1.0)
        } else {
            0.0
        };
        (tail, tail.norm() * mismatch.min(1.0))
    };
    if cfg.tail_cut.is_none() {
        loop {
            let (tail, model_err) = tail_at(v_end);
            if model_err <= 0.01 * cfg.abs_tol || tail.norm() <= 0.01 * cfg.abs_tol || v_end >= v_max {
                break;
            }
            v_end = (v_end * 2.0).min(v_max);
        }
    }
    let mapped = |v: f64| {
        let x = x0 * v.exp();
        f(x) * x
    };
    let body = integrate(mapped, 0.0, v_end, &[], cfg)?;
    let (tail, model_err) = tail_at(v_end);
    Ok(Estimate {
        value: body.value + tail,
        err: body.err + model_err,
    })
}
