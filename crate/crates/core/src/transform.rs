//! The forward complex q-Fourier transform.
//!
//! For an input `f >= 0` the transform is
//!
//! ```text
//! F(k, q) =  ∫_0^∞  f(x) {1 + i(1-q) k x f(x)^{q-1}}^{1/(1-q)} dx    Im k > 0
//! F(k, q) = -∫_-∞^0 f(x) {1 + i(1-q) k x f(x)^{q-1}}^{1/(1-q)} dx    Im k < 0
//! ```
//!
//! Real `k` is handled directly (the cut of the complex transform) through the
//! `RealUpper` / `RealLower` tags; their difference is the full-line real
//! transform returned by [`qft_real`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::qcore::{q_exp_any, q_power_1p, QError, QParam};
use crate::quad::{integrate, integrate_power_tail, Estimate, QuadError, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Q(#[from] QError),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("nonnegativity violated: f({x}) = {y}")]
    Negative { x: f64, y: f64 },
    #[error("function is not in the transform domain: {0}")]
    NotMember(String),
    #[error("invalid evaluation point: {0}")]
    Point(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(QuadError),
    #[error(transparent)]
    Quad(QuadError),
}

impl From<QuadError> for TransformError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::NoConvergence { .. } => TransformError::Convergence(e),
            other => TransformError::Quad(other),
        }
    }
}

impl TransformError {
    /// Best available estimate when the failure was a convergence failure.
    pub fn best_estimate(&self) -> Option<Estimate> {
        match self {
            TransformError::Convergence(QuadError::NoConvergence { estimate, error, .. }) => Some(Estimate {
                value: *estimate,
                err: *error,
            }),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, TransformError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Piecewise-linear nonnegative samples, zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SampledFunction {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(TransformError::InvalidFunction(
                "sampled function needs at least two (x, y) pairs of equal length".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite()) {
            return Err(TransformError::InvalidFunction("sample grid must be finite and strictly increasing".into()));
        }
        if let Some((&xv, &yv)) = x.iter().zip(&y).find(|(_, &yv)| !(yv >= 0.0) || !yv.is_finite()) {
            return Err(TransformError::Negative { x: xv, y: yv });
        }
        Ok(SampledFunction { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return 0.0;
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i,
        };
        let (x0, x1, y0, y1) = (self.x[i - 1], self.x[i], self.y[i - 1], self.y[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }
}

/// A nonnegative input function `f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `(λ/x)^β` on `[a, b]`, zero elsewhere.
    PowerLaw { lambda: f64, beta: f64, a: f64, b: f64 },
    /// `H(x)` for `Plus`, `H(-x)` for `Minus`.
    Heaviside(Sign),
    Constant(f64),
    /// Unnormalized `exp(-x²/(2σ²))`.
    Gaussian { sigma: f64 },
    /// `e_{q}(-β x²)` with its own index `q < 3`.
    QGaussian { q: f64, beta: f64 },
    Sampled(SampledFunction),
}

/// How the integrand behaves as `|x| -> ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Compact,
    Rapid,
    /// Envelope `|x|^{-p}`.
    Algebraic(f64),
    /// Envelope does not decay (or decays too slowly to be integrable).
    Divergent,
}

impl FunctionSpec {
    pub fn power_law(lambda: f64, beta: f64, a: f64, b: f64) -> Result<Self> {
        let f = FunctionSpec::PowerLaw { lambda, beta, a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        let f = FunctionSpec::Gaussian { sigma };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TransformError::InvalidFunction(m.to_string()));
        match *self {
            FunctionSpec::PowerLaw { lambda, beta, a, b } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return bad("power law needs lambda > 0");
                }
                if !beta.is_finite() {
                    return bad("power law needs a finite beta");
                }
                if !(a > 0.0 && b > a && b.is_finite()) {
                    return bad("power law needs 0 < a < b");
                }
            }
            FunctionSpec::Heaviside(_) => {}
            FunctionSpec::Constant(c) => {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(TransformError::Negative { x: 0.0, y: c });
                }
            }
            FunctionSpec::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return bad("gaussian needs sigma > 0");
                }
            }
            FunctionSpec::QGaussian { q, beta } => {
                if !(q < 3.0 && q.is_finite()) {
                    return bad("q-gaussian index must be below 3 for integrability");
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return bad("q-gaussian needs beta > 0");
                }
            }
            FunctionSpec::Sampled(ref s) => {
                if let Some((&x, &y)) = s.x.iter().zip(&s.y).find(|(_, &y)| !(y >= 0.0)) {
                    return Err(TransformError::Negative { x, y });
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::PowerLaw { lambda, beta, a, b } => {
                if x >= a && x <= b {
                    (lambda / x).powf(beta)
                } else {
                    0.0
                }
            }
            FunctionSpec::Heaviside(Sign::Plus) => crate::qcore::heaviside(x),
            FunctionSpec::Heaviside(Sign::Minus) => crate::qcore::heaviside(-x),
            FunctionSpec::Constant(c) => c,
            FunctionSpec::Gaussian { sigma } => (-0.5 * (x / sigma).powi(2)).exp(),
            FunctionSpec::QGaussian { q, beta } => q_exp_any(-beta * x * x, q).value,
            FunctionSpec::Sampled(ref s) => s.eval(x),
        }
    }

    /// Support as a closed interval; `None` ends are unbounded.
    pub fn support(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            FunctionSpec::PowerLaw { a, b, .. } => (Some(a), Some(b)),
            FunctionSpec::Heaviside(Sign::Plus) => (Some(0.0), None),
            FunctionSpec::Heaviside(Sign::Minus) => (None, Some(0.0)),
            FunctionSpec::Constant(0.0) => (Some(0.0), Some(0.0)),
            FunctionSpec::QGaussian { q, beta } if q < 1.0 => {
                let r = 1.0 / ((1.0 - q) * beta).sqrt();
                (Some(-r), Some(r))
            }
            FunctionSpec::Sampled(ref s) => (Some(s.x[0]), Some(s.x[s.x.len() - 1])),
            _ => (None, None),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            FunctionSpec::PowerLaw { a, b, .. } => vec![a, b],
            FunctionSpec::Sampled(ref s) => s.x.clone(),
            _ => Vec::new(),
        }
    }

    /// Algebraic decay exponent of `f` itself, if it decays algebraically.
    fn own_decay(&self) -> Option<f64> {
        match *self {
            FunctionSpec::QGaussian { q, .. } if q > 1.0 => Some(2.0 / (q - 1.0)),
            _ => None,
        }
    }

    fn rapid_cut(&self) -> Option<f64> {
        // beyond this |x| the function is below 1e-300
        match *self {
            FunctionSpec::Gaussian { sigma } => Some(sigma * (2.0 * 690.8f64).sqrt()),
            FunctionSpec::QGaussian { q: 1.0, beta } => Some((690.8 / beta).sqrt()),
            _ => None,
        }
    }

    /// Closed-form `∫ f dx` where one exists.
    pub fn total_integral(&self) -> Option<f64> {
        match *self {
            FunctionSpec::PowerLaw { lambda, beta, a, b } => {
                let lb = lambda.powf(beta);
                if (beta - 1.0).abs() < 1e-14 {
                    Some(lb * (b / a).ln())
                } else {
                    Some(lb * (b.powf(1.0 - beta) - a.powf(1.0 - beta)) / (1.0 - beta))
                }
            }
            FunctionSpec::Constant(0.0) => Some(0.0),
            FunctionSpec::Gaussian { sigma } => Some(sigma * (2.0 * std::f64::consts::PI).sqrt()),
            FunctionSpec::QGaussian { q: 1.0, beta } => Some((std::f64::consts::PI / beta).sqrt()),
            FunctionSpec::Sampled(ref s) => Some(
                s.x.windows(2)
                    .zip(s.y.windows(2))
                    .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
                    .sum(),
            ),
            _ => None,
        }
    }

    /// Tail behaviour of the transform integrand at index `q` and wavenumber `k`.
    pub fn tail(&self, q: QParam, k_is_zero: bool) -> Tail {
        let (lo, hi) = self.support();
        if lo.is_some() && hi.is_some() {
            return Tail::Compact;
        }
        if self.rapid_cut().is_some() {
            return Tail::Rapid;
        }
        let own = match *self {
            FunctionSpec::Heaviside(_) | FunctionSpec::Constant(_) => 0.0,
            _ => self.own_decay().unwrap_or(0.0),
        };
        let p = if q.is_classical() || k_is_zero {
            own
        } else {
            own.max(q.decay_rate())
        };
        if p > 1.0 {
            Tail::Algebraic(p)
        } else {
            Tail::Divergent
        }
    }

    /// Points where `f` jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match *self {
            FunctionSpec::PowerLaw { a, b, .. } => vec![a, b],
            FunctionSpec::Heaviside(_) => vec![0.0],
            FunctionSpec::Sampled(ref s) => {
                let n = s.x.len();
                let mut out = Vec::new();
                if s.y[0] != 0.0 {
                    out.push(s.x[0]);
                }
                if s.y[n - 1] != 0.0 {
                    out.push(s.x[n - 1]);
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Whether the function is the zero function.
    fn is_zero(&self) -> bool {
        matches!(*self, FunctionSpec::Constant(c) if c == 0.0)
    }
}

/// Which of the four evaluation regimes a wavenumber belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    Upper,
    Lower,
    /// Real `k`, reached from above (`k + i0`).
    RealUpper,
    /// Real `k`, reached from below (`k - i0`).
    RealLower,
}

impl Plane {
    pub fn as_str(self) -> &'static str {
        match self {
            Plane::Upper => "upper",
            Plane::Lower => "lower",
            Plane::RealUpper => "real-upper",
            Plane::RealLower => "real-lower",
        }
    }

    fn is_upper_family(self) -> bool {
        matches!(self, Plane::Upper | Plane::RealUpper)
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plane {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "upper" => Ok(Plane::Upper),
            "lower" => Ok(Plane::Lower),
            "real-upper" | "real_upper" | "real_limit_upper" => Ok(Plane::RealUpper),
            "real-lower" | "real_lower" | "real_limit_lower" => Ok(Plane::RealLower),
            other => Err(format!(
                "unknown plane '{other}' (expected upper, lower, real-upper or real-lower)"
            )),
        }
    }
}

/// A wavenumber together with the half-plane it is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    k: Complex64,
    plane: Plane,
}

impl HalfPlanePoint {
    pub fn new(k: Complex64, plane: Plane) -> Result<Self> {
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(TransformError::Point(format!("non-finite k = {k}")));
        }
        let ok = match plane {
            Plane::Upper => k.im > 0.0,
            Plane::Lower => k.im < 0.0,
            Plane::RealUpper | Plane::RealLower => k.im == 0.0,
        };
        if !ok {
            return Err(TransformError::Point(format!("k = {k} is not valid for plane {plane}")));
        }
        Ok(HalfPlanePoint { k, plane })
    }

    pub fn upper(k: Complex64) -> Result<Self> {
        Self::new(k, Plane::Upper)
    }

    pub fn lower(k: Complex64) -> Result<Self> {
        Self::new(k, Plane::Lower)
    }

    pub fn real_upper(k: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0), Plane::RealUpper)
    }

    pub fn real_lower(k: f64) -> Result<Self> {
        Self::new(Complex64::new(k, 0.0), Plane::RealLower)
    }

    pub fn k(&self) -> Complex64 {
        self.k
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }
}

/// Result of checking an input against the transform domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// Integrand envelope exponent (e.g. `-2` for `|x|^{-2}`); `None` when
    /// the support is compact or the decay is faster than any power.
    pub decay_exponent: Option<f64>,
    pub tail: Tail,
    /// Whether `∫ f` itself is finite, i.e. the transform exists at `k = 0`.
    pub integrable_at_k0: bool,
    pub note: String,
}

/// Domain check for the transform of `f` at index `q` (for `k != 0`).
pub fn membership_check(f: &FunctionSpec, q: QParam) -> Result<MembershipReport> {
    f.validate()?;
    let tail = f.tail(q, false);
    let tail_k0 = f.tail(q, true);
    let integrable_at_k0 = !matches!(tail_k0, Tail::Divergent) || f.is_zero();
    let (member, decay_exponent, note) = match tail {
        Tail::Compact => (true, None, "compact support".to_string()),
        Tail::Rapid => (true, None, "faster-than-algebraic decay".to_string()),
        Tail::Algebraic(p) => (true, Some(-p), format!("integrand decays like |x|^-{p}")),
        Tail::Divergent if f.is_zero() => (true, None, "zero function".to_string()),
        Tail::Divergent => (
            false,
            Some(0.0),
            if q.is_classical() {
                "classical kernel has unit modulus; transform exists only as a distribution".to_string()
            } else {
                "integrand envelope is not integrable".to_string()
            },
        ),
    };
    Ok(MembershipReport {
        member,
        decay_exponent,
        tail,
        integrable_at_k0,
        note,
    })
}

/// `f(x) {1 + i(1-q) k x f^{q-1}}^{1/(1-q)}`, with the classical branch at `q = 1`.
#[inline]
fn integrand(f: &FunctionSpec, q: QParam, k: Complex64, x: f64) -> Complex64 {
    let fx = f.eval(x);
    if fx == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if q.is_classical() {
        return (Complex64::i() * k * x).exp() * fx;
    }
    let qv = q.value();
    let w = Complex64::i() * k * (x * (1.0 - qv) * fx.powf(qv - 1.0));
    q_power_1p(w, qv) * fx
}

/// `∫_0^∞ g(u) du` with `g(u) = integrand(±u)`.
fn half_line(f: &FunctionSpec, q: QParam, k: Complex64, positive: bool, cfg: &QuadratureConfig) -> Result<Estimate> {
    let dir = if positive { 1.0 } else { -1.0 };
    let g = |u: f64| integrand(f, q, k, dir * u);
    let (lo, hi) = f.support();
    // support in the mirrored coordinate u >= 0
    let (ulo, uhi) = if positive { (lo, hi) } else { (hi.map(|v| -v), lo.map(|v| -v)) };
    let start = ulo.map_or(0.0, |v| v.max(0.0));
    if let Some(end) = uhi {
        if end <= start {
            return Ok(Estimate::ZERO);
        }
    }
    let breaks: Vec<f64> = f.breakpoints().into_iter().map(|b| dir * b).collect();
    let k_is_zero = k == Complex64::new(0.0, 0.0);
    match (uhi, f.tail(q, k_is_zero)) {
        (Some(end), _) => Ok(integrate(g, start, end, &breaks, cfg)?),
        (None, Tail::Rapid) => {
            let end = f.rapid_cut().expect("rapid tail has a cut");
            Ok(integrate(g, start, end.max(start), &breaks, cfg)?)
        }
        (None, Tail::Algebraic(p)) => {
            if q.is_classical() && !k_is_zero {
                // oscillatory tail: integrate to T, then two terms of integration by parts
                let kn = k.norm();
                let end = start.max(1000.0 * (1.0 / kn).max(1.0)).min(1e7);
                let body = integrate(g, start, end, &breaks, cfg)?;
                let h = 1e-4 * end;
                let (f0, fp) = (f.eval(dir * end), dir * (f.eval(dir * (end + h)) - f.eval(dir * (end - h))) / (2.0 * h));
                let ik = Complex64::i() * k * dir;
                let phase = (ik * end).exp();
                let tail = phase * (-f0 / ik + fp / (ik * ik));
                let err = p * (p + 1.0) * f0 / (end * end * kn.powi(3));
                return Ok(Estimate { value: body.value + tail, err: body.err + err });
            }
            let x0 = start.max(1.0);
            let head = if x0 > start {
                integrate(g, start, x0, &breaks, cfg)?
            } else {
                Estimate::ZERO
            };
            let tail = integrate_power_tail(g, x0, p, cfg)?;
            Ok(head + tail)
        }
        (None, Tail::Divergent) | (None, Tail::Compact) => Err(TransformError::NotMember(format!(
            "integrand of {f:?} is not integrable at q = {q}, k = {k}"
        ))),
    }
}

/// Complex q-Fourier transform of `f` at the tagged point `k`.
pub fn qft_complex(f: &FunctionSpec, q: QParam, k: HalfPlanePoint, cfg: &QuadratureConfig) -> Result<Estimate> {
    f.validate()?;
    cfg.validate()?;
    let kv = k.k();
    if k.plane().is_upper_family() {
        half_line(f, q, kv, true, cfg)
    } else {
        Ok(-half_line(f, q, kv, false, cfg)?)
    }
}

/// Full-line real transform `∫ f(x) e_q(ikx f^{q-1}) dx` for real `k`.
pub fn qft_real(f: &FunctionSpec, q: QParam, k: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    let up = qft_complex(f, q, HalfPlanePoint::real_upper(k)?, cfg)?;
    let low = qft_complex(f, q, HalfPlanePoint::real_lower(k)?, cfg)?;
    Ok(up + -low)
}

/// `F(k, q)` tabulated on `q_list × k_grid`, row-major in `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSurface {
    pub k_grid: Vec<HalfPlanePoint>,
    pub q_list: Vec<QParam>,
    pub values: Vec<Complex64>,
    pub err: Vec<f64>,
    /// Failure message for cells that did not converge; `None` for good cells.
    pub failures: Vec<Option<String>>,
}

impl TransformSurface {
    fn index(&self, qi: usize, ki: usize) -> usize {
        qi * self.k_grid.len() + ki
    }

    pub fn value(&self, qi: usize, ki: usize) -> Complex64 {
        self.values[self.index(qi, ki)]
    }

    pub fn error(&self, qi: usize, ki: usize) -> f64 {
        self.err[self.index(qi, ki)]
    }

    pub fn failure(&self, qi: usize, ki: usize) -> Option<&str> {
        self.failures[self.index(qi, ki)].as_deref()
    }

    pub fn failed_cells(&self) -> usize {
        self.failures.iter().filter(|f| f.is_some()).count()
    }

    pub fn row(&self, qi: usize) -> &[Complex64] {
        let n = self.k_grid.len();
        &self.values[qi * n..(qi + 1) * n]
    }
}

/// Evaluate the transform on every `(q, k)` cell. Cells are independent, so
/// they are computed in parallel; failures are recorded per cell.
pub fn qft_surface(
    f: &FunctionSpec,
    q_list: &[QParam],
    k_grid: &[HalfPlanePoint],
    cfg: &QuadratureConfig,
) -> Result<TransformSurface> {
    f.validate()?;
    cfg.validate()?;
    let nk = k_grid.len();
    let cells: Vec<(Complex64, f64, Option<String>)> = (0..q_list.len() * nk)
        .into_par_iter()
        .map(|idx| {
            let (q, k) = (q_list[idx / nk], k_grid[idx % nk]);
            match qft_complex(f, q, k, cfg) {
                Ok(e) => (e.value, e.err, None),
                Err(e) => match e.best_estimate() {
                    Some(best) => (best.value, best.err, Some(e.to_string())),
                    None => (Complex64::new(f64::NAN, f64::NAN), f64::INFINITY, Some(e.to_string())),
                },
            }
        })
        .collect();
    let mut values = Vec::with_capacity(cells.len());
    let mut err = Vec::with_capacity(cells.len());
    let mut failures = Vec::with_capacity(cells.len());
    for (v, e, fail) in cells {
        values.push(v);
        err.push(e);
        failures.push(fail);
    }
    Ok(TransformSurface {
        k_grid: k_grid.to_vec(),
        q_list: q_list.to_vec(),
        values,
        err,
        failures,
    })
}
