//! Closed-form transforms: the truncated power law, the Hilhorst family,
//! Heaviside steps and the delta weight of the constant function.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::qcore::{ln_1p_complex, QParam};
use crate::special::{hyp2f1, Hyp2F1Params, SpecialError};
use crate::transform::{FunctionSpec, HalfPlanePoint, Plane, Sign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("the closed form is defined for 1 < q < 2 (got q = {0})")]
    ClassicalQ(f64),
    #[error("k = 0 is a pole of the Heaviside transform; its delta content is handled by the contour functional")]
    Pole,
    #[error("hypergeometric evaluation failed in the {regime:?} regime: {source}")]
    Special {
        regime: RegimeTag,
        #[source]
        source: SpecialError,
    },
}

type Result<T> = std::result::Result<T, ClosedFormError>;

/// `(λ/x)^β` on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawParams {
    pub lambda: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl PowerLawParams {
    pub fn new(lambda: f64, beta: f64, a: f64, b: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !beta.is_finite() || !(a > 0.0 && b > a && b.is_finite()) {
            return Err(ClosedFormError::Invalid(format!(
                "need lambda > 0 and 0 < a < b (got lambda = {lambda}, a = {a}, b = {b}, beta = {beta})"
            )));
        }
        Ok(PowerLawParams { lambda, beta, a, b })
    }

    pub fn to_function(self) -> FunctionSpec {
        FunctionSpec::PowerLaw {
            lambda: self.lambda,
            beta: self.beta,
            a: self.a,
            b: self.b,
        }
    }

    /// `∫_a^b (λ/x)^β dx`.
    pub fn moment(self) -> f64 {
        let lb = self.lambda.powf(self.beta);
        if (self.beta - 1.0).abs() < 1e-14 {
            lb * (self.b / self.a).ln()
        } else {
            lb * (self.b.powf(1.0 - self.beta) - self.a.powf(1.0 - self.beta)) / (1.0 - self.beta)
        }
    }
}

/// Position of `q` relative to `1 + 1/β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    LowQ,
    HighQ,
    Boundary,
}

/// Width of the band around `q = 1 + 1/β` treated as the boundary.
const BOUNDARY_WIDTH: f64 = 1e-12;

impl RegimeTag {
    pub fn classify(beta: f64, q: QParam) -> RegimeTag {
        let mu = 1.0 - beta * q.excess();
        if mu.abs() < BOUNDARY_WIDTH {
            RegimeTag::Boundary
        } else if mu > 0.0 {
            RegimeTag::LowQ
        } else {
            RegimeTag::HighQ
        }
    }
}

fn require_nonclassical(q: QParam) -> Result<()> {
    if q.is_classical() {
        return Err(ClosedFormError::ClassicalQ(q.value()));
    }
    Ok(())
}

/// `(1 + w)^{1/(1-q)}` on the principal branch.
fn q_power(w: Complex64, q: QParam) -> Complex64 {
    (ln_1p_complex(w) * q.power()).exp()
}

/// Transform of the truncated power law. Lower-plane points give 0 since
/// the support lies on `x > 0`.
pub fn powerlaw_qft_closed(p: PowerLawParams, q: QParam, k: HalfPlanePoint) -> Result<Complex64> {
    let p = PowerLawParams::new(p.lambda, p.beta, p.a, p.b)?;
    require_nonclassical(q)?;
    if matches!(k.plane(), Plane::Lower | Plane::RealLower) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kv = k.k();
    if kv == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(p.moment(), 0.0));
    }
    let qm1 = q.excess();
    let s = q.decay_rate();
    let mu = 1.0 - p.beta * qm1;
    let kappa = Complex64::i() * kv * (-qm1 * p.lambda.powf(p.beta * qm1));
    let lb = p.lambda.powf(p.beta);
    let regime = RegimeTag::classify(p.beta, q);
    let wrap = |source| ClosedFormError::Special { regime, source };
    match regime {
        RegimeTag::Boundary => {
            // x f^{q-1} is constant: the kernel factors out of the moment
            Ok(q_power(kappa, q) * p.moment())
        }
        RegimeTag::HighQ => {
            let nu = (1.0 - p.beta) / mu;
            let term = |x: f64| -> Result<Complex64> {
                let z = -kappa * x.powf(mu);
                let f = hyp2f1(&Hyp2F1Params::real(s, nu, nu + 1.0, z)).map_err(wrap)?;
                Ok(f * x.powf(1.0 - p.beta))
            };
            Ok((term(p.b)? - term(p.a)?) * (lb / (1.0 - p.beta)))
        }
        RegimeTag::LowQ => {
            let nu = (1.0 - p.beta) / mu;
            let e = s - nu;
            let ln_kappa = kappa.ln();
            // ∫_A^∞ y^{ν-1} (1 + κy)^{-s} dy
            let upper_tail = |big_a: f64| -> Result<Complex64> {
                let z = -(kappa * big_a).inv();
                let f = hyp2f1(&Hyp2F1Params::real(s, e, e + 1.0, z)).map_err(wrap)?;
                Ok((-s * ln_kappa).exp() * big_a.powf(-e) / e * f)
            };
            Ok((upper_tail(p.a.powf(mu))? - upper_tail(p.b.powf(mu))?) * (lb / mu))
        }
    }
}

/// `λ` that normalizes the family `(λ/x)^{1/(q-1)}` on `[a, b]`.
pub fn hilhorst_lambda(a: f64, b: f64, q: QParam) -> Result<f64> {
    require_nonclassical(q)?;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(ClosedFormError::Invalid(format!("need 0 < a < b (got a = {a}, b = {b})")));
    }
    let qv = q.value();
    let e = (qv - 2.0) / (qv - 1.0);
    let bracket = (qv - 1.0) / (2.0 - qv) * (a.powf(e) - b.powf(e));
    Ok(bracket.powf(1.0 - qv))
}

/// The Hilhorst family member on `[a, b]` at index `q`.
pub fn hilhorst_function(a: f64, b: f64, q: QParam) -> Result<PowerLawParams> {
    let lambda = hilhorst_lambda(a, b, q)?;
    PowerLawParams::new(lambda, q.decay_rate(), a, b)
}

/// Right endpoint `b2` such that `[a2, b2]` has the same Hilhorst `λ` as `[a, b]`.
pub fn hilhorst_partner(a: f64, b: f64, a2: f64, q: QParam) -> Result<f64> {
    hilhorst_lambda(a, b, q)?;
    let qv = q.value();
    let e = (qv - 2.0) / (qv - 1.0);
    let d = a.powf(e) - b.powf(e);
    let rest = a2.powf(e) - d;
    if !(a2 > 0.0) || !(rest > 0.0) {
        return Err(ClosedFormError::Invalid(format!(
            "no interval starting at {a2} shares lambda with [{a}, {b}]"
        )));
    }
    Ok(rest.powf(1.0 / e))
}

/// `[1 + (1-q) i k λ]^{1/(1-q)}` on the upper family, 0 on the lower.
pub fn hilhorst_qft(lambda: f64, q: QParam, k: HalfPlanePoint) -> Result<Complex64> {
    require_nonclassical(q)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ClosedFormError::Invalid(format!("lambda must be positive (got {lambda})")));
    }
    if matches!(k.plane(), Plane::Lower | Plane::RealLower) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(q_power(Complex64::i() * k.k() * ((1.0 - q.value()) * lambda), q))
}

/// `i/((2-q)k)` on the half-plane matching the step, 0 on the other.
pub fn heaviside_qft(sign: Sign, q: QParam, k: HalfPlanePoint) -> Result<Complex64> {
    let kv = k.k();
    if kv == Complex64::new(0.0, 0.0) {
        return Err(ClosedFormError::Pole);
    }
    let upper = matches!(k.plane(), Plane::Upper | Plane::RealUpper);
    if upper != (sign == Sign::Plus) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::i() / (kv * (2.0 - q.value())))
}

/// Weight `2π/(2-q)` of `δ(k)` in the transform of `f ≡ 1`.
pub fn constant_qft_delta_weight(q: QParam) -> f64 {
    2.0 * PI / (2.0 - q.value())
}

/// One Hilhorst function in a collision study.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionMember {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Quadrature transform at the study's `q` on its k set.
    pub at_q: Vec<Complex64>,
    /// `at_qprime[j]` holds the transform at `qprime[j]`.
    pub at_qprime: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionStudy {
    pub q: f64,
    pub k: Vec<f64>,
    pub qprime: Vec<f64>,
    pub members: Vec<CollisionMember>,
    /// Closed form `[1 + (1-q) i k λ]^{1/(1-q)}` of the first member.
    pub closed: Vec<Complex64>,
    /// Largest `|F_i - F_j|` at `q` over member pairs and k.
    pub max_dev_at_q: f64,
    /// Largest deviation of any member from its own closed form at `q`.
    pub max_closed_dev: f64,
    /// Smallest, over distinct pairs and `q'`, of the max-norm difference
    /// in k. `None` when every pair is identical.
    pub min_sep_at_qprime: Option<f64>,
}

/// Transform the Hilhorst functions on `pairs` at `q` and at each `q'`.
pub fn collision_study(
    pairs: &[(f64, f64)],
    q: QParam,
    ks: &[f64],
    qprime: &[QParam],
    cfg: &crate::quad::QuadratureConfig,
) -> crate::Result<CollisionStudy> {
    use crate::transform::qft_complex;
    let points: Vec<HalfPlanePoint> = ks.iter().map(|&k| HalfPlanePoint::real_upper(k)).collect::<std::result::Result<_, _>>()?;
    let row = |f: &FunctionSpec, qv: QParam| -> crate::Result<Vec<Complex64>> {
        points.iter().map(|&k| Ok(qft_complex(f, qv, k, cfg)?.value)).collect()
    };
    let mut members = Vec::with_capacity(pairs.len());
    let mut max_closed_dev = 0.0f64;
    for &(a, b) in pairs {
        let p = hilhorst_function(a, b, q)?;
        let f = p.to_function();
        let at_q = row(&f, q)?;
        for (v, &k) in at_q.iter().zip(&points) {
            max_closed_dev = max_closed_dev.max((v - hilhorst_qft(p.lambda, q, k)?).norm());
        }
        let at_qprime = qprime.iter().map(|&qp| row(&f, qp)).collect::<crate::Result<_>>()?;
        members.push(CollisionMember {
            a,
            b,
            lambda: p.lambda,
            at_q,
            at_qprime,
        });
    }
    let closed = match members.first() {
        Some(m) => points.iter().map(|&k| hilhorst_qft(m.lambda, q, k)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let max_norm = |u: &[Complex64], v: &[Complex64]| u.iter().zip(v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let mut max_dev_at_q = 0.0f64;
    let mut min_sep: Option<f64> = None;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let (m1, m2) = (&members[i], &members[j]);
            max_dev_at_q = max_dev_at_q.max(max_norm(&m1.at_q, &m2.at_q));
            if m1.a == m2.a && m1.b == m2.b {
                continue;
            }
            for (r1, r2) in m1.at_qprime.iter().zip(&m2.at_qprime) {
                let d = max_norm(r1, r2);
                min_sep = Some(min_sep.map_or(d, |m| m.min(d)));
            }
        }
    }
    Ok(CollisionStudy {
        q: q.value(),
        k: ks.to_vec(),
        qprime: qprime.iter().map(|q| q.value()).collect(),
        members,
        closed,
        max_dev_at_q,
        max_closed_dev,
        min_sep_at_qprime: min_sep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureConfig;
    use crate::transform::qft_complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tight() -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            ..QuadratureConfig::default()
        }
    }

    #[test]
    fn boundary_example() {
        let p = PowerLawParams::new(2f64.sqrt(), 2.0, 1.0, 2.0).unwrap();
        let k = HalfPlanePoint::real_upper(1.0).unwrap();
        assert_eq!(RegimeTag::classify(2.0, q(1.5)), RegimeTag::Boundary);
        let v = powerlaw_qft_closed(p, q(1.5), k).unwrap();
        let want = c(1.0, -0.5 * 2f64.sqrt()).powi(-2);
        assert!((v - want).norm() < 1e-14);
        assert!((v - c(0.22222, 0.62854)).norm() < 1e-5);
    }

    #[test]
    fn moment_at_k_zero() {
        let p = PowerLawParams::new(1.0, 3.0, 1.0, 2.0).unwrap();
        let v = powerlaw_qft_closed(p, q(1.2), HalfPlanePoint::real_upper(0.0).unwrap()).unwrap();
        assert!((v - c(0.375, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn generic_matches_quadrature() {
        let p = PowerLawParams::new(1.0, 3.0, 1.0, 2.0).unwrap();
        let k = HalfPlanePoint::real_upper(1.0).unwrap();
        assert_eq!(RegimeTag::classify(3.0, q(1.2)), RegimeTag::LowQ);
        let closed = powerlaw_qft_closed(p, q(1.2), k).unwrap();
        let quad = qft_complex(&p.to_function(), q(1.2), k, &tight()).unwrap();
        assert!((closed - quad.value).norm() < 1e-10 * quad.value.norm(), "{closed} vs {}", quad.value);
    }

    #[test]
    fn high_regime_matches_quadrature() {
        let p = PowerLawParams::new(0.8, 4.0, 0.5, 3.0).unwrap();
        for kv in [c(0.7, 0.0), c(-2.0, 0.0), c(1.0, 1.5)] {
            let k = if kv.im == 0.0 {
                HalfPlanePoint::real_upper(kv.re).unwrap()
            } else {
                HalfPlanePoint::upper(kv).unwrap()
            };
            let closed = powerlaw_qft_closed(p, q(1.6), k).unwrap();
            let quad = qft_complex(&p.to_function(), q(1.6), k, &tight()).unwrap();
            assert!((closed - quad.value).norm() < 1e-9 * quad.value.norm(), "{kv}: {closed} vs {}", quad.value);
        }
    }

    #[test]
    fn random_tuples_both_regimes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = tight();
        let (mut low, mut high) = (0, 0);
        while low < 20 || high < 20 {
            let qv = rng.gen_range(1.05..1.95);
            let beta = rng.gen_range(-1.0..8.0);
            let reg = RegimeTag::classify(beta, q(qv));
            if (qv - (1.0 + 1.0 / beta)).abs() < 1e-2 {
                continue;
            }
            let slot = if reg == RegimeTag::LowQ { &mut low } else { &mut high };
            if *slot >= 20 {
                continue;
            }
            *slot += 1;
            let a = rng.gen_range(0.2..2.0);
            let b = a + rng.gen_range(0.1..3.0);
            let p = PowerLawParams::new(rng.gen_range(0.3..2.0), beta, a, b).unwrap();
            let k = HalfPlanePoint::real_upper(rng.gen_range(-5.0..5.0)).unwrap();
            let closed = powerlaw_qft_closed(p, q(qv), k).unwrap();
            let quad = qft_complex(&p.to_function(), q(qv), k, &cfg).unwrap();
            let rel = (closed - quad.value).norm() / quad.value.norm();
            assert!(rel < 1e-8, "{p:?} q={qv} k={:?}: {closed} vs {} ({reg:?})", k.k(), quad.value);
        }
    }

    #[test]
    fn lambda_examples() {
        let l = hilhorst_lambda(1.0, 2.0, q(1.5)).unwrap();
        assert!((l - 2f64.sqrt()).abs() < 1e-15);
        let far = hilhorst_lambda(1.0, 1e6, q(1.5)).unwrap();
        assert!(far > 1.0 && far < 1.0 + 1e-5);
        assert!(hilhorst_lambda(1.0, 1e3, q(1.5)).unwrap() > far);
        assert!(hilhorst_lambda(1.0, 1.0001, q(1.5)).unwrap() > 90.0);
        assert!(hilhorst_lambda(2.0, 1.0, q(1.5)).is_err());
    }

    #[test]
    fn hilhorst_family_normalized() {
        for (a, b, qv) in [(1.0, 2.0, 1.5), (0.5, 4.0, 1.3), (2.0, 3.0, 1.8)] {
            let p = hilhorst_function(a, b, q(qv)).unwrap();
            assert!((p.moment() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degeneration_chain() {
        for (a, b, lambda, qv) in [(1.0, 2.0, 0.7, 1.5), (0.5, 4.0, 1.3, 1.25), (2.0, 3.0, 2.0, 1.8)] {
            let qq = q(qv);
            let p = PowerLawParams::new(lambda, qq.decay_rate(), a, b).unwrap();
            let k = HalfPlanePoint::real_upper(1.3).unwrap();
            let e = (qv - 2.0) / (qv - 1.0);
            let scale = lambda.powf(1.0 / (qv - 1.0)) * (qv - 1.0) / (2.0 - qv) * (a.powf(e) - b.powf(e));
            let want = hilhorst_qft(lambda, qq, k).unwrap() * scale;
            let got = powerlaw_qft_closed(p, qq, k).unwrap();
            assert!((got - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn partner_shares_lambda() {
        let b2 = hilhorst_partner(1.0, 2.0, 1.5, q(1.5)).unwrap();
        assert!((b2 - 6.0).abs() < 1e-12);
        let l1 = hilhorst_lambda(1.0, 2.0, q(1.5)).unwrap();
        let l2 = hilhorst_lambda(1.5, b2, q(1.5)).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        assert!(hilhorst_partner(1.0, 2.0, 3.0, q(1.5)).is_err());
    }

    #[test]
    fn common_lambda_family_collides() {
        let q0 = q(1.5);
        let pairs = [(1.0, 2.0), (0.5, 2.0 / 3.0), (1.5, 6.0)];
        let s = collision_study(&pairs, q0, &[0.5, 1.0, 2.0], &[q(1.3), q(1.7)], &tight()).unwrap();
        assert!(s.max_dev_at_q < 1e-9, "{}", s.max_dev_at_q);
        assert!(s.max_closed_dev < 1e-9);
        assert!(s.min_sep_at_qprime.unwrap() > 1e-3);
        let same = collision_study(&[(1.0, 2.0), (1.0, 2.0)], q0, &[1.0], &[q(1.3)], &tight()).unwrap();
        assert_eq!(same.min_sep_at_qprime, None);
    }

    #[test]
    fn hilhorst_examples() {
        let l = 2f64.sqrt();
        let v = hilhorst_qft(l, q(1.5), HalfPlanePoint::real_upper(0.0).unwrap()).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        let v = hilhorst_qft(l, q(1.5), HalfPlanePoint::real_upper(1.0).unwrap()).unwrap();
        assert!((v - c(0.22222, 0.62854)).norm() < 1e-5);
    }

    #[test]
    fn heaviside_examples() {
        let up = HalfPlanePoint::upper(c(0.0, 2.0)).unwrap();
        let low = HalfPlanePoint::lower(c(0.0, -2.0)).unwrap();
        assert!((heaviside_qft(Sign::Plus, q(1.5), up).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(heaviside_qft(Sign::Plus, q(1.5), low).unwrap(), c(0.0, 0.0));
        assert!((heaviside_qft(Sign::Minus, q(1.5), low).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            heaviside_qft(Sign::Plus, q(1.5), HalfPlanePoint::real_upper(0.0).unwrap()),
            Err(ClosedFormError::Pole)
        ));
    }

    #[test]
    fn heaviside_additivity() {
        // H(x) + H(-x) = 1: each half-plane carries i/((2-q)k)
        for kv in [c(0.5, 1.0), c(-2.0, 0.3)] {
            let up = HalfPlanePoint::upper(kv).unwrap();
            let low = HalfPlanePoint::lower(kv.conj()).unwrap();
            for pt in [up, low] {
                let sum = heaviside_qft(Sign::Plus, q(1.4), pt).unwrap() + heaviside_qft(Sign::Minus, q(1.4), pt).unwrap();
                let one = qft_complex(&FunctionSpec::Constant(1.0), q(1.4), pt, &tight()).unwrap();
                assert!((sum - Complex64::i() / (pt.k() * 0.6)).norm() < 1e-15);
                assert!((sum - one.value).norm() < 1e-9 * sum.norm());
            }
        }
    }

    #[test]
    fn delta_weights() {
        assert!((constant_qft_delta_weight(q(1.5)) - 4.0 * PI).abs() < 1e-14);
        assert!((constant_qft_delta_weight(q(1.0)) - 2.0 * PI).abs() < 1e-15);
        assert!((constant_qft_delta_weight(q(1.9)) - 20.0 * PI).abs() < 1e-12);
    }
}
