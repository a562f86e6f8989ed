//! q-deformed elementary functions.
//!
//! The real q-exponential `e_q(x) = [1 + (1-q) x]_+^{1/(1-q)}`, its complex
//! counterpart `e_q(ikx)`, and the two-sheeted kernel
//! `E_q(ikx) = {H(x) H[Im k] - H(-x) H[-Im k]} e_q(ikx)` used by the complex
//! transform.
//!
//! All complex powers use the principal branch of the logarithm. `q = 1` is a
//! separately coded branch and never goes through `1/(1-q)`.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("q = {0} is outside the valid range [1, 2)")]
    OutOfRange(f64),
    #[error("non-finite argument {0}")]
    NonFinite(f64),
    #[error("base of the complex q-power vanishes (k = {k}, x = {x}); the kernel has a pole here")]
    Pole { k: Complex64, x: f64 },
    #[error("ultra_kernel needs Im(k) != 0 (got k = {0}); use the real-axis limit path for real k")]
    RealAxis(Complex64),
}

/// Nonextensivity index `q` in `[1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub const CLASSICAL: QParam = QParam(1.0);

    pub fn new(q: f64) -> Result<Self, QError> {
        if !q.is_finite() || !(1.0..2.0).contains(&q) {
            return Err(QError::OutOfRange(q));
        }
        Ok(QParam(q))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// True iff `q == 1` exactly.
    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `q - 1`.
    #[inline]
    pub fn excess(self) -> f64 {
        self.0 - 1.0
    }

    /// Exponent `1/(1-q)` of the q-power. Infinite for the classical branch.
    #[inline]
    pub fn power(self) -> f64 {
        1.0 / (1.0 - self.0)
    }

    /// Algebraic decay rate `1/(q-1)` of `|e_q(ikx)|` in `|x|`.
    #[inline]
    pub fn decay_rate(self) -> f64 {
        1.0 / (self.0 - 1.0)
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of the real q-exponential, carrying whether the `[.]_+` cutoff fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffReal {
    pub value: f64,
    pub cut: bool,
}

/// `ln(1 + w)` on the principal branch, accurate for small `|w|`.
pub fn ln_1p_complex(w: Complex64) -> Complex64 {
    let re1 = 1.0 + w.re;
    let modulus_sq_m1 = w.re * (2.0 + w.re) + w.im * w.im;
    Complex64::new(0.5 * modulus_sq_m1.ln_1p(), w.im.atan2(re1))
}

/// `(1 + w)^{1/(1-q)}` for `q > 1`, principal branch.
#[inline]
pub(crate) fn q_power_1p(w: Complex64, q: f64) -> Complex64 {
    (ln_1p_complex(w) / (1.0 - q)).exp()
}

/// Real q-exponential for an arbitrary real index (used by q-Gaussians whose
/// index is not restricted to `[1, 2)`).
pub(crate) fn q_exp_any(x: f64, q: f64) -> CutoffReal {
    if q == 1.0 {
        return CutoffReal { value: x.exp(), cut: false };
    }
    let t = (1.0 - q) * x;
    if 1.0 + t <= 0.0 {
        return CutoffReal { value: 0.0, cut: true };
    }
    CutoffReal { value: (t.ln_1p() / (1.0 - q)).exp(), cut: false }
}

/// `e_q(x) = [1 + (1-q)x]_+^{1/(1-q)}`, or `e^x` when `q = 1`.
pub fn q_exp(x: f64, q: QParam) -> Result<CutoffReal, QError> {
    if !x.is_finite() {
        return Err(QError::NonFinite(x));
    }
    Ok(q_exp_any(x, q.value()))
}

/// `e_q(ikx) = [1 + i(1-q)kx]^{1/(1-q)}` on the principal branch; `exp(ikx)` when `q = 1`.
pub fn q_exp_complex(k: Complex64, x: f64, q: QParam) -> Result<Complex64, QError> {
    if !x.is_finite() {
        return Err(QError::NonFinite(x));
    }
    if !k.re.is_finite() || !k.im.is_finite() {
        return Err(QError::NonFinite(if k.re.is_finite() { k.im } else { k.re }));
    }
    let ikx = Complex64::i() * k * x;
    if q.is_classical() {
        return Ok(ikx.exp());
    }
    let w = ikx * (1.0 - q.value());
    if w.re == -1.0 && w.im == 0.0 {
        return Err(QError::Pole { k, x });
    }
    Ok(q_power_1p(w, q.value()))
}

/// Heaviside step with `H(0) = 1/2`.
#[inline]
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// The ultradistribution kernel `E_q(ikx)`, defined off the real k axis.
pub fn ultra_kernel(k: Complex64, x: f64, q: QParam) -> Result<Complex64, QError> {
    if k.im == 0.0 {
        return Err(QError::RealAxis(k));
    }
    let gate = if k.im > 0.0 { heaviside(x) } else { -heaviside(-x) };
    if gate == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(q_exp_complex(k, x, q)? * gate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qparam_range() {
        assert!(QParam::new(1.0).unwrap().is_classical());
        assert!(!QParam::new(1.0 + 1e-12).unwrap().is_classical());
        assert!(QParam::new(1.999).is_ok());
        for bad in [0.99, 2.0, 2.5, f64::NAN, f64::INFINITY] {
            assert!(QParam::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn q_exp_examples() {
        let r = q_exp(0.0, q(1.5)).unwrap();
        assert_eq!(r, CutoffReal { value: 1.0, cut: false });
        let r = q_exp(3.0, q(1.5)).unwrap();
        assert_eq!(r, CutoffReal { value: 0.0, cut: true });
        let r = q_exp(1.0, q(1.0)).unwrap();
        assert!((r.value - std::f64::consts::E).abs() < 1e-15 && !r.cut);
        // base exactly 0 is cut as well
        assert!(q_exp(2.0, q(1.5)).unwrap().cut);
        assert!(q_exp(f64::NAN, q(1.5)).is_err());
    }

    #[test]
    fn q_exp_generic_value() {
        // [1 - 0.5 * 1]^{-2} = 4
        let r = q_exp(1.0, q(1.5)).unwrap();
        assert!((r.value - 4.0).abs() < 1e-14);
    }

    #[test]
    fn q_exp_complex_examples() {
        let v = q_exp_complex(c(1.0, 0.0), 1.0, q(1.5)).unwrap();
        assert!((v - c(0.48, 0.64)).norm() < 1e-15, "{v}");
        let v = q_exp_complex(c(0.0, 0.0), 5.0, q(1.7)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        let v = q_exp_complex(c(2.0, 0.0), 1.0, q(1.0)).unwrap();
        assert!((v - c(2.0f64.cos(), 2.0f64.sin())).norm() < 1e-15);
        assert!((v - c(-0.41615, 0.90930)).norm() < 1e-5);
    }

    #[test]
    fn q_exp_complex_pole() {
        // 1 + i(1-q)kx = 0 at k = -i/((q-1)x)
        let err = q_exp_complex(c(0.0, -2.0), 1.0, q(1.5)).unwrap_err();
        assert!(matches!(err, QError::Pole { .. }));
    }

    #[test]
    fn ultra_kernel_examples() {
        let v = ultra_kernel(c(0.0, 1.0), 1.0, q(1.5)).unwrap();
        assert!((v - c(4.0 / 9.0, 0.0)).norm() < 1e-15);
        let v = ultra_kernel(c(0.0, 1.0), -1.0, q(1.5)).unwrap();
        assert_eq!(v, c(0.0, 0.0));
        let v = ultra_kernel(c(0.0, -1.0), -1.0, q(1.5)).unwrap();
        assert!((v - c(-4.0 / 9.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            ultra_kernel(c(1.0, 0.0), 1.0, q(1.5)),
            Err(QError::RealAxis(_))
        ));
    }

    #[test]
    fn ln_1p_matches_ln_away_from_zero() {
        for w in [c(0.3, -0.7), c(-0.5, 2.0), c(10.0, -3.0), c(-3.0, 1e-3)] {
            let a = ln_1p_complex(w);
            let b = (c(1.0, 0.0) + w).ln();
            assert!((a - b).norm() < 1e-14, "{w}: {a} vs {b}");
        }
        let tiny = c(1e-12, -3e-13);
        assert!((ln_1p_complex(tiny) - tiny).norm() < 1e-24);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn modulus_decays_on_real_axis(qv in 1.001f64..1.999, k in -50.0f64..50.0, x in -50.0f64..50.0) {
                let qq = q(qv);
                let v = q_exp_complex(c(k, 0.0), x, qq).unwrap();
                let expect = (1.0 + (1.0 - qv).powi(2) * k * k * x * x).powf(1.0 / (2.0 * (1.0 - qv)));
                prop_assert!((v.norm() - expect).abs() <= 1e-12 * expect.max(1e-300) + 1e-300);
                prop_assert!(v.norm() <= 1.0 + 1e-15);
            }

            #[test]
            fn conjugation_symmetry(qv in 1.0f64..1.999, k in -20.0f64..20.0, x in -20.0f64..20.0) {
                let qq = q(qv);
                let plus = q_exp_complex(c(k, 0.0), x, qq).unwrap();
                let minus = q_exp_complex(c(-k, 0.0), x, qq).unwrap();
                prop_assert!((minus - plus.conj()).norm() <= 1e-14);
            }

            #[test]
            fn continuity_at_q_one(k in -5.0f64..5.0, x in -5.0f64..5.0) {
                let near = q_exp_complex(c(k, 0.0), x, q(1.0 + 1e-4)).unwrap();
                let exact = Complex64::new(0.0, k * x).exp();
                // leading correction is a phase shift of (q-1)(kx)^2/2
                prop_assert!((near - exact).norm() < 1e-4 * (k * x).powi(2) + 1e-6);
            }

            #[test]
            fn kernel_vanishes_on_opposite_quadrants(
                qv in 1.0f64..1.999, kr in -10.0f64..10.0, ki in 0.01f64..10.0, x in 0.01f64..10.0
            ) {
                let qq = q(qv);
                prop_assert_eq!(ultra_kernel(c(kr, -ki), x, qq).unwrap(), c(0.0, 0.0));
                prop_assert_eq!(ultra_kernel(c(kr, ki), -x, qq).unwrap(), c(0.0, 0.0));
            }
        }
    }
}
