//! Self-check suites run by `qft verify`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::closedform::{
    collision_study, constant_qft_delta_weight, heaviside_qft, hilhorst_lambda, powerlaw_qft_closed, PowerLawParams,
    RegimeTag,
};
use crate::inversion::{inverse_ft, q1_slice, roundtrip, slice_probe, EpsilonSchedule, RoundtripConfig};
use crate::qcore::QParam;
use crate::quad::QuadratureConfig;
use crate::special::{gamma_ratio_collapse, hyp2f1, log_gamma, CutSide, Hyp2F1Params};
use crate::transform::{qft_complex, FunctionSpec, HalfPlanePoint, Sign};
use crate::ultra::{
    contour_apply, dirac_rep, gaussian_test_fn, measure_delta_weight, pseudo_poly_invariance_check, constant_rep,
    AnalyticRep, ContourSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ClosedForms,
    Special,
    Ultra,
    Inversion,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::ClosedForms => "closedforms",
            Suite::Special => "special",
            Suite::Ultra => "ultra",
            Suite::Inversion => "inversion",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closedforms" => Ok(Suite::ClosedForms),
            "special" => Ok(Suite::Special),
            "ultra" => Ok(Suite::Ultra),
            "inversion" => Ok(Suite::Inversion),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite '{other}' (expected closedforms, special, ultra, inversion or all)"
            )),
        }
    }
}

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(suite: Suite) -> Self {
        Recorder {
            suite: suite.as_str(),
            checks: Vec::new(),
        }
    }

    /// Passes when `measured < threshold`.
    fn below(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured.is_finite() && measured < threshold, measured, threshold, String::new());
    }

    /// Passes when `measured > threshold`.
    fn above(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured.is_finite() && measured > threshold, measured, threshold, String::new());
    }

    fn outcome(&mut self, name: &str, r: crate::Result<(f64, f64, bool)>) {
        match r {
            Ok((m, t, above)) => {
                if above {
                    self.above(name, m, t)
                } else {
                    self.below(name, m, t)
                }
            }
            Err(e) => self.push(name, false, f64::NAN, f64::NAN, e.to_string()),
        }
    }

    fn push(&mut self, name: &str, passed: bool, measured: f64, threshold: f64, detail: String) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.to_string(),
            passed,
            measured,
            threshold,
            detail,
        });
    }
}

fn q(v: f64) -> QParam {
    QParam::new(v).expect("suite q values lie in [1, 2)")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Run one suite (or all of them) and return its checks in a fixed order.
pub fn run(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::All => [Suite::Special, Suite::ClosedForms, Suite::Ultra, Suite::Inversion]
            .into_iter()
            .flat_map(run)
            .collect(),
        Suite::Special => special_suite(),
        Suite::ClosedForms => closedform_suite(),
        Suite::Ultra => ultra_suite(),
        Suite::Inversion => inversion_suite(),
    }
}

fn special_suite() -> Vec<Check> {
    let mut r = Recorder::new(Suite::Special);

    r.outcome("hyp2f1 F(-a,b;b;-z) = (1+z)^a, 100 draws", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a = rng.gen_range(0.0..3.0);
            let b = rng.gen_range(0.1..5.0);
            let z = c(rng.gen_range(-0.9..2.0), rng.gen_range(-1.0..1.0));
            let got = hyp2f1(&Hyp2F1Params::new(c(-a, 0.0), c(b, 0.0), c(b, 0.0), -z))?;
            let want = ((c(1.0, 0.0) + z).ln() * a).exp();
            worst = worst.max((got - want).norm());
        }
        Ok((worst, 1e-10, false))
    })());

    r.outcome("gamma ratio collapses to (q-1)/(2-q) for 9 q values", (|| {
        let mut worst = 0.0f64;
        for i in 1..=9 {
            let qv = 1.0 + 0.1 * i as f64 - if i == 9 { 0.05 } else { 0.0 };
            let got = gamma_ratio_collapse(q(qv))?;
            let want = (qv - 1.0) / (2.0 - qv);
            worst = worst.max((got - want).abs() / want);
        }
        Ok((worst, 1e-12, false))
    })());

    r.outcome("log-gamma at 3+4i", (|| {
        let got = log_gamma(c(3.0, 4.0))?;
        Ok((rel(got, c(-1.7566267846037841, 4.7426644380346579)), 1e-13, false))
    })());

    let refs: [(&str, Hyp2F1Params, Complex64); 4] = [
        ("hyp2f1(1,1;2;1/2) = ln 4", Hyp2F1Params::real(1.0, 1.0, 2.0, c(0.5, 0.0)), c(4f64.ln(), 0.0)),
        (
            "hyp2f1 far argument -5+2i",
            Hyp2F1Params::real(0.3, 1.7, 2.9, c(-5.0, 2.0)),
            c(0.669827983804927, 0.0542569444798351),
        ),
        (
            "hyp2f1 near unit argument 0.95+0.01i",
            Hyp2F1Params::real(0.5, 1.5, 2.0, c(0.95, 0.01)),
            c(2.464508522205428, 0.1144318645045687),
        ),
        (
            "hyp2f1 on the cut at z = 3 from above",
            Hyp2F1Params::real(0.5, 0.25, 1.3, c(3.0, 0.0)).with_side(CutSide::Above),
            c(1.0067855269184562, 0.3863763924119331),
        ),
    ];
    for (name, p, want) in refs {
        r.outcome(name, hyp2f1(&p).map(|got| (rel(got, want), 1e-11, false)).map_err(Into::into));
    }
    r.checks
}

fn closedform_suite() -> Vec<Check> {
    let mut r = Recorder::new(Suite::ClosedForms);
    let cfg = QuadratureConfig::default();

    r.outcome("heaviside transform i/((2-q)k)", (|| {
        let f = FunctionSpec::Heaviside(Sign::Plus);
        let mut worst = 0.0f64;
        for qv in [1.2, 1.5, 1.8] {
            let mut points: Vec<HalfPlanePoint> =
                [0.5, 1.0, 2.0, 4.0].iter().map(|&k| HalfPlanePoint::real_upper(k)).collect::<Result<_, _>>()?;
            points.push(HalfPlanePoint::upper(c(0.0, 1.0))?);
            points.push(HalfPlanePoint::upper(c(0.0, 2.0))?);
            for k in points {
                let got = qft_complex(&f, q(qv), k, &cfg)?.value;
                worst = worst.max(rel(got, heaviside_qft(Sign::Plus, q(qv), k)?));
            }
        }
        Ok((worst, 1e-6, false))
    })());

    for (name, regime) in [
        ("power law closed form, low-q regime, 10 draws", RegimeTag::LowQ),
        ("power law closed form, high-q regime, 10 draws", RegimeTag::HighQ),
    ] {
        r.outcome(name, (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(if regime == RegimeTag::LowQ { 31 } else { 32 });
            let mut worst = 0.0f64;
            let mut n = 0;
            while n < 10 {
                let qv = rng.gen_range(1.05..1.95);
                let beta = rng.gen_range(-1.0..8.0);
                if RegimeTag::classify(beta, q(qv)) != regime || (qv - 1.0 - 1.0 / beta).abs() < 1e-2 {
                    continue;
                }
                n += 1;
                let a = rng.gen_range(0.2..2.0);
                let p = PowerLawParams::new(rng.gen_range(0.3..2.0), beta, a, a + rng.gen_range(0.1..3.0))?;
                let k = HalfPlanePoint::real_upper(rng.gen_range(-5.0..5.0))?;
                let closed = powerlaw_qft_closed(p, q(qv), k)?;
                let quad = qft_complex(&p.to_function(), q(qv), k, &cfg)?.value;
                worst = worst.max(rel(closed, quad));
            }
            Ok((worst, 1e-5, false))
        })());
    }

    r.outcome("power law boundary example", (|| {
        let p = PowerLawParams::new(2f64.sqrt(), 2.0, 1.0, 2.0)?;
        let got = powerlaw_qft_closed(p, q(1.5), HalfPlanePoint::real_upper(1.0)?)?;
        Ok(((got - c(0.22222, 0.62854)).norm(), 1e-5, false))
    })());

    r.outcome("power law at k = 0 is the moment 3/8", (|| {
        let p = PowerLawParams::new(1.0, 3.0, 1.0, 2.0)?;
        let got = powerlaw_qft_closed(p, q(1.2), HalfPlanePoint::real_upper(0.0)?)?;
        Ok(((got - c(0.375, 0.0)).norm(), 1e-14, false))
    })());

    r.outcome("hilhorst lambda(1, 2, 1.5) = sqrt 2", (|| {
        Ok(((hilhorst_lambda(1.0, 2.0, q(1.5))? - 2f64.sqrt()).abs(), 1e-14, false))
    })());

    let pairs = [(1.0, 2.0), (0.5, 2.0 / 3.0), (1.5, 6.0)];
    let study = collision_study(&pairs, q(1.5), &[0.5, 1.0, 2.0], &[q(1.3), q(1.7)], &cfg);
    match study {
        Ok(s) => {
            r.below("equal-lambda hilhorst functions share one transform at q = 1.5", s.max_dev_at_q, 1e-6);
            r.below("shared transform equals the closed form", s.max_closed_dev, 1e-6);
            r.above(
                "the same functions separate at q' = 1.3 and 1.7",
                s.min_sep_at_qprime.unwrap_or(f64::NAN),
                1e-3,
            );
        }
        Err(e) => r.push("hilhorst collision study", false, f64::NAN, f64::NAN, e.to_string()),
    }

    let weights = [(1.0, 2.0 * PI), (1.5, 4.0 * PI), (1.9, 20.0 * PI)];
    let worst = weights
        .iter()
        .map(|&(qv, w)| (constant_qft_delta_weight(q(qv)) - w).abs() / w)
        .fold(0.0, f64::max);
    r.below("delta weight 2π/(2-q) at q = 1, 1.5, 1.9", worst, 1e-14);
    r.checks
}

fn ultra_suite() -> Vec<Check> {
    let mut r = Recorder::new(Suite::Ultra);
    let gamma = ContourSpec::default();

    r.outcome("contour weight of i/((2-q)z) is 2π/(2-q), incl. 4π at q = 1.5", (|| {
        let mut worst = 0.0f64;
        for qv in [1.2, 1.5, 1.8] {
            let got = measure_delta_weight(q(qv), &gamma)?;
            worst = worst.max(rel(got.value, c(constant_qft_delta_weight(q(qv)), 0.0)));
        }
        Ok((worst, 1e-6, false))
    })());

    r.outcome("contour value independent of zeta in {0.5, 1, 2}", (|| {
        let f = constant_rep(q(1.5));
        let vals = [0.5, 1.0, 2.0]
            .iter()
            .map(|&z| contour_apply(&f, &gaussian_test_fn, &gamma.with_zeta(z)).map(|e| e.value))
            .collect::<Result<Vec<_>, _>>()?;
        let spread = vals.iter().map(|v| (v - vals[0]).norm()).fold(0.0, f64::max);
        Ok((spread / vals[0].norm(), 1e-9, false))
    })());

    r.outcome("pseudo-polynomials of degree 0-5 leave the functional unchanged", (|| {
        let f = constant_rep(q(1.5));
        let mut worst = 0.0f64;
        for d in 0..=5 {
            worst = worst.max(pseudo_poly_invariance_check(&f, d, &gaussian_test_fn, &gamma, 100 + d as u64)?);
        }
        Ok((worst, 1e-8, false))
    })());

    r.outcome("point mass at 0.3 returns phi(0.3)", (|| {
        let f = AnalyticRep::new(|z| 1.0 / (c(0.0, 2.0 * PI) * (0.3 - z)), 0);
        let got = contour_apply(&f, &gaussian_test_fn, &gamma)?;
        Ok(((got.value - c((-0.09f64).exp(), 0.0)).norm(), 1e-10, false))
    })());

    r.outcome("Dirac formula round trip for a Gaussian density", (|| {
        let grid: Vec<f64> = (0..=2400).map(|i| -12.0 + i as f64 * 0.01).collect();
        let rep = dirac_rep(&|t: f64| (-0.5 * t * t).exp(), &grid)?;
        let g = ContourSpec {
            truncation: 8.0,
            points_per_line: 1024,
            ..gamma
        };
        let got = contour_apply(&rep.as_analytic(), &gaussian_test_fn, &g)?;
        Ok((rel(got.value, c((2.0 * PI / 3.0).sqrt(), 0.0)), 1e-6, false))
    })());
    r.checks
}

fn inversion_suite() -> Vec<Check> {
    let mut r = Recorder::new(Suite::Inversion);
    let cfg = QuadratureConfig::default();
    let gauss = FunctionSpec::Gaussian { sigma: 1.0 };
    let sched = EpsilonSchedule::default();

    r.outcome("q -> 1 slice of a Gaussian at k = 1", (|| {
        let s = q1_slice(&gauss, &[1.0], &sched, &cfg)?;
        Ok(((s.values[0].re - (2.0 * PI).sqrt() * (-0.5f64).exp()).abs(), 1e-5, false))
    })());

    r.outcome("slice error decreases along the schedule at k = 0.5, 1, 2", (|| {
        let mut bad = 0.0;
        for k in [0.5, 1.0, 2.0] {
            if !slice_probe(&gauss, k, &sched, &cfg)?.monotone {
                bad += 1.0;
            }
        }
        Ok((bad, 0.5, false))
    })());

    r.outcome("inverse integral of the Gaussian pair", (|| {
        let k: Vec<f64> = (-800..=800).map(|i| i as f64 * 0.05).collect();
        let g: Vec<Complex64> = k.iter().map(|&k| c((2.0 * PI).sqrt() * (-0.5 * k * k).exp(), 0.0)).collect();
        let x: Vec<f64> = (-30..=30).map(|i| i as f64 * 0.2).collect();
        let inv = inverse_ft(&g, &k, &x)?;
        let worst = x.iter().zip(&inv.values).map(|(x, v)| (v - (-0.5 * x * x).exp()).abs()).fold(0.0, f64::max);
        Ok((worst, 1e-6, false))
    })());

    r.outcome("Gaussian round trip", (|| {
        let res = roundtrip(&gauss, &sched, &RoundtripConfig::default())?;
        Ok((res.residual, 1e-3, false))
    })());

    r.outcome("power law round trip outside jump windows", (|| {
        let f = FunctionSpec::power_law(1.0, 2.0, 1.0, 2.0)?;
        let res = roundtrip(&f, &EpsilonSchedule::for_function(&f), &RoundtripConfig::default())?;
        Ok((res.residual, 1e-2, false))
    })());
    r.checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::ClosedForms, Suite::Special, Suite::Ultra, Suite::Inversion, Suite::All] {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn special_and_ultra_pass() {
        for s in [Suite::Special, Suite::Ultra] {
            for c in run(s) {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
