//! Acceptance gate. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::panic;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use qfourier::closedform::{
    collision_study, constant_qft_delta_weight, heaviside_qft, hilhorst_function, hilhorst_qft, powerlaw_qft_closed,
    PowerLawParams, RegimeTag,
};
use qfourier::inversion::{roundtrip, EpsilonSchedule, RoundtripConfig};
use qfourier::special::{gamma_ratio_collapse, hyp2f1, Hyp2F1Params};
use qfourier::transform::{qft_complex, qft_real, Sign};
use qfourier::ultra::{
    constant_rep, contour_apply, dirac_rep, gaussian_test_fn, pseudo_poly_invariance_check, ContourSpec,
};
use qfourier::{Complex64, FunctionSpec, HalfPlanePoint, QParam, QuadratureConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

static FAILED: AtomicUsize = AtomicUsize::new(0);

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!("{} {id}: {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    if !pass {
        FAILED.fetch_add(1, Ordering::SeqCst);
    }
}

fn pairwise_max(rows: &[Vec<Complex64>]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    (lo, hi)
}

const KS: [f64; 3] = [0.5, 1.0, 2.0];
const LITERAL_PAIRS: [(f64, f64); 3] = [(1.0, 2.0), (0.5, 4.0), (2.0, 3.0)];

fn transform_rows(pairs: &[(f64, f64)], q0: QParam, at: QParam) -> Vec<Vec<Complex64>> {
    let cfg = QuadratureConfig::default();
    pairs
        .iter()
        .map(|&(a, b)| {
            let f = hilhorst_function(a, b, q0).unwrap().to_function();
            KS.iter()
                .map(|&k| qft_complex(&f, at, HalfPlanePoint::real_upper(k).unwrap(), &cfg).unwrap().value)
                .collect()
        })
        .collect()
}

fn acc1_heaviside_closed_form() {
    let cfg = QuadratureConfig::default();
    let f = FunctionSpec::Heaviside(Sign::Plus);
    let mut worst = 0.0f64;
    for qv in [1.2, 1.5, 1.8] {
        let mut pts: Vec<HalfPlanePoint> = [0.5, 1.0, 2.0, 4.0].iter().map(|&k| HalfPlanePoint::real_upper(k).unwrap()).collect();
        pts.extend([c(0.0, 1.0), c(0.0, 2.0)].map(|k| HalfPlanePoint::upper(k).unwrap()));
        for k in pts {
            let got = qft_complex(&f, q(qv), k, &cfg).unwrap().value;
            worst = worst.max(rel(got, heaviside_qft(Sign::Plus, q(qv), k).unwrap()));
        }
    }
    report(1, "Heaviside transform vs i/((2-q)k)", worst < 1e-6, format!("max rel err {worst:.3e} (< 1e-6)"));
}

fn acc2_power_law_closed_form() {
    let cfg = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 2];
    let mut count = [0usize; 2];
    while count[0] < 50 || count[1] < 50 {
        let qv: f64 = rng.gen_range(1.02..1.98);
        let beta: f64 = rng.gen_range(-1.5..10.0);
        if (qv - (1.0 + 1.0 / beta)).abs() < 1e-2 {
            continue;
        }
        let slot = match RegimeTag::classify(beta, q(qv)) {
            RegimeTag::LowQ => 0,
            RegimeTag::HighQ => 1,
            RegimeTag::Boundary => continue,
        };
        if count[slot] == 50 {
            continue;
        }
        count[slot] += 1;
        let a = rng.gen_range(0.1..3.0);
        let p = PowerLawParams::new(rng.gen_range(0.2..3.0), beta, a, a + rng.gen_range(0.05..4.0)).unwrap();
        let k = HalfPlanePoint::real_upper(rng.gen_range(-8.0..8.0)).unwrap();
        let closed = powerlaw_qft_closed(p, q(qv), k).unwrap();
        let quad = qft_complex(&p.to_function(), q(qv), k, &cfg).unwrap().value;
        worst[slot] = worst[slot].max(rel(closed, quad));
    }
    let pass = worst.iter().all(|&w| w < 1e-5);
    report(
        2,
        "power-law closed form vs quadrature, 50 tuples per regime",
        pass,
        format!("max rel err low-q {:.3e}, high-q {:.3e} (< 1e-5)", worst[0], worst[1]),
    );
}

fn acc3_hilhorst_collision() {
    let q0 = q(1.5);
    let rows = transform_rows(&LITERAL_PAIRS, q0, q0);
    let (_, max_dev) = pairwise_max(&rows);
    let mut closed_dev = 0.0f64;
    for (&(a, b), row) in LITERAL_PAIRS.iter().zip(&rows) {
        let lambda = hilhorst_function(a, b, q0).unwrap().lambda;
        for (v, &k) in row.iter().zip(&KS) {
            closed_dev = closed_dev.max((v - hilhorst_qft(lambda, q0, HalfPlanePoint::real_upper(k).unwrap()).unwrap()).norm());
        }
    }
    // same family with one shared lambda: 1/a - 1/b = 1/2 for every pair
    let shared = collision_study(
        &[(1.0, 2.0), (0.5, 2.0 / 3.0), (1.5, 6.0)],
        q0,
        &KS,
        &[],
        &QuadratureConfig::default(),
    )
    .unwrap();
    println!(
        "     equal-lambda pairs (1,2), (0.5,2/3), (1.5,6): max pairwise deviation {:.3e}, closed-form deviation {:.3e}",
        shared.max_dev_at_q, shared.max_closed_dev
    );
    let pass = max_dev < 1e-6 && closed_dev < 1e-6;
    report(
        3,
        "Hilhorst pairs (1,2), (0.5,4), (2,3) collide at q = 1.5",
        pass,
        format!("max pairwise deviation {max_dev:.3e} (< 1e-6), max closed-form deviation {closed_dev:.3e} (< 1e-6)"),
    );
}

fn acc4_injectivity_restored() {
    let q0 = q(1.5);
    let mut worst = f64::INFINITY;
    for qp in [1.3, 1.7] {
        let (lo, _) = pairwise_max(&transform_rows(&LITERAL_PAIRS, q0, q(qp)));
        worst = worst.min(lo);
    }
    report(
        4,
        "the same functions separate at q' = 1.3 and 1.7",
        worst > 1e-3,
        format!("smallest pairwise max-norm difference {worst:.3e} (> 1e-3)"),
    );
}

fn acc5_classical_limit() {
    let cfg = QuadratureConfig::default();
    let f = FunctionSpec::Gaussian { sigma: 1.0 };
    let classical = |k: f64| c((2.0 * PI).sqrt() * (-0.5 * k * k).exp(), 0.0);
    let mut worst = 0.0f64;
    let mut monotone = true;
    for i in 0..21 {
        let k = -5.0 + 0.5 * i as f64;
        let mut errs = Vec::new();
        let mut noise = 0.0;
        for eps in [1e-2, 1e-3, 1e-4] {
            let r = qft_real(&f, q(1.0 + eps), k, &cfg).unwrap();
            errs.push((r.value - classical(k)).norm());
            noise += r.err;
        }
        worst = worst.max(errs[2]);
        monotone &= errs.windows(2).all(|w| w[1] <= w[0] + noise);
    }
    report(
        5,
        "Gaussian transform tends to the classical one as q -> 1",
        worst < 1e-3 && monotone,
        format!("max |F(k,1+1e-4) - F_cl(k)| {worst:.3e} (< 1e-3) over 21 k, monotone in eps: {monotone}"),
    );
}

fn acc6_round_trip() {
    let gauss = FunctionSpec::Gaussian { sigma: 1.0 };
    let rg = roundtrip(&gauss, &EpsilonSchedule::default(), &RoundtripConfig::default()).unwrap();
    let pl = FunctionSpec::power_law(1.0, 2.0, 1.0, 2.0).unwrap();
    let rp = roundtrip(&pl, &EpsilonSchedule::for_function(&pl), &RoundtripConfig::default()).unwrap();
    report(
        6,
        "round-trip inversion",
        rg.residual < 1e-3 && rp.residual < 1e-2,
        format!(
            "Gaussian residual {:.3e} (< 1e-3), power-law residual outside +-0.05 of jumps {:.3e} (< 1e-2)",
            rg.residual, rp.residual
        ),
    );
}

fn acc7_delta_identification() {
    let mut worst = 0.0f64;
    let mut spread = 0.0f64;
    let mut pass_zeta = true;
    for qv in [1.2, 1.5, 1.8] {
        let want = constant_qft_delta_weight(q(qv));
        let rep = constant_rep(q(qv));
        let vals: Vec<_> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&z| contour_apply(&rep, &gaussian_test_fn, &ContourSpec::default().with_zeta(z)).unwrap())
            .collect();
        for v in &vals {
            worst = worst.max(rel(v.value, c(want, 0.0)));
        }
        for v in &vals[1..] {
            let d = (v.value - vals[0].value).norm();
            spread = spread.max(d / want);
            pass_zeta &= d <= v.err + vals[0].err + 1e-6 * want;
        }
    }
    report(
        7,
        "contour weight of i/((2-q)z) equals 2π/(2-q), for zeta in {0.5, 1, 2}",
        worst < 1e-6 && pass_zeta,
        format!("max rel err {worst:.3e} (< 1e-6), max rel spread over zeta {spread:.3e}"),
    );
}

fn acc8_special_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ident = 0.0f64;
    for _ in 0..100 {
        let a = rng.gen_range(0.0..3.0);
        let b = rng.gen_range(0.1..5.0);
        let z = rng.gen_range(0.0..1.0);
        let got = hyp2f1(&Hyp2F1Params::real(-a, b, b, c(-z, 0.0))).unwrap();
        ident = ident.max((got - c((1.0 + z).powf(a), 0.0)).norm());
    }
    let mut ratio = 0.0f64;
    for qv in [1.1f64, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9] {
        let want = (qv - 1.0) / (2.0 - qv);
        ratio = ratio.max((gamma_ratio_collapse(q(qv)).unwrap() - want).abs() / want);
    }
    let rep = constant_rep(q(1.5));
    let mut poly = 0.0f64;
    for d in 0..=5 {
        poly = poly.max(pseudo_poly_invariance_check(&rep, d, &gaussian_test_fn, &ContourSpec::default(), 800 + d as u64).unwrap());
    }
    report(
        8,
        "special-function identities",
        ident < 1e-10 && ratio < 1e-12 && poly < 1e-8,
        format!(
            "F(-a,b;b;-z) err {ident:.3e} (< 1e-10), gamma ratio rel err {ratio:.3e} (< 1e-12), pseudo-polynomial shift {poly:.3e} (< 1e-8)"
        ),
    );
}

fn acc9_dirac_formula_round_trip() {
    let grid: Vec<f64> = (0..=2400).map(|i| -12.0 + i as f64 * 0.01).collect();
    let rep = dirac_rep(&|t: f64| (-0.5 * t * t).exp(), &grid).unwrap();
    let gamma = ContourSpec {
        truncation: 8.0,
        points_per_line: 1024,
        ..ContourSpec::default()
    };
    let got = contour_apply(&rep.as_analytic(), &gaussian_test_fn, &gamma).unwrap().value;
    // ∫ e^{-t²/2} e^{-t²} dt
    let direct = qfourier::quad::integrate(
        |t| c((-1.5 * t * t).exp(), 0.0),
        -20.0,
        20.0,
        &[0.0],
        &QuadratureConfig::default(),
    )
    .unwrap()
    .value;
    let err = rel(got, direct);
    report(9, "contour functional of the Dirac representative equals ∫ f φ", err < 1e-6, format!("rel err {err:.3e} (< 1e-6)"));
}

fn main() -> ExitCode {
    let criteria: [(u32, fn()); 9] = [
        (1, acc1_heaviside_closed_form),
        (2, acc2_power_law_closed_form),
        (3, acc3_hilhorst_collision),
        (4, acc4_injectivity_restored),
        (5, acc5_classical_limit),
        (6, acc6_round_trip),
        (7, acc7_delta_identification),
        (8, acc8_special_identities),
        (9, acc9_dirac_formula_round_trip),
    ];
    for (id, run) in criteria {
        if panic::catch_unwind(run).is_err() {
            println!("FAIL {id}: aborted with a panic");
            FAILED.fetch_add(1, Ordering::SeqCst);
        }
    }
    let failed = FAILED.load(Ordering::SeqCst);
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
