use std::path::Path;

use num_complex::Complex64;
use qfourier::closedform::{self, collision_study};
use qfourier::inversion::{self, EpsilonSchedule, Extrapolation, InversionError, RoundtripConfig, Window};
use qfourier::quad::QuadError;
use qfourier::transform::{qft_surface, SampledFunction, Sign, TransformError};
use qfourier::ultra::{self, ContourSpec, UltraError};
use qfourier::verify::{self, Suite};
use qfourier::{Error, FunctionSpec, HalfPlanePoint, Plane, QParam, QuadratureConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CollideArgs, Command, DeltaArgs, FunctionArgs, InvertArgs, QuadArgs, TransformArgs, VerifyArgs};
use crate::output::{self, fmt_f64, Format, Report, TransformRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// A failed run: exit code plus the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARTIAL,
            message: message.into(),
        }
    }
}

fn is_numerical(e: &Error) -> bool {
    let quad = |q: &QuadError| !matches!(q, QuadError::Config(_));
    let transform = |t: &TransformError| match t {
        TransformError::Convergence(_) => true,
        TransformError::Quad(q) => quad(q),
        _ => false,
    };
    match e {
        Error::Special(_) => true,
        Error::Quad(q) => quad(q),
        Error::Transform(t) => transform(t),
        Error::ClosedForm(closedform::ClosedFormError::Special { .. }) => true,
        Error::Ultra(u) => matches!(u, UltraError::Truncation { .. } | UltraError::NonFinite(_)),
        Error::Inversion(i) => match i {
            InversionError::LimitFailure { .. } => true,
            InversionError::Transform(t) => transform(t),
            _ => false,
        },
        _ => false,
    }
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        if is_numerical(&e) {
            Failure::numerical(e.to_string())
        } else {
            Failure::usage(e.to_string())
        }
    }
}

type Outcome = Result<i32, Failure>;

pub fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::Transform(a) => transform(cmd, a),
        Command::Invert(a) => invert(cmd, a),
        Command::Collide(a) => collide(cmd, a),
        Command::Verify(a) => verify_cmd(cmd, a),
        Command::Delta(a) => delta(cmd, a),
    }
}

fn qparam(q: f64) -> Result<QParam, Failure> {
    QParam::new(q).map_err(|e| Failure::usage(e.to_string()))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("{what}: cannot parse '{}' as a number", t.trim())))
        })
        .collect()
}

fn quad_config(args: &QuadArgs, base: QuadratureConfig) -> Result<QuadratureConfig, Failure> {
    let cfg = QuadratureConfig {
        rel_tol: args.rel_tol.unwrap_or(base.rel_tol),
        abs_tol: args.abs_tol.unwrap_or(base.abs_tol),
        max_subdivisions: args.max_subdivisions.unwrap_or(base.max_subdivisions),
        ..base
    };
    cfg.validate()?;
    Ok(cfg)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn k_range(kmin: f64, kmax: f64, nk: usize) -> Result<Vec<f64>, Failure> {
    if nk == 0 {
        return Err(Failure::usage("nk must be at least 1"));
    }
    if !(kmin.is_finite() && kmax.is_finite()) || kmin > kmax {
        return Err(Failure::usage(format!("need finite kmin <= kmax (got {kmin}, {kmax})")));
    }
    if nk == 1 && kmin != kmax {
        return Err(Failure::usage("nk = 1 needs kmin = kmax"));
    }
    Ok(linspace(kmin, kmax, nk))
}

fn require<T: Copy>(v: Option<T>, flag: &str, f: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--f {f} needs --{flag}")))
}

fn read_samples(path: &Path) -> Result<SampledFunction, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::usage(format!("cannot read samples {}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let parsed = (rec.get(0).map(str::parse::<f64>), rec.get(1).map(str::parse::<f64>));
        match parsed {
            (Some(Ok(x)), Some(Ok(y))) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => continue,
            _ => return Err(Failure::usage(format!("{}: line {} is not an x,y pair", path.display(), i + 1))),
        }
    }
    Ok(SampledFunction::new(xs, ys)?)
}

fn build_function(args: &FunctionArgs, q_hint: Option<f64>) -> Result<FunctionSpec, Failure> {
    let name = args.f.as_deref().ok_or_else(|| Failure::usage("missing --f"))?;
    let f = match name {
        "heaviside+" => FunctionSpec::Heaviside(Sign::Plus),
        "heaviside-" => FunctionSpec::Heaviside(Sign::Minus),
        "constant" => FunctionSpec::Constant(args.value.unwrap_or(1.0)),
        "powerlaw" => FunctionSpec::power_law(
            require(args.lambda, "lambda", name)?,
            require(args.beta, "beta", name)?,
            require(args.a, "a", name)?,
            require(args.b, "b", name)?,
        )?,
        "hilhorst" => {
            let q0 = args
                .q0
                .or(q_hint)
                .ok_or_else(|| Failure::usage("--f hilhorst needs --q0 or a q value"))?;
            closedform::hilhorst_function(require(args.a, "a", name)?, require(args.b, "b", name)?, qparam(q0)?)?
                .to_function()
        }
        "gaussian" => FunctionSpec::gaussian(args.sigma.unwrap_or(1.0))?,
        "qgaussian" => FunctionSpec::QGaussian {
            q: require(args.qg, "qg", name)?,
            beta: args.qg_beta.unwrap_or(1.0),
        },
        "sampled" => {
            let path = args
                .samples
                .as_deref()
                .ok_or_else(|| Failure::usage("--f sampled needs --samples"))?;
            FunctionSpec::Sampled(read_samples(path)?)
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown function '{other}' (expected heaviside+, heaviside-, constant, powerlaw, hilhorst, gaussian, qgaussian or sampled)"
            )))
        }
    };
    f.validate()?;
    Ok(f)
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    output::emit(out, bytes).map_err(|e| match out {
        Some(p) => Failure::usage(format!("cannot write {}: {e}", p.display())),
        None => Failure::usage(format!("cannot write to standard output: {e}")),
    })
}

fn json_report<C: Serialize, R: Serialize, D: Serialize>(config: &C, results: R, diagnostics: D) -> Result<Vec<u8>, Failure> {
    output::to_json(&Report {
        config,
        results,
        diagnostics,
    })
    .map_err(Failure::usage)
}

fn transform(cmd: &Command, a: &TransformArgs) -> Outcome {
    let qs: Vec<f64> = match (a.q, a.q_list.as_deref()) {
        (Some(_), Some(_)) => return Err(Failure::usage("give either --q or --q-list, not both")),
        (Some(q), None) => vec![q],
        (None, Some(list)) => parse_list(list, "--q-list")?,
        (None, None) => return Err(Failure::usage("missing --q or --q-list")),
    };
    let q_list = qs.iter().map(|&q| qparam(q)).collect::<Result<Vec<_>, _>>()?;
    let plane: Plane = a.plane.parse().map_err(Failure::usage)?;
    let ks = k_range(a.kmin, a.kmax, a.nk)?;
    let points = ks
        .iter()
        .map(|&k| HalfPlanePoint::new(Complex64::new(k, a.kim), plane))
        .collect::<Result<Vec<_>, _>>()?;
    let f = build_function(&a.function, qs.first().copied())?;
    let cfg = quad_config(&a.quad, QuadratureConfig::default())?;
    let format = Format::resolve(a.output.format.as_deref(), a.output.out.as_deref(), Format::Csv).map_err(Failure::usage)?;

    let surface = qft_surface(&f, &q_list, &points, &cfg)?;
    let nk = points.len();
    let mut rows = Vec::with_capacity(surface.values.len());
    let mut diagnostics = Vec::new();
    for (qi, q) in q_list.iter().enumerate() {
        for (ki, p) in points.iter().enumerate() {
            let (k, v) = (p.k(), surface.value(qi, ki));
            rows.push(TransformRow {
                k_re: k.re,
                k_im: k.im,
                plane: p.plane().as_str().to_string(),
                q: q.value(),
                f_re: v.re,
                f_im: v.im,
                err: surface.error(qi, ki),
            });
            if let Some(msg) = surface.failure(qi, ki) {
                eprintln!("warning: cell q = {}, k = {} failed: {msg}", q.value(), k);
                diagnostics.push(json!({"row": qi * nk + ki, "q": q.value(), "k_re": k.re, "k_im": k.im, "message": msg}));
            }
        }
    }
    let bytes = match format {
        Format::Csv => output::transform_csv(&rows).map_err(Failure::usage)?,
        Format::Json => json_report(cmd, &rows, &diagnostics)?,
    };
    write_out(a.output.out.as_deref(), &bytes)?;
    let failed = surface.failed_cells();
    if failed > 0 {
        eprintln!("{failed} of {} cells did not converge", rows.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn invert(cmd: &Command, a: &InvertArgs) -> Outcome {
    let f = build_function(&a.function, None)?;
    let extrapolation = if a.no_richardson {
        Extrapolation::None
    } else {
        Extrapolation::Richardson
    };
    let eps = match a.eps_list.as_deref() {
        Some(list) => parse_list(list, "--eps-list")?,
        None => EpsilonSchedule::for_function(&f).eps().to_vec(),
    };
    let sched = EpsilonSchedule::new(eps, extrapolation)?;
    let x_grid = match (a.xmin, a.xmax) {
        (None, None) => None,
        (Some(lo), Some(hi)) => {
            if !(lo < hi) || a.nx < 2 {
                return Err(Failure::usage("need xmin < xmax and nx >= 2"));
            }
            Some(linspace(lo, hi, a.nx))
        }
        _ => return Err(Failure::usage("--xmin and --xmax go together")),
    };
    let window = match a.window.as_str() {
        "auto" => Window::Auto,
        "none" => Window::None,
        "lanczos" => Window::Lanczos,
        other => return Err(Failure::usage(format!("unknown window '{other}' (expected auto, none or lanczos)"))),
    };
    let base = RoundtripConfig::default();
    let cfg = RoundtripConfig {
        quad: quad_config(&a.quad, base.quad)?,
        k_max: a.kmax,
        x_grid,
        window,
        ..base
    };
    let format = Format::resolve(a.output.format.as_deref(), a.output.out.as_deref(), Format::Csv).map_err(Failure::usage)?;

    let res = inversion::roundtrip(&f, &sched, &cfg)?;
    let f_true: Vec<f64> = res.x_grid.iter().map(|&x| f.eval(x)).collect();
    let mut diagnostics = vec![json!({
        "kind": "summary",
        "residual": res.residual,
        "imag_residue": res.imag_residue,
        "k_max": res.k_max,
        "nk": res.nk,
        "lanczos": res.lanczos,
        "eps": sched.eps(),
    })];
    for p in &res.slice_diagnostics {
        diagnostics.push(json!({
            "kind": "probe",
            "k": p.k,
            "extrapolated": [p.extrapolated.re, p.extrapolated.im],
            "classical": [p.classical.re, p.classical.im],
            "errors": p.errors,
            "monotone": p.monotone,
        }));
    }
    for w in &res.warnings {
        eprintln!("warning: {w}");
        diagnostics.push(json!({"kind": "warning", "message": w}));
    }
    let bytes = match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = res
                .x_grid
                .iter()
                .zip(&res.f_rec)
                .zip(&f_true)
                .map(|((&x, &r), &t)| vec![fmt_f64(x), fmt_f64(r), fmt_f64(t)])
                .collect();
            output::table_csv(&["x", "f_rec", "f_true"], &rows).map_err(Failure::usage)?
        }
        Format::Json => {
            let rows: Vec<Value> = res
                .x_grid
                .iter()
                .zip(&res.f_rec)
                .zip(&f_true)
                .map(|((&x, &r), &t)| json!({"x": x, "f_rec": r, "f_true": t}))
                .collect();
            json_report(cmd, rows, &diagnostics)?
        }
    };
    write_out(a.output.out.as_deref(), &bytes)?;
    eprintln!(
        "residual {:e}, imaginary residue {:e}, k_max {}, {} wavenumbers",
        res.residual, res.imag_residue, res.k_max, res.nk
    );
    Ok(EXIT_OK)
}

fn parse_pairs(s: &str) -> Result<Vec<(f64, f64)>, Failure> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v = parse_list(t, "--pairs")?;
            match v[..] {
                [a, b] if 0.0 < a && a < b && b.is_finite() => Ok((a, b)),
                [a, b] => Err(Failure::usage(format!("pair ({a}, {b}) must satisfy 0 < a < b"))),
                _ => Err(Failure::usage(format!("malformed pair '{}' (expected a,b)", t.trim()))),
            }
        })
        .collect()
}

const COLLIDE_TOL: f64 = 1e-6;
const SEPARATE_TOL: f64 = 1e-3;

fn collide(cmd: &Command, a: &CollideArgs) -> Outcome {
    let pairs = parse_pairs(a.pairs.as_deref().ok_or_else(|| Failure::usage("missing --pairs"))?)?;
    if pairs.len() < 2 {
        return Err(Failure::usage(format!("need at least 2 pairs (got {})", pairs.len())));
    }
    let q = qparam(a.q.ok_or_else(|| Failure::usage("missing --q"))?)?;
    let ks = match (a.kmin, a.kmax, a.nk) {
        (None, None, None) => vec![0.5, 1.0, 2.0],
        (Some(lo), Some(hi), Some(n)) => k_range(lo, hi, n)?,
        _ => return Err(Failure::usage("--kmin, --kmax and --nk go together")),
    };
    if Format::resolve(a.output.format.as_deref(), a.output.out.as_deref(), Format::Json).map_err(Failure::usage)? != Format::Json {
        return Err(Failure::usage("collide writes JSON only"));
    }
    let qprime: Vec<QParam> = [q.value() - 0.2, q.value() + 0.2]
        .into_iter()
        .filter_map(|v| QParam::new(v).ok())
        .collect();
    let cfg = quad_config(&a.quad, QuadratureConfig::default())?;

    let study = collision_study(&pairs, q, &ks, &qprime, &cfg)?;
    let mut rows = Vec::new();
    for m in &study.members {
        let qs = std::iter::once((study.q, &m.at_q)).chain(study.qprime.iter().copied().zip(&m.at_qprime));
        for (qv, vals) in qs {
            for (&k, v) in study.k.iter().zip(vals) {
                rows.push(json!({"a": m.a, "b": m.b, "lambda": m.lambda, "q": qv, "k": k, "F_re": v.re, "F_im": v.im}));
            }
        }
    }
    let collide_at_q = study.max_dev_at_q < COLLIDE_TOL;
    let separate = study.min_sep_at_qprime.map(|d| d > SEPARATE_TOL);
    let mut notes = Vec::new();
    if study.min_sep_at_qprime.is_none() {
        notes.push("separation check skipped: all pairs are identical".to_string());
    }
    if qprime.is_empty() {
        notes.push("separation check skipped: neither q - 0.2 nor q + 0.2 is a valid index".to_string());
    }
    let closed: Vec<[f64; 2]> = study.closed.iter().map(|c| [c.re, c.im]).collect();
    let diagnostics = vec![json!({
        "kind": "verdict",
        "collide_at_q": collide_at_q,
        "separate_at_qprime": separate,
        "max_dev_at_q": study.max_dev_at_q,
        "max_closed_dev": study.max_closed_dev,
        "min_sep_at_qprime": study.min_sep_at_qprime,
        "qprime": study.qprime,
        "closed_form_first_pair": closed,
        "notes": notes,
    })];
    for n in &notes {
        eprintln!("note: {n}");
    }
    let bytes = json_report(cmd, rows, diagnostics)?;
    write_out(a.output.out.as_deref(), &bytes)?;
    eprintln!(
        "max deviation at q = {}: {:e}; collide_at_q = {collide_at_q}, separate_at_qprime = {}",
        study.q,
        study.max_dev_at_q,
        separate.map_or("skipped".to_string(), |s| s.to_string())
    );
    Ok(EXIT_OK)
}

fn verify_cmd(cmd: &Command, a: &VerifyArgs) -> Outcome {
    let suite: Suite = a.suite.parse().map_err(Failure::usage)?;
    let format = Format::resolve(a.output.format.as_deref(), a.output.out.as_deref(), Format::Json).map_err(Failure::usage)?;
    let checks = verify::run(suite);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let bytes = match format {
        Format::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|c| {
                    json!({"suite": c.suite, "name": c.name, "passed": c.passed,
                           "measured": c.measured, "threshold": c.threshold, "detail": c.detail})
                })
                .collect();
            let summary = json!({"kind": "summary", "checks": checks.len(), "failed": failed});
            json_report(cmd, rows, vec![summary])?
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.suite.to_string(),
                        c.name.clone(),
                        c.passed.to_string(),
                        fmt_f64(c.measured),
                        fmt_f64(c.threshold),
                        c.detail.clone(),
                    ]
                })
                .collect();
            output::table_csv(&["suite", "name", "passed", "measured", "threshold", "detail"], &rows).map_err(Failure::usage)?
        }
    };
    write_out(a.output.out.as_deref(), &bytes)?;
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}/{}: {}", c.suite, c.name, c.detail);
    }
    eprintln!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_PARTIAL })
}

const DELTA_TOL: f64 = 1e-6;

fn delta(cmd: &Command, a: &DeltaArgs) -> Outcome {
    let q = qparam(a.q.ok_or_else(|| Failure::usage("missing --q"))?)?;
    let gamma = ContourSpec {
        zeta: a.zeta,
        truncation: a.truncation,
        points_per_line: a.points,
        ..ContourSpec::default()
    };
    gamma.validate()?;
    let format = Format::resolve(a.output.format.as_deref(), a.output.out.as_deref(), Format::Json).map_err(Failure::usage)?;
    let est = ultra::measure_delta_weight(q, &gamma)?;
    let expected = closedform::constant_qft_delta_weight(q);
    let rel_err = (est.value - expected).norm() / expected;
    let bytes = match format {
        Format::Json => {
            let row = json!({"q": q.value(), "measured": est.value.re, "measured_im": est.value.im,
                             "expected": expected, "rel_err": rel_err, "err_estimate": est.err});
            let growth = json!({"kind": "growth", "c_estimate": est.growth.c_estimate, "warning": est.growth.warning});
            json_report(cmd, vec![row], vec![growth])?
        }
        Format::Csv => output::table_csv(
            &["q", "measured", "measured_im", "expected", "rel_err", "err_estimate"],
            &[vec![
                fmt_f64(q.value()),
                fmt_f64(est.value.re),
                fmt_f64(est.value.im),
                fmt_f64(expected),
                fmt_f64(rel_err),
                fmt_f64(est.err),
            ]],
        )
        .map_err(Failure::usage)?,
    };
    write_out(a.output.out.as_deref(), &bytes)?;
    if let Some(w) = &est.growth.warning {
        eprintln!("warning: {w}");
    }
    if rel_err >= DELTA_TOL {
        eprintln!("measured weight {} differs from {expected} by {rel_err:e} (relative)", est.value);
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}
