use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

use qfourier_cli::output::{parse_transform_csv, transform_csv};
use serde_json::Value;

fn qft(args: &[&str]) -> Output {
    qft_env(args, &[])
}

fn qft_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qft"));
    cmd.args(args).env_remove("QFT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn qft")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn heaviside_rows_match_closed_form() {
    let o = qft(&["transform", "--f", "heaviside+", "--q", "1.5", "--kmin", "0.5", "--kmax", "4", "--nk", "8", "--plane", "real-upper"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_transform_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 8);
    for r in rows {
        assert_eq!(r.plane, "real-upper");
        let want = 1.0 / (0.5 * r.k_re);
        assert!(r.f_re.abs() < 1e-8 * want, "{r:?}");
        assert!((r.f_im - want).abs() < 1e-8 * want, "{r:?}");
    }
}

#[test]
fn power_law_at_zero_wavenumber_is_its_moment() {
    let o = qft(&["transform", "--f", "powerlaw", "--lambda", "1", "--beta", "3", "--a", "1", "--b", "2", "--q", "1.2", "--kmin", "0", "--kmax", "0", "--nk", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_transform_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].f_re - 0.375).abs() < 1e-12 && rows[0].f_im.abs() < 1e-12);
}

#[test]
fn out_of_range_q_is_a_usage_error() {
    let o = qft(&["transform", "--f", "gaussian", "--q", "2.5"]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("[1, 2)"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&qft(&["frobnicate"])), 1);
    assert_eq!(code(&qft(&["transform", "--q", "1.5"])), 1);
    assert_eq!(code(&qft(&["transform", "--f", "gaussian", "--q", "1.5", "--kmin", "2", "--kmax", "1"])), 1);
    assert_eq!(code(&qft(&["transform", "--f", "gaussian", "--q", "1.5", "--plane", "sideways"])), 1);
    assert_eq!(code(&qft(&["transform", "--f", "powerlaw", "--q", "1.5"])), 1);
    assert_eq!(code(&qft(&["--help"])), 0);
}

#[test]
fn failed_cells_exit_two_and_keep_the_rest() {
    let o = qft(&["transform", "--f", "heaviside+", "--q", "1.5", "--kmin", "0", "--kmax", "1", "--nk", "2"]);
    assert_eq!(code(&o), 2);
    let rows = parse_transform_csv(&o.stdout).unwrap();
    assert!(rows[0].f_re.is_nan());
    assert!((rows[1].f_im - 2.0).abs() < 1e-8);
    assert!(stderr(&o).contains("did not converge"));
}

#[test]
fn csv_file_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.csv");
    let o = qft(&["transform", "--f", "gaussian", "--sigma", "0.7", "--q-list", "1,1.3,1.6", "--kmin", "-2", "--kmax", "2", "--nk", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let bytes = fs::read(&path).unwrap();
    assert!(bytes.starts_with(b"k_re,k_im,plane,q,F_re,F_im,err\n"));
    assert!(!bytes.contains(&b'\r'));
    let rows = parse_transform_csv(&bytes).unwrap();
    assert_eq!(rows.len(), 15);
    assert_eq!(transform_csv(&rows).unwrap(), bytes);
}

#[test]
fn json_report_has_fixed_top_level_order() {
    let o = qft(&["transform", "--f", "heaviside-", "--q", "1.4", "--plane", "real-lower", "--nk", "2", "--kmin", "1", "--kmax", "2", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let (c, r, d) = (text.find("\"config\"").unwrap(), text.find("\"results\"").unwrap(), text.find("\"diagnostics\"").unwrap());
    assert!(c < r && r < d);
    let v = json(&o);
    assert_eq!(v["config"]["command"], "transform");
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["plane"], "real-lower");
    // H(-x) on the lower sheet: i/((2-q)k)
    let want = 1.0 / 0.6;
    assert!((rows[0]["F_im"].as_f64().unwrap() - want).abs() < 1e-7);
}

#[test]
fn collide_requires_two_wellformed_pairs() {
    assert_eq!(code(&qft(&["collide", "--pairs", "1,2", "--q", "1.5"])), 1);
    assert_eq!(code(&qft(&["collide", "--pairs", "1,2;3", "--q", "1.5"])), 1);
    assert_eq!(code(&qft(&["collide", "--pairs", "1,2;2,1", "--q", "1.5"])), 1);
    assert_eq!(code(&qft(&["collide", "--pairs", "1,2;0.5,4", "--q", "1.5", "--format", "csv"])), 1);
}

#[test]
fn identical_pairs_skip_the_separation_check() {
    let o = qft(&["collide", "--pairs", "1,2;1,2", "--q", "1.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let verdict = &json(&o)["diagnostics"][0];
    assert_eq!(verdict["collide_at_q"], true);
    assert!(verdict["separate_at_qprime"].is_null());
    assert!(verdict["notes"][0].as_str().unwrap().contains("skipped"));
}

#[test]
fn common_lambda_pairs_collide_and_separate() {
    let o = qft(&["collide", "--pairs", "1,2;0.5,0.6666666666666666;1.5,6", "--q", "1.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let verdict = &v["diagnostics"][0];
    assert_eq!(verdict["collide_at_q"], true, "{verdict}");
    assert_eq!(verdict["separate_at_qprime"], true, "{verdict}");
    // 3 members, q and two neighbours, 3 wavenumbers
    assert_eq!(v["results"].as_array().unwrap().len(), 27);
}

#[test]
fn distinct_lambda_pairs_do_not_collide() {
    let o = qft(&["collide", "--pairs", "1,2;0.5,4", "--q", "1.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let verdict = &json(&o)["diagnostics"][0];
    assert_eq!(verdict["collide_at_q"], false);
    assert_eq!(verdict["separate_at_qprime"], true);
    assert!(verdict["max_closed_dev"].as_f64().unwrap() < 1e-6);
}

#[test]
fn delta_weight_matches_residue() {
    for (q, want) in [("1.5", 4.0 * PI), ("1.0", 2.0 * PI)] {
        let o = qft(&["delta", "--q", q]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let row = &json(&o)["results"][0];
        assert!((row["expected"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!((row["measured"].as_f64().unwrap() - want).abs() < 1e-6 * want);
        assert!(row["rel_err"].as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn invert_gaussian_reports_small_residual() {
    let o = qft(&["invert", "--f", "gaussian", "--sigma", "1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let summary = &v["diagnostics"][0];
    assert_eq!(summary["kind"], "summary");
    assert!(summary["residual"].as_f64().unwrap() < 1e-3);
    assert_eq!(v["results"].as_array().unwrap().len(), 241);
    assert!(stderr(&o).contains("residual"));
}

#[test]
fn invert_rejects_functions_without_a_classical_transform() {
    assert_eq!(code(&qft(&["invert", "--f", "constant"])), 1);
    assert_eq!(code(&qft(&["invert", "--f", "gaussian", "--eps-list", "1e-3,1e-2"])), 1);
    assert_eq!(code(&qft(&["invert", "--f", "gaussian", "--xmin", "-1"])), 1);
}

#[test]
fn verify_suites() {
    let o = qft(&["verify", "--suite", "special"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let names: Vec<String> = json(&o)["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.iter().any(|n| n.contains("F(-a,b;b;-z)")), "{names:?}");

    let o = qft(&["verify", "--suite", "ultra"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("4π"));

    assert_eq!(code(&qft(&["verify", "--suite", "everything"])), 1);
}

#[test]
fn verify_all_passes() {
    let o = qft(&["verify", "--suite", "all"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"command": "transform", "f": "heaviside+", "q": 1.2, "kmin": 1, "kmax": 2, "nk": 2}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = qft(&["--config", cfg]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_transform_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.q == 1.2));

    let o = qft(&["transform", "--config", cfg, "--q", "1.5", "--nk", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = parse_transform_csv(&o.stdout).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.q == 1.5));
    assert!((rows[0].f_im - 2.0).abs() < 1e-8);

    assert_eq!(code(&qft(&["transform", "--config", "/nonexistent/run.json"])), 1);
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = ["transform", "--f", "qgaussian", "--qg", "1.5", "--q-list", "1,1.2,1.4", "--kmin", "-3", "--kmax", "3", "--nk", "7"];
    let one = qft_env(&args, &[("QFT_THREADS", "1")]);
    let four = qft_env(&args, &[("QFT_THREADS", "4")]);
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&qft_env(&args, &[("QFT_THREADS", "0")])), 1);
    assert_eq!(code(&qft_env(&args, &[("QFT_THREADS", "many")])), 1);
}
