use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Fixtures {
    dir: TempDir,
}

impl Fixtures {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let files = [
            ("one_atom.json", r#"{"atoms": [[3.0, 1.0]]}"#),
            ("two_point.json", r#"{"atoms": [[2.0, 0.5], [1.0, 0.5]]}"#),
            (
                "two_point_exact.json",
                r#"{"atoms": [[["2","1"],["1","2"]], [["1","1"],["1","2"]]]}"#,
            ),
            ("two_point.csv", "value,mass\n2,0.5\n1,0.5\n"),
            (
                "unnormalized.json",
                r#"{"atoms": [[2.0, 1.0], [1.0, 1.0]]}"#,
            ),
            ("broken.json", r#"{"atoms": [[2.0, 0.5], "#),
            ("p.json", r#"{"probs": [0.5, 0.5]}"#),
            ("q.json", r#"{"probs": [0.25, 0.75]}"#),
            ("q3.json", r#"{"probs": [0.25, 0.25, 0.5]}"#),
        ];
        for (name, body) in files {
            fs::write(dir.path().join(name), body).unwrap();
        }
        Self { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }
}

struct Run {
    code: i32,
    stdout: String,
    report: Value,
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mominq"));
    cmd.args(args).env_remove("MOMINQ_PRECISION");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    let code = out.status.code().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    if !report.is_null() {
        assert_eq!(
            report["exit_status"], code,
            "exit status mismatch: {stdout}"
        );
    }
    Run {
        code,
        stdout,
        report,
    }
}

#[test]
fn lambda_of_point_mass_is_zero() {
    let fx = Fixtures::new();
    let r = run(&["lambda", "--law", &fx.path("one_atom.json"), "--s", "3"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["command"], "lambda");
    assert_eq!(r.report["results"]["lambda"], 0.0);
    assert_eq!(r.report["inputs"][0], fx.path("one_atom.json"));
}

#[test]
fn lambda_precision_from_env() {
    let fx = Fixtures::new();
    let law = fx.path("two_point.json");
    let r = run_env(
        &["lambda", "--law", &law, "--s", "-0.5"],
        &[("MOMINQ_PRECISION", "dd")],
    );
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["precision"], "double_double");
    let r = run_env(
        &["lambda", "--law", &law, "--s", "2", "--precision", "double"],
        &[("MOMINQ_PRECISION", "dd")],
    );
    assert_eq!(r.report["results"]["precision"], "double");
    // λ_2 = pq(x − y)²/2
    assert!((r.report["results"]["lambda"].as_f64().unwrap() - 0.125).abs() < 1e-16);
}

#[test]
fn csv_and_json_laws_agree() {
    let fx = Fixtures::new();
    let a = run(&["lambda", "--law", &fx.path("two_point.json"), "--s", "0.3"]);
    let b = run(&["lambda", "--law", &fx.path("two_point.csv"), "--s", "0.3"]);
    assert_eq!(a.report["results"], b.report["results"]);
}

#[test]
fn sharp_example_check() {
    let fx = Fixtures::new();
    let args = [
        "check", "--id", "theorem3", "--law", "", "--params", "2", "4", "2", "6",
    ];

    let mut float_args = args;
    let law = fx.path("two_point.json");
    float_args[4] = &law;
    let r = run(&float_args);
    assert_eq!(r.code, 0);
    let report = &r.report["results"]["report"];
    assert_eq!(report["passed"], true);
    let expected = 7.0 / 283_115_520.0;
    let residual = report["residual"].as_f64().unwrap();
    assert!((residual - expected).abs() <= 1e-8 * expected, "{residual}");
    assert!(r.report["results"]["exact"].is_null());

    let mut exact_args = args;
    let law = fx.path("two_point_exact.json");
    exact_args[4] = &law;
    let r = run(&exact_args);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["exact"]["value"], "7/283115520");
    assert_eq!(r.report["results"]["exact"]["sign"], "positive");
}

#[test]
fn negative_params_parse() {
    let fx = Fixtures::new();
    let r = run(&[
        "form",
        "--id",
        "phi",
        "--law",
        &fx.path("two_point.json"),
        "--params",
        "-1",
        "2.5",
        "-3",
        "4",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["results"]["params"][0], -1.0);
    assert!(r.report["results"]["value"].as_f64().unwrap() >= 0.0);
}

#[test]
fn divergence_and_bounds() {
    let fx = Fixtures::new();
    let (p, q) = (fx.path("p.json"), fx.path("q.json"));
    let r = run(&["div", "--measure", "kl", "--p", &p, "--q", &q]);
    assert_eq!(r.code, 0);
    let kl = r.report["results"]["value"].as_f64().unwrap();
    assert!((kl - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);

    let r = run(&[
        "div",
        "--measure",
        "renyi",
        "--p",
        &p,
        "--q",
        &q,
        "--param",
        "0.5",
    ]);
    assert_eq!(r.code, 0);

    let r = run(&["bounds", "--p", &p, "--q", &q]);
    assert_eq!(r.code, 0);
    let b = &r.report["results"];
    assert_eq!(b["ordered"], true);
    let f = |k: &str| b[k].as_f64().unwrap();
    assert!(f("f1") <= f("kl") && f("kl") <= f("f2"));
    assert_eq!(r.report["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn input_errors_exit_2() {
    let fx = Fixtures::new();
    let missing = fx.dir.path().join("missing.json").display().to_string();
    let cases: Vec<Vec<String>> = vec![
        vec![
            "lambda".into(),
            "--law".into(),
            missing,
            "--s".into(),
            "1".into(),
        ],
        vec![
            "lambda".into(),
            "--law".into(),
            fx.path("broken.json"),
            "--s".into(),
            "1".into(),
        ],
        vec![
            "lambda".into(),
            "--law".into(),
            fx.path("unnormalized.json"),
            "--s".into(),
            "1".into(),
        ],
        vec![
            "check".into(),
            "--id".into(),
            "theorem3".into(),
            "--law".into(),
            fx.path("two_point.json"),
            "--params".into(),
            "1".into(),
        ],
        vec![
            "div".into(),
            "--measure".into(),
            "tsallis".into(),
            "--p".into(),
            fx.path("p.json"),
            "--q".into(),
            fx.path("q.json"),
        ],
        vec![
            "bounds".into(),
            "--p".into(),
            fx.path("p.json"),
            "--q".into(),
            fx.path("q3.json"),
        ],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(r.report["results"]["error"].is_string(), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let fx = Fixtures::new();
    let law = fx.path("two_point.json");
    for args in [
        vec!["lambda", "--law", &law],
        vec!["form", "--id", "nope", "--law", &law, "--params", "1", "2"],
        vec!["fuzz", "--conjecture", "3", "--trials", "10", "--seed", "1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).code, 2, "{args:?}");
    }
}

#[test]
fn output_round_trips() {
    let fx = Fixtures::new();
    for args in [
        vec!["lambda", "--law", &fx.path("two_point.json"), "--s", "0.1"],
        vec![
            "bounds",
            "--p",
            &fx.path("p.json"),
            "--q",
            &fx.path("q.json"),
        ],
        vec!["suite", "--trials", "20", "--seed", "3", "--id", "theorem1"],
    ] {
        let r = run(&args);
        let again = serde_json::to_string_pretty(&r.report).unwrap();
        assert_eq!(again, r.stdout.trim_end(), "{args:?}");
    }
}

#[test]
fn suite_runs_every_proved_check() {
    let r = run(&["suite", "--trials", "30", "--seed", "11"]);
    assert_eq!(r.code, 0);
    let reports = r.report["results"].as_array().unwrap();
    assert_eq!(reports.len(), 11);
    assert!(reports
        .iter()
        .all(|rep| rep["violations"].as_array().unwrap().is_empty()));
}

fn fuzz_out(dir: &Path, name: &str, jobs: &str, rational: bool) -> (Run, PathBuf) {
    let out = dir.join(name);
    let out_str = out.display().to_string();
    let mut args = vec![
        "fuzz",
        "--conjecture",
        "2",
        "--trials",
        "300",
        "--seed",
        "42",
        "--jobs",
        jobs,
        "--out",
        &out_str,
    ];
    if rational {
        args.push("--rational");
    }
    (run(&args), out)
}

#[test]
fn fuzz_writes_deterministic_reports() {
    let fx = Fixtures::new();
    let (a, out_a) = fuzz_out(fx.dir.path(), "a.json", "1", false);
    let (b, out_b) = fuzz_out(fx.dir.path(), "b.json", "3", false);
    assert_eq!(a.code, 0);
    assert_eq!(a.report["results"], b.report["results"]);
    let written: Value = serde_json::from_str(&fs::read_to_string(&out_a).unwrap()).unwrap();
    assert_eq!(written, a.report["results"]);
    assert_eq!(fs::read(out_a).unwrap(), fs::read(out_b).unwrap());
    assert_eq!(written["trials_run"], 300);

    let (r, _) = fuzz_out(fx.dir.path(), "c.json", "2", true);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["rational_mode"], true);
}
