//! Runs the built `qemtk` binary against temporary files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("qemtk-cli-{}-{name}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }

    fn write(&self, file: &str, text: &str) -> PathBuf {
        let p = self.path(file);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn qemtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qemtk"))
        .args(args)
        .env_remove("QEMTK_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr carries an error object")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn natural(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
                .collect()
        })
        .collect()
}

fn example2(dir: &Scratch) -> PathBuf {
    let path = dir.path("example2.json");
    let out = qemtk(&[
        "noise",
        "make",
        "fixture",
        "--params",
        "example2",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn check_reports_a_cptp_fixture() {
    let dir = Scratch::new("check");
    let out = qemtk(&["check", s(&example2(&dir))]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["is_cp"], true);
    assert_eq!(v["is_tp"], true);
    assert_eq!(v["is_hp"], true);
}

#[test]
fn drazin_of_example_two_matches_the_closed_form() {
    let dir = Scratch::new("drazin");
    let out = qemtk(&["invert", "drazin", s(&example2(&dir))]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let want = [
        [0.4, 0.3125, 0.3125, 0.4],
        [0.0, 3.75, -1.25, 0.0],
        [0.0, -1.25, 3.75, 0.0],
        [0.6, -0.3125, -0.3125, 0.6],
    ];
    let got = natural(&v);
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            assert!(
                (got[i][j].0 - w).abs() < 1e-9 && got[i][j].1.abs() < 1e-9,
                "entry ({i},{j}) = {:?}",
                got[i][j]
            );
        }
    }
    assert_eq!(v["verdict"]["is_tp"], true);
    assert_eq!(v["verdict"]["is_cp"], false);
    assert_eq!(v["input"]["class"], "NonInvertible");
    assert_eq!(v["drazin"]["index"], 1);
}

#[test]
fn inverse_output_reads_back_as_a_channel() {
    let dir = Scratch::new("roundtrip");
    let dz = dir.path("dz.json");
    let out = qemtk(&["invert", "mp", s(&example2(&dir)), "--out", s(&dz)]);
    assert_eq!(code(&out), 0);
    let out = qemtk(&["check", s(&dz)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["is_tp"], false);
}

#[test]
fn usage_errors_exit_two_with_json() {
    for args in [
        vec!["frobnicate"],
        vec!["reproduce", "example9"],
        vec!["noise", "make", "pauli", "--params", "0.5,0.1"],
        vec!["check", "/nonexistent/channel.json"],
        vec!["classical", "bsc", "--p", "0.1", "--tol", "zero=-1"],
    ] {
        let out = qemtk(&args);
        assert_eq!(code(&out), 2, "{args:?}");
        let e = stderr_json(&out);
        assert!(e["error"].is_string() && e["context"].is_string(), "{e}");
    }
}

#[test]
fn parse_errors_name_the_file_and_line() {
    let dir = Scratch::new("parse");
    let bad = dir.write("bad.json", "{\n  \"dim_in\": 2,\n  oops\n}\n");
    let out = qemtk(&["check", s(&bad)]);
    assert_eq!(code(&out), 2);
    let ctx = stderr_json(&out)["context"].as_str().unwrap().to_string();
    assert!(ctx.contains("bad.json:3:"), "{ctx}");
}

#[test]
fn numerical_failures_exit_three() {
    let dir = Scratch::new("numerical");
    let out = qemtk(&[
        "invert",
        "drazin",
        s(&example2(&dir)),
        "--tol",
        "backend=1e-300",
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(stderr_json(&out)["error"], "BackendDisagreement");
}

#[test]
fn exact_inverse_of_a_singular_channel_is_refused() {
    let dir = Scratch::new("singular");
    let out = qemtk(&["invert", "exact", s(&example2(&dir))]);
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "NonInvertibleChannel");
}

#[test]
fn same_seed_gives_identical_bytes() {
    let run = |seed: &str| {
        qemtk(&[
            "classical",
            "repetition",
            "--p",
            "0.1",
            "--trials",
            "20000",
            "--seed",
            seed,
        ])
        .stdout
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
    let dir = Scratch::new("csv");
    let (a, b) = (dir.path("a.csv"), dir.path("b.csv"));
    for p in [&a, &b] {
        let out = qemtk(&[
            "analyze",
            "mismatch",
            "--p1",
            "0.5",
            "--p2",
            "0",
            "--p3",
            "0",
            "--seed",
            "7",
            "--out",
            s(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_defaults_to_the_environment() {
    let args = ["classical", "repetition", "--p", "0.2", "--trials", "5000"];
    let via_env = Command::new(env!("CARGO_BIN_EXE_qemtk"))
        .args(args)
        .env("QEMTK_SEED", "99")
        .output()
        .unwrap();
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "99"]);
    assert_eq!(via_env.stdout, qemtk(&flagged).stdout);
    assert_ne!(via_env.stdout, qemtk(&args).stdout);
}

#[test]
fn mismatch_writes_a_table_and_a_summary() {
    let dir = Scratch::new("mismatch");
    let csv = dir.path("m.csv");
    let out = qemtk(&[
        "analyze",
        "mismatch",
        "--p1",
        "0.5",
        "--p2",
        "0",
        "--p3",
        "0",
        "--states",
        "10",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0);
    let summary = stdout_json(&out);
    assert_eq!(summary["lambda_max"].as_f64(), Some(1.0 / 3.0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("state_id,z_in,z_noisy,z_mitigated,y_in,y_noisy,y_mitigated,f_noisy,f_mitigated,f_mitigated_valid")
    );
    assert_eq!(lines.count(), 10);

    let flip = qemtk(&["analyze", "mismatch", "--p1", "0", "--p2", "1", "--p3", "0"]);
    assert_eq!(code(&flip), 0);
    assert_eq!(stdout_json(&flip)["outcome"], "estimate_not_invertible");
}

const HADAMARD: &str = r#"{"dim_in": 2, "dim_out": 2, "rep": "kraus",
  "data": [[[0.7071067811865476, 0.7071067811865476], [0.7071067811865476, -0.7071067811865476]]]}"#;

fn circuit(dir: &Scratch, estimate: &str) -> PathBuf {
    dir.write("h.json", HADAMARD);
    for (file, lambda) in [("n.json", "0.2"), ("n2.json", "0.23")] {
        let out = qemtk(&[
            "noise",
            "make",
            "depolarizing",
            "--params",
            lambda,
            "--out",
            s(&dir.path(file)),
        ]);
        assert_eq!(code(&out), 0);
    }
    let text = format!(
        r#"{{"input": {{"dim": 2, "data": [[0.7, "1/10"], ["1/10", 0.3]]}},
  "layers": [
    {{"ideal": "h.json", "true_noise": "n.json", "estimated_noise": "{estimate}"}},
    {{"ideal": "h.json", "true_noise": "n.json", "estimated_noise": "n.json"}}
  ]}}"#
    );
    dir.write("circuit.json", &text)
}

fn state(out: &Output) -> Vec<Vec<(f64, f64)>> {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    natural(&stdout_json(out)["state"])
}

#[test]
fn perfect_characterisation_recovers_the_ideal_state() {
    let dir = Scratch::new("simulate");
    let c = circuit(&dir, "n.json");
    let ideal = state(&qemtk(&["simulate", "--circuit", s(&c), "--mode", "ideal"]));
    let noisy = state(&qemtk(&["simulate", "--circuit", s(&c), "--mode", "noisy"]));
    for mode in ["numerical", "physical"] {
        let em = state(&qemtk(&["simulate", "--circuit", s(&c), "--mode", mode]));
        for i in 0..2 {
            for j in 0..2 {
                assert!((em[i][j].0 - ideal[i][j].0).abs() < 1e-10, "{mode}");
                assert!((em[i][j].1 - ideal[i][j].1).abs() < 1e-10, "{mode}");
            }
        }
    }
    assert!((noisy[0][0].0 - ideal[0][0].0).abs() > 1e-3);
}

#[test]
fn bounds_hold_for_a_slightly_wrong_estimate() {
    let dir = Scratch::new("bounds");
    let c = circuit(&dir, "n2.json");
    let obs = dir.write(
        "obs.json",
        r#"[{"dim": 2, "data": [[1, 0], [0, -1]]}, {"dim": 2, "data": [[0, 1], [1, 0]]}]"#,
    );
    let out = qemtk(&[
        "analyze",
        "bounds",
        "--circuit",
        s(&c),
        "--observables",
        s(&obs),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["sandwich_holds"], true);
    assert_eq!(v["layerwise_dominates"], true);
    for check in v["report"]["observables"].as_array().unwrap() {
        assert!(check["delta"].as_f64().unwrap() <= check["bound"].as_f64().unwrap());
    }
}

#[test]
fn reproduce_reports_pass_and_fail() {
    let dir = Scratch::new("reproduce");
    for example in ["example1", "example2", "cnot"] {
        let report = dir.path(&format!("{example}.json"));
        let out = qemtk(&["reproduce", example, "--out", s(&report)]);
        assert_eq!(code(&out), 0, "{example}");
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(v["passed"], true);
        assert!(v["assertions"].as_array().unwrap().len() >= 3);
    }
    let out = qemtk(&[
        "reproduce",
        "repetition",
        "--p",
        "0.1",
        "--trials",
        "100000",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let exact = v["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|a| a["name"] == "exact")
        .unwrap();
    assert!((exact["value"].as_f64().unwrap() - 0.028).abs() < 1e-15);
    // no nonzero-error instance satisfies the sufficient condition
    let out = qemtk(&["reproduce", "prop3", "--seed", "2024"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["passed"], false);
}

#[test]
fn protocols_and_classical_commands() {
    let out = qemtk(&[
        "protocol",
        "richardson",
        "--scales",
        "1,2,3",
        "--values",
        "0.9,0.81,0.729",
    ]);
    let v = stdout_json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.999).abs() < 1e-12);

    let dir = Scratch::new("protocols");
    let ro = dir.write("ro.json", "[[0.9, 0.2], [0.1, 0.8]]");
    let out = qemtk(&[
        "protocol",
        "readout",
        "--matrix",
        s(&ro),
        "--probs",
        "0.05,0.95",
        "--project",
    ]);
    let v = stdout_json(&out);
    assert_eq!(v["has_negative"], true);
    assert_eq!(v["projected"], serde_json::json!([0.0, 1.0]));

    let d = dir.path("d.json");
    let dinv = dir.path("dinv.json");
    qemtk(&[
        "noise",
        "make",
        "depolarizing",
        "--params",
        "0.5",
        "--out",
        s(&d),
    ]);
    assert_eq!(
        code(&qemtk(&["invert", "exact", s(&d), "--out", s(&dinv)])),
        0
    );
    let v = stdout_json(&qemtk(&["protocol", "quasiprob", "--target", s(&dinv)]));
    assert!((v["tau"].as_f64().unwrap() - 2.5).abs() < 1e-12);

    let v = stdout_json(&qemtk(&[
        "classical",
        "invert",
        "--p",
        "0.1",
        "--observed",
        "0.82,0.18",
    ]));
    assert!((v["values"][0].as_f64().unwrap() - 0.9).abs() < 1e-12);
    let out = qemtk(&["classical", "invert", "--p", "0.5", "--observed", "0.5,0.5"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "SingularChannel");
}
