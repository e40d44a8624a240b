//! Black-box tests of the `curved-dirac` binary: exit codes, output schema,
//! determinism, and the config-file round trip.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curved-dirac"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const FAST_SIM: &[&str] = &["--grid", "-60:60:128", "--t-end", "4", "--stride", "16"];

#[test]
fn simulate_writes_csv_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let output = run(&[
        &["simulate", "--out", out.to_str().unwrap()],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success(), "{output:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(
        "t,x,re_up,im_up,re_dn,im_dn,density_flat,density_curved,masked,provenance\n"
    ));
    assert!(!text.contains('\r'));
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 10));
    assert!(text.contains(",closed-form"));
    // the throat row (x = 0) is masked with an empty curved density
    assert!(text.lines().any(|l| l.ends_with(",1,closed-form")
        && l.split(',').nth(7) == Some("")));
    // a config sidecar sits next to the CSV
    assert!(dir.path().join("run.csv.config").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let output = run(&[
            &["simulate", "--out", out.to_str().unwrap()],
            FAST_SIM,
        ]
        .concat());
        assert!(output.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_sidecar_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let output = run(&[
        &["simulate", "--out", first.to_str().unwrap(), "--x0", "-7"],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success());

    // rerunning from the echoed sidecar must reproduce the bytes, with only
    // the output path overridden
    let second = dir.path().join("second.csv");
    let sidecar = dir.path().join("first.csv.config");
    let output = run(&[
        "simulate",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn simulate_json_format_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let output = run(&[
        &[
            "simulate",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success(), "{output:?}");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["provenance"], "closed-form");
    assert_eq!(doc["grid"]["n"], 128);
    assert!(doc["frames"].as_array().unwrap().len() >= 2);
    assert!(doc["config"]
        .as_array()
        .unwrap()
        .iter()
        .any(|l| l == "metric=wormhole"));
}

#[test]
fn simulate_expression_metric_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let builtin = dir.path().join("builtin.csv");
    let expr = dir.path().join("expr.csv");
    let output = run(&[
        &["simulate", "--out", builtin.to_str().unwrap()],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success());
    let output = run(&[
        &[
            "simulate",
            "--omega-expr",
            "sqrt(x^2/(x^2+b0^2))",
            "--param",
            "b0=10",
            "--singular",
            "0",
            "--out",
            expr.to_str().unwrap(),
        ],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success(), "{output:?}");

    let parse = |p: &Path| -> Vec<Option<f64>> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(7).unwrap().parse().ok())
            .collect()
    };
    for (a, b) in parse(&builtin).iter().zip(parse(&expr).iter()) {
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0)),
            (None, None) => {}
            other => panic!("mask mismatch: {other:?}"),
        }
    }
}

#[test]
fn simulate_svg_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let svg = dir.path().join("run.svg");
    let output = run(&[
        &[
            "simulate",
            "--out",
            out.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ],
        FAST_SIM,
    ]
    .concat());
    assert!(output.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.trim_end().ends_with("</svg>"));
}

const FAST_VERIFY: &[&str] = &["--grid", "2:130:1024", "--t-end", "2"];

#[test]
fn verify_passes_and_prints_check_lines() {
    let output = run(&[&["verify"], FAST_VERIFY].concat());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(output.status.success(), "{stdout}");
    assert_eq!(stdout.matches("PASS ").count(), 4, "{stdout}");
    assert!(stdout.contains("verification PASSED"));
}

#[test]
fn verify_skip_map_exits_one() {
    let output = run(&[&["verify", "--skip-map"], FAST_VERIFY].concat());
    assert_eq!(output.status.code(), Some(1));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("FAIL transformed solution"), "{stdout}");
    assert!(stdout.contains("verification FAILED"));
}

#[test]
fn verify_out_writes_oracle_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("oracle.csv");
    let output = run(&[
        &["verify", "--out", out.to_str().unwrap()],
        FAST_VERIFY,
    ]
    .concat());
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",fd-oracle"));
}

#[test]
fn invalid_b0_exits_two() {
    let output = run(&["simulate", "--b0", "0"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("error[config]:"), "{stderr}");
}

#[test]
fn unknown_flag_exits_two() {
    let output = run(&["simulate", "--does-not-exist"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn bad_expression_reports_offset() {
    let output = run(&["simulate", "--omega-expr", "sqrt(", "--singular", "0"]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("error[config]:"), "{stderr}");
    assert!(stderr.contains("offset 5"), "{stderr}");
}

#[test]
fn invalid_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "b0=-3\n").unwrap();
    let output = run(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn clipped_packet_exits_three() {
    // packet leaves the grid well before t_end
    let output = run(&["simulate", "--grid", "-60:60:128", "--t-end", "200"]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("error[runtime]:"), "{stderr}");
}

#[test]
fn straddling_verify_grid_exits_three() {
    // x = 0 is inside the verification grid, which the one-branch
    // integrator rejects
    let output = run(&[
        "verify",
        "--grid",
        "-60:60:1024",
        "--x0",
        "-10",
        "--t-end",
        "1",
    ]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn fig1_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&["fig1", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    for name in ["fig1_a", "fig1_b", "fig1_c", "fig1_d", "fig1_e", "fig1_f"] {
        assert!(dir.path().join(format!("{name}.csv")).exists());
        assert!(dir.path().join(format!("{name}.svg")).exists());
    }
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["b0"], 10.0);
    assert_eq!(summary["window"]["frames"], 81);
}
