//! End-to-end tests of the binary: output formats, exit codes, and the
//! byte-identical determinism contract.

use std::path::Path;
use std::process::{Command, Output};

fn shears() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shears"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn farey_line_counts_and_depth_guard() {
    let out = run_ok(shears().args(["farey", "--depth", "0"]));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 3);
    let out = run_ok(shears().args(["farey", "--depth", "3"]));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 45);
    let out = shears().args(["farey", "--depth", "31"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("depth"));
}

#[test]
fn shear_identity_norm_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "id.json",
        r#"{"map": {"kind":"moebius","matrix":[1,0,0,1]}, "depth": 3}"#,
    );
    let csv = dir.path().join("out.csv");
    let out = run_ok(shears().args([
        "shear",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("\"shear_norm\":0.0"), "{summary}");
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("# {"));
    for line in table.lines().skip(2) {
        assert!(line.ends_with(",0"), "identity shear row: {line}");
    }
}

#[test]
fn identical_configs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ce.json",
        r#"{"map": {"kind":"counterexample","n":16}, "depth": 4, "kmax": 4}"#,
    );
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        run_ok(shears().args([
            "shear",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    let a = std::fs::read(&out1).unwrap();
    let mut b = std::fs::read(&out2).unwrap();
    // the embedded config echoes the out path; align it before comparing
    let b_text = String::from_utf8(b.clone()).unwrap().replace("b.csv", "a.csv");
    b = b_text.into_bytes();
    assert_eq!(a, b, "same config must give byte-identical tables");

    // metrics runs with seeds are deterministic end to end
    let cfg = write(
        dir.path(),
        "met.json",
        r#"{"map": {"kind":"counterexample","n":4},
            "map2": {"kind":"counterexample","n":8},
            "sample_count": 40, "seed": 11}"#,
    );
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            run_ok(shears().args(["metrics", "--config", cfg.to_str().unwrap()])).stdout
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn counterexample_rows_and_passfail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ce.json", r#"{"n_list": [2]}"#);
    let out = run_ok(shears().args(["counterexample", "--config", cfg.to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    let row = text
        .lines()
        .find(|l| l.starts_with("2,"))
        .expect("row for n=2");
    let fields: Vec<&str> = row.split(',').collect();
    let mu: f64 = fields[7].parse().unwrap();
    assert!(mu < 1e-10, "n=2 is the identity: mu = {mu}");
    assert_eq!(fields[9], "-1");
    assert!(text.contains("h_tilde(-1) = -1 exactly: PASS"));
}

#[test]
fn metrics_of_moebius_vs_identity_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "met.json",
        r#"{"map": {"kind":"moebius","matrix":[1,0,0,1],"model":"circle"},
            "map2": {"kind":"moebius","matrix":[[1,0],[0.3,0.1],[0.3,-0.1],[1,0]]},
            "sample_count": 50, "seed": 3}"#,
    );
    let csv = dir.path().join("met.csv");
    run_ok(shears().args([
        "metrics",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&csv).unwrap();
    for line in text.lines().filter(|l| l.starts_with("d_")) {
        let est: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(est < 1e-12, "Möbius maps preserve cross ratios: {line}");
    }
    // sidecar records the sampler provenance
    let meta = std::fs::read_to_string(dir.path().join("met.meta.json")).unwrap();
    assert!(meta.contains("\"seed\": 3") && meta.contains("\"count\": 50"));
}

#[test]
fn das_with_identical_maps_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "das.json",
        r#"{"map": {"kind":"counterexample","n":4},
            "map2": {"kind":"counterexample","n":4}, "depth": 5}"#,
    );
    let out = run_ok(shears().args(["das", "--config", cfg.to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines().skip(2) {
        assert!(line.ends_with(",0"), "{line}");
    }
}

#[test]
fn extend_on_identity_returns_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ext.json",
        r#"{"map": {"kind":"moebius","matrix":[1,0,0,1],"model":"circle"},
            "points": [[0.25,0.0],[0.1,-0.4]]}"#,
    );
    let out = run_ok(shears().args(["extend", "--config", cfg.to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines().skip(2) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(((f[0] - f[2]).powi(2) + (f[1] - f[3]).powi(2)).sqrt() < 1e-10, "{line}");
    }
}

#[test]
fn shear_reconstruct_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ce.json",
        r#"{"map": {"kind":"counterexample","n":8}, "depth": 4}"#,
    );
    let table = dir.path().join("shear.csv");
    run_ok(shears().args([
        "shear",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        table.to_str().unwrap(),
    ]));
    let rcfg = write(
        dir.path(),
        "rec.json",
        &format!(
            r#"{{"shear_input": "{}", "depth": 4}}"#,
            table.to_str().unwrap().replace('\\', "/")
        ),
    );
    let out = run_ok(shears().args(["reconstruct", "--config", rcfg.to_str().unwrap()]));
    let text = String::from_utf8_lossy(&out.stdout);
    // the three normalization vertices reproduce exactly
    assert!(text.lines().any(|l| l == "0/1,0"), "{text}");
    assert!(text.lines().any(|l| l == "1/1,1"));
    assert!(text.lines().any(|l| l == "1/0,inf"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    // malformed JSON
    let bad = write(dir.path(), "bad.json", "{nope");
    let out = shears()
        .args(["shear", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown field is rejected by the schema
    let unknown = write(dir.path(), "unknown.json", r#"{"depht": 4}"#);
    let out = shears()
        .args(["farey", "--config", unknown.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing required map
    let empty = write(dir.path(), "empty.json", "{}");
    let out = shears()
        .args(["shear", "--config", empty.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("map"));
    // n below the family's range
    let low = write(dir.path(), "low.json", r#"{"n_list": [1]}"#);
    let out = shears()
        .args(["counterexample", "--config", low.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // thresholds beyond the depth leave every window empty
    let cfg = write(
        dir.path(),
        "das.json",
        r#"{"map": {"kind":"counterexample","n":4},
            "map2": {"kind":"counterexample","n":8},
            "depth": 4, "thresholds": [20]}"#,
    );
    let out = shears()
        .args(["das", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numeric"));
    // no partial file was left behind
    let target = dir.path().join("never.csv");
    let out = shears()
        .args([
            "das",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            target.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(!target.exists(), "failed runs must not leave partial output");
}

#[test]
fn parallel_flag_matches_serial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bel.json",
        r#"{"map": {"kind":"counterexample","n":6},
            "grid_radii": [0.0, 0.4], "grid_angles": 4}"#,
    );
    let serial = run_ok(shears().args(["beltrami", "--config", cfg.to_str().unwrap()])).stdout;
    let parallel = run_ok(shears().args([
        "beltrami",
        "--config",
        cfg.to_str().unwrap(),
        "--parallel",
        "4",
    ]))
    .stdout;
    // rows are assembled by index, so the thread count cannot leak into the
    // bytes apart from the echoed config header
    let strip = |b: &[u8]| {
        String::from_utf8_lossy(b)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&serial), strip(&parallel));
}
