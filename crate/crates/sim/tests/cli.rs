//! End-to-end runs of the binary: exit codes, output files, and manifest
//! replay.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lilypond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lilypond"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.conf");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const TWO_GRAIN: &str = "\
dimension = 2
window = 0,0,10,10
germs = binomial:2
births = constant
shapes = ball
seed = 11
";

#[test]
fn simulate_grows_two_balls_to_half_their_distance() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_GRAIN);
    let out = dir.path().join("run");
    let res = lilypond(&["simulate", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let result: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["schema"], "hardcore-result/1");
    let grains = result["grains"].as_array().unwrap();
    assert_eq!(grains.len(), 2);
    let p = grains[0]["x"].as_array().unwrap();
    let q = grains[1]["x"].as_array().unwrap();
    let dist = ((p[0].as_f64().unwrap() - q[0].as_f64().unwrap()).powi(2)
        + (p[1].as_f64().unwrap() - q[1].as_f64().unwrap()).powi(2))
    .sqrt();
    for g in grains {
        assert!((g["R"].as_f64().unwrap() - dist / 2.0).abs() < 1e-12);
    }
    assert!(out.join("grains.csv").is_file());
    assert!(out.join("clusters.csv").is_file());
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let res = lilypond(&[
        "simulate",
        "--config",
        "/nonexistent/scenario.conf",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_scenario_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "dimension = 2\nwindow = 0,0,4,4\ngerms = poisson:1\nbogus = 1\n");
    let res = lilypond(&["simulate", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bogus"));
}

#[test]
fn empty_sample_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,1,1\ngerms = poisson:0.000001\nseed = 3\n",
    );
    let res = lilypond(&["simulate", "--config", &config, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn verify_passes_and_the_injected_fault_fails_with_a_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,8,8\ngerms = poisson:1\nseed = 5\n",
    );
    let good = dir.path().join("good");
    let res = lilypond(&[
        "verify",
        "--config",
        &config,
        "--replicates",
        "20",
        "--out",
        good.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(good.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["ok"], true);
    assert_eq!(report["schema"], "verify-report/1");

    let bad = dir.path().join("bad");
    let res = lilypond(&[
        "verify",
        "--config",
        &config,
        "--replicates",
        "3",
        "--inject-fault",
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(
        stderr.contains("hard-core")
            || stderr.contains("engine-agreement")
            || stderr.contains("contact-times"),
        "stderr should name the violated invariant: {stderr}"
    );
}

#[test]
fn zero_replicates_pass_vacuously_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,8,8\ngerms = poisson:1\nseed = 5\n",
    );
    let res = lilypond(&[
        "verify",
        "--config",
        &config,
        "--replicates",
        "0",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("vacuous"));
}

#[test]
fn staggered_births_exit_4_for_the_growing_window_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,8,8\ngerms = poisson:1\nbirths = uniform:5\nseed = 5\n",
    );
    let res = lilypond(&[
        "clt",
        "--config",
        &config,
        "--windows",
        "25",
        "--replicates",
        "10",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn dry_run_writes_the_manifest_and_nothing_else() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,8,8\ngerms = poisson:1\nseed = 5\n",
    );
    let out = dir.path().join("o");
    let res = lilypond(&[
        "clt",
        "--dry-run",
        "--config",
        &config,
        "--replicates",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let entries: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(entries, vec!["manifest.json"]);
}

#[test]
fn replay_reproduces_simulate_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,9,9\ngerms = poisson:1\nbirths = uniform:4\nshapes = ball-uniform:1.5\nseed = 77\n",
    );
    let first = dir.path().join("first");
    let res = lilypond(&[
        "simulate",
        "--config",
        &config,
        "--replicate",
        "2",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let second = dir.path().join("second");
    let res = lilypond(&[
        "replay",
        "--manifest",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("3/3 regenerated files byte-identical"));
    for name in ["result.json", "grains.csv", "clusters.csv"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} should be byte-identical under replay");
    }
}

#[test]
fn seed_overrides_change_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TWO_GRAIN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, seed) in [(&a, "11"), (&b, "12")] {
        let res = lilypond(&[
            "simulate",
            "--config",
            &config,
            "--set",
            &format!("seed={seed}"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    let ga = fs::read(a.join("grains.csv")).unwrap();
    let gb = fs::read(b.join("grains.csv")).unwrap();
    assert_ne!(ga, gb);
}

#[test]
fn compare_and_tail_produce_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "dimension = 2\nwindow = 0,0,8,8\ngerms = poisson:1\nseed = 6\n",
    );
    let cmp = dir.path().join("cmp");
    let res = lilypond(&[
        "compare",
        "--config",
        &config,
        "--t-max",
        "5",
        "--replicates",
        "12",
        "--out",
        cmp.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let long = fs::read_to_string(cmp.join("compare_long.csv")).unwrap();
    assert!(long.starts_with("scenario,replicate,statistic,value\n"));
    assert!(long.lines().count() > 12);

    let tail = dir.path().join("tail");
    let res = lilypond(&[
        "tail",
        "--config",
        &config,
        "--replicates",
        "10",
        "--out",
        tail.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let table = fs::read_to_string(tail.join("tail.csv")).unwrap();
    let mut last = f64::INFINITY;
    for line in table.lines().skip(1) {
        let tail_value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(tail_value <= last + 1e-12);
        last = tail_value;
    }
}
