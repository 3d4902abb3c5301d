use airylab_cli::output::{Manifest, RunStatus};
use airylab_core::tracy_widom::{Family, TracyWidom};
use std::path::Path;
use std::process::{Command, Output};

fn airylab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airylab"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("AIRYLAB_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path, stem: &str) -> Manifest {
    Manifest::read(&dir.join(format!("{stem}.manifest.json"))).unwrap()
}

#[test]
fn tw_table_matches_the_library_and_is_echoed_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = airylab(&["tw", "--table", "-3:1:0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("tw.csv")).unwrap();
    let tw = TracyWidom::shared().unwrap();
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    for row in &rows {
        assert_eq!(row[3], tw.cdf(Family::Goe, row[0]).unwrap());
        assert_eq!(row[4], tw.cdf(Family::Gue, row[0]).unwrap());
    }
    let m = manifest(dir.path(), "tw");
    assert_eq!(m.status, RunStatus::Complete);
    assert_eq!(m.config["table"], "-3:1:0.5");
    assert_eq!(m.config["seed"], "1");
    assert_eq!(m.files.len(), 1);
}

#[test]
fn flags_override_the_config_file_and_unknown_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# table only\ntable = 0:1:0.5\nseed = 7\n").unwrap();
    let cfg_arg = cfg.to_str().unwrap();
    assert_eq!(airylab(&["tw", "--config", cfg_arg], dir.path()).status.code(), Some(0));
    let m = manifest(dir.path(), "tw");
    assert_eq!((m.config["table"].as_str(), m.config["seed"].as_str()), ("0:1:0.5", "7"));

    assert_eq!(airylab(&["tw", "--config", cfg_arg, "--table", "0:2:1", "--name", "flag"], dir.path()).status.code(), Some(0));
    assert_eq!(manifest(dir.path(), "flag").config["table"], "0:2:1");

    std::fs::write(&cfg, "tabel = 0:1:0.5\n").unwrap();
    let out = airylab(&["tw", "--config", cfg_arg, "--name", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tabel"));
    assert!(!dir.path().join("bad.manifest.json").exists());

    assert_eq!(airylab(&["tw", "--table", "1:0:0.1"], dir.path()).status.code(), Some(2));
    assert_eq!(airylab(&["sample", "--ic", "step", "--rescaling", "airy1"], dir.path()).status.code(), Some(2));
    assert_eq!(airylab(&["tw", "--no-such-flag"], dir.path()).status.code(), Some(2));
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_airylab"))
        .args(["tw", "--table", "0:0.5:0.5"])
        .env("AIRYLAB_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(dir.path().join("tw.csv").exists());
}

#[test]
fn sampling_is_blocked_without_a_passing_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let sample = ["sample", "--horizon", "100", "--replicas", "3", "--grid", "0:1:0.5"];
    let out = airylab(&sample, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("calibration"));
    let failed = manifest(dir.path(), "sample");
    assert_eq!(failed.status, RunStatus::Failed);
    assert!(failed.files.is_empty());

    assert_eq!(airylab(&["calibrate", "--horizon", "100", "--replicas", "5000"], dir.path()).status.code(), Some(0));
    assert_eq!(airylab(&sample, dir.path()).status.code(), Some(0));
    assert_eq!(manifest(dir.path(), "sample").status, RunStatus::Complete);
    // a calibration at another horizon does not count
    let other = ["sample", "--horizon", "200", "--replicas", "3", "--grid", "0:1:0.5", "--name", "t200"];
    assert_eq!(airylab(&other, dir.path()).status.code(), Some(1));
}

#[test]
fn repeated_runs_write_identical_data() {
    let runs = [
        vec!["sample", "--horizon", "150", "--replicas", "20", "--grid", "-1:1:0.25", "--seed", "0x2a", "--calibration", "skip"],
        vec!["sample", "--ic", "step", "--horizon", "150", "--replicas", "20", "--grid", "-1:1:0.5", "--calibration", "skip"],
        vec!["tw", "--table", "-4:2:0.25"],
        vec!["maxdist", "--M", "2:3:0.5", "--nodes", "40"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        airylab(&args, a.path());
        airylab(&args, b.path());
        let stem = args[0];
        let (ma, mb) = (manifest(a.path(), stem), manifest(b.path(), stem));
        assert!(!ma.files.is_empty());
        assert_eq!(ma.files, mb.files, "{args:?}");
        assert_eq!(ma.config_hash, mb.config_hash);
        for f in &ma.files {
            assert_eq!(std::fs::read(a.path().join(&f.name)).unwrap(), std::fs::read(b.path().join(&f.name)).unwrap());
        }
    }
}

#[test]
fn verify_reads_stored_samples() {
    let dir = tempfile::tempdir().unwrap();
    let sample = ["sample", "--horizon", "100", "--replicas", "2000", "--grid", "0:4:0.5", "--calibration", "skip"];
    assert_eq!(airylab(&sample, dir.path()).status.code(), Some(0));
    let input = dir.path().join("sample.csv");
    let out = airylab(&["verify", "--experiment", "association", "--input", input.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "verify");
    assert_eq!(m.family, "airy1");
    assert!(!m.verdicts.is_empty() && m.verdicts.iter().all(|v| v.passed));
    let fkg = airylab(&["verify", "--experiment", "fkg", "--input", input.to_str().unwrap(), "--name", "fkg"], dir.path());
    assert_eq!(fkg.status.code(), Some(0));
    // the stored grid only reaches 4, the window needs more
    let far = airylab(
        &["verify", "--experiment", "clt", "--length", "30", "--input", input.to_str().unwrap(), "--name", "far"],
        dir.path(),
    );
    assert_eq!(far.status.code(), Some(1));
    assert_eq!(manifest(dir.path(), "far").status, RunStatus::Failed);
}

#[test]
fn report_matrix_groups_by_family_and_propagates_failures() {
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(airylab(&["report"], empty.path()).status.code(), Some(0));
    let matrix: serde_json::Value =
        serde_json::from_slice(&std::fs::read(empty.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(matrix, serde_json::json!({}));

    let dir = tempfile::tempdir().unwrap();
    airylab(&["tw", "--table", "0:1:0.5"], dir.path());
    airylab(&["sample", "--horizon", "100", "--replicas", "3", "--grid", "0:1:0.5", "--calibration", "skip"], dir.path());
    airylab(&["sample", "--ic", "step", "--horizon", "100", "--replicas", "3", "--grid", "0:1:0.5", "--calibration", "skip", "--name", "step"], dir.path());
    assert_eq!(airylab(&["report"], dir.path()).status.code(), Some(0));
    let matrix: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let families: Vec<&String> = matrix.as_object().unwrap().keys().collect();
    assert_eq!(families, ["airy1", "airy2", "tracy-widom"]);

    // a failed verdict marks the matrix and the exit code
    let mut tampered = manifest(dir.path(), "tw");
    tampered.name = "tampered".into();
    tampered.verdicts.push(airylab_cli::output::VerdictRecord {
        experiment: "x".into(),
        criterion: "always fails".into(),
        statistic: "s".into(),
        value: 1.0,
        threshold: 0.0,
        passed: false,
    });
    std::fs::write(dir.path().join("tampered.manifest.json"), serde_json::to_vec(&tampered).unwrap()).unwrap();
    assert_eq!(airylab(&["report", "--name", "second"], dir.path()).status.code(), Some(1));
    let text = std::fs::read_to_string(dir.path().join("second.json")).unwrap();
    assert!(text.contains("always fails"));

    // a modified data file is detected
    std::fs::remove_file(dir.path().join("tampered.manifest.json")).unwrap();
    std::fs::write(dir.path().join("tw.csv"), "s\n0\n").unwrap();
    assert_eq!(airylab(&["report", "--name", "third"], dir.path()).status.code(), Some(1));
    assert!(std::fs::read_to_string(dir.path().join("third.json")).unwrap().contains("checksum mismatch"));
}

#[test]
fn bench_bounds_writes_one_csv_per_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = airylab(&["bench-bounds", "--theta", "1:3:0.5", "--M", "2:4:1", "--z-points", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "bench-bounds");
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    for id in ["sd1", "sd5", "hsw.i3", "hsw.vw", "tdiff"] {
        assert!(names.contains(&format!("bench-bounds.{id}.csv").as_str()), "{names:?}");
    }
    assert!(names.contains(&"bench-bounds.json"));
    assert_eq!(airylab(&["bench-bounds", "--quad-tol", "1e-3"], dir.path()).status.code(), Some(2));
}
