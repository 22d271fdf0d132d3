use std::path::Path;
use std::process::Command;

use ebdevs_harness::config::ExperimentConfig;
use ebdevs_harness::HarnessError;

fn ebdevs() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ebdevs"));
    cmd.env_remove("EBDEVS_OUT");
    cmd
}

fn code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn list_models_names_the_gallery() {
    let out = ebdevs().arg("list-models").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["sir-cm", "sir-cm-v", "boids", "boids-fa", "boids-ba", "mito"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(ebdevs().args(["run", "--model", "nope", "--out"]).arg(dir.path())), 1);
    assert_eq!(code(ebdevs().args(["run", "--bogus-flag"])), 1);
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"model": "sir-cm", "params": {"beta": -1}}"#).unwrap();
    assert_eq!(code(ebdevs().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path())), 1);
    std::fs::write(&cfg, r#"{"model": "sir-cm", "params": {"no_such_key": 1}}"#).unwrap();
    assert_eq!(code(ebdevs().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path())), 1);
}

#[test]
fn capacity_abort_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"model": "mito", "params": {"pool": 180, "fission_p": 1.0, "fusion_p": 0.0}, "horizon": 600}"#,
    )
    .unwrap();
    let out = ebdevs().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verification_failure_maps_to_3() {
    assert_eq!(HarnessError::Verification("x".into()).exit_code(), 3);
}

#[test]
fn verify_equivalence_passes_on_small_sir() {
    let out = ebdevs().args(["verify", "equivalence", "--model", "sir-cm", "--size", "10", "--seeds", "1,2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn output_dir_comes_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ebdevs"))
        .args(["run", "--model", "sir-cm", "--reps", "2", "--seed", "3"])
        .env("EBDEVS_OUT", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let names: Vec<String> = files(dir.path()).into_iter().map(|f| f.0).collect();
    assert!(names.contains(&"sir-cm_seed3_rep000.csv".to_string()), "{names:?}");
    assert!(names.contains(&"sir-cm_seed3_summary.csv".to_string()), "{names:?}");
    assert!(names.contains(&"sir-cm_seed3_manifest.json".to_string()), "{names:?}");
}

#[test]
fn runs_to_disk_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let mut exp = ExperimentConfig::from_json(r#"{"model": "boids-ba", "replications": 3, "seed": 5, "horizon": 40}"#)
            .unwrap()
            .resolve()
            .unwrap();
        exp.out = dir.path().to_path_buf();
        let report = exp.run_to_disk().unwrap();
        assert!(report.failures.is_empty());
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 5);
    assert_eq!(fa, fb);
    for (_, bytes) in &fa {
        assert!(!bytes.contains(&b'\r'));
    }
}

#[test]
fn single_replication_has_zero_spread() {
    let exp = ExperimentConfig::from_json(r#"{"model": "sir-cm", "replications": 1, "seed": 9}"#).unwrap().resolve().unwrap();
    let summary = exp.summarize(&exp.run_in_memory()).unwrap();
    assert_eq!(summary.completed, 1);
    assert!(summary.std_of("nI").unwrap().iter().all(|&s| s == 0.0));
}
