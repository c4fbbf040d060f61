//! The `linres` binary: outputs, exit codes and manifest reruns.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn linres(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linres"))
        .env_remove("LINRES_OUT_DIR")
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "kinds = [\"cyclic\", \"wigner\"]\nn = 12\nrhos = [0.8]\ntaus = [0, 4, 12, 20]\n\
t_total = 500\nt0 = 350\nwashout = 30\nrealizations = 2\nmaster_seed = 3\n";

#[test]
fn build_prints_spectral_radius() {
    let dir = TempDir::new().unwrap();
    let o = linres(dir.path(), &["build", "--kind", "cyclic", "--n", "100", "--rho", "0.99", "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("spectral radius 0.99000000"), "{}", stdout(&o));
    assert!(dir.path().join("reservoir_cyclic_n100_rho0.99_seed7.json").exists());

    let o = linres(dir.path(), &["build", "--kind", "delay", "--n", "50", "--rho", "0.5"]);
    assert!(stdout(&o).contains("spectral radius 0.0000000000"), "{}", stdout(&o));

    let o = linres(dir.path(), &["build", "--kind", "random", "--n", "200", "--rho", "0.8", "--rescale", "exact"]);
    assert!(stdout(&o).contains("spectral radius 0.80000000"), "{}", stdout(&o));
}

#[test]
fn build_to_explicit_file_then_analyze() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("nested").join("delay.json");
    let o = linres(
        dir.path(),
        &["build", "--kind", "delay", "--n", "20", "--rho", "1", "--output", file.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = linres(dir.path(), &["analyze", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("rank 20 of 20"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("delay_analysis.csv")).unwrap();
    assert!(csv.starts_with("index,singular_value,column_norm,nullspace_energy\n"));
    assert_eq!(csv.lines().count(), 21);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("delay_analysis.json")).unwrap()).unwrap();
    assert_eq!(report["rank"], 20);
}

#[test]
fn analyze_reports_rank_deficiency() {
    let dir = TempDir::new().unwrap();
    linres(dir.path(), &["build", "--kind", "wigner", "--n", "100", "--rho", "0.99", "--seed", "1"]);
    let o = linres(dir.path(), &["analyze", dir.path().join("reservoir_wigner_n100_rho0.99_seed1.json").to_str().unwrap()]);
    assert!(o.status.success());
    let rank: usize = stdout(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(rank < 100);
}

#[test]
fn analyze_missing_file_is_exit_1() {
    let dir = TempDir::new().unwrap();
    let o = linres(dir.path(), &["analyze", "/nonexistent/reservoir.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_verify_passes() {
    let dir = TempDir::new().unwrap();
    for (kind, rho) in [("cyclic", "0.9"), ("delay", "0.9"), ("random", "0.95"), ("wigner", "0.9")] {
        let o = linres(dir.path(), &["encode-verify", "--kind", kind, "--n", "10", "--rho", rho]);
        assert!(o.status.success(), "{kind}: {}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("PASS"), "{}", stdout(&o));
    }
}

#[test]
fn encode_verify_rejects_unit_rho() {
    let dir = TempDir::new().unwrap();
    let o = linres(dir.path(), &["encode-verify", "--kind", "cyclic", "--n", "10", "--rho", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_verify_divergence_is_numerical() {
    // As distributed, a random reservoir at rho = 0.999 has a true spectral
    // radius above 1 for this seed, so the expansion blows up.
    let dir = TempDir::new().unwrap();
    let mut hit = false;
    for seed in 0..20 {
        let o = linres(
            dir.path(),
            &["encode-verify", "--kind", "random", "--n", "30", "--rho", "0.999", "--rescale", "as-distributed",
              "--seed", &seed.to_string(), "--length", "20000", "--windows", "1"],
        );
        if o.status.code() == Some(2) {
            hit = true;
            break;
        }
    }
    assert!(hit, "no seed produced a divergent expansion");
}

#[test]
fn usage_errors_are_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(linres(dir.path(), &["build", "--kind", "bogus", "--n", "5", "--rho", "1"]).status.code(), Some(1));
    assert_eq!(linres(dir.path(), &["build", "--n", "5"]).status.code(), Some(1));
    assert_eq!(linres(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(linres(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn memory_curve_outputs_and_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = linres(dir.path(), &["memory-curve", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let raw = std::fs::read_to_string(dir.path().join("memory_curve_raw.csv")).unwrap();
    assert!(raw.starts_with("topology,n,rho,tau,realization,gamma\n"));
    assert_eq!(raw.lines().count(), 1 + 2 * 2 * 4);
    let agg = std::fs::read_to_string(dir.path().join("memory_curve.csv")).unwrap();
    assert!(agg.starts_with("topology,n,rho,tau,mean_gamma,std_gamma\n"));
    assert_eq!(agg.lines().count(), 1 + 2 * 4);
    assert!(dir.path().join("memory_curve_cyclic.svg").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("memory_curve_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 3);
    assert_eq!(manifest["cells"].as_array().unwrap().len(), 2 * 2);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let o = Command::new(env!("CARGO_BIN_EXE_linres"))
        .env("LINRES_OUT_DIR", dir.path().join("from_env"))
        .args(["sr-sweep", "--config", &cfg, "--no-svg"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from_env").join("sr_sweep.csv").exists());
    assert!(!dir.path().join("from_env").join("sr_sweep_cyclic.svg").exists());
}

#[test]
fn rank_scan_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "rank.toml", "ns = [4, 8, 16]\nrealizations = 2\nrhos = [0.9]\n");
    let o = linres(dir.path(), &["rank-scan", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let agg = std::fs::read_to_string(dir.path().join("rank_scan.csv")).unwrap();
    assert!(agg.starts_with("topology,n,rho,normalization,mean_rank,std_rank\n"));
    assert_eq!(agg.lines().count(), 1 + 2 * 4 * 3);
    let raw = std::fs::read_to_string(dir.path().join("rank_scan_raw.csv")).unwrap();
    assert!(raw.starts_with("topology,n,rho,normalization,realization,rank\n"));
}

#[test]
fn config_errors_list_everything() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.toml", "taus = []\nrealizations = 0\nt0 = 5000\n");
    let o = linres(dir.path(), &["memory-curve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for needle in ["taus", "realizations", "t0"] {
        assert!(err.contains(needle), "{needle} missing from: {err}");
    }
    let cfg = write(dir.path(), "typo.toml", "realisations = 3\n");
    assert_eq!(linres(dir.path(), &["memory-curve", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn unstable_experiment_is_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "hot.toml", &format!("{SMALL}rescale_mode = \"as_distributed\"\n").replace("rhos = [0.8]", "rhos = [3.0]"));
    let o = linres(dir.path(), &["memory-curve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn manifest_rerun_reproduces_digests() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(linres(&first, &["memory-curve", "--config", &cfg, "--workers", "1"]).status.success());
    let manifest = first.join("memory_curve_manifest.json");
    let o = linres(&second, &["memory-curve", "--from-manifest", manifest.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("recorded digests reproduced"));
    for f in ["memory_curve_raw.csv", "memory_curve.csv"] {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap());
    }

    // A tampered digest must be caught and reported as a failed verification.
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["outputs"][0]["sha256"] = serde_json::Value::String("00".repeat(32));
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&json).unwrap()).unwrap();
    let o = linres(&dir.path().join("third"), &["memory-curve", "--from-manifest", tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // Wrong subcommand for the manifest.
    let o = linres(&dir.path().join("fourth"), &["sr-sweep", "--from-manifest", manifest.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
