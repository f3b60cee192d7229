mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pmsm(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmsm"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("PMSM_OUT")
        .output()
        .expect("binary runs")
}

fn run_dir(o: &Output) -> PathBuf {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    PathBuf::from(v["run_dir"].as_str().unwrap())
}

fn error_of(o: &Output) -> (i32, String) {
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    (o.status.code().unwrap(), v["error"].as_str().unwrap().to_string())
}

#[test]
fn generate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_dir(&pmsm(tmp.path(), &["--seed", "7", "generate", "--n-designs", "20"]));
    let b = run_dir(&pmsm(tmp.path(), &["--seed", "7", "generate", "--n-designs", "20"]));
    assert_ne!(a, b);
    let fa = std::fs::read(a.join("dataset.pmsmds")).unwrap();
    let fb = std::fs::read(b.join("dataset.pmsmds")).unwrap();
    assert_eq!(fa, fb);
    let cfg = std::fs::read_to_string(a.join("config.toml")).unwrap();
    assert!(cfg.contains("seed = 7") && cfg.contains("n_designs = 20"));
}

#[test]
fn train_one_epoch_writes_one_history_row() {
    let tmp = tempfile::tempdir().unwrap();
    let g = run_dir(&pmsm(tmp.path(), &["--seed", "7", "generate", "--n-designs", "20"]));
    let ds = g.join("dataset.pmsmds");
    for mode in ["hybrid", "direct"] {
        let t = run_dir(&pmsm(
            tmp.path(),
            &["train", "--mode", mode, "--dataset", ds.to_str().unwrap(), "--max-epochs", "1"],
        ));
        let hist = std::fs::read_to_string(t.join(format!("history_{mode}.csv"))).unwrap();
        assert_eq!(hist.lines().count(), 2, "{hist}");
        assert!(t.join(format!("{mode}.pmsmck")).exists());
    }
}

#[test]
fn kpi_on_midpoint_matches_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let d = run_dir(&pmsm(tmp.path(), &["kpi"]));
    let kpis: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("kpis.json")).unwrap()).unwrap();
    assert_eq!(common::kpi_mismatch(&kpis, "midpoint_kpis.json"), None);
    let curves = std::fs::read_to_string(d.join("curves.csv")).unwrap();
    assert_eq!(common::csv_mismatch(&curves, "midpoint_curves.csv"), None);
    assert!(d.join("curves.svg").exists());
}

#[test]
fn pipeline_commands_run_on_a_small_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let g = run_dir(&pmsm(tmp.path(), &["--seed", "3", "generate", "--n-designs", "40"]));
    let ds = g.join("dataset.pmsmds");
    let ds = ds.to_str().unwrap();
    let t = run_dir(&pmsm(tmp.path(), &["train", "--dataset", ds, "--max-epochs", "1"]));
    let ck = t.join("hybrid.pmsmck");
    let ck = ck.to_str().unwrap();
    let e = run_dir(&pmsm(tmp.path(), &["evaluate", "--dataset", ds, "--checkpoint", ck]));
    assert!(e.join("measure_metrics.csv").exists() && e.join("kpi_metrics.json").exists());
    let k = run_dir(&pmsm(tmp.path(), &["kpi", "--design", "2", "--dataset", ds, "--checkpoint", ck]));
    assert!(k.join("kpis_hybrid.json").exists());
    let m = run_dir(&pmsm(tmp.path(), &["effmap", "--design", "2", "--dataset", ds, "--checkpoint", ck]));
    for f in ["effmap_classical.csv", "effmap_hybrid.csv", "effmap_difference.csv", "effmap_difference.svg"] {
        assert!(m.join(f).exists(), "{f}");
    }
    let c = run_dir(&pmsm(tmp.path(), &["compare", "--dataset", ds, "--max-epochs", "1", "--fractions", "50,100"]));
    let csv = std::fs::read_to_string(c.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 7 * 2);
    assert!(c.join("comparison.svg").exists());
}

#[test]
fn errors_have_distinct_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = pmsm(tmp.path(), &["train", "--dataset", "does/not/exist"]);
    assert_eq!(error_of(&missing), (4, "missing_file".into()));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[train]\nlearnign_rate = 1.0\n").unwrap();
    let bad = pmsm(tmp.path(), &["--config", cfg.to_str().unwrap(), "kpi"]);
    assert_eq!(error_of(&bad), (3, "config".into()));

    let g = run_dir(&pmsm(tmp.path(), &["generate", "--n-designs", "20"]));
    let mut bytes = std::fs::read(g.join("dataset.pmsmds")).unwrap();
    let n = bytes.len();
    bytes[n - 3] ^= 0x40;
    let corrupt = tmp.path().join("corrupt.pmsmds");
    std::fs::write(&corrupt, &bytes).unwrap();
    let c = pmsm(tmp.path(), &["train", "--dataset", corrupt.to_str().unwrap()]);
    assert_eq!(error_of(&c), (5, "checksum".into()));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 11\n[grid]\nn_designs = 12\n").unwrap();
    let a = run_dir(&pmsm(tmp.path(), &["--config", cfg.to_str().unwrap(), "generate"]));
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("dataset_summary.json")).unwrap()).unwrap();
    assert_eq!((s["seed"].as_u64(), s["n_designs"].as_u64()), (Some(11), Some(12)));
    let b = run_dir(&pmsm(
        tmp.path(),
        &["--config", cfg.to_str().unwrap(), "--seed", "5", "generate", "--n-designs", "10"],
    ));
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("dataset_summary.json")).unwrap()).unwrap();
    assert_eq!((s["seed"].as_u64(), s["n_designs"].as_u64()), (Some(5), Some(10)));
    assert!(b.file_name().unwrap().to_str().unwrap().ends_with("_seed5"));
}

#[test]
fn help_lists_flags() {
    for (cmd, flags) in [
        ("generate", &["--n-designs", "--config", "--seed", "--out", "--preset"][..]),
        ("train", &["--mode", "--dataset", "--max-epochs", "--learning-rate"][..]),
        ("evaluate", &["--dataset", "--checkpoint"][..]),
        ("kpi", &["--design", "--design-file", "--checkpoint"][..]),
        ("effmap", &["--design", "--checkpoint"][..]),
        ("compare", &["--fractions", "--dataset"][..]),
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_pmsm")).args([cmd, "--help"]).output().unwrap();
        let text = String::from_utf8(o.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}
