use std::ffi::CString;
use std::path::{Path, PathBuf};
use std::ptr;

use pmsm_core::dataset::{build_grid, generate};
use pmsm_core::eval::compare::fit_hybrid;
use pmsm_core::machine::MachineModel;
use pmsm_core::nn::checkpoint::{self, Checkpoint};
use pmsm_core::nn::{NetKind, Preset, TrainConfig};
use pmsm_core::post::KPI_NAMES;
use pmsm_ffi::*;

struct Model(*mut PmsmModel);

impl Model {
    fn new() -> Model {
        let mut m = ptr::null_mut();
        assert_eq!(unsafe { pmsm_model_new_default(&mut m) }, PmsmStatus::Ok);
        Model(m)
    }

    fn midpoint(&self) -> Vec<f64> {
        let n = unsafe { pmsm_model_design_dim(self.0) };
        let mut v = vec![0.0; n];
        assert_eq!(unsafe { pmsm_model_midpoint(self.0, v.as_mut_ptr(), n) }, PmsmStatus::Ok);
        v
    }
}

impl Drop for Model {
    fn drop(&mut self) {
        unsafe { pmsm_model_free(self.0) }
    }
}

fn last_error() -> String {
    let mut buf = vec![0u8; 512];
    let n = unsafe { pmsm_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(511));
    String::from_utf8(buf).unwrap()
}

fn fixture_kpis() -> Vec<f64> {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/midpoint_kpis.json");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    KPI_NAMES.iter().map(|k| v[k]["value"].as_f64().unwrap()).collect()
}

#[test]
fn classical_kpis_match_golden_fixture() {
    let m = Model::new();
    let d = m.midpoint();
    let mut k = [0.0; PMSM_N_KPIS];
    assert_eq!(unsafe { pmsm_classical_kpis(m.0, d.as_ptr(), d.len(), k.as_mut_ptr()) }, PmsmStatus::Ok);
    for (a, b) in k.iter().zip(fixture_kpis()) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn simulate_matches_core() {
    let m = Model::new();
    let d = m.midpoint();
    let n = 15;
    let (mut t, mut f, mut l) = (vec![0.0; n], vec![0.0; 3 * n], [0.0; PMSM_N_LOSSES]);
    let st = unsafe {
        pmsm_simulate(m.0, d.as_ptr(), d.len(), 800.0, 30.0, n, t.as_mut_ptr(), f.as_mut_ptr(), l.as_mut_ptr())
    };
    assert_eq!(st, PmsmStatus::Ok);
    let core = MachineModel::default();
    let p = core.ranges.midpoint();
    let op = pmsm_core::machine::OperatingPoint::new(800.0, 30.0, core.system.max_current).unwrap();
    let r = core.simulate(&p, &op, n).unwrap();
    assert_eq!(t, r.torque);
    assert_eq!(&f[n..2 * n], &r.flux[1][..]);
    assert_eq!(l, r.losses.to_array());
}

#[test]
fn errors_map_to_status_codes() {
    let m = Model::new();
    let mut d = m.midpoint();
    let mut k = [0.0; PMSM_N_KPIS];
    d[0] = 99.0;
    assert_eq!(unsafe { pmsm_classical_kpis(m.0, d.as_ptr(), d.len(), k.as_mut_ptr()) }, PmsmStatus::Range);
    assert!(last_error().contains("air_gap"), "{}", last_error());

    assert_eq!(
        unsafe { pmsm_classical_kpis(ptr::null(), d.as_ptr(), d.len(), k.as_mut_ptr()) },
        PmsmStatus::NullPointer
    );
    assert_eq!(unsafe { pmsm_classical_kpis(m.0, d.as_ptr(), 3, k.as_mut_ptr()) }, PmsmStatus::Shape);

    let mut small = [0.0; 3];
    assert_eq!(unsafe { pmsm_model_midpoint(m.0, small.as_mut_ptr(), 3) }, PmsmStatus::Buffer);

    let mut s = ptr::null_mut();
    let path = CString::new("/no/such/checkpoint").unwrap();
    assert_eq!(unsafe { pmsm_surrogate_load(path.as_ptr(), &mut s) }, PmsmStatus::MissingFile);
    assert!(s.is_null());

    // Error message is NUL-terminated and truncated to the buffer.
    let mut tiny = [1 as std::ffi::c_char; 4];
    let full = unsafe { pmsm_last_error_message(tiny.as_mut_ptr(), 4) };
    assert!(full > 4 && tiny[3] == 0);
}

fn trained_checkpoint(dir: &Path) -> (PathBuf, Checkpoint) {
    let model = MachineModel::default();
    let grid = build_grid(model.system.max_current, 6, 6).unwrap();
    let ds = generate(&model, &grid, 40, 15, 5).unwrap();
    let cfg = TrainConfig { max_epochs: 2, patience: 1, seed: 5, ..Default::default() };
    let r = fit_hybrid(&ds, &ds.split.train, &ds.split.val, Preset::Desk, &cfg, &mut |_| {}).unwrap();
    let ck = Checkpoint { kind: NetKind::Hybrid, net: r.net, train: cfg, best_epoch: r.best_epoch, n_steps: 15 };
    let path = dir.join("h.pmsmck");
    checkpoint::save(&ck, &path).unwrap();
    (path, ck)
}

#[test]
fn surrogate_round_trip_and_hybrid_kpis() {
    let tmp = tempfile::tempdir().unwrap();
    let (path, ck) = trained_checkpoint(tmp.path());
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pmsm_surrogate_load(cpath.as_ptr(), &mut s) }, PmsmStatus::Ok);
    assert_eq!(unsafe { pmsm_surrogate_kind(s) }, PmsmNetKind::Hybrid);
    let (ni, no) = unsafe { (pmsm_surrogate_input_dim(s), pmsm_surrogate_output_dim(s)) };
    assert_eq!((ni, no), (37, 64));

    let x: Vec<f64> = (0..2 * ni).map(|k| 0.5 + 0.01 * k as f64).collect();
    let mut y = vec![0.0; 2 * no];
    assert_eq!(unsafe { pmsm_surrogate_predict(s, x.as_ptr(), 2, ni, y.as_mut_ptr(), y.len()) }, PmsmStatus::Ok);
    let want = ck.net.predict(ndarray::ArrayView2::from_shape((2, ni), &x).unwrap()).unwrap();
    assert_eq!(y, want.iter().copied().collect::<Vec<_>>());
    assert_eq!(unsafe { pmsm_surrogate_predict(s, x.as_ptr(), 1, ni - 1, y.as_mut_ptr(), y.len()) }, PmsmStatus::Shape);

    let m = Model::new();
    let d = m.midpoint();
    let mut k = [f64::NAN; PMSM_N_KPIS];
    assert_eq!(unsafe { pmsm_hybrid_kpis(m.0, s, d.as_ptr(), d.len(), k.as_mut_ptr()) }, PmsmStatus::Ok);
    assert!(k.iter().all(|v| v.is_finite()));
    unsafe { pmsm_surrogate_free(s) };
}

#[test]
fn corrupted_checkpoint_reports_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let (path, _) = trained_checkpoint(tmp.path());
    let mut bytes = std::fs::read(&path).unwrap();
    let n = bytes.len();
    bytes[n - 5] ^= 1;
    std::fs::write(&path, bytes).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pmsm_surrogate_load(cpath.as_ptr(), &mut s) }, PmsmStatus::Checksum);
}

/// Builds and runs a C program against the generated header and the static
/// library.
#[test]
fn c_program_links_against_header() {
    let deps = std::env::current_exe().unwrap();
    let lib_dir = deps.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libpmsm_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("t.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "pmsm.h"
int main(void) {
    PmsmModel *m = NULL;
    if (pmsm_model_new_default(&m) != PMSM_STATUS_OK) return 1;
    double d[64], k[PMSM_N_KPIS];
    size_t n = pmsm_model_design_dim(m);
    if (pmsm_model_midpoint(m, d, 64) != PMSM_STATUS_OK) return 2;
    if (pmsm_classical_kpis(m, d, n, k) != PMSM_STATUS_OK) return 3;
    d[0] = -1.0;
    if (pmsm_classical_kpis(m, d, n, k) != PMSM_STATUS_RANGE) return 4;
    char msg[256];
    pmsm_last_error_message(msg, sizeof msg);
    pmsm_model_free(m);
    printf("%.17g\n%s\n", k[0], msg);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("t");
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let st = std::process::Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc available");
    assert!(st.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let z1: f64 = lines.next().unwrap().parse().unwrap();
    assert_eq!(z1, fixture_kpis()[0]);
    assert!(lines.next().unwrap().contains("air_gap"));
}
