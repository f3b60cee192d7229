//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use pmsm_core::post::KPI_NAMES;

pub const GOLDEN_TOL: f64 = 1e-12;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn close(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || (a - b).abs() <= GOLDEN_TOL * b.abs().max(1.0)
}

/// Largest mismatch description, or `None` when `kpis_json` matches the fixture.
pub fn kpi_mismatch(kpis_json: &serde_json::Value, fixture_name: &str) -> Option<String> {
    let want: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture(fixture_name)).unwrap()).unwrap();
    for k in KPI_NAMES {
        let a = kpis_json[k]["value"].as_f64();
        let b = want[k]["value"].as_f64();
        match (a, b) {
            (Some(a), Some(b)) if close(a, b) => {}
            _ => return Some(format!("{k}: got {a:?}, want {b:?}")),
        }
    }
    None
}

/// Compares two curve CSVs cell by cell, numerically where both parse.
pub fn csv_mismatch(got: &str, fixture_name: &str) -> Option<String> {
    let want = std::fs::read_to_string(fixture(fixture_name)).unwrap();
    let (g, w): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    if g.len() != w.len() {
        return Some(format!("{} rows, want {}", g.len(), w.len()));
    }
    for (r, (gl, wl)) in g.iter().zip(&w).enumerate() {
        let (gc, wc): (Vec<&str>, Vec<&str>) = (gl.split(',').collect(), wl.split(',').collect());
        if gc.len() != wc.len() {
            return Some(format!("row {r}: column count"));
        }
        for (a, b) in gc.iter().zip(&wc) {
            let ok = match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => close(x, y),
                _ => a == b,
            };
            if !ok {
                return Some(format!("row {r}: {a} vs {b}"));
            }
        }
    }
    None
}
