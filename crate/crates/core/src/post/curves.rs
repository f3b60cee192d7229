//! Characteristic curves versus speed.

use serde::{Deserialize, Serialize};

use super::limit::{limit_curve, LimitCurve, SearchSettings};
use super::maps::DqMaps;

/// Relative tolerance of the short-circuit root solves.
pub const SC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCurves {
    pub limit: LimitCurve,
    /// Open-circuit phase voltage amplitude (V) per speed.
    pub open_circuit_voltage: Vec<f64>,
    /// Steady short-circuit current amplitude (A) per speed; NaN where the
    /// root lies outside the mapped current range.
    pub short_circuit_current: Vec<f64>,
}

impl CharacteristicCurves {
    pub fn speeds(&self) -> Vec<f64> {
        self.limit.points.iter().map(|p| p.speed).collect()
    }
}

pub fn open_circuit_voltage(maps: &DqMaps, rpm: f64) -> f64 {
    maps.voltage_magnitude(0.0, 0.0, rpm)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Angle in [90, 180] deg where `u_d` vanishes at current `i`.
fn sc_alpha(maps: &DqMaps, i: f64, rpm: f64) -> f64 {
    let ud = |a: f64| maps.voltage_dq(i, a, rpm).0;
    const SCAN: usize = 90;
    let mut prev_a = 90.0;
    let mut prev = ud(prev_a);
    if prev == 0.0 {
        return prev_a;
    }
    for k in 1..=SCAN {
        let a = 90.0 + 90.0 * k as f64 / SCAN as f64;
        let v = ud(a);
        if v == 0.0 || (v > 0.0) != (prev > 0.0) {
            return bisect(prev_a, a, ud, 1e-12);
        }
        prev_a = a;
        prev = v;
    }
    // No sign change: take the angle of smallest |u_d|.
    (0..=SCAN)
        .map(|k| 90.0 + 90.0 * k as f64 / SCAN as f64)
        .min_by(|&a, &b| ud(a).abs().total_cmp(&ud(b).abs()))
        .unwrap()
}

/// Short-circuit current amplitude at a speed, solving `u_d = u_q = 0`.
///
/// The inner solve picks the angle zeroing `u_d` for a trial current; the
/// outer bisection on current zeroes `u_q`.
pub fn short_circuit_current(maps: &DqMaps, rpm: f64) -> f64 {
    if rpm == 0.0 {
        return 0.0;
    }
    let uq = |i: f64| maps.voltage_dq(i, sc_alpha(maps, i, rpm), rpm).1;
    let i_hi = maps.max_current();
    let f0 = uq(0.0);
    if f0 == 0.0 {
        return 0.0;
    }
    if (uq(i_hi) > 0.0) == (f0 > 0.0) {
        return f64::NAN;
    }
    bisect(0.0, i_hi, uq, SC_TOL)
}

pub fn characteristic_curves(
    maps: &DqMaps,
    speeds: &[f64],
    max_current: f64,
    u_lim: f64,
    search: &SearchSettings,
) -> CharacteristicCurves {
    CharacteristicCurves {
        limit: limit_curve(maps, speeds, max_current, u_lim, search),
        open_circuit_voltage: speeds.iter().map(|&n| open_circuit_voltage(maps, n)).collect(),
        short_circuit_current: speeds.iter().map(|&n| short_circuit_current(maps, n)).collect(),
    }
}
