//! Maximum-torque curve under current and voltage limits.

use serde::{Deserialize, Serialize};

use super::maps::DqMaps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    /// Points per axis of the coarse `(I, alpha)` lattice.
    pub coarse: usize,
    /// Points per axis of each refinement lattice.
    pub refine: usize,
    pub refine_rounds: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            coarse: 61,
            refine: 21,
            refine_rounds: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub speed: f64,
    pub torque: f64,
    pub shaft_power: f64,
    pub current: f64,
    pub alpha: f64,
    pub ripple: f64,
    pub voltage: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCurve {
    pub points: Vec<LimitPoint>,
}

impl LimitCurve {
    pub fn feasible(&self) -> impl Iterator<Item = &LimitPoint> {
        self.points.iter().filter(|p| p.feasible)
    }

    /// Limit torque at `speed`, linear between samples; 0 where infeasible
    /// or outside the sampled range.
    pub fn torque_at(&self, speed: f64) -> f64 {
        let pts = &self.points;
        if pts.is_empty() || speed < pts[0].speed || speed > pts[pts.len() - 1].speed {
            return 0.0;
        }
        let k = pts.partition_point(|p| p.speed <= speed);
        if k == 0 {
            return if pts[0].feasible { pts[0].torque } else { 0.0 };
        }
        let a = &pts[k - 1];
        if a.speed == speed || k == pts.len() {
            return if a.feasible { a.torque } else { 0.0 };
        }
        let b = &pts[k];
        let ta = if a.feasible { a.torque } else { 0.0 };
        let tb = if b.feasible { b.torque } else { 0.0 };
        ta + (tb - ta) * (speed - a.speed) / (b.speed - a.speed)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Feasibility slack on the voltage bound, relative.
const V_TOL: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Candidate {
    current: f64,
    alpha: f64,
    torque: f64,
    voltage: f64,
}

/// Best feasible point on a lattice, or the lowest-voltage point when none
/// is feasible.
fn scan(maps: &DqMaps, rpm: f64, u_lim: f64, currents: &[f64], alphas: &[f64]) -> (Option<Candidate>, Candidate) {
    let mut best: Option<Candidate> = None;
    let mut closest = Candidate {
        current: 0.0,
        alpha: 0.0,
        torque: 0.0,
        voltage: f64::INFINITY,
    };
    for &i in currents {
        for &a in alphas {
            let v = maps.voltage_magnitude(i, a, rpm);
            let c = Candidate {
                current: i,
                alpha: a,
                torque: maps.torque(i, a),
                voltage: v,
            };
            if v <= u_lim * (1.0 + V_TOL) {
                if best.is_none_or(|b| c.torque > b.torque) {
                    best = Some(c);
                }
            } else if v < closest.voltage {
                closest = c;
            }
        }
    }
    (best, closest)
}

/// Maximum feasible mean torque at one speed.
pub fn limit_point(maps: &DqMaps, rpm: f64, max_current: f64, u_lim: f64, s: &SearchSettings) -> LimitPoint {
    let i_hi = max_current.min(maps.max_current());
    let mut di = i_hi / (s.coarse.max(2) - 1) as f64;
    let mut da = 180.0 / (s.coarse.max(2) - 1) as f64;
    let (mut best, mut closest) = scan(maps, rpm, u_lim, &linspace(0.0, i_hi, s.coarse), &linspace(0.0, 180.0, s.coarse));
    for _ in 0..s.refine_rounds {
        let centre = best.unwrap_or(closest);
        let currents = linspace((centre.current - di).max(0.0), (centre.current + di).min(i_hi), s.refine);
        let alphas = linspace((centre.alpha - da).max(0.0), (centre.alpha + da).min(180.0), s.refine);
        let (b, c) = scan(maps, rpm, u_lim, &currents, &alphas);
        if let Some(b) = b {
            if best.is_none_or(|x| b.torque > x.torque) {
                best = Some(b);
            }
        }
        if c.voltage < closest.voltage {
            closest = c;
        }
        di *= 2.0 / (s.refine.max(2) - 1) as f64;
        da *= 2.0 / (s.refine.max(2) - 1) as f64;
    }
    match best {
        Some(b) => LimitPoint {
            speed: rpm,
            torque: b.torque,
            shaft_power: b.torque * 2.0 * std::f64::consts::PI * rpm / 60.0,
            current: b.current,
            alpha: b.alpha,
            ripple: maps.ripple(b.current, b.alpha),
            voltage: b.voltage,
            feasible: true,
        },
        None => LimitPoint {
            speed: rpm,
            torque: 0.0,
            shaft_power: 0.0,
            current: closest.current,
            alpha: closest.alpha,
            ripple: 0.0,
            voltage: closest.voltage,
            feasible: false,
        },
    }
}

pub fn limit_curve(maps: &DqMaps, speeds: &[f64], max_current: f64, u_lim: f64, s: &SearchSettings) -> LimitCurve {
    LimitCurve {
        points: speeds.iter().map(|&n| limit_point(maps, n, max_current, u_lim, s)).collect(),
    }
}
