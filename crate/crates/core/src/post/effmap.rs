//! Efficiency over the (speed, torque) plane for motor operation.
//!
//! Each loaded cell uses the loss-minimal operating point delivering the
//! demanded torque within the current and voltage limits. Copper loss is
//! `3/2 R I^2`; iron loss is `E_hyst f + E_eddy f^2 / f_ref` from the
//! per-period energies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::limit::{limit_point, linspace, SearchSettings};
use super::maps::DqMaps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffMapSettings {
    pub n_speeds: usize,
    pub n_torques: usize,
    /// Angle samples over [0, 90] deg in the loss-minimal search.
    pub n_alpha: usize,
}

impl Default for EffMapSettings {
    fn default() -> Self {
        EffMapSettings {
            n_speeds: 40,
            n_torques: 41,
            n_alpha: 91,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    NoLoad,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffCell {
    pub speed: f64,
    pub torque: f64,
    pub status: CellStatus,
    pub efficiency: f64,
    pub current: f64,
    pub alpha: f64,
    pub p_shaft: f64,
    pub p_cu: f64,
    pub p_hyst: f64,
    pub p_eddy: f64,
    pub p_in: f64,
    /// The torque-matching search found nothing and the limit-curve
    /// operating point was used instead.
    pub fallback: bool,
}

impl EffCell {
    fn empty(speed: f64, torque: f64, status: CellStatus) -> Self {
        EffCell {
            speed,
            torque,
            status,
            efficiency: 0.0,
            current: 0.0,
            alpha: 0.0,
            p_shaft: 0.0,
            p_cu: 0.0,
            p_hyst: 0.0,
            p_eddy: 0.0,
            p_in: 0.0,
            fallback: false,
        }
    }

    pub fn loaded(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyMap {
    pub speeds: Vec<f64>,
    pub torques: Vec<f64>,
    /// Limit torque at each speed.
    pub limit_torque: Vec<f64>,
    /// Speed-major: `cells[s * torques.len() + t]`.
    pub cells: Vec<EffCell>,
}

impl EfficiencyMap {
    pub fn cell(&self, s: usize, t: usize) -> &EffCell {
        &self.cells[s * self.torques.len() + t]
    }
}

/// Speed axis excluding standstill: `max_speed k / n` for `k = 1..=n`.
pub fn effmap_speeds(max_speed: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| max_speed * k as f64 / n as f64).collect()
}

pub fn effmap_torques(torque_max: f64, n: usize) -> Vec<f64> {
    linspace(0.0, torque_max, n)
}

fn bisect_current(maps: &DqMaps, alpha: f64, target: f64, i_hi: f64) -> Option<f64> {
    let f = |i: f64| maps.torque(i, alpha) - target;
    if f(i_hi) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, i_hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 * i_hi {
            break;
        }
    }
    Some(hi)
}

fn powers(maps: &DqMaps, speed: f64, torque: f64, current: f64, alpha: f64) -> EffCell {
    let l = maps.losses(current, alpha);
    let (p_hyst, p_eddy) = maps.iron_loss_power(&l, speed);
    let p_cu = 1.5 * maps.resistance * current * current;
    let p_shaft = torque * 2.0 * std::f64::consts::PI * speed / 60.0;
    let p_in = p_shaft + p_cu + p_hyst + p_eddy;
    EffCell {
        speed,
        torque,
        status: CellStatus::Ok,
        efficiency: if p_in > 0.0 { p_shaft / p_in } else { 0.0 },
        current,
        alpha,
        p_shaft,
        p_cu,
        p_hyst,
        p_eddy,
        p_in,
        fallback: false,
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_cell(
    maps: &DqMaps,
    speed: f64,
    torque: f64,
    t_lim: f64,
    max_current: f64,
    u_lim: f64,
    cfg: &EffMapSettings,
    search: &SearchSettings,
) -> EffCell {
    if torque == 0.0 {
        return EffCell::empty(speed, torque, CellStatus::NoLoad);
    }
    if torque > t_lim {
        return EffCell::empty(speed, torque, CellStatus::Infeasible);
    }
    let i_hi = max_current.min(maps.max_current());
    let mut best: Option<EffCell> = None;
    for alpha in linspace(0.0, 90.0, cfg.n_alpha) {
        let Some(i) = bisect_current(maps, alpha, torque, i_hi) else {
            continue;
        };
        if maps.voltage_magnitude(i, alpha, speed) > u_lim * (1.0 + 1e-12) {
            continue;
        }
        let c = powers(maps, speed, torque, i, alpha);
        if best.is_none_or(|b| c.p_in < b.p_in) {
            best = Some(c);
        }
    }
    best.unwrap_or_else(|| {
        let lp = limit_point(maps, speed, max_current, u_lim, search);
        let mut c = powers(maps, speed, torque, lp.current, lp.alpha);
        c.fallback = true;
        c
    })
}

pub fn efficiency_map(
    maps: &DqMaps,
    speeds: &[f64],
    torques: &[f64],
    max_current: f64,
    u_lim: f64,
    cfg: &EffMapSettings,
    search: &SearchSettings,
) -> EfficiencyMap {
    let limit_torque: Vec<f64> = speeds
        .par_iter()
        .map(|&n| {
            let p = limit_point(maps, n, max_current, u_lim, search);
            if p.feasible {
                p.torque
            } else {
                0.0
            }
        })
        .collect();
    let nt = torques.len();
    let cells = (0..speeds.len() * nt)
        .into_par_iter()
        .map(|k| {
            let (s, t) = (k / nt, k % nt);
            solve_cell(maps, speeds[s], torques[t], limit_torque[s], max_current, u_lim, cfg, search)
        })
        .collect();
    EfficiencyMap {
        speeds: speeds.to_vec(),
        torques: torques.to_vec(),
        limit_torque,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceMap {
    pub speeds: Vec<f64>,
    pub torques: Vec<f64>,
    /// `|eta_a - eta_b|` where both cells are loaded and feasible, else 0.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// Flat index of the largest difference.
    pub argmax: Option<usize>,
}

impl DifferenceMap {
    pub fn max(&self) -> f64 {
        self.argmax.map_or(0.0, |k| self.values[k])
    }
}

pub fn difference_map(a: &EfficiencyMap, b: &EfficiencyMap) -> DifferenceMap {
    let mut values = Vec::with_capacity(a.cells.len());
    let mut valid = Vec::with_capacity(a.cells.len());
    for (x, y) in a.cells.iter().zip(&b.cells) {
        let ok = x.loaded() && y.loaded();
        let d = if ok { (x.efficiency - y.efficiency).abs() } else { 0.0 };
        values.push(if d.is_finite() { d } else { 0.0 });
        valid.push(ok && d.is_finite());
    }
    let argmax = (0..values.len())
        .filter(|&k| valid[k])
        .max_by(|&i, &j| values[i].total_cmp(&values[j]));
    DifferenceMap {
        speeds: a.speeds.clone(),
        torques: a.torques.clone(),
        values,
        valid,
        argmax,
    }
}
