//! CSV and JSON writers for curves, maps and KPI records.
//!
//! Curve CSV columns: `speed_rpm, torque_nm, shaft_power_w, current_a,
//! alpha_deg, ripple_nm, voltage_v, feasible, open_circuit_v,
//! short_circuit_a`.
//!
//! Efficiency-map CSV columns: `speed_rpm, torque_nm, status, efficiency,
//! current_a, alpha_deg, p_shaft_w, p_cu_w, p_hyst_w, p_eddy_w, p_in_w,
//! fallback`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::curves::CharacteristicCurves;
use super::effmap::{CellStatus, DifferenceMap, EfficiencyMap};
use crate::error::Result;
use crate::nn::train::csv_err;

#[derive(Serialize)]
struct CurveRow {
    speed_rpm: f64,
    torque_nm: f64,
    shaft_power_w: f64,
    current_a: f64,
    alpha_deg: f64,
    ripple_nm: f64,
    voltage_v: f64,
    feasible: bool,
    open_circuit_v: f64,
    short_circuit_a: f64,
}

pub fn write_curves_csv<W: Write>(out: W, c: &CharacteristicCurves) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (k, p) in c.limit.points.iter().enumerate() {
        w.serialize(CurveRow {
            speed_rpm: p.speed,
            torque_nm: p.torque,
            shaft_power_w: p.shaft_power,
            current_a: p.current,
            alpha_deg: p.alpha,
            ripple_nm: p.ripple,
            voltage_v: p.voltage,
            feasible: p.feasible,
            open_circuit_v: c.open_circuit_voltage[k],
            short_circuit_a: c.short_circuit_current[k],
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EffRow {
    speed_rpm: f64,
    torque_nm: f64,
    status: CellStatus,
    efficiency: f64,
    current_a: f64,
    alpha_deg: f64,
    p_shaft_w: f64,
    p_cu_w: f64,
    p_hyst_w: f64,
    p_eddy_w: f64,
    p_in_w: f64,
    fallback: bool,
}

pub fn write_effmap_csv<W: Write>(out: W, e: &EfficiencyMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &e.cells {
        w.serialize(EffRow {
            speed_rpm: c.speed,
            torque_nm: c.torque,
            status: c.status,
            efficiency: c.efficiency,
            current_a: c.current,
            alpha_deg: c.alpha,
            p_shaft_w: c.p_shaft,
            p_cu_w: c.p_cu,
            p_hyst_w: c.p_hyst,
            p_eddy_w: c.p_eddy,
            p_in_w: c.p_in,
            fallback: c.fallback,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct DiffRow {
    speed_rpm: f64,
    torque_nm: f64,
    abs_diff: f64,
    valid: bool,
}

pub fn write_difference_csv<W: Write>(out: W, d: &DifferenceMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let nt = d.torques.len();
    for (k, (&v, &ok)) in d.values.iter().zip(&d.valid).enumerate() {
        w.serialize(DiffRow {
            speed_rpm: d.speeds[k / nt],
            torque_nm: d.torques[k % nt],
            abs_diff: v,
            valid: ok,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn write_to_file(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}
