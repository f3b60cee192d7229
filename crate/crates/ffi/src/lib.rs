//! C ABI over the analytic model, the classical post-processing path and
//! trained surrogate checkpoints.
//!
//! Every fallible function returns a [`PmsmStatus`]; on failure a message is
//! kept per thread and can be read with [`pmsm_last_error_message`]. Handles
//! are opaque and must be released with their `_free` function. Panics are
//! caught at the boundary and reported as [`PmsmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pmsm_core::dataset::{build_grid, OperatingPointGrid};
use pmsm_core::machine::{DesignParams, MachineModel, OperatingPoint};
use pmsm_core::nn::checkpoint::{self, Checkpoint};
use pmsm_core::nn::{predict_measures, NetKind};
use pmsm_core::post::{classical_kpis, evaluate_design, PostSettings, N_KPIS};
use pmsm_core::Error;

pub const PMSM_N_KPIS: usize = 7;
pub const PMSM_N_LOSSES: usize = 4;

const _: () = assert!(PMSM_N_KPIS == N_KPIS);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmsmStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Range = 3,
    Shape = 4,
    Numeric = 5,
    Format = 6,
    Version = 7,
    Truncated = 8,
    Checksum = 9,
    MissingFile = 10,
    Io = 11,
    Diverged = 12,
    /// Output buffer too small.
    Buffer = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmsmNetKind {
    Hybrid = 0,
    Direct = 1,
}

/// Machine model with the operating-point grid and post-processing settings
/// used by the classical and hybrid paths.
pub struct PmsmModel {
    model: MachineModel,
    grid: OperatingPointGrid,
    n_steps: usize,
    post: PostSettings,
}

/// A loaded network checkpoint.
pub struct PmsmSurrogate {
    ck: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> PmsmStatus {
    match e.kind() {
        "config" => PmsmStatus::Config,
        "range" => PmsmStatus::Range,
        "shape" => PmsmStatus::Shape,
        "numeric" => PmsmStatus::Numeric,
        "format" => PmsmStatus::Format,
        "version" => PmsmStatus::Version,
        "truncated" => PmsmStatus::Truncated,
        "checksum" => PmsmStatus::Checksum,
        "missing_file" => PmsmStatus::MissingFile,
        "diverged" => PmsmStatus::Diverged,
        _ => PmsmStatus::Io,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
    Buffer { need: usize, got: usize },
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PmsmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            PmsmStatus::Ok
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PmsmStatus::NullPointer
        }
        Ok(Err(Fail::Buffer { need, got })) => {
            set_error(format!("output buffer holds {got} values, {need} needed"));
            PmsmStatus::Buffer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PmsmStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, need: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if n < need {
        return Err(Fail::Buffer { need, got: n });
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

fn design(model: &MachineModel, v: &[f64]) -> Result<DesignParams, Fail> {
    let p = DesignParams::from_vector(v)?;
    model.ranges.check(&p)?;
    Ok(p)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pmsm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Default machine with the 6 x 6 grid and 15 waveform steps.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pmsm_model_new_default(out: *mut *mut PmsmModel) -> PmsmStatus {
    pmsm_model_new(6, 6, 15, out)
}

/// Default machine with a custom operating-point grid.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn pmsm_model_new(
    n_amplitudes: usize,
    n_angles: usize,
    n_steps: usize,
    out: *mut *mut PmsmModel,
) -> PmsmStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        if n_steps < 2 {
            return Err(Error::config("n_steps must be >= 2").into());
        }
        let model = MachineModel::default();
        let grid = build_grid(model.system.max_current, n_amplitudes, n_angles)?;
        let m = PmsmModel {
            model,
            grid,
            n_steps,
            post: PostSettings::default(),
        };
        *out = Box::into_raw(Box::new(m));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a pointer from `pmsm_model_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pmsm_model_free(m: *mut PmsmModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Length of the design vector.
///
/// # Safety
/// `m` must be a live model handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pmsm_model_design_dim(m: *const PmsmModel) -> usize {
    m.as_ref().map_or(0, |m| m.model.ranges.dim)
}

/// Writes the midpoint design into `out` (`len >= design_dim`).
///
/// # Safety
/// `m` must be a live model handle; `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pmsm_model_midpoint(m: *const PmsmModel, out: *mut f64, len: usize) -> PmsmStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let v = m.model.ranges.midpoint().to_vector();
        slice_mut(out, len, v.len(), "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Runs the analytic model at one operating point. `torque` receives
/// `n_steps` samples, `flux` three phase waveforms back to back
/// (`3 n_steps`), `losses` the four per-period energies in the order eddy
/// rotor, eddy stator, hysteresis rotor, hysteresis stator.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pmsm_simulate(
    m: *const PmsmModel,
    design_vec: *const f64,
    design_len: usize,
    current: f64,
    alpha_deg: f64,
    n_steps: usize,
    torque: *mut f64,
    flux: *mut f64,
    losses: *mut f64,
) -> PmsmStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let p = design(&m.model, slice(design_vec, design_len, "design")?)?;
        let op = OperatingPoint::new(current, alpha_deg, m.model.system.max_current)?;
        let r = m.model.simulate(&p, &op, n_steps)?;
        let t = slice_mut(torque, n_steps, n_steps, "torque")?;
        let f = slice_mut(flux, 3 * n_steps, 3 * n_steps, "flux")?;
        let l = slice_mut(losses, PMSM_N_LOSSES, PMSM_N_LOSSES, "losses")?;
        t.copy_from_slice(&r.torque);
        for k in 0..3 {
            f[k * n_steps..(k + 1) * n_steps].copy_from_slice(&r.flux[k]);
        }
        l.copy_from_slice(&r.losses.to_array());
        Ok(())
    })
}

/// KPIs `z1..z7` from the analytic model through the post-processor.
///
/// # Safety
/// `kpis` must be valid for 7 doubles, `design_vec` for `design_len`.
#[no_mangle]
pub unsafe extern "C" fn pmsm_classical_kpis(
    m: *const PmsmModel,
    design_vec: *const f64,
    design_len: usize,
    kpis: *mut f64,
) -> PmsmStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let p = design(&m.model, slice(design_vec, design_len, "design")?)?;
        let out = slice_mut(kpis, PMSM_N_KPIS, PMSM_N_KPIS, "kpis")?;
        let e = classical_kpis(&m.model, &p, &m.grid, m.n_steps, &m.post)?;
        out.copy_from_slice(&e.kpis.to_array());
        Ok(())
    })
}

/// Loads a checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_load(path: *const c_char, out: *mut *mut PmsmSurrogate) -> PmsmStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Error::config("path is not UTF-8"))?;
        let ck = checkpoint::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(PmsmSurrogate { ck }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a pointer from `pmsm_surrogate_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_free(s: *mut PmsmSurrogate) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live surrogate handle.
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_kind(s: *const PmsmSurrogate) -> PmsmNetKind {
    match s.as_ref().map(|s| s.ck.kind) {
        Some(NetKind::Direct) => PmsmNetKind::Direct,
        _ => PmsmNetKind::Hybrid,
    }
}

/// # Safety
/// `s` must be a live surrogate handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_input_dim(s: *const PmsmSurrogate) -> usize {
    s.as_ref().map_or(0, |s| s.ck.net.topology.input_dim)
}

/// # Safety
/// `s` must be a live surrogate handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_output_dim(s: *const PmsmSurrogate) -> usize {
    s.as_ref().map_or(0, |s| s.ck.net.topology.output_dim())
}

/// Raw network prediction in physical units. `x` is row-major
/// `n_rows x input_dim`; `out` receives row-major `n_rows x output_dim`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pmsm_surrogate_predict(
    s: *const PmsmSurrogate,
    x: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
    out_len: usize,
) -> PmsmStatus {
    guard(|| {
        let s = handle(s, "surrogate")?;
        let xs = slice(x, n_rows * n_cols, "x")?;
        let x = ndarray::ArrayView2::from_shape((n_rows, n_cols), xs)
            .map_err(|_| Error::config("n_rows * n_cols overflows"))?;
        let y = s.ck.net.predict(x)?;
        let dst = slice_mut(out, out_len, y.len(), "out")?;
        for (d, v) in dst.iter_mut().zip(y.iter()) {
            *d = *v;
        }
        Ok(())
    })
}

/// KPIs through a hybrid network: predicted measures on the model grid, then
/// the post-processor.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `kpis` for 7 doubles.
#[no_mangle]
pub unsafe extern "C" fn pmsm_hybrid_kpis(
    m: *const PmsmModel,
    s: *const PmsmSurrogate,
    design_vec: *const f64,
    design_len: usize,
    kpis: *mut f64,
) -> PmsmStatus {
    guard(|| {
        let m = handle(m, "model")?;
        let s = handle(s, "surrogate")?;
        if s.ck.kind != NetKind::Hybrid {
            return Err(Error::config("surrogate is not a hybrid network").into());
        }
        if s.ck.n_steps != m.n_steps {
            return Err(Error::config(format!(
                "surrogate waveform length {} differs from the model's {}",
                s.ck.n_steps, m.n_steps
            ))
            .into());
        }
        let p = design(&m.model, slice(design_vec, design_len, "design")?)?;
        let out = slice_mut(kpis, PMSM_N_KPIS, PMSM_N_KPIS, "kpis")?;
        let pred = predict_measures(&s.ck.net, &p, &m.grid, m.n_steps)?;
        let e = evaluate_design(&m.model, &p, &pred.measures, &m.grid, &m.post)?;
        out.copy_from_slice(&e.kpis.to_array());
        Ok(())
    })
}
