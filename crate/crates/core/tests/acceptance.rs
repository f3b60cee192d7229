//! Acceptance checks 1-10. Each prints one PASS/FAIL line; the test fails if
//! any check fails.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmsm_core::dataset::{self, build_grid, generate, Dataset};
use pmsm_core::eval::compare::{compare_with_nets, CompareSettings, ComparisonResult, FractionNets};
use pmsm_core::eval::measures::evaluate_measures;
use pmsm_core::eval::metrics::{mae, mre, pcc, MRE_EPS};
use pmsm_core::eval::report::comparison_svg;
use pmsm_core::machine::{MachineModel, ModelSettings, Range};
use pmsm_core::nn::checkpoint::{self, Checkpoint};
use pmsm_core::nn::samples::predict_measures;
use pmsm_core::nn::{Activation, BranchSpec, LossKind, NetKind, NetTopology, Preset, SurrogateNet, TrainConfig};
use pmsm_core::post::effmap::{effmap_speeds, effmap_torques};
use pmsm_core::post::export::write_curves_csv;
use pmsm_core::post::kpi::oracle_measures;
use pmsm_core::post::{
    classical_kpis, difference_map, efficiency_map, evaluate_design, CellStatus, EfficiencyMap, PostSettings,
};

const BENCH_SEED: u64 = 2024;
const BENCH_DESIGNS: usize = 500;
const N_STEPS: usize = 15;

type Check = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 1. Gradient correctness ---------------------------------------------------

const FD_STEP: f64 = 1e-5;
const GRAD_REL: f64 = 1e-4;
const GRAD_ABS: f64 = 1e-7;

fn gradient_check() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = (0.0f64, String::new());
    let mut n_checked = 0;
    let mut failures = 0;
    for act in [Activation::Elu, Activation::Relu, Activation::Tanh, Activation::Softplus] {
        for loss in [LossKind::Mae, LossKind::Mse, LossKind::Huber] {
            for (common, branches) in [
                (vec![5, 4], vec![(vec![3], 2), (vec![], 3)]),
                (vec![], vec![(vec![4, 3], 2)]),
            ] {
                let topo = NetTopology {
                    input_dim: 3,
                    common,
                    branches: branches
                        .into_iter()
                        .enumerate()
                        .map(|(k, (hidden, output_dim))| BranchSpec { name: format!("b{k}"), hidden, output_dim })
                        .collect(),
                    activation: act,
                };
                let mut net = SurrogateNet::new(topo.clone(), rng.random()).unwrap();
                for p in net.params.iter_mut() {
                    *p += rng.random_range(-0.2..0.2);
                }
                let x = Array2::from_shape_fn((6, 3), |_| rng.random_range(-2.0..2.0));
                let y = Array2::from_shape_fn((6, topo.output_dim()), |_| rng.random_range(-2.0..2.0));
                let (_, g) = net.loss_and_grad(x.view(), y.view(), loss).unwrap();
                for k in 0..net.params.len() {
                    let base = net.params[k];
                    net.params[k] = base + FD_STEP;
                    let lp = net.loss(x.view(), y.view(), loss).unwrap();
                    net.params[k] = base - FD_STEP;
                    let lm = net.loss(x.view(), y.view(), loss).unwrap();
                    net.params[k] = base;
                    let fd = (lp - lm) / (2.0 * FD_STEP);
                    let err = (g[k] - fd).abs();
                    let allowed = (GRAD_REL * g[k].abs().max(fd.abs())).max(GRAD_ABS);
                    n_checked += 1;
                    if err > allowed {
                        failures += 1;
                    }
                    let ratio = err / allowed;
                    if ratio > worst.0 {
                        worst = (ratio, format!("{act:?}/{loss:?} param {k}: analytic {:.6e}, fd {fd:.6e}", g[k]));
                    }
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        failures == 0 && secs < 10.0,
        format!(
            "{n_checked} parameters over 4 activations x 3 losses x 2 topologies, {failures} outside tolerance; worst err/allowed {:.2e} ({}); {secs:.2} s",
            worst.0, worst.1
        ),
    )
}

// 2. Golden fixtures ---------------------------------------------------------

fn golden_fixtures() -> Check {
    let t0 = Instant::now();
    let m = MachineModel::default();
    let grid = build_grid(m.system.max_current, 6, 6).unwrap();
    let p = m.ranges.midpoint();
    let e = classical_kpis(&m, &p, &grid, N_STEPS, &PostSettings::default()).unwrap();
    let mut csv = Vec::new();
    write_curves_csv(&mut csv, &e.curves).unwrap();
    let k = common::kpi_mismatch(&e.kpis.to_json(), "midpoint_kpis.json");
    let c = common::csv_mismatch(&String::from_utf8(csv).unwrap(), "midpoint_curves.csv");
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        k.is_none() && c.is_none() && secs < 5.0,
        format!(
            "midpoint KPIs {}, curve CSV {} (tol {:e}); {secs:.2} s",
            k.unwrap_or_else(|| "match".into()),
            c.unwrap_or_else(|| "matches".into()),
            common::GOLDEN_TOL
        ),
    )
}

// 3. Closed-form oracle ------------------------------------------------------

fn closed_form() -> Check {
    let t0 = Instant::now();
    let mut m = MachineModel::default();
    m.settings = ModelSettings {
        k_sat: 0.0,
        ripple_enabled: false,
        force_non_salient: true,
        ..Default::default()
    };
    // R -> 0 lies below the sampled resistance range; widen it for this machine.
    m.ranges.stator_resistance = Range::new(0.0, m.ranges.stator_resistance.max);
    let grid = build_grid(m.system.max_current, 6, 6).unwrap();
    let mut p = m.ranges.midpoint();
    p.stator_resistance = 0.0;
    let lp = m.derive_lumped_parameters(&p).unwrap();
    let ms = oracle_measures(&m, &p, &grid, N_STEPS).unwrap();
    let e = evaluate_design(&m, &p, &ms, &grid, &PostSettings::default()).unwrap();
    let pp = m.system.pole_pairs as f64;

    let z1_want = 1.5 * pp * lp.psi_pm * m.system.max_current;
    let z1_err = (e.kpis.z1 - z1_want).abs() / z1_want;

    let speeds = e.curves.speeds();
    let last = speeds.len() - 1;
    let slope = (e.curves.open_circuit_voltage[last] - e.curves.open_circuit_voltage[1]) / (speeds[last] - speeds[1]);
    let slope_want = pp * std::f64::consts::TAU / 60.0 * lp.psi_pm;
    let slope_err = (slope - slope_want).abs() / slope_want;

    let isc_want = lp.psi_pm / lp.l_d;
    let isc_err = (e.curves.short_circuit_current[last] - isc_want).abs() / isc_want;
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        z1_err <= 0.005 && slope_err <= 0.01 && isc_err <= 0.01 && secs < 10.0,
        format!(
            "z1 {:.4} vs {z1_want:.4} Nm (rel {z1_err:.2e}, tol 5e-3); open-circuit slope rel {slope_err:.2e}, short-circuit asymptote rel {isc_err:.2e} (tol 1e-2); {secs:.2} s",
            e.kpis.z1
        ),
    )
}

// Shared benchmark (4-7) -----------------------------------------------------

struct Bench {
    ds: Dataset,
    result: ComparisonResult,
    nets: Vec<FractionNets>,
    hybrid_full_secs: f64,
    sweep_secs: f64,
}

fn bench() -> &'static Bench {
    static B: OnceLock<Bench> = OnceLock::new();
    B.get_or_init(|| {
        let m = MachineModel::default();
        let grid = build_grid(m.system.max_current, 6, 6).unwrap();
        let ds = generate(&m, &grid, BENCH_DESIGNS, N_STEPS, BENCH_SEED).unwrap();
        let settings = CompareSettings {
            train: TrainConfig { seed: BENCH_SEED, ..Default::default() },
            ..Default::default()
        };
        let t0 = Instant::now();
        let mut marks: Vec<(String, Instant)> = Vec::new();
        let (result, nets) = compare_with_nets(&ds, &settings, &mut |msg| {
            marks.push((msg.to_string(), Instant::now()));
            let _ = writeln!(std::io::stderr(), "[benchmark {:>6.1} s] {msg}", t0.elapsed().as_secs_f64());
        })
        .unwrap();
        let sweep_secs = t0.elapsed().as_secs_f64();
        let start = marks.iter().position(|(m, _)| m.starts_with("fraction 100%: hybrid")).unwrap();
        let hybrid_full_secs = (marks[start + 1].1 - marks[start].1).as_secs_f64();
        Bench { ds, result, nets, hybrid_full_secs, sweep_secs }
    })
}

fn pipeline_benchmark() -> Check {
    let b = bench();
    let net = &b.nets.last().unwrap().hybrid.net;
    let rep = evaluate_measures(net, &b.ds, &b.ds.split.test, MRE_EPS).unwrap();
    let mut ok = b.hybrid_full_secs <= 600.0;
    let mut parts = Vec::new();
    for q in &rep.quantities {
        if q.quantity == "torque" || q.quantity.starts_with("flux") {
            let pct = 100.0 * q.mae / q.truth_range;
            ok &= pct <= 2.0;
            parts.push(format!("{} MAE {pct:.3}% of range", q.quantity));
        } else {
            ok &= q.mre.value <= 10.0;
            parts.push(format!("{} MRE {:.2}%", q.quantity, q.mre.value));
        }
    }
    verdict(
        ok,
        format!(
            "{} designs, {} test; {}; training {:.0} s (limit 600 s)",
            b.ds.len(),
            b.ds.split.test.len(),
            parts.join(", "),
            b.hybrid_full_secs
        ),
    )
}

fn kpi_fidelity() -> Check {
    let b = bench();
    let full = b.result.fractions.last().unwrap();
    let s = &full.hybrid.scores;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [0, 1, 4, 5] {
        ok &= s[k].pcc.value >= 0.98;
        parts.push(format!("z{} PCC {:.4}", k + 1, s[k].pcc.value));
    }
    for k in [0, 1] {
        ok &= s[k].mre.value <= 5.0;
        parts.push(format!("z{} MRE {:.2}%", k + 1, s[k].mre.value));
    }
    verdict(ok, format!("hybrid at {}% fraction: {}", full.fraction, parts.join(", ")))
}

fn comparison_pattern() -> Check {
    let b = bench();
    let full = b.result.fractions.last().unwrap();
    let mut ok = b.sweep_secs <= 3600.0;
    let mut parts = Vec::new();
    for k in [3, 6] {
        let (h, d) = (full.hybrid.scores[k].mre.value, full.direct.scores[k].mre.value);
        ok &= h <= d;
        parts.push(format!("z{} MRE hybrid {h:.2}% vs direct {d:.2}%", k + 1));
    }
    let svg = comparison_svg(&b.result);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("comparison.svg");
    std::fs::write(&path, &svg).unwrap();
    let panels = svg.matches("MRE (%)").count();
    ok &= panels == 7;
    let fractions: Vec<String> = b.result.fractions.iter().map(|f| format!("{}", f.fraction)).collect();
    verdict(
        ok,
        format!(
            "at 100%: {}; sweep {{{}}}% took {:.0} s (limit 3600 s), report with {panels} panels",
            parts.join(", "),
            fractions.join(","),
            b.sweep_secs
        ),
    )
}

fn bookkeeping_ok(m: &EfficiencyMap) -> (bool, f64) {
    let mut worst = 0.0f64;
    let mut ok = true;
    for c in &m.cells {
        ok &= c.efficiency.is_finite() && (0.0..=1.0).contains(&c.efficiency);
        if c.status == CellStatus::Ok {
            let sum = c.p_shaft + c.p_cu + c.p_hyst + c.p_eddy;
            let rel = ((c.p_in - sum).abs() / c.p_in.abs()).max((c.efficiency - c.p_shaft / c.p_in).abs());
            worst = worst.max(rel);
        }
    }
    (ok && worst <= 1e-9, worst)
}

fn effmap_properties() -> Check {
    let b = bench();
    let ds = &b.ds;
    let id = ds.split.test[0];
    let d = &ds.designs[id];
    let post = PostSettings::default();
    let classical = evaluate_design(&ds.model, &d.params, &d.measures, &ds.grid, &post).unwrap();
    let net = &b.nets.last().unwrap().hybrid.net;
    let pred = predict_measures(net, &d.params, &ds.grid, ds.n_steps).unwrap();
    let hybrid = evaluate_design(&ds.model, &d.params, &pred.measures, &ds.grid, &post).unwrap();
    let s = &ds.model.system;
    let t_max = classical.kpis.z1;
    let speeds = effmap_speeds(s.max_speed, post.effmap.n_speeds);
    let torques = effmap_torques(t_max, post.effmap.n_torques);
    let map = |maps| efficiency_map(maps, &speeds, &torques, s.max_current, s.voltage_limit(), &post.effmap, &post.search);
    let (ec, eh) = (map(&classical.maps), map(&hybrid.maps));
    let (ok_c, worst_c) = bookkeeping_ok(&ec);
    let (ok_h, worst_h) = bookkeeping_ok(&eh);
    let diff = difference_map(&eh, &ec);
    let finite = diff.values.iter().all(|v| v.is_finite());
    let nt = torques.len();
    let (arg_t, arg_n) = diff.argmax.map_or((f64::NAN, f64::NAN), |k| (torques[k % nt], speeds[k / nt]));
    let low = arg_t <= 0.25 * t_max;
    verdict(
        ok_c && ok_h && finite && low,
        format!(
            "design {id}: bookkeeping worst rel {:.1e}; efficiency in [0,1] {}; difference finite {finite}, max {:.4} at {arg_n:.0} rpm / {arg_t:.1} Nm ({:.1}% of T_max {t_max:.1} Nm, low-torque region <= 25%)",
            worst_c.max(worst_h),
            ok_c && ok_h,
            diff.max(),
            100.0 * arg_t / t_max
        ),
    )
}

// 8. Metric oracles ------------------------------------------------------------

fn brute_mre(p: &[f64], t: &[f64], eps: f64) -> f64 {
    let kept: Vec<f64> = p
        .iter()
        .zip(t)
        .filter(|(_, t)| t.abs() >= eps)
        .map(|(p, t)| (p - t).abs() / t.abs())
        .collect();
    100.0 * kept.iter().sum::<f64>() / kept.len() as f64
}

fn brute_pcc(p: &[f64], t: &[f64]) -> f64 {
    let n = p.len() as f64;
    let (mp, mt) = (p.iter().sum::<f64>() / n, t.iter().sum::<f64>() / n);
    let cov: f64 = p.iter().zip(t).map(|(a, b)| (a - mp) * (b - mt)).sum::<f64>() / (n - 1.0);
    let sp = (p.iter().map(|a| (a - mp).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let st = (t.iter().map(|b| (b - mt).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sp * st)
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut affine_worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..200);
        let t: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        let p: Vec<f64> = t.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
        worst = worst.max(rel(mre(&p, &t, MRE_EPS).value, brute_mre(&p, &t, MRE_EPS)));
        let m: f64 = p.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64;
        worst = worst.max(rel(mae(&p, &t), m));
        let r = pcc(&p, &t).value;
        worst = worst.max(rel(r, brute_pcc(&p, &t)));
        let scale = rng.random_range(0.01..100.0);
        let shift = rng.random_range(-100.0..100.0);
        let q: Vec<f64> = p.iter().map(|v| scale * v + shift).collect();
        affine_worst = affine_worst.max((pcc(&q, &t).value - r).abs());
    }
    // Dyadic data with power-of-two scale: every intermediate is exact.
    let t = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0];
    let p = [2.0, 0.0, 5.0, 1.0, -3.0, 7.0, 2.0, 4.0];
    let q: Vec<f64> = p.iter().map(|v| 8.0 * v - 24.0).collect();
    let exact = pcc(&q, &t).value == pcc(&p, &t).value;
    verdict(
        worst <= 1e-12 && affine_worst <= 1e-12 && exact,
        format!(
            "1000 random batches: worst deviation from brute force {worst:.1e}; affine invariance worst {affine_worst:.1e}, bit-exact on dyadic data {exact}"
        ),
    )
}

// 9. Paper-scale topology -------------------------------------------------------

fn paper_topology() -> Check {
    let topo = NetTopology::hybrid(Preset::Paper, 37, N_STEPS);
    let count = topo.n_params();
    let in_band = (2_200_000..=2_400_000).contains(&count);
    let step = (|| -> pmsm_core::Result<f64> {
        let net = SurrogateNet::new(topo.clone(), 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Array2::from_shape_fn((132, 37), |_| rng.random_range(-1.0..1.0));
        let y = Array2::from_shape_fn((132, topo.output_dim()), |_| rng.random_range(-1.0..1.0));
        let (l, g) = net.loss_and_grad(x.view(), y.view(), LossKind::Mae)?;
        Ok(if g.iter().all(|v| v.is_finite()) { l } else { f64::NAN })
    })();
    let step_ok = step.as_ref().is_ok_and(|l| l.is_finite());
    verdict(
        in_band && step_ok,
        format!(
            "paper preset has {count} parameters (required band [2.2M, 2.4M]); forward+backward on a 132-row batch {}",
            if step_ok { "ok" } else { "failed" }
        ),
    )
}

// 10. Persistence ---------------------------------------------------------------

fn corruptions(bytes: &[u8], decode: impl Fn(&[u8]) -> Option<&'static str>) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let mut check = |name: &str, b: Vec<u8>, want: &str| out.push((name.to_string(), decode(&b) == Some(want)));
    check("truncated", bytes[..bytes.len() / 2].to_vec(), "truncated");
    let mut b = bytes.to_vec();
    let n = b.len();
    b[n - 9] ^= 0x10;
    check("bit flip", b, "checksum");
    let mut b = bytes.to_vec();
    b[0] = b'X';
    check("magic", b, "format");
    let mut b = bytes.to_vec();
    b[8..12].copy_from_slice(&99u32.to_le_bytes());
    check("version", b, "version");
    out
}

fn persistence() -> Check {
    let m = MachineModel::default();
    let grid = build_grid(m.system.max_current, 3, 4).unwrap();
    let ds = generate(&m, &grid, 12, N_STEPS, 5).unwrap();
    let bytes = dataset::to_bytes(&ds).unwrap();
    let back = dataset::from_bytes(&bytes).unwrap();
    let ds_ok = back == ds && dataset::to_bytes(&back).unwrap() == bytes;

    let net = SurrogateNet::new(NetTopology::hybrid(Preset::Desk, 37, N_STEPS), 3).unwrap();
    let ck = Checkpoint { kind: NetKind::Hybrid, net, train: TrainConfig::default(), best_epoch: 4, n_steps: N_STEPS };
    let cb = checkpoint::to_bytes(&ck).unwrap();
    let cback = checkpoint::from_bytes(&cb).unwrap();
    let ck_ok = cback == ck
        && checkpoint::to_bytes(&cback).unwrap() == cb
        && cback.net.params.iter().zip(&ck.net.params).all(|(a, b)| a.to_bits() == b.to_bits());

    let mut bad = Vec::new();
    for (name, ok) in corruptions(&bytes, |b| dataset::from_bytes(b).err().map(|e| e.kind())) {
        if !ok {
            bad.push(format!("dataset/{name}"));
        }
    }
    for (name, ok) in corruptions(&cb, |b| checkpoint::from_bytes(b).err().map(|e| e.kind())) {
        if !ok {
            bad.push(format!("checkpoint/{name}"));
        }
    }
    verdict(
        ds_ok && ck_ok && bad.is_empty(),
        format!(
            "dataset round trip bit-exact {ds_ok}, checkpoint round trip bit-exact {ck_ok}; corruption kinds {}",
            if bad.is_empty() { "all as designated".to_string() } else { format!("wrong for {}", bad.join(", ")) }
        ),
    )
}

#[test]
fn acceptance() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("gradient correctness", gradient_check),
        ("classical-path golden fixtures", golden_fixtures),
        ("closed-form KPI oracle", closed_form),
        ("desk-scale hybrid pipeline benchmark", pipeline_benchmark),
        ("hybrid KPI fidelity", kpi_fidelity),
        ("hybrid vs direct comparison pattern", comparison_pattern),
        ("efficiency-map properties", effmap_properties),
        ("metric oracles", metric_oracles),
        ("paper-scale topology", paper_topology),
        ("persistence", persistence),
    ];
    let mut failed = Vec::new();
    let mut lines = Vec::new();
    for (i, (name, f)) in checks.iter().enumerate() {
        let t0 = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = t0.elapsed().as_secs_f64();
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let line = format!("criterion {:>2} {tag}  {name}: {detail} [{took:.1} s]", i + 1);
        let _ = writeln!(std::io::stderr(), "{line}");
        lines.push(line);
        if r.is_err() {
            failed.push(i + 1);
        }
    }
    let _ = writeln!(std::io::stderr(), "\nacceptance summary:\n{}", lines.join("\n"));
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
