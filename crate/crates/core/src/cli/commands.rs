use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Overrides, RunConfig};
use super::{Cli, Command, CompareArgs, DesignArgs, EvaluateArgs, GenerateArgs, TrainArgs, TrainOverrideArgs};
use crate::dataset::{self, Dataset, OperatingPointGrid};
use crate::error::{Error, Result};
use crate::eval::compare::{
    classical_kpis_for, compare_with_nets, direct_kpis_for, fit_direct, fit_hybrid, hybrid_kpis_for, score_kpis,
    KpiScore,
};
use crate::eval::measures::evaluate_measures;
use crate::eval::report::{comparison_summary, comparison_svg, write_comparison_csv, write_measure_csv};
use crate::machine::{DesignParams, IntermediateMeasures, MachineModel};
use crate::nn::checkpoint::{self, Checkpoint};
use crate::nn::samples::{hybrid_input_dim, predict_measures};
use crate::nn::train::{log_epoch, write_history_csv, FitResult};
use crate::nn::{NetKind, TrainConfig};
use crate::plot::{small_multiples, Heatmap, LinePlot, Series};
use crate::post::effmap::{effmap_speeds, effmap_torques};
use crate::post::export::{write_curves_csv, write_difference_csv, write_effmap_csv, write_json, write_to_file};
use crate::post::{difference_map, efficiency_map, evaluate_design, DesignEvaluation, EfficiencyMap, KPI_NAMES};

/// What a successful command reports on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: &'static str,
    pub run_dir: PathBuf,
    /// File names written inside `run_dir`.
    pub files: Vec<String>,
}

struct Run {
    dir: PathBuf,
    files: Vec<String>,
}

impl Run {
    fn create(cfg: &RunConfig) -> Result<Run> {
        let root = cfg.out_root();
        fs::create_dir_all(&root)?;
        let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
        let base = format!("{stamp}_seed{}", cfg.seed);
        let mut k = 0;
        loop {
            let name = if k == 0 { base.clone() } else { format!("{base}_{k}") };
            let dir = root.join(name);
            match fs::create_dir(&dir) {
                Ok(()) => {
                    let mut run = Run { dir, files: Vec::new() };
                    run.write_text("config.toml", &cfg.to_toml()?)?;
                    return Ok(run);
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => k += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, text)?;
        Ok(())
    }

    fn write_json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        let p = self.path(name);
        write_json(&p, v)
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let p = self.path(name);
        write_to_file(&p, f)
    }

    fn finish(self, command: &'static str) -> Outcome {
        Outcome {
            command,
            run_dir: self.dir,
            files: self.files,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        preset: cli.preset,
        out_root: cli.out.clone(),
    });
    match &cli.command {
        Command::Generate(a) => cmd_generate(cfg, a),
        Command::Train(a) => cmd_train(cfg, a),
        Command::Evaluate(a) => cmd_evaluate(cfg, a),
        Command::Kpi(a) => cmd_kpi(cfg, a),
        Command::Effmap(a) => cmd_effmap(cfg, a),
        Command::Compare(a) => cmd_compare(cfg, a),
    }
}

fn apply_train(t: &mut TrainConfig, a: &TrainOverrideArgs) {
    if let Some(v) = a.max_epochs {
        t.max_epochs = v;
    }
    if let Some(v) = a.learning_rate {
        t.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = a.patience {
        t.patience = v;
    }
    if let Some(v) = a.loss {
        t.loss = v;
    }
    if let Some(v) = a.optimizer {
        t.optimizer = v;
    }
}

fn set_path(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if let Some(p) = flag {
        *slot = Some(p.clone());
    }
}

fn require(p: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    p.clone()
        .ok_or_else(|| Error::config(format!("no {what}: pass --{what} or set paths.{what}")))
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    dataset::load(&require(&cfg.paths.dataset, "dataset")?)
}

fn load_checkpoint(path: &Path, want: Option<NetKind>) -> Result<Checkpoint> {
    let ck = checkpoint::load(path)?;
    if let Some(k) = want {
        if ck.kind != k {
            return Err(Error::config(format!(
                "{} holds a {:?} network, expected {:?}",
                path.display(),
                ck.kind,
                k
            )));
        }
    }
    Ok(ck)
}

fn check_hybrid_fits(ck: &Checkpoint, design_dim: usize, n_steps: usize) -> Result<()> {
    if ck.n_steps != n_steps {
        return Err(Error::config(format!(
            "checkpoint waveform length {} differs from the grid's {n_steps}",
            ck.n_steps
        )));
    }
    let want = hybrid_input_dim(design_dim);
    if ck.net.topology.input_dim != want {
        return Err(Error::Shape {
            context: "checkpoint input",
            expected: want,
            got: ck.net.topology.input_dim,
        });
    }
    Ok(())
}

fn cmd_generate(mut cfg: RunConfig, a: &GenerateArgs) -> Result<Outcome> {
    if let Some(n) = a.n_designs {
        cfg.grid.n_designs = n;
    }
    if let Some(n) = a.n_steps {
        cfg.grid.n_steps = n;
    }
    cfg.validate()?;
    let model = cfg.machine()?;
    let grid = cfg.op_grid()?;
    let ds = dataset::generate(&model, &grid, cfg.grid.n_designs, cfg.grid.n_steps, cfg.seed)?;
    let mut run = Run::create(&cfg)?;
    let p = run.path("dataset.pmsmds");
    dataset::save(&ds, &p)?;
    run.write_json(
        "dataset_summary.json",
        &serde_json::json!({
            "n_designs": ds.len(),
            "n_operating_points": ds.grid.len(),
            "n_samples": ds.n_samples(),
            "n_steps": ds.n_steps,
            "design_dim": ds.design_dim(),
            "seed": ds.seed,
            "split": {"train": ds.split.train.len(), "val": ds.split.val.len(), "test": ds.split.test.len()},
        }),
    )?;
    Ok(run.finish("generate"))
}

fn cmd_train(mut cfg: RunConfig, a: &TrainArgs) -> Result<Outcome> {
    set_path(&mut cfg.paths.dataset, &a.dataset);
    apply_train(&mut cfg.train, &a.train);
    cfg.validate()?;
    let ds = load_dataset(&cfg)?;
    let mut run = Run::create(&cfg)?;
    let mode = match a.mode {
        NetKind::Hybrid => "hybrid",
        NetKind::Direct => "direct",
    };
    let stderr = &mut std::io::stderr();
    let mut observer = |r: &crate::nn::EpochRecord| log_epoch(stderr, r);
    let fitted = match a.mode {
        NetKind::Hybrid => fit_hybrid(&ds, &ds.split.train, &ds.split.val, cfg.preset, &cfg.train, &mut observer),
        NetKind::Direct => {
            let all: Vec<usize> = (0..ds.len()).collect();
            let targets: Vec<Vec<f64>> = classical_kpis_for(&ds, &all, &cfg.post)?
                .iter()
                .map(|k| k.to_array().to_vec())
                .collect();
            fit_direct(&ds, &ds.split.train, &ds.split.val, &targets, cfg.preset, &cfg.train, &mut observer)
        }
    };
    let r: FitResult = match fitted {
        Ok(r) => r,
        Err(Error::Diverged { epoch, history }) => {
            write_history_csv(&run.path(&format!("history_{mode}.csv")), &history)?;
            return Err(Error::Diverged { epoch, history });
        }
        Err(e) => return Err(e),
    };
    write_history_csv(&run.path(&format!("history_{mode}.csv")), &r.history)?;
    let n_params = r.net.n_params();
    let ck = Checkpoint {
        kind: a.mode,
        net: r.net,
        train: cfg.train,
        best_epoch: r.best_epoch,
        n_steps: ds.n_steps,
    };
    checkpoint::save(&ck, &run.path(&format!("{mode}.pmsmck")))?;
    run.write_json(
        &format!("train_summary_{mode}.json"),
        &serde_json::json!({
            "kind": a.mode,
            "n_params": n_params,
            "best_epoch": r.best_epoch,
            "epochs_run": r.history.len(),
            "best_val_loss": r.history.iter().find(|h| h.epoch == r.best_epoch).map(|h| h.val_loss),
        }),
    )?;
    Ok(run.finish("train"))
}

fn kpi_scores_json(scores: &[KpiScore]) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (k, s) in scores.iter().enumerate() {
        m.insert(
            KPI_NAMES[k].into(),
            serde_json::json!({
                "mre_percent": s.mre.value,
                "mre_used": s.mre.used,
                "mre_excluded": s.mre.excluded,
                "pcc": s.pcc.value,
                "pcc_degenerate": s.pcc.degenerate,
            }),
        );
    }
    serde_json::Value::Object(m)
}

fn cmd_evaluate(mut cfg: RunConfig, a: &EvaluateArgs) -> Result<Outcome> {
    set_path(&mut cfg.paths.dataset, &a.dataset);
    set_path(&mut cfg.paths.checkpoint, &a.checkpoint);
    cfg.validate()?;
    let ds = load_dataset(&cfg)?;
    let ck = load_checkpoint(&require(&cfg.paths.checkpoint, "checkpoint")?, None)?;
    let test = &ds.split.test;
    let truth = classical_kpis_for(&ds, test, &cfg.post)?;
    let mut run = Run::create(&cfg)?;
    let pred = match ck.kind {
        NetKind::Hybrid => {
            check_hybrid_fits(&ck, ds.design_dim(), ds.n_steps)?;
            let rep = evaluate_measures(&ck.net, &ds, test, cfg.compare.mre_eps)?;
            run.write_with("measure_metrics.csv", |w| write_measure_csv(w, &rep))?;
            run.write_json("measure_metrics.json", &rep)?;
            hybrid_kpis_for(&ck.net, &ds, test, &cfg.post)?.0
        }
        NetKind::Direct => direct_kpis_for(&ck.net, &ds, test)?,
    };
    let scores = score_kpis(&pred, &truth, cfg.compare.mre_eps);
    run.write_json(
        "kpi_metrics.json",
        &serde_json::json!({"kind": ck.kind, "test_designs": test, "kpis": kpi_scores_json(&scores)}),
    )?;
    Ok(run.finish("evaluate"))
}

/// One design with its machine, grid and oracle measures.
struct DesignCase {
    label: serde_json::Value,
    model: MachineModel,
    grid: OperatingPointGrid,
    n_steps: usize,
    params: DesignParams,
    measures: Vec<IntermediateMeasures>,
}

fn design_case(cfg: &RunConfig, a: &DesignArgs) -> Result<DesignCase> {
    if let Some(id) = a.design {
        let ds = load_dataset(cfg)?;
        let d = ds.designs.get(id).ok_or_else(|| {
            Error::config(format!("design {id} out of range ({} designs in dataset)", ds.len()))
        })?;
        return Ok(DesignCase {
            label: serde_json::json!({"dataset_index": id}),
            params: d.params.clone(),
            measures: d.measures.clone(),
            model: ds.model,
            grid: ds.grid,
            n_steps: ds.n_steps,
        });
    }
    let model = cfg.machine()?;
    let (params, label) = match &a.design_file {
        Some(path) => {
            let text = String::from_utf8(crate::container::read_file(path)?)
                .map_err(|_| Error::Format(format!("{} is not UTF-8", path.display())))?;
            let p: DesignParams = serde_json::from_str(&text)?;
            (p, serde_json::json!({"file": path}))
        }
        None => (model.ranges.midpoint(), serde_json::json!("midpoint")),
    };
    model.ranges.check(&params)?;
    let grid = cfg.op_grid()?;
    let measures = crate::post::kpi::oracle_measures(&model, &params, &grid, cfg.grid.n_steps)?;
    Ok(DesignCase {
        label,
        model,
        grid,
        n_steps: cfg.grid.n_steps,
        params,
        measures,
    })
}

fn hybrid_evaluation(cfg: &RunConfig, c: &DesignCase) -> Result<Option<(DesignEvaluation, usize)>> {
    let Some(path) = &cfg.paths.checkpoint else {
        return Ok(None);
    };
    let ck = load_checkpoint(path, Some(NetKind::Hybrid))?;
    check_hybrid_fits(&ck, c.params.dim(), c.n_steps)?;
    let pred = predict_measures(&ck.net, &c.params, &c.grid, c.n_steps)?;
    let e = evaluate_design(&c.model, &c.params, &pred.measures, &c.grid, &cfg.post)?;
    Ok(Some((e, pred.clamped)))
}

fn curves_svg(classical: &DesignEvaluation, hybrid: Option<&DesignEvaluation>) -> String {
    type Pick = fn(&DesignEvaluation) -> Vec<f64>;
    let panels: [(&str, &str, Pick); 5] = [
        ("Limit torque", "torque (Nm)", |e| e.curves.limit.points.iter().map(|p| if p.feasible { p.torque } else { f64::NAN }).collect()),
        ("Shaft power", "power (kW)", |e| e.curves.limit.points.iter().map(|p| if p.feasible { p.shaft_power / 1e3 } else { f64::NAN }).collect()),
        ("Torque ripple on limit curve", "ripple (Nm)", |e| e.curves.limit.points.iter().map(|p| if p.feasible { p.ripple } else { f64::NAN }).collect()),
        ("Open-circuit voltage", "voltage (V)", |e| e.curves.open_circuit_voltage.clone()),
        ("Short-circuit current", "current (A)", |e| e.curves.short_circuit_current.clone()),
    ];
    let xs = classical.curves.speeds();
    let plots: Vec<LinePlot> = panels
        .iter()
        .map(|(title, y, pick)| {
            let mut series = vec![Series { name: "classical".into(), xs: xs.clone(), ys: pick(classical) }];
            if let Some(h) = hybrid {
                series.push(Series { name: "hybrid".into(), xs: h.curves.speeds(), ys: pick(h) });
            }
            LinePlot {
                title: title.to_string(),
                x_label: "speed (rpm)".into(),
                y_label: y.to_string(),
                series,
            }
        })
        .collect();
    small_multiples(&plots, 3, 360.0, 260.0)
}

fn cmd_kpi(mut cfg: RunConfig, a: &DesignArgs) -> Result<Outcome> {
    set_path(&mut cfg.paths.dataset, &a.dataset);
    set_path(&mut cfg.paths.checkpoint, &a.checkpoint);
    cfg.validate()?;
    let c = design_case(&cfg, a)?;
    let classical = evaluate_design(&c.model, &c.params, &c.measures, &c.grid, &cfg.post)?;
    let hybrid = hybrid_evaluation(&cfg, &c)?;
    let mut run = Run::create(&cfg)?;
    run.write_json(
        "design.json",
        &serde_json::json!({"design": c.label, "params": c.params, "mass_cost": classical.mass_cost}),
    )?;
    run.write_json("kpis.json", &classical.kpis.to_json())?;
    run.write_with("curves.csv", |w| write_curves_csv(w, &classical.curves))?;
    if let Some((h, clamped)) = &hybrid {
        let mut j = h.kpis.to_json();
        j["clamped_losses"] = (*clamped).into();
        run.write_json("kpis_hybrid.json", &j)?;
        run.write_with("curves_hybrid.csv", |w| write_curves_csv(w, &h.curves))?;
    }
    if cfg.plots.curves {
        run.write_text("curves.svg", &curves_svg(&classical, hybrid.as_ref().map(|h| &h.0)))?;
    }
    Ok(run.finish("kpi"))
}

fn effmap_heatmap(title: &str, m: &EfficiencyMap) -> Heatmap {
    Heatmap {
        title: title.to_string(),
        x_label: "speed (rpm)".into(),
        y_label: "torque (Nm)".into(),
        xs: m.speeds.clone(),
        ys: m.torques.clone(),
        values: m.cells.iter().map(|c| c.loaded().then_some(c.efficiency)).collect(),
    }
}

fn cmd_effmap(mut cfg: RunConfig, a: &DesignArgs) -> Result<Outcome> {
    set_path(&mut cfg.paths.dataset, &a.dataset);
    set_path(&mut cfg.paths.checkpoint, &a.checkpoint);
    cfg.validate()?;
    let c = design_case(&cfg, a)?;
    let classical = evaluate_design(&c.model, &c.params, &c.measures, &c.grid, &cfg.post)?;
    let hybrid = hybrid_evaluation(&cfg, &c)?;
    let s = &c.model.system;
    let t_max = classical.kpis.z1;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::config("design has no feasible torque on its limit curve"));
    }
    let speeds = effmap_speeds(s.max_speed, cfg.post.effmap.n_speeds);
    let torques = effmap_torques(t_max, cfg.post.effmap.n_torques);
    let map_of = |e: &DesignEvaluation| {
        efficiency_map(&e.maps, &speeds, &torques, s.max_current, s.voltage_limit(), &cfg.post.effmap, &cfg.post.search)
    };
    let eff_c = map_of(&classical);
    let mut run = Run::create(&cfg)?;
    run.write_with("effmap_classical.csv", |w| write_effmap_csv(w, &eff_c))?;
    if cfg.plots.effmap {
        run.write_text("effmap_classical.svg", &effmap_heatmap("Efficiency, classical path", &eff_c).to_svg(640.0, 440.0))?;
    }
    let mut summary = serde_json::json!({"design": c.label, "torque_max": t_max});
    if let Some((h, _)) = &hybrid {
        let eff_h = map_of(h);
        let diff = difference_map(&eff_h, &eff_c);
        run.write_with("effmap_hybrid.csv", |w| write_effmap_csv(w, &eff_h))?;
        run.write_with("effmap_difference.csv", |w| write_difference_csv(w, &diff))?;
        if cfg.plots.effmap {
            run.write_text("effmap_hybrid.svg", &effmap_heatmap("Efficiency, hybrid path", &eff_h).to_svg(640.0, 440.0))?;
            let hm = Heatmap {
                title: "|efficiency difference|, hybrid vs classical".into(),
                x_label: "speed (rpm)".into(),
                y_label: "torque (Nm)".into(),
                xs: diff.speeds.clone(),
                ys: diff.torques.clone(),
                values: diff.values.iter().zip(&diff.valid).map(|(&v, &ok)| ok.then_some(v)).collect(),
            };
            run.write_text("effmap_difference.svg", &hm.to_svg(640.0, 440.0))?;
        }
        let nt = diff.torques.len();
        summary["max_difference"] = diff.max().into();
        if let Some(k) = diff.argmax {
            summary["argmax_speed"] = diff.speeds[k / nt].into();
            summary["argmax_torque"] = diff.torques[k % nt].into();
        }
    }
    run.write_json("effmap_summary.json", &summary)?;
    Ok(run.finish("effmap"))
}

fn cmd_compare(mut cfg: RunConfig, a: &CompareArgs) -> Result<Outcome> {
    set_path(&mut cfg.paths.dataset, &a.dataset);
    if let Some(f) = &a.fractions {
        cfg.compare.fractions = f.clone();
    }
    apply_train(&mut cfg.train, &a.train);
    cfg.validate()?;
    let ds = load_dataset(&cfg)?;
    let settings = cfg.compare_settings();
    let (r, _) = compare_with_nets(&ds, &settings, &mut |m| eprintln!("{m}"))?;
    let mut run = Run::create(&cfg)?;
    run.write_with("comparison.csv", |w| write_comparison_csv(w, &r))?;
    run.write_json("comparison_summary.json", &comparison_summary(&r))?;
    run.write_json("comparison_result.json", &r)?;
    if cfg.plots.compare {
        run.write_text("comparison.svg", &comparison_svg(&r))?;
    }
    Ok(run.finish("compare"))
}
