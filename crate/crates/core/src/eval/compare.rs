//! Hybrid versus direct KPI prediction over a sweep of training-set sizes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mre, pcc, Mre, Pcc, MRE_EPS};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::nn::samples::{direct_samples, hybrid_input_dim, hybrid_samples, predict_measures};
use crate::nn::train::{fit, EpochRecord, FitResult, TrainConfig, TrainData};
use crate::nn::{NetTopology, Preset, SurrogateNet};
use crate::post::kpi::{evaluate_design, KpiVector, PostSettings, KPI_NAMES, N_KPIS};

pub const DEFAULT_FRACTIONS: [f64; 6] = [5.0, 10.0, 25.0, 50.0, 75.0, 100.0];

const SUBSET_SALT: u64 = 0x5b5e_7a11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSettings {
    /// Training fractions in percent of the train split.
    pub fractions: Vec<f64>,
    pub preset: Preset,
    pub train: TrainConfig,
    pub post: PostSettings,
    pub mre_eps: f64,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            fractions: DEFAULT_FRACTIONS.to_vec(),
            preset: Preset::Desk,
            train: TrainConfig::default(),
            post: PostSettings::default(),
            mre_eps: MRE_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpiScore {
    pub mre: Mre,
    pub pcc: Pcc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachResult {
    /// One score per KPI, `z1..z7`.
    pub scores: Vec<KpiScore>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Loss components clamped at zero (hybrid only).
    pub clamped: usize,
    pub predictions: Vec<KpiVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionResult {
    pub fraction: f64,
    pub n_train_designs: usize,
    pub hybrid: ApproachResult,
    pub direct: ApproachResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub seed: u64,
    pub test_designs: Vec<usize>,
    pub truth: Vec<KpiVector>,
    pub fractions: Vec<FractionResult>,
}

impl ComparisonResult {
    /// MRE series over fractions for one KPI and approach.
    pub fn mre_series(&self, kpi: usize, hybrid: bool) -> Vec<f64> {
        self.fractions
            .iter()
            .map(|f| if hybrid { &f.hybrid } else { &f.direct }.scores[kpi].mre.value)
            .collect()
    }
}

/// Networks trained for one fraction.
pub struct FractionNets {
    pub hybrid: FitResult,
    pub direct: FitResult,
}

/// Nested, seeded prefix of the training designs.
pub fn train_subset(train: &[usize], fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 100.0) {
        return Err(Error::config(format!("fraction {fraction}% outside (0, 100]")));
    }
    let n = ((fraction / 100.0) * train.len() as f64).ceil() as usize;
    let n = n.min(train.len());
    if n < 2 {
        return Err(Error::config(format!(
            "fraction {fraction}% of {} training designs leaves {n} (< 2)",
            train.len()
        )));
    }
    let mut order = train.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SUBSET_SALT));
    let mut subset = order[..n].to_vec();
    subset.sort_unstable();
    Ok(subset)
}

/// Classical-path KPIs from the dataset's stored oracle measures.
pub fn classical_kpis_for(ds: &Dataset, designs: &[usize], post: &PostSettings) -> Result<Vec<KpiVector>> {
    designs
        .par_iter()
        .map(|&i| {
            let d = &ds.designs[i];
            evaluate_design(&ds.model, &d.params, &d.measures, &ds.grid, post)
                .map(|e| e.kpis)
                .map_err(|e| Error::Design { index: i, source: Box::new(e) })
        })
        .collect()
}

pub fn hybrid_kpis_for(
    net: &SurrogateNet,
    ds: &Dataset,
    designs: &[usize],
    post: &PostSettings,
) -> Result<(Vec<KpiVector>, usize)> {
    let out = designs
        .par_iter()
        .map(|&i| {
            let p = &ds.designs[i].params;
            let pred = predict_measures(net, p, &ds.grid, ds.n_steps)?;
            let e = evaluate_design(&ds.model, p, &pred.measures, &ds.grid, post)?;
            Ok((e.kpis, pred.clamped))
        })
        .collect::<Result<Vec<_>>>()?;
    let clamped = out.iter().map(|o| o.1).sum();
    Ok((out.into_iter().map(|o| o.0).collect(), clamped))
}

pub fn direct_kpis_for(net: &SurrogateNet, ds: &Dataset, designs: &[usize]) -> Result<Vec<KpiVector>> {
    let dummy = vec![vec![0.0; N_KPIS]; ds.len()];
    let (x, _) = direct_samples(ds, designs, &dummy)?;
    let y = net.predict(x.view())?;
    Ok(y.rows()
        .into_iter()
        .map(|r| KpiVector::from_array(std::array::from_fn(|k| r[k])))
        .collect())
}

pub fn score_kpis(pred: &[KpiVector], truth: &[KpiVector], eps: f64) -> Vec<KpiScore> {
    (0..N_KPIS)
        .map(|k| {
            let p: Vec<f64> = pred.iter().map(|v| v.to_array()[k]).collect();
            let t: Vec<f64> = truth.iter().map(|v| v.to_array()[k]).collect();
            KpiScore {
                mre: mre(&p, &t, eps),
                pcc: pcc(&p, &t),
            }
        })
        .collect()
}

pub fn fit_hybrid(
    ds: &Dataset,
    train: &[usize],
    val: &[usize],
    preset: Preset,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<FitResult> {
    let (x_train, y_train) = hybrid_samples(ds, train);
    let (x_val, y_val) = hybrid_samples(ds, val);
    let topo = NetTopology::hybrid(preset, hybrid_input_dim(ds.design_dim()), ds.n_steps);
    let net = SurrogateNet::new(topo, cfg.seed)?;
    fit(net, &TrainData { x_train, y_train, x_val, y_val }, cfg, observer)
}

/// `targets` holds one KPI row per dataset design (only train/val rows are read).
pub fn fit_direct(
    ds: &Dataset,
    train: &[usize],
    val: &[usize],
    targets: &[Vec<f64>],
    preset: Preset,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<FitResult> {
    let (x_train, y_train) = direct_samples(ds, train, targets)?;
    let (x_val, y_val) = direct_samples(ds, val, targets)?;
    let topo = NetTopology::direct(preset, ds.design_dim(), N_KPIS);
    let net = SurrogateNet::new(topo, cfg.seed)?;
    fit(net, &TrainData { x_train, y_train, x_val, y_val }, cfg, observer)
}

/// Runs the sweep and also returns the trained networks per fraction.
pub fn compare_with_nets(
    ds: &Dataset,
    settings: &CompareSettings,
    progress: &mut dyn FnMut(&str),
) -> Result<(ComparisonResult, Vec<FractionNets>)> {
    if settings.fractions.is_empty() {
        return Err(Error::config("at least one training fraction is required"));
    }
    let split = &ds.split;
    let subsets = settings
        .fractions
        .iter()
        .map(|&f| train_subset(&split.train, f, ds.seed))
        .collect::<Result<Vec<_>>>()?;

    progress("classical-path KPIs");
    let all: Vec<usize> = (0..ds.len()).collect();
    let truth_all = classical_kpis_for(ds, &all, &settings.post)?;
    let targets: Vec<Vec<f64>> = truth_all.iter().map(|k| k.to_array().to_vec()).collect();
    let truth: Vec<KpiVector> = split.test.iter().map(|&i| truth_all[i]).collect();

    let mut fractions = Vec::new();
    let mut nets = Vec::new();
    for (&fraction, subset) in settings.fractions.iter().zip(&subsets) {
        progress(&format!("fraction {fraction}%: hybrid net on {} designs", subset.len()));
        let h = fit_hybrid(ds, subset, &split.val, settings.preset, &settings.train, &mut |_| {})?;
        let (h_pred, clamped) = hybrid_kpis_for(&h.net, ds, &split.test, &settings.post)?;
        progress(&format!("fraction {fraction}%: direct net"));
        let d = fit_direct(ds, subset, &split.val, &targets, settings.preset, &settings.train, &mut |_| {})?;
        let d_pred = direct_kpis_for(&d.net, ds, &split.test)?;
        fractions.push(FractionResult {
            fraction,
            n_train_designs: subset.len(),
            hybrid: ApproachResult {
                scores: score_kpis(&h_pred, &truth, settings.mre_eps),
                best_epoch: h.best_epoch,
                epochs_run: h.history.len(),
                clamped,
                predictions: h_pred,
            },
            direct: ApproachResult {
                scores: score_kpis(&d_pred, &truth, settings.mre_eps),
                best_epoch: d.best_epoch,
                epochs_run: d.history.len(),
                clamped: 0,
                predictions: d_pred,
            },
        });
        nets.push(FractionNets { hybrid: h, direct: d });
    }
    Ok((
        ComparisonResult {
            seed: ds.seed,
            test_designs: split.test.clone(),
            truth,
            fractions,
        },
        nets,
    ))
}

pub fn compare(ds: &Dataset, settings: &CompareSettings) -> Result<ComparisonResult> {
    compare_with_nets(ds, settings, &mut |_| {}).map(|r| r.0)
}

pub fn kpi_name(k: usize) -> &'static str {
    KPI_NAMES[k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_nested_and_sized() {
        let train: Vec<usize> = (0..450).collect();
        let a = train_subset(&train, 5.0, 1).unwrap();
        let b = train_subset(&train, 10.0, 1).unwrap();
        assert_eq!(a.len(), 23);
        assert_eq!(b.len(), 45);
        assert!(a.iter().all(|i| b.contains(i)));
        assert_eq!(train_subset(&train, 100.0, 1).unwrap(), train);
    }

    #[test]
    fn tiny_fraction_is_config_error() {
        let train: Vec<usize> = (0..18).collect();
        let e = train_subset(&train, 5.0, 1).unwrap_err();
        assert_eq!(e.kind(), "config");
    }
}
