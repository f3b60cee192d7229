//! Report writers: CSV rows, JSON summaries and SVG plots.

use std::io::Write;

use serde::Serialize;

use super::compare::ComparisonResult;
use super::measures::MeasureReport;
use crate::error::Result;
use crate::nn::train::csv_err;
use crate::plot::{small_multiples, LinePlot, Series};
use crate::post::kpi::{KPI_LABELS, KPI_NAMES, N_KPIS};

#[derive(Serialize)]
struct CompareRow<'a> {
    kpi: &'a str,
    fraction: f64,
    approach: &'a str,
    mre: f64,
    pcc: f64,
}

/// Columns: `kpi, fraction, approach, mre, pcc` (MRE in percent).
pub fn write_comparison_csv<W: Write>(out: W, r: &ComparisonResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for f in &r.fractions {
        for (k, kpi) in KPI_NAMES.iter().enumerate() {
            for (approach, a) in [("hybrid", &f.hybrid), ("direct", &f.direct)] {
                w.serialize(CompareRow {
                    kpi,
                    fraction: f.fraction,
                    approach,
                    mre: a.scores[k].mre.value,
                    pcc: a.scores[k].pcc.value,
                })
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn comparison_summary(r: &ComparisonResult) -> serde_json::Value {
    let fractions: Vec<serde_json::Value> = r
        .fractions
        .iter()
        .map(|f| {
            let per = |a: &super::compare::ApproachResult| {
                let mut m = serde_json::Map::new();
                for (k, name) in KPI_NAMES.iter().enumerate() {
                    m.insert(
                        (*name).into(),
                        serde_json::json!({
                            "mre_percent": a.scores[k].mre.value,
                            "pcc": a.scores[k].pcc.value,
                            "pcc_degenerate": a.scores[k].pcc.degenerate,
                            "mre_excluded": a.scores[k].mre.excluded,
                        }),
                    );
                }
                serde_json::json!({
                    "kpis": m,
                    "best_epoch": a.best_epoch,
                    "epochs_run": a.epochs_run,
                    "clamped_losses": a.clamped,
                })
            };
            serde_json::json!({
                "fraction_percent": f.fraction,
                "n_train_designs": f.n_train_designs,
                "hybrid": per(&f.hybrid),
                "direct": per(&f.direct),
            })
        })
        .collect();
    serde_json::json!({
        "seed": r.seed,
        "n_test_designs": r.test_designs.len(),
        "fractions": fractions,
    })
}

/// One panel per KPI: MRE against training fraction for both approaches.
pub fn comparison_svg(r: &ComparisonResult) -> String {
    let xs: Vec<f64> = r.fractions.iter().map(|f| f.fraction).collect();
    let panels: Vec<LinePlot> = (0..N_KPIS)
        .map(|k| LinePlot {
            title: format!("{}: {}", KPI_NAMES[k], KPI_LABELS[k]),
            x_label: "training size (%)".into(),
            y_label: "MRE (%)".into(),
            series: vec![
                Series { name: "hybrid".into(), xs: xs.clone(), ys: r.mre_series(k, true) },
                Series { name: "direct".into(), xs: xs.clone(), ys: r.mre_series(k, false) },
            ],
        })
        .collect();
    small_multiples(&panels, 4, 320.0, 240.0)
}

#[derive(Serialize)]
struct MeasureRow<'a> {
    quantity: &'a str,
    unit: &'a str,
    mre_percent: f64,
    mae: f64,
    pcc: f64,
    truth_range: f64,
    n: usize,
    mre_excluded: usize,
}

/// Columns: `quantity, unit, mre_percent, mae, pcc, truth_range, n, mre_excluded`.
pub fn write_measure_csv<W: Write>(out: W, r: &MeasureReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for q in &r.quantities {
        w.serialize(MeasureRow {
            quantity: &q.quantity,
            unit: &q.unit,
            mre_percent: q.mre.value,
            mae: q.mae,
            pcc: q.pcc.value,
            truth_range: q.truth_range,
            n: q.n,
            mre_excluded: q.mre.excluded,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
