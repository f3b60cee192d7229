//! Accuracy metrics, per-quantity evaluation of predicted measures and the
//! hybrid-versus-direct comparison.

pub mod compare;
pub mod measures;
pub mod metrics;
pub mod report;

pub use compare::{compare, compare_with_nets, CompareSettings, ComparisonResult, DEFAULT_FRACTIONS};
pub use measures::{evaluate_measures, measure_metrics, MeasureReport, QuantityMetrics};
pub use metrics::{mae, mre, pcc, Mre, Pcc, MRE_EPS};
