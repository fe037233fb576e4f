//! Training, alpha sweeps, perturbed evaluation, Table-style reporting and plots.

mod config;
mod eval;
mod plot;
mod report;
mod sweep;
mod train;

pub use config::TrainConfig;
pub use eval::{evaluate, EvalOptions, EvalReport};
pub use plot::{plot_metrics, read_metrics_csv};
pub use report::{load_reports, report_table, ReferenceScores, Table, REFERENCE};
pub use sweep::{alpha_sweep, SweepRun};
pub use train::{
    initial_params, metrics_csv, random_policy_baseline, train, MetricsRow, TrainOutcome,
    CONFIG_FILE, FINAL_CHECKPOINT, METRICS_FILE, METRICS_HEADER,
};

/// Arithmetic mean and population standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
