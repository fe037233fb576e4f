use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::TrainConfig;
use super::train::{train, TrainOutcome};

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub alpha: f64,
    pub repeat: usize,
    pub seed: u64,
    pub dir: PathBuf,
    pub outcome: TrainOutcome,
}

/// Directory name for one sweep run.
fn run_dir(alpha: f64, repeat: usize, repeats: usize) -> String {
    if repeats == 1 {
        format!("alpha_{alpha}")
    } else {
        format!("alpha_{alpha}_r{repeat}")
    }
}

/// One foveated training run per `(alpha, repeat)`; repeat `r` uses seed `cfg.seed + r`
/// for every alpha. Writes `summary.csv` next to the run directories.
pub fn alpha_sweep(cfg: &TrainConfig, alphas: &[f64], repeats: usize, out_dir: &Path) -> Result<Vec<SweepRun>> {
    if alphas.is_empty() || repeats == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one alpha and one repeat".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("alpha {a} not in [0, 1]")));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut runs = Vec::new();
    let mut summary = String::from("alpha,repeat,seed,final_mean_return,metrics\n");
    for &alpha in alphas {
        for repeat in 0..repeats {
            let mut run_cfg = cfg.clone();
            run_cfg.fovea.enabled = true;
            run_cfg.fovea.alpha = alpha;
            run_cfg.seed = cfg.seed.wrapping_add(repeat as u64);
            let name = run_dir(alpha, repeat, repeats);
            let dir = out_dir.join(&name);
            let outcome = train(&run_cfg, &dir)?;
            let _ = writeln!(
                summary,
                "{alpha},{repeat},{},{:.6},{name}/metrics.csv",
                run_cfg.seed,
                outcome.final_mean_return()
            );
            runs.push(SweepRun {
                alpha,
                repeat,
                seed: run_cfg.seed,
                dir,
                outcome,
            });
        }
    }
    let path = out_dir.join("summary.csv");
    std::fs::write(&path, summary).map_err(|e| Error::io(&path, e))?;
    Ok(runs)
}
