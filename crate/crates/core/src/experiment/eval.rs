use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{forward, greedy_action, sample_action, Checkpoint, Params};
use crate::error::{Error, Result};
use crate::maze::{self, Action, MazeSpec};
use crate::perturbation::{perturb_indexed, PerturbCategory, PerturbConfig};
use crate::rng::derive_seed;

use super::config::TrainConfig;
use super::train::Observer;

/// Mean and population standard deviation of returns over `k` evaluation games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub category: PerturbCategory,
    pub k: usize,
    pub seed: u64,
    pub mean: f64,
    pub std: f64,
    pub returns: Vec<f64>,
}

impl EvalReport {
    pub fn from_returns(label: impl Into<String>, category: PerturbCategory, seed: u64, returns: Vec<f64>) -> Self {
        let (mean, std) = super::mean_std(&returns);
        Self {
            label: label.into(),
            category,
            k: returns.len(),
            seed,
            mean,
            std,
            returns,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<EvalReport> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Overrides the checkpoint's `eval.sample_actions`.
    pub sample_actions: Option<bool>,
    /// Overrides the checkpoint's perturbation settings.
    pub perturb: Option<PerturbConfig>,
    /// Report label; defaults to the run's `baseline` / `foveated(...)` label.
    pub label: Option<String>,
}

/// Plays `k` full episodes with frames corrupted by `category` before preprocessing.
pub fn evaluate(
    checkpoint: &Checkpoint,
    category: PerturbCategory,
    k: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("evaluation needs k >= 1 games".into()));
    }
    let mut cfg = TrainConfig::parse(&checkpoint.config)?;
    if let Some(p) = opts.perturb {
        p.validate()?;
        cfg.perturb = p;
    }
    let spec = MazeSpec::parse(&checkpoint.maze, cfg.episode_len)?;
    let layout = cfg.agent.layout();
    if checkpoint.params.len() != layout.len() {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds {} parameters but its config describes {}",
            checkpoint.params.len(),
            layout.len()
        )));
    }
    let params = Params::from_vec(layout, checkpoint.params.clone())?;
    let sample = opts.sample_actions.unwrap_or(cfg.eval_sample_actions);
    let perturb = PerturbConfig {
        seed: derive_seed(cfg.perturb.seed, seed),
        ..cfg.perturb
    };
    let frames_per_game = cfg.episode_len as u64 + 1;

    let mut returns = Vec::with_capacity(k);
    for game in 0..k as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed ^ 0xE7A1, game));
        let mut observer = Observer::new(&cfg);
        let (mut state, frame) = maze::reset(&spec, derive_seed(seed, game));
        let mut frame_index = game * frames_per_game;
        let (seen, _) = perturb_indexed(&frame, category, &perturb, frame_index)?;
        let mut input = observer.reset(&seen)?;
        while !state.is_done(&spec) {
            let f = forward(&params, &input)?;
            let action = if sample {
                sample_action(&f.policy, &mut rng)
            } else {
                greedy_action(&f.policy)
            };
            let step = maze::step(&spec, &mut state, Action::from_index(action))?;
            if step.done {
                break;
            }
            frame_index += 1;
            let (seen, _) = perturb_indexed(&step.frame, category, &perturb, frame_index)?;
            input = observer.push(&seen)?;
        }
        returns.push(state.episode_return);
    }
    let label = opts.label.clone().unwrap_or_else(|| cfg.label());
    Ok(EvalReport::from_returns(label, category, seed, returns))
}
