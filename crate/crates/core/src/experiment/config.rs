//! Flat `key = value` run configuration with namespaced keys.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::foveation::FoveationConfig;
use crate::maze::MazeSpec;
use crate::perturbation::PerturbConfig;
use crate::saliency::SpectralConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Maze grid file; `None` selects the built-in 7x7 maze.
    pub maze_file: Option<PathBuf>,
    pub episode_len: usize,
    pub agent: AgentConfig,
    pub fovea: FoveationConfig,
    pub spectral: SpectralConfig,
    pub perturb: PerturbConfig,
    pub total_env_steps: u64,
    pub workers: usize,
    pub seed: u64,
    pub checkpoint_every: u64,
    pub metrics_every: u64,
    /// Episodes in the sliding mean reported as `mean_return`.
    pub return_window: usize,
    /// Record elapsed wall time in the metrics CSV. Off keeps the CSV byte-reproducible.
    pub wall_clock: bool,
    /// Evaluation samples actions from the policy; off picks the most likely action.
    pub eval_sample_actions: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            maze_file: None,
            episode_len: 500,
            agent: AgentConfig::default(),
            fovea: FoveationConfig::default(),
            spectral: SpectralConfig::default(),
            perturb: PerturbConfig::default(),
            total_env_steps: 500_000,
            workers: 1,
            seed: 1,
            checkpoint_every: 100_000,
            metrics_every: 1_000,
            return_window: 50,
            wall_clock: false,
            eval_sample_actions: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse {value:?} for {key}"))
}

impl TrainConfig {
    pub const KEYS: &'static [&'static str] = &[
        "maze.file",
        "maze.episode_len",
        "agent.gamma",
        "agent.rollout_n",
        "agent.entropy_beta",
        "agent.value_coef",
        "agent.lr",
        "agent.rmsprop_decay",
        "agent.rmsprop_eps",
        "agent.grad_clip",
        "agent.reward_clip",
        "agent.frame_stack",
        "agent.hidden",
        "agent.rp_skew",
        "agent.rp_coef",
        "agent.replay_capacity",
        "fovea.enabled",
        "fovea.alpha",
        "fovea.overlay_weight",
        "fovea.literal_additive",
        "saliency.working_size",
        "saliency.epsilon",
        "saliency.box_kernel",
        "saliency.blur_sigma",
        "perturb.noise_sigma",
        "perturb.tint_hue",
        "perturb.tint_strength",
        "perturb.coin_p",
        "perturb.seed",
        "train.total_env_steps",
        "train.workers",
        "train.seed",
        "train.checkpoint_every",
        "train.metrics_every",
        "train.return_window",
        "train.wall_clock",
        "eval.sample_actions",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value;
        match key {
            "maze.file" => {
                self.maze_file = match v {
                    "" | "default" => None,
                    path => Some(PathBuf::from(path)),
                }
            }
            "maze.episode_len" => self.episode_len = parse(key, v)?,
            "agent.gamma" => self.agent.gamma = parse(key, v)?,
            "agent.rollout_n" => self.agent.rollout_n = parse(key, v)?,
            "agent.entropy_beta" => self.agent.entropy_beta = parse(key, v)?,
            "agent.value_coef" => self.agent.value_coef = parse(key, v)?,
            "agent.lr" => self.agent.lr = parse(key, v)?,
            "agent.rmsprop_decay" => self.agent.rmsprop_decay = parse(key, v)?,
            "agent.rmsprop_eps" => self.agent.rmsprop_eps = parse(key, v)?,
            "agent.grad_clip" => self.agent.grad_clip = parse(key, v)?,
            "agent.reward_clip" => self.agent.reward_clip = parse(key, v)?,
            "agent.frame_stack" => self.agent.frame_stack = parse(key, v)?,
            "agent.hidden" => self.agent.hidden = parse(key, v)?,
            "agent.rp_skew" => self.agent.rp_skew = parse(key, v)?,
            "agent.rp_coef" => self.agent.rp_coef = parse(key, v)?,
            "agent.replay_capacity" => self.agent.replay_capacity = parse(key, v)?,
            "fovea.enabled" => self.fovea.enabled = parse(key, v)?,
            "fovea.alpha" => self.fovea.alpha = parse(key, v)?,
            "fovea.overlay_weight" => self.fovea.overlay_weight = parse(key, v)?,
            "fovea.literal_additive" => self.fovea.literal_additive = parse(key, v)?,
            "saliency.working_size" => self.spectral.working_size = parse(key, v)?,
            "saliency.epsilon" => self.spectral.epsilon = parse(key, v)?,
            "saliency.box_kernel" => self.spectral.box_kernel = parse(key, v)?,
            "saliency.blur_sigma" => self.spectral.blur_sigma = parse(key, v)?,
            "perturb.noise_sigma" => self.perturb.noise_sigma = parse(key, v)?,
            "perturb.tint_hue" => self.perturb.tint_hue = parse(key, v)?,
            "perturb.tint_strength" => self.perturb.tint_strength = parse(key, v)?,
            "perturb.coin_p" => self.perturb.coin_p = parse(key, v)?,
            "perturb.seed" => self.perturb.seed = parse(key, v)?,
            "train.total_env_steps" => self.total_env_steps = parse(key, v)?,
            "train.workers" => self.workers = parse(key, v)?,
            "train.seed" => self.seed = parse(key, v)?,
            "train.checkpoint_every" => self.checkpoint_every = parse(key, v)?,
            "train.metrics_every" => self.metrics_every = parse(key, v)?,
            "train.return_window" => self.return_window = parse(key, v)?,
            "train.wall_clock" => self.wall_clock = parse(key, v)?,
            "eval.sample_actions" => self.eval_sample_actions = parse(key, v)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "maze.file" => self
                .maze_file
                .as_ref()
                .map_or_else(|| "default".to_string(), |p| p.display().to_string()),
            "maze.episode_len" => self.episode_len.to_string(),
            "agent.gamma" => self.agent.gamma.to_string(),
            "agent.rollout_n" => self.agent.rollout_n.to_string(),
            "agent.entropy_beta" => self.agent.entropy_beta.to_string(),
            "agent.value_coef" => self.agent.value_coef.to_string(),
            "agent.lr" => self.agent.lr.to_string(),
            "agent.rmsprop_decay" => self.agent.rmsprop_decay.to_string(),
            "agent.rmsprop_eps" => self.agent.rmsprop_eps.to_string(),
            "agent.grad_clip" => self.agent.grad_clip.to_string(),
            "agent.reward_clip" => self.agent.reward_clip.to_string(),
            "agent.frame_stack" => self.agent.frame_stack.to_string(),
            "agent.hidden" => self.agent.hidden.to_string(),
            "agent.rp_skew" => self.agent.rp_skew.to_string(),
            "agent.rp_coef" => self.agent.rp_coef.to_string(),
            "agent.replay_capacity" => self.agent.replay_capacity.to_string(),
            "fovea.enabled" => self.fovea.enabled.to_string(),
            "fovea.alpha" => self.fovea.alpha.to_string(),
            "fovea.overlay_weight" => self.fovea.overlay_weight.to_string(),
            "fovea.literal_additive" => self.fovea.literal_additive.to_string(),
            "saliency.working_size" => self.spectral.working_size.to_string(),
            "saliency.epsilon" => self.spectral.epsilon.to_string(),
            "saliency.box_kernel" => self.spectral.box_kernel.to_string(),
            "saliency.blur_sigma" => self.spectral.blur_sigma.to_string(),
            "perturb.noise_sigma" => self.perturb.noise_sigma.to_string(),
            "perturb.tint_hue" => self.perturb.tint_hue.to_string(),
            "perturb.tint_strength" => self.perturb.tint_strength.to_string(),
            "perturb.coin_p" => self.perturb.coin_p.to_string(),
            "perturb.seed" => self.perturb.seed.to_string(),
            "train.total_env_steps" => self.total_env_steps.to_string(),
            "train.workers" => self.workers.to_string(),
            "train.seed" => self.seed.to_string(),
            "train.checkpoint_every" => self.checkpoint_every.to_string(),
            "train.metrics_every" => self.metrics_every.to_string(),
            "train.return_window" => self.return_window.to_string(),
            "train.wall_clock" => self.wall_clock.to_string(),
            "eval.sample_actions" => self.eval_sample_actions.to_string(),
            other => unreachable!("unlisted key {other}"),
        }
    }

    /// Parses config text on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|msg| Error::Config { line: i + 1, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; a relative `maze.file` resolves against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<TrainConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(maze), Some(dir)) = (&cfg.maze_file, path.parent()) {
            if maze.is_relative() {
                cfg.maze_file = Some(dir.join(maze));
            }
        }
        Ok(cfg)
    }

    /// Every key with its current value, one per line, in a fixed order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        self.agent.validate()?;
        self.fovea.validate()?;
        self.spectral.validate()?;
        self.perturb.validate()?;
        if self.episode_len == 0 {
            return bad("maze.episode_len must be >= 1".into());
        }
        if self.workers == 0 {
            return bad("train.workers must be >= 1".into());
        }
        if self.total_env_steps != 0 && self.total_env_steps < self.agent.rollout_n as u64 {
            return bad(format!(
                "train.total_env_steps ({}) is below one rollout ({})",
                self.total_env_steps, self.agent.rollout_n
            ));
        }
        if self.metrics_every == 0 || self.return_window == 0 {
            return bad("train.metrics_every and train.return_window must be >= 1".into());
        }
        Ok(())
    }

    pub fn maze(&self) -> Result<MazeSpec> {
        match &self.maze_file {
            None => MazeSpec::parse(crate::maze::DEFAULT_MAZE, self.episode_len),
            Some(path) => MazeSpec::load(path, self.episode_len),
        }
    }

    /// Short human label: `baseline` or `foveated(alpha=...)`.
    pub fn label(&self) -> String {
        if self.fovea.enabled {
            format!("foveated(alpha={})", self.fovea.alpha)
        } else {
            "baseline".to_string()
        }
    }
}
