//! Worker loop: render, foveate, act, learn. Metrics every `metrics_every`
//! environment steps; checkpoints every `checkpoint_every` and at the end.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{
    a3c_loss_and_grad, forward, rp_loss_and_grad, sample_action, sample_rp_batch, Checkpoint,
    FrameStack, Params, ReplayBuffer, SharedParams, Trajectory,
};
use crate::error::{Error, Result};
use crate::foveation::preprocess_observation;
use crate::imaging::Image;
use crate::maze::{self, Action, MazeSpec};
use crate::rng::derive_seed;

use super::config::TrainConfig;

pub const METRICS_HEADER: &str = "env_steps,wall_seconds,mean_return,entropy,rp_loss";
pub const METRICS_FILE: &str = "metrics.csv";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub env_steps: u64,
    pub wall_seconds: f64,
    pub mean_return: f64,
    pub entropy: f64,
    pub rp_loss: f64,
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{:.3},{:.6},{:.6},{:.6}",
            self.env_steps, self.wall_seconds, self.mean_return, self.entropy, self.rp_loss
        )
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    out
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub rows: Vec<MetricsRow>,
    pub episode_returns: Vec<f64>,
    pub checkpoint: Checkpoint,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

impl TrainOutcome {
    /// Sliding-window mean at the last metrics row, or 0 with no rows.
    pub fn final_mean_return(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.mean_return)
    }
}

/// Agent input pipeline: per-frame preprocessing and the frame stack.
pub(crate) struct Observer<'a> {
    cfg: &'a TrainConfig,
    stack: Option<FrameStack>,
}

impl<'a> Observer<'a> {
    pub(crate) fn new(cfg: &'a TrainConfig) -> Self {
        Self { cfg, stack: None }
    }

    pub(crate) fn reset(&mut self, frame: &Image) -> Result<Arc<[f64]>> {
        let plane = preprocess_observation(frame, &self.cfg.fovea, &self.cfg.spectral)?;
        let stack = FrameStack::new(self.cfg.agent.frame_stack, plane);
        let input = stack.input();
        self.stack = Some(stack);
        Ok(input)
    }

    pub(crate) fn push(&mut self, frame: &Image) -> Result<Arc<[f64]>> {
        let plane = preprocess_observation(frame, &self.cfg.fovea, &self.cfg.spectral)?;
        let stack = self.stack.as_mut().expect("observer reset before push");
        stack.push(plane);
        Ok(stack.input())
    }
}

/// Shared progress counters and the metrics row log.
struct Progress {
    every: u64,
    window: usize,
    started: Option<Instant>,
    steps: u64,
    recent: VecDeque<f64>,
    episodes: Vec<f64>,
    entropy_sum: f64,
    entropy_n: u64,
    rp_sum: f64,
    rp_n: u64,
    rows: Vec<MetricsRow>,
}

impl Progress {
    fn new(cfg: &TrainConfig) -> Self {
        Self {
            every: cfg.metrics_every,
            window: cfg.return_window,
            started: cfg.wall_clock.then(Instant::now),
            steps: 0,
            recent: VecDeque::new(),
            episodes: Vec::new(),
            entropy_sum: 0.0,
            entropy_n: 0,
            rp_sum: 0.0,
            rp_n: 0,
            rows: Vec::new(),
        }
    }

    fn episode(&mut self, ret: f64) {
        self.episodes.push(ret);
        self.recent.push_back(ret);
        if self.recent.len() > self.window {
            self.recent.pop_front();
        }
    }

    fn step(&mut self, entropy: f64) {
        self.steps += 1;
        self.entropy_sum += entropy;
        self.entropy_n += 1;
        if self.steps % self.every == 0 {
            let mean = |s: f64, n: u64| if n == 0 { 0.0 } else { s / n as f64 };
            let mean_return = if self.recent.is_empty() {
                0.0
            } else {
                self.recent.iter().sum::<f64>() / self.recent.len() as f64
            };
            self.rows.push(MetricsRow {
                env_steps: self.steps,
                wall_seconds: self.started.map_or(0.0, |t| t.elapsed().as_secs_f64()),
                mean_return,
                entropy: mean(self.entropy_sum, self.entropy_n),
                rp_loss: mean(self.rp_sum, self.rp_n),
            });
            self.entropy_sum = 0.0;
            self.entropy_n = 0;
            self.rp_sum = 0.0;
            self.rp_n = 0;
        }
    }

    fn rp_loss(&mut self, loss: f64) {
        self.rp_sum += loss;
        self.rp_n += 1;
    }
}

struct RunContext<'a> {
    cfg: &'a TrainConfig,
    spec: &'a MazeSpec,
    shared: &'a SharedParams,
    budget: AtomicU64,
    progress: Mutex<Progress>,
    config_text: String,
    out_dir: &'a Path,
    next_checkpoint: AtomicU64,
}

impl RunContext<'_> {
    fn claim_step(&self) -> bool {
        self.budget
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |left| left.checked_sub(1))
            .is_ok()
    }

    fn checkpoint(&self) -> Checkpoint {
        let (params, opt) = self.shared.state();
        Checkpoint {
            config: self.config_text.clone(),
            maze: self.spec.source().to_string(),
            params: params.data,
            opt,
        }
    }

    fn maybe_checkpoint(&self) -> Result<()> {
        if self.cfg.checkpoint_every == 0 {
            return Ok(());
        }
        let steps = self.progress.lock().expect("progress lock").steps;
        let due = self.next_checkpoint.load(Ordering::SeqCst);
        if steps >= due
            && self
                .next_checkpoint
                .compare_exchange(due, due + self.cfg.checkpoint_every, Ordering::SeqCst, Ordering::SeqCst)
                .is_ok()
        {
            self.checkpoint()
                .save(self.out_dir.join(format!("ckpt_{due:09}.ckpt")))?;
        }
        Ok(())
    }
}

fn episode_seed(cfg: &TrainConfig, worker: usize, episode: u64) -> u64 {
    derive_seed(cfg.seed, ((worker as u64) << 40) | episode)
}

fn run_worker(ctx: &RunContext<'_>, worker: usize) -> Result<()> {
    let cfg = ctx.cfg;
    let acfg = &cfg.agent;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0x5EED_0F_A11, worker as u64));
    let mut local = ctx.shared.snapshot();
    let mut replay = ReplayBuffer::new(acfg.replay_capacity);
    let mut observer = Observer::new(cfg);

    let mut episode = 0u64;
    let (mut state, frame) = maze::reset(ctx.spec, episode_seed(cfg, worker, episode));
    let mut input = observer.reset(&frame)?;

    'outer: loop {
        ctx.shared.refresh(&mut local);
        let mut traj = Trajectory::default();
        for _ in 0..acfg.rollout_n {
            if !ctx.claim_step() {
                break;
            }
            let f = forward(&local, &input)?;
            let action = sample_action(&f.policy, &mut rng);
            let step = maze::step(ctx.spec, &mut state, Action::from_index(action))?;
            replay.observe(input.clone(), step.reward);
            traj.inputs.push(input.clone());
            traj.actions.push(action);
            traj.rewards.push(acfg.learning_reward(step.reward));
            {
                let mut p = ctx.progress.lock().expect("progress lock");
                if step.done {
                    p.episode(state.episode_return);
                }
                p.step(f.entropy());
            }
            if step.done {
                traj.terminal = true;
                replay.end_episode();
                episode += 1;
                let (s, frame) = maze::reset(ctx.spec, episode_seed(cfg, worker, episode));
                state = s;
                input = observer.reset(&frame)?;
                break;
            }
            input = observer.push(&step.frame)?;
        }
        if traj.is_empty() {
            break 'outer;
        }
        if !traj.terminal {
            traj.bootstrap = forward(&local, &input)?.value;
        }
        let (_, mut grad, _) = a3c_loss_and_grad(&local, &traj, acfg)?;
        if !replay.is_empty() && acfg.rp_coef > 0.0 {
            let sample = sample_rp_batch(&replay, &mut rng, acfg)?;
            let (rp_loss, rp_grad) = rp_loss_and_grad(&local, &sample)?;
            for (g, r) in grad.iter_mut().zip(&rp_grad) {
                *g += acfg.rp_coef * r;
            }
            ctx.progress.lock().expect("progress lock").rp_loss(rp_loss);
        }
        ctx.shared.apply(&grad, acfg);
        ctx.maybe_checkpoint()?;
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Runs one training job and writes `metrics.csv`, `config.txt`, periodic
/// checkpoints and `final.ckpt` into `out_dir`.
pub fn train(cfg: &TrainConfig, out_dir: &Path) -> Result<TrainOutcome> {
    cfg.validate()?;
    let spec = cfg.maze()?;
    ensure_dir(out_dir)?;

    let shared = SharedParams::new(initial_params(cfg));
    let config_text = cfg.to_text();
    write_file(&out_dir.join(CONFIG_FILE), &config_text)?;

    let ctx = RunContext {
        cfg,
        spec: &spec,
        shared: &shared,
        budget: AtomicU64::new(cfg.total_env_steps),
        progress: Mutex::new(Progress::new(cfg)),
        config_text,
        out_dir,
        next_checkpoint: AtomicU64::new(cfg.checkpoint_every),
    };

    if cfg.workers == 1 {
        run_worker(&ctx, 0)?;
    } else {
        let results: Vec<Result<()>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..cfg.workers)
                .map(|w| {
                    let ctx = &ctx;
                    s.spawn(move || run_worker(ctx, w))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        results.into_iter().collect::<Result<Vec<()>>>()?;
    }

    let checkpoint = ctx.checkpoint();
    let checkpoint_path = out_dir.join(FINAL_CHECKPOINT);
    checkpoint.save(&checkpoint_path)?;
    let progress = ctx.progress.into_inner().expect("progress lock");
    let metrics_path = out_dir.join(METRICS_FILE);
    write_file(&metrics_path, &metrics_csv(&progress.rows))?;

    Ok(TrainOutcome {
        rows: progress.rows,
        episode_returns: progress.episodes,
        checkpoint,
        metrics_path,
        checkpoint_path,
    })
}

/// Initial parameters `train` would start from for this config.
pub fn initial_params(cfg: &TrainConfig) -> Params {
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
    Params::init(cfg.agent.layout(), &mut init_rng)
}

/// Mean and population standard deviation of a uniformly random policy's episode returns.
pub fn random_policy_baseline(spec: &MazeSpec, episodes: usize, seed: u64) -> (f64, f64, Vec<f64>) {
    let mut picker = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xBA5E));
    let returns: Vec<f64> = (0..episodes as u64)
        .map(|e| {
            let (mut state, _) = maze::reset(spec, derive_seed(seed, e));
            while !state.is_done(spec) {
                let a = Action::from_index(picker.random_range(0..Action::COUNT));
                maze::step(spec, &mut state, a).expect("episode not finished");
            }
            state.episode_return
        })
        .collect();
    let (mean, std) = super::mean_std(&returns);
    (mean, std, returns)
}
