//! Small actor-critic agent: a one-hidden-layer encoder shared by policy,
//! value and reward-prediction heads, trained with n-step advantage
//! actor-critic and hand-written backpropagation in 64-bit floats.

mod checkpoint;
mod network;
mod optim;
mod replay;

pub use checkpoint::Checkpoint;
pub use network::{
    a3c_loss_and_grad, forward, n_step_returns, rp_loss_and_grad, A3cStats, Forward, Layout,
    Params, Trajectory, REWARD_CLASSES,
};
pub use optim::{apply_gradients, OptState, SharedParams};
pub use replay::{reward_class, sample_rp_batch, FrameStack, ReplayBuffer, RpSample};

use rand::Rng;

use crate::error::{Error, Result};
use crate::foveation::INPUT_SIDE;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    pub rollout_n: usize,
    pub entropy_beta: f64,
    pub value_coef: f64,
    pub lr: f64,
    pub rmsprop_decay: f64,
    pub rmsprop_eps: f64,
    /// Global-norm gradient clip; 0 disables.
    pub grad_clip: f64,
    /// Rewards seen by the learner are clipped to `[-reward_clip, reward_clip]`; 0 disables.
    pub reward_clip: f64,
    pub frame_stack: usize,
    pub hidden: usize,
    /// Probability of sampling a window that precedes a nonzero reward.
    pub rp_skew: f64,
    pub rp_coef: f64,
    pub replay_capacity: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            rollout_n: 20,
            entropy_beta: 0.01,
            value_coef: 0.5,
            lr: 7e-4,
            rmsprop_decay: 0.99,
            rmsprop_eps: 0.1,
            grad_clip: 40.0,
            reward_clip: 1.0,
            frame_stack: 4,
            hidden: 64,
            rp_skew: 0.5,
            rp_coef: 1.0,
            replay_capacity: 2000,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} not in (0, 1]", self.gamma));
        }
        if self.rollout_n == 0 {
            return bad("rollout_n must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.rp_skew) {
            return bad(format!("rp_skew {} not in [0, 1]", self.rp_skew));
        }
        if !(0.0..1.0).contains(&self.rmsprop_decay) {
            return bad(format!("rmsprop_decay {} not in [0, 1)", self.rmsprop_decay));
        }
        if !(self.rmsprop_eps > 0.0) {
            return bad("rmsprop_eps must be > 0".into());
        }
        if self.frame_stack == 0 || self.hidden == 0 || self.replay_capacity == 0 {
            return bad("frame_stack, hidden and replay_capacity must be >= 1".into());
        }
        for (name, v) in [
            ("entropy_beta", self.entropy_beta),
            ("value_coef", self.value_coef),
            ("lr", self.lr),
            ("grad_clip", self.grad_clip),
            ("reward_clip", self.reward_clip),
            ("rp_coef", self.rp_coef),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// The reward as the learner sees it.
    pub fn learning_reward(&self, r: f64) -> f64 {
        if self.reward_clip > 0.0 {
            r.clamp(-self.reward_clip, self.reward_clip)
        } else {
            r
        }
    }

    pub fn layout(&self) -> Layout {
        Layout::new(INPUT_SIDE * INPUT_SIDE * self.frame_stack, self.hidden)
    }
}

/// Samples an action index from a probability vector.
pub fn sample_action<R: Rng + ?Sized>(policy: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in policy.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    policy.len() - 1
}

pub fn greedy_action(policy: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in policy.iter().enumerate() {
        if p > policy[best] {
            best = i;
        }
    }
    best
}
