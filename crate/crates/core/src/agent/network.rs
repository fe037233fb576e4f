use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::maze::Action;

use super::{AgentConfig, RpSample};

/// Reward-sign classes predicted by the auxiliary head: zero, positive, negative.
pub const REWARD_CLASSES: usize = 3;
const ACTIONS: usize = Action::COUNT;
/// Frames per reward-prediction window.
pub(crate) const RP_WINDOW: usize = 3;

/// Offsets of each parameter block inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub input_dim: usize,
    pub hidden: usize,
    w_enc: usize,
    b_enc: usize,
    w_pi: usize,
    b_pi: usize,
    w_v: usize,
    b_v: usize,
    w_rp: usize,
    b_rp: usize,
    len: usize,
}

impl Layout {
    pub fn new(input_dim: usize, hidden: usize) -> Self {
        let w_enc = 0;
        let b_enc = w_enc + hidden * input_dim;
        let w_pi = b_enc + hidden;
        let b_pi = w_pi + ACTIONS * hidden;
        let w_v = b_pi + ACTIONS;
        let b_v = w_v + hidden;
        let w_rp = b_v + 1;
        let b_rp = w_rp + REWARD_CLASSES * RP_WINDOW * hidden;
        let len = b_rp + REWARD_CLASSES;
        Self {
            input_dim,
            hidden,
            w_enc,
            b_enc,
            w_pi,
            b_pi,
            w_v,
            b_v,
            w_rp,
            b_rp,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Named blocks as `(name, start, end)`.
    pub fn blocks(&self) -> [(&'static str, usize, usize); 8] {
        [
            ("encoder.weight", self.w_enc, self.b_enc),
            ("encoder.bias", self.b_enc, self.w_pi),
            ("policy.weight", self.w_pi, self.b_pi),
            ("policy.bias", self.b_pi, self.w_v),
            ("value.weight", self.w_v, self.b_v),
            ("value.bias", self.b_v, self.w_rp),
            ("reward.weight", self.w_rp, self.b_rp),
            ("reward.bias", self.b_rp, self.len),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub layout: Layout,
    pub data: Vec<f64>,
}

impl Params {
    pub fn zeros(layout: Layout) -> Self {
        Self {
            layout,
            data: vec![0.0; layout.len()],
        }
    }

    /// Uniform fan-in scaled weights, small policy logits, zero biases.
    pub fn init<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> Self {
        let mut p = Self::zeros(layout);
        let l = layout;
        let mut fill = |range: std::ops::Range<usize>, bound: f64| {
            for v in &mut p.data[range] {
                *v = rng.random_range(-bound..bound);
            }
        };
        fill(l.w_enc..l.b_enc, 1.0 / (l.input_dim as f64).sqrt());
        fill(l.w_pi..l.b_pi, 0.01);
        fill(l.w_v..l.b_v, 1.0 / (l.hidden as f64).sqrt());
        fill(l.w_rp..l.b_rp, 1.0 / ((RP_WINDOW * l.hidden) as f64).sqrt());
        p
    }

    pub fn from_vec(layout: Layout, data: Vec<f64>) -> Result<Self> {
        if data.len() != layout.len() {
            return Err(Error::Dimensions(format!(
                "parameter vector has {} entries, layout needs {}",
                data.len(),
                layout.len()
            )));
        }
        Ok(Self { layout, data })
    }
}

/// Output of one forward pass, with the intermediates backprop needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: [f64; ACTIONS],
    pub policy: [f64; ACTIONS],
    pub value: f64,
}

impl Forward {
    pub fn entropy(&self) -> f64 {
        -self
            .policy
            .iter()
            .map(|&p| if p > 0.0 { p * p.ln() } else { 0.0 })
            .sum::<f64>()
    }
}

fn check_input(layout: &Layout, input: &[f64]) -> Result<()> {
    if input.len() != layout.input_dim {
        return Err(Error::Dimensions(format!(
            "agent input has {} samples, network expects {}",
            input.len(),
            layout.input_dim
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Encoder pre-activations and ReLU outputs.
fn encode(params: &Params, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = &params.layout;
    check_input(l, input)?;
    let w = &params.data[l.w_enc..l.b_enc];
    let b = &params.data[l.b_enc..l.w_pi];
    let pre: Vec<f64> = w
        .chunks_exact(l.input_dim)
        .zip(b)
        .map(|(row, bias)| dot(row, input) + bias)
        .collect();
    if pre.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("encoder activations".into()));
    }
    let hidden = pre.iter().map(|&v| v.max(0.0)).collect();
    Ok((pre, hidden))
}

fn softmax<const N: usize>(logits: &[f64; N]) -> [f64; N] {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = logits.map(|z| (z - m).exp());
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

fn log_softmax<const N: usize>(logits: &[f64; N]) -> [f64; N] {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    logits.map(|z| z - lse)
}

pub fn forward(params: &Params, input: &[f64]) -> Result<Forward> {
    let l = &params.layout;
    let (pre, hidden) = encode(params, input)?;
    let w_pi = &params.data[l.w_pi..l.b_pi];
    let b_pi = &params.data[l.b_pi..l.w_v];
    let mut logits = [0.0; ACTIONS];
    for (a, z) in logits.iter_mut().enumerate() {
        *z = dot(&w_pi[a * l.hidden..(a + 1) * l.hidden], &hidden) + b_pi[a];
    }
    let value = dot(&params.data[l.w_v..l.b_v], &hidden) + params.data[l.b_v];
    if logits.iter().any(|z| !z.is_finite()) || !value.is_finite() {
        return Err(Error::NonFinite("policy or value output".into()));
    }
    Ok(Forward {
        policy: softmax(&logits),
        pre,
        hidden,
        logits,
        value,
    })
}

/// Accumulates the encoder gradient for one input given `d loss / d hidden`.
fn backprop_encoder(params: &Params, grad: &mut [f64], input: &[f64], pre: &[f64], d_hidden: &[f64]) {
    let l = &params.layout;
    for (j, (&dh, &z)) in d_hidden.iter().zip(pre).enumerate() {
        if z <= 0.0 || dh == 0.0 {
            continue;
        }
        let row = l.w_enc + j * l.input_dim;
        axpy(dh, input, &mut grad[row..row + l.input_dim]);
        grad[l.b_enc + j] += dh;
    }
}

/// Discounted n-step targets, `R_t = r_t + gamma R_{t+1}` seeded by `bootstrap`.
pub fn n_step_returns(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut running = bootstrap;
    for (t, &r) in rewards.iter().enumerate().rev() {
        running = r + gamma * running;
        out[t] = running;
    }
    out
}

/// Contiguous rollout segment. Only the final step may be terminal.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub inputs: Vec<Arc<[f64]>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub terminal: bool,
    /// Value estimate of the state after the last step; ignored when terminal.
    pub bootstrap: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        if self.inputs.len() != self.len() || self.actions.len() != self.len() {
            return Err(Error::InvalidArgument("trajectory fields differ in length".into()));
        }
        if let Some(&a) = self.actions.iter().find(|&&a| a >= ACTIONS) {
            return Err(Error::InvalidArgument(format!("action index {a} out of range")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct A3cStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// Actor-critic loss over a rollout and its exact gradient.
///
/// `sum_t [ -log pi(a_t|s_t) A_t - beta H(pi(.|s_t)) + c (R_t - V(s_t))^2 ]`
/// with the advantage `A_t = R_t - V(s_t)` treated as a constant in the policy term.
pub fn a3c_loss_and_grad(
    params: &Params,
    traj: &Trajectory,
    cfg: &AgentConfig,
) -> Result<(f64, Vec<f64>, A3cStats)> {
    traj.validate()?;
    let l = params.layout;
    let bootstrap = if traj.terminal { 0.0 } else { traj.bootstrap };
    let returns = n_step_returns(&traj.rewards, bootstrap, cfg.gamma);
    let mut grad = vec![0.0; l.len()];
    let mut stats = A3cStats::default();
    let w_pi = &params.data[l.w_pi..l.b_pi];
    let w_v = &params.data[l.w_v..l.b_v];

    for ((input, &action), &ret) in traj.inputs.iter().zip(&traj.actions).zip(&returns) {
        let f = forward(params, input)?;
        let adv = ret - f.value;
        let log_pi = log_softmax(&f.logits);
        let entropy = f.entropy();
        stats.policy_loss += -log_pi[action] * adv;
        stats.value_loss += cfg.value_coef * adv * adv;
        stats.entropy += entropy;

        let mut d_logits = [0.0; ACTIONS];
        for (a, d) in d_logits.iter_mut().enumerate() {
            let onehot = if a == action { 1.0 } else { 0.0 };
            *d = -adv * (onehot - f.policy[a]) + cfg.entropy_beta * f.policy[a] * (log_pi[a] + entropy);
        }
        let d_value = -2.0 * cfg.value_coef * adv;

        let mut d_hidden = vec![0.0; l.hidden];
        for (a, &d) in d_logits.iter().enumerate() {
            let row = l.w_pi + a * l.hidden;
            axpy(d, &f.hidden, &mut grad[row..row + l.hidden]);
            grad[l.b_pi + a] += d;
            axpy(d, &w_pi[a * l.hidden..(a + 1) * l.hidden], &mut d_hidden);
        }
        axpy(d_value, &f.hidden, &mut grad[l.w_v..l.b_v]);
        grad[l.b_v] += d_value;
        axpy(d_value, w_v, &mut d_hidden);
        backprop_encoder(params, &mut grad, input, &f.pre, &d_hidden);
    }

    let n = traj.len() as f64;
    let loss = stats.policy_loss - cfg.entropy_beta * stats.entropy + stats.value_loss;
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("actor-critic loss {loss}")));
    }
    stats.entropy /= n;
    Ok((loss, grad, stats))
}

/// Cross-entropy of the reward-sign head on a three-frame window, and its gradient.
pub fn rp_loss_and_grad(params: &Params, sample: &RpSample) -> Result<(f64, Vec<f64>)> {
    let (frames, label) = (&sample.frames, sample.label);
    if label >= REWARD_CLASSES {
        return Err(Error::InvalidArgument(format!("reward class {label} out of range")));
    }
    let l = params.layout;
    let encoded: Vec<(Vec<f64>, Vec<f64>)> = frames
        .iter()
        .map(|f| encode(params, f))
        .collect::<Result<_>>()?;
    let w_rp = &params.data[l.w_rp..l.b_rp];
    let concat_dim = RP_WINDOW * l.hidden;
    let mut logits = [0.0; REWARD_CLASSES];
    for (c, z) in logits.iter_mut().enumerate() {
        let row = &w_rp[c * concat_dim..(c + 1) * concat_dim];
        *z = params.data[l.b_rp + c]
            + encoded
                .iter()
                .enumerate()
                .map(|(k, (_, h))| dot(&row[k * l.hidden..(k + 1) * l.hidden], h))
                .sum::<f64>();
    }
    let log_p = log_softmax(&logits);
    let loss = -log_p[label];
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("reward-prediction loss {loss}")));
    }

    let mut grad = vec![0.0; l.len()];
    let d_logits: Vec<f64> = (0..REWARD_CLASSES)
        .map(|c| log_p[c].exp() - if c == label { 1.0 } else { 0.0 })
        .collect();
    for (c, &d) in d_logits.iter().enumerate() {
        grad[l.b_rp + c] += d;
        for (k, (_, h)) in encoded.iter().enumerate() {
            let start = l.w_rp + c * concat_dim + k * l.hidden;
            axpy(d, h, &mut grad[start..start + l.hidden]);
        }
    }
    for (k, (frame, (pre, _))) in frames.iter().zip(&encoded).enumerate() {
        let mut d_hidden = vec![0.0; l.hidden];
        for (c, &d) in d_logits.iter().enumerate() {
            let start = c * concat_dim + k * l.hidden;
            axpy(d, &w_rp[start..start + l.hidden], &mut d_hidden);
        }
        backprop_encoder(params, &mut grad, frame, pre, &d_hidden);
    }
    Ok((loss, grad))
}
