//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use attend_core::agent::{forward, AgentConfig, Layout, Params, RpSample, Trajectory};
use attend_core::imaging::{FloatPlane, Image};
use attend_core::saliency::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Direct O(N^4) forward DFT of a real plane, row-major.
pub fn dft_oracle(plane: &FloatPlane) -> Vec<Complex64> {
    let (w, h) = (plane.width(), plane.height());
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for v in 0..h {
        for u in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                    acc += plane.get(x, y) * Complex64::from_polar(1.0, phase);
                }
            }
            out[v * w + u] = acc;
        }
    }
    out
}

pub fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> FloatPlane {
    FloatPlane::new(w, h, (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_rgb(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::new(w, h, 3, (0..w * h * 3).map(|_| rng.random()).collect()).unwrap()
}

/// Smooth random blobs on a dark background; closer to rendered frames than white noise.
pub fn blob_frame(rng: &mut ChaCha8Rng, side: usize) -> Image {
    let mut img = Image::filled(side, side, [20, 20, 20]).unwrap();
    for _ in 0..rng.random_range(1..5) {
        let (cx, cy) = (rng.random_range(0..side), rng.random_range(0..side));
        let r = rng.random_range(3..side / 4);
        let color = [rng.random(), rng.random(), rng.random()];
        for y in cy.saturating_sub(r)..(cy + r).min(side) {
            for x in cx.saturating_sub(r)..(cx + r).min(side) {
                img.set_rgb(x, y, color);
            }
        }
    }
    img
}

// ---- gradient oracle ----

pub const FD_STEP: f64 = 1e-6;
pub const FD_TOLERANCE: f64 = 1e-4;

/// Relative error with the denominator floored, so roundoff on near-zero entries is not amplified.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-2)
}

pub fn input(rng: &mut ChaCha8Rng, n: usize) -> Arc<[f64]> {
    (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
}

pub fn random_params(rng: &mut ChaCha8Rng, layout: Layout) -> Params {
    let mut p = Params::init(layout, rng);
    for v in p.data.iter_mut() {
        *v += rng.random_range(-0.3..0.3);
    }
    p
}

pub fn random_traj(rng: &mut ChaCha8Rng, dim: usize, len: usize) -> Trajectory {
    Trajectory {
        inputs: (0..len).map(|_| input(rng, dim)).collect(),
        actions: (0..len).map(|_| rng.random_range(0..4)).collect(),
        rewards: (0..len)
            .map(|_| if rng.random_bool(0.3) { rng.random_range(-1.0..10.0) } else { 0.0 })
            .collect(),
        terminal: rng.random_bool(0.5),
        bootstrap: rng.random_range(-2.0..2.0),
    }
}

pub fn random_rp_sample(rng: &mut ChaCha8Rng, dim: usize) -> RpSample {
    RpSample {
        frames: std::array::from_fn(|_| input(rng, dim)),
        label: rng.random_range(0..3),
    }
}

fn discounted(traj: &Trajectory, gamma: f64) -> Vec<f64> {
    let mut ret = if traj.terminal { 0.0 } else { traj.bootstrap };
    let mut out = vec![0.0; traj.len()];
    for t in (0..traj.len()).rev() {
        ret = traj.rewards[t] + gamma * ret;
        out[t] = ret;
    }
    out
}

/// Advantages at `params`, held fixed inside the policy term of the surrogate.
pub fn frozen_advantages(params: &Params, traj: &Trajectory, cfg: &AgentConfig) -> Vec<f64> {
    discounted(traj, cfg.gamma)
        .iter()
        .zip(&traj.inputs)
        .map(|(ret, x)| ret - forward(params, x).unwrap().value)
        .collect()
}

/// Actor-critic objective written from scratch: policy term with frozen advantages,
/// squared value error, minus the entropy bonus.
pub fn a3c_surrogate(params: &Params, traj: &Trajectory, cfg: &AgentConfig, fixed: &[f64]) -> f64 {
    let returns = discounted(traj, cfg.gamma);
    let mut total = 0.0;
    for t in 0..traj.len() {
        let f = forward(params, &traj.inputs[t]).unwrap();
        let entropy: f64 = -f.policy.iter().map(|p| p * p.ln()).sum::<f64>();
        let adv = returns[t] - f.value;
        total += -f.policy[traj.actions[t]].ln() * fixed[t] + cfg.value_coef * adv * adv
            - cfg.entropy_beta * entropy;
    }
    total
}

/// Worst relative error between `grad` and central differences of `loss` over `coords`.
pub fn worst_fd_error<F: Fn(&Params) -> f64>(params: &Params, grad: &[f64], coords: &[usize], loss: F) -> f64 {
    let mut worst: f64 = 0.0;
    for &i in coords {
        let mut plus = params.clone();
        plus.data[i] += FD_STEP;
        let mut minus = params.clone();
        minus.data[i] -= FD_STEP;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(grad[i], numeric));
    }
    worst
}

/// Trailing block of the parameter vector holding the reward-prediction head.
pub fn rp_head_range(layout: Layout) -> std::ops::Range<usize> {
    layout.len() - (3 * 3 * layout.hidden + 3)..layout.len()
}
