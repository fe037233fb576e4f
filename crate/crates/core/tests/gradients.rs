//! Analytic gradients against central finite differences in 64-bit floats.

mod common;

use attend_core::agent::{a3c_loss_and_grad, rp_loss_and_grad, AgentConfig, Layout};
use common::*;
use rand::Rng;

#[test]
fn surrogate_value_matches_reported_loss() {
    let cfg = AgentConfig::default();
    let mut r = rng(9);
    let params = random_params(&mut r, Layout::new(12, 6));
    let traj = random_traj(&mut r, 12, 5);
    let fixed = frozen_advantages(&params, &traj, &cfg);
    let (loss, _, _) = a3c_loss_and_grad(&params, &traj, &cfg).unwrap();
    assert!((loss - a3c_surrogate(&params, &traj, &cfg, &fixed)).abs() < 1e-9);
}

#[test]
fn actor_critic_every_coordinate_small_network() {
    let cfg = AgentConfig::default();
    for seed in 0..5 {
        let mut r = rng(seed);
        let layout = Layout::new(12, 6);
        let params = random_params(&mut r, layout);
        let traj = random_traj(&mut r, 12, 7);
        let fixed = frozen_advantages(&params, &traj, &cfg);
        let (_, grad, _) = a3c_loss_and_grad(&params, &traj, &cfg).unwrap();
        let coords: Vec<usize> = (0..layout.len()).collect();
        let worst = worst_fd_error(&params, &grad, &coords, |p| a3c_surrogate(p, &traj, &cfg, &fixed));
        assert!(worst < FD_TOLERANCE, "seed {seed}: {worst}");
    }
}

#[test]
fn reward_prediction_every_coordinate_small_network() {
    for seed in 0..5 {
        let mut r = rng(100 + seed);
        let layout = Layout::new(12, 6);
        let params = random_params(&mut r, layout);
        let sample = random_rp_sample(&mut r, 12);
        let (_, grad) = rp_loss_and_grad(&params, &sample).unwrap();
        let coords: Vec<usize> = (0..layout.len()).collect();
        let worst = worst_fd_error(&params, &grad, &coords, |p| rp_loss_and_grad(p, &sample).unwrap().0);
        assert!(worst < FD_TOLERANCE, "seed {seed}: {worst}");
    }
}

#[test]
fn actor_critic_default_size_sampled_coordinates() {
    let cfg = AgentConfig::default();
    for seed in 0..5 {
        let mut r = rng(50 + seed);
        let layout = cfg.layout();
        let params = random_params(&mut r, layout);
        let traj = random_traj(&mut r, layout.input_dim, 4);
        let fixed = frozen_advantages(&params, &traj, &cfg);
        let (_, grad, _) = a3c_loss_and_grad(&params, &traj, &cfg).unwrap();
        let mut coords: Vec<usize> = (0..60).map(|_| r.random_range(0..layout.len())).collect();
        coords.extend(rp_head_range(layout).start - 325..rp_head_range(layout).start);
        let worst = worst_fd_error(&params, &grad, &coords, |p| a3c_surrogate(p, &traj, &cfg, &fixed));
        assert!(worst < FD_TOLERANCE, "seed {seed}: {worst}");
    }
}

#[test]
fn reward_prediction_default_size_sampled_coordinates() {
    let cfg = AgentConfig::default();
    for seed in 0..5 {
        let mut r = rng(150 + seed);
        let layout = cfg.layout();
        let params = random_params(&mut r, layout);
        let sample = random_rp_sample(&mut r, layout.input_dim);
        let (_, grad) = rp_loss_and_grad(&params, &sample).unwrap();
        let mut coords: Vec<usize> = (0..40).map(|_| r.random_range(0..layout.len())).collect();
        coords.extend(rp_head_range(layout));
        let worst = worst_fd_error(&params, &grad, &coords, |p| rp_loss_and_grad(p, &sample).unwrap().0);
        assert!(worst < FD_TOLERANCE, "seed {seed}: {worst}");
    }
}

#[test]
fn actor_critic_gradient_ignores_reward_prediction_head() {
    let cfg = AgentConfig::default();
    let mut r = rng(3);
    let layout = Layout::new(10, 5);
    let params = random_params(&mut r, layout);
    let traj = random_traj(&mut r, 10, 6);
    let (_, grad, _) = a3c_loss_and_grad(&params, &traj, &cfg).unwrap();
    assert!(grad[rp_head_range(layout)].iter().all(|&g| g == 0.0));
}
