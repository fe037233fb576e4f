use std::sync::Mutex;

use super::{AgentConfig, Params};

/// RMSProp accumulators plus bookkeeping for skipped updates.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub accum: Vec<f64>,
    pub updates: u64,
    pub skipped: u64,
}

impl OptState {
    pub fn new(len: usize) -> Self {
        Self {
            accum: vec![0.0; len],
            updates: 0,
            skipped: 0,
        }
    }
}

/// RMSProp step on `params`. A non-finite gradient is skipped, counted and reported as `false`.
pub fn apply_gradients(params: &mut Params, grad: &[f64], opt: &mut OptState, cfg: &AgentConfig) -> bool {
    assert_eq!(grad.len(), params.data.len());
    if grad.iter().any(|g| !g.is_finite()) {
        opt.skipped += 1;
        return false;
    }
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let scale = if cfg.grad_clip > 0.0 && norm > cfg.grad_clip {
        cfg.grad_clip / norm
    } else {
        1.0
    };
    let decay = cfg.rmsprop_decay;
    for ((p, a), &g) in params.data.iter_mut().zip(opt.accum.iter_mut()).zip(grad) {
        let g = g * scale;
        *a = decay * *a + (1.0 - decay) * g * g;
        *p -= cfg.lr * g / (*a + cfg.rmsprop_eps).sqrt();
    }
    opt.updates += 1;
    true
}

/// Parameters and optimizer state shared by training workers. Every read and
/// update takes the whole-vector lock, so no update is lost.
#[derive(Debug)]
pub struct SharedParams {
    inner: Mutex<(Params, OptState)>,
}

impl SharedParams {
    pub fn new(params: Params) -> Self {
        let opt = OptState::new(params.data.len());
        Self::with_state(params, opt)
    }

    pub fn with_state(params: Params, opt: OptState) -> Self {
        Self {
            inner: Mutex::new((params, opt)),
        }
    }

    pub fn snapshot(&self) -> Params {
        self.inner.lock().expect("parameter lock poisoned").0.clone()
    }

    /// Copies the shared parameters into an existing buffer.
    pub fn refresh(&self, local: &mut Params) {
        let guard = self.inner.lock().expect("parameter lock poisoned");
        local.data.copy_from_slice(&guard.0.data);
    }

    pub fn apply(&self, grad: &[f64], cfg: &AgentConfig) -> bool {
        let mut guard = self.inner.lock().expect("parameter lock poisoned");
        let (params, opt) = &mut *guard;
        apply_gradients(params, grad, opt, cfg)
    }

    pub fn state(&self) -> (Params, OptState) {
        self.inner.lock().expect("parameter lock poisoned").clone()
    }
}
