use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::imaging::FloatPlane;

use super::network::RP_WINDOW;
use super::AgentConfig;

/// Reward-sign class: 0 for zero, 1 for positive, 2 for negative.
pub fn reward_class(reward: f64) -> usize {
    if reward > 0.0 {
        1
    } else if reward < 0.0 {
        2
    } else {
        0
    }
}

/// Three consecutive agent inputs and the sign class of the reward that followed the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct RpSample {
    pub frames: [Arc<[f64]>; RP_WINDOW],
    pub label: usize,
}

impl RpSample {
    pub fn is_rewarding(&self) -> bool {
        self.label != 0
    }
}

/// Bounded FIFO of reward-prediction windows.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<RpSample>,
    rewarding: usize,
    /// Inputs seen since the last episode boundary, newest last.
    recent: VecDeque<Arc<[f64]>>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
            rewarding: 0,
            recent: VecDeque::with_capacity(RP_WINDOW),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn rewarding_len(&self) -> usize {
        self.rewarding
    }

    pub fn push(&mut self, sample: RpSample) {
        if self.entries.len() == self.capacity {
            if let Some(old) = self.entries.pop_front() {
                if old.is_rewarding() {
                    self.rewarding -= 1;
                }
            }
        }
        if sample.is_rewarding() {
            self.rewarding += 1;
        }
        self.entries.push_back(sample);
    }

    /// Records that `input` was observed and acting on it produced `reward`.
    /// Windows never span an episode boundary; call [`ReplayBuffer::end_episode`] between episodes.
    pub fn observe(&mut self, input: Arc<[f64]>, reward: f64) {
        if self.recent.len() == RP_WINDOW {
            self.recent.pop_front();
        }
        self.recent.push_back(input);
        if self.recent.len() == RP_WINDOW {
            let frames = std::array::from_fn(|i| self.recent[i].clone());
            self.push(RpSample {
                frames,
                label: reward_class(reward),
            });
        }
    }

    pub fn end_episode(&mut self) {
        self.recent.clear();
    }

    fn nth_matching(&self, rewarding: bool, n: usize) -> &RpSample {
        self.entries
            .iter()
            .filter(|s| s.is_rewarding() == rewarding)
            .nth(n)
            .expect("class count is tracked")
    }
}

/// Skewed draw: a rewarding window with probability `rp_skew` when both kinds are stored.
pub fn sample_rp_batch<R: Rng + ?Sized>(
    buffer: &ReplayBuffer,
    rng: &mut R,
    cfg: &AgentConfig,
) -> Result<RpSample> {
    if buffer.is_empty() {
        return Err(Error::EmptyReplay);
    }
    let rewarding = buffer.rewarding;
    let zero = buffer.len() - rewarding;
    let want_rewarding = if rewarding == 0 {
        false
    } else if zero == 0 {
        true
    } else {
        rng.random::<f64>() < cfg.rp_skew
    };
    let pool = if want_rewarding { rewarding } else { zero };
    Ok(buffer.nth_matching(want_rewarding, rng.random_range(0..pool)).clone())
}

/// Sliding stack of the most recent planes, oldest first.
#[derive(Debug, Clone)]
pub struct FrameStack {
    depth: usize,
    frames: VecDeque<FloatPlane>,
}

impl FrameStack {
    /// Starts a stack filled with copies of `first`.
    pub fn new(depth: usize, first: FloatPlane) -> Self {
        assert!(depth > 0);
        Self {
            depth,
            frames: std::iter::repeat_n(first, depth).collect(),
        }
    }

    pub fn push(&mut self, frame: FloatPlane) {
        self.frames.pop_front();
        self.frames.push_back(frame);
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn input(&self) -> Arc<[f64]> {
        self.frames.iter().flat_map(|f| f.data().iter().copied()).collect()
    }
}
