//! The two decision-process environments.
//!
//! The binary formulation (BF) is fully observable: the state is a fixed
//! B-bit sequence and each of the 2B actions sets one bit to 0 or 1. Its
//! "wanderer" variant masks every action that would leave the state
//! unchanged. The recurrent formulation (RF) is partially observable: each
//! of the 2^N actions appends an N-bit pattern and the agent observes only
//! the last N bits. Both reward the battery average of the full sequence at
//! the horizon and zero everywhere else.

use crate::bitseq::BitSequence;
use crate::nist::avg_nist;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("action {action} out of range for {count} actions")]
    InvalidAction { action: usize, count: usize },
    #[error("episode already finished; reset before stepping")]
    EpisodeFinished,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// How the binary formulation starts each episode.
///
/// The default is the all-zeros state: the agent has to earn every one of
/// its bits, and a random agent leaves most of the sequence untouched and
/// scores near zero. Starting from fair-coin noise is also available, but
/// note that a random agent then emits uniform bits no matter what it does,
/// which flattens the formulation comparison entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BfInit {
    #[default]
    Zeros,
    Random,
}

/// Binary-formulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BFConfig {
    /// Sequence length in bits.
    pub b: usize,
    /// Episode horizon in steps.
    pub t: usize,
    /// Mask actions that rewrite a bit with its current value.
    pub wanderer: bool,
    /// Episode-start state.
    pub init: BfInit,
}

impl BFConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.b < 1 {
            return Err(EnvError::InvalidConfig("B must be >= 1".into()));
        }
        if self.t < 1 {
            return Err(EnvError::InvalidConfig("T must be >= 1".into()));
        }
        Ok(())
    }
}

/// Recurrent-formulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RFConfig {
    /// Bits appended per step; the action space has 2^N entries.
    pub n: usize,
    /// Episode horizon in steps.
    pub t: usize,
}

impl RFConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(1..=10).contains(&self.n) {
            return Err(EnvError::InvalidConfig("N must be in 1..=10".into()));
        }
        if self.t < 1 {
            return Err(EnvError::InvalidConfig("T must be >= 1".into()));
        }
        Ok(())
    }
}

/// One environment step: what the agent observes, what it earned, and
/// whether the episode is over.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: BitSequence,
    pub reward: f64,
    pub done: bool,
}

/// Per-action permission flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMask {
    pub allowed: Vec<bool>,
}

impl ActionMask {
    pub fn allowed_count(&self) -> usize {
        self.allowed.iter().filter(|&&a| a).count()
    }

    pub fn is_allowed(&self, action: usize) -> bool {
        self.allowed.get(action).copied().unwrap_or(false)
    }
}

/// Common environment surface for episode collection and evaluation.
pub trait Env {
    /// Starts a new episode and returns the initial observation.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> BitSequence;
    fn step(&mut self, action: usize) -> Result<StepResult, EnvError>;
    fn action_count(&self) -> usize;
    /// The current action mask, if this environment masks at all.
    fn action_mask(&self) -> Option<ActionMask>;
    fn horizon(&self) -> usize;
    /// The full (possibly hidden) state.
    fn full_state(&self) -> &BitSequence;
    /// Steps taken in the current episode.
    fn current_step(&self) -> usize;
    /// Observation size in bits.
    fn observation_len(&self) -> usize;
}

/// Fully observable fixed-length environment.
#[derive(Debug, Clone)]
pub struct BfEnv {
    cfg: BFConfig,
    state: BitSequence,
    t: usize,
}

impl BfEnv {
    pub fn new(cfg: BFConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        Ok(Self {
            state: BitSequence::from_bits(vec![0u8; cfg.b]).expect("zero state is binary"),
            cfg,
            t: 0,
        })
    }

    pub fn config(&self) -> &BFConfig {
        &self.cfg
    }

    /// Decodes an action index into a (1-based position, value) pair.
    pub fn decode_action(action: usize) -> (usize, u8) {
        (action / 2 + 1, (action % 2) as u8)
    }

    /// The wanderer mask over the given state: an action is allowed iff it
    /// changes the bit it targets.
    pub fn wanderer_mask(state: &BitSequence) -> ActionMask {
        let allowed = (0..2 * state.len())
            .map(|action| {
                let (n, v) = Self::decode_action(action);
                state.bit(n).expect("position in range") != v
            })
            .collect();
        ActionMask { allowed }
    }

    #[cfg(test)]
    fn force_state(&mut self, state: BitSequence) {
        self.state = state;
    }
}

impl Env for BfEnv {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> BitSequence {
        self.state = match self.cfg.init {
            BfInit::Zeros => {
                BitSequence::from_bits(vec![0u8; self.cfg.b]).expect("zero state is binary")
            }
            BfInit::Random => BitSequence::random(self.cfg.b, rng),
        };
        self.t = 0;
        self.state.clone()
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.t >= self.cfg.t {
            return Err(EnvError::EpisodeFinished);
        }
        if action >= self.action_count() {
            return Err(EnvError::InvalidAction {
                action,
                count: self.action_count(),
            });
        }
        let (n, v) = Self::decode_action(action);
        self.state = self.state.set_bit(n, v).expect("decoded position in range");
        self.t += 1;
        let done = self.t == self.cfg.t;
        let reward = if done { avg_nist(&self.state) } else { 0.0 };
        Ok(StepResult {
            observation: self.state.clone(),
            reward,
            done,
        })
    }

    fn action_count(&self) -> usize {
        2 * self.cfg.b
    }

    fn action_mask(&self) -> Option<ActionMask> {
        self.cfg.wanderer.then(|| Self::wanderer_mask(&self.state))
    }

    fn horizon(&self) -> usize {
        self.cfg.t
    }

    fn full_state(&self) -> &BitSequence {
        &self.state
    }

    fn current_step(&self) -> usize {
        self.t
    }

    fn observation_len(&self) -> usize {
        self.cfg.b
    }
}

/// Thresholds real-valued seed draws into bits: non-negative maps to 1.
pub fn bits_from_draws(draws: &[f64]) -> BitSequence {
    BitSequence::from_bits(
        draws
            .iter()
            .map(|&d| if d >= 0.0 { 1u8 } else { 0u8 })
            .collect::<Vec<_>>(),
    )
    .expect("thresholded bits are binary")
}

/// Partially observable append-only environment.
#[derive(Debug, Clone)]
pub struct RfEnv {
    cfg: RFConfig,
    state: BitSequence,
    t: usize,
}

impl RfEnv {
    pub fn new(cfg: RFConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        Ok(Self {
            state: BitSequence::from_bits(vec![0u8; cfg.n]).expect("zero seed is binary"),
            cfg,
            t: 0,
        })
    }

    pub fn config(&self) -> &RFConfig {
        &self.cfg
    }

    /// Starts an episode from an explicit seed instead of normal draws.
    pub fn reset_from_seed(&mut self, seed: BitSequence) -> BitSequence {
        assert_eq!(seed.len(), self.cfg.n, "seed must have N bits");
        self.state = seed;
        self.t = 0;
        self.state.clone()
    }

    /// Decodes an action index into its N-bit pattern, most significant
    /// bit first.
    pub fn decode_action(&self, action: usize) -> BitSequence {
        let n = self.cfg.n;
        BitSequence::from_bits(
            (0..n)
                .map(|i| ((action >> (n - 1 - i)) & 1) as u8)
                .collect::<Vec<_>>(),
        )
        .expect("pattern bits are binary")
    }
}

impl Env for RfEnv {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> BitSequence {
        let draws: Vec<f64> = (0..self.cfg.n)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        self.reset_from_seed(bits_from_draws(&draws))
    }

    fn step(&mut self, action: usize) -> Result<StepResult, EnvError> {
        if self.t >= self.cfg.t {
            return Err(EnvError::EpisodeFinished);
        }
        if action >= self.action_count() {
            return Err(EnvError::InvalidAction {
                action,
                count: self.action_count(),
            });
        }
        let pattern = self.decode_action(action);
        self.state = self
            .state
            .append_pattern(&pattern)
            .expect("pattern is non-empty");
        self.t += 1;
        let done = self.t == self.cfg.t;
        let reward = if done { avg_nist(&self.state) } else { 0.0 };
        Ok(StepResult {
            observation: self.state.tail(self.cfg.n),
            reward,
            done,
        })
    }

    fn action_count(&self) -> usize {
        1 << self.cfg.n
    }

    fn action_mask(&self) -> Option<ActionMask> {
        None
    }

    fn horizon(&self) -> usize {
        self.cfg.t
    }

    fn full_state(&self) -> &BitSequence {
        &self.state
    }

    fn current_step(&self) -> usize {
        self.t
    }

    fn observation_len(&self) -> usize {
        self.cfg.n
    }
}

/// Plays one episode choosing uniformly among allowed actions; returns the
/// terminal reward, which equals the episode total since intermediate
/// rewards are zero.
pub fn random_agent_episode(env: &mut dyn Env, rng: &mut ChaCha8Rng) -> f64 {
    env.reset(rng);
    loop {
        let action = match env.action_mask() {
            Some(mask) => {
                let allowed: Vec<usize> = (0..env.action_count())
                    .filter(|&a| mask.is_allowed(a))
                    .collect();
                allowed[rng.gen_range(0..allowed.len())]
            }
            None => rng.gen_range(0..env.action_count()),
        };
        let result = env.step(action).expect("action drawn from valid range");
        if result.done {
            return result.reward;
        }
    }
}
